//! Structure equations of the canonical coframe on `P₁`, the derivative table
//! of the curvature components, and `d² = 0` certificates.

use std::collections::HashMap;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::exterior::{CoeffPoly, Coframe, DRules, ExteriorError, Family, FormExpr, Generator, ScalarSymbol};
use crate::number::GaussRational;
use crate::tensor::{make_constants, StandardConstants, TensorError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Flat,
    Curved,
}

/// Deliberate corruptions of the curved equations, for negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Perturbation {
    None,
    /// `dΓ_{11}` reads a `V_{112}` whose derivative differs from that of its symmetric partner `V_{121}`.
    BreakVSymmetry,
}

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("unsupported n = {0} (symbolic runs need 1 ≤ n ≤ 3)")]
    UnsupportedN(usize),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

/// Exterior derivative rules for the coframe and (curved mode) the curvature symbols.
#[derive(Clone)]
pub struct DRuleSet {
    pub mode: Mode,
    pub perturbation: Perturbation,
    pub coframe: Coframe,
    pub rules: DRules,
    /// The combined right-hand side of `d(ψ₂ + iψ₃)` before splitting.
    pub dpsi23: FormExpr,
}

fn gi(v: i64) -> GaussRational {
    GaussRational::from_int(v)
}

fn gq(a: i64, b: i64) -> GaussRational {
    GaussRational::from_parts(a, b, 0, 1)
}

fn ii() -> GaussRational {
    GaussRational::i()
}

fn gc(re: i64, im: i64) -> GaussRational {
    GaussRational::from_parts(re, 1, im, 1)
}

/// Iterates all multi-indices of length `k` over `0..d`.
pub(crate) fn multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let total = d.pow(k as u32);
    for mut t in 0..total {
        let mut v = vec![0; k];
        for s in (0..k).rev() {
            v[s] = t % d;
            t /= d;
        }
        out.push(v);
    }
    out
}

/// Sorted multi-indices of length `k` over `0..d`.
pub(crate) fn sorted_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    multi_indices(d, k).into_iter().filter(|v| v.windows(2).all(|w| w[0] <= w[1])).collect()
}

/// Shorthand builder used while writing down the equations.
pub struct Eq<'a> {
    pub cf: &'a Coframe,
    pub c: &'a StandardConstants,
    pub d: usize,
}

impl<'a> Eq<'a> {
    pub fn new(cf: &'a Coframe) -> Self {
        Eq { cf, c: &cf.consts, d: cf.dim() }
    }

    /// `η₂ + iη₃`.
    pub fn e2p(&self) -> FormExpr {
        &self.cf.eta(1) + &self.cf.eta(2).scale(&ii())
    }

    /// `η₂ − iη₃`.
    pub fn e2m(&self) -> FormExpr {
        &self.cf.eta(1) - &self.cf.eta(2).scale(&ii())
    }

    pub fn sym(&self, f: Family, idx: &[usize]) -> CoeffPoly {
        self.cf.sym(f, idx, false)
    }

    /// Symbol with all indices barred.
    pub fn symc(&self, f: Family, idx: &[usize]) -> CoeffPoly {
        self.cf.sym(f, idx, true)
    }

    /// `(jT)_{α…} = Π π^{σ̄}_α T_{σ̄…}`.
    pub fn jsym(&self, f: Family, idx: &[usize]) -> CoeffPoly {
        let mut r = CoeffPoly::zero();
        for sig in multi_indices(self.d, idx.len()) {
            let mut k = GaussRational::one();
            for (s, a) in sig.iter().zip(idx) {
                k = &k * self.c.pi_bu(*s, *a);
                if k.is_zero() {
                    break;
                }
            }
            if !k.is_zero() {
                r.add_scaled(&self.symc(f, &sig), &k);
            }
        }
        r
    }

    /// `T^σ = g^{στ̄}T_τ̄` for a one-index family.
    pub fn raise_bar_sym(&self, f: Family, s: usize) -> CoeffPoly {
        let mut r = CoeffPoly::zero();
        for t in 0..self.d {
            r.add_scaled(&self.symc(f, &[t]), self.c.ginv(s, t));
        }
        r
    }

    /// `T^σ̄ = g^{σ̄τ}T_τ` for a one-index family.
    pub fn raise_sym(&self, f: Family, s: usize) -> CoeffPoly {
        let mut r = CoeffPoly::zero();
        for t in 0..self.d {
            r.add_scaled(&self.sym(f, &[t]), &self.c.ginv(t, s).conj());
        }
        r
    }
}

fn with_idx(idx: &[usize], slot: usize, v: usize) -> Vec<usize> {
    let mut r = idx.to_vec();
    r[slot] = v;
    r
}

fn without(idx: &[usize], slot: usize) -> Vec<usize> {
    idx.iter().enumerate().filter(|(i, _)| *i != slot).map(|(_, x)| *x).collect()
}

impl DRuleSet {
    pub fn consts(&self) -> &StandardConstants {
        &self.coframe.consts
    }

    pub fn d(&self, x: &FormExpr) -> Result<FormExpr, ExteriorError> {
        self.rules.d(x, &self.coframe)
    }

    pub fn d_generator(&self, g: Generator) -> &FormExpr {
        self.rules.generators[self.coframe.position(g)].as_ref().expect("rule present")
    }
}

/// Builds the rule set for `n` with positive-definite constants.
pub fn build_rules(n: usize, mode: Mode) -> Result<DRuleSet, StructureError> {
    build_rules_with(make_constants_checked(n, (n, 0))?, mode, Perturbation::None)
}

fn make_constants_checked(n: usize, sig: (usize, usize)) -> Result<StandardConstants, StructureError> {
    if n == 0 || n > 3 {
        return Err(StructureError::UnsupportedN(n));
    }
    Ok(make_constants(n, sig)?)
}

/// Builds the rule set for explicit constants.
pub fn build_rules_with(consts: StandardConstants, mode: Mode, perturbation: Perturbation) -> Result<DRuleSet, StructureError> {
    if consts.n == 0 || consts.n > 3 {
        return Err(StructureError::UnsupportedN(consts.n));
    }
    let cf = Coframe::new(consts);
    let curved = mode == Mode::Curved;
    let e = Eq::new(&cf);
    let d = e.d;
    let c = &cf.consts;
    let mut rules = DRules::new(cf.len());
    let set = |rules: &mut DRules, g: Generator, f: FormExpr| {
        rules.generators[cf.position(g)] = Some(f);
    };
    let (e2p, e2m) = (e.e2p(), e.e2m());
    let eta = |s: usize| cf.eta(s);
    let phi = |s: usize| cf.phi(s);
    let psi = |s: usize| cf.psi(s);

    // dη_s
    let mut tt = FormExpr::zero(); // 2i g θ^α∧θ^β̄
    let mut pp = FormExpr::zero(); // π_{αβ} θ^α∧θ^β
    for a in 0..d {
        for b in 0..d {
            tt.add_scaled(&(&cf.theta(a) ^ &cf.thetab(b)), &(&gc(0, 2) * c.g(a, b)));
            pp.add_scaled(&(&cf.theta(a) ^ &cf.theta(b)), c.pi(a, b));
        }
    }
    let ppb = cf.conj_form(&pp);
    let phi0 = cf.phi0();
    set(&mut rules, Generator::Eta(0), -(&phi0 ^ &eta(0)) - (&phi(1) ^ &eta(2)) + (&phi(2) ^ &eta(1)) + tt);
    set(&mut rules, Generator::Eta(1), -(&phi0 ^ &eta(1)) - (&phi(2) ^ &eta(0)) + (&phi(0) ^ &eta(2)) + &pp + &ppb);
    set(
        &mut rules,
        Generator::Eta(2),
        -(&phi0 ^ &eta(2)) - (&phi(0) ^ &eta(1)) + (&phi(1) ^ &eta(0)) - pp.scale(&ii()) + ppb.scale(&ii()),
    );

    // dθ^α and its conjugate
    let half = gq(1, 2);
    let p01 = &phi0 + &phi(0).scale(&ii());
    let p23 = &phi(1) + &phi(2).scale(&ii());
    for a in 0..d {
        let mut f = -(&cf.phiu(a) ^ &eta(0)).scale(&ii());
        for s in 0..d {
            f.add_scaled(&(&cf.phiub(s) ^ &e2p), &-c.pi_ub(a, s));
            f.add_scaled(&(&p23 ^ &cf.thetab(s)), &-(&half * c.pi_ub(a, s)));
            for b in 0..d {
                f.add_scaled(&(&cf.gamma(s, b) ^ &cf.theta(b)), &-c.pi_up(a, s));
            }
        }
        f.add_scaled(&(&p01 ^ &cf.theta(a)), &-half.clone());
        set(&mut rules, Generator::ThetaBar(a as u8), cf.conj_form(&f));
        set(&mut rules, Generator::Theta(a as u8), f);
    }

    // dφ₀, dφ_s
    let mut ft = FormExpr::zero(); // φ_β∧θ^β
    let mut pft = FormExpr::zero(); // π_{σβ}φ^σ∧θ^β
    for b in 0..d {
        ft.add_assign(&(&cf.phi_l(b) ^ &cf.theta(b)));
        for s in 0..d {
            pft.add_scaled(&(&cf.phiu(s) ^ &cf.theta(b)), c.pi(s, b));
        }
    }
    let ftb = cf.conj_form(&ft);
    let pftb = cf.conj_form(&pft);
    let mut dphi0 = -(&psi(0) ^ &eta(0)) - (&psi(1) ^ &eta(1)) - (&psi(2) ^ &eta(2));
    dphi0.add_scaled(&ft, &gi(-2));
    dphi0.add_scaled(&ftb, &gi(-2));
    set(&mut rules, Generator::Phi0, dphi0);
    let mut dphi1 = -(&phi(1) ^ &phi(2)) - (&psi(1) ^ &eta(2)) + (&psi(2) ^ &eta(1));
    dphi1.add_scaled(&ft, &gc(0, 2));
    dphi1.add_scaled(&ftb, &gc(0, -2));
    set(&mut rules, Generator::Phi(0), dphi1);
    let mut dphi2 = -(&phi(2) ^ &phi(0)) - (&psi(2) ^ &eta(0)) + (&psi(0) ^ &eta(2));
    dphi2.add_scaled(&pft, &gi(-2));
    dphi2.add_scaled(&pftb, &gi(-2));
    set(&mut rules, Generator::Phi(1), dphi2);
    let mut dphi3 = -(&phi(0) ^ &phi(1)) - (&psi(0) ^ &eta(1)) + (&psi(1) ^ &eta(0));
    dphi3.add_scaled(&pft, &gc(0, 2));
    dphi3.add_scaled(&pftb, &gc(0, -2));
    set(&mut rules, Generator::Phi(2), dphi3);

    // dΓ_{αβ}
    for a in 0..d {
        for b in a..d {
            let mut f = FormExpr::zero();
            for s in 0..d {
                for t in 0..d {
                    f.add_scaled(&(&cf.gamma(a, s) ^ &cf.gamma(t, b)), &-c.pi_up(s, t));
                }
                let two_pa = &gi(2) * c.pi_bu(s, a);
                let two_pb = &gi(2) * c.pi_bu(s, b);
                f.add_scaled(&((&cf.phi_l(b) ^ &cf.thetab_l(s)) - (&cf.phib_l(s) ^ &cf.theta_l(b))), &two_pa);
                f.add_scaled(&((&cf.phi_l(a) ^ &cf.thetab_l(s)) - (&cf.phib_l(s) ^ &cf.theta_l(a))), &two_pb);
            }
            if curved {
                f.add_assign(&curvature_dgamma(&e, a, b, perturbation));
            }
            set(&mut rules, Generator::Gamma(a as u8, b as u8), f);
        }
    }

    // dφ_α, then φ^σ̄ = g^{σ̄α}φ_α and conjugates
    let p01m = &phi0 - &phi(0).scale(&ii());
    let p23m = &phi(1) - &phi(2).scale(&ii());
    let s23m = &psi(1) - &psi(2).scale(&ii());
    let mut dphi_l = Vec::new();
    for a in 0..d {
        let mut f = (&p01 ^ &cf.phi_l(a)).scale(&half);
        f.add_scaled(&(&psi(0) ^ &cf.theta_l(a)), &GaussRational::from_parts(0, 1, -1, 2));
        for g in 0..d {
            f.add_scaled(&(&p23m ^ &cf.phiu(g)), &(&half * c.pi(a, g)));
            f.add_scaled(&(&s23m ^ &cf.theta(g)), &-(&half * c.pi(a, g)));
            for s in 0..d {
                f.add_scaled(&(&cf.gammab(s, g) ^ &cf.phiub(g)), &-c.pi_bu(s, a));
            }
        }
        if curved {
            f.add_assign(&curvature_dphi(&e, a));
        }
        dphi_l.push(f);
    }
    for s in 0..d {
        let mut f = FormExpr::zero();
        for a in 0..d {
            f.add_scaled(&dphi_l[a], c.ginv(a, s));
        }
        set(&mut rules, Generator::PhiUp(s as u8), cf.conj_form(&f));
        set(&mut rules, Generator::PhiUpBar(s as u8), f);
    }

    // dψ₁
    let mut f = (&phi0 ^ &psi(0)) - (&phi(1) ^ &psi(2)) + (&phi(2) ^ &psi(1));
    for g in 0..d {
        f.add_scaled(&(&cf.phi_l(g) ^ &cf.phiu(g)), &gc(0, -4));
    }
    if curved {
        f.add_assign(&curvature_dpsi1(&e));
    }
    set(&mut rules, Generator::Psi(0), f);

    // d(ψ₂ + iψ₃)
    let s23p = &psi(1) + &psi(2).scale(&ii());
    let mut f = (&p01m ^ &s23p) + (&p23 ^ &psi(0)).scale(&ii());
    for g in 0..d {
        for dd in 0..d {
            f.add_scaled(&(&cf.phiu(g) ^ &cf.phiu(dd)), &(&gi(4) * c.pi(g, dd)));
        }
    }
    if curved {
        f.add_assign(&curvature_dpsi23(&e));
    }
    let fb = cf.conj_form(&f);
    set(&mut rules, Generator::Psi(1), (&f + &fb).scale(&half));
    set(&mut rules, Generator::Psi(2), (&f - &fb).scale(&GaussRational::from_parts(0, 1, -1, 2)));
    let dpsi23 = f;

    if curved {
        add_symbol_rules(&e, &mut rules);
        if perturbation == Perturbation::BreakVSymmetry {
            // the stand-in for V_{112} differentiates differently from V_{121}
            let v = ScalarSymbol::raw(Family::V, &[0, 0, 1], false);
            let dv = &rules.symbols[&v] + &cf.theta(0);
            rules.symbols.insert(ScalarSymbol::raw(Family::Formal, &[0], false), dv);
        }
    }
    let _ = (&e2p, &e2m);
    Ok(DRuleSet { mode, perturbation, coframe: cf.clone(), rules, dpsi23 })
}

fn curvature_dgamma(e: &Eq, a: usize, b: usize, pert: Perturbation) -> FormExpr {
    use Family::*;
    let (cf, c, d) = (e.cf, e.c, e.d);
    let (e2p, e2m) = (e.e2p(), e.e2m());
    let eta1 = cf.eta(0);
    let mut f = FormExpr::zero();
    for g in 0..d {
        for dl in 0..d {
            for s in 0..d {
                let k = c.pi_ub(s, dl);
                if !k.is_zero() {
                    f.add_assign(&e.sym(S, &[a, b, g, s]).scale(k).mul_form(&(&cf.theta(g) ^ &cf.thetab(dl))));
                }
            }
        }
        let v_abg = if pert == Perturbation::BreakVSymmetry && (a, b, g) == (0, 0, 1) {
            CoeffPoly::symbol(ScalarSymbol::raw(Formal, &[0], false))
        } else {
            e.sym(V, &[a, b, g])
        };
        f.add_assign(&v_abg.mul_form(&(&cf.theta(g) ^ &eta1)));
        let mut vb = CoeffPoly::zero();
        for s in 0..d {
            for t in 0..d {
                let k = c.pi_bu(s, a) * c.pi_bu(t, b);
                if !k.is_zero() {
                    vb.add_scaled(&e.symc(V, &[s, t, g]), &k);
                }
            }
        }
        f.add_assign(&vb.mul_form(&(&cf.thetab(g) ^ &eta1)));
        let mut vs = CoeffPoly::zero();
        for s in 0..d {
            vs.add_scaled(&e.sym(V, &[a, b, s]), &(&gc(0, -1) * c.pi_ub(s, g)));
        }
        f.add_assign(&vs.mul_form(&(&cf.thetab(g) ^ &e2p)));
        f.add_assign(&e.jsym(V, &[a, b, g]).scale(&ii()).mul_form(&(&cf.theta(g) ^ &e2m)));
    }
    f.add_assign(&e.sym(L, &[a, b]).scale(&gc(0, -1)).mul_form(&(&e2p ^ &e2m)));
    f.add_assign(&e.sym(M, &[a, b]).mul_form(&(&eta1 ^ &e2p)));
    f.add_assign(&e.jsym(M, &[a, b]).mul_form(&(&eta1 ^ &e2m)));
    f
}

fn curvature_dphi(e: &Eq, a: usize) -> FormExpr {
    use Family::*;
    let (cf, c, d) = (e.cf, e.c, e.d);
    let (e2p, e2m) = (e.e2p(), e.e2m());
    let eta1 = cf.eta(0);
    let mut f = FormExpr::zero();
    for g in 0..d {
        for dl in 0..d {
            let mut v = CoeffPoly::zero();
            for s in 0..d {
                v.add_scaled(&e.sym(V, &[a, g, s]), &(&gc(0, -1) * c.pi_ub(s, dl)));
            }
            f.add_assign(&v.mul_form(&(&cf.theta(g) ^ &cf.thetab(dl))));
        }
        f.add_assign(&e.sym(M, &[a, g]).mul_form(&(&cf.theta(g) ^ &eta1)));
        let mut lb = CoeffPoly::zero();
        let mut ms = CoeffPoly::zero();
        for s in 0..d {
            lb.add_scaled(&e.symc(L, &[s, g]), c.pi_bu(s, a));
            ms.add_scaled(&e.sym(M, &[a, s]), &(&gc(0, -1) * c.pi_ub(s, g)));
        }
        f.add_assign(&lb.mul_form(&(&cf.thetab(g) ^ &eta1)));
        f.add_assign(&e.sym(L, &[a, g]).scale(&ii()).mul_form(&(&cf.theta(g) ^ &e2m)));
        f.add_assign(&ms.mul_form(&(&cf.thetab(g) ^ &e2p)));
    }
    f.add_assign(&e.sym(C, &[a]).scale(&gi(-1)).mul_form(&(&e2p ^ &e2m)));
    f.add_assign(&e.sym(H, &[a]).mul_form(&(&eta1 ^ &e2p)));
    let mut cu = CoeffPoly::zero();
    for s in 0..d {
        cu.add_scaled(&e.raise_bar_sym(C, s), &(&ii() * c.pi(a, s)));
    }
    f.add_assign(&cu.mul_form(&(&eta1 ^ &e2m)));
    f
}

fn curvature_dpsi1(e: &Eq) -> FormExpr {
    use Family::*;
    let (cf, c, d) = (e.cf, e.c, e.d);
    let (e2p, e2m) = (e.e2p(), e.e2m());
    let eta1 = cf.eta(0);
    let mut f = FormExpr::zero();
    for g in 0..d {
        for dl in 0..d {
            let mut l = CoeffPoly::zero();
            for s in 0..d {
                l.add_scaled(&e.sym(L, &[g, s]), &(&gi(4) * c.pi_ub(s, dl)));
            }
            f.add_assign(&l.mul_form(&(&cf.theta(g) ^ &cf.thetab(dl))));
        }
        f.add_assign(&e.sym(C, &[g]).scale(&gi(4)).mul_form(&(&cf.theta(g) ^ &eta1)));
        f.add_assign(&e.symc(C, &[g]).scale(&gi(4)).mul_form(&(&cf.thetab(g) ^ &eta1)));
        let mut cb = CoeffPoly::zero();
        let mut cu = CoeffPoly::zero();
        for s in 0..d {
            cb.add_scaled(&e.raise_sym(C, s), &(&gc(0, -4) * &c.pi(g, s).conj()));
            cu.add_scaled(&e.raise_bar_sym(C, s), &(&gc(0, 4) * c.pi(g, s)));
        }
        f.add_assign(&cb.mul_form(&(&cf.thetab(g) ^ &e2p)));
        f.add_assign(&cu.mul_form(&(&cf.theta(g) ^ &e2m)));
    }
    f.add_assign(&e.sym(P, &[]).mul_form(&(&eta1 ^ &e2p)));
    f.add_assign(&e.symc(P, &[]).mul_form(&(&eta1 ^ &e2m)));
    f.add_assign(&e.sym(R, &[]).scale(&ii()).mul_form(&(&e2p ^ &e2m)));
    f
}

fn curvature_dpsi23(e: &Eq) -> FormExpr {
    use Family::*;
    let (cf, c, d) = (e.cf, e.c, e.d);
    let (e2p, e2m) = (e.e2p(), e.e2m());
    let eta1 = cf.eta(0);
    let mut f = FormExpr::zero();
    for g in 0..d {
        for dl in 0..d {
            let mut m = CoeffPoly::zero();
            for s in 0..d {
                m.add_scaled(&e.symc(M, &[s, dl]), &(&gc(0, 4) * c.pi_bu(s, g)));
            }
            f.add_assign(&m.mul_form(&(&cf.theta(g) ^ &cf.thetab(dl))));
        }
        let mut cb = CoeffPoly::zero();
        let mut hb = CoeffPoly::zero();
        for s in 0..d {
            cb.add_scaled(&e.symc(C, &[s]), &(&gc(0, 4) * c.pi_bu(s, g)));
            hb.add_scaled(&e.symc(H, &[s]), &(&gc(0, -4) * c.pi_bu(s, g)));
        }
        f.add_assign(&cb.mul_form(&(&cf.theta(g) ^ &eta1)));
        f.add_assign(&e.symc(H, &[g]).scale(&gi(-4)).mul_form(&(&cf.thetab(g) ^ &eta1)));
        f.add_assign(&e.symc(C, &[g]).scale(&gi(-4)).mul_form(&(&cf.thetab(g) ^ &e2p)));
        f.add_assign(&hb.mul_form(&(&cf.theta(g) ^ &e2m)));
    }
    f.add_assign(&e.sym(R, &[]).scale(&gc(0, -1)).mul_form(&(&eta1 ^ &e2p)));
    f.add_assign(&e.symc(Q, &[]).mul_form(&(&eta1 ^ &e2m)));
    f.add_assign(&e.symc(P, &[]).scale(&gi(-1)).mul_form(&(&e2p ^ &e2m)));
    f
}

/// The "tilde" part of the derivative of a curvature symbol: the terms
/// involving the connection forms `Γ, φ₀, φ_s, φ^α` and the lower-order
/// curvature, as a one-form.
pub fn tilde_star(e: &Eq, fam: Family, idx: &[usize]) -> FormExpr {
    use Family::*;
    let (cf, c, d) = (e.cf, e.c, e.d);
    let phi0 = cf.phi0();
    let phi = |s: usize| cf.phi(s);
    let p23p = &phi(1) + &phi(2).scale(&ii());
    let p23m = &phi(1) - &phi(2).scale(&ii());
    let mut f = FormExpr::zero();
    // π^{τν}Γ_{ν a_k} T_{…τ…} over every slot
    if matches!(fam, S | V | L | M | C | H) {
        for k in 0..idx.len() {
            for t in 0..d {
                let sym = e.sym(fam, &with_idx(idx, k, t));
                for nu in 0..d {
                    let w = c.pi_up(t, nu);
                    if !w.is_zero() {
                        f.add_assign(&sym.scale(w).mul_form(&cf.gamma(nu, idx[k])));
                    }
                }
            }
        }
    }
    let sym = e.sym(fam, idx);
    match fam {
        S => {
            f.add_assign(&sym.mul_form(&phi0));
            for k in 0..4 {
                let rest = without(idx, k);
                for t in 0..d {
                    f.add_assign(&e.sym(V, &rest).scale(&(&gc(0, 2) * c.pi(idx[k], t))).mul_form(&cf.theta(t)));
                    f.add_assign(&e.jsym(V, &rest).scale(&(&gc(0, 2) * c.g(idx[k], t))).mul_form(&cf.thetab(t)));
                }
            }
        }
        V => {
            let (a, b, g) = (idx[0], idx[1], idx[2]);
            for s in 0..d {
                for t in 0..d {
                    let w = c.pi_ub(s, t);
                    if !w.is_zero() {
                        f.add_assign(&e.sym(S, &[a, b, g, s]).scale(&(&gc(0, -1) * w)).mul_form(&cf.phiub(t)));
                    }
                }
            }
            f.add_assign(&sym.mul_form(&(&phi0.scale(&gq(3, 2)) + &phi(0).scale(&GaussRational::from_parts(0, 1, 1, 2)))));
            f.add_assign(&e.jsym(V, idx).mul_form(&p23m.scale(&gq(-1, 2))));
            for k in 0..3 {
                let rest = without(idx, k);
                for t in 0..d {
                    f.add_assign(&e.sym(M, &rest).scale(&(&gi(-2) * c.pi(idx[k], t))).mul_form(&cf.theta(t)));
                    f.add_assign(&e.sym(L, &rest).scale(&(&gi(-2) * c.g(idx[k], t))).mul_form(&cf.thetab(t)));
                }
            }
        }
        L => {
            let (a, b) = (idx[0], idx[1]);
            f.add_assign(&sym.scale(&gi(2)).mul_form(&phi0));
            f.add_assign(&e.sym(M, idx).mul_form(&p23p.scale(&gq(1, 2))));
            f.add_assign(&e.jsym(M, idx).mul_form(&p23m.scale(&gq(1, 2))));
            for s in 0..d {
                f.add_assign(&e.sym(V, &[a, b, s]).mul_form(&cf.phiu(s)));
                let mut vb = CoeffPoly::zero();
                for m in 0..d {
                    for nu in 0..d {
                        let w = c.pi_bu(m, a) * c.pi_bu(nu, b);
                        if !w.is_zero() {
                            vb.add_scaled(&e.symc(V, &[m, nu, s]), &w);
                        }
                    }
                }
                f.add_assign(&vb.mul_form(&cf.phiub(s)));
            }
            for t in 0..d {
                let th = (&e.sym(C, &[b]).scale(c.pi(a, t)) + &e.sym(C, &[a]).scale(c.pi(b, t))).scale(&gc(0, 2));
                f.add_assign(&th.mul_form(&cf.theta(t)));
                let mut tb = CoeffPoly::zero();
                for s in 0..d {
                    tb.add_scaled(&e.symc(C, &[s]), &(c.g(a, t) * c.pi_bu(s, b)));
                    tb.add_scaled(&e.symc(C, &[s]), &(c.g(b, t) * c.pi_bu(s, a)));
                }
                f.add_assign(&tb.scale(&gc(0, 2)).mul_form(&cf.thetab(t)));
            }
        }
        M => {
            let (a, b) = (idx[0], idx[1]);
            f.add_assign(&sym.mul_form(&(&phi0.scale(&gi(2)) + &phi(0).scale(&ii()))));
            f.add_assign(&e.sym(L, idx).scale(&gi(-1)).mul_form(&p23m));
            for s in 0..d {
                for t in 0..d {
                    let w = c.pi_ub(s, t);
                    if !w.is_zero() {
                        f.add_assign(&e.sym(V, &[a, b, s]).scale(&(&gi(-2) * w)).mul_form(&cf.phiub(t)));
                    }
                }
            }
            for t in 0..d {
                let th = (&e.sym(H, &[b]).scale(c.pi(a, t)) + &e.sym(H, &[a]).scale(c.pi(b, t))).scale(&gi(-2));
                f.add_assign(&th.mul_form(&cf.theta(t)));
                let tb = (&e.sym(C, &[b]).scale(c.g(a, t)) + &e.sym(C, &[a]).scale(c.g(b, t))).scale(&gc(0, 2));
                f.add_assign(&tb.mul_form(&cf.thetab(t)));
            }
        }
        C => {
            let a = idx[0];
            f.add_assign(&sym.mul_form(&(&phi0.scale(&gq(5, 2)) + &phi(0).scale(&GaussRational::from_parts(0, 1, 1, 2)))));
            for s in 0..d {
                f.add_assign(&e.symc(C, &[s]).scale(&-c.pi_bu(s, a)).mul_form(&p23m));
                for t in 0..d {
                    let w = c.pi_ub(s, t);
                    if !w.is_zero() {
                        f.add_assign(&e.sym(L, &[a, s]).scale(&(&gc(0, -2) * w)).mul_form(&cf.phiub(t)));
                    }
                }
                f.add_assign(&e.sym(M, &[a, s]).scale(&ii()).mul_form(&cf.phiu(s)));
            }
            f.add_assign(&e.sym(H, idx).scale(&GaussRational::from_parts(0, 1, 1, 2)).mul_form(&p23p));
            for t in 0..d {
                f.add_assign(&e.sym(P, &[]).scale(&(&gq(-1, 2) * c.pi(a, t))).mul_form(&cf.theta(t)));
                f.add_assign(&e.sym(R, &[]).scale(&(&gq(1, 2) * c.g(a, t))).mul_form(&cf.thetab(t)));
            }
        }
        H => {
            let a = idx[0];
            f.add_assign(&sym.mul_form(&(&phi0.scale(&gq(5, 2)) + &phi(0).scale(&GaussRational::from_parts(0, 1, 3, 2)))));
            f.add_assign(&e.sym(C, idx).scale(&GaussRational::from_parts(0, 1, 3, 2)).mul_form(&p23m));
            for s in 0..d {
                for t in 0..d {
                    let w = c.pi_ub(s, t);
                    if !w.is_zero() {
                        f.add_assign(&e.sym(M, &[a, s]).scale(&(&gi(-3) * w)).mul_form(&cf.phiub(t)));
                    }
                }
            }
            for t in 0..d {
                f.add_assign(&e.sym(Q, &[]).scale(&(&gq(1, 2) * c.pi(a, t))).mul_form(&cf.theta(t)));
                f.add_assign(&e.sym(P, &[]).scale(&(&GaussRational::from_parts(0, 1, 1, 2) * c.g(a, t))).mul_form(&cf.thetab(t)));
            }
        }
        R => {
            f.add_assign(&sym.scale(&gi(3)).mul_form(&phi0));
            f.add_assign(&e.sym(P, &[]).scale(&gi(-1)).mul_form(&p23p));
            f.add_assign(&e.symc(P, &[]).scale(&gi(-1)).mul_form(&p23m));
            for t in 0..d {
                f.add_assign(&e.sym(C, &[t]).scale(&gi(-8)).mul_form(&cf.phiu(t)));
                f.add_assign(&e.symc(C, &[t]).scale(&gi(-8)).mul_form(&cf.phiub(t)));
            }
        }
        P => {
            f.add_assign(&sym.mul_form(&(&phi0.scale(&gi(3)) + &phi(0).scale(&ii()))));
            f.add_assign(&e.sym(Q, &[]).scale(&GaussRational::from_parts(0, 1, -1, 2)).mul_form(&p23p));
            f.add_assign(&e.sym(R, &[]).scale(&gq(3, 2)).mul_form(&p23m));
            for t in 0..d {
                f.add_assign(&e.sym(H, &[t]).scale(&gc(0, 4)).mul_form(&cf.phiu(t)));
                for s in 0..d {
                    let w = c.pi(t, s).conj();
                    if !w.is_zero() {
                        f.add_assign(&e.raise_sym(C, s).scale(&(&gi(-12) * &w)).mul_form(&cf.phiub(t)));
                    }
                }
            }
        }
        Q => {
            f.add_assign(&sym.mul_form(&(&phi0.scale(&gi(3)) + &phi(0).scale(&gc(0, 2)))));
            f.add_assign(&e.sym(P, &[]).scale(&gc(0, -2)).mul_form(&p23m));
            for t in 0..d {
                for s in 0..d {
                    let w = c.pi(t, s).conj();
                    if !w.is_zero() {
                        f.add_assign(&e.raise_sym(H, s).scale(&(&gi(16) * &w)).mul_form(&cf.phiub(t)));
                    }
                }
            }
        }
        _ => {}
    }
    f
}

/// The semibasic part of the derivative of a curvature symbol, written with
/// the secondary-derivative symbols.
pub fn star_expansion(e: &Eq, fam: Family, idx: &[usize]) -> FormExpr {
    use Family::*;
    let (cf, c, d) = (e.cf, e.c, e.d);
    let (e2p, e2m) = (e.e2p(), e.e2m());
    let eta1 = cf.eta(0);
    let mut f = FormExpr::zero();
    let cat = |extra: usize| -> Vec<usize> {
        let mut v = idx.to_vec();
        v.push(extra);
        v
    };
    // Σ_σ π^σ_ε̄ T(σ) θ^ε̄
    let pi_bar_theta = |t: &dyn Fn(usize) -> CoeffPoly| -> FormExpr {
        let mut r = FormExpr::zero();
        for eps in 0..d {
            let mut k = CoeffPoly::zero();
            for s in 0..d {
                let w = c.pi_ub(s, eps);
                if !w.is_zero() {
                    k.add_scaled(&t(s), w);
                }
            }
            r.add_assign(&k.mul_form(&cf.thetab(eps)));
        }
        r
    };
    match fam {
        S => {
            for eps in 0..d {
                f.add_assign(&e.sym(SecA, &cat(eps)).mul_form(&cf.theta(eps)));
            }
            f.add_assign(&-pi_bar_theta(&|s| e.jsym(SecA, &cat(s))));
            f.add_assign(&(&e.sym(SecB, idx) + &e.jsym(SecB, idx)).mul_form(&eta1));
            f.add_assign(&e.sym(SecC, idx).scale(&ii()).mul_form(&e2p));
            f.add_assign(&e.jsym(SecC, idx).scale(&gc(0, -1)).mul_form(&e2m));
        }
        V => {
            for eps in 0..d {
                f.add_assign(&e.sym(SecC, &cat(eps)).mul_form(&cf.theta(eps)));
            }
            f.add_assign(&pi_bar_theta(&|s| e.sym(SecB, &cat(s))));
            f.add_assign(&e.sym(SecD, idx).mul_form(&eta1));
            f.add_assign(&e.sym(SecE, idx).mul_form(&e2p));
            f.add_assign(&e.sym(SecF, idx).mul_form(&e2m));
        }
        L => {
            for eps in 0..d {
                f.add_assign(&e.jsym(SecF, &cat(eps)).scale(&gi(-1)).mul_form(&cf.theta(eps)));
            }
            f.add_assign(&-pi_bar_theta(&|s| e.sym(SecF, &cat(s))));
            f.add_assign(&(&e.jsym(SecZ, idx) - &e.sym(SecZ, idx)).scale(&ii()).mul_form(&eta1));
            f.add_assign(&e.sym(SecG, idx).scale(&ii()).mul_form(&e2p));
            f.add_assign(&e.jsym(SecG, idx).scale(&gc(0, -1)).mul_form(&e2m));
        }
        M => {
            for eps in 0..d {
                f.add_assign(&e.sym(SecE, &cat(eps)).scale(&gi(-1)).mul_form(&cf.theta(eps)));
            }
            f.add_assign(&pi_bar_theta(&|s| &e.jsym(SecF, &cat(s)) - &e.sym(SecD, &cat(s)).scale(&ii())));
            f.add_assign(&e.sym(SecX, idx).mul_form(&eta1));
            f.add_assign(&e.sym(SecY, idx).mul_form(&e2p));
            f.add_assign(&e.sym(SecZ, idx).mul_form(&e2m));
        }
        C => {
            for eps in 0..d {
                f.add_assign(&e.sym(SecG, &cat(eps)).mul_form(&cf.theta(eps)));
            }
            f.add_assign(&pi_bar_theta(&|s| e.sym(SecZ, &cat(s)).scale(&gc(0, -1))));
            f.add_assign(&e.sym(SecN1, idx).mul_form(&eta1));
            f.add_assign(&e.sym(SecN2, idx).mul_form(&e2p));
            f.add_assign(&e.sym(SecN3, idx).mul_form(&e2m));
        }
        H => {
            let a = idx[0];
            for eps in 0..d {
                f.add_assign(&e.sym(SecY, &cat(eps)).scale(&gi(-1)).mul_form(&cf.theta(eps)));
            }
            f.add_assign(&pi_bar_theta(&|s| (&e.sym(SecG, &cat(s)) - &e.sym(SecX, &cat(s))).scale(&ii())));
            f.add_assign(&e.sym(SecN4, idx).mul_form(&eta1));
            f.add_assign(&e.sym(SecN5, idx).mul_form(&e2p));
            let mut k = e.sym(SecN1, idx);
            for s in 0..d {
                k.add_scaled(&e.symc(SecN3, &[s]), &(&ii() * c.pi_bu(s, a)));
            }
            f.add_assign(&k.mul_form(&e2m));
        }
        R => {
            for eps in 0..d {
                let mut k = CoeffPoly::zero();
                for s in 0..d {
                    k.add_scaled(&e.symc(SecN3, &[s]), &(&gi(4) * c.pi_bu(s, eps)));
                }
                f.add_assign(&k.mul_form(&cf.theta(eps)));
            }
            f.add_assign(&pi_bar_theta(&|s| e.sym(SecN3, &[s]).scale(&gi(4))));
            let u = |s: usize| e.sym(SecU, &[s]);
            let ub = |s: usize| e.symc(SecU, &[s]);
            let w = |s: usize| e.sym(SecW, &[s]);
            let wb = |s: usize| e.symc(SecW, &[s]);
            f.add_assign(&(&u(2) - &ub(2)).scale(&ii()).mul_form(&eta1));
            f.add_assign(&(&u(0) + &w(2)).scale(&gc(0, -1)).mul_form(&e2p));
            f.add_assign(&(&ub(0) + &wb(2)).scale(&ii()).mul_form(&e2m));
        }
        P => {
            for eps in 0..d {
                f.add_assign(&e.sym(SecN2, &[eps]).scale(&gi(-4)).mul_form(&cf.theta(eps)));
                f.add_assign(&e.symc(SecN3, &[eps]).scale(&gi(-4)).mul_form(&cf.thetab(eps)));
            }
            f.add_assign(&pi_bar_theta(&|s| e.sym(SecN1, &[s]).scale(&gc(0, -4))));
            f.add_assign(&e.sym(SecU, &[0]).mul_form(&eta1));
            f.add_assign(&e.sym(SecU, &[1]).mul_form(&e2p));
            f.add_assign(&e.sym(SecU, &[2]).mul_form(&e2m));
        }
        Q => {
            for eps in 0..d {
                f.add_assign(&e.sym(SecN5, &[eps]).scale(&gi(4)).mul_form(&cf.theta(eps)));
            }
            f.add_assign(&pi_bar_theta(&|s| (&e.sym(SecN2, &[s]) + &e.sym(SecN4, &[s])).scale(&gc(0, 4))));
            f.add_assign(&e.sym(SecW, &[0]).mul_form(&eta1));
            f.add_assign(&e.sym(SecW, &[1]).mul_form(&e2p));
            f.add_assign(&e.sym(SecW, &[2]).mul_form(&e2m));
        }
        _ => {}
    }
    f
}

/// Canonical index tuples of a curvature family for dimension `d = 2n`.
pub fn family_indices(fam: Family, d: usize) -> Vec<Vec<usize>> {
    if fam.symmetric() {
        sorted_indices(d, fam.arity())
    } else {
        multi_indices(d, fam.arity())
    }
}

fn add_symbol_rules(e: &Eq, rules: &mut DRules) {
    install_symbol_rules(e, rules, &mut |fam, idx| star_expansion(e, fam, idx));
}

pub(crate) fn install_symbol_rules(e: &Eq, rules: &mut DRules, star: &mut dyn FnMut(Family, &[usize]) -> FormExpr) {
    for fam in Family::CURVATURE {
        for idx in family_indices(fam, e.d) {
            let f = &tilde_star(e, fam, &idx) + &star(fam, &idx);
            let s8: Vec<u8> = idx.iter().map(|&i| i as u8).collect();
            let sym = ScalarSymbol::raw(fam, &s8, false);
            if !matches!(fam, Family::S | Family::L | Family::R) {
                rules.symbols.insert(ScalarSymbol::raw(fam, &s8, true), e.cf.conj_form(&f));
            }
            rules.symbols.insert(sym, f);
        }
    }
}

/// Residual `d(d g)` for one generator.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorResidual {
    pub generator: String,
    pub terms: usize,
    pub zero: bool,
    pub elapsed_ms: u128,
    /// Canonical text of the residual when nonzero (truncated).
    pub residual: Option<String>,
}

/// `d²` on every coframe generator.
pub fn d_square_report(rs: &DRuleSet) -> Result<Vec<GeneratorResidual>, ExteriorError> {
    let mut out = Vec::new();
    for (i, g) in rs.coframe.generators().iter().enumerate() {
        let t0 = Instant::now();
        let dg = rs.rules.generators[i].as_ref().ok_or_else(|| ExteriorError::MissingGenerator(g.to_string()))?;
        let r = rs.d(dg)?;
        let text = (!r.is_zero()).then(|| {
            let mut s = rs.coframe.format(&r);
            if s.len() > 4000 {
                s.truncate(4000);
                s.push_str(" …");
            }
            s
        });
        out.push(GeneratorResidual {
            generator: g.to_string(),
            terms: r.term_count(),
            zero: r.is_zero(),
            elapsed_ms: t0.elapsed().as_millis(),
            residual: text,
        });
    }
    Ok(out)
}

/// For each real generator (`η_s`, `φ₀`, `φ_s`, `ψ_s`), whether its `d` rule and
/// its `d²` residual are fixed by conjugation.
pub fn reality_report(rs: &DRuleSet) -> Result<Vec<(String, bool)>, ExteriorError> {
    let cf = &rs.coframe;
    let mut out = Vec::new();
    for (i, g) in cf.generators().iter().enumerate() {
        if !g.is_real() {
            continue;
        }
        let dg = rs.rules.generators[i].as_ref().ok_or_else(|| ExteriorError::MissingGenerator(g.to_string()))?;
        let r = rs.d(dg)?;
        out.push((g.to_string(), cf.conj_form(dg) == *dg && cf.conj_form(&r) == r));
    }
    Ok(out)
}

/// Smoke mode: each `d²` residual evaluated at one random point of the symbol
/// space (conjugate symbols take conjugate values, `R` is real).
pub fn d_square_sampled(rs: &DRuleSet, seed: u64) -> Result<Vec<(String, bool)>, ExteriorError> {
    let mut r = crate::random::rng(seed);
    let mut values: HashMap<ScalarSymbol, GaussRational> = HashMap::new();
    let mut out = Vec::new();
    for (i, g) in rs.coframe.generators().iter().enumerate() {
        let dg = rs.rules.generators[i].as_ref().ok_or_else(|| ExteriorError::MissingGenerator(g.to_string()))?;
        let res = rs.d(dg)?;
        let v = res.substitute(&mut |s: &ScalarSymbol| {
            let base = ScalarSymbol::raw(s.family, s.indices(), false);
            let x = values
                .entry(base)
                .or_insert_with(|| {
                    let z = crate::random::small_gauss(&mut r);
                    if s.family == Family::R {
                        GaussRational::real(z.re)
                    } else {
                        z
                    }
                })
                .clone();
            CoeffPoly::constant(if s.conj { x.conj() } else { x })
        });
        out.push((g.to_string(), v.is_zero()));
    }
    Ok(out)
}

impl CoeffPoly {
    /// `self · f` for a form `f`.
    pub fn mul_form(&self, f: &FormExpr) -> FormExpr {
        f.mul_poly(self)
    }
}

impl std::ops::Add for &CoeffPoly {
    type Output = CoeffPoly;
    fn add(self, o: &CoeffPoly) -> CoeffPoly {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }
}

impl std::ops::Sub for &CoeffPoly {
    type Output = CoeffPoly;
    fn sub(self, o: &CoeffPoly) -> CoeffPoly {
        let mut r = self.clone();
        r.add_scaled(o, &GaussRational::from_int(-1));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_d_squared_n1() {
        let rs = build_rules(1, Mode::Flat).unwrap();
        for r in d_square_report(&rs).unwrap() {
            assert!(r.zero, "{}: {}", r.generator, r.residual.unwrap_or_default());
        }
    }
}
