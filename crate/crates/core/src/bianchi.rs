//! Starred one-forms of the curvature components and the four Bianchi
//! combinations built from them.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::exterior::{CoeffPoly, Coframe, ExteriorError, Family, FormExpr, Generator, ScalarSymbol};
use crate::number::GaussRational;
use crate::random::{rng, small_gauss};
use crate::structure::{family_indices, install_symbol_rules, multi_indices, star_expansion, tilde_star, DRuleSet, Eq};

/// One starred form per canonical index tuple of each curvature family.
#[derive(Clone)]
pub struct StarTable {
    forms: HashMap<(Family, Vec<usize>), FormExpr>,
}

impl StarTable {
    /// Semibasic expansions in terms of curvature and secondary symbols.
    pub fn expansion(cf: &Coframe) -> Self {
        let e = Eq::new(cf);
        let mut forms = HashMap::new();
        for fam in Family::CURVATURE {
            for idx in family_indices(fam, e.d) {
                forms.insert((fam, idx.clone()), star_expansion(&e, fam, &idx));
            }
        }
        StarTable { forms }
    }

    /// Random constant-coefficient forms obeying the symmetries and the reality
    /// conditions `jS* = S*`, `jL* = L*`, `conj R* = R*`.
    pub fn random(cf: &Coframe, seed: u64) -> Self {
        let mut r = rng(seed);
        let mut raw = HashMap::new();
        for fam in Family::CURVATURE {
            for idx in family_indices(fam, cf.dim()) {
                let mut f = FormExpr::zero();
                for g in 0..cf.len() {
                    if r.gen_bool(0.6) {
                        f.add_scaled(&FormExpr::monomial(1u64 << g), &small_gauss(&mut r));
                    }
                }
                raw.insert((fam, idx), f);
            }
        }
        let y = StarTable { forms: raw };
        let half = GaussRational::from_parts(1, 2, 0, 1);
        let mut forms = HashMap::new();
        for (key, f) in &y.forms {
            let v = match key.0 {
                Family::S | Family::L => (f + &y.j(cf, key.0, &key.1)).scale(&half),
                Family::R => (f + &cf.conj_form(f)).scale(&half),
                _ => f.clone(),
            };
            forms.insert(key.clone(), v);
        }
        StarTable { forms }
    }

    pub fn get(&self, fam: Family, idx: &[usize]) -> FormExpr {
        let mut k = idx.to_vec();
        if fam.symmetric() {
            k.sort_unstable();
        }
        self.forms.get(&(fam, k)).cloned().unwrap_or_else(FormExpr::zero)
    }

    /// The starred form with every index barred: its complex conjugate.
    pub fn bar(&self, cf: &Coframe, fam: Family, idx: &[usize]) -> FormExpr {
        cf.conj_form(&self.get(fam, idx))
    }

    /// `(jT*)_{α…} = Π π^{σ̄}_α conj(T*_{σ…})`.
    pub fn j(&self, cf: &Coframe, fam: Family, idx: &[usize]) -> FormExpr {
        let c = &cf.consts;
        let mut r = FormExpr::zero();
        for sig in multi_indices(cf.dim(), idx.len()) {
            let mut k = GaussRational::one();
            for (s, a) in sig.iter().zip(idx) {
                k = &k * c.pi_bu(*s, *a);
            }
            if !k.is_zero() {
                r.add_scaled(&self.bar(cf, fam, &sig), &k);
            }
        }
        r
    }
}

impl DRuleSet {
    /// The same rule set with `dT = T̃* + T*` taken from `stars`.
    pub fn with_stars(&self, stars: &StarTable) -> DRuleSet {
        let mut out = self.clone();
        out.rules.symbols.clear();
        let e = Eq::new(&self.coframe);
        install_symbol_rules(&e, &mut out.rules, &mut |fam, idx| stars.get(fam, idx));
        out
    }
}

/// Outcome of the two-way computation of one family's starred forms.
#[derive(Debug, Clone, Serialize)]
pub struct StarCheck {
    pub family: String,
    pub components: usize,
    /// `dT − T̃*` from the rule table equals the semibasic expansion.
    pub paths_agree: bool,
    /// Every index permutation gives the same form.
    pub symmetric: bool,
    /// `jT* = T*` (S, L) or `conj T* = T*` (R); `None` where no such condition applies.
    pub real: Option<bool>,
}

/// Computes every starred form by differentiating the symbol and subtracting
/// the tilde part, and compares it with the semibasic expansion.
pub fn star_forms(rs: &DRuleSet) -> Result<Vec<StarCheck>, ExteriorError> {
    let cf = &rs.coframe;
    let e = Eq::new(cf);
    let table = StarTable::expansion(cf);
    let mut out = Vec::new();
    for fam in Family::CURVATURE {
        let idxs = family_indices(fam, e.d);
        let mut agree = true;
        for idx in &idxs {
            let s8: Vec<u8> = idx.iter().map(|&i| i as u8).collect();
            let sym = FormExpr::scalar(CoeffPoly::symbol(ScalarSymbol::raw(fam, &s8, false)));
            let a = rs.d(&sym)? - tilde_star(&e, fam, idx);
            agree &= a == table.get(fam, idx);
        }
        let mut symmetric = true;
        for idx in multi_indices(e.d, fam.arity()) {
            let mut s = idx.clone();
            s.sort_unstable();
            symmetric &= star_expansion(&e, fam, &idx) == star_expansion(&e, fam, &s);
        }
        let real = match fam {
            Family::S | Family::L => Some(idxs.iter().all(|idx| table.j(cf, fam, idx) == table.get(fam, idx))),
            Family::R => Some(cf.conj_form(&table.get(fam, &[])) == table.get(fam, &[])),
            _ => None,
        };
        out.push(StarCheck { family: fam.name().to_string(), components: idxs.len(), paths_agree: agree, symmetric, real });
    }
    Ok(out)
}

/// The generator whose `d²` a Bianchi combination reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BianchiTarget {
    Gamma(usize, usize),
    PhiLower(usize),
    Psi1,
    Psi23,
}

impl std::fmt::Display for BianchiTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BianchiTarget::Gamma(a, b) => write!(f, "d2Gamma_{}{}", a + 1, b + 1),
            BianchiTarget::PhiLower(a) => write!(f, "d2phi_{}", a + 1),
            BianchiTarget::Psi1 => write!(f, "d2psi1"),
            BianchiTarget::Psi23 => write!(f, "d2(psi2+i psi3)"),
        }
    }
}

/// All Bianchi targets for dimension `d = 2n`.
pub fn bianchi_targets(d: usize) -> Vec<BianchiTarget> {
    let mut v = Vec::new();
    for a in 0..d {
        for b in a..d {
            v.push(BianchiTarget::Gamma(a, b));
        }
    }
    v.extend((0..d).map(BianchiTarget::PhiLower));
    v.push(BianchiTarget::Psi1);
    v.push(BianchiTarget::Psi23);
    v
}

fn w3(a: &FormExpr, b: &FormExpr, c: &FormExpr) -> FormExpr {
    &(a ^ b) ^ c
}

/// Evaluates the displayed combination of starred forms for one target.
pub fn bianchi_combination(cf: &Coframe, st: &StarTable, t: BianchiTarget) -> FormExpr {
    use Family::*;
    let e = Eq::new(cf);
    let (c, d) = (&cf.consts, e.d);
    let (e2p, e2m, eta1) = (e.e2p(), e.e2m(), cf.eta(0));
    let i = GaussRational::i();
    let k = |re: i64, im: i64| GaussRational::from_parts(re, 1, im, 1);
    let mut f = FormExpr::zero();
    match t {
        BianchiTarget::Gamma(a, b) => {
            for g in 0..d {
                for dl in 0..d {
                    for s in 0..d {
                        f.add_scaled(&w3(&st.get(S, &[a, b, g, s]), &cf.theta(g), &cf.thetab(dl)), c.pi_ub(s, dl));
                    }
                }
                f.add_assign(&w3(&st.get(V, &[a, b, g]), &cf.theta(g), &eta1));
                for s in 0..d {
                    f.add_scaled(&w3(&st.get(V, &[a, b, s]), &cf.thetab(g), &e2p), &(&-i.clone() * c.pi_ub(s, g)));
                }
                for m in 0..d {
                    for nu in 0..d {
                        let pmn = c.pi_bu(m, a) * c.pi_bu(nu, b);
                        if pmn.is_zero() {
                            continue;
                        }
                        f.add_scaled(&w3(&st.bar(cf, V, &[m, nu, g]), &cf.thetab(g), &eta1), &pmn);
                        for x in 0..d {
                            f.add_scaled(&w3(&st.bar(cf, V, &[m, nu, x]), &cf.theta(g), &e2m), &(&(&i * &pmn) * c.pi_bu(x, g)));
                        }
                    }
                }
            }
            f.add_scaled(&w3(&st.get(L, &[a, b]), &e2p, &e2m), &-i.clone());
            f.add_assign(&w3(&st.get(M, &[a, b]), &eta1, &e2p));
            for m in 0..d {
                for nu in 0..d {
                    f.add_scaled(&w3(&st.bar(cf, M, &[m, nu]), &eta1, &e2m), &(c.pi_bu(m, a) * c.pi_bu(nu, b)));
                }
            }
        }
        BianchiTarget::PhiLower(a) => {
            for b in 0..d {
                for g in 0..d {
                    for nu in 0..d {
                        f.add_scaled(&w3(&st.get(V, &[a, b, nu]), &cf.theta(b), &cf.thetab(g)), &(&-i.clone() * c.pi_ub(nu, g)));
                    }
                }
                for m in 0..d {
                    f.add_scaled(&w3(&st.bar(cf, L, &[m, b]), &cf.thetab(b), &eta1), c.pi_bu(m, a));
                }
                f.add_assign(&w3(&st.get(M, &[a, b]), &cf.theta(b), &eta1));
                for nu in 0..d {
                    f.add_scaled(&w3(&st.get(M, &[a, nu]), &cf.thetab(b), &e2p), &(&-i.clone() * c.pi_ub(nu, b)));
                }
                f.add_scaled(&w3(&st.get(L, &[a, b]), &cf.theta(b), &e2m), &i);
            }
            f.add_scaled(&w3(&st.get(C, &[a]), &e2p, &e2m), &k(-1, 0));
            for m in 0..d {
                f.add_scaled(&w3(&st.bar(cf, C, &[m]), &eta1, &e2m), &(&i * c.pi_bu(m, a)));
            }
            f.add_assign(&w3(&st.get(H, &[a]), &eta1, &e2p));
        }
        BianchiTarget::Psi1 => {
            for b in 0..d {
                for g in 0..d {
                    for m in 0..d {
                        f.add_scaled(&w3(&st.get(L, &[b, m]), &cf.theta(b), &cf.thetab(g)), &(&k(4, 0) * c.pi_ub(m, g)));
                    }
                }
                f.add_scaled(&w3(&st.get(C, &[b]), &cf.theta(b), &eta1), &k(4, 0));
                f.add_scaled(&w3(&st.bar(cf, C, &[b]), &cf.thetab(b), &eta1), &k(4, 0));
                for m in 0..d {
                    f.add_scaled(&w3(&st.bar(cf, C, &[m]), &cf.theta(b), &e2m), &(&k(0, 4) * c.pi_bu(m, b)));
                    f.add_scaled(&w3(&st.get(C, &[m]), &cf.thetab(b), &e2p), &(&k(0, -4) * c.pi_ub(m, b)));
                }
            }
            f.add_assign(&w3(&st.get(P, &[]), &eta1, &e2p));
            f.add_assign(&w3(&st.bar(cf, P, &[]), &eta1, &e2m));
            f.add_scaled(&w3(&st.get(R, &[]), &e2p, &e2m), &i);
        }
        BianchiTarget::Psi23 => {
            for b in 0..d {
                for m in 0..d {
                    let p = c.pi_bu(m, b);
                    if p.is_zero() {
                        continue;
                    }
                    for g in 0..d {
                        f.add_scaled(&w3(&st.bar(cf, M, &[m, g]), &cf.theta(b), &cf.thetab(g)), &(&k(0, 4) * p));
                    }
                    f.add_scaled(&w3(&st.bar(cf, C, &[m]), &cf.theta(b), &eta1), &(&k(0, 4) * p));
                    f.add_scaled(&w3(&st.bar(cf, H, &[m]), &cf.theta(b), &e2m), &(&k(0, -4) * p));
                }
                f.add_scaled(&w3(&st.bar(cf, H, &[b]), &cf.thetab(b), &eta1), &k(-4, 0));
                f.add_scaled(&w3(&st.bar(cf, C, &[b]), &cf.thetab(b), &e2p), &k(-4, 0));
            }
            f.add_scaled(&w3(&st.get(R, &[]), &eta1, &e2p), &-i.clone());
            f.add_assign(&w3(&st.bar(cf, Q, &[]), &eta1, &e2m));
            f.add_scaled(&w3(&st.bar(cf, P, &[]), &e2p, &e2m), &k(-1, 0));
        }
    }
    f
}

/// `d²` of the target computed directly from the rule table.
pub fn target_d_square(rs: &DRuleSet, t: BianchiTarget) -> Result<FormExpr, ExteriorError> {
    let cf = &rs.coframe;
    let first = match t {
        BianchiTarget::Gamma(a, b) => rs.d_generator(Generator::Gamma(a as u8, b as u8)).clone(),
        BianchiTarget::PhiLower(a) => rs.d(&cf.phi_l(a))?,
        BianchiTarget::Psi1 => rs.d_generator(Generator::Psi(0)).clone(),
        BianchiTarget::Psi23 => rs.dpsi23.clone(),
    };
    rs.d(&first)
}

/// One row of the Bianchi certificate.
#[derive(Debug, Clone, Serialize)]
pub struct BianchiRow {
    pub target: String,
    /// The combination vanishes with the semibasic starred forms.
    pub combination_zero: bool,
    /// With random admissible starred forms, raw `d²` equals the combination.
    pub matches_raw: bool,
    pub residual: Option<String>,
}

/// Evaluates the four families of Bianchi combinations and cross-checks them
/// against raw `d²` under random starred forms.
pub fn bianchi_residual(rs: &DRuleSet, seed: u64) -> Result<Vec<BianchiRow>, ExteriorError> {
    let cf = &rs.coframe;
    let exp = StarTable::expansion(cf);
    let rnd = StarTable::random(cf, seed);
    let rs_rnd = rs.with_stars(&rnd);
    let mut out = Vec::new();
    for t in bianchi_targets(cf.dim()) {
        let b = bianchi_combination(cf, &exp, t);
        let raw = target_d_square(&rs_rnd, t)?;
        let comb = bianchi_combination(cf, &rnd, t);
        let diff = raw - comb;
        let residual = if !b.is_zero() {
            Some(cf.format(&b))
        } else if !diff.is_zero() {
            Some(cf.format(&diff))
        } else {
            None
        };
        out.push(BianchiRow { target: t.to_string(), combination_zero: b.is_zero(), matches_raw: diff.is_zero(), residual });
    }
    Ok(out)
}
