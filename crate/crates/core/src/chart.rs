//! The quaternionic Heisenberg group `ℝ⁴ × ℝ³` (`n = 1`) in coordinates.
//!
//! Forms have polynomial coefficients over the Gaussian rationals in the
//! coordinates `x1..x4, t1..t3`. Two-forms are evaluated with the determinant
//! convention `(α∧β)(X,Y) = α(X)β(Y) − α(Y)β(X)`, so that
//! `dη(X,Y) = Xη(Y) − Yη(X) − η([X,Y])`. With this convention the qc axiom,
//! the Reeb conditions, the `α̂` formulas and the `dη` structure equations
//! of the `P_o` coframe are all consistent, provided `ω̂_s(X,Y) = ĝ(Î_sX,Y)`
//! on `H`. The certificate also reports the residual for the normalisation
//! `ω̂_s(X,Y) = 2ĝ(Î_sX,Y)`, which does not close.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::CMatrix;
use crate::number::{parse_rational, GaussRational, Rational};
use crate::tensor::{make_constants, StandardConstants};

/// Number of coordinates: `x1..x4` then `t1..t3`.
pub const COORDS: usize = 7;
const HORIZ: usize = 4;

/// Largest exponent of a single coordinate accepted from a chart file.
pub const MAX_EXPONENT: u8 = 8;
/// Largest number of terms per form accepted from a chart file.
pub const MAX_TERMS: usize = 256;

pub type Monomial = [u8; COORDS];

#[derive(Debug, Error, PartialEq)]
pub enum ChartError {
    #[error("malformed chart file: {0}")]
    Format(String),
    #[error("expected {COORDS} distinct coordinate names")]
    Coordinates,
    #[error("unknown coordinate {0:?}")]
    UnknownCoordinate(String),
    #[error("bad number {0:?}")]
    Number(String),
    #[error("exponent or term count too large")]
    TooLarge,
    #[error("matrix {0} must be 4×4")]
    MatrixShape(String),
    #[error("η̂ must have the form dt_s + (terms in dx): η̂_{s}(∂t_{u}) is wrong")]
    NotGraph { s: usize, u: usize },
    #[error("η̂ coefficients must be real")]
    NotReal,
}

/// A polynomial with Gaussian rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, GaussRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: GaussRational) -> Self {
        let mut p = Poly::zero();
        p.add_term([0; COORDS], c);
        p
    }

    /// The coordinate function `x_k`.
    pub fn coord(k: usize) -> Self {
        let mut m = [0; COORDS];
        m[k] = 1;
        let mut p = Poly::zero();
        p.add_term(m, GaussRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: GaussRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(GaussRational::zero);
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&GaussRational::from_int(-1)))
    }

    pub fn scale(&self, s: &GaussRational) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            r.add_term(*m, c * s);
        }
        r
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m = [0; COORDS];
                for k in 0..COORDS {
                    m[k] = m1[k].checked_add(m2[k]).expect("exponent overflow");
                }
                r.add_term(m, c1 * c2);
            }
        }
        r
    }

    pub fn deriv(&self, k: usize) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            if m[k] > 0 {
                let mut m2 = *m;
                m2[k] -= 1;
                r.add_term(m2, c * &GaussRational::from_int(m[k] as i64));
            }
        }
        r
    }

    pub fn conj(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c.conj())).collect() }
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.is_real())
    }

    /// The constant term, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<GaussRational> {
        match self.terms.len() {
            0 => Some(GaussRational::zero()),
            1 => self.terms.get(&[0; COORDS]).cloned(),
            _ => None,
        }
    }

    pub fn eval(&self, point: &[GaussRational; COORDS]) -> GaussRational {
        let mut s = GaussRational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for k in 0..COORDS {
                for _ in 0..m[k] {
                    v *= &point[k];
                }
            }
            s += v;
        }
        s
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mono: Vec<String> = (0..COORDS)
                .filter(|&k| m[k] > 0)
                .map(|k| if m[k] == 1 { names[k].clone() } else { format!("{}^{}", names[k], m[k]) })
                .collect();
            if mono.is_empty() {
                parts.push(format!("({c})"));
            } else {
                parts.push(format!("({c})*{}", mono.join("*")));
            }
        }
        parts.join(" + ")
    }
}

/// A vector field `Σ X^k ∂_k`.
pub type VectorField = [Poly; COORDS];

pub fn coord_field(k: usize) -> VectorField {
    let mut v: VectorField = Default::default();
    v[k] = Poly::constant(GaussRational::one());
    v
}

/// A differential form `Σ_I f_I dx^I`, keyed by the bitmask of `I`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChartForm {
    terms: BTreeMap<u8, Poly>,
}

fn bits_below(mask: u8, k: usize) -> u32 {
    (mask & ((1u8 << k) - 1)).count_ones()
}

impl ChartForm {
    pub fn zero() -> Self {
        ChartForm::default()
    }

    pub fn function(p: Poly) -> Self {
        let mut f = ChartForm::zero();
        f.add_term(0, p);
        f
    }

    /// `dx_k`.
    pub fn dx(k: usize) -> Self {
        let mut f = ChartForm::zero();
        f.add_term(1 << k, Poly::constant(GaussRational::one()));
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u8, &Poly)> {
        self.terms.iter().map(|(m, p)| (*m, p))
    }

    /// The coefficient of `dx^I` for the bitmask `I`.
    pub fn coeff(&self, mask: u8) -> Poly {
        self.terms.get(&mask).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, mask: u8, p: Poly) {
        if p.is_zero() {
            return;
        }
        let e = self.terms.entry(mask).or_default();
        *e = e.add(&p);
        if e.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn add(&self, o: &ChartForm) -> ChartForm {
        let mut r = self.clone();
        for (m, p) in &o.terms {
            r.add_term(*m, p.clone());
        }
        r
    }

    pub fn sub(&self, o: &ChartForm) -> ChartForm {
        self.add(&o.scale(&GaussRational::from_int(-1)))
    }

    pub fn scale(&self, s: &GaussRational) -> ChartForm {
        ChartForm { terms: self.terms.iter().map(|(m, p)| (*m, p.scale(s))).filter(|(_, p)| !p.is_zero()).collect() }
    }

    pub fn mul_poly(&self, f: &Poly) -> ChartForm {
        let mut r = ChartForm::zero();
        for (m, p) in &self.terms {
            r.add_term(*m, p.mul(f));
        }
        r
    }

    pub fn conj(&self) -> ChartForm {
        ChartForm { terms: self.terms.iter().map(|(m, p)| (*m, p.conj())).collect() }
    }

    pub fn wedge(&self, o: &ChartForm) -> ChartForm {
        let mut r = ChartForm::zero();
        for (a, p) in &self.terms {
            for (b, q) in &o.terms {
                if a & b != 0 {
                    continue;
                }
                // sign of sorting dx^a ∧ dx^b
                let inversions: u32 = (0..COORDS).filter(|&j| b & (1 << j) != 0).map(|j| (a >> (j + 1)).count_ones()).sum();
                let mut pq = p.mul(q);
                if inversions % 2 == 1 {
                    pq = pq.scale(&GaussRational::from_int(-1));
                }
                r.add_term(a | b, pq);
            }
        }
        r
    }

    pub fn d(&self) -> ChartForm {
        let mut r = ChartForm::zero();
        for (m, p) in &self.terms {
            for k in 0..COORDS {
                if m & (1 << k) != 0 {
                    continue;
                }
                let mut q = p.deriv(k);
                if bits_below(*m, k) % 2 == 1 {
                    q = q.scale(&GaussRational::from_int(-1));
                }
                r.add_term(m | (1 << k), q);
            }
        }
        r
    }

    /// Interior product `X ⌟ self`.
    pub fn interior(&self, x: &VectorField) -> ChartForm {
        let mut r = ChartForm::zero();
        for (m, p) in &self.terms {
            let mut pos = 0;
            for k in 0..COORDS {
                if m & (1 << k) == 0 {
                    continue;
                }
                let mut q = p.mul(&x[k]);
                if pos % 2 == 1 {
                    q = q.scale(&GaussRational::from_int(-1));
                }
                r.add_term(m & !(1 << k), q);
                pos += 1;
            }
        }
        r
    }

    /// `self(X)` for a one-form.
    pub fn eval1(&self, x: &VectorField) -> Poly {
        self.interior(x).coeff(0)
    }

    /// `self(X, Y)` for a two-form.
    pub fn eval2(&self, x: &VectorField, y: &VectorField) -> Poly {
        self.interior(x).interior(y).coeff(0)
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, p) in &self.terms {
            let dx: Vec<String> = (0..COORDS).filter(|&k| m & (1 << k) != 0).map(|k| format!("d{}", names[k])).collect();
            if dx.is_empty() {
                parts.push(format!("[{}]", p.fmt_with(names)));
            } else {
                parts.push(format!("[{}] {}", p.fmt_with(names), dx.join("^")));
            }
        }
        parts.join(" + ")
    }
}

pub fn default_names() -> Vec<String> {
    ["x1", "x2", "x3", "x4", "t1", "t2", "t3"].iter().map(|s| s.to_string()).collect()
}

/// A qc structure on a chart of `ℝ⁷`: `η̂_s = dt_s + (dx terms)`, with `ĝ` and
/// `Î_s` constant in the frame `X_a = ∂x_a − Σ_s η̂_s(∂x_a) ∂t_s` of `H`.
#[derive(Clone, Debug)]
pub struct QcChart {
    pub names: Vec<String>,
    pub eta: [ChartForm; 3],
    pub g: CMatrix,
    pub i_mats: [CMatrix; 3],
    h_basis: Vec<VectorField>,
}

impl QcChart {
    pub fn new(names: Vec<String>, eta: [ChartForm; 3], g: CMatrix, i_mats: [CMatrix; 3]) -> Result<Self, ChartError> {
        for (s, e) in eta.iter().enumerate() {
            if e.terms().any(|(_, p)| !p.is_real()) {
                return Err(ChartError::NotReal);
            }
            if e.terms().any(|(m, _)| m.count_ones() != 1) {
                return Err(ChartError::Format("η̂ must be a one-form".into()));
            }
            for u in 0..3 {
                let want = if s == u { GaussRational::one() } else { GaussRational::zero() };
                if e.coeff(1 << (HORIZ + u)) != Poly::constant(want) {
                    return Err(ChartError::NotGraph { s: s + 1, u: u + 1 });
                }
            }
        }
        for m in std::iter::once(&g).chain(i_mats.iter()) {
            if m.rows() != HORIZ || m.cols() != HORIZ {
                return Err(ChartError::MatrixShape("g/I".into()));
            }
        }
        let h_basis = (0..HORIZ)
            .map(|a| {
                let mut x = coord_field(a);
                for (s, e) in eta.iter().enumerate() {
                    x[HORIZ + s] = x[HORIZ + s].sub(&e.coeff(1 << a));
                }
                x
            })
            .collect();
        Ok(QcChart { names, eta, g, i_mats, h_basis })
    }

    /// The frame `X_1..X_4` of `H`.
    pub fn h_basis(&self) -> &[VectorField] {
        &self.h_basis
    }

    pub fn d_eta(&self) -> [ChartForm; 3] {
        std::array::from_fn(|s| self.eta[s].d())
    }

    /// `ĝ(Î_s X_a, X_b)`.
    pub fn g_i(&self, s: usize, a: usize, b: usize) -> GaussRational {
        let mut v = GaussRational::zero();
        for c in 0..HORIZ {
            v += self.i_mats[s].get(c, a) * self.g.get(c, b);
        }
        v
    }

    /// `η̂_s(X_a) = 0` for all `s, a`.
    pub fn kernel_ok(&self) -> bool {
        self.eta.iter().all(|e| self.h_basis.iter().all(|x| e.eval1(x).is_zero()))
    }

    /// `Î_s² = −1`, `Î_1Î_2 = −Î_2Î_1 = Î_3`.
    pub fn quaternion_ok(&self) -> bool {
        let id = CMatrix::identity(HORIZ);
        let [i1, i2, i3] = &self.i_mats;
        self.i_mats.iter().all(|i| (i * i) == -&id) && &(i1 * i2) == i3 && (i2 * i1) == -i3
    }

    /// `ĝ` symmetric, nondegenerate and `Î_s`-invariant.
    pub fn metric_ok(&self) -> bool {
        self.g == self.g.transpose()
            && self.g.inverse().is_some()
            && self.i_mats.iter().all(|i| &(&i.transpose() * &self.g) * i == self.g)
    }

    /// `dη̂_s(X_a, X_b) − 2ĝ(Î_s X_a, X_b)`, nonzero entries only.
    pub fn contact_residuals(&self) -> Vec<(usize, usize, usize, Poly)> {
        let de = self.d_eta();
        let mut out = Vec::new();
        for s in 0..3 {
            for a in 0..HORIZ {
                for b in 0..HORIZ {
                    let r = de[s]
                        .eval2(&self.h_basis[a], &self.h_basis[b])
                        .sub(&Poly::constant(self.g_i(s, a, b) * GaussRational::from_int(2)));
                    if !r.is_zero() {
                        out.push((s, a, b, r));
                    }
                }
            }
        }
        out
    }

    /// Solves the Reeb conditions with constant-coefficient fields
    /// `ξ_t = Σ c_{tk} ∂_k`. `None` when no such solution exists.
    pub fn solve_reeb(&self) -> Option<[VectorField; 3]> {
        let de = self.d_eta();
        // rows: (label, monomial) → (coefficients over the 21 unknowns, rhs)
        let mut rows: BTreeMap<(usize, Monomial), (Vec<GaussRational>, GaussRational)> = BTreeMap::new();
        let mut push = |label: usize, unknown: usize, p: &Poly, rhs: Option<&GaussRational>| {
            for (m, c) in p.terms() {
                let e = rows.entry((label, *m)).or_insert_with(|| (vec![GaussRational::zero(); 3 * COORDS], GaussRational::zero()));
                e.0[unknown] += c;
            }
            if let Some(r) = rhs {
                let e = rows.entry((label, [0; COORDS])).or_insert_with(|| (vec![GaussRational::zero(); 3 * COORDS], GaussRational::zero()));
                e.1 += r;
            }
        };
        let mut label = 0;
        for s in 0..3 {
            for t in 0..3 {
                let delta = if s == t { GaussRational::one() } else { GaussRational::zero() };
                push(label, t * COORDS, &Poly::zero(), Some(&delta));
                for k in 0..COORDS {
                    push(label, t * COORDS + k, &self.eta[s].coeff(1 << k), None);
                }
                label += 1;
            }
        }
        for s in 0..3 {
            for t in s..3 {
                for x in &self.h_basis {
                    for k in 0..COORDS {
                        let ek = coord_field(k);
                        push(label, t * COORDS + k, &de[s].eval2(&ek, x), None);
                        push(label, s * COORDS + k, &de[t].eval2(&ek, x), None);
                    }
                    label += 1;
                }
            }
        }
        let rows: Vec<_> = rows.into_values().collect();
        let m = CMatrix::from_fn(rows.len(), 3 * COORDS, |i, j| rows[i].0[j].clone());
        let rhs: Vec<GaussRational> = rows.iter().map(|r| r.1.clone()).collect();
        let sol = m.solve(&rhs)?;
        Some(std::array::from_fn(|t| std::array::from_fn(|k| Poly::constant(sol[t * COORDS + k].clone()))))
    }

    /// Residuals of `η̂_s(ξ_t) = δ` and `dη̂_s(ξ_t,X) + dη̂_t(ξ_s,X) = 0`.
    pub fn reeb_residual_zero(&self, xi: &[VectorField; 3]) -> bool {
        let de = self.d_eta();
        for s in 0..3 {
            for t in 0..3 {
                let delta = if s == t { GaussRational::one() } else { GaussRational::zero() };
                if self.eta[s].eval1(&xi[t]) != Poly::constant(delta) {
                    return false;
                }
                for x in &self.h_basis {
                    if !de[s].eval2(&xi[t], x).add(&de[t].eval2(&xi[s], x)).is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `ω̂_s` with `ξ ⌟ ω̂ = 0` and `ω̂_s(X_a, X_b) = factor · ĝ(Î_s X_a, X_b)`.
    pub fn omega(&self, xi: &[VectorField; 3], factor: i64) -> [ChartForm; 3] {
        // ε^a = dx_a − Σ_t ξ_t^a η̂_t is dual to X_a and kills every ξ_t
        let eps: Vec<ChartForm> = (0..HORIZ)
            .map(|a| {
                let mut e = ChartForm::dx(a);
                for t in 0..3 {
                    e = e.sub(&self.eta[t].mul_poly(&xi[t][a]));
                }
                e
            })
            .collect();
        std::array::from_fn(|s| {
            let mut w = ChartForm::zero();
            for a in 0..HORIZ {
                for b in (a + 1)..HORIZ {
                    let c = self.g_i(s, a, b) * GaussRational::from_int(factor);
                    w = w.add(&eps[a].wedge(&eps[b]).scale(&c));
                }
            }
            w
        })
    }

    /// `α̂_{12}, α̂_{23}, α̂_{31}` from the explicit formulas.
    pub fn alpha(&self, xi: &[VectorField; 3]) -> [ChartForm; 3] {
        let de = self.d_eta();
        let half = GaussRational::real(Rational::new(1.into(), 2.into()));
        let f = |s: usize, a: usize, b: usize| ChartForm::function(de[s].eval2(&xi[a], &xi[b]));
        let (e1, e2, e3) = (f(0, 1, 2), f(1, 2, 0), f(2, 0, 1));
        let a12 = de[1]
            .interior(&xi[0])
            .add(&e1.scale(&GaussRational::from_int(-1)).add(&e2).add(&e3).scale(&half).wedge(&self.eta[2]))
            .add(&f(0, 0, 1).wedge(&self.eta[0]));
        let a23 = de[2]
            .interior(&xi[1])
            .add(&e1.sub(&e2).add(&e3).scale(&half).wedge(&self.eta[0]))
            .add(&f(1, 1, 2).wedge(&self.eta[1]));
        let a31 = de[0]
            .interior(&xi[2])
            .add(&e1.add(&e2).sub(&e3).scale(&half).wedge(&self.eta[1]))
            .add(&f(2, 2, 0).wedge(&self.eta[2]));
        [a12, a23, a31]
    }

    /// `dη̂_s + α̂_{ts} ∧ η̂_t − 2ω̂_s` for `s = 1,2,3`.
    pub fn integ_residuals(&self, xi: &[VectorField; 3], omega: &[ChartForm; 3]) -> [ChartForm; 3] {
        let [a12, a23, a31] = self.alpha(xi);
        let neg = |f: &ChartForm| f.scale(&GaussRational::from_int(-1));
        let zero = ChartForm::zero();
        // alpha[t][s] = α̂_{ts}
        let alpha = [[zero.clone(), a12.clone(), neg(&a31)], [neg(&a12), zero.clone(), a23.clone()], [a31.clone(), neg(&a23), zero]];
        let de = self.d_eta();
        std::array::from_fn(|s| {
            let mut r = de[s].sub(&omega[s].scale(&GaussRational::from_int(2)));
            for t in 0..3 {
                r = r.add(&alpha[t][s].wedge(&self.eta[t]));
            }
            r
        })
    }

    pub fn certify(&self) -> ChartCertificate {
        let reeb = self.solve_reeb();
        let mut cert = ChartCertificate {
            schema: CERT_SCHEMA.into(),
            eta: self.eta.iter().map(|e| e.fmt_with(&self.names)).collect(),
            kernel: self.kernel_ok(),
            quaternion_relations: self.quaternion_ok(),
            metric_compatible: self.metric_ok(),
            contact_axiom: self.contact_residuals().is_empty(),
            reeb_found: reeb.is_some(),
            reeb: None,
            reeb_residual_zero: false,
            alpha: None,
            integ_residual_zero: false,
            integ_residual_zero_factor_two_omega: false,
            lex: None,
        };
        if let Some(xi) = reeb {
            cert.reeb = Some(xi.iter().map(|x| x.iter().map(|p| p.fmt_with(&self.names)).collect()).collect());
            cert.reeb_residual_zero = self.reeb_residual_zero(&xi);
            cert.alpha = Some(self.alpha(&xi).iter().map(|a| a.fmt_with(&self.names)).collect());
            cert.integ_residual_zero = self.integ_residuals(&xi, &self.omega(&xi, 1)).iter().all(ChartForm::is_zero);
            cert.integ_residual_zero_factor_two_omega = self.integ_residuals(&xi, &self.omega(&xi, 2)).iter().all(ChartForm::is_zero);
        }
        cert
    }
}

pub const CERT_SCHEMA: &str = "qc-cartan/chart-certificate/1";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChartCertificate {
    pub schema: String,
    pub eta: Vec<String>,
    pub kernel: bool,
    pub quaternion_relations: bool,
    pub metric_compatible: bool,
    pub contact_axiom: bool,
    pub reeb_found: bool,
    pub reeb: Option<Vec<Vec<String>>>,
    pub reeb_residual_zero: bool,
    pub alpha: Option<Vec<String>>,
    /// With `ω̂_s(X,Y) = ĝ(Î_sX,Y)`.
    pub integ_residual_zero: bool,
    /// With `ω̂_s(X,Y) = 2ĝ(Î_sX,Y)`; expected false.
    pub integ_residual_zero_factor_two_omega: bool,
    pub lex: Option<LexReport>,
}

impl ChartCertificate {
    /// Every qc check that has to hold.
    pub fn passed(&self) -> bool {
        self.kernel
            && self.quaternion_relations
            && self.metric_compatible
            && self.contact_axiom
            && self.reeb_found
            && self.reeb_residual_zero
            && self.integ_residual_zero
            && self.lex.iter().all(LexReport::passed)
    }
}

/// Left multiplication by `i`, `j`, `k` on `ℍ = ℝ⁴` (basis `1, i, j, k`).
pub fn quaternion_units() -> [CMatrix; 3] {
    let from = |cols: [(usize, i64); 4]| {
        let mut m = CMatrix::zero(HORIZ, HORIZ);
        for (j, (i, s)) in cols.iter().enumerate() {
            m.set(*i, j, GaussRational::from_int(*s));
        }
        m
    };
    [
        from([(1, 1), (0, -1), (3, 1), (2, -1)]),
        from([(2, 1), (3, -1), (0, -1), (1, 1)]),
        from([(3, 1), (2, 1), (1, -1), (0, -1)]),
    ]
}

/// The quaternionic Heisenberg group:
/// `η̂_s = dt_s + ½ Σ (Î_s)_{ba} x_a dx_b`, `ĝ = ½·id`, `Î_s` left
/// multiplication by `i, j, k`.
pub fn heisenberg() -> QcChart {
    let units = quaternion_units();
    let half = GaussRational::real(Rational::new(1.into(), 2.into()));
    let eta = std::array::from_fn(|s| {
        let mut e = ChartForm::dx(HORIZ + s);
        for a in 0..HORIZ {
            for b in 0..HORIZ {
                let c = units[s].get(b, a) * &half;
                e = e.add(&ChartForm::dx(b).mul_poly(&Poly::coord(a)).scale(&c));
            }
        }
        e
    });
    let g = CMatrix::identity(HORIZ).scale(&half);
    QcChart::new(default_names(), eta, g, units).expect("Heisenberg data is well formed")
}

/// A `P_o` coframe restricted to the section `μ = m²`, `a = id`: `η_s = μη̂_s`,
/// `θ^α = m·θ̂^α`, `φ = 0`.
#[derive(Clone, Debug)]
pub struct LexCoframe {
    pub m: Rational,
    pub eta: [ChartForm; 3],
    pub theta: Vec<ChartForm>,
    pub phi0: ChartForm,
    pub phi: [ChartForm; 3],
}

/// `θ¹ = ½(dx1 + i dx2)`, `θ² = (1/(2π₁₂))(dx3 + i dx4)`, scaled by `m`.
pub fn heisenberg_lex(chart: &QcChart, c: &StandardConstants, m: Rational) -> LexCoframe {
    let mg = GaussRational::real(m.clone());
    let mu = &mg * &mg;
    let half = GaussRational::real(Rational::new(1.into(), 2.into()));
    let pair = |a: usize| ChartForm::dx(a).add(&ChartForm::dx(a + 1).scale(&GaussRational::i()));
    let p12 = c.pi(0, 1).clone();
    let theta = vec![pair(0).scale(&(&half * &mg)), pair(2).scale(&(&(&half * &mg) / &p12))];
    // φ₀ would pick up −μ⁻¹dμ; it vanishes for constant μ
    LexCoframe {
        m,
        eta: std::array::from_fn(|s| chart.eta[s].scale(&mu)),
        theta,
        phi0: ChartForm::zero(),
        phi: Default::default(),
    }
}

fn pi_terms(l: &LexCoframe, c: &StandardConstants) -> (ChartForm, ChartForm, ChartForm) {
    let d = l.theta.len();
    let mut gtt = ChartForm::zero();
    let mut ptt = ChartForm::zero();
    for a in 0..d {
        for b in 0..d {
            gtt = gtt.add(&l.theta[a].wedge(&l.theta[b].conj()).scale(c.g(a, b)));
            ptt = ptt.add(&l.theta[a].wedge(&l.theta[b]).scale(c.pi(a, b)));
        }
    }
    let pbar = ptt.conj();
    (gtt, ptt, pbar)
}

/// Residuals of the three `dη_s` structure equations.
pub fn lex_residuals(l: &LexCoframe, c: &StandardConstants) -> [ChartForm; 3] {
    let (gtt, ptt, pbar) = pi_terms(l, c);
    let i = GaussRational::i();
    let neg = |f: &ChartForm| f.scale(&GaussRational::from_int(-1));
    let [e1, e2, e3] = &l.eta;
    let [p1, p2, p3] = &l.phi;
    let rhs1 = neg(&l.phi0.wedge(e1)).sub(&p2.wedge(e3)).add(&p3.wedge(e2)).add(&gtt.scale(&(&i * &GaussRational::from_int(2))));
    let rhs2 = neg(&l.phi0.wedge(e2)).sub(&p3.wedge(e1)).add(&p1.wedge(e3)).add(&ptt).add(&pbar);
    let rhs3 = neg(&l.phi0.wedge(e3)).sub(&p1.wedge(e2)).add(&p2.wedge(e1)).sub(&ptt.scale(&i)).add(&pbar.scale(&i));
    [e1.d().sub(&rhs1), e2.d().sub(&rhs2), e3.d().sub(&rhs3)]
}

/// Residuals of `2μ ω̂_s` against the `θ` expressions (with `a = id`).
pub fn omega_identity_residuals(chart: &QcChart, xi: &[VectorField; 3], l: &LexCoframe, c: &StandardConstants) -> [ChartForm; 3] {
    let (gtt, ptt, pbar) = pi_terms(l, c);
    let i = GaussRational::i();
    let mg = GaussRational::real(l.m.clone());
    let two_mu = &(&mg * &mg) * &GaussRational::from_int(2);
    let om = chart.omega(xi, 1);
    let rhs = [gtt.scale(&(&i * &GaussRational::from_int(2))), ptt.add(&pbar), pbar.scale(&i).sub(&ptt.scale(&i))];
    std::array::from_fn(|s| om[s].scale(&two_mu).sub(&rhs[s]))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LexReport {
    /// `μ = m²`.
    pub m: String,
    pub theta: Vec<String>,
    pub lex_residual_zero: bool,
    pub omega_identities_zero: bool,
    /// `η, θ, θ̄` pointwise independent at the origin.
    pub coframe_independent: bool,
}

impl LexReport {
    pub fn passed(&self) -> bool {
        self.lex_residual_zero && self.omega_identities_zero && self.coframe_independent
    }
}

/// Full certificate for the Heisenberg group with the gauge `μ = m²`.
pub fn certify_heisenberg(m: Rational) -> ChartCertificate {
    let chart = heisenberg();
    let c = make_constants(1, (1, 0)).expect("n = 1 constants");
    let mut cert = chart.certify();
    let Some(xi) = chart.solve_reeb() else { return cert };
    let l = heisenberg_lex(&chart, &c, m.clone());
    let origin: [GaussRational; COORDS] = std::array::from_fn(|_| GaussRational::zero());
    let forms: Vec<ChartForm> = l.eta.iter().cloned().chain(l.theta.iter().cloned()).chain(l.theta.iter().map(ChartForm::conj)).collect();
    let mat = CMatrix::from_fn(COORDS, COORDS, |r, k| forms[r].coeff(1 << k).eval(&origin));
    cert.lex = Some(LexReport {
        m: GaussRational::real(m).to_string(),
        theta: l.theta.iter().map(|t| t.fmt_with(&chart.names)).collect(),
        lex_residual_zero: lex_residuals(&l, &c).iter().all(ChartForm::is_zero),
        omega_identities_zero: omega_identity_residuals(&chart, &xi, &l, &c).iter().all(ChartForm::is_zero),
        coframe_independent: mat.inverse().is_some(),
    });
    cert
}

// ---------------------------------------------------------------------------
// chart files

/// One term `(monomial exponents, coefficient, differential)` of an `η̂_s`.
pub type ChartTerm = (Vec<u8>, String, String);

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChartFile {
    /// Seven names: four horizontal coordinates, then `t1, t2, t3`.
    pub coordinates: Vec<String>,
    pub eta: Vec<Vec<ChartTerm>>,
    /// `ĝ` in the frame `X_a` (4×4 rationals).
    pub g: Vec<Vec<String>>,
    /// `Î_1, Î_2, Î_3` in the frame `X_a`.
    #[serde(rename = "I")]
    pub i: Vec<Vec<Vec<String>>>,
}

fn read_matrix(rows: &[Vec<String>], what: &str) -> Result<CMatrix, ChartError> {
    if rows.len() != HORIZ || rows.iter().any(|r| r.len() != HORIZ) {
        return Err(ChartError::MatrixShape(what.into()));
    }
    let mut m = CMatrix::zero(HORIZ, HORIZ);
    for (i, r) in rows.iter().enumerate() {
        for (j, s) in r.iter().enumerate() {
            let v = parse_rational(s).ok_or_else(|| ChartError::Number(s.clone()))?;
            m.set(i, j, GaussRational::real(v));
        }
    }
    Ok(m)
}

/// Parses a chart file into a [`QcChart`].
pub fn parse_chart(text: &str) -> Result<QcChart, ChartError> {
    let file: ChartFile = serde_json::from_str(text).map_err(|e| ChartError::Format(e.to_string()))?;
    chart_from_file(&file)
}

pub fn chart_from_file(file: &ChartFile) -> Result<QcChart, ChartError> {
    let names = &file.coordinates;
    if names.len() != COORDS || (1..COORDS).any(|k| names[..k].contains(&names[k])) {
        return Err(ChartError::Coordinates);
    }
    if file.eta.len() != 3 || file.i.len() != 3 {
        return Err(ChartError::Format("need three η̂ and three Î".into()));
    }
    let mut eta: [ChartForm; 3] = Default::default();
    for (s, terms) in file.eta.iter().enumerate() {
        if terms.len() > MAX_TERMS {
            return Err(ChartError::TooLarge);
        }
        for (mono, coef, dx) in terms {
            if mono.len() != COORDS {
                return Err(ChartError::Format(format!("monomial needs {COORDS} exponents")));
            }
            if mono.iter().any(|&e| e > MAX_EXPONENT) {
                return Err(ChartError::TooLarge);
            }
            let c: GaussRational = coef.parse().map_err(|_| ChartError::Number(coef.clone()))?;
            let k = names.iter().position(|n| n == dx).ok_or_else(|| ChartError::UnknownCoordinate(dx.clone()))?;
            let mut m = [0; COORDS];
            m.copy_from_slice(mono);
            let mut p = Poly::zero();
            p.add_term(m, c);
            eta[s].add_term(1 << k, p);
        }
    }
    let g = read_matrix(&file.g, "g")?;
    let i = [read_matrix(&file.i[0], "I1")?, read_matrix(&file.i[1], "I2")?, read_matrix(&file.i[2], "I3")?];
    QcChart::new(names.clone(), eta, g, i)
}

fn rat_string(v: &GaussRational) -> String {
    v.to_string()
}

/// The chart file for a [`QcChart`].
pub fn chart_to_file(chart: &QcChart) -> ChartFile {
    let eta = chart
        .eta
        .iter()
        .map(|e| {
            let mut terms = Vec::new();
            for (mask, p) in e.terms() {
                let k = mask.trailing_zeros() as usize;
                for (m, c) in p.terms() {
                    terms.push((m.to_vec(), rat_string(c), chart.names[k].clone()));
                }
            }
            terms
        })
        .collect();
    let mat = |m: &CMatrix| (0..HORIZ).map(|i| (0..HORIZ).map(|j| rat_string(m.get(i, j))).collect()).collect();
    ChartFile { coordinates: chart.names.clone(), eta, g: mat(&chart.g), i: chart.i_mats.iter().map(mat).collect() }
}

impl fmt::Display for ChartForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&default_names()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_signs() {
        let (a, b, c) = (ChartForm::dx(0), ChartForm::dx(1), ChartForm::dx(2));
        assert_eq!(b.wedge(&a), a.wedge(&b).scale(&GaussRational::from_int(-1)));
        assert_eq!(c.wedge(&a.wedge(&b)), a.wedge(&b).wedge(&c));
        assert_eq!(b.wedge(&c).wedge(&a), a.wedge(&b).wedge(&c));
        assert!(a.wedge(&a).is_zero());
    }

    #[test]
    fn d_squared_is_zero() {
        let f = Poly::coord(0).mul(&Poly::coord(4)).mul(&Poly::coord(2));
        let w = ChartForm::dx(1).mul_poly(&f);
        assert!(w.d().d().is_zero());
        assert!(ChartForm::function(f).d().d().is_zero());
    }

    #[test]
    fn determinant_evaluation() {
        let w = ChartForm::dx(0).wedge(&ChartForm::dx(1));
        assert_eq!(w.eval2(&coord_field(0), &coord_field(1)), Poly::constant(GaussRational::one()));
        assert_eq!(w.eval2(&coord_field(1), &coord_field(0)), Poly::constant(GaussRational::from_int(-1)));
    }
}
