//! The matrix model of `sp(n+1,1)`: coordinates, brackets, the grading, the
//! Killing form, dual frames, the parabolic subgroup and the group `G₁`.
//!
//! Coordinates follow the coframe generator order, with barred generators as
//! independent complex coordinates, so every statement holds on the
//! complexification and restricts to the real form.

use std::cell::OnceCell;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exterior::{Coframe, Generator};
use num_bigint::BigInt;

use crate::matrix::{from_scaled, gadd, gmul, scaled_ints, CMatrix};
use crate::number::{GaussRational, Rational};
use crate::random::{rng, small_gauss, small_rational};
use crate::structure::{build_rules_with, Mode};
use crate::tensor::{jmap, IndexSlot, IndexedTensor, StandardConstants};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LieError {
    #[error("matrix is not of the sp(n+1,1) block form (entry ({row}, {col}))")]
    Template { row: usize, col: usize },
    #[error("matrix has shape {0}×{1}, expected {2}×{2}")]
    Shape(usize, usize, usize),
    #[error("coordinate vector has length {0}, expected {1}")]
    Length(usize, usize),
    #[error("U is not in Sp(n)")]
    NotSpn,
    #[error("CSp(1) block is singular")]
    SingularA,
    #[error("pairing matrix is singular")]
    Singular,
}

/// A point of `sp(n+1,1) ⊗ ℂ` in coframe coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieCoord(pub Vec<GaussRational>);

impl LieCoord {
    pub fn zero(dim: usize) -> Self {
        LieCoord(vec![GaussRational::zero(); dim])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &LieCoord) -> LieCoord {
        LieCoord(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: &GaussRational) -> LieCoord {
        LieCoord(self.0.iter().map(|a| a * s).collect())
    }
}

/// Grading degree of the coordinate dual to a generator.
pub fn grade(g: Generator) -> i8 {
    match g {
        Generator::Eta(_) => -2,
        Generator::Theta(_) | Generator::ThetaBar(_) => -1,
        Generator::Phi0 | Generator::Phi(_) | Generator::Gamma(..) => 0,
        Generator::PhiUp(_) | Generator::PhiUpBar(_) => 1,
        Generator::Psi(_) => 2,
    }
}

/// Components of an element in `𝔤₋₂ ⊕ 𝔤₋₁ ⊕ 𝔤₀ ⊕ 𝔤₁ ⊕ 𝔤₂`, indexed by `grade + 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedDecomposition {
    pub parts: [LieCoord; 5],
}

impl GradedDecomposition {
    pub fn sum(&self) -> LieCoord {
        let mut r = LieCoord::zero(self.parts[0].0.len());
        for p in &self.parts {
            r = r.add(p);
        }
        r
    }
}

/// The matrix model for one choice of `n` and signature.
pub struct LieModel {
    pub coframe: Coframe,
    size: usize,
    basis: Vec<CMatrix>,
    pivots: Vec<(usize, usize)>,
    /// Sparse rows of the inverse of the pivot block.
    reader: Vec<Vec<(usize, GaussRational)>>,
    fast: Option<IntTables>,
    ad_basis: OnceCell<Vec<Vec<(usize, GaussRational)>>>,
}

/// The basis matrices and the reader as Gaussian integers over fixed
/// denominators, for the integer bracket.
#[derive(Debug, Clone)]
struct IntTables {
    /// Per coordinate: `(row, col, value)`, all over `basis_den`.
    basis: Vec<Vec<(usize, usize, (i128, i128))>>,
    basis_den: i64,
    /// Per coordinate: `(pivot, value)`, all over `reader_den`.
    reader: Vec<Vec<(usize, (i128, i128))>>,
    reader_den: i64,
}

impl IntTables {
    fn new(basis: &[CMatrix], reader: &[Vec<(usize, GaussRational)>]) -> Option<Self> {
        let entries: Vec<Vec<(usize, usize, GaussRational)>> =
            basis.iter().map(|b| b.nonzeros().map(|(i, j, v)| (i, j, v.clone())).collect()).collect();
        let (basis_den, bv) = scaled_ints(entries.iter().flatten().map(|e| &e.2))?;
        let mut it = bv.into_iter();
        let basis = entries.iter().map(|row| row.iter().map(|(i, j, _)| { let v = it.next().unwrap(); (*i, *j, (v.0 as i128, v.1 as i128)) }).collect()).collect();
        let (reader_den, rv) = scaled_ints(reader.iter().flatten().map(|e| &e.1))?;
        let mut it = rv.into_iter();
        let reader = reader.iter().map(|row| row.iter().map(|(r, _)| { let v = it.next().unwrap(); (*r, (v.0 as i128, v.1 as i128)) }).collect()).collect();
        Some(IntTables { basis, basis_den, reader, reader_den })
    }
}

fn half() -> GaussRational {
    GaussRational::from_parts(1, 2, 0, 1)
}

fn ci(re: i64, im: i64) -> GaussRational {
    GaussRational::from_parts(re, 1, im, 1)
}

impl LieModel {
    pub fn new(consts: StandardConstants) -> Self {
        let coframe = Coframe::new(consts);
        let size = 2 * coframe.consts.n + 4;
        let dim = coframe.len();
        let mut basis = Vec::with_capacity(dim);
        for k in 0..dim {
            let mut c = LieCoord::zero(dim);
            c.0[k] = GaussRational::one();
            basis.push(template(&coframe, &c));
        }
        // Pick `dim` matrix entries on which the basis is independent.
        let mut pivots = Vec::new();
        let mut echelon: Vec<(usize, Vec<GaussRational>)> = Vec::new();
        'entries: for i in 0..size {
            for j in 0..size {
                let mut v: Vec<GaussRational> = basis.iter().map(|b| b.get(i, j).clone()).collect();
                for (p, row) in &echelon {
                    if !v[*p].is_zero() {
                        let f = v[*p].clone();
                        for (x, y) in v.iter_mut().zip(row) {
                            *x = &*x - &(y * &f);
                        }
                    }
                }
                if let Some(p) = v.iter().position(|x| !x.is_zero()) {
                    let inv = v[p].inv().expect("pivot nonzero");
                    let v: Vec<GaussRational> = v.iter().map(|x| x * &inv).collect();
                    for (_, row) in echelon.iter_mut() {
                        if !row[p].is_zero() {
                            let f = row[p].clone();
                            for (x, y) in row.iter_mut().zip(&v) {
                                *x = &*x - &(y * &f);
                            }
                        }
                    }
                    echelon.push((p, v));
                    pivots.push((i, j));
                    if pivots.len() == dim {
                        break 'entries;
                    }
                }
            }
        }
        assert_eq!(pivots.len(), dim, "template basis is degenerate");
        let s = CMatrix::from_fn(dim, dim, |r, k| basis[k].get(pivots[r].0, pivots[r].1).clone());
        let inv = s.inverse().expect("pivot block invertible");
        let reader: Vec<Vec<(usize, GaussRational)>> = (0..dim).map(|k| (0..dim).filter(|r| !inv.get(k, *r).is_zero()).map(|r| (r, inv.get(k, r).clone())).collect()).collect();
        let fast = IntTables::new(&basis, &reader);
        LieModel { coframe, size, basis, pivots, reader, fast, ad_basis: OnceCell::new() }
    }

    pub fn n(&self) -> usize {
        self.coframe.consts.n
    }

    pub fn consts(&self) -> &StandardConstants {
        &self.coframe.consts
    }

    pub fn dim(&self) -> usize {
        self.coframe.len()
    }

    pub fn matrix_size(&self) -> usize {
        self.size
    }

    pub fn pos(&self, g: Generator) -> usize {
        self.coframe.position(g)
    }

    pub fn unit(&self, g: Generator) -> LieCoord {
        let mut c = LieCoord::zero(self.dim());
        c.0[self.pos(g)] = GaussRational::one();
        c
    }

    pub fn basis_element(&self, k: usize) -> LieCoord {
        let mut c = LieCoord::zero(self.dim());
        c.0[k] = GaussRational::one();
        c
    }

    pub fn to_matrix(&self, c: &LieCoord) -> Result<CMatrix, LieError> {
        if c.0.len() != self.dim() {
            return Err(LieError::Length(c.0.len(), self.dim()));
        }
        Ok(template(&self.coframe, c))
    }

    /// Reads coordinates off a matrix and rejects anything off the block template.
    pub fn from_matrix(&self, m: &CMatrix) -> Result<LieCoord, LieError> {
        if m.rows() != self.size || m.cols() != self.size {
            return Err(LieError::Shape(m.rows(), m.cols(), self.size));
        }
        let c = self.read_coords(m);
        let back = template(&self.coframe, &c);
        for i in 0..self.size {
            for j in 0..self.size {
                if back.get(i, j) != m.get(i, j) {
                    return Err(LieError::Template { row: i, col: j });
                }
            }
        }
        Ok(c)
    }

    fn read_coords(&self, m: &CMatrix) -> LieCoord {
        let mut c = LieCoord::zero(self.dim());
        for (ck, row) in c.0.iter_mut().zip(&self.reader) {
            for (r, a) in row {
                let (i, j) = self.pivots[*r];
                *ck += &(a * m.get(i, j));
            }
        }
        c
    }

    // closedness of the template under commutators is covered by the round-trip tests
    pub fn bracket(&self, a: &LieCoord, b: &LieCoord) -> LieCoord {
        if let Some(c) = self.bracket_int(a, b) {
            return c;
        }
        let (ma, mb) = (template(&self.coframe, a), template(&self.coframe, b));
        self.read_coords(&ma.commutator(&mb))
    }

    /// The bracket in checked integer arithmetic; `None` on overflow.
    fn bracket_int(&self, a: &LieCoord, b: &LieCoord) -> Option<LieCoord> {
        let t = self.fast.as_ref()?;
        let n = self.size;
        let dense = |c: &LieCoord| -> Option<(i64, Vec<(i128, i128)>)> {
            let (den, v) = scaled_ints(&c.0)?;
            let mut m = vec![(0i128, 0i128); n * n];
            for (k, x) in v.iter().enumerate() {
                if *x == (0, 0) {
                    continue;
                }
                for (i, j, y) in &t.basis[k] {
                    m[i * n + j] = gadd(m[i * n + j], gmul((x.0 as i128, x.1 as i128), *y)?)?;
                }
            }
            Some((den, m))
        };
        let (da, ma) = dense(a)?;
        let (db, mb) = dense(b)?;
        let mut comm = vec![(0i128, 0i128); n * n];
        for i in 0..n {
            for k in 0..n {
                let (x, y) = (ma[i * n + k], mb[i * n + k]);
                for j in 0..n {
                    let e = &mut comm[i * n + j];
                    if x != (0, 0) {
                        *e = gadd(*e, gmul(x, mb[k * n + j])?)?;
                    }
                    if y != (0, 0) {
                        let p = gmul(y, ma[k * n + j])?;
                        *e = gadd(*e, (p.0.checked_neg()?, p.1.checked_neg()?))?;
                    }
                }
            }
        }
        let den = BigInt::from(da) * BigInt::from(db) * BigInt::from(t.basis_den) * BigInt::from(t.basis_den) * BigInt::from(t.reader_den);
        let mut out = Vec::with_capacity(self.dim());
        for row in &t.reader {
            let mut acc = (0i128, 0i128);
            for (r, v) in row {
                let (i, j) = self.pivots[*r];
                acc = gadd(acc, gmul(*v, comm[i * n + j])?)?;
            }
            out.push(from_scaled(acc, &den));
        }
        Some(LieCoord(out))
    }

    pub fn decompose(&self, c: &LieCoord) -> GradedDecomposition {
        let parts = std::array::from_fn(|k| {
            let mut p = LieCoord::zero(self.dim());
            for (i, g) in self.coframe.generators().iter().enumerate() {
                if grade(*g) + 2 == k as i8 {
                    p.0[i] = c.0[i].clone();
                }
            }
            p
        });
        GradedDecomposition { parts }
    }

    /// `Γ_{αβ}` of a coordinate vector as a symmetric tensor.
    pub fn gamma_tensor(&self, c: &LieCoord) -> IndexedTensor {
        let d = self.coframe.dim();
        let mut t = IndexedTensor::zero(self.n(), vec![IndexSlot::LOWER, IndexSlot::LOWER]);
        for a in 0..d {
            for b in 0..d {
                let g = Generator::Gamma(a.min(b) as u8, a.max(b) as u8);
                t.set(&[a as u8, b as u8], c.0[self.pos(g)].clone());
            }
        }
        t
    }

    /// Membership in the real form: real `η, φ₀, φ_s, ψ`, barred coordinates
    /// conjugate to unbarred ones, and `jΓ = Γ`.
    pub fn is_real(&self, c: &LieCoord) -> bool {
        let cf = &self.coframe;
        let d = cf.dim();
        for (i, g) in cf.generators().iter().enumerate() {
            let ok = match *g {
                Generator::Eta(_) | Generator::Phi0 | Generator::Phi(_) | Generator::Psi(_) => c.0[i].is_real(),
                Generator::ThetaBar(a) => c.0[i] == c.0[self.pos(Generator::Theta(a))].conj(),
                Generator::PhiUpBar(a) => c.0[i] == c.0[self.pos(Generator::PhiUp(a))].conj(),
                _ => true,
            };
            if !ok {
                return false;
            }
        }
        let _ = d;
        let gt = self.gamma_tensor(c);
        jmap(&gt, self.consts()) == gt
    }

    /// A random element of the real form with small rational entries.
    pub fn random_real<R: Rng>(&self, r: &mut R) -> LieCoord {
        let cf = &self.coframe;
        let d = cf.dim();
        let mut c = LieCoord::zero(self.dim());
        for (i, g) in cf.generators().iter().enumerate() {
            match *g {
                Generator::Eta(_) | Generator::Phi0 | Generator::Phi(_) | Generator::Psi(_) => {
                    c.0[i] = GaussRational::real(small_rational(r));
                }
                Generator::Theta(_) | Generator::PhiUp(_) => c.0[i] = small_gauss(r),
                _ => {}
            }
        }
        for a in 0..d as u8 {
            c.0[self.pos(Generator::ThetaBar(a))] = c.0[self.pos(Generator::Theta(a))].conj();
            c.0[self.pos(Generator::PhiUpBar(a))] = c.0[self.pos(Generator::PhiUp(a))].conj();
        }
        let y = random_j_real_symmetric(r, self.consts());
        for a in 0..d {
            for b in a..d {
                c.0[self.pos(Generator::Gamma(a as u8, b as u8))] = y.get(&[a as u8, b as u8]);
            }
        }
        c
    }

    /// Column `k` holds the coordinates of `[x, e_k]`.
    pub fn ad(&self, x: &LieCoord) -> CMatrix {
        let dim = self.dim();
        let mx = template(&self.coframe, x);
        let mut m = CMatrix::zero(dim, dim);
        for k in 0..dim {
            let col = self.from_matrix(&mx.commutator(&self.basis[k])).expect("closed");
            for (i, v) in col.0.into_iter().enumerate() {
                if !v.is_zero() {
                    m.set(i, k, v);
                }
            }
        }
        m
    }

    /// `B(a, b) = trace(ad a ∘ ad b)`.
    pub fn killing_trace(&self, a: &LieCoord, b: &LieCoord) -> GaussRational {
        (&self.ad(a) * &self.ad(b)).trace()
    }

    fn ad_basis(&self) -> &Vec<Vec<(usize, GaussRational)>> {
        // Sparse `ad e_i`, flattened as `row * dim + col`.
        self.ad_basis.get_or_init(|| {
            let dim = self.dim();
            (0..dim)
                .map(|i| {
                    let m = self.ad(&self.basis_element(i));
                    m.nonzeros().map(|(r, c, v)| (r * dim + c, v.clone())).collect()
                })
                .collect()
        })
    }

    /// Gram matrix of the trace-defined Killing form on the coordinate basis.
    pub fn killing_gram(&self) -> CMatrix {
        let dim = self.dim();
        let ads = self.ad_basis();
        // transpose lookups: trace(A B) = Σ A[r][c] B[c][r]
        let dense: Vec<Vec<GaussRational>> = ads
            .iter()
            .map(|sp| {
                let mut v = vec![GaussRational::zero(); dim * dim];
                for (k, x) in sp {
                    v[*k] = x.clone();
                }
                v
            })
            .collect();
        CMatrix::from_fn(dim, dim, |i, j| {
            let mut t = GaussRational::zero();
            for (k, x) in &ads[i] {
                let (r, c) = (k / dim, k % dim);
                let y = &dense[j][c * dim + r];
                if !y.is_zero() {
                    t += &(x * y);
                }
            }
            t
        })
    }

    /// Evaluates the closed Killing formula with the given coefficients.
    pub fn killing_closed(&self, a: &LieCoord, b: &LieCoord, k: &KillingCoefficients) -> GaussRational {
        let mut t = GaussRational::zero();
        for (block, coeff) in KillingBlock::ALL.iter().zip(k.as_array()) {
            t += &(&self.killing_shape(*block, a, b) * &GaussRational::real(coeff.clone()));
        }
        t
    }

    /// The bilinear expression multiplying one coefficient of the closed formula.
    pub fn killing_shape(&self, block: KillingBlock, a: &LieCoord, b: &LieCoord) -> GaussRational {
        let c = self.consts();
        let d = self.coframe.dim();
        let at = |x: &LieCoord, g: Generator| x.0[self.pos(g)].clone();
        let mut t = GaussRational::zero();
        match block {
            KillingBlock::EtaPsi => {
                for s in 0..3 {
                    t += &(&at(a, Generator::Eta(s)) * &at(b, Generator::Psi(s)));
                    t += &(&at(a, Generator::Psi(s)) * &at(b, Generator::Eta(s)));
                }
            }
            KillingBlock::Phi0 => t = &at(a, Generator::Phi0) * &at(b, Generator::Phi0),
            KillingBlock::PhiS => {
                for s in 0..3 {
                    t += &(&at(a, Generator::Phi(s)) * &at(b, Generator::Phi(s)));
                }
            }
            KillingBlock::ThetaPhi => {
                // θ_α = g_{ασ̄}θ^σ̄, θ_ᾱ = g_{σᾱ}θ^σ
                let lower = |x: &LieCoord, al: usize, bar: bool| {
                    let mut v = GaussRational::zero();
                    for s in 0..d {
                        let (gs, gen) = if bar {
                            (c.g(s, al), Generator::Theta(s as u8))
                        } else {
                            (c.g(al, s), Generator::ThetaBar(s as u8))
                        };
                        v += &(gs * &at(x, gen));
                    }
                    v
                };
                for al in 0..d {
                    let (fu, fub) = (Generator::PhiUp(al as u8), Generator::PhiUpBar(al as u8));
                    t += &(&lower(a, al, false) * &at(b, fu));
                    t += &(&at(a, fu) * &lower(b, al, false));
                    t += &(&lower(a, al, true) * &at(b, fub));
                    t += &(&at(a, fub) * &lower(b, al, true));
                }
            }
            KillingBlock::Gamma => {
                let ga = self.gamma_tensor(a);
                let gb = self.gamma_tensor(b);
                // Γ_{σ̄τ̄} = π^μ_σ̄ π^ν_τ̄ Γ_{μν}, then Γ^{αβ} = g^{ασ̄} g^{βτ̄} Γ_{σ̄τ̄}
                let mut gbar = vec![vec![GaussRational::zero(); d]; d];
                for (s, row) in gbar.iter_mut().enumerate() {
                    for (tt, x) in row.iter_mut().enumerate() {
                        for mu in 0..d {
                            for nu in 0..d {
                                let k = c.pi_ub(mu, s) * c.pi_ub(nu, tt);
                                if !k.is_zero() {
                                    *x += &(&k * &gb.get(&[mu as u8, nu as u8]));
                                }
                            }
                        }
                    }
                }
                for al in 0..d {
                    for be in 0..d {
                        let mut up = GaussRational::zero();
                        for s in 0..d {
                            for tt in 0..d {
                                let k = c.ginv(al, s) * c.ginv(be, tt);
                                if !k.is_zero() {
                                    up += &(&k * &gbar[s][tt]);
                                }
                            }
                        }
                        t += &(&ga.get(&[al as u8, be as u8]) * &up);
                    }
                }
            }
        }
        t
    }

    /// Shape matrix of one block on the coordinate basis.
    fn shape_matrix(&self, block: KillingBlock) -> CMatrix {
        let dim = self.dim();
        let gens = self.coframe.generators();
        CMatrix::from_fn(dim, dim, |i, j| {
            if block.supports(gens[i], gens[j]) {
                self.killing_shape(block, &self.basis_element(i), &self.basis_element(j))
            } else {
                GaussRational::zero()
            }
        })
    }

    /// Fits each closed-formula coefficient to the trace Gram matrix and checks
    /// the fitted formula on every basis pair.
    pub fn calibrate_killing(&self) -> KillingCalibration {
        let gram = self.killing_gram();
        let printed = KillingCoefficients::printed(self.n());
        let shapes: Vec<CMatrix> = KillingBlock::ALL.iter().map(|b| self.shape_matrix(*b)).collect();
        let mut fitted: Vec<Option<Rational>> = vec![None; shapes.len()];
        let mut consistent = true;
        for (k, sh) in shapes.iter().enumerate() {
            for (i, j, v) in sh.nonzeros() {
                let q = gram.get(i, j) * &v.inv().expect("nonzero shape");
                if !q.is_real() {
                    consistent = false;
                    continue;
                }
                match &fitted[k] {
                    None => fitted[k] = Some(q.re.clone()),
                    Some(prev) if *prev != q.re => consistent = false,
                    _ => {}
                }
            }
        }
        let trace = KillingCoefficients::from_vec(fitted.into_iter().map(|x| x.unwrap_or_default()).collect());
        let assemble = |k: &KillingCoefficients| {
            let mut m = CMatrix::zero(self.dim(), self.dim());
            for (sh, c) in shapes.iter().zip(k.as_array()) {
                m = &m + &sh.scale(&GaussRational::real(c));
            }
            m
        };
        let mismatched = KillingBlock::ALL
            .iter()
            .zip(trace.as_array().iter().zip(printed.as_array()))
            .filter(|(_, (t, p))| *t != p)
            .map(|(b, _)| b.name().to_string())
            .collect();
        KillingCalibration {
            n: self.n(),
            trace_formula_exact: consistent && assemble(&trace) == gram,
            printed_formula_exact: assemble(&printed) == gram,
            printed,
            trace,
            mismatched_blocks: mismatched,
            gram_symmetric: gram == gram.transpose(),
            gram_nondegenerate: gram.inverse().is_some(),
        }
    }

    /// Frames dual to `η_s, θ^α, θ^ᾱ` and their Killing-dual partners in `𝔤₁ ⊕ 𝔤₂`.
    pub fn dual_frames(&self) -> Result<DualFrames, LieError> {
        let d = self.coframe.dim();
        let gram = self.killing_gram();
        let p = |g| self.pos(g);
        let e: Vec<usize> = (0..3).map(|s| p(Generator::Eta(s))).collect();
        let psi: Vec<usize> = (0..3).map(|s| p(Generator::Psi(s))).collect();
        // Ê_t = Σ x_{tu} Ψ_u with B(E_s, Ê_t) = δ_st
        let m = CMatrix::from_fn(3, 3, |s, u| gram.get(e[s], psi[u]).clone());
        let minv = m.inverse().ok_or(LieError::Singular)?;
        let e_hat: Vec<LieCoord> = (0..3)
            .map(|t| {
                let mut c = LieCoord::zero(self.dim());
                for u in 0..3 {
                    c.0[psi[u]] = minv.get(u, t).clone();
                }
                c
            })
            .collect();
        // Ẑ^β, Ẑ^β̄ in span{φ^α, φ^ᾱ}: B(Z_α, Ẑ^β) = δ, B(Z_ᾱ, Ẑ^β) = 0 and conversely
        let zs: Vec<usize> = (0..d).map(|a| p(Generator::Theta(a as u8))).chain((0..d).map(|a| p(Generator::ThetaBar(a as u8)))).collect();
        let fs: Vec<usize> = (0..d).map(|a| p(Generator::PhiUp(a as u8))).chain((0..d).map(|a| p(Generator::PhiUpBar(a as u8)))).collect();
        let m = CMatrix::from_fn(2 * d, 2 * d, |r, c| gram.get(zs[r], fs[c]).clone());
        let minv = m.inverse().ok_or(LieError::Singular)?;
        let z_hat: Vec<LieCoord> = (0..2 * d)
            .map(|t| {
                let mut c = LieCoord::zero(self.dim());
                for u in 0..2 * d {
                    c.0[fs[u]] = minv.get(u, t).clone();
                }
                c
            })
            .collect();
        let cst = self.consts();
        let psi_e = CMatrix::from_fn(3, 3, |s, t| e_hat[t].0[psi[s]].clone());
        // φ_α = g_{ασ̄} φ^σ̄
        let phi_z = CMatrix::from_fn(d, d, |a, b| {
            let mut v = GaussRational::zero();
            for s in 0..d {
                v += &(cst.g(a, s) * &z_hat[b].0[fs[d + s]]);
            }
            v
        });
        let phib_z = CMatrix::from_fn(d, d, |a, b| {
            let mut v = GaussRational::zero();
            for s in 0..d {
                v += &(cst.g(s, a) * &z_hat[b].0[fs[s]]);
            }
            v
        });
        let n = self.n() as i64;
        let printed_psi = GaussRational::from_parts(-1, 4 * n + 6, 0, 1);
        let printed_phi = GaussRational::from_parts(-1, 4 * (2 * n + 7), 0, 1);
        let diag = |m: &CMatrix, v: &GaussRational| {
            (0..m.rows()).all(|i| (0..m.cols()).all(|j| if i == j { m.get(i, j) == v } else { m.get(i, j).is_zero() }))
        };
        let psi_value = psi_e.get(0, 0).clone();
        let phi_value = phi_z.get(0, 0).clone();
        Ok(DualFrames {
            psi_diagonal: diag(&psi_e, &psi_value),
            phi_diagonal: diag(&phi_z, &phi_value),
            phibar_vanishes: phib_z.is_zero(),
            psi_matches_printed: diag(&psi_e, &printed_psi),
            phi_matches_printed: diag(&phi_z, &printed_phi),
            psi_value,
            phi_value,
            printed_psi,
            printed_phi,
            e_hat,
            z_hat,
        })
    }

    /// Compares the flat structure equations with the matrix bracket on every
    /// basis pair: `dω(e_i, e_j) = −ω([e_i, e_j])`.
    pub fn maurer_cartan_check(&self) -> MaurerCartanReport {
        let rs = build_rules_with(self.consts().clone(), Mode::Flat, crate::structure::Perturbation::None).expect("supported n");
        let dim = self.dim();
        let mut mismatches = Vec::new();
        let mut pairs = 0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                pairs += 1;
                let br = self.bracket(&self.basis_element(i), &self.basis_element(j));
                let mask = (1u64 << i) | (1u64 << j);
                for k in 0..dim {
                    let dk = rs.d_generator(self.coframe.generator(k));
                    let coeff = dk.coeff(mask).as_constant().unwrap_or_else(GaussRational::zero);
                    if coeff != -&br.0[k] {
                        mismatches.push(format!(
                            "d{}({}, {}) = {} but -{}([.,.]) = {}",
                            self.coframe.generator(k),
                            self.coframe.generator(i),
                            self.coframe.generator(j),
                            coeff,
                            self.coframe.generator(k),
                            -&br.0[k]
                        ));
                    }
                }
            }
        }
        MaurerCartanReport { n: self.n(), pairs, mismatches }
    }

    /// Pairing `H[i][j] = ⟨b_i, conj b_j⟩` of the basis of `W`.
    pub fn pairing(&self) -> CMatrix {
        let d = self.coframe.dim();
        let (w1, w2) = (2 + d, 3 + d);
        let mut h = CMatrix::zero(self.size, self.size);
        for (a, b) in [(0, w1), (w1, 0), (1, w2), (w2, 1)] {
            h.set(a, b, GaussRational::one());
        }
        for a in 0..d {
            for b in 0..d {
                h.set(2 + a, 2 + b, self.consts().g(a, b).clone());
            }
        }
        h
    }

    /// Matrix of the antilinear `J₂` on the basis of `W`: `J₂ b_j = Σ_i J[i][j] conj(b_i)`.
    pub fn j2(&self) -> CMatrix {
        let d = self.coframe.dim();
        let (w1, w2) = (2 + d, 3 + d);
        let mut j = CMatrix::zero(self.size, self.size);
        j.set(1, 0, GaussRational::one());
        j.set(0, 1, ci(-1, 0));
        j.set(w2, w1, GaussRational::one());
        j.set(w1, w2, ci(-1, 0));
        for a in 0..d {
            for b in 0..d {
                j.set(2 + b, 2 + a, self.consts().pi_ub(b, a).clone());
            }
        }
        j
    }

    /// `Mᵀ H conj(M) = H` and `J₂ M = conj(M) J₂`: membership in `Sp(n+1,1)`.
    pub fn preserves_structure(&self, m: &CMatrix) -> (bool, bool) {
        let h = self.pairing();
        let j = self.j2();
        let pairing = &(&m.transpose() * &h) * &m.conj() == h;
        let quat = &j * m == &m.conj() * &j;
        (pairing, quat)
    }

    /// The infinitesimal versions for an algebra element.
    pub fn algebra_preserves_structure(&self, x: &CMatrix) -> (bool, bool) {
        let h = self.pairing();
        let j = self.j2();
        let pairing = (&(&x.transpose() * &h) + &(&h * &x.conj())).is_zero();
        let quat = &j * x == &x.conj() * &j;
        (pairing, quat)
    }

    /// Member of the parabolic subgroup built from `A = [[a₁, −ā₂], [a₂, ā₁]]`,
    /// `U ∈ Sp(n)`, `r ∈ ℂ^{2n}` and real `λ`.
    pub fn parabolic_member(&self, a1: &GaussRational, a2: &GaussRational, g1: &G1Element) -> Result<CMatrix, LieError> {
        let c = self.consts();
        let d = self.coframe.dim();
        if !is_sp_n(&g1.u, c) {
            return Err(LieError::NotSpn);
        }
        let a = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => a1.clone(),
            (0, 1) => -&a2.conj(),
            (1, 0) => a2.clone(),
            _ => a1.conj(),
        });
        let det = a1.norm_sqr() + a2.norm_sqr();
        if num_traits::Zero::is_zero(&det) {
            return Err(LieError::SingularA);
        }
        let r = &g1.r;
        let rb: Vec<GaussRational> = r.iter().map(|x| x.conj()).collect();
        let ulow = |b: usize, s: usize| u_lower(&g1.u, c, b, s);
        let rr = r_norm(r, c);
        let mut blk = CMatrix::zero(2, d);
        for b in 0..d {
            let mut x = GaussRational::zero();
            let mut y = GaussRational::zero();
            for s in 0..d {
                x += &(&ulow(b, s) * &rb[s]);
                for t in 0..d {
                    y += &(&(&ulow(b, t) * c.pi_bu(t, s)) * &r[s]);
                }
            }
            blk.set(0, b, x);
            blk.set(1, b, y);
        }
        let top_mid = -&(&a * &blk);
        let hr = &rr * &half();
        let l = |s: usize| GaussRational::real(g1.lambda[s].clone());
        let tr = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => &-&hr + &l(0).mul_i(),
            (0, 1) => &-&l(1) + &l(2).mul_i(),
            (1, 0) => &l(1) + &l(2).mul_i(),
            _ => &-&hr - &l(0).mul_i(),
        });
        let top_right = &a * &tr;
        let bottom = a.scale(&GaussRational::real(num_traits::Inv::inv(det)));
        let mut m = CMatrix::zero(self.size, self.size);
        let (w1, w2) = (2 + d, 3 + d);
        for i in 0..2 {
            for j in 0..2 {
                m.set(i, j, a.get(i, j).clone());
                m.set(i, w1 + j, top_right.get(i, j).clone());
                m.set(w1 + i, w1 + j, bottom.get(i, j).clone());
            }
            for b in 0..d {
                m.set(i, 2 + b, top_mid.get(i, b).clone());
            }
        }
        for al in 0..d {
            for b in 0..d {
                m.set(2 + al, 2 + b, g1.u.get(al, b).clone());
            }
            m.set(2 + al, w1, r[al].clone());
            let mut y = GaussRational::zero();
            for s in 0..d {
                y += &(c.pi_ub(al, s) * &rb[s]);
            }
            m.set(2 + al, w2, y);
        }
        Ok(m)
    }
}

/// The block template of `sp(n+1,1)`; rows and columns `(v₁, v₂, e_α, w₁, w₂)`.
fn template(cf: &Coframe, c: &LieCoord) -> CMatrix {
    let k = &cf.consts;
    let d = cf.dim();
    let n = 2 * k.n + 4;
    let x = |g: Generator| c.0[cf.position(g)].clone();
    let eta = |s: u8| x(Generator::Eta(s));
    let th = |a: usize| x(Generator::Theta(a as u8));
    let thb = |a: usize| x(Generator::ThetaBar(a as u8));
    let p0 = x(Generator::Phi0);
    let ph = |s: u8| x(Generator::Phi(s));
    let gam = |a: usize, b: usize| x(Generator::Gamma(a.min(b) as u8, a.max(b) as u8));
    let fu = |a: usize| x(Generator::PhiUp(a as u8));
    let fub = |a: usize| x(Generator::PhiUpBar(a as u8));
    let psi = |s: u8| x(Generator::Psi(s));
    let i = GaussRational::i();
    let h = half();
    let (v1, v2, w1, w2) = (0, 1, 2 + d, 3 + d);
    let e = |a: usize| 2 + a;
    let mut m = CMatrix::zero(n, n);
    let p01 = &p0 + &ph(0).mul_i();
    let p01m = &p0 - &ph(0).mul_i();
    let p23 = &ph(1) + &ph(2).mul_i();
    let p23m = &ph(1) - &ph(2).mul_i();
    m.set(v1, v1, -&(&p01 * &h));
    m.set(v1, v2, -&(&p23m * &h));
    m.set(v1, w1, psi(0).mul_i());
    m.set(v1, w2, &psi(1) - &psi(2).mul_i());
    m.set(v2, v1, &p23 * &h);
    m.set(v2, v2, -&(&p01m * &h));
    m.set(v2, w1, -&(&psi(1) + &psi(2).mul_i()));
    m.set(v2, w2, -&psi(0).mul_i());
    m.set(w1, v1, &eta(0).mul_i() * &h);
    m.set(w1, v2, &(&eta(1) - &eta(2).mul_i()) * &h);
    m.set(w1, w1, &p01m * &h);
    m.set(w1, w2, -&(&p23m * &h));
    m.set(w2, v1, -&(&(&eta(1) + &eta(2).mul_i()) * &h));
    m.set(w2, v2, -&(&eta(0).mul_i() * &h));
    m.set(w2, w1, &p23 * &h);
    m.set(w2, w2, &p01 * &h);
    for b in 0..d {
        let (mut gfb, mut pfu, mut gthb, mut pth) = (GaussRational::zero(), GaussRational::zero(), GaussRational::zero(), GaussRational::zero());
        for s in 0..d {
            gfb += &(k.g(b, s) * &fub(s));
            pfu += &(k.pi(b, s) * &fu(s));
            gthb += &(k.g(b, s) * &thb(s));
            pth += &(k.pi(b, s) * &th(s));
        }
        m.set(v1, e(b), &gfb * &ci(0, 2));
        m.set(v2, e(b), &pfu * &ci(0, 2));
        m.set(w1, e(b), &gthb * &i);
        m.set(w2, e(b), &pth * &i);
    }
    for a in 0..d {
        let (mut pthb, mut pfub) = (GaussRational::zero(), GaussRational::zero());
        for s in 0..d {
            pthb += &(k.pi_ub(a, s) * &thb(s));
            pfub += &(k.pi_ub(a, s) * &fub(s));
        }
        m.set(e(a), v1, th(a).mul_i());
        m.set(e(a), v2, &pthb * &ci(0, -1));
        m.set(e(a), w1, &fu(a) * &ci(0, 2));
        m.set(e(a), w2, &pfub * &ci(0, -2));
        for b in 0..d {
            let mut v = GaussRational::zero();
            for s in 0..d {
                v += &(k.pi_up(a, s) * &gam(s, b));
            }
            m.set(e(a), e(b), v);
        }
    }
    m
}

/// Random symmetric `Y_{αβ}` with `jY = Y`.
pub fn random_j_real_symmetric<R: Rng>(r: &mut R, c: &StandardConstants) -> IndexedTensor {
    let d = c.dim();
    let mut y = IndexedTensor::zero(c.n, vec![IndexSlot::LOWER, IndexSlot::LOWER]);
    for a in 0..d {
        for b in a..d {
            let v = small_gauss(r);
            y.set(&[a as u8, b as u8], v.clone());
            y.set(&[b as u8, a as u8], v);
        }
    }
    let jy = jmap(&y, c);
    y.add(&jy).expect("same slots").scale(&half())
}

/// The printed blocks of the closed Killing formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KillingBlock {
    EtaPsi,
    Phi0,
    PhiS,
    ThetaPhi,
    Gamma,
}

impl KillingBlock {
    pub const ALL: [KillingBlock; 5] = [KillingBlock::EtaPsi, KillingBlock::Phi0, KillingBlock::PhiS, KillingBlock::ThetaPhi, KillingBlock::Gamma];

    /// Whether the block can pair coordinates dual to `a` and `b`.
    pub fn supports(self, a: Generator, b: Generator) -> bool {
        use Generator::*;
        match self {
            KillingBlock::EtaPsi => matches!((a, b), (Eta(_), Psi(_)) | (Psi(_), Eta(_))),
            KillingBlock::Phi0 => matches!((a, b), (Phi0, Phi0)),
            KillingBlock::PhiS => matches!((a, b), (Phi(_), Phi(_))),
            KillingBlock::ThetaPhi => {
                let th = |g| matches!(g, Theta(_) | ThetaBar(_));
                let ph = |g| matches!(g, PhiUp(_) | PhiUpBar(_));
                (th(a) && ph(b)) || (ph(a) && th(b))
            }
            KillingBlock::Gamma => matches!((a, b), (Gamma(..), Gamma(..))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KillingBlock::EtaPsi => "eta.psi",
            KillingBlock::Phi0 => "phi0.phi0",
            KillingBlock::PhiS => "phi_s.phi_s",
            KillingBlock::ThetaPhi => "theta.phi",
            KillingBlock::Gamma => "Gamma.Gamma",
        }
    }
}

/// Coefficients of the closed Killing formula, one per block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KillingCoefficients {
    #[serde(serialize_with = "ser_rat")]
    pub eta_psi: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub phi0: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub phi_s: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub theta_phi: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub gamma: Rational,
}

pub(crate) fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl KillingCoefficients {
    /// The values as printed: `−(4n+6)`, `2n+6`, `−(2n+4)`, `−4(2n+7)`, `−7`.
    pub fn printed(n: usize) -> Self {
        let n = n as i64;
        let r = |v: i64| Rational::from_integer(v.into());
        KillingCoefficients { eta_psi: r(-(4 * n + 6)), phi0: r(2 * n + 6), phi_s: r(-(2 * n + 4)), theta_phi: r(-4 * (2 * n + 7)), gamma: r(-7) }
    }

    pub fn as_array(&self) -> [Rational; 5] {
        [self.eta_psi.clone(), self.phi0.clone(), self.phi_s.clone(), self.theta_phi.clone(), self.gamma.clone()]
    }

    fn from_vec(v: Vec<Rational>) -> Self {
        KillingCoefficients { eta_psi: v[0].clone(), phi0: v[1].clone(), phi_s: v[2].clone(), theta_phi: v[3].clone(), gamma: v[4].clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KillingCalibration {
    pub n: usize,
    pub printed: KillingCoefficients,
    pub trace: KillingCoefficients,
    /// The closed formula with the fitted coefficients reproduces the Gram matrix.
    pub trace_formula_exact: bool,
    /// The closed formula with the printed coefficients reproduces the Gram matrix.
    pub printed_formula_exact: bool,
    pub mismatched_blocks: Vec<String>,
    pub gram_symmetric: bool,
    pub gram_nondegenerate: bool,
}

/// Killing-dual frames of `𝔤₁ ⊕ 𝔤₂` and the resulting pairings.
#[derive(Debug, Clone)]
pub struct DualFrames {
    /// `Ê_1..Ê_3`.
    pub e_hat: Vec<LieCoord>,
    /// `Ẑ^1..Ẑ^{2n}` then `Ẑ^{1̄}..Ẑ^{2n̄}`.
    pub z_hat: Vec<LieCoord>,
    pub psi_value: GaussRational,
    pub phi_value: GaussRational,
    pub printed_psi: GaussRational,
    pub printed_phi: GaussRational,
    /// `ψ_s(Ê_t) = psi_value·δ_st`.
    pub psi_diagonal: bool,
    /// `φ_α(Ẑ^β) = phi_value·δ_α^β`.
    pub phi_diagonal: bool,
    /// `φ_ᾱ(Ẑ^β) = 0`.
    pub phibar_vanishes: bool,
    pub psi_matches_printed: bool,
    pub phi_matches_printed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaurerCartanReport {
    pub n: usize,
    pub pairs: usize,
    pub mismatches: Vec<String>,
}

/// `U_{βσ̄} = g_{ασ̄} U^α_β`.
fn u_lower(u: &CMatrix, c: &StandardConstants, b: usize, s: usize) -> GaussRational {
    let mut v = GaussRational::zero();
    for a in 0..c.dim() {
        let x = u.get(a, b);
        if !x.is_zero() {
            v += &(c.g(a, s) * x);
        }
    }
    v
}

/// `r_σ r^σ = g_{στ̄} r^σ r^τ̄`.
fn r_norm(r: &[GaussRational], c: &StandardConstants) -> GaussRational {
    let mut v = GaussRational::zero();
    for s in 0..c.dim() {
        for t in 0..c.dim() {
            let k = c.g(s, t);
            if !k.is_zero() {
                v += &(&(k * &r[s]) * &r[t].conj());
            }
        }
    }
    v
}

/// Both conditions defining `Sp(n)` for `U^α_β` stored as `u[α][β]`.
pub fn is_sp_n(u: &CMatrix, c: &StandardConstants) -> bool {
    let d = c.dim();
    if u.rows() != d || u.cols() != d {
        return false;
    }
    for a in 0..d {
        for b in 0..d {
            let (mut h, mut p) = (GaussRational::zero(), GaussRational::zero());
            for s in 0..d {
                for t in 0..d {
                    h += &(&(c.g(s, t) * u.get(s, a)) * &u.get(t, b).conj());
                    p += &(&(c.pi(s, t) * u.get(s, a)) * u.get(t, b));
                }
            }
            if h != *c.g(a, b) || p != *c.pi(a, b) {
                return false;
            }
        }
    }
    true
}

/// An element `A(U, r, λ)` of `G₁`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct G1Element {
    /// `U^α_β` at `[α][β]`.
    pub u: CMatrix,
    pub r: Vec<GaussRational>,
    pub lambda: [Rational; 3],
}

impl G1Element {
    pub fn identity(c: &StandardConstants) -> Self {
        G1Element { u: CMatrix::identity(c.dim()), r: vec![GaussRational::zero(); c.dim()], lambda: Default::default() }
    }

    /// Random element; `U` is the Cayley transform of a random `sp(n)` element.
    pub fn random<R: Rng>(r: &mut R, c: &StandardConstants) -> Self {
        let d = c.dim();
        let id = CMatrix::identity(d);
        // redraw until 1 − X/2 is invertible (always true for definite g)
        let u = loop {
            let y = random_j_real_symmetric(r, c);
            // X^α_β = π^{ασ} Y_{σβ}
            let x = CMatrix::from_fn(d, d, |a, b| {
                let mut v = GaussRational::zero();
                for s in 0..d {
                    v += &(c.pi_up(a, s) * &y.get(&[s as u8, b as u8]));
                }
                v
            });
            let hx = x.scale(&half());
            if let Some(inv) = (&id - &hx).inverse() {
                break &inv * &(&id + &hx);
            }
        };
        let rv = (0..d).map(|_| small_gauss(r)).collect();
        let lambda = std::array::from_fn(|_| small_rational(r));
        G1Element { u, r: rv, lambda }
    }

    pub fn validate(&self, c: &StandardConstants) -> Result<(), LieError> {
        if is_sp_n(&self.u, c) && self.r.len() == c.dim() {
            Ok(())
        } else {
            Err(LieError::NotSpn)
        }
    }

    /// The `(4n+7)`-square matrix acting on `(η_s, θ^β, θ^β̄, φ₀, φ_s)`.
    pub fn to_matrix(&self, c: &StandardConstants) -> CMatrix {
        let d = c.dim();
        let (th, thb, f0) = (3, 3 + d, 3 + 2 * d);
        let mut m = CMatrix::identity(3 + 2 * d + 4);
        let r = &self.r;
        let rb: Vec<GaussRational> = r.iter().map(|x| x.conj()).collect();
        let i = GaussRational::i();
        let two = ci(2, 0);
        let l = |s: usize| GaussRational::real(self.lambda[s].clone());
        for a in 0..d {
            let (mut pr, mut pbr) = (GaussRational::zero(), GaussRational::zero());
            for s in 0..d {
                pr += &(c.pi_ub(a, s) * &rb[s]);
                pbr += &(c.pi_bu(a, s) * &r[s]);
            }
            m.set(th + a, 0, r[a].mul_i());
            m.set(th + a, 1, pr.clone());
            m.set(th + a, 2, pr.mul_i());
            m.set(thb + a, 0, -&rb[a].mul_i());
            m.set(thb + a, 1, pbr.clone());
            m.set(thb + a, 2, -&pbr.mul_i());
            for b in 0..d {
                m.set(th + a, th + b, self.u.get(a, b).clone());
                m.set(thb + a, thb + b, self.u.get(a, b).conj());
            }
        }
        let rr = &r_norm(r, c) * &two;
        m.set(f0, 0, l(0));
        m.set(f0, 1, l(1));
        m.set(f0, 2, l(2));
        m.set(f0 + 1, 0, rr.clone());
        m.set(f0 + 1, 1, -&l(2));
        m.set(f0 + 1, 2, l(1));
        m.set(f0 + 2, 0, l(2));
        m.set(f0 + 2, 1, rr.clone());
        m.set(f0 + 2, 2, -&l(0));
        m.set(f0 + 3, 0, -&l(1));
        m.set(f0 + 3, 1, l(0));
        m.set(f0 + 3, 2, rr);
        for b in 0..d {
            // U_{βσ̄} r^σ̄ and π_{στ} U^σ_β r^τ
            let mut ur = GaussRational::zero();
            let mut pur = GaussRational::zero();
            for s in 0..d {
                ur += &(&u_lower(&self.u, c, b, s) * &rb[s]);
                for t in 0..d {
                    pur += &(&(c.pi(s, t) * self.u.get(s, b)) * &r[t]);
                }
            }
            let (urb, purb) = (ur.conj(), pur.conj());
            m.set(f0, th + b, &ur * &two);
            m.set(f0, thb + b, &urb * &two);
            m.set(f0 + 1, th + b, &ur * &ci(0, -2));
            m.set(f0 + 1, thb + b, &urb * &ci(0, 2));
            m.set(f0 + 2, th + b, &pur * &ci(-2, 0));
            m.set(f0 + 2, thb + b, &purb * &ci(-2, 0));
            m.set(f0 + 3, th + b, &pur * &ci(0, 2));
            m.set(f0 + 3, thb + b, &purb * &ci(0, -2));
        }
        let _ = i;
        m
    }

    /// Composition by the closed group law.
    pub fn compose(&self, o: &G1Element, c: &StandardConstants) -> G1Element {
        let d = c.dim();
        let u = &self.u * &o.u;
        let r: Vec<GaussRational> = (0..d)
            .map(|a| {
                let mut v = self.r[a].clone();
                for s in 0..d {
                    v += &(self.u.get(a, s) * &o.r[s]);
                }
                v
            })
            .collect();
        // U_{αβ̄} r̃^α r^β̄ and π^σ̄_α U_{σ̄β} r̃^α r^β
        let (mut q1, mut q2) = (GaussRational::zero(), GaussRational::zero());
        for a in 0..d {
            for b in 0..d {
                let ul = u_lower(&self.u, c, a, b);
                q1 += &(&(&ul * &o.r[a]) * &self.r[b].conj());
                for s in 0..d {
                    let k = c.pi_bu(s, a);
                    if !k.is_zero() {
                        q2 += &(&(&(k * &u_lower(&self.u, c, s, b).conj()) * &o.r[a]) * &self.r[b]);
                    }
                }
            }
        }
        // 2i q1 − 2i conj(q1) = −4 Im q1;  2 q2 + 2 conj(q2) = 4 Re q2;  −2i q2 + 2i conj(q2) = 4 Im q2
        let four = Rational::from_integer(4.into());
        let lambda = [
            &self.lambda[0] + &o.lambda[0] - &four * &q1.im,
            &self.lambda[1] + &o.lambda[1] + &four * &q2.re,
            &self.lambda[2] + &o.lambda[2] + &four * &q2.im,
        ];
        G1Element { u, r, lambda }
    }

    /// Inverse by the closed formula `A(U⁻¹, −U⁻¹r, −λ)`.
    pub fn inverse(&self, c: &StandardConstants) -> G1Element {
        let d = c.dim();
        // U ∈ Sp(n) preserves g, so U⁻¹ = g⁻¹ Ū^T g
        let uinv = CMatrix::from_fn(d, d, |a, b| {
            let mut v = GaussRational::zero();
            for s in 0..d {
                v += &(c.ginv(a, s) * &u_lower(&self.u, c, s, b).conj());
            }
            v
        });
        let r = (0..d)
            .map(|a| {
                let mut v = GaussRational::zero();
                for s in 0..d {
                    v -= &(uinv.get(a, s) * &self.r[s]);
                }
                v
            })
            .collect();
        G1Element { u: uinv, r, lambda: std::array::from_fn(|s| -&self.lambda[s]) }
    }
}

/// The displayed `𝔤₁` representation matrix for `(Γ_{αβ}, φ^α, ψ_s)`.
pub fn g1_algebra_matrix(gamma: &IndexedTensor, phi: &[GaussRational], psi: &[Rational; 3], c: &StandardConstants) -> CMatrix {
    let d = c.dim();
    let (th, thb, f0) = (3, 3 + d, 3 + 2 * d);
    let mut m = CMatrix::zero(3 + 2 * d + 4, 3 + 2 * d + 4);
    let fb: Vec<GaussRational> = phi.iter().map(|x| x.conj()).collect();
    let ps = |s: usize| GaussRational::real(psi[s].clone());
    for a in 0..d {
        let (mut pfb, mut pf) = (GaussRational::zero(), GaussRational::zero());
        for s in 0..d {
            pfb += &(c.pi_ub(a, s) * &fb[s]);
            pf += &(c.pi_bu(a, s) * &phi[s]);
        }
        m.set(th + a, 0, -&phi[a].mul_i());
        m.set(th + a, 1, -&pfb);
        m.set(th + a, 2, -&pfb.mul_i());
        m.set(thb + a, 0, fb[a].mul_i());
        m.set(thb + a, 1, -&pf);
        m.set(thb + a, 2, pf.mul_i());
        for b in 0..d {
            let mut v = GaussRational::zero();
            for s in 0..d {
                v += &(c.pi_up(a, s) * &gamma.get(&[s as u8, b as u8]));
            }
            m.set(th + a, th + b, -&v);
            m.set(thb + a, thb + b, -&v.conj());
        }
    }
    m.set(f0, 0, -&ps(0));
    m.set(f0, 1, -&ps(1));
    m.set(f0, 2, -&ps(2));
    m.set(f0 + 1, 1, ps(2));
    m.set(f0 + 1, 2, -&ps(1));
    m.set(f0 + 2, 0, -&ps(2));
    m.set(f0 + 2, 2, ps(0));
    m.set(f0 + 3, 0, ps(1));
    m.set(f0 + 3, 1, -&ps(0));
    for b in 0..d {
        // φ_β = g_{βσ̄} φ^σ̄, π_{σβ} φ^σ
        let (mut fl, mut pf) = (GaussRational::zero(), GaussRational::zero());
        for s in 0..d {
            fl += &(c.g(b, s) * &fb[s]);
            pf += &(c.pi(s, b) * &phi[s]);
        }
        let (flb, pfb) = (fl.conj(), pf.conj());
        m.set(f0, th + b, &fl * &ci(-2, 0));
        m.set(f0, thb + b, &flb * &ci(-2, 0));
        m.set(f0 + 1, th + b, &fl * &ci(0, 2));
        m.set(f0 + 1, thb + b, &flb * &ci(0, -2));
        m.set(f0 + 2, th + b, &pf * &ci(-2, 0));
        m.set(f0 + 2, thb + b, &pfb * &ci(-2, 0));
        m.set(f0 + 3, th + b, &pf * &ci(0, 2));
        m.set(f0 + 3, thb + b, &pfb * &ci(0, -2));
    }
    m
}

/// Derivative at the identity of `t ↦ A(I + tX, tρ, tμ)`. The entries are
/// polynomials of degree at most two in `t`, so `(A(1) − A(−1))/2` is exact.
pub fn g1_derivative(x: &CMatrix, rho: &[GaussRational], mu: &[Rational; 3], c: &StandardConstants) -> CMatrix {
    let d = c.dim();
    let at = |sgn: i64| {
        let s = ci(sgn, 0);
        let e = G1Element {
            u: &CMatrix::identity(d) + &x.scale(&s),
            r: rho.iter().map(|v| v * &s).collect(),
            lambda: std::array::from_fn(|k| &mu[k] * &Rational::from_integer(sgn.into())),
        };
        e.to_matrix(c)
    };
    (&at(1) - &at(-1)).scale(&half())
}

/// Seeded random real coordinates, for sweeps.
pub fn random_coords(model: &LieModel, seed: u64, count: usize) -> Vec<LieCoord> {
    let mut r = rng(seed);
    (0..count).map(|_| model.random_real(&mut r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::make_constants;

    #[test]
    fn integer_bracket_matches_rational_bracket() {
        for (n, sig) in [(1, (1, 0)), (2, (1, 1))] {
            let m = LieModel::new(make_constants(n, sig).unwrap());
            assert!(m.fast.is_some());
            let xs = random_coords(&m, 11, 6);
            for a in &xs {
                for b in &xs {
                    let slow = m.read_coords(&template(&m.coframe, a).commutator(&template(&m.coframe, b)));
                    assert_eq!(m.bracket_int(a, b).unwrap(), slow);
                }
            }
        }
    }
}
