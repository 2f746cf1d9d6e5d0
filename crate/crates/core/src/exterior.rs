//! Graded-commutative exterior algebra over the coframe generators, with
//! coefficients that are polynomials in named scalar symbols.
//!
//! A wedge monomial is a `u64` bitmask over generator positions; the stored
//! orientation is always increasing generator order, signs are absorbed into
//! the coefficient.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, BitXor, Mul, Neg, Sub};

use smallvec::SmallVec;
use thiserror::Error;

use crate::number::GaussRational;
use crate::tensor::StandardConstants;

/// Families of scalar symbols: curvature components and the secondary
/// derivative arrays (namespaced `sec.*`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    S,
    V,
    L,
    M,
    C,
    H,
    P,
    Q,
    R,
    SecA,
    SecB,
    SecC,
    SecD,
    SecE,
    SecF,
    SecG,
    SecX,
    SecY,
    SecZ,
    SecN1,
    SecN2,
    SecN3,
    SecN4,
    SecN5,
    SecU,
    SecW,
    /// A free placeholder used by tests and formal computations.
    Formal,
}

impl Family {
    pub const CURVATURE: [Family; 9] =
        [Family::S, Family::V, Family::L, Family::M, Family::C, Family::H, Family::P, Family::Q, Family::R];

    pub const SECONDARY: [Family; 17] = [
        Family::SecA,
        Family::SecB,
        Family::SecC,
        Family::SecD,
        Family::SecE,
        Family::SecF,
        Family::SecG,
        Family::SecX,
        Family::SecY,
        Family::SecZ,
        Family::SecN1,
        Family::SecN2,
        Family::SecN3,
        Family::SecN4,
        Family::SecN5,
        Family::SecU,
        Family::SecW,
    ];

    /// Number of Greek indices (U and W carry one index `s ∈ {1,2,3}` instead).
    pub fn arity(self) -> usize {
        use Family::*;
        match self {
            SecA => 5,
            S | SecB | SecC => 4,
            V | SecD | SecE | SecF => 3,
            L | M | SecG | SecX | SecY | SecZ => 2,
            C | H | SecN1 | SecN2 | SecN3 | SecN4 | SecN5 | SecU | SecW => 1,
            P | Q | R => 0,
            Formal => 1,
        }
    }

    /// Totally symmetric families store sorted indices.
    pub fn symmetric(self) -> bool {
        self.arity() >= 2
    }

    pub fn is_curvature(self) -> bool {
        (self as u8) <= (Family::R as u8)
    }

    pub fn name(self) -> &'static str {
        use Family::*;
        match self {
            S => "S",
            V => "V",
            L => "L",
            M => "M",
            C => "C",
            H => "H",
            P => "P",
            Q => "Q",
            R => "R",
            SecA => "sec.A",
            SecB => "sec.B",
            SecC => "sec.C",
            SecD => "sec.D",
            SecE => "sec.E",
            SecF => "sec.F",
            SecG => "sec.G",
            SecX => "sec.X",
            SecY => "sec.Y",
            SecZ => "sec.Z",
            SecN1 => "sec.N1",
            SecN2 => "sec.N2",
            SecN3 => "sec.N3",
            SecN4 => "sec.N4",
            SecN5 => "sec.N5",
            SecU => "sec.U",
            SecW => "sec.W",
            Formal => "f",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::CURVATURE.iter().chain(Family::SECONDARY.iter()).copied().find(|f| f.name() == s)
    }
}

/// A scalar symbol `family_{idx}`; `conj` marks the conjugate array (all indices barred).
///
/// Symbols are always stored canonically; build them through
/// [`Coframe::sym`] (or [`ScalarSymbol::raw`] for families without reality rules).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScalarSymbol {
    pub family: Family,
    pub conj: bool,
    len: u8,
    idx: [u8; 5],
}

impl ScalarSymbol {
    /// A symbol with indices sorted when the family is symmetric; no reality rewrite.
    pub fn raw(family: Family, idx: &[u8], conj: bool) -> Self {
        assert!(idx.len() <= 5);
        let mut a = [0u8; 5];
        a[..idx.len()].copy_from_slice(idx);
        if family.symmetric() {
            a[..idx.len()].sort_unstable();
        }
        ScalarSymbol { family, conj, len: idx.len() as u8, idx: a }
    }

    pub fn indices(&self) -> &[u8] {
        &self.idx[..self.len as usize]
    }
}

impl fmt::Display for ScalarSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conj {
            write!(f, "bar({})", self.family.name())?;
        } else {
            write!(f, "{}", self.family.name())?;
        }
        if self.len > 0 {
            write!(f, "_")?;
            for i in self.indices() {
                write!(f, "{}", i + 1)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ScalarSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A product of scalar symbols, sorted.
pub type SymMonomial = SmallVec<[ScalarSymbol; 2]>;

/// Polynomial in scalar symbols with Gaussian-rational coefficients.
#[derive(Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct CoeffPoly {
    terms: BTreeMap<SymMonomial, GaussRational>,
}

impl CoeffPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussRational) -> Self {
        let mut p = Self::zero();
        p.add_term(SymMonomial::new(), c);
        p
    }

    pub fn int(v: i64) -> Self {
        Self::constant(GaussRational::from_int(v))
    }

    pub fn symbol(s: ScalarSymbol) -> Self {
        let mut p = Self::zero();
        let mut m = SymMonomial::new();
        m.push(s);
        p.add_term(m, GaussRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SymMonomial, &GaussRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant coefficient, if the polynomial has no symbolic part.
    pub fn as_constant(&self) -> Option<GaussRational> {
        match self.terms.len() {
            0 => Some(GaussRational::zero()),
            1 => self.terms.get(&SymMonomial::new()).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: SymMonomial, c: GaussRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add_assign(&mut self, o: &CoeffPoly) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, o: &CoeffPoly, s: &GaussRational) {
        if s.is_zero() {
            return;
        }
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c * s);
        }
    }

    pub fn scale(&self, s: &GaussRational) -> CoeffPoly {
        let mut r = CoeffPoly::zero();
        r.add_scaled(self, s);
        r
    }

    pub fn times(&self, o: &CoeffPoly) -> CoeffPoly {
        let mut r = CoeffPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m: SymMonomial = m1.iter().chain(m2.iter()).copied().collect();
                m.sort_unstable();
                r.add_term(m, c1 * c2);
            }
        }
        r
    }

    /// Symbols appearing anywhere in the polynomial.
    pub fn symbols(&self) -> impl Iterator<Item = &ScalarSymbol> {
        self.terms.keys().flat_map(|m| m.iter())
    }

    /// Replaces each symbol by a polynomial.
    pub fn substitute<F: FnMut(&ScalarSymbol) -> CoeffPoly>(&self, f: &mut F) -> CoeffPoly {
        let mut cache: HashMap<ScalarSymbol, CoeffPoly> = HashMap::new();
        let mut r = CoeffPoly::zero();
        for (m, c) in &self.terms {
            let mut acc = CoeffPoly::constant(c.clone());
            for s in m {
                let v = cache.entry(*s).or_insert_with(|| f(s)).clone();
                acc = acc.times(&v);
            }
            r.add_assign(&acc);
        }
        r
    }
}

impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_empty() {
                write!(f, "({c})")?;
            } else {
                if !c.is_one() {
                    write!(f, "({c})*")?;
                }
                let names: Vec<String> = m.iter().map(|s| s.to_string()).collect();
                write!(f, "{}", names.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Coframe generators. Greek indices are zero-based; `Gamma(a, b)` has `a ≤ b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    Eta(u8),
    Theta(u8),
    ThetaBar(u8),
    Phi0,
    Phi(u8),
    Gamma(u8, u8),
    PhiUp(u8),
    PhiUpBar(u8),
    Psi(u8),
}

impl Generator {
    /// Whether the generator is a real form.
    pub fn is_real(self) -> bool {
        matches!(self, Generator::Eta(_) | Generator::Phi0 | Generator::Phi(_) | Generator::Psi(_))
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Generator::Eta(s) => write!(f, "eta{}", s + 1),
            Generator::Theta(a) => write!(f, "theta{}", a + 1),
            Generator::ThetaBar(a) => write!(f, "thetab{}", a + 1),
            Generator::Phi0 => write!(f, "phi0"),
            Generator::Phi(s) => write!(f, "phi{}", s + 1),
            Generator::Gamma(a, b) => write!(f, "Gamma{}{}", a + 1, b + 1),
            Generator::PhiUp(a) => write!(f, "phiu{}", a + 1),
            Generator::PhiUpBar(a) => write!(f, "phiub{}", a + 1),
            Generator::Psi(s) => write!(f, "psi{}", s + 1),
        }
    }
}

/// Sum of `CoeffPoly × wedge monomial`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct FormExpr {
    terms: BTreeMap<u64, CoeffPoly>,
}

/// Sign of `A ∧ B` relative to the sorted monomial `A ∪ B` (masks disjoint).
#[inline]
pub fn wedge_sign(a: u64, b: u64) -> bool {
    let mut neg = false;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        bb &= bb - 1;
        let above = if j >= 63 { 0 } else { a >> (j + 1) };
        neg ^= above.count_ones() & 1 == 1;
    }
    neg
}

impl FormExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The 0-form `c`.
    pub fn scalar(c: CoeffPoly) -> Self {
        let mut f = Self::zero();
        f.add_term(0, c);
        f
    }

    pub fn constant(c: GaussRational) -> Self {
        Self::scalar(CoeffPoly::constant(c))
    }

    /// A single monomial with coefficient 1.
    pub fn monomial(mask: u64) -> Self {
        let mut f = Self::zero();
        f.add_term(mask, CoeffPoly::int(1));
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u64, &CoeffPoly)> {
        self.terms.iter()
    }

    /// Total count of (monomial, symbol-monomial) pairs.
    pub fn term_count(&self) -> usize {
        self.terms.values().map(|c| c.len()).sum()
    }

    pub fn coeff(&self, mask: u64) -> CoeffPoly {
        self.terms.get(&mask).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, mask: u64, c: CoeffPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mask) {
            Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn add_term_scaled(&mut self, mask: u64, c: &CoeffPoly, s: &GaussRational) {
        if s.is_zero() || c.is_zero() {
            return;
        }
        match self.terms.entry(mask) {
            Entry::Occupied(mut o) => {
                o.get_mut().add_scaled(c, s);
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c.scale(s));
            }
        }
    }

    pub fn add_assign(&mut self, o: &FormExpr) {
        for (m, c) in &o.terms {
            self.add_term(*m, c.clone());
        }
    }

    pub fn add_scaled(&mut self, o: &FormExpr, s: &GaussRational) {
        for (m, c) in &o.terms {
            self.add_term_scaled(*m, c, s);
        }
    }

    pub fn scale(&self, s: &GaussRational) -> FormExpr {
        let mut r = FormExpr::zero();
        r.add_scaled(self, s);
        r
    }

    pub fn mul_poly(&self, p: &CoeffPoly) -> FormExpr {
        let mut r = FormExpr::zero();
        for (m, c) in &self.terms {
            r.add_term(*m, c.times(p));
        }
        r
    }

    /// Homogeneous part of the given degree.
    pub fn degree_part(&self, deg: u32) -> FormExpr {
        FormExpr { terms: self.terms.iter().filter(|(m, _)| m.count_ones() == deg).map(|(m, c)| (*m, c.clone())).collect() }
    }

    /// Degree if homogeneous (zero counts as homogeneous of any degree, reported as `None`).
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| m.count_ones());
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    pub fn wedge(&self, o: &FormExpr) -> FormExpr {
        let mut r = FormExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                if m1 & m2 != 0 {
                    continue;
                }
                let mut c = c1.times(c2);
                if wedge_sign(*m1, *m2) {
                    c = c.scale(&GaussRational::from_int(-1));
                }
                r.add_term(m1 | m2, c);
            }
        }
        r
    }

    /// Replaces each scalar symbol by a polynomial.
    pub fn substitute<F: FnMut(&ScalarSymbol) -> CoeffPoly>(&self, f: &mut F) -> FormExpr {
        let mut r = FormExpr::zero();
        for (m, c) in &self.terms {
            r.add_term(*m, c.substitute(f));
        }
        r
    }

    /// All scalar symbols occurring in the coefficients.
    pub fn symbols(&self) -> Vec<ScalarSymbol> {
        let mut v: Vec<ScalarSymbol> = self.terms.values().flat_map(|c| c.symbols().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

impl fmt::Debug for FormExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{c}] #{m:b}")?;
        }
        Ok(())
    }
}

impl Add for &FormExpr {
    type Output = FormExpr;
    fn add(self, o: &FormExpr) -> FormExpr {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }
}

impl Add for FormExpr {
    type Output = FormExpr;
    fn add(mut self, o: FormExpr) -> FormExpr {
        self.add_assign(&o);
        self
    }
}

impl Add<&FormExpr> for FormExpr {
    type Output = FormExpr;
    fn add(mut self, o: &FormExpr) -> FormExpr {
        self.add_assign(o);
        self
    }
}

impl Sub<&FormExpr> for FormExpr {
    type Output = FormExpr;
    fn sub(mut self, o: &FormExpr) -> FormExpr {
        self.add_scaled(o, &GaussRational::from_int(-1));
        self
    }
}

impl Sub for &FormExpr {
    type Output = FormExpr;
    fn sub(self, o: &FormExpr) -> FormExpr {
        let mut r = self.clone();
        r.add_scaled(o, &GaussRational::from_int(-1));
        r
    }
}

impl Sub for FormExpr {
    type Output = FormExpr;
    fn sub(self, o: FormExpr) -> FormExpr {
        &self - &o
    }
}

impl Neg for &FormExpr {
    type Output = FormExpr;
    fn neg(self) -> FormExpr {
        self.scale(&GaussRational::from_int(-1))
    }
}

impl Neg for FormExpr {
    type Output = FormExpr;
    fn neg(self) -> FormExpr {
        -&self
    }
}

/// Wedge product.
impl BitXor for &FormExpr {
    type Output = FormExpr;
    fn bitxor(self, o: &FormExpr) -> FormExpr {
        self.wedge(o)
    }
}

impl BitXor for FormExpr {
    type Output = FormExpr;
    fn bitxor(self, o: FormExpr) -> FormExpr {
        self.wedge(&o)
    }
}

impl Mul<&FormExpr> for &GaussRational {
    type Output = FormExpr;
    fn mul(self, o: &FormExpr) -> FormExpr {
        o.scale(self)
    }
}

impl Mul<FormExpr> for GaussRational {
    type Output = FormExpr;
    fn mul(self, o: FormExpr) -> FormExpr {
        o.scale(&self)
    }
}

impl Mul<&FormExpr> for &CoeffPoly {
    type Output = FormExpr;
    fn mul(self, o: &FormExpr) -> FormExpr {
        o.mul_poly(self)
    }
}

impl Mul<FormExpr> for CoeffPoly {
    type Output = FormExpr;
    fn mul(self, o: FormExpr) -> FormExpr {
        o.mul_poly(&self)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExteriorError {
    #[error("no d-rule for generator {0}")]
    MissingGenerator(String),
    #[error("no d-rule for symbol {0}")]
    MissingSymbol(String),
}

/// Exterior derivatives of generators and symbols.
#[derive(Clone, Default)]
pub struct DRules {
    pub generators: Vec<Option<FormExpr>>,
    pub symbols: HashMap<ScalarSymbol, FormExpr>,
}

impl DRules {
    pub fn new(gen_count: usize) -> Self {
        DRules { generators: vec![None; gen_count], symbols: HashMap::new() }
    }

    fn d_coeff(&self, c: &CoeffPoly, cf: &Coframe) -> Result<FormExpr, ExteriorError> {
        let mut r = FormExpr::zero();
        for (m, k) in c.terms() {
            for (i, s) in m.iter().enumerate() {
                let ds = self.symbols.get(s).ok_or_else(|| ExteriorError::MissingSymbol(s.to_string()))?;
                let mut rest: SymMonomial = m.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x).collect();
                rest.sort_unstable();
                let mut other = CoeffPoly::zero();
                other.add_term(rest, k.clone());
                r.add_assign(&ds.mul_poly(&other));
            }
        }
        let _ = cf;
        Ok(r)
    }

    /// `d` extended by linearity and the graded Leibniz rule.
    pub fn d(&self, x: &FormExpr, cf: &Coframe) -> Result<FormExpr, ExteriorError> {
        let mut r = FormExpr::zero();
        for (&mask, c) in x.terms() {
            if c.terms().any(|(m, _)| !m.is_empty()) {
                let dc = self.d_coeff(c, cf)?;
                r.add_assign(&dc.wedge(&FormExpr::monomial(mask)));
            }
            let mut bits = mask;
            while bits != 0 {
                let g = bits.trailing_zeros();
                bits &= bits - 1;
                let bit = 1u64 << g;
                let prefix = mask & (bit - 1);
                let suffix = mask & !(bit | (bit - 1));
                let dg = self.generators[g as usize]
                    .as_ref()
                    .ok_or_else(|| ExteriorError::MissingGenerator(cf.generator(g as usize).to_string()))?;
                let base_neg = prefix.count_ones() & 1 == 1;
                for (&t, tc) in dg.terms() {
                    if t & (prefix | suffix) != 0 {
                        continue;
                    }
                    let neg = base_neg ^ wedge_sign(prefix, t) ^ wedge_sign(prefix | t, suffix);
                    let coeff = c.times(tc);
                    let s = if neg { GaussRational::from_int(-1) } else { GaussRational::one() };
                    r.add_term_scaled(prefix | t | suffix, &coeff, &s);
                }
            }
        }
        Ok(r)
    }
}

/// The coframe of `P₁` for a fixed `n`, with generator order
/// `η < θ < θ̄ < φ₀ < φ_s < Γ < φ^α < φ^ᾱ < ψ`.
#[derive(Clone)]
pub struct Coframe {
    pub consts: StandardConstants,
    gens: Vec<Generator>,
    pos: HashMap<Generator, usize>,
}

impl Coframe {
    pub fn new(consts: StandardConstants) -> Self {
        let d = 2 * consts.n as u8;
        let mut gens = Vec::new();
        gens.extend((0..3).map(Generator::Eta));
        gens.extend((0..d).map(Generator::Theta));
        gens.extend((0..d).map(Generator::ThetaBar));
        gens.push(Generator::Phi0);
        gens.extend((0..3).map(Generator::Phi));
        for a in 0..d {
            for b in a..d {
                gens.push(Generator::Gamma(a, b));
            }
        }
        gens.extend((0..d).map(Generator::PhiUp));
        gens.extend((0..d).map(Generator::PhiUpBar));
        gens.extend((0..3).map(Generator::Psi));
        assert!(gens.len() <= 64, "coframe too large for 64-bit monomials");
        let pos = gens.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        Coframe { consts, gens, pos }
    }

    pub fn n(&self) -> usize {
        self.consts.n
    }

    /// `2n`.
    pub fn dim(&self) -> usize {
        2 * self.consts.n
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn generator(&self, i: usize) -> Generator {
        self.gens[i]
    }

    pub fn position(&self, g: Generator) -> usize {
        let g = match g {
            Generator::Gamma(a, b) if a > b => Generator::Gamma(b, a),
            g => g,
        };
        self.pos[&g]
    }

    pub fn g(&self, gen: Generator) -> FormExpr {
        FormExpr::monomial(1u64 << self.position(gen))
    }

    /// Canonical text of a wedge monomial.
    pub fn monomial_text(&self, mask: u64) -> String {
        if mask == 0 {
            return "1".into();
        }
        let mut parts = Vec::new();
        let mut b = mask;
        while b != 0 {
            let i = b.trailing_zeros() as usize;
            b &= b - 1;
            parts.push(self.gens[i].to_string());
        }
        parts.join("^")
    }

    /// Deterministic canonical text of a form.
    pub fn format(&self, x: &FormExpr) -> String {
        if x.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = x.terms().map(|(m, c)| format!("[{}] {}", c, self.monomial_text(*m))).collect();
        parts.join(" + ")
    }

    // ---- generator shorthands (zero-based indices) ----

    pub fn eta(&self, s: usize) -> FormExpr {
        self.g(Generator::Eta(s as u8))
    }

    pub fn theta(&self, a: usize) -> FormExpr {
        self.g(Generator::Theta(a as u8))
    }

    pub fn thetab(&self, a: usize) -> FormExpr {
        self.g(Generator::ThetaBar(a as u8))
    }

    pub fn phi0(&self) -> FormExpr {
        self.g(Generator::Phi0)
    }

    pub fn phi(&self, s: usize) -> FormExpr {
        self.g(Generator::Phi(s as u8))
    }

    /// `Γ_{αβ}` (symmetric in its indices).
    pub fn gamma(&self, a: usize, b: usize) -> FormExpr {
        self.g(Generator::Gamma(a.min(b) as u8, a.max(b) as u8))
    }

    /// `Γ_{ᾱβ̄} = π^σ_ᾱ π^τ_β̄ Γ_{στ}`.
    pub fn gammab(&self, a: usize, b: usize) -> FormExpr {
        let c = &self.consts;
        let mut r = FormExpr::zero();
        for s in 0..self.dim() {
            for t in 0..self.dim() {
                let k = c.pi_ub(s, a) * c.pi_ub(t, b);
                if !k.is_zero() {
                    r.add_scaled(&self.gamma(s, t), &k);
                }
            }
        }
        r
    }

    /// `φ^α`.
    pub fn phiu(&self, a: usize) -> FormExpr {
        self.g(Generator::PhiUp(a as u8))
    }

    /// `φ^ᾱ`.
    pub fn phiub(&self, a: usize) -> FormExpr {
        self.g(Generator::PhiUpBar(a as u8))
    }

    pub fn psi(&self, s: usize) -> FormExpr {
        self.g(Generator::Psi(s as u8))
    }

    /// `θ_α = g_{ασ̄}θ^σ̄`.
    pub fn theta_l(&self, a: usize) -> FormExpr {
        self.lower(a, |s| self.thetab(s))
    }

    /// `θ_ᾱ = g_{ᾱσ}θ^σ`.
    pub fn thetab_l(&self, a: usize) -> FormExpr {
        self.lower_bar(a, |s| self.theta(s))
    }

    /// `φ_α = g_{ασ̄}φ^σ̄`.
    pub fn phi_l(&self, a: usize) -> FormExpr {
        self.lower(a, |s| self.phiub(s))
    }

    /// `φ_ᾱ = g_{ᾱσ}φ^σ`.
    pub fn phib_l(&self, a: usize) -> FormExpr {
        self.lower_bar(a, |s| self.phiu(s))
    }

    fn lower<F: Fn(usize) -> FormExpr>(&self, a: usize, f: F) -> FormExpr {
        let mut r = FormExpr::zero();
        for s in 0..self.dim() {
            r.add_scaled(&f(s), self.consts.g(a, s));
        }
        r
    }

    fn lower_bar<F: Fn(usize) -> FormExpr>(&self, a: usize, f: F) -> FormExpr {
        let mut r = FormExpr::zero();
        for s in 0..self.dim() {
            r.add_scaled(&f(s), &self.consts.g(s, a).conj());
        }
        r
    }

    // ---- scalar symbols ----

    /// Symbol polynomial for `family_{idx}` (or its conjugate), applying the
    /// reality rules: `S̄` and `L̄` are rewritten through `jS = S`, `jL = L`,
    /// and `R̄ = R`.
    pub fn sym(&self, family: Family, idx: &[usize], conj: bool) -> CoeffPoly {
        let idx8: Vec<u8> = idx.iter().map(|&i| i as u8).collect();
        if !conj {
            return CoeffPoly::symbol(ScalarSymbol::raw(family, &idx8, false));
        }
        match family {
            Family::R => CoeffPoly::symbol(ScalarSymbol::raw(family, &idx8, false)),
            Family::S | Family::L => {
                // T_{ᾱβ̄…} = Π π^{σ}_{ᾱ} T_{σ…}
                let mut r = CoeffPoly::zero();
                let c = &self.consts;
                let d = self.dim();
                let mut sig = vec![0usize; idx.len()];
                'outer: loop {
                    let mut k = GaussRational::one();
                    for (s, a) in sig.iter().zip(idx) {
                        k = &k * c.pi_ub(*s, *a);
                        if k.is_zero() {
                            break;
                        }
                    }
                    if !k.is_zero() {
                        let s8: Vec<u8> = sig.iter().map(|&x| x as u8).collect();
                        r.add_scaled(&CoeffPoly::symbol(ScalarSymbol::raw(family, &s8, false)), &k);
                    }
                    for p in (0..sig.len()).rev() {
                        sig[p] += 1;
                        if sig[p] < d {
                            continue 'outer;
                        }
                        sig[p] = 0;
                    }
                    break;
                }
                r
            }
            _ => CoeffPoly::symbol(ScalarSymbol::raw(family, &idx8, true)),
        }
    }

    /// Complex conjugate of a polynomial with reality rules applied.
    pub fn conj_poly(&self, p: &CoeffPoly) -> CoeffPoly {
        let mut r = CoeffPoly::zero();
        for (m, c) in p.terms() {
            let mut acc = CoeffPoly::constant(c.conj());
            for s in m {
                let idx: Vec<usize> = s.indices().iter().map(|&i| i as usize).collect();
                let cs = if s.conj {
                    self.sym(s.family, &idx, false)
                } else {
                    self.sym(s.family, &idx, true)
                };
                acc = acc.times(&cs);
            }
            r.add_assign(&acc);
        }
        r
    }

    /// Complex conjugate of a generator.
    pub fn conj_generator(&self, g: Generator) -> FormExpr {
        match g {
            Generator::Theta(a) => self.thetab(a as usize),
            Generator::ThetaBar(a) => self.theta(a as usize),
            Generator::PhiUp(a) => self.phiub(a as usize),
            Generator::PhiUpBar(a) => self.phiu(a as usize),
            Generator::Gamma(a, b) => self.gammab(a as usize, b as usize),
            g => self.g(g),
        }
    }

    /// Complex conjugation of forms: generator bars flip, coefficients conjugate.
    pub fn conj_form(&self, x: &FormExpr) -> FormExpr {
        let mut r = FormExpr::zero();
        for (&m, c) in x.terms() {
            let mut acc = FormExpr::scalar(self.conj_poly(c));
            let mut b = m;
            while b != 0 {
                let i = b.trailing_zeros() as usize;
                b &= b - 1;
                acc = acc.wedge(&self.conj_generator(self.gens[i]));
            }
            r.add_assign(&acc);
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::make_constants;

    fn cf() -> Coframe {
        Coframe::new(make_constants(1, (1, 0)).unwrap())
    }

    #[test]
    fn generator_counts() {
        for (n, want) in [(1, 21), (2, 36), (3, 55)] {
            assert_eq!(Coframe::new(make_constants(n, (n, 0)).unwrap()).len(), want);
        }
    }

    #[test]
    fn wedge_basics() {
        let c = cf();
        assert!(c.theta(0).wedge(&c.theta(0)).is_zero());
        assert!((&c.eta(0).wedge(&c.theta(0)) + &c.theta(0).wedge(&c.eta(0))).is_zero());
        let a = &c.eta(0) + &c.eta(1);
        let b = &c.eta(0) - &c.eta(1);
        let want = c.eta(0).wedge(&c.eta(1)).scale(&GaussRational::from_int(-2));
        assert_eq!(a.wedge(&b), want);
    }

    #[test]
    fn wedge_sign_small() {
        assert!(!wedge_sign(0b01, 0b10));
        assert!(wedge_sign(0b10, 0b01));
        assert!(!wedge_sign(0b001, 0b110));
        assert!(!wedge_sign(0b110, 0b001));
        assert!(!wedge_sign(0b100, 0b011));
    }

    #[test]
    fn conj_involution_on_gamma() {
        let c = Coframe::new(make_constants(2, (1, 1)).unwrap());
        for a in 0..4 {
            for b in 0..4 {
                let g = c.gamma(a, b);
                assert_eq!(c.conj_form(&c.conj_form(&g)), g);
            }
        }
    }

    #[test]
    fn symbol_reality_rules() {
        let c = Coframe::new(make_constants(2, (2, 0)).unwrap());
        let s = c.sym(Family::S, &[0, 1, 2, 3], false);
        assert_eq!(c.conj_poly(&c.conj_poly(&s)), s);
        let r = c.sym(Family::R, &[], false);
        assert_eq!(c.conj_poly(&r), r);
        let v = c.sym(Family::V, &[2, 0, 1], false);
        assert_eq!(c.conj_poly(&c.conj_poly(&v)), v);
        assert_ne!(c.conj_poly(&v), v);
    }
}
