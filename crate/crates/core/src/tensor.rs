//! Indexed tensors over the fixed complex basis `{e_α, e_ᾱ}` of `ℝ^{4n}`, the
//! constants `g` and `π`, index gymnastics and the antilinear map `j`.
//!
//! Index values are stored zero-based (`0..2n`); text and file formats use
//! one-based values. A component whose slot bars are all flipped is the
//! complex conjugate of the original, so a tensor stores only the components
//! for the bar pattern recorded in its slots.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::number::GaussRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variance {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSlot {
    pub variance: Variance,
    pub barred: bool,
}

impl IndexSlot {
    pub const LOWER: IndexSlot = IndexSlot { variance: Variance::Lower, barred: false };
    pub const LOWER_BAR: IndexSlot = IndexSlot { variance: Variance::Lower, barred: true };
    pub const UPPER: IndexSlot = IndexSlot { variance: Variance::Upper, barred: false };
    pub const UPPER_BAR: IndexSlot = IndexSlot { variance: Variance::Upper, barred: true };

    pub fn flipped(self) -> IndexSlot {
        IndexSlot { variance: self.variance, barred: !self.barred }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TensorError {
    #[error("n must be at least 1")]
    ZeroDimension,
    #[error("signature ({p},{q}) does not add up to n = {n}")]
    BadSignature { n: usize, p: usize, q: usize },
    #[error("slot {slot} out of range for a tensor with {len} slots")]
    SlotOutOfRange { slot: usize, len: usize },
    #[error("slot {slot} has the wrong variance for this contraction")]
    IncompatibleSlot { slot: usize },
    #[error("index value {value} outside 1..={max}")]
    IndexOutOfRange { value: usize, max: usize },
    #[error("multi-index has {got} entries, tensor has {want} slots")]
    ArityMismatch { got: usize, want: usize },
    #[error("tensors live over different n or slot patterns")]
    ShapeMismatch,
    #[error("expected slot pattern {expected}, found {found}")]
    WrongSlots { expected: String, found: String },
}

/// A sparse array of Gaussian rationals indexed by `slots.len()` indices in `0..2n`.
#[derive(Clone, PartialEq, Eq)]
pub struct IndexedTensor {
    n: usize,
    slots: Vec<IndexSlot>,
    entries: BTreeMap<Vec<u8>, GaussRational>,
}

impl IndexedTensor {
    pub fn zero(n: usize, slots: Vec<IndexSlot>) -> Self {
        Self { n, slots, entries: BTreeMap::new() }
    }

    /// Builds a tensor from `(zero-based multi-index, value)` pairs; repeated indices add up.
    pub fn from_entries<I>(n: usize, slots: Vec<IndexSlot>, items: I) -> Result<Self, TensorError>
    where
        I: IntoIterator<Item = (Vec<u8>, GaussRational)>,
    {
        let mut t = Self::zero(n, slots);
        for (k, v) in items {
            t.check_index(&k)?;
            t.add_at(k, &v);
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Index range `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn slots(&self) -> &[IndexSlot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<u8>, &GaussRational)> {
        self.entries.iter()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_index(&self, idx: &[u8]) -> Result<(), TensorError> {
        if idx.len() != self.slots.len() {
            return Err(TensorError::ArityMismatch { got: idx.len(), want: self.slots.len() });
        }
        for &v in idx {
            if v as usize >= self.dim() {
                return Err(TensorError::IndexOutOfRange { value: v as usize + 1, max: self.dim() });
            }
        }
        Ok(())
    }

    pub fn get(&self, idx: &[u8]) -> GaussRational {
        self.entries.get(idx).cloned().unwrap_or_default()
    }

    /// Sets a component; panics on an out-of-range index.
    pub fn set(&mut self, idx: &[u8], v: GaussRational) {
        self.check_index(idx).expect("index in range");
        if v.is_zero() {
            self.entries.remove(idx);
        } else {
            self.entries.insert(idx.to_vec(), v);
        }
    }

    fn add_at(&mut self, idx: Vec<u8>, v: &GaussRational) {
        if v.is_zero() {
            return;
        }
        match self.entries.entry(idx) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += v;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(v.clone());
            }
        }
    }

    /// Iterates every multi-index of the full index box (zero-based).
    pub fn all_indices(n: usize, rank: usize) -> impl Iterator<Item = Vec<u8>> {
        let d = 2 * n;
        let total = d.pow(rank as u32);
        (0..total).map(move |mut k| {
            let mut v = vec![0u8; rank];
            for s in (0..rank).rev() {
                v[s] = (k % d) as u8;
                k /= d;
            }
            v
        })
    }

    fn same_shape(&self, o: &Self) -> Result<(), TensorError> {
        if self.n != o.n || self.slots != o.slots {
            return Err(TensorError::ShapeMismatch);
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, TensorError> {
        self.same_shape(o)?;
        let mut r = self.clone();
        for (k, v) in &o.entries {
            r.add_at(k.clone(), v);
        }
        Ok(r)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, TensorError> {
        self.add(&o.scale(&GaussRational::from_int(-1)))
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        let mut r = Self::zero(self.n, self.slots.clone());
        if c.is_zero() {
            return r;
        }
        for (k, v) in &self.entries {
            r.entries.insert(k.clone(), v * c);
        }
        r
    }

    /// Swaps two slots, moving the component values with them.
    pub fn transpose(&self, a: usize, b: usize) -> Result<Self, TensorError> {
        for s in [a, b] {
            if s >= self.rank() {
                return Err(TensorError::SlotOutOfRange { slot: s, len: self.rank() });
            }
        }
        let mut slots = self.slots.clone();
        slots.swap(a, b);
        let mut r = Self::zero(self.n, slots);
        for (k, v) in &self.entries {
            let mut k = k.clone();
            k.swap(a, b);
            r.entries.insert(k, v.clone());
        }
        Ok(r)
    }

    /// Complex conjugation: every slot flips its bar, every entry is conjugated.
    pub fn conj(&self) -> Self {
        Self {
            n: self.n,
            slots: self.slots.iter().map(|s| s.flipped()).collect(),
            entries: self.entries.iter().map(|(k, v)| (k.clone(), v.conj())).collect(),
        }
    }

    /// Replaces slot `slot` by `new_slot` with components
    /// `r[.. a ..] = Σ_s m(a, s) · t[.. s ..]`.
    pub fn contract_slot<F>(&self, slot: usize, new_slot: IndexSlot, m: F) -> Self
    where
        F: Fn(usize, usize) -> GaussRational,
    {
        let d = self.dim();
        let mut slots = self.slots.clone();
        slots[slot] = new_slot;
        let mut r = Self::zero(self.n, slots);
        for (k, v) in &self.entries {
            let s = k[slot] as usize;
            for a in 0..d {
                let c = m(a, s);
                if c.is_zero() {
                    continue;
                }
                let mut kk = k.clone();
                kk[slot] = a as u8;
                r.add_at(kk, &(&c * v));
            }
        }
        r
    }

    /// Averages over all slot permutations.
    pub fn total_symmetrize(&self) -> Self {
        let rank = self.rank();
        let mut r = Self::zero(self.n, self.slots.clone());
        let perms = permutations(rank);
        let w = crate::number::rat(1, perms.len() as i64);
        for (k, v) in &self.entries {
            let v = v.scale(&w);
            for p in &perms {
                let kk: Vec<u8> = p.iter().map(|&i| k[i]).collect();
                r.add_at(kk, &v);
            }
        }
        r
    }

    /// True iff all components are invariant under any permutation of slots.
    pub fn is_totally_symmetric(&self) -> bool {
        let perms = permutations(self.rank());
        self.entries.iter().all(|(k, v)| {
            perms.iter().all(|p| {
                let kk: Vec<u8> = p.iter().map(|&i| k[i]).collect();
                &self.get(&kk) == v
            })
        })
    }
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

fn slot_text(s: &IndexSlot) -> &'static str {
    match (s.variance, s.barred) {
        (Variance::Lower, false) => "_a",
        (Variance::Lower, true) => "_ā",
        (Variance::Upper, false) => "^a",
        (Variance::Upper, true) => "^ā",
    }
}

fn slots_text(slots: &[IndexSlot]) -> String {
    slots.iter().map(slot_text).collect()
}

impl fmt::Debug for IndexedTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}[n={}]{{", slots_text(&self.slots), self.n)?;
        for (i, (k, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let k: Vec<String> = k.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "{}: {}", k.join(""), v)?;
        }
        write!(f, "}}")
    }
}

/// The constants `g_{αβ̄}` and `π_{αβ}` for a given signature, with their
/// raised, mixed and conjugate variants.
///
/// For signature `(p, q)` the quaternionic lines `e_a, e_{a+n}` with
/// `a = p+1..n` carry `g = −1`, and their `π_{a,a+n}` is also `−1`. Putting the
/// minus signs on whole lines (rather than on the last `q` diagonal slots)
/// is what keeps `g^{στ̄}π_{ασ}π_{τ̄β̄} = −g_{αβ̄}` true.
#[derive(Clone, Debug)]
pub struct StandardConstants {
    pub n: usize,
    pub signature: (usize, usize),
    /// `g_{αβ̄}`, slots `[_a, _ā]`.
    pub g_lower: IndexedTensor,
    /// `g^{αβ̄}`, slots `[^a, ^ā]`.
    pub g_upper: IndexedTensor,
    /// `π_{αβ}`, slots `[_a, _a]`.
    pub pi_lower: IndexedTensor,
    /// `π_{ᾱβ̄}`.
    pub pi_lower_bar: IndexedTensor,
    /// `π^{αβ}`.
    pub pi_upper: IndexedTensor,
    /// `π^α_{σ̄} = π_{σ̄}^{·α}`, slots `[_ā, ^a]`, key `(σ, α)`.
    pub pi_mixed: IndexedTensor,
    /// `π^{ᾱ}_σ = π_σ^{·ᾱ}`, slots `[_a, ^ā]`, key `(σ, α)`.
    pub pi_mixed_bar: IndexedTensor,
    dense: Dense,
}

#[derive(Clone, Debug)]
struct Dense {
    g: Vec<Vec<GaussRational>>,
    ginv: Vec<Vec<GaussRational>>,
    pi: Vec<Vec<GaussRational>>,
    pi_up: Vec<Vec<GaussRational>>,
    pi_ub: Vec<Vec<GaussRational>>,
    pi_bu: Vec<Vec<GaussRational>>,
}

fn dense_of(t: &IndexedTensor, swap: bool) -> Vec<Vec<GaussRational>> {
    let d = t.dim();
    let mut m = vec![vec![GaussRational::zero(); d]; d];
    for (k, v) in t.entries() {
        let (a, b) = if swap { (k[1], k[0]) } else { (k[0], k[1]) };
        m[a as usize][b as usize] = v.clone();
    }
    m
}

/// Builds `g` and `π` for dimension `n` and signature `(p, q)`.
pub fn make_constants(n: usize, signature: (usize, usize)) -> Result<StandardConstants, TensorError> {
    let (p, q) = signature;
    if n == 0 {
        return Err(TensorError::ZeroDimension);
    }
    if p + q != n {
        return Err(TensorError::BadSignature { n, p, q });
    }
    let sign = |a: usize| if a % n < p { 1 } else { -1 };
    let d = 2 * n;
    let g_lower = IndexedTensor::from_entries(
        n,
        vec![IndexSlot::LOWER, IndexSlot::LOWER_BAR],
        (0..d).map(|a| (vec![a as u8, a as u8], GaussRational::from_int(sign(a)))),
    )?;
    let g_upper = IndexedTensor::from_entries(
        n,
        vec![IndexSlot::UPPER, IndexSlot::UPPER_BAR],
        (0..d).map(|a| (vec![a as u8, a as u8], GaussRational::from_int(sign(a)))),
    )?;
    let pi_lower = IndexedTensor::from_entries(
        n,
        vec![IndexSlot::LOWER, IndexSlot::LOWER],
        (0..n).flat_map(|a| {
            let s = sign(a);
            [
                (vec![a as u8, (a + n) as u8], GaussRational::from_int(s)),
                (vec![(a + n) as u8, a as u8], GaussRational::from_int(-s)),
            ]
        }),
    )?;
    let mut c = StandardConstants {
        n,
        signature,
        pi_lower_bar: pi_lower.conj(),
        g_lower,
        g_upper,
        pi_upper: IndexedTensor::zero(n, vec![]),
        pi_mixed: IndexedTensor::zero(n, vec![]),
        pi_mixed_bar: IndexedTensor::zero(n, vec![]),
        pi_lower,
        dense: Dense { g: vec![], ginv: vec![], pi: vec![], pi_up: vec![], pi_ub: vec![], pi_bu: vec![] },
    };
    c.dense.g = dense_of(&c.g_lower, false);
    c.dense.ginv = dense_of(&c.g_upper, false);
    c.pi_mixed = raise_slot(&c.pi_lower_bar, 1, &c)?;
    c.pi_mixed_bar = raise_slot(&c.pi_lower, 1, &c)?;
    c.pi_upper = raise_slot(&raise_slot(&c.pi_lower_bar, 0, &c)?, 1, &c)?;
    c.dense.pi = dense_of(&c.pi_lower, false);
    c.dense.pi_up = dense_of(&c.pi_upper, false);
    c.dense.pi_ub = dense_of(&c.pi_mixed, true);
    c.dense.pi_bu = dense_of(&c.pi_mixed_bar, true);
    Ok(c)
}

impl StandardConstants {
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// `g_{αβ̄}` (equal to `g_{β̄α}`).
    pub fn g(&self, a: usize, b: usize) -> &GaussRational {
        &self.dense.g[a][b]
    }

    /// `g^{αβ̄}`.
    pub fn ginv(&self, a: usize, b: usize) -> &GaussRational {
        &self.dense.ginv[a][b]
    }

    /// `π_{αβ}`.
    pub fn pi(&self, a: usize, b: usize) -> &GaussRational {
        &self.dense.pi[a][b]
    }

    /// `π^{αβ}`.
    pub fn pi_up(&self, a: usize, b: usize) -> &GaussRational {
        &self.dense.pi_up[a][b]
    }

    /// `π^{α}_{σ̄}` with `α = upper`, `σ = lower`.
    pub fn pi_ub(&self, upper: usize, lower: usize) -> &GaussRational {
        &self.dense.pi_ub[upper][lower]
    }

    /// `π^{ᾱ}_{σ}` with `α = upper`, `σ = lower`.
    pub fn pi_bu(&self, upper: usize, lower: usize) -> &GaussRational {
        &self.dense.pi_bu[upper][lower]
    }

    /// Residual of `g^{στ̄}π_{ασ}π_{τ̄β̄} + g_{αβ̄}` (zero for valid constants).
    pub fn compatibility_residual(&self) -> IndexedTensor {
        let d = self.dim();
        let mut r = IndexedTensor::zero(self.n, vec![IndexSlot::LOWER, IndexSlot::LOWER_BAR]);
        for a in 0..d {
            for b in 0..d {
                let mut acc = self.g(a, b).clone();
                for s in 0..d {
                    for t in 0..d {
                        acc += &(self.ginv(s, t) * &(self.pi(a, s) * &self.pi(t, b).conj()));
                    }
                }
                r.set(&[a as u8, b as u8], acc);
            }
        }
        r
    }
}

/// Raises a lower slot with `g^{..}`; the slot's bar flips (`A_σ ↦ A^{ᾱ} = g^{ᾱσ}A_σ`).
pub fn raise_slot(t: &IndexedTensor, slot: usize, c: &StandardConstants) -> Result<IndexedTensor, TensorError> {
    move_slot(t, slot, c, Variance::Lower)
}

/// Lowers an upper slot with `g_{..}`; the slot's bar flips.
pub fn lower_slot(t: &IndexedTensor, slot: usize, c: &StandardConstants) -> Result<IndexedTensor, TensorError> {
    move_slot(t, slot, c, Variance::Upper)
}

fn move_slot(t: &IndexedTensor, slot: usize, c: &StandardConstants, from: Variance) -> Result<IndexedTensor, TensorError> {
    if slot >= t.rank() {
        return Err(TensorError::SlotOutOfRange { slot, len: t.rank() });
    }
    let s = t.slots()[slot];
    if s.variance != from || t.n() != c.n {
        return Err(TensorError::IncompatibleSlot { slot });
    }
    let to = if from == Variance::Lower { Variance::Upper } else { Variance::Lower };
    let new_slot = IndexSlot { variance: to, barred: !s.barred };
    // g is hermitian: g^{ᾱσ} = conj(g^{σᾱ}); with the slot pair (new, old)
    // the matrix entry is g(new, old) for a barred old slot and conj(g(old, new)) otherwise.
    let r = match (from, s.barred) {
        (Variance::Lower, true) => t.contract_slot(slot, new_slot, |a, o| c.ginv(a, o).clone()),
        (Variance::Lower, false) => t.contract_slot(slot, new_slot, |a, o| c.ginv(o, a).conj()),
        (Variance::Upper, true) => t.contract_slot(slot, new_slot, |a, o| c.g(a, o).clone()),
        (Variance::Upper, false) => t.contract_slot(slot, new_slot, |a, o| c.g(o, a).conj()),
    };
    Ok(r)
}

/// The antilinear map `j`: conjugate, then contract every slot with the matching `π`.
///
/// Lower slots use `π^{σ̄}_α` / `π^{τ}_{β̄}`, upper slots use `π^α_{σ̄}` / `π^{ᾱ}_σ`,
/// so `j∘j = (−1)^{rank}`.
pub fn jmap(t: &IndexedTensor, c: &StandardConstants) -> IndexedTensor {
    let mut r = t.conj();
    for slot in 0..r.rank() {
        let s = r.slots()[slot];
        let target = s.flipped();
        r = match (s.variance, s.barred) {
            // lower barred σ̄ → lower unbarred α via π^{σ̄}_α
            (Variance::Lower, true) => r.contract_slot(slot, target, |a, o| c.pi_bu(o, a).clone()),
            // lower unbarred τ → lower barred β̄ via π^τ_{β̄}
            (Variance::Lower, false) => r.contract_slot(slot, target, |a, o| c.pi_ub(o, a).clone()),
            // upper barred σ̄ → upper unbarred α via π^α_{σ̄}
            (Variance::Upper, true) => r.contract_slot(slot, target, |a, o| c.pi_ub(a, o).clone()),
            (Variance::Upper, false) => r.contract_slot(slot, target, |a, o| c.pi_bu(a, o).clone()),
        };
    }
    r
}

fn expect_slots(x: &IndexedTensor, want: &[IndexSlot]) -> Result<(), TensorError> {
    if x.slots() != want {
        return Err(TensorError::WrongSlots { expected: slots_text(want), found: slots_text(x.slots()) });
    }
    Ok(())
}

/// Membership in `sp(n)` for `X_{αβ̄}`: `X_{αβ̄} = −X_{β̄α}` and `jX = X`.
pub fn is_spn(x: &IndexedTensor, c: &StandardConstants) -> Result<bool, TensorError> {
    expect_slots(x, &[IndexSlot::LOWER, IndexSlot::LOWER_BAR])?;
    // X_{β̄α} read in the [_a, _ā] layout is conj(X) with its slots swapped.
    let swapped = x.conj().transpose(0, 1)?;
    let anti = x.add(&swapped)?.is_zero();
    Ok(anti && jmap(x, c) == *x)
}

/// `Y_{σβ} = −π_{σ}^{τ̄} X_{βτ̄}` for `X_{αβ̄}`; slots `[_a, _a]`.
pub fn spn_to_symmetric(x: &IndexedTensor, c: &StandardConstants) -> Result<IndexedTensor, TensorError> {
    expect_slots(x, &[IndexSlot::LOWER, IndexSlot::LOWER_BAR])?;
    let d = c.dim();
    let mut y = IndexedTensor::zero(c.n, vec![IndexSlot::LOWER, IndexSlot::LOWER]);
    for s in 0..d {
        for b in 0..d {
            let mut acc = GaussRational::zero();
            for t in 0..d {
                acc -= &(c.pi_bu(t, s) * &x.get(&[b as u8, t as u8]));
            }
            y.set(&[s as u8, b as u8], acc);
        }
    }
    Ok(y)
}

/// `X_{αβ̄}` from `X^α_β = π^{ασ}Y_{σβ}`, lowered with `g`.
pub fn symmetric_to_spn(y: &IndexedTensor, c: &StandardConstants) -> Result<IndexedTensor, TensorError> {
    expect_slots(y, &[IndexSlot::LOWER, IndexSlot::LOWER])?;
    let d = c.dim();
    // X_β^{·α} = π^{ασ} Y_{σβ}, slots [_a, ^a]
    let mut xm = IndexedTensor::zero(c.n, vec![IndexSlot::LOWER, IndexSlot::UPPER]);
    for b in 0..d {
        for a in 0..d {
            let mut acc = GaussRational::zero();
            for s in 0..d {
                acc += &(c.pi_up(a, s) * &y.get(&[s as u8, b as u8]));
            }
            xm.set(&[b as u8, a as u8], acc);
        }
    }
    lower_slot(&xm, 1, c)
}

/// Checks the equivalence of conditions (2) and (3) for `X_{αβ̄}`:
/// when `is_spn(X)`, the reconstructed `Y` must be symmetric, `j`-invariant and map back to `X`.
pub fn spn_equivalence_holds(x: &IndexedTensor, c: &StandardConstants) -> Result<bool, TensorError> {
    let member = is_spn(x, c)?;
    let y = spn_to_symmetric(x, c)?;
    let y_ok = y == y.transpose(0, 1)? && jmap(&y, c) == y;
    let back = symmetric_to_spn(&y, c)? == *x;
    Ok(member == (y_ok && back))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gr(a: i64) -> GaussRational {
        GaussRational::from_int(a)
    }

    #[test]
    fn constants_examples() {
        let c = make_constants(1, (1, 0)).unwrap();
        assert_eq!(c.g(0, 0), &gr(1));
        assert_eq!(c.g(1, 1), &gr(1));
        assert_eq!(c.pi(0, 1), &gr(1));
        assert_eq!(c.pi(1, 0), &gr(-1));
        assert_eq!(c.pi_lower.nnz(), 2);

        let c = make_constants(2, (2, 0)).unwrap();
        let nz: Vec<_> = c.pi_lower.entries().map(|(k, v)| (k.clone(), v.clone())).collect();
        assert_eq!(
            nz,
            vec![(vec![0, 2], gr(1)), (vec![1, 3], gr(1)), (vec![2, 0], gr(-1)), (vec![3, 1], gr(-1))]
        );
        assert!(make_constants(0, (0, 0)).is_err());
        assert!(make_constants(2, (1, 0)).is_err());
    }

    #[test]
    fn compatibility_all_signatures() {
        for n in 1..=3 {
            for p in 0..=n {
                let c = make_constants(n, (p, n - p)).unwrap();
                assert!(c.compatibility_residual().is_zero(), "n={n} p={p}");
                // π^α_σ̄ π^σ̄_β = −δ
                for a in 0..2 * n {
                    for b in 0..2 * n {
                        let mut acc = GaussRational::zero();
                        for s in 0..2 * n {
                            acc += &(c.pi_ub(a, s) * c.pi_bu(s, b));
                        }
                        assert_eq!(acc, gr(if a == b { -1 } else { 0 }));
                    }
                }
            }
        }
    }

    #[test]
    fn lower_delta_gives_g() {
        let c = make_constants(2, (1, 1)).unwrap();
        let delta = IndexedTensor::from_entries(
            2,
            vec![IndexSlot::LOWER, IndexSlot::UPPER],
            (0..4u8).map(|a| (vec![a, a], gr(1))),
        )
        .unwrap();
        assert_eq!(lower_slot(&delta, 1, &c).unwrap(), c.g_lower);
        assert!(matches!(raise_slot(&delta, 1, &c), Err(TensorError::IncompatibleSlot { .. })));
        assert!(matches!(raise_slot(&delta, 2, &c), Err(TensorError::SlotOutOfRange { .. })));
    }

    #[test]
    fn raised_pi_contracts_to_delta() {
        let c = make_constants(1, (1, 0)).unwrap();
        // π^{αβ}π_{βγ} = −δ^α_γ via brute force over conjugate slots
        for a in 0..2 {
            for g in 0..2 {
                let mut acc = GaussRational::zero();
                for b in 0..2 {
                    acc += &(c.pi_up(a, b) * &c.pi_lower_bar.get(&[b as u8, g as u8]));
                }
                assert_eq!(acc, gr(if a == g { -1 } else { 0 }));
            }
        }
    }

    #[test]
    fn hermitian_is_not_spn() {
        let c = make_constants(1, (1, 0)).unwrap();
        let z = IndexedTensor::zero(1, vec![IndexSlot::LOWER, IndexSlot::LOWER_BAR]);
        assert!(is_spn(&z, &c).unwrap());
        let h = IndexedTensor::from_entries(1, z.slots().to_vec(), [(vec![0, 0], gr(1)), (vec![1, 1], gr(1))]).unwrap();
        assert!(!is_spn(&h, &c).unwrap());
        let wrong = IndexedTensor::zero(1, vec![IndexSlot::LOWER, IndexSlot::LOWER]);
        assert!(is_spn(&wrong, &c).is_err());
    }
}
