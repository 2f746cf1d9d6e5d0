//! Small dense matrices over the Gaussian rationals.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::number::{GaussRational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<GaussRational>,
}

impl CMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![GaussRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, GaussRational::one());
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> GaussRational>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GaussRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: GaussRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &GaussRational) {
        self.data[i * self.cols + j] += v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, &GaussRational)> {
        self.data.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(k, v)| (k / self.cols, k % self.cols, v))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn conj(&self) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.conj()).collect() }
    }

    pub fn scale(&self, s: &GaussRational) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn trace(&self) -> GaussRational {
        let mut t = GaussRational::zero();
        for i in 0..self.rows.min(self.cols) {
            t += self.get(i, i);
        }
        t
    }

    /// `self·o − o·self`.
    pub fn commutator(&self, o: &CMatrix) -> CMatrix {
        &(self * o) - &(o * self)
    }

    /// Gauss–Jordan inverse; `None` when singular or not square.
    pub fn inverse(&self) -> Option<CMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        for col in 0..n {
            let piv = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if piv != col {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            let p = a.get(col, col).inv()?;
            a.scale_row(col, &p);
            inv.scale_row(col, &p);
            for r in 0..n {
                if r != col && !a.get(r, col).is_zero() {
                    let f = a.get(r, col).clone();
                    a.sub_row(r, col, &f);
                    inv.sub_row(r, col, &f);
                }
            }
        }
        Some(inv)
    }

    /// One solution of `self · x = rhs` (free variables set to zero), or `None`
    /// when the system is inconsistent.
    pub fn solve(&self, rhs: &[GaussRational]) -> Option<Vec<GaussRational>> {
        assert_eq!(rhs.len(), self.rows, "shape mismatch");
        let mut a = CMatrix::from_fn(self.rows, self.cols + 1, |i, j| if j < self.cols { self.get(i, j).clone() } else { rhs[i].clone() });
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            let Some(p) = (row..self.rows).find(|&r| !a.get(r, col).is_zero()) else { continue };
            a.swap_rows(p, row);
            let inv = a.get(row, col).inv()?;
            a.scale_row(row, &inv);
            for r in 0..self.rows {
                if r != row && !a.get(r, col).is_zero() {
                    let f = a.get(r, col).clone();
                    a.sub_row(r, row, &f);
                }
            }
            pivots.push(col);
            row += 1;
            if row == self.rows {
                break;
            }
        }
        if (row..self.rows).any(|r| !a.get(r, self.cols).is_zero()) {
            return None;
        }
        let mut x = vec![GaussRational::zero(); self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = a.get(r, self.cols).clone();
        }
        Some(x)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, r: usize, s: &GaussRational) {
        for j in 0..self.cols {
            let v = self.get(r, j) * s;
            self.set(r, j, v);
        }
    }

    /// row `r` −= f · row `src`
    fn sub_row(&mut self, r: usize, src: usize, f: &GaussRational) {
        for j in 0..self.cols {
            let s = self.get(src, j);
            if !s.is_zero() {
                let v = self.get(r, j) - &(s * f);
                self.set(r, j, v);
            }
        }
    }
}

/// Values as Gaussian integers over one common denominator, when all fit in `i64`.
pub(crate) fn scaled_ints<'a, I: IntoIterator<Item = &'a GaussRational> + Clone>(values: I) -> Option<(i64, Vec<(i64, i64)>)> {
    let mut d = BigInt::one();
    for x in values.clone() {
        d = d.lcm(x.re.denom()).lcm(x.im.denom());
    }
    let scale = |r: &Rational| (r.numer() * (&d / r.denom())).to_i64();
    let v = values.into_iter().map(|x| Some((scale(&x.re)?, scale(&x.im)?))).collect::<Option<Vec<_>>>()?;
    Some((d.to_i64()?, v))
}

/// `(a + ib)(c + id)` in checked `i128`.
pub(crate) fn gmul(a: (i128, i128), b: (i128, i128)) -> Option<(i128, i128)> {
    Some((a.0.checked_mul(b.0)?.checked_sub(a.1.checked_mul(b.1)?)?, a.0.checked_mul(b.1)?.checked_add(a.1.checked_mul(b.0)?)?))
}

pub(crate) fn gadd(a: (i128, i128), b: (i128, i128)) -> Option<(i128, i128)> {
    Some((a.0.checked_add(b.0)?, a.1.checked_add(b.1)?))
}

/// `(re + i·im)/den` as a Gaussian rational.
pub(crate) fn from_scaled(v: (i128, i128), den: &BigInt) -> GaussRational {
    GaussRational::new(Rational::new(v.0.into(), den.clone()), Rational::new(v.1.into(), den.clone()))
}

impl CMatrix {
    fn scaled_ints(&self) -> Option<(i64, Vec<(i64, i64)>)> {
        scaled_ints(&self.data)
    }

    /// Product in checked `i128` arithmetic; `None` on overflow.
    fn mul_small(&self, o: &CMatrix) -> Option<CMatrix> {
        let (da, a) = self.scaled_ints()?;
        let (db, b) = o.scaled_ints()?;
        let den = BigInt::from(da) * BigInt::from(db);
        let mut acc = vec![(0i128, 0i128); self.rows * o.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let (ar, ai) = a[i * self.cols + k];
                if ar == 0 && ai == 0 {
                    continue;
                }
                let (ar, ai) = (ar as i128, ai as i128);
                for j in 0..o.cols {
                    let (br, bi) = b[k * o.cols + j];
                    if br == 0 && bi == 0 {
                        continue;
                    }
                    let (br, bi) = (br as i128, bi as i128);
                    let e = &mut acc[i * o.cols + j];
                    *e = gadd(*e, gmul((ar, ai), (br, bi))?)?;
                }
            }
        }
        let data = acc.into_iter().map(|v| from_scaled(v, &den)).collect();
        Some(CMatrix { rows: self.rows, cols: o.cols, data })
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, o: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, o.rows, "shape mismatch");
        if let Some(r) = self.mul_small(o) {
            return r;
        }
        let mut r = CMatrix::zero(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        r.add_at(i, j, &(a * b));
                    }
                }
            }
        }
        r
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, o: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch");
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, o: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch");
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(a: i64, b: i64) -> GaussRational {
        GaussRational::from_parts(a, 1, b, 1)
    }

    #[test]
    fn inverse_round_trip() {
        let m = CMatrix::from_fn(3, 3, |i, j| if i == j { g(2, 1) } else { g(i as i64 - j as i64, 1) });
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, CMatrix::identity(3));
    }

    #[test]
    fn solve_rectangular() {
        // x + y = 2, 2x + 2y = 4, x − y = 0
        let m = CMatrix::from_fn(3, 2, |i, j| match (i, j) {
            (0, _) => g(1, 0),
            (1, _) => g(2, 0),
            (2, 0) => g(1, 0),
            _ => g(-1, 0),
        });
        assert_eq!(m.solve(&[g(2, 0), g(4, 0), g(0, 0)]), Some(vec![g(1, 0), g(1, 0)]));
        assert_eq!(m.solve(&[g(2, 0), g(5, 0), g(0, 0)]), None);
    }

    #[test]
    fn fast_product_matches_rational_product() {
        let a = CMatrix::from_fn(3, 4, |i, j| GaussRational::from_parts(i as i64 - 1, j as i64 + 2, j as i64, 3));
        let b = CMatrix::from_fn(4, 2, |i, j| GaussRational::from_parts(2 * j as i64 - 1, 5, i as i64, i as i64 + 1));
        let fast = a.mul_small(&b).unwrap();
        let mut slow = CMatrix::zero(3, 2);
        for i in 0..3 {
            for j in 0..2 {
                for k in 0..4 {
                    slow.add_at(i, j, &(a.get(i, k) * b.get(k, j)));
                }
            }
        }
        assert_eq!(fast, slow);
        // huge entries fall back to the rational path
        let big = GaussRational::real(Rational::new(BigInt::from(1u8) << 100, BigInt::from(3)));
        let h = CMatrix::from_fn(2, 2, |_, _| big.clone());
        assert!(h.mul_small(&h).is_none());
        assert_eq!((&h * &h).get(0, 0), &(&(&big * &big) * &GaussRational::from_int(2)));
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = CMatrix::from_fn(2, 2, |_, _| g(1, 0));
        assert!(m.inverse().is_none());
    }
}
