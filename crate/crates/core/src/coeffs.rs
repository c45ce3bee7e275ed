//! Dense row-major coefficient arrays of fixed rank over a square index range.

use nalgebra::DMatrix;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Debug, PartialEq)]
pub struct Coeffs<const R: usize> {
    dim: usize,
    data: Vec<f64>,
}

/// Advances a row-major multi-index; returns false after the last one.
pub fn next_index<const R: usize>(idx: &mut [usize; R], dim: usize) -> bool {
    for k in (0..R).rev() {
        idx[k] += 1;
        if idx[k] < dim {
            return true;
        }
        idx[k] = 0;
    }
    false
}

impl<const R: usize> Coeffs<R> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim.pow(R as u32)] }
    }

    pub fn from_vec(dim: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == dim.pow(R as u32)).then_some(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut([usize; R]) -> f64) -> Self {
        let mut out = Self::zeros(dim);
        if dim == 0 {
            return out;
        }
        let mut idx = [0usize; R];
        let mut k = 0;
        loop {
            out.data[k] = f(idx);
            k += 1;
            if !next_index(&mut idx, dim) {
                break;
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, idx: [usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    /// `out[i] = self[j]` with `j[k] = i[perm[k]]`.
    pub fn permuted(&self, perm: [usize; R]) -> Self {
        Self::from_fn(self.dim, |i| {
            let mut j = [0usize; R];
            for k in 0..R {
                j[k] = i[perm[k]];
            }
            self[j]
        })
    }

    /// Applies `m` to one vector slot: `out[.., i, ..] = Σ_j m[(j, i)] self[.., j, ..]`,
    /// i.e. the argument `X_i` is replaced by `M X_i`.
    pub fn transform_slot(&self, slot: usize, m: &DMatrix<f64>) -> Self {
        let dim = self.dim;
        Self::from_fn(dim, |i| {
            let mut j = i;
            let mut acc = 0.0;
            for t in 0..dim {
                let w = m[(t, i[slot])];
                if w != 0.0 {
                    j[slot] = t;
                    acc += w * self[j];
                }
            }
            acc
        })
    }

    /// Contracts slots `s1 < s2` with the diagonal inverse metric `eps`;
    /// returns the remaining rank-(R-2) array flattened row-major.
    pub fn trace_pair(&self, s1: usize, s2: usize, eps: &[f64]) -> Vec<f64> {
        assert!(s1 < s2 && s2 < R);
        let dim = self.dim;
        let mut out = vec![0.0; dim.pow(R as u32 - 2)];
        if dim == 0 {
            return out;
        }
        let mut idx = [0usize; R];
        loop {
            if idx[s1] == idx[s2] {
                let mut o = 0;
                for (k, &v) in idx.iter().enumerate() {
                    if k != s1 && k != s2 {
                        o = o * dim + v;
                    }
                }
                out[o] += eps[idx[s1]] * self[idx];
            }
            if !next_index(&mut idx, dim) {
                break;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<const R: usize> Index<[usize; R]> for Coeffs<R> {
    type Output = f64;
    #[inline]
    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.offset(idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for Coeffs<R> {
    #[inline]
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

impl<const R: usize> AddAssign<&Coeffs<R>> for Coeffs<R> {
    fn add_assign(&mut self, rhs: &Coeffs<R>) {
        assert_eq!(self.dim, rhs.dim);
        self.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a += b);
    }
}

impl<const R: usize> SubAssign<&Coeffs<R>> for Coeffs<R> {
    fn sub_assign(&mut self, rhs: &Coeffs<R>) {
        assert_eq!(self.dim, rhs.dim);
        self.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a -= b);
    }
}

impl<const R: usize> Add for &Coeffs<R> {
    type Output = Coeffs<R>;
    fn add(self, rhs: &Coeffs<R>) -> Coeffs<R> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<const R: usize> Sub for &Coeffs<R> {
    type Output = Coeffs<R>;
    fn sub(self, rhs: &Coeffs<R>) -> Coeffs<R> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<const R: usize> Mul<f64> for &Coeffs<R> {
    type Output = Coeffs<R>;
    fn mul(self, s: f64) -> Coeffs<R> {
        self.scale(s)
    }
}

impl<const R: usize> Neg for &Coeffs<R> {
    type Output = Coeffs<R>;
    fn neg(self) -> Coeffs<R> {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_matches_index_rule() {
        let t = Coeffs::<3>::from_fn(3, |[a, b, c]| (100 * a + 10 * b + c) as f64);
        let p = t.permuted([1, 2, 0]);
        assert_eq!(p[[0, 1, 2]], t[[1, 2, 0]]);
        assert_eq!(p[[2, 0, 1]], t[[0, 1, 2]]);
    }

    #[test]
    fn trace_pair_skips_contracted_slots() {
        let t = Coeffs::<3>::from_fn(2, |[a, b, c]| if a == c { (b + 1) as f64 } else { 0.0 });
        let tr = t.trace_pair(0, 2, &[1.0, -1.0]);
        assert_eq!(tr, vec![0.0, 0.0]);
        let tr = t.trace_pair(0, 2, &[1.0, 1.0]);
        assert_eq!(tr, vec![2.0, 4.0]);
    }

    #[test]
    fn transform_slot_with_identity_is_noop() {
        let t = Coeffs::<2>::from_fn(3, |[a, b]| (a * 3 + b) as f64);
        assert_eq!(t.transform_slot(1, &DMatrix::identity(3, 3)), t);
    }

    #[test]
    fn rank_zero_dim_is_empty() {
        let t = Coeffs::<4>::from_fn(0, |_| 1.0);
        assert!(t.as_slice().is_empty());
    }
}
