//! Typed coefficient arrays with their membership residuals.
//!
//! Layouts (all indices lowered, canonical basis):
//! - `CurvatureTensor[a,b,c,d] = g(R(X_a,X_b)X_c, X_d)`
//! - `CovDerivTensor[m,a,b,c,d] = (S_{X_m})_{abcd}`
//! - `PrimTensor[a,b,c] = g(P(X_a)X_b, X_c)`

use crate::coeffs::Coeffs;
use crate::error::{Error, Result};
use crate::metric::{Endomorphism, MetricContext, Vector};
use nalgebra::DMatrix;
use std::ops::{Add, Mul, Neg, Sub};

macro_rules! coeff_tensor {
    ($name:ident, $rank:literal) => {
        impl $name {
            pub fn new(ctx: &MetricContext, coeffs: Coeffs<$rank>) -> Result<Self> {
                if coeffs.dim() != ctx.dim() {
                    return Err(Error::DimensionMismatch { expected: ctx.dim(), found: coeffs.dim() });
                }
                Ok(Self { ctx: ctx.clone(), coeffs })
            }

            pub fn zeros(ctx: &MetricContext) -> Self {
                Self { ctx: ctx.clone(), coeffs: Coeffs::zeros(ctx.dim()) }
            }

            pub fn from_fn(ctx: &MetricContext, f: impl FnMut([usize; $rank]) -> f64) -> Self {
                Self { ctx: ctx.clone(), coeffs: Coeffs::from_fn(ctx.dim(), f) }
            }

            pub fn ctx(&self) -> &MetricContext {
                &self.ctx
            }

            pub fn coeffs(&self) -> &Coeffs<$rank> {
                &self.coeffs
            }

            pub fn into_coeffs(self) -> Coeffs<$rank> {
                self.coeffs
            }

            pub fn max_abs(&self) -> f64 {
                self.coeffs.max_abs()
            }

            pub fn scale(&self, s: f64) -> Self {
                Self { ctx: self.ctx.clone(), coeffs: self.coeffs.scale(s) }
            }

            /// `Σ ε_{i_1}⋯ε_{i_r} A_i B_i`, the pairing induced by `g`.
            pub fn natural_pairing(&self, other: &Self) -> f64 {
                natural_pairing(&self.coeffs, &other.coeffs, self.ctx.eps())
            }

            /// Max-abs entry of `self - other`.
            pub fn max_diff(&self, other: &Self) -> f64 {
                (&self.coeffs - &other.coeffs).max_abs()
            }
        }

        impl Add for &$name {
            type Output = $name;
            fn add(self, rhs: &$name) -> $name {
                $name { ctx: self.ctx.clone(), coeffs: &self.coeffs + &rhs.coeffs }
            }
        }

        impl Sub for &$name {
            type Output = $name;
            fn sub(self, rhs: &$name) -> $name {
                $name { ctx: self.ctx.clone(), coeffs: &self.coeffs - &rhs.coeffs }
            }
        }

        impl Mul<f64> for &$name {
            type Output = $name;
            fn mul(self, s: f64) -> $name {
                self.scale(s)
            }
        }

        impl Neg for &$name {
            type Output = $name;
            fn neg(self) -> $name {
                self.scale(-1.0)
            }
        }
    };
}

pub fn natural_pairing<const R: usize>(a: &Coeffs<R>, b: &Coeffs<R>, eps: &[f64]) -> f64 {
    let dim = a.dim();
    if dim == 0 {
        return 0.0;
    }
    let mut idx = [0usize; R];
    let (sa, sb) = (a.as_slice(), b.as_slice());
    let mut acc = 0.0;
    let mut k = 0;
    loop {
        let w: f64 = idx.iter().map(|&i| eps[i]).product();
        acc += w * sa[k] * sb[k];
        k += 1;
        if !crate::coeffs::next_index(&mut idx, dim) {
            break;
        }
    }
    acc
}

/// Largest g-trace over any pair of slots.
pub fn max_trace<const R: usize>(c: &Coeffs<R>, eps: &[f64]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..R {
        for j in i + 1..R {
            m = c.trace_pair(i, j, eps).iter().fold(m, |acc, v| acc.max(v.abs()));
        }
    }
    m
}

fn j_pair<const R: usize>(c: &Coeffs<R>, j: &DMatrix<f64>, s1: usize, s2: usize) -> Coeffs<R> {
    c.transform_slot(s1, j).transform_slot(s2, j)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    ctx: MetricContext,
    coeffs: Coeffs<4>,
}
coeff_tensor!(CurvatureTensor, 4);

impl CurvatureTensor {
    /// Materializes a map `(X,Y) ↦ R(X,Y) ∈ End(V)`.
    pub fn from_endo_map(ctx: &MetricContext, mut f: impl FnMut(&Vector, &Vector) -> Endomorphism) -> Self {
        let n = ctx.dim();
        let eps = ctx.eps();
        let mut coeffs = Coeffs::zeros(n);
        for a in 0..n {
            let ea = ctx.basis(a);
            for b in 0..n {
                let m = f(&ea, &ctx.basis(b));
                for c in 0..n {
                    for d in 0..n {
                        coeffs[[a, b, c, d]] = eps[d] * m[(d, c)];
                    }
                }
            }
        }
        Self { ctx: ctx.clone(), coeffs }
    }

    /// The endomorphism `R(X,Y)`.
    pub fn endo(&self, x: &Vector, y: &Vector) -> Endomorphism {
        let n = self.ctx.dim();
        let eps = self.ctx.eps();
        let mut out = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let w = x[a] * y[b];
                if w == 0.0 {
                    continue;
                }
                for c in 0..n {
                    for d in 0..n {
                        out[(d, c)] += w * eps[d] * self.coeffs[[a, b, c, d]];
                    }
                }
            }
        }
        out
    }

    pub fn value(&self, x: &Vector, y: &Vector, z: &Vector, w: &Vector) -> f64 {
        let e = self.endo(x, y);
        self.ctx.inner(&(e * z), w)
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let c = &self.coeffs;
        (c + &c.permuted([1, 0, 2, 3])).max_abs().max((c + &c.permuted([0, 1, 3, 2])).max_abs())
    }

    pub fn pair_symmetry_residual(&self) -> f64 {
        (&self.coeffs - &self.coeffs.permuted([2, 3, 0, 1])).max_abs()
    }

    pub fn bianchi_residual(&self) -> f64 {
        bianchi1(&self.coeffs).max_abs()
    }

    /// `R(JX,JY) = R(X,Y)` and `R(JX,Y) + R(X,JY) = 0`; zero outside Kähler mode.
    pub fn kahler_residual(&self) -> f64 {
        match self.ctx.j_matrix() {
            None => 0.0,
            Some(j) => {
                let c = &self.coeffs;
                let jj = j_pair(c, j, 0, 1);
                let mixed = &c.transform_slot(0, j) + &c.transform_slot(1, j);
                (&jj - c).max_abs().max(mixed.max_abs())
            }
        }
    }

    /// Named membership residuals for `R(h)`.
    pub fn membership(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("antisymmetry", self.antisymmetry_residual()),
            ("pair symmetry", self.pair_symmetry_residual()),
            ("first Bianchi identity", self.bianchi_residual()),
        ];
        if self.ctx.is_kahler() {
            out.push(("J-invariance", self.kahler_residual()));
        }
        out
    }

    pub fn membership_residual(&self) -> f64 {
        self.membership().iter().fold(0.0, |m, (_, r)| m.max(*r))
    }

    pub fn max_trace(&self) -> f64 {
        max_trace(&self.coeffs, self.ctx.eps())
    }
}

pub(crate) fn bianchi1(c: &Coeffs<4>) -> Coeffs<4> {
    let mut out = c + &c.permuted([1, 2, 0, 3]);
    out += &c.permuted([2, 0, 1, 3]);
    out
}

pub(crate) fn bianchi2(c: &Coeffs<5>) -> Coeffs<5> {
    let mut out = c + &c.permuted([1, 2, 0, 3, 4]);
    out += &c.permuted([2, 0, 1, 3, 4]);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovDerivTensor {
    ctx: MetricContext,
    coeffs: Coeffs<5>,
}
coeff_tensor!(CovDerivTensor, 5);

impl CovDerivTensor {
    pub fn from_slices(ctx: &MetricContext, slices: &[CurvatureTensor]) -> Result<Self> {
        let n = ctx.dim();
        if slices.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: slices.len() });
        }
        let mut data = Vec::with_capacity(n.pow(5));
        for s in slices {
            if s.ctx.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.ctx.dim() });
            }
            data.extend_from_slice(s.coeffs.as_slice());
        }
        Ok(Self { ctx: ctx.clone(), coeffs: Coeffs::from_vec(n, data).expect("sized") })
    }

    /// Materializes `X ↦ ((Y,Z) ↦ S_X(Y,Z))`.
    pub fn from_endo_map(
        ctx: &MetricContext,
        mut f: impl FnMut(&Vector, &Vector, &Vector) -> Endomorphism,
    ) -> Self {
        let slices: Vec<_> = (0..ctx.dim())
            .map(|m| {
                let em = ctx.basis(m);
                CurvatureTensor::from_endo_map(ctx, |y, z| f(&em, y, z))
            })
            .collect();
        Self::from_slices(ctx, &slices).expect("sized")
    }

    pub fn slice(&self, m: usize) -> CurvatureTensor {
        let n = self.ctx.dim();
        let len = n.pow(4);
        let data = self.coeffs.as_slice()[m * len..(m + 1) * len].to_vec();
        CurvatureTensor { ctx: self.ctx.clone(), coeffs: Coeffs::from_vec(n, data).expect("sized") }
    }

    pub fn slices(&self) -> Vec<CurvatureTensor> {
        (0..self.ctx.dim()).map(|m| self.slice(m)).collect()
    }

    pub fn map_slices(&self, f: impl FnMut(CurvatureTensor) -> CurvatureTensor) -> Self {
        let slices: Vec<_> = self.slices().into_iter().map(f).collect();
        Self::from_slices(&self.ctx, &slices).expect("sized")
    }

    /// `S_X(Y,Z) + S_Y(Z,X) + S_Z(X,Y) = 0`.
    pub fn second_bianchi_residual(&self) -> f64 {
        bianchi2(&self.coeffs).max_abs()
    }

    /// Named membership residuals for `R^∇(h)`.
    pub fn membership(&self) -> Vec<(&'static str, f64)> {
        let mut out: Vec<(&'static str, f64)> = Vec::new();
        for s in self.slices() {
            for (name, r) in s.membership() {
                match out.iter_mut().find(|(k, _)| *k == name) {
                    Some(e) => e.1 = e.1.max(r),
                    None => out.push((name, r)),
                }
            }
        }
        out.push(("second Bianchi identity", self.second_bianchi_residual()));
        out
    }

    pub fn membership_residual(&self) -> f64 {
        self.membership().iter().fold(0.0, |m, (_, r)| m.max(*r))
    }

    pub fn max_trace(&self) -> f64 {
        max_trace(&self.coeffs, self.ctx.eps())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrimTensor {
    ctx: MetricContext,
    coeffs: Coeffs<3>,
}
coeff_tensor!(PrimTensor, 3);

impl PrimTensor {
    pub fn from_endo_map(ctx: &MetricContext, mut f: impl FnMut(&Vector) -> Endomorphism) -> Self {
        let n = ctx.dim();
        let eps = ctx.eps();
        let mut coeffs = Coeffs::zeros(n);
        for a in 0..n {
            let m = f(&ctx.basis(a));
            for b in 0..n {
                for c in 0..n {
                    coeffs[[a, b, c]] = eps[c] * m[(c, b)];
                }
            }
        }
        Self { ctx: ctx.clone(), coeffs }
    }

    /// The endomorphism `P(X)`.
    pub fn endo(&self, x: &Vector) -> Endomorphism {
        let n = self.ctx.dim();
        let eps = self.ctx.eps();
        let mut out = DMatrix::zeros(n, n);
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                for c in 0..n {
                    out[(c, b)] += x[a] * eps[c] * self.coeffs[[a, b, c]];
                }
            }
        }
        out
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        (&self.coeffs + &self.coeffs.permuted([0, 2, 1])).max_abs()
    }

    /// `g(P(X)Y,Z) + g(P(Y)Z,X) + g(P(Z)X,Y) = 0`.
    pub fn cyclic_residual(&self) -> f64 {
        let c = &self.coeffs;
        let mut s = c + &c.permuted([1, 2, 0]);
        s += &c.permuted([2, 0, 1]);
        s.max_abs()
    }

    /// Values commute with `J`; zero outside Kähler mode.
    pub fn unitary_residual(&self) -> f64 {
        match self.ctx.j_matrix() {
            None => 0.0,
            Some(j) => (&j_pair(&self.coeffs, j, 1, 2) - &self.coeffs).max_abs(),
        }
    }

    pub fn membership(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("antisymmetry", self.antisymmetry_residual()),
            ("cyclic identity", self.cyclic_residual()),
        ];
        if self.ctx.is_kahler() {
            out.push(("J-commutation", self.unitary_residual()));
        }
        out
    }

    pub fn membership_residual(&self) -> f64 {
        self.membership().iter().fold(0.0, |m, (_, r)| m.max(*r))
    }
}

/// Symmetric bilinear form, stored lowered.
#[derive(Clone, Debug, PartialEq)]
pub struct Sym2Tensor {
    ctx: MetricContext,
    coeffs: Coeffs<2>,
}
coeff_tensor!(Sym2Tensor, 2);

impl Sym2Tensor {
    pub fn from_matrix(ctx: &MetricContext, m: &DMatrix<f64>) -> Self {
        Self::from_fn(ctx, |[a, b]| m[(a, b)])
    }

    /// The form `g(HX,Y)` of an endomorphism.
    pub fn from_endo(ctx: &MetricContext, h: &Endomorphism) -> Self {
        Self::from_matrix(ctx, &ctx.lower_endo(h))
    }

    pub fn metric(ctx: &MetricContext) -> Self {
        Self::from_matrix(ctx, ctx.gram())
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.ctx.dim();
        DMatrix::from_fn(n, n, |a, b| self.coeffs[[a, b]])
    }

    /// `H` with `g(HX,Y) = h(X,Y)`.
    pub fn as_endo(&self) -> Endomorphism {
        self.ctx.raise_form(&self.matrix())
    }

    pub fn trace(&self) -> f64 {
        (0..self.ctx.dim()).map(|i| self.ctx.eps()[i] * self.coeffs[[i, i]]).sum()
    }

    pub fn symmetry_residual(&self) -> f64 {
        (&self.coeffs - &self.coeffs.permuted([1, 0])).max_abs()
    }
}

/// General covariant 3-tensor (Cotton, `∇Ric`, `T₀`, `D`, ...).
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    ctx: MetricContext,
    coeffs: Coeffs<3>,
}
coeff_tensor!(Tensor3, 3);

impl Tensor3 {
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        Self { ctx: self.ctx.clone(), coeffs: self.coeffs.permuted(perm) }
    }

    /// Symmetric 2-tensor obtained by fixing the first slot.
    pub fn slice(&self, m: usize) -> Sym2Tensor {
        Sym2Tensor::from_fn(&self.ctx, |[a, b]| self.coeffs[[m, a, b]])
    }

    pub fn as_prim(&self) -> PrimTensor {
        PrimTensor { ctx: self.ctx.clone(), coeffs: self.coeffs.clone() }
    }
}

impl PrimTensor {
    pub fn as_tensor3(&self) -> Tensor3 {
        Tensor3 { ctx: self.ctx.clone(), coeffs: self.coeffs.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{sym_wedge_metric, wedge_endo};

    #[test]
    fn endo_round_trips_through_coefficients() {
        let c = MetricContext::riemann(1, 3).unwrap();
        let h = DMatrix::from_fn(4, 4, |i, j| (i + j) as f64 * c.eps()[i]);
        let r = sym_wedge_metric(&h, &c).unwrap();
        let x = Vector::from_vec(vec![0.3, 1.0, -0.2, 0.5]);
        let y = Vector::from_vec(vec![-1.0, 0.4, 0.0, 0.9]);
        let z = Vector::from_vec(vec![0.1, 0.2, 0.3, 0.4]);
        let (hx, hy) = (&h * &x, &h * &y);
        let direct = &y * c.inner(&hx, &z) - &hx * c.inner(&y, &z) + &hy * c.inner(&x, &z) - &x * c.inner(&hy, &z);
        assert!((r.endo(&x, &y) * &z - direct).amax() < 1e-13);
        assert!(r.membership_residual() < 1e-13);
    }

    #[test]
    fn single_coefficient_breaks_symmetry() {
        let c = MetricContext::riemann(0, 3).unwrap();
        let mut r = crate::metric::sym_wedge_metric(&c.identity(), &c).unwrap().into_coeffs();
        r[[0, 1, 0, 1]] *= 1.1;
        let r = CurvatureTensor::new(&c, r).unwrap();
        assert!(r.pair_symmetry_residual() == 0.0);
        assert!(r.antisymmetry_residual() > 0.1);
    }

    #[test]
    fn prim_endo_layout() {
        let c = MetricContext::riemann(1, 2).unwrap();
        let v = c.basis(2);
        let p = PrimTensor::from_endo_map(&c, |x| wedge_endo(&v, x, &c).unwrap());
        let x = c.basis(0);
        assert!((p.endo(&x) - wedge_endo(&v, &x, &c).unwrap()).amax() < 1e-15);
        assert!(p.antisymmetry_residual() < 1e-15);
    }

    #[test]
    fn natural_pairing_uses_signs() {
        let c = MetricContext::riemann(1, 1).unwrap();
        let a = Sym2Tensor::metric(&c);
        assert_eq!(a.natural_pairing(&a), 2.0);
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0;
        let b = Sym2Tensor::from_matrix(&c, &m);
        assert_eq!(b.natural_pairing(&b), -2.0);
    }

    #[test]
    fn from_slices_checks_count() {
        let c = MetricContext::riemann(0, 3).unwrap();
        let z = CurvatureTensor::zeros(&c);
        assert!(CovDerivTensor::from_slices(&c, &[z.clone(), z]).is_err());
    }
}
