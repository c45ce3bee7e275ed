//! Signature-aware metric algebra: wedge actions, `H∧g`, `H∧_J g`, the complex
//! structure, index raising and the Hodge star on 2-forms in dimension four.

use crate::error::{ensure, Error, Result};
use crate::tensors::CurvatureTensor;
use crate::tol;
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

pub type Vector = DVector<f64>;
pub type Covector = DVector<f64>;
pub type Endomorphism = DMatrix<f64>;
/// Antisymmetric matrix of lowered 2-form coefficients `B_ab`.
pub type Bivector = DMatrix<f64>;

/// Canonical pseudo-orthonormal frame of `ℝ^{p,q}`, or of `ℝ^{2p,2q}` with its
/// complex structure. `ε_i = -1` for `i < p`; in Kähler mode the basis is
/// `e_1..e_n, Je_1..Je_n`.
#[derive(Clone)]
pub struct MetricContext {
    inner: Arc<Inner>,
}

struct Inner {
    p: usize,
    q: usize,
    kahler: bool,
    eps: Vec<f64>,
    gram: DMatrix<f64>,
    j: Option<DMatrix<f64>>,
}

impl fmt::Debug for MetricContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.is_kahler() { "kahler" } else { "riemann" };
        write!(f, "MetricContext({kind}, p={}, q={})", self.p(), self.q())
    }
}

impl PartialEq for MetricContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.p() == other.p() && self.q() == other.q() && self.is_kahler() == other.is_kahler())
    }
}

impl MetricContext {
    pub fn riemann(p: usize, q: usize) -> Result<Self> {
        if p + q == 0 {
            return Err(Error::UnsupportedDimension { dim: 0, reason: "empty signature" });
        }
        let eps: Vec<f64> = (0..p + q).map(|i| if i < p { -1.0 } else { 1.0 }).collect();
        Ok(Self::build(p, q, false, eps, None))
    }

    /// `p`, `q` count complex directions; the real dimension is `2(p+q)`.
    pub fn kahler(p: usize, q: usize) -> Result<Self> {
        let n = p + q;
        if n == 0 {
            return Err(Error::UnsupportedDimension { dim: 0, reason: "empty signature" });
        }
        let half: Vec<f64> = (0..n).map(|i| if i < p { -1.0 } else { 1.0 }).collect();
        let eps: Vec<f64> = half.iter().chain(half.iter()).copied().collect();
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(n + i, i)] = 1.0;
            j[(i, n + i)] = -1.0;
        }
        Ok(Self::build(p, q, true, eps, Some(j)))
    }

    fn build(p: usize, q: usize, kahler: bool, eps: Vec<f64>, j: Option<DMatrix<f64>>) -> Self {
        let gram = DMatrix::from_diagonal(&DVector::from_vec(eps.clone()));
        Self { inner: Arc::new(Inner { p, q, kahler, eps, gram, j }) }
    }

    pub fn p(&self) -> usize {
        self.inner.p
    }

    pub fn q(&self) -> usize {
        self.inner.q
    }

    /// Real dimension.
    pub fn dim(&self) -> usize {
        self.inner.eps.len()
    }

    /// Real dimension in Riemannian mode, complex dimension in Kähler mode.
    pub fn n(&self) -> usize {
        self.p() + self.q()
    }

    pub fn is_kahler(&self) -> bool {
        self.inner.kahler
    }

    pub fn eps(&self) -> &[f64] {
        &self.inner.eps
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.inner.gram
    }

    /// The canonical Gram matrix is its own inverse.
    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.inner.gram
    }

    pub fn j_matrix(&self) -> Option<&DMatrix<f64>> {
        self.inner.j.as_ref()
    }

    pub fn require_kahler(&self) -> Result<&DMatrix<f64>> {
        self.inner.j.as_ref().ok_or(Error::NotKahler)
    }

    pub fn require_riemann(&self) -> Result<()> {
        if self.is_kahler() {
            Err(Error::KahlerUnsupported)
        } else {
            Ok(())
        }
    }

    pub fn basis(&self, i: usize) -> Vector {
        let mut v = Vector::zeros(self.dim());
        v[i] = 1.0;
        v
    }

    pub fn identity(&self) -> Endomorphism {
        DMatrix::identity(self.dim(), self.dim())
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        self.eps().iter().zip(x.iter().zip(y.iter())).map(|(e, (a, b))| e * a * b).sum()
    }

    pub fn lower(&self, x: &Vector) -> Covector {
        x.component_mul(&DVector::from_column_slice(self.eps()))
    }

    pub fn check_vector(&self, x: &Vector) -> Result<()> {
        self.check_len(x.len())
    }

    pub fn check_endo(&self, a: &Endomorphism) -> Result<()> {
        self.check_len(a.nrows())?;
        self.check_len(a.ncols())
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), found })
        }
    }

    /// Lowered bilinear form `h(X,Y) = g(AX,Y)` of an endomorphism.
    pub fn lower_endo(&self, a: &Endomorphism) -> DMatrix<f64> {
        a.transpose() * self.gram()
    }

    /// Endomorphism `A` with `g(AX,Y) = h(X,Y)`.
    pub fn raise_form(&self, h: &DMatrix<f64>) -> Endomorphism {
        self.gram_inv() * h.transpose()
    }

    /// Max-abs deviation from `g(AX,Y) = -g(X,AY)`.
    pub fn skew_g_residual(&self, a: &Endomorphism) -> f64 {
        let h = self.lower_endo(a);
        max_abs(&(&h + h.transpose()))
    }

    /// Max-abs deviation from `g(AX,Y) = g(X,AY)`.
    pub fn sym_g_residual(&self, a: &Endomorphism) -> f64 {
        let h = self.lower_endo(a);
        max_abs(&(&h - h.transpose()))
    }

    pub fn is_skew_g(&self, a: &Endomorphism, tol: f64) -> bool {
        self.skew_g_residual(a) <= tol * tol::scale(max_abs(a))
    }

    pub fn is_sym_g(&self, a: &Endomorphism, tol: f64) -> bool {
        self.sym_g_residual(a) <= tol * tol::scale(max_abs(a))
    }

    /// Max-abs entry of `[A, J]`; zero outside Kähler mode.
    pub fn j_commutator_residual(&self, a: &Endomorphism) -> f64 {
        match self.j_matrix() {
            Some(j) => max_abs(&(a * j - j * a)),
            None => 0.0,
        }
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// `(X∧Y)Z = g(X,Z)Y - g(Y,Z)X`.
pub fn wedge_action(x: &Vector, y: &Vector, z: &Vector, ctx: &MetricContext) -> Result<Vector> {
    ctx.check_vector(x)?;
    ctx.check_vector(y)?;
    ctx.check_vector(z)?;
    Ok(y * ctx.inner(x, z) - x * ctx.inner(y, z))
}

/// The endomorphism `Z ↦ (X∧Y)Z`.
pub fn wedge_endo(x: &Vector, y: &Vector, ctx: &MetricContext) -> Result<Endomorphism> {
    ctx.check_vector(x)?;
    ctx.check_vector(y)?;
    Ok(wedge(x, y, ctx))
}

pub(crate) fn wedge(x: &Vector, y: &Vector, ctx: &MetricContext) -> Endomorphism {
    y * ctx.lower(x).transpose() - x * ctx.lower(y).transpose()
}

/// `X∧_J Y = X∧Y + JX∧JY`.
pub fn wedge_j_endo(x: &Vector, y: &Vector, ctx: &MetricContext) -> Result<Endomorphism> {
    ctx.require_kahler()?;
    ctx.check_vector(x)?;
    ctx.check_vector(y)?;
    Ok(wedge_j(x, y, ctx))
}

pub(crate) fn wedge_j(x: &Vector, y: &Vector, ctx: &MetricContext) -> Endomorphism {
    let j = ctx.j_matrix().expect("Kähler context");
    wedge(x, y, ctx) + wedge(&(j * x), &(j * y), ctx)
}

/// `(H∧g)(X,Y) = HX∧Y + X∧HY` for a g-symmetric `H`.
pub fn sym_wedge_metric(h: &Endomorphism, ctx: &MetricContext) -> Result<CurvatureTensor> {
    ctx.check_endo(h)?;
    let res = ctx.sym_g_residual(h);
    ensure("H∧g: H is not g-symmetric", res, tol::CONSTRUCTED * tol::scale(max_abs(h)))?;
    Ok(sym_wedge(h, ctx))
}

pub(crate) fn sym_wedge(h: &Endomorphism, ctx: &MetricContext) -> CurvatureTensor {
    CurvatureTensor::from_endo_map(ctx, |x, y| wedge(&(h * x), y, ctx) + wedge(x, &(h * y), ctx))
}

/// `R_H(X,Y) = HX∧_J Y + X∧_J HY + 2g(HJX,Y)J + 2g(JX,Y)JH` for a g-symmetric,
/// J-commuting `H`.
pub fn sym_wedge_j(h: &Endomorphism, ctx: &MetricContext) -> Result<CurvatureTensor> {
    ctx.require_kahler()?;
    ctx.check_endo(h)?;
    let sc = tol::CONSTRUCTED * tol::scale(max_abs(h));
    ensure("H∧_J g: H is not g-symmetric", ctx.sym_g_residual(h), sc)?;
    ensure("H∧_J g: H does not commute with J", ctx.j_commutator_residual(h), sc)?;
    let r = sym_wedge_j_unchecked(h, ctx);
    let scale = tol::scale(r.coeffs().max_abs());
    ensure("H∧_J g: first Bianchi identity", r.bianchi_residual(), tol::CONSTRUCTED * scale)?;
    ensure("H∧_J g: J-invariance", r.kahler_residual(), tol::CONSTRUCTED * scale)?;
    Ok(r)
}

pub(crate) fn sym_wedge_j_unchecked(h: &Endomorphism, ctx: &MetricContext) -> CurvatureTensor {
    let j = ctx.j_matrix().expect("Kähler context");
    let jh = j * h;
    let hj = h * j;
    CurvatureTensor::from_endo_map(ctx, |x, y| {
        wedge_j(&(h * x), y, ctx)
            + wedge_j(x, &(h * y), ctx)
            + j * (2.0 * ctx.inner(&(&hj * x), y))
            + &jh * (2.0 * ctx.inner(&(j * x), y))
    })
}

/// `½Id∧_J g`, the constant holomorphic sectional curvature tensor.
pub fn half_id_wedge_j(ctx: &MetricContext) -> Result<CurvatureTensor> {
    ctx.require_kahler()?;
    Ok(sym_wedge_j_unchecked(&(ctx.identity() * 0.5), ctx))
}

pub fn raise_index(omega: &Covector, ctx: &MetricContext) -> Result<Vector> {
    ctx.check_vector(omega)?;
    Ok(ctx.gram_inv() * omega)
}

/// Levi-Civita symbol in dimension four with `e₁∧e₂∧e₃∧e₄` positive.
pub(crate) fn levi_civita4(i: usize, j: usize, k: usize, l: usize) -> f64 {
    let mut idx = [i, j, k, l];
    let mut sign = 1.0;
    for a in 0..4 {
        for b in a + 1..4 {
            if idx[a] == idx[b] {
                return 0.0;
            }
        }
    }
    for a in 0..4 {
        while idx[a] != a {
            let t = idx[a];
            idx.swap(a, t);
            sign = -sign;
        }
    }
    sign
}

pub(crate) fn require_star_signature(ctx: &MetricContext) -> Result<()> {
    ctx.require_riemann()?;
    if ctx.dim() != 4 {
        return Err(Error::UnsupportedDimension { dim: ctx.dim(), reason: "the Hodge star on Λ² needs dimension 4" });
    }
    if ctx.p() % 2 == 1 {
        return Err(Error::UnsupportedSignature {
            p: ctx.p(),
            q: ctx.q(),
            reason: "⋆² = -1 on Λ² in Lorentzian signature",
        });
    }
    Ok(())
}

/// Hodge star on lowered 2-form coefficients: `(⋆B)_cd = ½ B^{ab} ε_abcd`.
pub fn hodge_star_lambda2(b: &Bivector, ctx: &MetricContext) -> Result<Bivector> {
    require_star_signature(ctx)?;
    ctx.check_endo(b)?;
    ensure("⋆: input is not antisymmetric", max_abs(&(b + b.transpose())), tol::CONSTRUCTED * tol::scale(max_abs(b)))?;
    let eps = ctx.eps();
    Ok(DMatrix::from_fn(4, 4, |c, d| {
        let mut acc = 0.0;
        for a in 0..4 {
            for bb in 0..4 {
                acc += eps[a] * eps[bb] * b[(a, bb)] * levi_civita4(a, bb, c, d);
            }
        }
        0.5 * acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-13
    }

    fn e(ctx: &MetricContext, i: usize) -> Vector {
        ctx.basis(i)
    }

    #[test]
    fn wedge_action_examples() {
        let c = MetricContext::riemann(0, 3).unwrap();
        assert_eq!(wedge_action(&e(&c, 0), &e(&c, 1), &e(&c, 0), &c).unwrap(), e(&c, 1));
        assert_eq!(wedge_action(&e(&c, 0), &e(&c, 1), &e(&c, 2), &c).unwrap(), Vector::zeros(3));
        let l = MetricContext::riemann(1, 2).unwrap();
        assert_eq!(wedge_action(&e(&l, 0), &e(&l, 1), &e(&l, 0), &l).unwrap(), -e(&l, 1));
    }

    #[test]
    fn wedge_endo_matrix_layout() {
        let c = MetricContext::riemann(0, 3).unwrap();
        let w = wedge_endo(&e(&c, 0), &e(&c, 1), &c).unwrap();
        assert_eq!(w[(1, 0)], 1.0);
        assert_eq!(w[(0, 1)], -1.0);
        assert_eq!(w.iter().filter(|v| **v != 0.0).count(), 2);
        let x = Vector::from_vec(vec![0.3, -1.2, 2.0]);
        assert_eq!(max_abs(&wedge_endo(&x, &x, &c).unwrap()), 0.0);
    }

    #[test]
    fn skew_g_differs_from_transpose_skew() {
        let l = MetricContext::riemann(1, 2).unwrap();
        let w = wedge_endo(&e(&l, 0), &e(&l, 1), &l).unwrap();
        assert!(l.is_skew_g(&w, 1e-13));
        assert!(max_abs(&(&w + w.transpose())) > 0.5);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let c = MetricContext::riemann(0, 3).unwrap();
        let bad = Vector::zeros(4);
        assert!(matches!(wedge_endo(&bad, &e(&c, 0), &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn g_wedge_g_is_twice_the_wedge() {
        let c = MetricContext::riemann(0, 3).unwrap();
        let r = sym_wedge_metric(&c.identity(), &c).unwrap();
        let w = wedge(&e(&c, 0), &e(&c, 1), &c) * 2.0;
        assert!(max_abs(&(r.endo(&e(&c, 0), &e(&c, 1)) - w)) < 1e-14);
    }

    #[test]
    fn j_is_half_sum_of_wedge_j() {
        for (p, q) in [(0, 2), (1, 1), (1, 2)] {
            let c = MetricContext::kahler(p, q).unwrap();
            let n = c.n();
            let mut acc = DMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                acc += wedge_j_endo(&e(&c, i), &e(&c, n + i), &c).unwrap() * (0.5 * c.eps()[i]);
            }
            assert!(max_abs(&(acc - c.j_matrix().unwrap())) < 1e-14);
        }
    }

    #[test]
    fn half_id_matches_closed_form() {
        let c = MetricContext::kahler(1, 1).unwrap();
        let r = half_id_wedge_j(&c).unwrap();
        let j = c.j_matrix().unwrap();
        let x = Vector::from_vec(vec![0.1, 0.7, -0.4, 1.1]);
        let y = Vector::from_vec(vec![-0.5, 0.2, 0.9, 0.3]);
        let expect = wedge_j(&x, &y, &c) + j * (2.0 * c.inner(&(j * &x), &y));
        assert!(max_abs(&(r.endo(&x, &y) - expect)) < 1e-14);
    }

    #[test]
    fn sym_wedge_j_rejects_non_commuting() {
        let c = MetricContext::kahler(0, 2).unwrap();
        let mut h = DMatrix::zeros(4, 4);
        h[(0, 0)] = 1.0;
        assert!(sym_wedge_j(&h, &c).is_err());
        assert!(sym_wedge_j(&DMatrix::zeros(4, 4), &c).unwrap().coeffs().max_abs() == 0.0);
    }

    #[test]
    fn raise_index_signs() {
        let c = MetricContext::riemann(1, 2).unwrap();
        assert_eq!(raise_index(&e(&c, 0), &c).unwrap(), -e(&c, 0));
        let c = MetricContext::riemann(0, 3).unwrap();
        assert_eq!(raise_index(&e(&c, 0), &c).unwrap(), e(&c, 0));
    }

    #[test]
    fn hodge_star_examples() {
        let c = MetricContext::riemann(0, 4).unwrap();
        let mut b = DMatrix::zeros(4, 4);
        b[(0, 1)] = 1.0;
        b[(1, 0)] = -1.0;
        let s = hodge_star_lambda2(&b, &c).unwrap();
        assert!(close(s[(2, 3)], 1.0) && close(s[(3, 2)], -1.0));
        for (p, q) in [(0, 4), (4, 0), (2, 2)] {
            let c = MetricContext::riemann(p, q).unwrap();
            let m = DMatrix::from_fn(4, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
            let b = &m - m.transpose();
            let ss = hodge_star_lambda2(&hodge_star_lambda2(&b, &c).unwrap(), &c).unwrap();
            assert!(max_abs(&(ss - &b)) < 1e-13);
        }
        let l = MetricContext::riemann(1, 3).unwrap();
        assert!(matches!(hodge_star_lambda2(&b, &l), Err(Error::UnsupportedSignature { .. })));
    }

    #[test]
    fn levi_civita_parity() {
        assert!(close(levi_civita4(0, 1, 2, 3), 1.0));
        assert!(close(levi_civita4(1, 0, 2, 3), -1.0));
        assert!(close(levi_civita4(1, 2, 3, 0), -1.0));
        assert!(close(levi_civita4(0, 0, 2, 3), 0.0));
    }
}
