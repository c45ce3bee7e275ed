//! The constraint spaces `R(h)`, `R^∇(h)`, `P(h)` for `h = so(p,q)` or `u(p,q)`:
//! trace maps, the splitting of `P(h)`, random elements and the rank oracle.

mod sampler;

pub use sampler::{random_element, space_dimension, trace_1_5_kernel_dimension, Element, Space};

use crate::coeffs::Coeffs;
use crate::error::{ensure, Error, Result};
use crate::metric::{wedge, wedge_j, MetricContext, Vector};
use crate::tensors::{CovDerivTensor, CurvatureTensor, PrimTensor, Sym2Tensor, Tensor3};
use crate::tol;
use nalgebra::{Complex, DMatrix};

/// `Ric(X,Y) = tr(Z ↦ R(X,Z)Y)`.
pub fn ricci(r: &CurvatureTensor) -> Sym2Tensor {
    let ctx = r.ctx();
    let data = r.coeffs().trace_pair(1, 3, ctx.eps());
    Sym2Tensor::new(ctx, Coeffs::from_vec(ctx.dim(), data).expect("sized")).expect("same ctx")
}

pub fn scalar_curvature(r: &CurvatureTensor) -> f64 {
    ricci(r).trace()
}

/// `(∇Ric)_X(Y,Z)`: the Ricci contraction of every directional slice.
pub fn trace_2_4(s: &CovDerivTensor) -> Tensor3 {
    let ctx = s.ctx();
    let data = s.coeffs().trace_pair(2, 4, ctx.eps());
    Tensor3::new(ctx, Coeffs::from_vec(ctx.dim(), data).expect("sized")).expect("same ctx")
}

/// `P(X) = g^{ij} S_{X_i}(X, X_j)`, unchecked.
pub(crate) fn trace_1_5_raw(s: &CovDerivTensor) -> PrimTensor {
    let ctx = s.ctx();
    let data = s.coeffs().trace_pair(0, 2, ctx.eps());
    PrimTensor::new(ctx, Coeffs::from_vec(ctx.dim(), data).expect("sized")).expect("same ctx")
}

/// `P(X) = g^{ij} S_{X_i}(X, X_j)`; fails if the result violates the cyclic identity.
pub fn trace_1_5(s: &CovDerivTensor) -> Result<PrimTensor> {
    let p = trace_1_5_raw(s);
    let sc = tol::scale(s.max_abs());
    ensure("trace (1,5): cyclic identity", p.cyclic_residual(), tol::IDENTITY * sc)?;
    Ok(p)
}

/// `Ric~(P) = g^{ij} P(X_i)X_j`.
pub fn ric_tilde(p: &PrimTensor) -> Vector {
    let ctx = p.ctx();
    let low = p.coeffs().trace_pair(0, 1, ctx.eps());
    Vector::from_iterator(ctx.dim(), low.iter().zip(ctx.eps()).map(|(v, e)| v * e))
}

/// `X ↦ V∧X`.
pub fn wedge_prim(v: &Vector, ctx: &MetricContext) -> Result<PrimTensor> {
    ctx.check_vector(v)?;
    Ok(PrimTensor::from_endo_map(ctx, |x| wedge(v, x, ctx)))
}

/// `X ↦ (½Id∧_J g)(V,X) = V∧_J X + 2g(JV,X)J`.
pub fn half_id_prim(v: &Vector, ctx: &MetricContext) -> Result<PrimTensor> {
    let j = ctx.require_kahler()?;
    ctx.check_vector(v)?;
    let jv = j * v;
    Ok(PrimTensor::from_endo_map(ctx, |x| wedge_j(v, x, ctx) + j * (2.0 * ctx.inner(&jv, x))))
}

/// `P = P₀ + P₁` with `P₁(X) = -(1/(n-1)) Ric~(P)∧X` and `Ric~(P₀) = 0`.
pub fn p_split_so(p: &PrimTensor) -> Result<(PrimTensor, PrimTensor)> {
    let ctx = p.ctx();
    ctx.require_riemann()?;
    let n = ctx.dim();
    if n < 2 {
        return Err(Error::UnsupportedDimension { dim: n, reason: "P(so) splitting needs n ≥ 2" });
    }
    let p1 = &wedge_prim(&ric_tilde(p), ctx)? * (-1.0 / (n as f64 - 1.0));
    Ok((p - &p1, p1))
}

/// `P = P₀ + P₁` with `P₁ = -(1/(2(n+1))) (½Id∧_J g)(Ric~(P), ·)` and `Ric~(P₀) = 0`.
pub fn p_split_u(p: &PrimTensor) -> Result<(PrimTensor, PrimTensor)> {
    let ctx = p.ctx();
    ctx.require_kahler()?;
    let n = ctx.n() as f64;
    let p1 = &half_id_prim(&ric_tilde(p), ctx)? * (-1.0 / (2.0 * (n + 1.0)));
    Ok((p - &p1, p1))
}

/// Builds `P = S - S₁ ∈ P(u(p,q))` from complex coefficients `S_abc = S_cba`
/// (row-major `[a][b][c]`, length `n³`), where `S(e_a)e_b = Σ_c S_acb e_c` is
/// complex linear in both arguments and `S₁(e_a)e_b = Σ_c ε_b ε_c conj(S_abc) e_c`
/// is antilinear in the first.
pub fn p_from_complex_symmetric(s: &[Complex<f64>], ctx: &MetricContext) -> Result<PrimTensor> {
    let j = ctx.require_kahler()?.clone();
    let n = ctx.n();
    if s.len() != n * n * n {
        return Err(Error::DimensionMismatch { expected: n * n * n, found: s.len() });
    }
    let at = |a: usize, b: usize, c: usize| s[(a * n + b) * n + c];
    let scale = tol::scale(s.iter().fold(0.0, |m, z| m.max(z.norm())));
    let mut asym: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                asym = asym.max((at(a, b, c) - at(c, b, a)).norm());
            }
        }
    }
    ensure("complex coefficients: S_abc = S_cba", asym, tol::CONSTRUCTED * scale)?;

    let eps = &ctx.eps()[..n];
    let real_form = |m: &dyn Fn(usize, usize) -> Complex<f64>| {
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                let z = m(r, c);
                out[(r, c)] = z.re;
                out[(r, n + c)] = -z.im;
                out[(n + r, c)] = z.im;
                out[(n + r, n + c)] = z.re;
            }
        }
        out
    };
    let mut images = Vec::with_capacity(2 * n);
    for a in 0..n {
        let lin = real_form(&|c, b| at(a, c, b));
        let anti = real_form(&|c, b| at(a, b, c).conj() * (eps[b] * eps[c]));
        images.push(&lin - &anti);
    }
    for a in 0..n {
        let lin = real_form(&|c, b| at(a, c, b));
        let anti = real_form(&|c, b| at(a, b, c).conj() * (eps[b] * eps[c]));
        images.push(&j * (&lin + &anti));
    }
    let mut k = 0;
    Ok(PrimTensor::from_endo_map(ctx, |_| {
        k += 1;
        images[k - 1].clone()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::sym_wedge_metric;

    #[test]
    fn ricci_of_constant_curvature() {
        let c = MetricContext::riemann(0, 5).unwrap();
        let r = sym_wedge_metric(&c.identity(), &c).unwrap();
        let ric = ricci(&r);
        assert!(ric.max_diff(&(&Sym2Tensor::metric(&c) * 8.0)) < 1e-13);
        assert!((scalar_curvature(&r) - 40.0).abs() < 1e-12);
        assert_eq!(scalar_curvature(&CurvatureTensor::zeros(&c)), 0.0);
    }

    #[test]
    fn ricci_of_tracefree_wedge() {
        let c = MetricContext::riemann(2, 3).unwrap();
        let h = DMatrix::from_diagonal(&Vector::from_vec(vec![1.0, -2.0, 0.5, 0.25, 0.25]));
        let r = sym_wedge_metric(&h, &c).unwrap();
        let expect = Sym2Tensor::from_endo(&c, &h);
        assert!(ricci(&r).max_diff(&(&expect * 3.0)) < 1e-13);
        assert!(scalar_curvature(&r).abs() < 1e-13);
    }

    #[test]
    fn ric_tilde_of_wedge_prim() {
        let c = MetricContext::riemann(0, 5).unwrap();
        let v = Vector::from_vec(vec![0.5, -1.0, 0.2, 0.0, 0.3]);
        let p = wedge_prim(&v, &c).unwrap();
        assert!((ric_tilde(&p) + &v * 4.0).amax() < 1e-14);
        let (p0, p1) = p_split_so(&p).unwrap();
        assert!(p0.max_abs() < 1e-14);
        assert!(p1.max_diff(&p) < 1e-14);
    }

    #[test]
    fn ric_tilde_of_half_id_prim() {
        for (pp, q) in [(0, 2), (1, 2)] {
            let c = MetricContext::kahler(pp, q).unwrap();
            let n = c.n() as f64;
            let v = Vector::from_fn(c.dim(), |i, _| (i as f64 * 0.7).sin());
            let p = half_id_prim(&v, &c).unwrap();
            assert!((ric_tilde(&p) + &v * (2.0 * (n + 1.0))).amax() < 1e-13);
            let (p0, p1) = p_split_u(&p).unwrap();
            assert!(p0.max_abs() < 1e-13 && p1.max_diff(&p) < 1e-13);
            assert!(p.membership_residual() < 1e-13);
        }
    }

    #[test]
    fn split_rejects_wrong_geometry() {
        let k = MetricContext::kahler(0, 2).unwrap();
        assert!(p_split_so(&PrimTensor::zeros(&k)).is_err());
        let r = MetricContext::riemann(0, 4).unwrap();
        assert!(p_split_u(&PrimTensor::zeros(&r)).is_err());
        let one = MetricContext::riemann(0, 1).unwrap();
        assert!(p_split_so(&PrimTensor::zeros(&one)).is_err());
    }

    fn complex_coeffs(n: usize, seed: u64) -> Vec<Complex<f64>> {
        let f = |k: usize| ((k as f64 + 1.0) * (seed as f64 + 0.37)).sin();
        let raw: Vec<Complex<f64>> = (0..n * n * n).map(|k| Complex::new(f(2 * k), f(2 * k + 1))).collect();
        let mut out = raw.clone();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    out[(a * n + b) * n + c] = raw[(a * n + b) * n + c] + raw[(c * n + b) * n + a];
                }
            }
        }
        out
    }

    #[test]
    fn complex_symmetric_gives_prim_tensor() {
        for (pp, q) in [(0, 2), (1, 1), (1, 2)] {
            let c = MetricContext::kahler(pp, q).unwrap();
            let s = complex_coeffs(c.n(), 3);
            let p = p_from_complex_symmetric(&s, &c).unwrap();
            assert!(p.max_abs() > 0.1);
            assert!(p.membership_residual() < 1e-12, "{:?}", p.membership());
        }
        let c = MetricContext::kahler(0, 2).unwrap();
        let zero = vec![Complex::new(0.0, 0.0); 8];
        assert_eq!(p_from_complex_symmetric(&zero, &c).unwrap().max_abs(), 0.0);
        let mut bad = zero.clone();
        bad[1] = Complex::new(1.0, 0.0);
        assert!(p_from_complex_symmetric(&bad, &c).is_err());
    }

    #[test]
    fn complex_symmetric_tracefree_lands_in_p0() {
        for (pp, q) in [(0, 3), (1, 2)] {
            let c = MetricContext::kahler(pp, q).unwrap();
            let n = c.n();
            let mut s = complex_coeffs(n, 5);
            // remove Σ_b S_abb through the symmetric correction S_a00, S_00a
            for a in 0..n {
                let t: Complex<f64> = (0..n).map(|b| s[(a * n + b) * n + b]).sum();
                if a == 0 {
                    s[0] -= t;
                } else {
                    s[a * n * n] -= t;
                    s[a] -= t;
                }
            }
            let p = p_from_complex_symmetric(&s, &c).unwrap();
            assert!(ric_tilde(&p).amax() < 1e-13);
        }
    }
}
