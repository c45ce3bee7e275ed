//! Pseudo-Riemannian decompositions: `R = W + L∧g`, the four-way split of
//! `∇R`, the Cotton tensor by two routes, the maps `Φ₁`, `Φ₂`, Gray's split of
//! `∇Ric`, the second Bianchi identity for `W`, and the ±-split in dimension 4.

use crate::coeffs::Coeffs;
use crate::error::{ensure, Error, Result};
use crate::metric::{self, sym_wedge, wedge, MetricContext, Vector};
use crate::spaces::{ricci, trace_1_5_raw, trace_2_4, wedge_prim};
use crate::tensors::{CovDerivTensor, CurvatureTensor, PrimTensor, Sym2Tensor, Tensor3};
use crate::tol;

#[derive(Clone, Debug)]
pub struct RiemannDecomposition {
    pub weyl: CurvatureTensor,
    /// `(1/(n-2)) (Ric - (s/n) g)∧g`
    pub ric0_part: CurvatureTensor,
    /// `(s/(2n(n-1))) g∧g`
    pub scalar_part: CurvatureTensor,
    pub ric: Sym2Tensor,
    pub s: f64,
    pub schouten: Sym2Tensor,
}

impl RiemannDecomposition {
    pub fn components(&self) -> [(&'static str, &CurvatureTensor); 3] {
        [("weyl", &self.weyl), ("ric0_part", &self.ric0_part), ("scalar_part", &self.scalar_part)]
    }

    pub fn sum(&self) -> CurvatureTensor {
        &(&self.weyl + &self.ric0_part) + &self.scalar_part
    }
}

#[derive(Clone, Debug)]
pub struct NablaRDecomposition {
    pub s0_prime: CovDerivTensor,
    pub s0_doubleprime: CovDerivTensor,
    pub s_prime: CovDerivTensor,
    pub s1: CovDerivTensor,
    pub cotton: Tensor3,
    pub grad_s: Vector,
    pub nabla_ric: Tensor3,
    pub nabla_weyl: CovDerivTensor,
    pub t0: Tensor3,
    pub t1: Tensor3,
    pub p0: PrimTensor,
    pub p1: PrimTensor,
}

impl NablaRDecomposition {
    pub fn components(&self) -> [(&'static str, &CovDerivTensor); 4] {
        [
            ("s0_prime", &self.s0_prime),
            ("s0_doubleprime", &self.s0_doubleprime),
            ("s_prime", &self.s_prime),
            ("s1", &self.s1),
        ]
    }

    pub fn sum(&self) -> CovDerivTensor {
        let a = &self.s0_prime + &self.s0_doubleprime;
        &(&a + &self.s_prime) + &self.s1
    }
}

fn require_dim3(ctx: &MetricContext) -> Result<f64> {
    ctx.require_riemann()?;
    if ctx.dim() < 3 {
        return Err(Error::UnsupportedDimension { dim: ctx.dim(), reason: "needs n ≥ 3" });
    }
    Ok(ctx.dim() as f64)
}

pub(crate) fn check_input_curvature(r: &CurvatureTensor) -> Result<()> {
    let sc = tol::scale(r.max_abs());
    for (name, res) in r.membership() {
        ensure(&format!("input curvature tensor: {name}"), res, tol::IDENTITY * sc)?;
    }
    Ok(())
}

pub(crate) fn check_input_cov_deriv(s: &CovDerivTensor) -> Result<()> {
    let sc = tol::scale(s.max_abs());
    for (name, res) in s.membership() {
        ensure(&format!("input covariant derivative tensor: {name}"), res, tol::IDENTITY * sc)?;
    }
    Ok(())
}

/// Compares a recipe value against a closed-form oracle; a mismatch beyond
/// [`tol::HARD`] is an error carrying both values at the worst entry.
pub(crate) fn route_check<const R: usize>(
    what: &str,
    recipe: &Coeffs<R>,
    closed: &Coeffs<R>,
    scale: f64,
) -> Result<f64> {
    let diff = recipe - closed;
    let res = diff.max_abs();
    if res.is_nan() || res > tol::HARD * scale {
        let (k, _) = diff
            .as_slice()
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (k, v)| if v.abs() > acc.1 { (k, v.abs()) } else { acc });
        return Err(Error::RouteMismatch {
            what: what.to_string(),
            residual: res,
            tol: tol::HARD * scale,
            recipe: format!("entry {k} = {:.17e} (max |·| {:.3e})", recipe.as_slice()[k], recipe.max_abs()),
            closed: format!("entry {k} = {:.17e} (max |·| {:.3e})", closed.as_slice()[k], closed.max_abs()),
        });
    }
    Ok(res)
}

fn weyl_split(r: &CurvatureTensor) -> (CurvatureTensor, CurvatureTensor, CurvatureTensor, Sym2Tensor, f64) {
    let ctx = r.ctx();
    let n = ctx.dim() as f64;
    let ric = ricci(r);
    let s = ric.trace();
    let g = Sym2Tensor::metric(ctx);
    let ric0 = &ric - &(&g * (s / n));
    let ric0_part = &sym_wedge(&ric0.as_endo(), ctx) * (1.0 / (n - 2.0));
    let scalar_part = &sym_wedge(&ctx.identity(), ctx) * (s / (2.0 * n * (n - 1.0)));
    let weyl = &(r - &ric0_part) - &scalar_part;
    (weyl, ric0_part, scalar_part, ric, s)
}

/// `R = W + (1/(n-2)) Ric⁰∧g + (s/(2n(n-1))) g∧g`.
pub fn decompose_curvature(r: &CurvatureTensor) -> Result<RiemannDecomposition> {
    let n = require_dim3(r.ctx())?;
    check_input_curvature(r)?;
    let (weyl, ric0_part, scalar_part, ric, s) = weyl_split(r);
    let g = Sym2Tensor::metric(r.ctx());
    let schouten = &(&ric - &(&g * (s / (2.0 * (n - 1.0))))) * (1.0 / (n - 2.0));
    Ok(RiemannDecomposition { weyl, ric0_part, scalar_part, ric, s, schouten })
}

/// `L = (1/(n-2)) (Ric - s/(2(n-1)) g)`, so that `R = W + L∧g`.
pub fn schouten(r: &CurvatureTensor) -> Result<Sym2Tensor> {
    let n = require_dim3(r.ctx())?;
    let ric = ricci(r);
    let s = ric.trace();
    let g = Sym2Tensor::metric(r.ctx());
    Ok(&(&ric - &(&g * (s / (2.0 * (n - 1.0))))) * (1.0 / (n - 2.0)))
}

/// Slicewise Weyl part of `S`.
pub fn nabla_weyl(s: &CovDerivTensor) -> Result<CovDerivTensor> {
    require_dim3(s.ctx())?;
    Ok(s.map_slices(|r| weyl_split(&r).0))
}

/// `d s(X) = g^{jk} (∇Ric)_X(X_j, X_k)`, lowered.
pub(crate) fn ds_of(nabla_ric: &Tensor3) -> Vector {
    let ctx = nabla_ric.ctx();
    Vector::from_vec(nabla_ric.coeffs().trace_pair(1, 2, ctx.eps()))
}

/// `grad s` from the trace of `∇Ric`.
pub fn grad_s_of(s: &CovDerivTensor) -> Vector {
    let ctx = s.ctx();
    ctx.gram_inv() * ds_of(&trace_2_4(s))
}

/// `C(X,Y,Z) = (n-2)(∇_Z L(X,Y) - ∇_Y L(X,Z))`.
pub fn cotton_from_schouten_route(s: &CovDerivTensor) -> Result<Tensor3> {
    let n = require_dim3(s.ctx())?;
    let ctx = s.ctx();
    let nric = trace_2_4(s);
    let ds = ds_of(&nric);
    let nl = Tensor3::from_fn(ctx, |[m, x, y]| {
        let gxy = ctx.gram()[(x, y)];
        (nric.coeffs()[[m, x, y]] - ds[m] * gxy / (2.0 * (n - 1.0))) / (n - 2.0)
    });
    let c = nl.coeffs();
    Ok(Tensor3::from_fn(ctx, |[x, y, z]| (n - 2.0) * (c[[z, x, y]] - c[[y, x, z]])))
}

/// Cotton tensor from the divergence identity
/// `g^{ij} S_{X_i}(X,Y,Z,X_j) = C(Z,X,Y) + (1/(2(n-1))) g(grad s, (X∧Y)Z)`.
pub fn cotton_from_divergence_route(s: &CovDerivTensor) -> Result<Tensor3> {
    let n = require_dim3(s.ctx())?;
    let ctx = s.ctx();
    let ds = ds_of(&trace_2_4(s));
    let div = s.coeffs().trace_pair(0, 4, ctx.eps());
    let d = ctx.dim();
    let g = ctx.gram();
    Ok(Tensor3::from_fn(ctx, |[z, x, y]| {
        let corr = g[(x, z)] * ds[y] - g[(y, z)] * ds[x];
        div[(x * d + y) * d + z] - corr / (2.0 * (n - 1.0))
    }))
}

/// Cotton tensor; both routes must agree to [`tol::IDENTITY`].
pub fn cotton_of(s: &CovDerivTensor) -> Result<Tensor3> {
    let a = cotton_from_divergence_route(s)?;
    let b = cotton_from_schouten_route(s)?;
    let sc = tol::scale(s.max_abs());
    let res = a.max_diff(&b);
    if res > tol::IDENTITY * sc || res.is_nan() {
        return Err(Error::RouteMismatch {
            what: "Cotton tensor (divergence vs Schouten route)".into(),
            residual: res,
            tol: tol::IDENTITY * sc,
            recipe: format!("max |C| = {:.6e}", a.max_abs()),
            closed: format!("max |C| = {:.6e}", b.max_abs()),
        });
    }
    Ok(a)
}

/// `Φ₁(P)_X = H_X∧g` with `g(H_X Y, Z) = -g(P(Y)Z + P(Z)Y, X)`.
pub fn phi1(p: &PrimTensor) -> Result<CovDerivTensor> {
    let ctx = p.ctx();
    ctx.require_riemann()?;
    let c = p.coeffs();
    let slices: Vec<_> = (0..ctx.dim())
        .map(|m| {
            let h = Sym2Tensor::from_fn(ctx, |[y, z]| -(c[[y, z, m]] + c[[z, y, m]]));
            sym_wedge(&h.as_endo(), ctx)
        })
        .collect();
    CovDerivTensor::from_slices(ctx, &slices)
}

/// `Φ₂(P)_X(Y,Z) = P((Y∧Z)X) + X∧(P(Z)Y - P(Y)Z)`.
pub fn phi2(p: &PrimTensor) -> Result<CovDerivTensor> {
    let ctx = p.ctx();
    ctx.require_riemann()?;
    let images: Vec<_> = (0..ctx.dim()).map(|a| p.endo(&ctx.basis(a))).collect();
    let pe = |v: &Vector| images.iter().zip(v.iter()).fold(ctx.identity() * 0.0, |acc, (m, c)| acc + m * *c);
    Ok(CovDerivTensor::from_endo_map(ctx, |x, y, z| {
        pe(&(wedge(y, z, ctx) * x)) + wedge(x, &(pe(z) * y - pe(y) * z), ctx)
    }))
}

/// `(Φ₁ + 3Φ₂)(P)`, which lies in `R^∇(so(p,q))`.
pub fn phi_combination(p: &PrimTensor) -> Result<CovDerivTensor> {
    Ok(&phi1(p)? + &(&phi2(p)? * 3.0))
}

/// Slices `T_X∧g` of a 3-tensor symmetric in its last two slots.
pub fn sym_slices(t: &Tensor3) -> CovDerivTensor {
    let ctx = t.ctx();
    let slices: Vec<_> = (0..ctx.dim()).map(|m| sym_wedge(&t.slice(m).as_endo(), ctx)).collect();
    CovDerivTensor::from_slices(ctx, &slices).expect("sized")
}

fn cyclic_sym(t: &Tensor3) -> Tensor3 {
    let c = t.coeffs();
    Tensor3::from_fn(t.ctx(), |[m, a, b]| c[[m, a, b]] + c[[a, b, m]] + c[[b, m, a]])
}

fn ds_g(ctx: &MetricContext, ds: &Vector) -> Tensor3 {
    Tensor3::from_fn(ctx, |[m, a, b]| ds[m] * ctx.gram()[(a, b)])
}

/// `T₀` and `T₁` of the four-way split.
pub fn t_tensors(nabla_ric: &Tensor3) -> Result<(Tensor3, Tensor3)> {
    let n = require_dim3(nabla_ric.ctx())?;
    let ds = ds_of(nabla_ric);
    let gsym = cyclic_sym(&ds_g(nabla_ric.ctx(), &ds));
    let t0 = &(&cyclic_sym(nabla_ric) - &(&gsym * (2.0 / (n + 2.0)))) * (1.0 / (3.0 * (n - 2.0)));
    let t1 = &gsym * (1.0 / (2.0 * (n - 1.0) * (n + 2.0)));
    Ok((t0, t1))
}

/// `φ₁` built from the Cotton tensor: `g(H_X Y, Z) = (C(Y,Z,X) + C(Z,Y,X))/(3(n+1))`.
pub fn phi1_from_cotton(cotton: &Tensor3) -> Result<CovDerivTensor> {
    let n = require_dim3(cotton.ctx())?;
    let ctx = cotton.ctx();
    let c = cotton.coeffs();
    let slices: Vec<_> = (0..ctx.dim())
        .map(|x| {
            let h = Sym2Tensor::from_fn(ctx, |[y, z]| (c[[y, z, x]] + c[[z, y, x]]) / (3.0 * (n + 1.0)));
            sym_wedge(&h.as_endo(), ctx)
        })
        .collect();
    CovDerivTensor::from_slices(ctx, &slices)
}

/// `∇R = S₀′ + S₀″ + S′ + S₁`.
pub fn decompose_nabla_r(s: &CovDerivTensor) -> Result<NablaRDecomposition> {
    let n = require_dim3(s.ctx())?;
    check_input_cov_deriv(s)?;
    let ctx = s.ctx();
    let sc = tol::scale(s.max_abs());

    let cotton = cotton_of(s)?;
    let nabla_ric = trace_2_4(s);
    let grad_s = ctx.gram_inv() * ds_of(&nabla_ric);

    let p0 = cotton.as_prim().scale(-1.0 / (3.0 * (n + 1.0)));
    let p1 = &wedge_prim(&grad_s, ctx)? * (1.0 / (4.0 * (n + 2.0) * (n - 1.0)));
    let phi1_p0 = phi1(&p0)?;
    let phi2_p0 = phi2(&p0)?;
    let s_prime = &phi1_p0 + &(&phi2_p0 * 3.0);
    let s1 = phi_combination(&p1)?;

    let (t0, t1) = t_tensors(&nabla_ric)?;
    let s0_doubleprime = sym_slices(&t0);
    let s0_prime = &(&(s - &s0_doubleprime) - &s_prime) - &s1;

    route_check("S₁ = T₁∧g", s1.coeffs(), sym_slices(&t1).coeffs(), sc)?;
    let phi1_c = phi1_from_cotton(&cotton)?;
    route_check("φ₁ = Φ₁(P₀)", phi1_p0.coeffs(), phi1_c.coeffs(), sc)?;
    let closed_sp = &phi1_c + &(&phi2_p0 * 3.0);
    route_check("S′ = φ₁ + 3φ₂", s_prime.coeffs(), closed_sp.coeffs(), sc)?;
    let nabla_weyl = nabla_weyl(s)?;
    let closed_s0p = &(&nabla_weyl + &(&phi1_c * (3.0 / (n - 2.0)))) - &(&phi2_p0 * 3.0);
    route_check("S₀′ = ∇W + (3/(n-2))φ₁ - 3φ₂", s0_prime.coeffs(), closed_s0p.coeffs(), sc)?;

    Ok(NablaRDecomposition {
        s0_prime,
        s0_doubleprime,
        s_prime,
        s1,
        cotton,
        grad_s,
        nabla_ric,
        nabla_weyl,
        t0,
        t1,
        p0,
        p1,
    })
}

/// `∇Ric = ξ_Q + ξ_S + ξ_A` with `ξ_Q = (1/(2(n-1))) ds⊗g + (n-2)T₁`,
/// `ξ_S = (n-2)T₀`, `ξ_A(X)(Y,Z) = (C(Y,Z,X) + C(Z,Y,X))/3`.
pub fn gray_split(
    nabla_ric: &Tensor3,
    grad_s: &Vector,
    cotton: &Tensor3,
    ctx: &MetricContext,
) -> Result<(Tensor3, Tensor3, Tensor3)> {
    let n = require_dim3(ctx)?;
    ctx.check_vector(grad_s)?;
    let ds = ctx.lower(grad_s);
    let (t0, t1) = t_tensors(nabla_ric)?;
    let xi_q = &(&ds_g(ctx, &ds) * (1.0 / (2.0 * (n - 1.0)))) + &(&t1 * (n - 2.0));
    let xi_s = &t0 * (n - 2.0);
    let c = cotton.coeffs();
    let xi_a = Tensor3::from_fn(ctx, |[x, y, z]| (c[[y, z, x]] + c[[z, y, x]]) / 3.0);
    let sum = &(&xi_q + &xi_s) + &xi_a;
    let sc = tol::scale(nabla_ric.max_abs());
    ensure("Gray split: ξ_Q + ξ_S + ξ_A = ∇Ric", sum.max_diff(nabla_ric), tol::IDENTITY * sc)?;
    Ok((xi_q, xi_s, xi_a))
}

/// Result of a pointwise identity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    /// Max-abs violation.
    pub max_abs: f64,
    /// Max-abs coefficient of the input tensor.
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        self.max_abs / tol::scale(self.scale)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.relative() <= tol
    }
}

/// `∇_X W(Y,Z,V,U) + cyclic = -(1/(n-2)) Σ_cyc [C(U,X,Y)g(Z,V) - C(V,X,Y)g(Z,U)]`.
pub fn check_second_bianchi_w(s: &CovDerivTensor) -> Result<Residual> {
    let n = require_dim3(s.ctx())?;
    let ctx = s.ctx();
    let nw = nabla_weyl(s)?;
    let c = cotton_from_divergence_route(s)?;
    let (w, cc, g) = (nw.coeffs(), c.coeffs(), ctx.gram());
    let k = -1.0 / (n - 2.0);
    let viol = Coeffs::<5>::from_fn(ctx.dim(), |[x, y, z, v, u]| {
        let lhs = w[[x, y, z, v, u]] + w[[y, z, x, v, u]] + w[[z, x, y, v, u]];
        let rhs = cc[[u, x, y]] * g[(z, v)] + cc[[u, y, z]] * g[(x, v)] + cc[[u, z, x]] * g[(y, v)]
            - cc[[v, x, y]] * g[(z, u)]
            - cc[[v, y, z]] * g[(x, u)]
            - cc[[v, z, x]] * g[(y, u)];
        lhs - k * rhs
    });
    Ok(Residual { max_abs: viol.max_abs(), scale: s.max_abs() })
}

/// Absolute residual of one displayed identity.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub formula: &'static str,
    pub residual: f64,
}

fn last_trace(s: &CovDerivTensor) -> Tensor3 {
    let ctx = s.ctx();
    Tensor3::new(ctx, Coeffs::from_vec(ctx.dim(), s.coeffs().trace_pair(0, 4, ctx.eps())).expect("sized"))
        .expect("same ctx")
}

/// Traces of `S₀″`, `S′`, `S₁`; `A_{X_i}(X,Y,Z,X_j) g^{ij}` is written `tr(A)(X,Y,Z)`.
pub fn trace_table(dec: &NablaRDecomposition) -> Vec<IdentityResidual> {
    let ctx = dec.s1.ctx();
    let n = ctx.dim() as f64;
    let g = ctx.gram();
    let ds = ctx.lower(&dec.grad_s);
    let c = dec.cotton.coeffs();
    let k = 1.0 / (2.0 * (n - 1.0));
    let row = |name, formula, a: &Tensor3, b: Tensor3| IdentityResidual { name, formula, residual: a.max_diff(&b) };
    vec![
        IdentityResidual {
            name: "trace_15_s0pp",
            formula: "g^{ij} S₀″_{X_i}(X,X_j) = 0",
            residual: trace_1_5_raw(&dec.s0_doubleprime).max_abs(),
        },
        row(
            "last_trace_s_prime",
            "tr(S′)(X,Y,Z) = C(Z,X,Y)",
            &last_trace(&dec.s_prime),
            Tensor3::from_fn(ctx, |[x, y, z]| c[[z, x, y]]),
        ),
        row(
            "last_trace_s1",
            "tr(S₁)(X,Y,Z) = -(1/(2(n-1))) (ds(X)g(Y,Z) - ds(Y)g(X,Z))",
            &last_trace(&dec.s1),
            Tensor3::from_fn(ctx, |[x, y, z]| -k * (ds[x] * g[(y, z)] - ds[y] * g[(x, z)])),
        ),
        row("ricci_trace_s0pp", "∇_X Ric(S₀″)(Y,Z) = (n-2) T₀(X,Y,Z)", &trace_2_4(&dec.s0_doubleprime), &dec.t0 * (n - 2.0)),
        row(
            "ricci_trace_s_prime",
            "∇_X Ric(S′)(Y,Z) = (C(Y,Z,X) + C(Z,Y,X))/3",
            &trace_2_4(&dec.s_prime),
            Tensor3::from_fn(ctx, |[x, y, z]| (c[[y, z, x]] + c[[z, y, x]]) / 3.0),
        ),
        row(
            "ricci_trace_s1",
            "∇_X Ric(S₁)(Y,Z) = ds(X)g(Y,Z)/(2(n-1)) + (n-2) T₁(X,Y,Z)",
            &trace_2_4(&dec.s1),
            &Tensor3::from_fn(ctx, |[x, y, z]| k * ds[x] * g[(y, z)]) + &(&dec.t1 * (n - 2.0)),
        ),
    ]
}

/// `(n-3) C(X,Y,Z) = (n-2) g^{ij} (∇_{X_i}W)(Y,Z,X,X_j)`.
pub fn cotton_weyl_residual(s: &CovDerivTensor) -> Result<f64> {
    let n = require_dim3(s.ctx())?;
    let c = cotton_from_divergence_route(s)?;
    let div = last_trace(&nabla_weyl(s)?);
    let lhs = &c * (n - 3.0);
    let rhs = Tensor3::from_fn(s.ctx(), |[x, y, z]| (n - 2.0) * div.coeffs()[[y, z, x]]);
    Ok(lhs.max_diff(&rhs))
}

/// Residuals of the closed forms `S₁ = T₁∧g` and `S₀′ = ∇W + (3/(n-2))φ₁ - 3φ₂`.
pub fn closed_form_residuals(dec: &NablaRDecomposition) -> Result<Vec<IdentityResidual>> {
    let n = require_dim3(dec.s1.ctx())?;
    let phi1_c = phi1_from_cotton(&dec.cotton)?;
    let phi2_p0 = phi2(&dec.p0)?;
    let s0p = &(&dec.nabla_weyl + &(&phi1_c * (3.0 / (n - 2.0)))) - &(&phi2_p0 * 3.0);
    let sp = &phi1_c + &(&phi2_p0 * 3.0);
    Ok(vec![
        IdentityResidual { name: "s1_closed_form", formula: "S₁ = T₁∧g", residual: dec.s1.max_diff(&sym_slices(&dec.t1)) },
        IdentityResidual { name: "s_prime_closed_form", formula: "S′ = φ₁ + 3φ₂", residual: dec.s_prime.max_diff(&sp) },
        IdentityResidual {
            name: "s0_prime_closed_form",
            formula: "S₀′ = ∇W + (3/(n-2))φ₁ - 3φ₂",
            residual: dec.s0_prime.max_diff(&s0p),
        },
    ])
}

/// Slot-wise Hodge star on the second bivector of a curvature tensor.
pub fn star_second_slot(r: &CurvatureTensor) -> Result<CurvatureTensor> {
    let ctx = r.ctx();
    metric::require_star_signature(ctx)?;
    let eps = ctx.eps();
    let c = r.coeffs();
    Ok(CurvatureTensor::from_fn(ctx, |[a, b, cc, d]| {
        let mut acc = 0.0;
        for e in 0..4 {
            for f in 0..4 {
                let lc = metric::levi_civita4(e, f, cc, d);
                if lc != 0.0 {
                    acc += eps[e] * eps[f] * c[[a, b, e, f]] * lc;
                }
            }
        }
        0.5 * acc
    }))
}

#[derive(Clone, Debug)]
pub struct WeylSplit {
    pub plus: CurvatureTensor,
    pub minus: CurvatureTensor,
}

/// `W± = (W ± W⋆)/2` in dimension 4 with `⋆² = 1`.
pub fn split_plus_minus_curvature(dec: &RiemannDecomposition) -> Result<WeylSplit> {
    let w = &dec.weyl;
    let ws = star_second_slot(w)?;
    Ok(WeylSplit { plus: &(w + &ws) * 0.5, minus: &(w - &ws) * 0.5 })
}

#[derive(Clone, Debug)]
pub struct NablaSplit {
    pub nabla_weyl_plus: CovDerivTensor,
    pub nabla_weyl_minus: CovDerivTensor,
    pub cotton_plus: Tensor3,
    pub cotton_minus: Tensor3,
    pub s0_prime_plus: CovDerivTensor,
    pub s0_prime_minus: CovDerivTensor,
    pub s_prime_plus: CovDerivTensor,
    pub s_prime_minus: CovDerivTensor,
}

/// Refines `∇W`, `C`, `S₀′`, `S′` along `W = W⁺ + W⁻` in dimension 4.
pub fn split_plus_minus_nabla(dec: &NablaRDecomposition) -> Result<NablaSplit> {
    let ctx = dec.nabla_weyl.ctx();
    metric::require_star_signature(ctx)?;
    let n = 4.0;
    let star = dec.nabla_weyl.slices().iter().map(star_second_slot).collect::<Result<Vec<_>>>()?;
    let star = CovDerivTensor::from_slices(ctx, &star)?;
    let plus = &(&dec.nabla_weyl + &star) * 0.5;
    let minus = &(&dec.nabla_weyl - &star) * 0.5;
    let cotton = |nw: &CovDerivTensor| {
        let div = nw.coeffs().trace_pair(0, 4, ctx.eps());
        Tensor3::from_fn(ctx, |[x, y, z]| 2.0 * div[(y * 4 + z) * 4 + x])
    };
    let parts = |nw: &CovDerivTensor, c: &Tensor3| -> Result<(CovDerivTensor, CovDerivTensor)> {
        let p0 = c.as_prim().scale(-1.0 / (3.0 * (n + 1.0)));
        let f1 = phi1(&p0)?;
        let f2 = phi2(&p0)?;
        let s0p = &(nw + &(&f1 * (3.0 / (n - 2.0)))) - &(&f2 * 3.0);
        Ok((s0p, &f1 + &(&f2 * 3.0)))
    };
    let (cp, cm) = (cotton(&plus), cotton(&minus));
    let (s0pp, spp) = parts(&plus, &cp)?;
    let (s0pm, spm) = parts(&minus, &cm)?;
    Ok(NablaSplit {
        nabla_weyl_plus: plus,
        nabla_weyl_minus: minus,
        cotton_plus: cp,
        cotton_minus: cm,
        s0_prime_plus: s0pp,
        s0_prime_minus: s0pm,
        s_prime_plus: spp,
        s_prime_minus: spm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::sym_wedge_metric;
    use crate::spaces::{random_element, Space};
    use nalgebra::DMatrix;

    fn rand_s(p: usize, q: usize, seed: u64) -> CovDerivTensor {
        let c = MetricContext::riemann(p, q).unwrap();
        random_element(Space::RNablaSo, &c, seed).unwrap().into_cov_deriv().unwrap()
    }

    fn rand_r(p: usize, q: usize, seed: u64) -> CurvatureTensor {
        let c = MetricContext::riemann(p, q).unwrap();
        random_element(Space::RSo, &c, seed).unwrap().into_curvature().unwrap()
    }

    #[test]
    fn constant_curvature_is_pure_scalar() {
        let c = MetricContext::riemann(0, 5).unwrap();
        let r = sym_wedge_metric(&c.identity(), &c).unwrap();
        let d = decompose_curvature(&r).unwrap();
        assert!(d.weyl.max_abs() < 1e-13 && d.ric0_part.max_abs() < 1e-13);
        assert!(d.scalar_part.max_diff(&r) < 1e-13);
        assert!(d.schouten.max_diff(&Sym2Tensor::metric(&c)) < 1e-13);
    }

    #[test]
    fn tracefree_wedge_is_pure_ric0() {
        let c = MetricContext::riemann(0, 6).unwrap();
        let h = DMatrix::from_diagonal(&Vector::from_vec(vec![1.0, -1.0, 2.0, -2.0, 0.5, -0.5]));
        let r = sym_wedge_metric(&h, &c).unwrap();
        let d = decompose_curvature(&r).unwrap();
        assert!(d.weyl.max_abs() < 1e-13 && d.scalar_part.max_abs() < 1e-13);
        assert!(d.ric0_part.max_diff(&r) < 1e-13);
    }

    #[test]
    fn random_curvature_reconstructs_and_weyl_is_tracefree() {
        let r = rand_r(2, 3, 4);
        let d = decompose_curvature(&r).unwrap();
        assert!(d.sum().max_diff(&r) < 1e-12);
        assert!(d.weyl.max_trace() < 1e-11);
        let lg = sym_wedge(&d.schouten.as_endo(), r.ctx());
        assert!((&d.weyl + &lg).max_diff(&r) < 1e-12);
        let n = 5.0;
        let g = Sym2Tensor::metric(r.ctx());
        assert!(ricci(&d.ric0_part).max_diff(&(&d.ric - &(&g * (d.s / n)))) < 1e-12);
    }

    #[test]
    fn dimension_guard() {
        let c = MetricContext::riemann(0, 2).unwrap();
        assert!(decompose_curvature(&CurvatureTensor::zeros(&c)).is_err());
        assert!(schouten(&CurvatureTensor::zeros(&c)).is_err());
    }

    #[test]
    fn cotton_routes_agree() {
        for (p, q, seed) in [(0, 5, 1), (1, 4, 2), (2, 4, 3)] {
            let s = rand_s(p, q, seed);
            let a = cotton_from_divergence_route(&s).unwrap();
            let b = cotton_from_schouten_route(&s).unwrap();
            assert!(a.max_diff(&b) < 1e-12);
            let c = a.coeffs();
            let anti = Tensor3::from_fn(s.ctx(), |[x, y, z]| c[[x, y, z]] + c[[x, z, y]]);
            assert!(anti.max_abs() < 1e-12);
            let cyc = Tensor3::from_fn(s.ctx(), |[x, y, z]| c[[x, y, z]] + c[[y, z, x]] + c[[z, x, y]]);
            assert!(cyc.max_abs() < 1e-12);
            assert!(c.trace_pair(0, 1, s.ctx().eps()).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn phi_trace_identities() {
        let c = MetricContext::riemann(1, 4).unwrap();
        let n = 5.0;
        let p = random_element(Space::PSo, &c, 11).unwrap().into_prim().unwrap();
        let (p0, p1) = crate::spaces::p_split_so(&p).unwrap();
        let t = |s: CovDerivTensor| trace_1_5_raw(&s);
        assert!(t(phi1(&p0).unwrap()).max_diff(&(&p0 * -3.0)) < 1e-12);
        assert!(t(phi1(&p1).unwrap()).max_diff(&(&p1 * (n - 4.0))) < 1e-12);
        assert!(t(phi2(&p).unwrap()).max_diff(&(&p * -n)) < 1e-12);
        assert!(phi_combination(&p).unwrap().membership_residual() < 1e-12);
        assert!(phi1(&p).unwrap().second_bianchi_residual() > 1e-3);
    }

    #[test]
    fn nabla_decomposition_components() {
        let s = rand_s(2, 3, 5);
        let d = decompose_nabla_r(&s).unwrap();
        assert!(d.sum().max_diff(&s) < 1e-12);
        for (_, c) in d.components() {
            assert!(c.membership_residual() < 1e-11);
        }
        assert!(d.s0_prime.max_trace() < 1e-11);
        let comps = d.components();
        for i in 0..4 {
            for j in i + 1..4 {
                assert!(comps[i].1.natural_pairing(comps[j].1).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn symmetrized_nabla_l_gives_s0pp_plus_s1() {
        let s = rand_s(0, 6, 8);
        let d = decompose_nabla_r(&s).unwrap();
        let n = 6.0;
        let ds = ds_of(&d.nabla_ric);
        let nl = Tensor3::from_fn(s.ctx(), |[m, a, b]| {
            (d.nabla_ric.coeffs()[[m, a, b]] - ds[m] * s.ctx().gram()[(a, b)] / (2.0 * (n - 1.0))) / (n - 2.0)
        });
        let t = &cyclic_sym(&nl) * (1.0 / 3.0);
        assert!((&d.s0_doubleprime + &d.s1).max_diff(&sym_slices(&t)) < 1e-12);
    }

    #[test]
    fn three_dimensions_specialize() {
        let s = rand_s(0, 3, 2);
        let d = decompose_nabla_r(&s).unwrap();
        assert!(d.s0_prime.max_abs() < 1e-11);
        assert!(d.nabla_weyl.max_abs() < 1e-11);
        let f1 = phi1(&d.p0).unwrap();
        let f2 = phi2(&d.p0).unwrap();
        assert!(f1.max_diff(&f2) < 1e-11);
    }

    #[test]
    fn second_bianchi_for_weyl() {
        let s = rand_s(0, 6, 3);
        assert!(check_second_bianchi_w(&s).unwrap().relative() < 1e-11);
        let mut bad = s.clone().into_coeffs();
        bad.as_mut_slice()[777] += 1e-3;
        let bad = CovDerivTensor::new(s.ctx(), bad).unwrap();
        assert!(check_second_bianchi_w(&bad).unwrap().relative() > 1e-5);
    }

    #[test]
    fn trace_table_holds() {
        for (p, q, seed) in [(0, 5, 1), (2, 3, 2), (0, 6, 3)] {
            let s = rand_s(p, q, seed);
            let d = decompose_nabla_r(&s).unwrap();
            for row in trace_table(&d).into_iter().chain(closed_form_residuals(&d).unwrap()) {
                assert!(row.residual < 1e-12, "{} {}", row.name, row.residual);
            }
            assert!(cotton_weyl_residual(&s).unwrap() < 1e-12);
        }
    }

    #[test]
    fn gray_split_sums() {
        let s = rand_s(1, 5, 6);
        let d = decompose_nabla_r(&s).unwrap();
        let (q, sy, a) = gray_split(&d.nabla_ric, &d.grad_s, &d.cotton, s.ctx()).unwrap();
        assert!((&(&q + &sy) + &a).max_diff(&d.nabla_ric) < 1e-12);
        let pure = decompose_nabla_r(&d.s1).unwrap();
        let (_, sy1, a1) = gray_split(&pure.nabla_ric, &pure.grad_s, &pure.cotton, s.ctx()).unwrap();
        assert!(sy1.max_abs() < 1e-11 && a1.max_abs() < 1e-11);
    }

    #[test]
    fn four_dimensional_split() {
        for (p, q) in [(0, 4), (2, 2)] {
            let s = rand_s(p, q, 7);
            let d = decompose_nabla_r(&s).unwrap();
            let sp = split_plus_minus_nabla(&d).unwrap();
            assert!((&sp.cotton_plus + &sp.cotton_minus).max_diff(&d.cotton) < 1e-11);
            assert!((&sp.s0_prime_plus + &sp.s0_prime_minus).max_diff(&d.s0_prime) < 1e-11);
            assert!((&sp.s_prime_plus + &sp.s_prime_minus).max_diff(&d.s_prime) < 1e-11);
            let r = rand_r(p, q, 7);
            let w = split_plus_minus_curvature(&decompose_curvature(&r).unwrap()).unwrap();
            let st = star_second_slot(&w.plus).unwrap();
            assert!(st.max_diff(&w.plus) < 1e-12);
        }
        let s = rand_s(1, 3, 1);
        let d = decompose_nabla_r(&s).unwrap();
        assert!(matches!(split_plus_minus_nabla(&d), Err(Error::UnsupportedSignature { .. })));
    }
}
