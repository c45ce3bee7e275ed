//! Pseudo-Kähler decompositions: `R = B + K∧_J g`, `∇R = Q₀ + Q′ + Q₁`,
//! the tensor `D`, the maps `Ψ₁`, `Ψ₂`, and the second Bianchi identity for
//! the Bochner tensor.

use crate::coeffs::Coeffs;
use crate::error::{ensure, Error, Result};
use crate::metric::{sym_wedge_j_unchecked, wedge_j, Endomorphism, MetricContext, Vector};
use crate::riemann::{check_input_cov_deriv, check_input_curvature, route_check, IdentityResidual, Residual};
use crate::spaces::{half_id_prim, p_split_u, ric_tilde, ricci, trace_1_5_raw, trace_2_4};
use crate::tensors::{CovDerivTensor, CurvatureTensor, PrimTensor, Sym2Tensor, Tensor3};
use crate::tol;

#[derive(Clone, Debug)]
pub struct KahlerDecomposition {
    pub bochner: CurvatureTensor,
    /// `(1/(2(n+2))) Ric⁰∧_J g`
    pub h_part: CurvatureTensor,
    /// `(s/(4n(n+1))) ½Id∧_J g`
    pub lambda_part: CurvatureTensor,
    pub ric: Sym2Tensor,
    pub s: f64,
    /// `K` with `R = B + K∧_J g`.
    pub k: Sym2Tensor,
}

impl KahlerDecomposition {
    pub fn components(&self) -> [(&'static str, &CurvatureTensor); 3] {
        [("bochner", &self.bochner), ("h_part", &self.h_part), ("lambda_part", &self.lambda_part)]
    }

    pub fn sum(&self) -> CurvatureTensor {
        &(&self.bochner + &self.h_part) + &self.lambda_part
    }
}

#[derive(Clone, Debug)]
pub struct NablaRKahlerDecomposition {
    pub q0: CovDerivTensor,
    pub q_prime: CovDerivTensor,
    pub q1: CovDerivTensor,
    /// `D`, stored as `[z,x,y] = D(Z,X,Y)`.
    pub d_tensor: PrimTensor,
    pub grad_s: Vector,
    pub nabla_ric: Tensor3,
    pub nabla_bochner: CovDerivTensor,
    /// `T` with `Q₁ = T∧_J g`, stored as `[x,y,z] = g(T_X Y, Z)`.
    pub t: Tensor3,
    pub p0: PrimTensor,
    pub p1: PrimTensor,
}

impl NablaRKahlerDecomposition {
    pub fn components(&self) -> [(&'static str, &CovDerivTensor); 3] {
        [("q0", &self.q0), ("q_prime", &self.q_prime), ("q1", &self.q1)]
    }

    pub fn sum(&self) -> CovDerivTensor {
        &(&self.q0 + &self.q_prime) + &self.q1
    }
}

fn complex_dim(ctx: &MetricContext) -> Result<f64> {
    ctx.require_kahler()?;
    Ok(ctx.n() as f64)
}

fn bochner_split(r: &CurvatureTensor) -> (CurvatureTensor, CurvatureTensor, CurvatureTensor, Sym2Tensor, f64) {
    let ctx = r.ctx();
    let n = ctx.n() as f64;
    let ric = ricci(r);
    let s = ric.trace();
    let g = Sym2Tensor::metric(ctx);
    let ric0 = &ric - &(&g * (s / (2.0 * n)));
    let h_part = &sym_wedge_j_unchecked(&ric0.as_endo(), ctx) * (1.0 / (2.0 * (n + 2.0)));
    let lambda_part = &sym_wedge_j_unchecked(&(ctx.identity() * 0.5), ctx) * (s / (4.0 * n * (n + 1.0)));
    let bochner = &(r - &h_part) - &lambda_part;
    (bochner, h_part, lambda_part, ric, s)
}

/// `R = B + (1/(2(n+2))) Ric⁰∧_J g + (s/(4n(n+1))) ½Id∧_J g`.
pub fn decompose_curvature_kahler(r: &CurvatureTensor) -> Result<KahlerDecomposition> {
    let n = complex_dim(r.ctx())?;
    check_input_curvature(r)?;
    let (bochner, h_part, lambda_part, ric, s) = bochner_split(r);
    let g = Sym2Tensor::metric(r.ctx());
    let k = &(&ric - &(&g * (s / (4.0 * (n + 1.0))))) * (1.0 / (2.0 * (n + 2.0)));
    Ok(KahlerDecomposition { bochner, h_part, lambda_part, ric, s, k })
}

/// Slicewise Bochner part of `S`.
pub fn nabla_bochner(s: &CovDerivTensor) -> Result<CovDerivTensor> {
    complex_dim(s.ctx())?;
    Ok(s.map_slices(|r| bochner_split(&r).0))
}

/// `grad s` from the trace of `∇Ric`.
pub fn grad_s_kahler(s: &CovDerivTensor) -> Result<Vector> {
    complex_dim(s.ctx())?;
    Ok(crate::riemann::grad_s_of(s))
}

/// `D` without the `Ric~(D) = 0` check.
pub fn d_tensor_raw(s: &CovDerivTensor) -> Result<PrimTensor> {
    let n = complex_dim(s.ctx())?;
    let ctx = s.ctx();
    let gsp = -crate::riemann::grad_s_of(s);
    Ok(&(&half_id_prim(&gsp, ctx)? * (1.0 / (4.0 * (n + 1.0)))) - &trace_1_5_raw(s))
}

/// `D = -tr₁₅(S) - (1/(4(n+1))) (½Id∧_J g)(grad s, ·)`, which satisfies `Ric~(D) = 0`.
pub fn d_tensor_of(s: &CovDerivTensor) -> Result<PrimTensor> {
    let d = d_tensor_raw(s)?;
    let sc = tol::scale(s.max_abs());
    let rt = ric_tilde(&d).amax();
    ensure("Ric~(D) = 0", rt, tol::IDENTITY * sc)?;
    Ok(d)
}

fn endo_map(p: &PrimTensor) -> impl Fn(&Vector) -> Endomorphism + '_ {
    let ctx = p.ctx();
    let images: Vec<_> = (0..ctx.dim()).map(|a| p.endo(&ctx.basis(a))).collect();
    move |v: &Vector| images.iter().zip(v.iter()).fold(ctx.identity() * 0.0, |acc, (m, c)| acc + m * *c)
}

/// `Ψ₁(P)_X = J P(JX)∧_J g`.
pub fn psi1(p: &PrimTensor) -> Result<CovDerivTensor> {
    let ctx = p.ctx();
    let j = ctx.require_kahler()?;
    let pe = endo_map(p);
    let slices: Vec<_> = (0..ctx.dim())
        .map(|m| sym_wedge_j_unchecked(&(j * pe(&(j * ctx.basis(m)))), ctx))
        .collect();
    CovDerivTensor::from_slices(ctx, &slices)
}

/// `Ψ₂(P)_X(Y,Z) = P((Y∧_J Z)X) + X∧_J(P(Z)Y - P(Y)Z)`.
pub fn psi2(p: &PrimTensor) -> Result<CovDerivTensor> {
    let ctx = p.ctx();
    ctx.require_kahler()?;
    let pe = endo_map(p);
    Ok(CovDerivTensor::from_endo_map(ctx, |x, y, z| {
        pe(&(wedge_j(y, z, ctx) * x)) + wedge_j(x, &(pe(z) * y - pe(y) * z), ctx)
    }))
}

/// `(Ψ₁ - Ψ₂)(P)`, which lies in `R^∇(u(p,q))`.
pub fn psi_combination(p: &PrimTensor) -> Result<CovDerivTensor> {
    Ok(&psi1(p)? - &psi2(p)?)
}

fn j_slot(t: &Coeffs<3>, slot: usize, j: &Endomorphism) -> Coeffs<3> {
    t.transform_slot(slot, j)
}

/// `T_X = (g(grad s, X) Id - J∘(X∧_J J grad s)) / (8(n+2)(n+1))`, lowered.
pub fn t_tensor(grad_s: &Vector, ctx: &MetricContext) -> Result<Tensor3> {
    let n = complex_dim(ctx)?;
    ctx.check_vector(grad_s)?;
    let j = ctx.require_kahler()?;
    let gsp = -grad_s;
    let jg = j * &gsp;
    let k = 1.0 / (8.0 * (n + 2.0) * (n + 1.0));
    let mut out = Coeffs::<3>::zeros(ctx.dim());
    for x in 0..ctx.dim() {
        let e = ctx.basis(x);
        let tx = (j * wedge_j(&e, &jg, ctx) - ctx.identity() * ctx.inner(&gsp, &e)) * k;
        let low = ctx.lower_endo(&tx);
        for a in 0..ctx.dim() {
            for b in 0..ctx.dim() {
                out[[x, a, b]] = low[(a, b)];
            }
        }
    }
    Tensor3::new(ctx, out)
}

/// Slices `T_X∧_J g`.
pub fn sym_slices_j(t: &Tensor3) -> CovDerivTensor {
    let ctx = t.ctx();
    let slices: Vec<_> = (0..ctx.dim()).map(|m| sym_wedge_j_unchecked(&t.slice(m).as_endo(), ctx)).collect();
    CovDerivTensor::from_slices(ctx, &slices).expect("sized")
}

/// `D(Z,X,Y) = ((n+2)/n) g((g^{ab}(∇_{X_a}B)(Z,X_b))Y, X)`.
pub fn d_from_nabla_bochner(nb: &CovDerivTensor) -> Result<Tensor3> {
    let n = complex_dim(nb.ctx())?;
    let ctx = nb.ctx();
    let tr = nb.coeffs().trace_pair(0, 2, ctx.eps());
    let d = ctx.dim();
    Ok(Tensor3::from_fn(ctx, |[z, x, y]| (n + 2.0) / n * tr[(z * d + y) * d + x]))
}

#[derive(Clone, Debug)]
pub struct NablaRicSplit {
    pub nabla_ric: Tensor3,
    /// `-D(JX,JZ,Y)`
    pub d_term: Tensor3,
    /// `-(1/(4(n+1))) g((½Id∧_J g)(X, J grad s)JY, Z)`
    pub grad_s_term: Tensor3,
    /// `(∇_X Ric)(JY,Z)`, an element of `P(u(p,q))`.
    pub nabla_ric_j: PrimTensor,
}

/// `(∇_X Ric)(Y,Z) = -D(JX,JZ,Y) - (1/(4(n+1))) g((½Id∧_J g)(X, J grad s)JY, Z)`,
/// together with `∇Ric(J·,·) ∈ P(u(p,q))` and its `p_split_u`.
pub fn nabla_ric_kahler(s: &CovDerivTensor) -> Result<NablaRicSplit> {
    let n = complex_dim(s.ctx())?;
    let ctx = s.ctx();
    let j = ctx.require_kahler()?;
    let sc = tol::scale(s.max_abs());
    let grad_s = crate::riemann::grad_s_of(s);
    let d = d_tensor_of(s)?;
    let nabla_ric = trace_2_4(s);
    let (d_term, grad_s_term) = nabla_ric_parts(&d, &grad_s, n, j)?;
    ensure("∇Ric from D and grad s", nabla_ric.max_diff(&(&d_term + &grad_s_term)), tol::IDENTITY * sc)?;
    let nabla_ric_j = PrimTensor::new(ctx, nabla_ric.coeffs().transform_slot(1, j))?;
    ensure("∇Ric(J·,·): cyclic identity", nabla_ric_j.cyclic_residual(), tol::IDENTITY * sc)?;
    let (p0, p1) = p_split_u(&nabla_ric_j)?;
    let (c0, c1) = nabla_ric_j_parts(&d, &grad_s, n, j)?;
    ensure("p_split_u of ∇Ric(J·,·): D part", p0.max_diff(&c0), tol::IDENTITY * sc)?;
    ensure("p_split_u of ∇Ric(J·,·): grad s part", p1.max_diff(&c1), tol::IDENTITY * sc)?;
    Ok(NablaRicSplit { nabla_ric, d_term, grad_s_term, nabla_ric_j })
}

/// `(∇_X Ric)(JY,Z) = D(JX,Y,Z) + (1/(4(n+1))) g((½Id∧_J g)(X, J grad s)Y, Z)`.
fn nabla_ric_j_parts(d: &PrimTensor, grad_s: &Vector, n: f64, j: &Endomorphism) -> Result<(PrimTensor, PrimTensor)> {
    let ctx = d.ctx();
    let h = half_id_prim(&(j * -grad_s), ctx)?;
    let a = PrimTensor::new(ctx, j_slot(d.coeffs(), 0, j))?;
    Ok((a, &h * (1.0 / (4.0 * (n + 1.0)))))
}

fn nabla_ric_parts(d: &PrimTensor, grad_s: &Vector, n: f64, j: &Endomorphism) -> Result<(Tensor3, Tensor3)> {
    let ctx = d.ctx();
    ctx.check_vector(grad_s)?;
    let gsp = -grad_s;
    let e = j_slot(&j_slot(d.coeffs(), 0, j), 1, j).permuted([0, 2, 1]);
    let from_d = Tensor3::new(ctx, e)?.scale(-1.0);
    let h = half_id_prim(&(j * &gsp), ctx)?;
    let from_s = Tensor3::new(ctx, j_slot(h.coeffs(), 1, j))?.scale(-1.0 / (4.0 * (n + 1.0)));
    Ok((from_d, from_s))
}

/// `∇R = Q₀ + Q′ + Q₁`.
pub fn decompose_nabla_r_kahler(s: &CovDerivTensor) -> Result<NablaRKahlerDecomposition> {
    let n = complex_dim(s.ctx())?;
    if n < 2.0 {
        return Err(Error::UnsupportedDimension { dim: s.ctx().dim(), reason: "needs complex dimension n ≥ 2" });
    }
    check_input_cov_deriv(s)?;
    let ctx = s.ctx();
    let j = ctx.require_kahler()?;
    let sc = tol::scale(s.max_abs());

    let grad_s = crate::riemann::grad_s_of(s);
    let gsp = -&grad_s;
    let d = d_tensor_of(s)?;
    let p0 = &d * (-1.0 / (2.0 * (n + 3.0)));
    let p1 = &half_id_prim(&gsp, ctx)? * (1.0 / (16.0 * (n + 2.0) * (n + 1.0)));
    let psi1_p0 = psi1(&p0)?;
    let psi2_p0 = psi2(&p0)?;
    let q_prime = &psi1_p0 - &psi2_p0;
    let q1 = psi_combination(&p1)?;
    let q0 = &(s - &q_prime) - &q1;

    let t = t_tensor(&grad_s, ctx)?;
    route_check("Q₁ = T∧_J g", q1.coeffs(), sym_slices_j(&t).coeffs(), sc)?;
    let nb = nabla_bochner(s)?;
    let closed_q0 = &(&nb + &(&psi1_p0 * (1.0 / (n + 2.0)))) + &psi2_p0;
    route_check("Q₀ = ∇B + ψ₁/(n+2) + ψ₂", q0.coeffs(), closed_q0.coeffs(), sc)?;
    route_check("D from ∇B", d.coeffs(), d_from_nabla_bochner(&nb)?.coeffs(), sc)?;
    let nabla_ric = trace_2_4(s);
    let (rq, r1) = nabla_ric_parts(&d, &grad_s, n, j)?;
    route_check("tr₂₄(Q′) = -D(JX,JZ,Y)", trace_2_4(&q_prime).coeffs(), rq.coeffs(), sc)?;
    route_check("tr₂₄(Q₁)", trace_2_4(&q1).coeffs(), r1.coeffs(), sc)?;
    route_check("∇Ric from D and grad s", nabla_ric.coeffs(), (&rq + &r1).coeffs(), sc)?;

    Ok(NablaRKahlerDecomposition {
        q0,
        q_prime,
        q1,
        d_tensor: d,
        grad_s,
        nabla_ric,
        nabla_bochner: nb,
        t,
        p0,
        p1,
    })
}

/// Traces of `Q′` and `Q₁`; `A_{X_i}(X,Y,Z,X_j) g^{ij}` is written `tr(A)(X,Y,Z)`.
pub fn trace_table(dec: &NablaRKahlerDecomposition) -> Result<Vec<IdentityResidual>> {
    let ctx = dec.q1.ctx();
    let n = complex_dim(ctx)?;
    let j = ctx.require_kahler()?;
    let last = |a: &CovDerivTensor| {
        Tensor3::new(ctx, Coeffs::from_vec(ctx.dim(), a.coeffs().trace_pair(0, 4, ctx.eps())).expect("sized"))
    };
    let d = dec.d_tensor.coeffs();
    let h = half_id_prim(&-&dec.grad_s, ctx)?;
    let hc = h.coeffs();
    let k = 1.0 / (4.0 * (n + 1.0));
    let (d_term, s_term) = nabla_ric_parts(&dec.d_tensor, &dec.grad_s, n, j)?;
    Ok(vec![
        IdentityResidual {
            name: "last_trace_q_prime",
            formula: "tr(Q′)(X,Y,Z) = -D(Z,X,Y)",
            residual: last(&dec.q_prime)?.max_diff(&Tensor3::from_fn(ctx, |[x, y, z]| -d[[z, x, y]])),
        },
        IdentityResidual {
            name: "last_trace_q1",
            formula: "tr(Q₁)(X,Y,Z) = (1/(4(n+1))) g((½Id∧_J g)(grad s, Z)Y, X)",
            residual: last(&dec.q1)?.max_diff(&Tensor3::from_fn(ctx, |[x, y, z]| -k * hc[[z, y, x]])),
        },
        IdentityResidual {
            name: "ricci_trace_q_prime",
            formula: "∇_X Ric(Q′)(Y,Z) = -D(JX,JZ,Y)",
            residual: trace_2_4(&dec.q_prime).max_diff(&d_term),
        },
        IdentityResidual {
            name: "ricci_trace_q1",
            formula: "∇_X Ric(Q₁)(Y,Z) = -(1/(4(n+1))) g((½Id∧_J g)(X, J grad s)JY, Z)",
            residual: trace_2_4(&dec.q1).max_diff(&s_term),
        },
    ])
}

/// Residuals of `Q₁ = T∧_J g`, `Q₀ = ∇B + ψ₁/(n+2) + ψ₂`, `D ∝ div ∇B` and `Ric~(D) = 0`.
pub fn closed_form_residuals(dec: &NablaRKahlerDecomposition) -> Result<Vec<IdentityResidual>> {
    let n = complex_dim(dec.q1.ctx())?;
    let psi1_p0 = psi1(&dec.p0)?;
    let psi2_p0 = psi2(&dec.p0)?;
    let q0 = &(&dec.nabla_bochner + &(&psi1_p0 * (1.0 / (n + 2.0)))) + &psi2_p0;
    let db = d_from_nabla_bochner(&dec.nabla_bochner)?;
    Ok(vec![
        IdentityResidual { name: "q1_closed_form", formula: "Q₁ = T∧_J g", residual: dec.q1.max_diff(&sym_slices_j(&dec.t)) },
        IdentityResidual {
            name: "q0_closed_form",
            formula: "Q₀ = ∇B + (1/(n+2))ψ₁ + ψ₂",
            residual: dec.q0.max_diff(&q0),
        },
        IdentityResidual {
            name: "d_from_nabla_bochner",
            formula: "D(Z,X,Y) = ((n+2)/n) g(g^{ab}(∇_{X_a}B)(Z,X_b)Y, X)",
            residual: dec.d_tensor.as_tensor3().max_diff(&db),
        },
        IdentityResidual { name: "ric_tilde_d", formula: "Ric~(D) = 0", residual: ric_tilde(&dec.d_tensor).amax() },
    ])
}

/// `Σ_cyc g((∇_X B)(Y,Z)V, U) = (1/(2(n+2))) Σ_cyc [D(h(Z,V)U,X,Y) + D(h(Z,U)V,Y,X) - 2g(JX,Y)D(JZ,V,U)]`
/// with `h(A,B)W = g(A,B)W + g(A,JB)JW`.
pub fn check_second_bianchi_b(s: &CovDerivTensor) -> Result<Residual> {
    let n = complex_dim(s.ctx())?;
    let ctx = s.ctx();
    let j = ctx.require_kahler()?;
    let nb = nabla_bochner(s)?;
    let d = d_tensor_raw(s)?;
    let dj = j_slot(d.coeffs(), 0, j);
    let dc = d.coeffs();
    let g = ctx.gram();
    let gj = g * j;
    let jtg = j.transpose() * g;
    let w = nb.coeffs();
    let term = |x: usize, y: usize, z: usize, v: usize, u: usize| {
        g[(z, v)] * dc[[u, x, y]] + gj[(z, v)] * dj[[u, x, y]] + g[(z, u)] * dc[[v, y, x]]
            + gj[(z, u)] * dj[[v, y, x]]
            - 2.0 * jtg[(x, y)] * dj[[z, v, u]]
    };
    let k = 1.0 / (2.0 * (n + 2.0));
    let viol = Coeffs::<5>::from_fn(ctx.dim(), |[x, y, z, v, u]| {
        let lhs = w[[x, y, z, v, u]] + w[[y, z, x, v, u]] + w[[z, x, y, v, u]];
        let rhs = term(x, y, z, v, u) + term(y, z, x, v, u) + term(z, x, y, v, u);
        lhs - k * rhs
    });
    Ok(Residual { max_abs: viol.max_abs(), scale: s.max_abs() })
}
