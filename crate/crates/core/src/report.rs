//! Decomposition and verification reports.
//!
//! Every residual is relative: it is divided by the max-abs coefficient of the
//! input (pairings by its square). The `residuals` map holds the entries that
//! depend only on the emitted components, so [`recheck`] can reproduce them
//! from the report alone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Kind, TensorFile};
use crate::metric::{sym_wedge, sym_wedge_j_unchecked};
use crate::riemann::IdentityResidual;
use crate::spaces::{p_split_so, p_split_u, ric_tilde, trace_2_4};
use crate::tensors::{CovDerivTensor, CurvatureTensor, PrimTensor};
use crate::{kahler, riemann, tol};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityCheck {
    pub name: String,
    /// The identity in formula form.
    pub anchor: String,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Input,
    Part,
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedTensor {
    pub name: String,
    pub role: Role,
    pub tensor: TensorFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Versions {
    pub curvdec: String,
    pub format: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions { curvdec: env!("CARGO_PKG_VERSION").to_string(), format: FORMAT_VERSION }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionReport {
    /// `decompose` or `verify`.
    pub mode: String,
    pub components: Vec<NamedTensor>,
    pub residuals: BTreeMap<String, f64>,
    pub identities_checked: Vec<IdentityCheck>,
    pub seed: Option<u64>,
    /// Tolerance applied to each identity, by name.
    pub tolerances: BTreeMap<String, f64>,
    pub versions: Versions,
}

impl DecompositionReport {
    pub fn passed(&self) -> bool {
        self.identities_checked.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&IdentityCheck> {
        self.identities_checked.iter().filter(|c| !c.pass).collect()
    }

    pub fn component(&self, name: &str) -> Option<&TensorFile> {
        self.components.iter().find(|c| c.name == name).map(|c| &c.tensor)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("malformed report: {e}")))
    }
}

struct Builder {
    tol: Option<f64>,
    scale: f64,
    report: DecompositionReport,
}

impl Builder {
    fn new(mode: &str, input: &TensorFile, tol: Option<f64>, seed: Option<u64>) -> Self {
        let scale = tol::scale(input.data.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        Builder {
            tol,
            scale,
            report: DecompositionReport {
                mode: mode.to_string(),
                components: vec![NamedTensor { name: "input".into(), role: Role::Input, tensor: input.clone() }],
                residuals: BTreeMap::new(),
                identities_checked: Vec::new(),
                seed,
                tolerances: BTreeMap::new(),
                versions: Versions::default(),
            },
        }
    }

    /// Records a check on an absolute residual.
    fn check(&mut self, name: impl Into<String>, anchor: impl Into<String>, abs: f64, default_tol: f64) {
        let rel = abs / self.scale;
        self.check_relative(name, anchor, rel, default_tol);
    }

    fn check_relative(&mut self, name: impl Into<String>, anchor: impl Into<String>, rel: f64, default_tol: f64) {
        let name = name.into();
        let t = self.tol.unwrap_or(default_tol);
        self.report.tolerances.insert(name.clone(), t);
        self.report.identities_checked.push(IdentityCheck {
            name,
            anchor: anchor.into(),
            max_residual: rel,
            pass: !rel.is_nan() && rel <= t,
        });
    }

    fn rows(&mut self, rows: Vec<IdentityResidual>) {
        for r in rows {
            self.check(r.name, r.formula, r.residual, tol::IDENTITY);
        }
    }

    fn structural(&mut self, entries: Vec<Structural>) {
        for e in entries {
            self.report.residuals.insert(e.key.clone(), e.value);
            self.check_relative(e.key, e.anchor, e.value, tol::IDENTITY);
        }
    }

    fn component(&mut self, name: &str, role: Role, tensor: TensorFile) {
        self.report.components.push(NamedTensor { name: name.to_string(), role, tensor });
    }

    fn failure(&mut self, err: &Error) {
        let (what, res) = match err {
            Error::Invariant { what, residual, .. } | Error::RouteMismatch { what, residual, .. } => {
                (what.clone(), *residual)
            }
            other => (other.to_string(), f64::INFINITY),
        };
        self.check_relative(what, err.to_string(), res / self.scale, 0.0);
    }

    fn finish(self) -> DecompositionReport {
        self.report
    }
}

fn membership_checks(b: &mut Builder, entries: Vec<(&'static str, f64)>) -> bool {
    let mut ok = true;
    for (name, r) in entries {
        b.check(format!("input: {name}"), format!("input lies in the expected space ({name})"), r, tol::IDENTITY);
        ok &= b.report.identities_checked.last().is_some_and(|c| c.pass);
    }
    ok
}

/// Operations the structural residuals need from a component type.
trait Part: Sized + Clone {
    const KIND: Kind;
    fn load(f: &TensorFile) -> Result<Self>;
    fn save(&self) -> TensorFile;
    fn minus(&self, other: &Self) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn abs_max(&self) -> f64;
    fn member(&self) -> f64;
    fn traceless(&self) -> f64;
    fn pair(&self, other: &Self) -> f64;
}

macro_rules! part {
    ($t:ty, $kind:expr, $load:ident, $save:ident, $traceless:expr) => {
        impl Part for $t {
            const KIND: Kind = $kind;
            fn load(f: &TensorFile) -> Result<Self> {
                f.$load()
            }
            fn save(&self) -> TensorFile {
                TensorFile::$save(self)
            }
            fn minus(&self, other: &Self) -> Self {
                self - other
            }
            fn plus(&self, other: &Self) -> Self {
                self + other
            }
            fn abs_max(&self) -> f64 {
                self.max_abs()
            }
            fn member(&self) -> f64 {
                self.membership_residual()
            }
            fn traceless(&self) -> f64 {
                ($traceless)(self)
            }
            fn pair(&self, other: &Self) -> f64 {
                self.natural_pairing(other)
            }
        }
    };
}

part!(CurvatureTensor, Kind::Curvature, to_curvature, from_curvature, |t: &CurvatureTensor| t.max_trace());
part!(CovDerivTensor, Kind::CovDeriv, to_cov_deriv, from_cov_deriv, |t: &CovDerivTensor| t.max_trace());
part!(PrimTensor, Kind::PTensor, to_prim, from_prim, |t: &PrimTensor| ric_tilde(t).amax());

/// Components that must be totally trace-free (`Ric~`-free for `p0`).
const TRACE_FREE: [&str; 5] = ["weyl", "s0_prime", "bochner", "q0", "p0"];

struct Structural {
    key: String,
    anchor: String,
    value: f64,
}

fn structural<T: Part>(input: &T, parts: &[(&str, &T)]) -> Vec<Structural> {
    let sc = tol::scale(input.abs_max());
    let mut out = Vec::new();
    let sum = parts.iter().skip(1).fold(parts[0].1.clone(), |acc, (_, p)| acc.plus(p));
    let names: Vec<&str> = parts.iter().map(|(n, _)| *n).collect();
    out.push(Structural {
        key: "reconstruction".into(),
        anchor: format!("input = {}", names.join(" + ")),
        value: input.minus(&sum).abs_max() / sc,
    });
    for (name, p) in parts {
        out.push(Structural {
            key: format!("membership: {name}"),
            anchor: format!("{name} lies in the same space as the input"),
            value: p.member() / sc,
        });
        if TRACE_FREE.contains(name) {
            out.push(Structural {
                key: format!("trace-free: {name}"),
                anchor: format!("every contraction of {name} vanishes"),
                value: p.traceless() / sc,
            });
        }
    }
    for (i, (a, pa)) in parts.iter().enumerate() {
        for (b, pb) in &parts[i + 1..] {
            out.push(Structural {
                key: format!("pairing: {a}, {b}"),
                anchor: format!("⟨{a}, {b}⟩ = 0"),
                value: pa.pair(pb).abs() / (sc * sc),
            });
        }
    }
    out
}

fn add_parts<T: Part>(b: &mut Builder, input: &T, parts: &[(&str, &T)]) {
    for (name, p) in parts {
        b.component(name, Role::Part, p.save());
    }
    b.structural(structural(input, parts));
}

/// Decomposes a curvature, covariant-derivative or `P` tensor file.
pub fn decompose_file(input: &TensorFile, tol: Option<f64>, seed: Option<u64>) -> Result<DecompositionReport> {
    input.validate()?;
    let mut b = Builder::new("decompose", input, tol, seed);
    let kahler = input.context()?.is_kahler();
    match input.kind {
        Kind::Curvature => {
            let r = input.to_curvature()?;
            if !membership_checks(&mut b, r.membership()) {
                return Ok(b.finish());
            }
            let res = if kahler { decompose_curvature_kahler(&mut b, &r) } else { decompose_curvature(&mut b, &r) };
            absorb(&mut b, res)?;
        }
        Kind::CovDeriv => {
            let s = input.to_cov_deriv()?;
            if !membership_checks(&mut b, s.membership()) {
                return Ok(b.finish());
            }
            let res = if kahler { decompose_nabla_kahler(&mut b, &s) } else { decompose_nabla(&mut b, &s) };
            absorb(&mut b, res)?;
        }
        Kind::PTensor => {
            let p = input.to_prim()?;
            if !membership_checks(&mut b, p.membership()) {
                return Ok(b.finish());
            }
            let (p0, p1) = if kahler { p_split_u(&p)? } else { p_split_so(&p)? };
            add_parts(&mut b, &p, &[("p0", &p0), ("p1", &p1)]);
        }
        Kind::Sym2 | Kind::Vector => {
            return Err(Error::Input(format!("cannot decompose a {} file", input.kind.name())));
        }
    }
    Ok(b.finish())
}

/// Identity failures become failed checks; anything else is an input error.
fn absorb(b: &mut Builder, res: Result<()>) -> Result<()> {
    match res {
        Ok(()) => Ok(()),
        Err(e @ (Error::Invariant { .. } | Error::RouteMismatch { .. })) => {
            b.failure(&e);
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn decompose_curvature(b: &mut Builder, r: &CurvatureTensor) -> Result<()> {
    let d = riemann::decompose_curvature(r)?;
    add_parts(b, r, &d.components());
    let lg = sym_wedge(&d.schouten.as_endo(), r.ctx());
    b.check("schouten_form", "R = W + L∧g", (&d.weyl + &lg).max_diff(r), tol::IDENTITY);
    b.component("ricci", Role::Derived, TensorFile::from_sym2(&d.ric));
    b.component("schouten", Role::Derived, TensorFile::from_sym2(&d.schouten));
    Ok(())
}

fn decompose_curvature_kahler(b: &mut Builder, r: &CurvatureTensor) -> Result<()> {
    let d = kahler::decompose_curvature_kahler(r)?;
    add_parts(b, r, &d.components());
    let kg = sym_wedge_j_unchecked(&d.k.as_endo(), r.ctx());
    b.check("k_form", "R = B + K∧_J g", (&d.bochner + &kg).max_diff(r), tol::IDENTITY);
    b.component("ricci", Role::Derived, TensorFile::from_sym2(&d.ric));
    b.component("k", Role::Derived, TensorFile::from_sym2(&d.k));
    Ok(())
}

fn decompose_nabla(b: &mut Builder, s: &CovDerivTensor) -> Result<()> {
    let d = riemann::decompose_nabla_r(s)?;
    add_parts(b, s, &d.components());
    b.rows(riemann::trace_table(&d));
    b.rows(riemann::closed_form_residuals(&d)?);
    riemann_bianchi_checks(b, s)?;
    let (q, sy, a) = riemann::gray_split(&d.nabla_ric, &d.grad_s, &d.cotton, s.ctx())?;
    b.check(
        "gray_split",
        "∇Ric = ξ_Q + ξ_S + ξ_A",
        (&(&q + &sy) + &a).max_diff(&d.nabla_ric),
        tol::IDENTITY,
    );
    b.component("cotton", Role::Derived, TensorFile::from_prim(&d.cotton.as_prim()));
    b.component("grad_s", Role::Derived, TensorFile::from_vector(&d.grad_s, s.ctx()));
    Ok(())
}

fn riemann_bianchi_checks(b: &mut Builder, s: &CovDerivTensor) -> Result<()> {
    let w = riemann::check_second_bianchi_w(s)?;
    b.check(
        "second_bianchi_w",
        "Σ_cyc (∇_X W)(Y,Z,V,U) = -(1/(n-2)) Σ_cyc [C(U,X,Y)g(Z,V) - C(V,X,Y)g(Z,U)]",
        w.max_abs,
        tol::IDENTITY,
    );
    let a = riemann::cotton_from_divergence_route(s)?;
    let c = riemann::cotton_from_schouten_route(s)?;
    b.check("cotton_routes", "C from the divergence of S = C from ∇L", a.max_diff(&c), tol::IDENTITY);
    b.check(
        "cotton_weyl",
        "(n-3) C(X,Y,Z) = (n-2) g^{ij}(∇_{X_i}W)(Y,Z,X,X_j)",
        riemann::cotton_weyl_residual(s)?,
        tol::IDENTITY,
    );
    Ok(())
}

fn decompose_nabla_kahler(b: &mut Builder, s: &CovDerivTensor) -> Result<()> {
    let d = kahler::decompose_nabla_r_kahler(s)?;
    add_parts(b, s, &d.components());
    b.rows(kahler::trace_table(&d)?);
    b.rows(kahler::closed_form_residuals(&d)?);
    kahler_bianchi_checks(b, s)?;
    let split = kahler::nabla_ric_kahler(s)?;
    b.check(
        "nabla_ric_j_cyclic",
        "∇Ric(J·,·) satisfies the cyclic identity",
        split.nabla_ric_j.cyclic_residual(),
        tol::IDENTITY,
    );
    b.component("d", Role::Derived, TensorFile::from_prim(&d.d_tensor));
    b.component("grad_s", Role::Derived, TensorFile::from_vector(&d.grad_s, s.ctx()));
    Ok(())
}

fn kahler_bianchi_checks(b: &mut Builder, s: &CovDerivTensor) -> Result<()> {
    let r = kahler::check_second_bianchi_b(s)?;
    b.check(
        "second_bianchi_b",
        "Σ_cyc g((∇_X B)(Y,Z)V,U) = (1/(2(n+2))) Σ_cyc [D(h(Z,V)U,X,Y) + D(h(Z,U)V,Y,X) - 2g(JX,Y)D(JZ,V,U)]",
        r.max_abs,
        tol::IDENTITY,
    );
    let d = kahler::d_tensor_raw(s)?;
    b.check("ric_tilde_d", "Ric~(D) = 0", ric_tilde(&d).amax(), tol::IDENTITY);
    let db = kahler::d_from_nabla_bochner(&kahler::nabla_bochner(s)?)?;
    b.check(
        "d_from_nabla_bochner",
        "D(Z,X,Y) = ((n+2)/n) g(g^{ab}(∇_{X_a}B)(Z,X_b)Y, X)",
        d.as_tensor3().max_diff(&db),
        tol::IDENTITY,
    );
    let split_res = kahler::nabla_ric_kahler(s).map(|sp| sp.nabla_ric.max_diff(&trace_2_4(s)));
    if let Err(e) = split_res {
        b.failure(&e);
    }
    Ok(())
}

/// Membership and Bianchi-type identities of a file, without decomposing it.
pub fn verify_file(input: &TensorFile, tol: Option<f64>) -> Result<DecompositionReport> {
    input.validate()?;
    let mut b = Builder::new("verify", input, tol, None);
    let ctx = input.context()?;
    match input.kind {
        Kind::Curvature => {
            membership_checks(&mut b, input.to_curvature()?.membership());
        }
        Kind::PTensor => {
            membership_checks(&mut b, input.to_prim()?.membership());
        }
        Kind::CovDeriv => {
            let s = input.to_cov_deriv()?;
            if membership_checks(&mut b, s.membership()) {
                let res = if ctx.is_kahler() {
                    if ctx.n() >= 2 {
                        kahler_bianchi_checks(&mut b, &s)
                    } else {
                        Ok(())
                    }
                } else if ctx.dim() >= 3 {
                    riemann_bianchi_checks(&mut b, &s)
                } else {
                    Ok(())
                };
                absorb(&mut b, res)?;
            }
        }
        Kind::Sym2 | Kind::Vector => {
            return Err(Error::Input(format!("nothing to verify in a {} file", input.kind.name())));
        }
    }
    Ok(b.finish())
}

fn recompute<T: Part>(report: &DecompositionReport, input: &TensorFile) -> Result<BTreeMap<String, f64>> {
    let x = T::load(input)?;
    let parts = report
        .components
        .iter()
        .filter(|c| c.role == Role::Part)
        .map(|c| {
            if c.tensor.kind != T::KIND {
                return Err(Error::Input(format!("component {} has kind {}", c.name, c.tensor.kind.name())));
            }
            Ok((c.name.as_str(), T::load(&c.tensor)?))
        })
        .collect::<Result<Vec<_>>>()?;
    if parts.is_empty() {
        return Ok(BTreeMap::new());
    }
    let refs: Vec<(&str, &T)> = parts.iter().map(|(n, p)| (*n, p)).collect();
    Ok(structural(&x, &refs).into_iter().map(|e| (e.key, e.value)).collect())
}

/// Recomputes the component residuals of a report from its emitted tensors and
/// returns the largest deviation from the recorded values.
pub fn recheck(report: &DecompositionReport) -> Result<f64> {
    let input = report
        .components
        .iter()
        .find(|c| c.role == Role::Input)
        .map(|c| &c.tensor)
        .ok_or_else(|| Error::Input("report has no input component".into()))?;
    let fresh = match input.kind {
        Kind::Curvature => recompute::<CurvatureTensor>(report, input)?,
        Kind::CovDeriv => recompute::<CovDerivTensor>(report, input)?,
        Kind::PTensor => recompute::<PrimTensor>(report, input)?,
        Kind::Sym2 | Kind::Vector => BTreeMap::new(),
    };
    if fresh.keys().ne(report.residuals.keys()) {
        return Err(Error::Input("report residual names do not match its components".into()));
    }
    Ok(fresh.iter().map(|(k, v)| (v - report.residuals[k]).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{random_element, Space};
    use crate::MetricContext;

    fn file(space: Space, ctx: &MetricContext, seed: u64) -> TensorFile {
        match random_element(space, ctx, seed).unwrap() {
            crate::Element::Curvature(r) => TensorFile::from_curvature(&r),
            crate::Element::CovDeriv(s) => TensorFile::from_cov_deriv(&s),
            crate::Element::Prim(p) => TensorFile::from_prim(&p),
        }
    }

    #[test]
    fn riemann_nabla_report_passes_and_rechecks() {
        let f = file(Space::RNablaSo, &MetricContext::riemann(0, 5).unwrap(), 7);
        let r = decompose_file(&f, None, Some(7)).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert_eq!(r.components.iter().filter(|c| c.role == Role::Part).count(), 4);
        assert!(r.residuals["reconstruction"] < 1e-10);
        let back = DecompositionReport::from_json(&r.to_json().unwrap()).unwrap();
        assert!(recheck(&back).unwrap() <= 1e-14);
        assert_eq!(back, r);
    }

    #[test]
    fn every_kind_and_geometry_decomposes() {
        let cases = [
            (Space::RSo, MetricContext::riemann(1, 3).unwrap()),
            (Space::PSo, MetricContext::riemann(1, 3).unwrap()),
            (Space::RU, MetricContext::kahler(1, 1).unwrap()),
            (Space::RNablaU, MetricContext::kahler(0, 2).unwrap()),
            (Space::PU, MetricContext::kahler(0, 2).unwrap()),
        ];
        for (sp, c) in cases {
            let r = decompose_file(&file(sp, &c, 2), None, None).unwrap();
            assert!(r.passed(), "{sp}: {:?}", r.failures());
            assert!(recheck(&r).unwrap() <= 1e-14);
            assert!(verify_file(&file(sp, &c, 2), None).unwrap().passed());
        }
    }

    #[test]
    fn zero_tensor_gives_zero_components() {
        let c = MetricContext::riemann(0, 4).unwrap();
        let f = TensorFile::from_cov_deriv(&CovDerivTensor::zeros(&c));
        let r = decompose_file(&f, None, None).unwrap();
        assert!(r.passed());
        for comp in r.components.iter().filter(|c| c.role == Role::Part) {
            assert!(comp.tensor.data.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn corruption_is_named() {
        let mut f = file(Space::RNablaSo, &MetricContext::riemann(0, 5).unwrap(), 3);
        let k = f.data.iter().position(|v| v.abs() > 0.1).unwrap();
        f.data[k] *= 1.1;
        let r = decompose_file(&f, None, None).unwrap();
        assert!(!r.passed());
        assert!(r.failures().iter().any(|c| c.name.starts_with("input: ")));
        assert!(!verify_file(&f, None).unwrap().passed());
    }

    #[test]
    fn tolerance_override_applies_everywhere() {
        let f = file(Space::RSo, &MetricContext::riemann(0, 4).unwrap(), 1);
        let r = decompose_file(&f, Some(0.0), None).unwrap();
        assert!(r.tolerances.values().all(|t| *t == 0.0));
        for c in &r.identities_checked {
            assert_eq!(c.pass, c.max_residual <= 0.0);
        }
    }

    #[test]
    fn unsupported_kinds_are_input_errors() {
        let c = MetricContext::riemann(0, 3).unwrap();
        let v = TensorFile::from_vector(&crate::metric::Vector::zeros(3), &c);
        assert!(matches!(decompose_file(&v, None, None), Err(Error::Input(_))));
        assert!(matches!(verify_file(&v, None), Err(Error::Input(_))));
    }
}
