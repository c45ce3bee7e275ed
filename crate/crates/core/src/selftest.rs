//! Seeded acceptance criteria 1–10, shared by `curvdec selftest` and the
//! acceptance test target.

use std::fmt;

use crate::coeffs::Coeffs;
use crate::error::Result;
use crate::io::TensorFile;
use crate::kahler::{self, psi_combination};
use crate::metric::MetricContext;
use crate::report::{decompose_file, Role};
use crate::riemann::{self, phi1, phi2};
use crate::spaces::{
    p_split_so, p_split_u, random_element, space_dimension, trace_1_5_kernel_dimension, trace_1_5_raw, Space,
};
use crate::tensors::{CovDerivTensor, CurvatureTensor, PrimTensor};
use crate::tol;

pub const DEFAULT_SEEDS: std::ops::RangeInclusive<u64> = 1..=20;

#[derive(Clone, Debug)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    /// Largest residual-to-tolerance ratio among the `≤` checks.
    pub worst_ratio: f64,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<34} {} ({} checks, worst residual/tolerance {:.2e})",
            self.id,
            self.title,
            if self.pass { "PASS" } else { "FAIL" },
            self.checks,
            self.worst_ratio
        )?;
        for msg in self.failures.iter().take(5) {
            write!(f, "\n    {msg}")?;
        }
        if self.failures.len() > 5 {
            write!(f, "\n    ... {} more", self.failures.len() - 5)?;
        }
        Ok(())
    }
}

pub const TITLES: [&str; 10] = [
    "reconstruction (Riemannian)",
    "reconstruction (Kähler)",
    "trace identities of Φ and Ψ",
    "trace tables",
    "second Bianchi for W and B",
    "membership of components",
    "idempotence",
    "dimension oracle",
    "specializations n=3 and n=4",
    "dual-route agreement",
];

struct Acc {
    tol: Option<f64>,
    worst: f64,
    checks: usize,
    failures: Vec<String>,
}

impl Acc {
    fn le(&mut self, what: impl FnOnce() -> String, value: f64, default_tol: f64) {
        let t = self.tol.unwrap_or(default_tol);
        self.checks += 1;
        let ratio = if t > 0.0 { value / t } else if value == 0.0 { 0.0 } else { f64::INFINITY };
        self.worst = self.worst.max(ratio);
        if value.is_nan() || value > t {
            self.failures.push(format!("{}: {value:.3e} > {t:.1e}", what()));
        }
    }

    fn gt(&mut self, what: impl FnOnce() -> String, value: f64, floor: f64) {
        self.checks += 1;
        if value.is_nan() || value <= floor {
            self.failures.push(format!("{}: {value:.3e} ≤ {floor:.1e}", what()));
        }
    }

    fn eq(&mut self, what: impl FnOnce() -> String, got: usize, want: usize) {
        self.checks += 1;
        if got != want {
            self.failures.push(format!("{}: {got} ≠ {want}", what()));
        }
    }

    fn run(&mut self, what: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.checks += 1;
            self.failures.push(format!("{what}: {e}"));
        }
    }
}

const RIEMANN_SIGS: [(usize, usize); 5] = [(0, 5), (0, 6), (1, 4), (2, 3), (0, 7)];
const KAHLER_SIGS: [(usize, usize); 4] = [(0, 2), (0, 3), (1, 1), (1, 2)];

fn riem(p: usize, q: usize) -> Result<MetricContext> {
    MetricContext::riemann(p, q)
}

fn kah(p: usize, q: usize) -> Result<MetricContext> {
    MetricContext::kahler(p, q)
}

fn curvature(space: Space, ctx: &MetricContext, seed: u64) -> Result<CurvatureTensor> {
    Ok(random_element(space, ctx, seed)?.into_curvature().expect("curvature space"))
}

fn cov_deriv(space: Space, ctx: &MetricContext, seed: u64) -> Result<CovDerivTensor> {
    Ok(random_element(space, ctx, seed)?.into_cov_deriv().expect("covariant derivative space"))
}

fn prim(space: Space, ctx: &MetricContext, seed: u64) -> Result<PrimTensor> {
    Ok(random_element(space, ctx, seed)?.into_prim().expect("P space"))
}

fn rel(abs: f64, of: f64) -> f64 {
    abs / tol::scale(of)
}

fn c1(a: &mut Acc, seeds: &[u64]) {
    for (p, q) in RIEMANN_SIGS {
        for &seed in seeds {
            a.run(&format!("({p},{q}) seed {seed}"), |a| {
                let c = riem(p, q)?;
                let r = curvature(Space::RSo, &c, seed)?;
                let d = riemann::decompose_curvature(&r)?;
                a.le(|| format!("R ({p},{q}) seed {seed}"), rel(d.sum().max_diff(&r), r.max_abs()), tol::IDENTITY);
                let s = cov_deriv(Space::RNablaSo, &c, seed)?;
                let d = riemann::decompose_nabla_r(&s)?;
                a.le(|| format!("∇R ({p},{q}) seed {seed}"), rel(d.sum().max_diff(&s), s.max_abs()), tol::IDENTITY);
                Ok(())
            });
        }
    }
}

fn c2(a: &mut Acc, seeds: &[u64]) {
    for (p, q) in KAHLER_SIGS {
        for &seed in seeds {
            a.run(&format!("({p},{q}) seed {seed}"), |a| {
                let c = kah(p, q)?;
                let r = curvature(Space::RU, &c, seed)?;
                let d = kahler::decompose_curvature_kahler(&r)?;
                a.le(|| format!("R ({p},{q}) seed {seed}"), rel(d.sum().max_diff(&r), r.max_abs()), tol::IDENTITY);
                let s = cov_deriv(Space::RNablaU, &c, seed)?;
                let d = kahler::decompose_nabla_r_kahler(&s)?;
                a.le(|| format!("∇R ({p},{q}) seed {seed}"), rel(d.sum().max_diff(&s), s.max_abs()), tol::IDENTITY);
                Ok(())
            });
        }
    }
}

fn c3(a: &mut Acc, seeds: &[u64]) {
    let tr = |s: CovDerivTensor| trace_1_5_raw(&s);
    for (p, q) in [(0, 5), (2, 3)] {
        for &seed in seeds {
            a.run(&format!("P_SO ({p},{q}) seed {seed}"), |a| {
                let c = riem(p, q)?;
                let n = c.dim() as f64;
                let x = prim(Space::PSo, &c, seed)?;
                let (p0, p1) = p_split_so(&x)?;
                let sc = x.max_abs();
                a.le(|| format!("tr Φ₁(P₀) = -3P₀ seed {seed}"), rel(tr(phi1(&p0)?).max_diff(&(&p0 * -3.0)), sc), tol::IDENTITY);
                let want = &p1 * (n - 4.0);
                a.le(|| format!("tr Φ₁(P₁) = (n-4)P₁ seed {seed}"), rel(tr(phi1(&p1)?).max_diff(&want), sc), tol::IDENTITY);
                a.le(|| format!("tr Φ₂(P) = -nP seed {seed}"), rel(tr(phi2(&x)?).max_diff(&(&x * -n)), sc), tol::IDENTITY);
                Ok(())
            });
        }
    }
    for (p, q) in [(0, 2), (1, 2)] {
        for &seed in seeds {
            a.run(&format!("P_U ({p},{q}) seed {seed}"), |a| {
                let c = kah(p, q)?;
                let n = c.n() as f64;
                let x = prim(Space::PU, &c, seed)?;
                let (p0, p1) = p_split_u(&x)?;
                let sc = x.max_abs();
                let w0 = &p0 * (2.0 * (n + 3.0));
                let w1 = &p1 * (4.0 * (n + 2.0));
                let r0 = tr(psi_combination(&p0)?).max_diff(&w0);
                let r1 = tr(psi_combination(&p1)?).max_diff(&w1);
                a.le(|| format!("tr (Ψ₁-Ψ₂)(P₀) = 2(n+3)P₀ seed {seed}"), rel(r0, sc), tol::IDENTITY);
                a.le(|| format!("tr (Ψ₁-Ψ₂)(P₁) = 4(n+2)P₁ seed {seed}"), rel(r1, sc), tol::IDENTITY);
                Ok(())
            });
        }
    }
}

fn c4(a: &mut Acc, seeds: &[u64]) {
    for (p, q) in [(0, 5), (1, 4)] {
        for &seed in seeds {
            a.run(&format!("so ({p},{q}) seed {seed}"), |a| {
                let s = cov_deriv(Space::RNablaSo, &riem(p, q)?, seed)?;
                let d = riemann::decompose_nabla_r(&s)?;
                for row in riemann::trace_table(&d) {
                    a.le(|| format!("{} ({p},{q}) seed {seed}", row.name), rel(row.residual, s.max_abs()), tol::IDENTITY);
                }
                Ok(())
            });
        }
    }
    for (p, q) in [(0, 2), (1, 2)] {
        for &seed in seeds {
            a.run(&format!("u ({p},{q}) seed {seed}"), |a| {
                let s = cov_deriv(Space::RNablaU, &kah(p, q)?, seed)?;
                let d = kahler::decompose_nabla_r_kahler(&s)?;
                for row in kahler::trace_table(&d)? {
                    a.le(|| format!("{} ({p},{q}) seed {seed}", row.name), rel(row.residual, s.max_abs()), tol::IDENTITY);
                }
                Ok(())
            });
        }
    }
}

fn corrupt(s: &CovDerivTensor, seed: u64) -> Result<CovDerivTensor> {
    let mut x: Coeffs<5> = s.clone().into_coeffs();
    let len = x.as_slice().len();
    x.as_mut_slice()[(seed as usize).wrapping_mul(7919) % len] += 1e-3;
    CovDerivTensor::new(s.ctx(), x)
}

fn c5(a: &mut Acc, seeds: &[u64]) {
    for n in [5, 6] {
        for &seed in seeds {
            a.run(&format!("so({n}) seed {seed}"), |a| {
                let s = cov_deriv(Space::RNablaSo, &riem(0, n)?, seed)?;
                a.le(|| format!("2BW so({n}) seed {seed}"), riemann::check_second_bianchi_w(&s)?.relative(), tol::IDENTITY);
                let bad = riemann::check_second_bianchi_w(&corrupt(&s, seed)?)?.relative();
                a.gt(|| format!("2BW flags corruption so({n}) seed {seed}"), bad, 1e-5);
                Ok(())
            });
        }
    }
    for n in [2, 3] {
        for &seed in seeds {
            a.run(&format!("u({n}) seed {seed}"), |a| {
                let s = cov_deriv(Space::RNablaU, &kah(0, n)?, seed)?;
                a.le(|| format!("∇B Bianchi u({n}) seed {seed}"), kahler::check_second_bianchi_b(&s)?.relative(), tol::IDENTITY);
                let bad = kahler::check_second_bianchi_b(&corrupt(&s, seed)?)?.relative();
                a.gt(|| format!("∇B Bianchi flags corruption u({n}) seed {seed}"), bad, 1e-5);
                Ok(())
            });
        }
    }
}

fn tensor_file(space: Space, ctx: &MetricContext, seed: u64) -> Result<TensorFile> {
    Ok(match random_element(space, ctx, seed)? {
        crate::Element::Curvature(r) => TensorFile::from_curvature(&r),
        crate::Element::CovDeriv(s) => TensorFile::from_cov_deriv(&s),
        crate::Element::Prim(p) => TensorFile::from_prim(&p),
    })
}

const COMPONENT_CASES: [(Space, bool, usize, usize); 6] = [
    (Space::RSo, false, 0, 5),
    (Space::RSo, false, 1, 4),
    (Space::RNablaSo, false, 0, 5),
    (Space::RNablaSo, false, 2, 3),
    (Space::RU, true, 1, 2),
    (Space::RNablaU, true, 1, 1),
];

fn context(kahler: bool, p: usize, q: usize) -> Result<MetricContext> {
    if kahler {
        kah(p, q)
    } else {
        riem(p, q)
    }
}

fn c6(a: &mut Acc, seeds: &[u64]) {
    for (space, k, p, q) in COMPONENT_CASES.into_iter().chain([(Space::RNablaU, true, 0, 3)]) {
        for &seed in seeds {
            a.run(&format!("{space} ({p},{q}) seed {seed}"), |a| {
                let f = tensor_file(space, &context(k, p, q)?, seed)?;
                let r = decompose_file(&f, None, Some(seed))?;
                for (key, v) in &r.residuals {
                    if key != "reconstruction" {
                        a.le(|| format!("{key} {space} ({p},{q}) seed {seed}"), *v, tol::IDENTITY);
                    }
                }
                Ok(())
            });
        }
    }
}

fn c7(a: &mut Acc, seeds: &[u64]) {
    for (space, k, p, q) in COMPONENT_CASES {
        for &seed in seeds {
            a.run(&format!("{space} ({p},{q}) seed {seed}"), |a| {
                let f = tensor_file(space, &context(k, p, q)?, seed)?;
                let sc = tol::scale(f.data.iter().fold(0.0f64, |m, v| m.max(v.abs())));
                let r = decompose_file(&f, None, None)?;
                for part in r.components.iter().filter(|c| c.role == Role::Part) {
                    let again = decompose_file(&part.tensor, None, None)?;
                    for other in again.components.iter().filter(|c| c.role == Role::Part) {
                        let diff = if other.name == part.name {
                            max_diff(&other.tensor.data, &part.tensor.data)
                        } else {
                            max_diff(&other.tensor.data, &[])
                        };
                        a.le(
                            || format!("{} of {} {space} ({p},{q}) seed {seed}", other.name, part.name),
                            diff / sc,
                            tol::IDENTITY,
                        );
                    }
                }
                Ok(())
            });
        }
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().enumerate().map(|(k, x)| (x - b.get(k).copied().unwrap_or(0.0)).abs()).fold(0.0, f64::max)
}

fn c8(a: &mut Acc) {
    a.run("dimension oracle", |a| {
        for (n, want) in [(3, 6), (4, 20), (5, 50)] {
            let got = space_dimension(Space::RSo, &riem(0, n)?)?;
            a.eq(|| format!("dim R(so({n}))"), got, want);
            a.eq(|| format!("dim R(so({n})) vs n²(n²-1)/12"), got, n * n * (n * n - 1) / 12);
        }
        let c5 = riem(0, 5)?;
        let p5 = space_dimension(Space::PSo, &c5)?;
        a.eq(|| "dim P(so(5))".into(), p5, 40);
        a.eq(|| "dim P(so(5)) vs n(n²-1)/3".into(), p5, 5 * (25 - 1) / 3);
        let u2 = space_dimension(Space::RNablaU, &kah(1, 1)?)?;
        a.eq(|| "dim R^∇(u(1,1))".into(), u2, 24);
        a.eq(|| "dim R^∇(u(2)) vs 6·2 + 4·2 + 4".into(), space_dimension(Space::RNablaU, &kah(0, 2)?)?, 6 * 2 + 4 * 2 + 4);
        let total = space_dimension(Space::RNablaSo, &c5)?;
        let split = trace_1_5_kernel_dimension(&c5)? + p5;
        a.eq(|| "dim R^∇(so(5)) = dim ker tr₁₅ + dim P(so(5))".into(), total, split);
        Ok(())
    });
}

fn c9(a: &mut Acc, seeds: &[u64]) {
    for (p, q) in [(0, 3), (1, 2)] {
        for &seed in seeds {
            a.run(&format!("n=3 ({p},{q}) seed {seed}"), |a| {
                let c = riem(p, q)?;
                let r = curvature(Space::RSo, &c, seed)?;
                let w = riemann::decompose_curvature(&r)?.weyl;
                a.le(|| format!("W = 0 ({p},{q}) seed {seed}"), rel(w.max_abs(), r.max_abs()), 1e-11);
                let s = cov_deriv(Space::RNablaSo, &c, seed)?;
                let d = riemann::decompose_nabla_r(&s)?;
                a.le(|| format!("S₀′ = 0 ({p},{q}) seed {seed}"), rel(d.s0_prime.max_abs(), s.max_abs()), 1e-11);
                let f1 = riemann::phi1_from_cotton(&d.cotton)?;
                let f2 = phi2(&d.p0)?;
                a.le(|| format!("φ₁ = φ₂ ({p},{q}) seed {seed}"), rel(f1.max_diff(&f2), s.max_abs()), 1e-11);
                Ok(())
            });
        }
    }
    for (p, q) in [(0, 4), (2, 2)] {
        for &seed in seeds {
            a.run(&format!("n=4 ({p},{q}) seed {seed}"), |a| {
                let c = riem(p, q)?;
                let r = curvature(Space::RSo, &c, seed)?;
                let d = riemann::decompose_curvature(&r)?;
                let w = riemann::split_plus_minus_curvature(&d)?;
                let sc = r.max_abs();
                a.le(|| format!("W⁺ + W⁻ = W ({p},{q}) seed {seed}"), rel((&w.plus + &w.minus).max_diff(&d.weyl), sc), 1e-11);
                let star = riemann::star_second_slot(&w.plus)?;
                a.le(|| format!("⋆W⁺ = W⁺ ({p},{q}) seed {seed}"), rel(star.max_diff(&w.plus), sc), 1e-11);
                let s = cov_deriv(Space::RNablaSo, &c, seed)?;
                let d = riemann::decompose_nabla_r(&s)?;
                let sp = riemann::split_plus_minus_nabla(&d)?;
                let sc = s.max_abs();
                let cr = (&sp.cotton_plus + &sp.cotton_minus).max_diff(&d.cotton);
                let s0 = (&sp.s0_prime_plus + &sp.s0_prime_minus).max_diff(&d.s0_prime);
                a.le(|| format!("C⁺ + C⁻ = C ({p},{q}) seed {seed}"), rel(cr, sc), 1e-11);
                a.le(|| format!("S₀′⁺ + S₀′⁻ = S₀′ ({p},{q}) seed {seed}"), rel(s0, sc), 1e-11);
                Ok(())
            });
        }
    }
}

fn c10(a: &mut Acc, seeds: &[u64]) {
    for (p, q) in [(0, 5), (1, 4), (0, 6)] {
        for &seed in seeds {
            a.run(&format!("Cotton ({p},{q}) seed {seed}"), |a| {
                let s = cov_deriv(Space::RNablaSo, &riem(p, q)?, seed)?;
                let x = riemann::cotton_from_divergence_route(&s)?;
                let y = riemann::cotton_from_schouten_route(&s)?;
                a.le(|| format!("Cotton routes ({p},{q}) seed {seed}"), rel(x.max_diff(&y), s.max_abs()), tol::IDENTITY);
                Ok(())
            });
        }
    }
    for (p, q) in [(0, 2), (0, 3), (1, 2)] {
        for &seed in seeds {
            a.run(&format!("D ({p},{q}) seed {seed}"), |a| {
                let s = cov_deriv(Space::RNablaU, &kah(p, q)?, seed)?;
                let d = kahler::d_tensor_of(&s)?;
                let db = kahler::d_from_nabla_bochner(&kahler::nabla_bochner(&s)?)?;
                a.le(|| format!("D routes ({p},{q}) seed {seed}"), rel(d.as_tensor3().max_diff(&db), s.max_abs()), tol::IDENTITY);
                Ok(())
            });
        }
    }
}

/// Runs one criterion (1–10).
pub fn run_criterion(id: u8, seeds: &[u64], tol: Option<f64>) -> Criterion {
    let mut a = Acc { tol, worst: 0.0, checks: 0, failures: Vec::new() };
    match id {
        1 => c1(&mut a, seeds),
        2 => c2(&mut a, seeds),
        3 => c3(&mut a, seeds),
        4 => c4(&mut a, seeds),
        5 => c5(&mut a, seeds),
        6 => c6(&mut a, seeds),
        7 => c7(&mut a, seeds),
        8 => c8(&mut a),
        9 => c9(&mut a, seeds),
        10 => c10(&mut a, seeds),
        _ => a.failures.push(format!("no criterion {id}")),
    }
    let title = TITLES.get(usize::from(id).wrapping_sub(1)).copied().unwrap_or("unknown");
    Criterion {
        id,
        title,
        pass: a.failures.is_empty() && a.checks > 0,
        worst_ratio: a.worst,
        checks: a.checks,
        failures: a.failures,
    }
}

/// Runs criteria 1–10 on independent threads.
pub fn run_all(seeds: &[u64], tol: Option<f64>) -> Vec<Criterion> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (1..=10u8).map(|id| scope.spawn(move || run_criterion(id, seeds, tol))).collect();
        handles
            .into_iter()
            .zip(1..=10u8)
            .map(|(h, id)| {
                h.join().unwrap_or_else(|_| Criterion {
                    id,
                    title: TITLES[usize::from(id) - 1],
                    pass: false,
                    worst_ratio: f64::INFINITY,
                    checks: 0,
                    failures: vec!["criterion panicked".into()],
                })
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass_on_one_seed() {
        for id in [3, 5, 8, 10] {
            let c = run_criterion(id, &[1], None);
            assert!(c.pass, "{c}");
        }
    }

    #[test]
    fn zero_tolerance_fails_loudly() {
        let c = run_criterion(10, &[1], Some(0.0));
        assert!(!c.pass);
        assert!(c.to_string().contains("FAIL"));
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run_criterion(42, &[1], None).pass);
    }
}
