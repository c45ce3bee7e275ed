//! Self-dual and anti-self-dual parts in dimension 4, for the curvature and for
//! its covariant derivative, in signatures (0,4) and (2,2).
//!
//!     cargo run --example four_dim_split

use curvdec::riemann::{decompose_curvature, decompose_nabla_r, split_plus_minus_curvature, split_plus_minus_nabla};
use curvdec::spaces::random_element;
use curvdec::{MetricContext, Space};

fn main() -> curvdec::Result<()> {
    for (p, q) in [(0, 4), (2, 2)] {
        let ctx = MetricContext::riemann(p, q)?;
        let r = random_element(Space::RSo, &ctx, 21)?.into_curvature().expect("curvature");
        let dec = decompose_curvature(&r)?;
        let w = split_plus_minus_curvature(&dec)?;
        println!("signature ({p},{q})");
        println!("  |W⁺| {:.4e}  |W⁻| {:.4e}", w.plus.max_abs(), w.minus.max_abs());
        println!("  W⁺ + W⁻ - W: {:.2e}", (&w.plus + &w.minus).max_diff(&dec.weyl));
        println!("  <W⁺, W⁻> = {:.2e}", w.plus.natural_pairing(&w.minus));

        let s = random_element(Space::RNablaSo, &ctx, 22)?.into_cov_deriv().expect("cov_deriv");
        let nd = decompose_nabla_r(&s)?;
        let ns = split_plus_minus_nabla(&nd)?;
        println!("  ∇W⁺ + ∇W⁻ - ∇W: {:.2e}", (&ns.nabla_weyl_plus + &ns.nabla_weyl_minus).max_diff(&nd.nabla_weyl));
        println!("  C⁺ + C⁻ - C: {:.2e}", (&ns.cotton_plus + &ns.cotton_minus).max_diff(&nd.cotton));
        println!("  S₀′⁺ + S₀′⁻ - S₀′: {:.2e}", (&ns.s0_prime_plus + &ns.s0_prime_minus).max_diff(&nd.s0_prime));
        println!("  S′⁺ + S′⁻ - S′: {:.2e}", (&ns.s_prime_plus + &ns.s_prime_minus).max_diff(&nd.s_prime));
    }
    Ok(())
}
