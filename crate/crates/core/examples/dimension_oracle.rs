//! Rank-oracle dimensions of the curvature spaces, with closed-form cross-checks.
//!
//!     cargo run --example dimension_oracle

use curvdec::spaces::{space_dimension, trace_1_5_kernel_dimension};
use curvdec::{MetricContext, Space};
use std::time::Instant;

fn main() -> curvdec::Result<()> {
    println!("{:<10} {:>3} {:>6} {:>9}", "space", "n", "dim", "expected");
    for n in 2..=7 {
        let ctx = MetricContext::riemann(0, n)?;
        let r = space_dimension(Space::RSo, &ctx)?;
        println!("{:<10} {:>3} {:>6} {:>9}", "R_SO", n, r, n * n * (n * n - 1) / 12);
    }
    for n in 2..=7 {
        let ctx = MetricContext::riemann(0, n)?;
        let p = space_dimension(Space::PSo, &ctx)?;
        println!("{:<10} {:>3} {:>6} {:>9}", "P_SO", n, p, n * n * (n - 1) / 2 - n * (n - 1) * (n - 2) / 6);
    }
    for n in 3..=7 {
        let t = Instant::now();
        let ctx = MetricContext::riemann(0, n)?;
        let s = space_dimension(Space::RNablaSo, &ctx)?;
        let k = trace_1_5_kernel_dimension(&ctx)?;
        let p = space_dimension(Space::PSo, &ctx)?;
        println!("{:<10} {:>3} {:>6} {:>9}   ker tr15 = {k}, ({:.2?})", "RNABLA_SO", n, s, k + p, t.elapsed());
    }
    for n in 1..=3 {
        let t = Instant::now();
        let ctx = MetricContext::kahler(0, n)?;
        let r = space_dimension(Space::RU, &ctx)?;
        let s = space_dimension(Space::RNablaU, &ctx)?;
        let p = space_dimension(Space::PU, &ctx)?;
        let k = trace_1_5_kernel_dimension(&ctx)?;
        println!("R_U n={n}: {r}  P_U: {p}  RNABLA_U: {s} = ker {k} + {p}  ({:.2?})", t.elapsed());
    }
    Ok(())
}
