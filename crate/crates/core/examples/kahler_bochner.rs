//! `R = B + Ric⁰∧_J g/(2(n+2)) + s ½Id∧_J g/(4n(n+1))` on a pseudo-Kähler space
//! of complex signature (1,2).
//!
//!     cargo run --example kahler_bochner

use curvdec::kahler::decompose_curvature_kahler;
use curvdec::spaces::random_element;
use curvdec::{MetricContext, Space};

fn main() -> curvdec::Result<()> {
    let ctx = MetricContext::kahler(1, 2)?;
    let r = random_element(Space::RU, &ctx, 3)?.into_curvature().expect("curvature");
    println!("R commutes with J up to {:.1e}", r.kahler_residual());

    let dec = decompose_curvature_kahler(&r)?;
    println!("s = {:.6}", dec.s);
    for (name, part) in dec.components() {
        println!(
            "{name:<12} max |coeff| {:.4e}  membership {:.1e}  max trace {:.1e}",
            part.max_abs(),
            part.membership_residual(),
            part.max_trace()
        );
    }
    println!("reconstruction error {:.2e}", dec.sum().max_diff(&r));
    Ok(())
}
