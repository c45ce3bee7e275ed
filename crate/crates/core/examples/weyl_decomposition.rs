//! `R = W + Ric⁰∧g/(n-2) + s g∧g/(2n(n-1))` for a random curvature tensor of
//! signature (2,3).
//!
//!     cargo run --example weyl_decomposition

use curvdec::riemann::decompose_curvature;
use curvdec::spaces::random_element;
use curvdec::{MetricContext, Space};

fn main() -> curvdec::Result<()> {
    let ctx = MetricContext::riemann(2, 3)?;
    let r = random_element(Space::RSo, &ctx, 11)?.into_curvature().expect("curvature");
    let dec = decompose_curvature(&r)?;

    println!("s = {:.6}", dec.s);
    println!("{:<12} {:>12} {:>12} {:>12}", "part", "max |coeff|", "membership", "max trace");
    for (name, part) in dec.components() {
        println!("{name:<12} {:>12.4e} {:>12.2e} {:>12.2e}", part.max_abs(), part.membership_residual(), part.max_trace());
    }
    println!("reconstruction error {:.2e}", dec.sum().max_diff(&r));
    println!("<W, Ric⁰ part> = {:.2e}", dec.weyl.natural_pairing(&dec.ric0_part));
    println!("<W, scalar part> = {:.2e}", dec.weyl.natural_pairing(&dec.scalar_part));
    Ok(())
}
