//! `∇R = Q₀ + Q′ + Q₁` on `C^{0,3}`, the split of `∇Ric` through `D` and
//! `grad s`, and the second Bianchi identity for the Bochner part.
//!
//!     cargo run --example nabla_r_kahler

use curvdec::kahler::{check_second_bianchi_b, closed_form_residuals, decompose_nabla_r_kahler, nabla_ric_kahler, trace_table};
use curvdec::spaces::random_element;
use curvdec::{MetricContext, Space};

fn main() -> curvdec::Result<()> {
    let ctx = MetricContext::kahler(0, 3)?;
    let s = random_element(Space::RNablaU, &ctx, 8)?.into_cov_deriv().expect("cov_deriv");
    let dec = decompose_nabla_r_kahler(&s)?;

    for (name, part) in dec.components() {
        println!("{name:<8} max |coeff| {:.4e}  membership {:.1e}", part.max_abs(), part.membership_residual());
    }
    println!("reconstruction error {:.2e}", dec.sum().max_diff(&s));
    for row in trace_table(&dec)?.into_iter().chain(closed_form_residuals(&dec)?) {
        println!("  {:<30} {:.2e}", row.formula, row.residual);
    }

    let split = nabla_ric_kahler(&s)?;
    let rebuilt = &split.d_term + &split.grad_s_term;
    println!("∇Ric from D and grad s: max difference {:.2e}", rebuilt.max_diff(&split.nabla_ric));
    println!("∇Ric(J·,·) lies in P(u): membership {:.1e}", split.nabla_ric_j.membership_residual());
    println!("second Bianchi for ∇B: relative residual {:.2e}", check_second_bianchi_b(&s)?.relative());
    Ok(())
}
