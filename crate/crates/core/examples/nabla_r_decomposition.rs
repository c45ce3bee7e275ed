//! `∇R = S₀′ + S₀″ + S′ + S₁` for a random element of `R^∇(so(1,4))`, with the
//! trace table and the closed forms of each piece.
//!
//!     cargo run --example nabla_r_decomposition

use curvdec::riemann::{
    check_second_bianchi_w, closed_form_residuals, cotton_from_divergence_route, cotton_from_schouten_route,
    decompose_nabla_r, trace_table,
};
use curvdec::spaces::random_element;
use curvdec::{MetricContext, Space};

fn main() -> curvdec::Result<()> {
    let ctx = MetricContext::riemann(1, 4)?;
    let s = random_element(Space::RNablaSo, &ctx, 5)?.into_cov_deriv().expect("cov_deriv");
    let dec = decompose_nabla_r(&s)?;

    for (name, part) in dec.components() {
        println!("{name:<15} max |coeff| {:.4e}  membership {:.1e}", part.max_abs(), part.membership_residual());
    }
    println!("reconstruction error {:.2e}", dec.sum().max_diff(&s));

    println!("\ntrace identities");
    for row in trace_table(&dec) {
        println!("  {:<28} {:.2e}", row.formula, row.residual);
    }
    println!("closed forms");
    for row in closed_form_residuals(&dec)? {
        println!("  {:<28} {:.2e}", row.formula, row.residual);
    }

    let a = cotton_from_schouten_route(&s)?;
    let b = cotton_from_divergence_route(&s)?;
    println!("\nCotton tensor, two routes: max difference {:.2e}", a.max_diff(&b));
    println!("second Bianchi for ∇W: relative residual {:.2e}", check_second_bianchi_w(&s)?.relative());
    Ok(())
}
