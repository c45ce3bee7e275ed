//! Writes a generated tensor to JSON, decomposes the file into a report, and
//! re-checks the report after a round trip through text.
//!
//!     cargo run --example tensor_files

use curvdec::io::TensorFile;
use curvdec::report::{decompose_file, recheck, DecompositionReport};
use curvdec::spaces::random_element;
use curvdec::{MetricContext, Space};

fn main() -> curvdec::Result<()> {
    let ctx = MetricContext::riemann(1, 3)?;
    let s = random_element(Space::RNablaSo, &ctx, 4)?.into_cov_deriv().expect("cov_deriv");
    let file = TensorFile::from_cov_deriv(&s);

    let path = std::env::temp_dir().join(format!("curvdec-example-{}.json", std::process::id()));
    file.write(&path)?;
    let back = TensorFile::read(&path)?;
    std::fs::remove_file(&path)?;
    println!("{} bytes, byte-identical after reading back: {}", file.to_json()?.len(), back.to_json()? == file.to_json()?);

    let report = decompose_file(&back, None, Some(4))?;
    println!("passed: {}", report.passed());
    for c in &report.identities_checked {
        println!("  {:<40} {:.2e}", c.name, c.max_residual);
    }
    let text = report.to_json()?;
    let again = DecompositionReport::from_json(&text)?;
    println!("components: {}", again.components.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", "));
    println!("largest drift when recomputing from the stored parts: {:.2e}", recheck(&again)?);
    Ok(())
}
