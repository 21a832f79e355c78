//! Weak-type constants and the certified interpolation constant for three operators.

use ncorlicz::verify::{verify_interpolation_target, EnsembleConfig, InterpolationTarget};

fn main() -> ncorlicz::Result<()> {
    let cfg = EnsembleConfig {
        phi: "powerlog:a=1.2,b=0.5".parse()?,
        dim: Some(8),
        samples: 40,
        alpha: "alternating".parse()?,
        ..Default::default()
    };
    for target in [InterpolationTarget::Identity, InterpolationTarget::Transform, InterpolationTarget::SteinColumn] {
        let r = verify_interpolation_target(&cfg, &target)?;
        println!(
            "{target:?}: max ratio = {:.6}  certified C = {:.4}  pass = {:?}",
            r.aggregate.max_ratio.unwrap_or(f64::NAN),
            r.aggregate.bound.unwrap_or(f64::NAN),
            r.pass
        );
        println!("  {}", r.findings[0]);
    }
    Ok(())
}
