//! All verifiers on one seeded configuration, printed as JSON.

use ncorlicz::verify::{ensemble_run, EnsembleConfig, Inequality};

fn main() -> ncorlicz::Result<()> {
    let cfg: EnsembleConfig = serde_json::from_str(
        r#"{"phi":"power:p=3","samples":10,"seed":42,"filtration":{"model":"tensor","factors":3}}"#,
    )?;
    let out = ensemble_run(&cfg, &Inequality::ALL);
    for r in &out.reports {
        println!("{:<11} pass = {:<12} max ratio = {:?}", r.inequality, format!("{:?}", r.pass), r.aggregate.max_ratio);
    }
    for f in &out.failures {
        println!("{}: {}", f.inequality, f.message);
    }
    println!("{}", serde_json::to_string_pretty(&out.reports[0].aggregate)?);
    Ok(())
}
