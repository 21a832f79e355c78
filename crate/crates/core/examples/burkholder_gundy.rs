//! Square-function comparisons on both sides of 2, and the gate between them.

use ncorlicz::verify::{verify_bg, EnsembleConfig};

fn main() -> ncorlicz::Result<()> {
    for spec in ["powerlog:a=1.2,b=0.3", "power:p=3", "powerlog:a=1.5,b=1"] {
        let cfg = EnsembleConfig { phi: spec.parse()?, samples: 20, ..Default::default() };
        match verify_bg(&cfg) {
            Ok(r) => {
                println!("{spec}: {}", r.regime.label);
                for f in &r.findings {
                    println!("  {f}");
                }
            }
            Err(e) => println!("{spec}: {e}"),
        }
    }
    Ok(())
}
