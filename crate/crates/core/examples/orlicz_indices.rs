//! Index estimates, Δ₂ constants and integral bounds for the built-in families.

use ncorlicz::orlicz::OrliczFunction;

fn main() -> ncorlicz::Result<()> {
    for spec in ["power:p=1.5", "powerlog:a=1.2,b=0.5", "powerlog:a=2.5,b=0.5", "powersin:p=4,c=0.2"] {
        let phi: OrliczFunction = spec.parse()?;
        let idx = phi.indices();
        let k = phi.delta2_constant();
        println!("{spec:<24} p_Φ = {:.4}  q_Φ = {:.4}  Δ₂ = {:?}", idx.p_phi, idx.q_phi, k.value());
        let p0 = 0.5 * (1.0 + idx.p_phi);
        let p1 = 2.0 * idx.q_phi;
        println!(
            "{:<24} B₀({p0:.3}) = {:.4}  B₁({p1:.3}) = {:.4}  M(10) = {:.4}",
            "",
            phi.index_integral_bound_low(p0)?,
            phi.index_integral_bound_high(p1)?,
            phi.growth_function(10.0)
        );
    }
    Ok(())
}
