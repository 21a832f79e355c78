//! Singular values, distribution functions and Φ-moments of a random matrix.

use ncorlicz::operator::Operator;
use ncorlicz::orlicz::OrliczFunction;
use ncorlicz::random::{gaussian_operator, stream_rng};

fn main() -> ncorlicz::Result<()> {
    let x: Operator = gaussian_operator(&mut stream_rng(3, 0, 0), 6, 0.0, false);
    let phi: OrliczFunction = "powerlog:a=1.2,b=0.5".parse()?;
    println!("singular values: {:?}", x.singular_value_list());
    println!("‖x‖_∞ = {:.6}, ‖x‖_2 = {:.6}", x.operator_norm(), x.lp_norm(2.0));
    for s in [0.25, 0.5, 1.0] {
        println!("λ_{s}(x) = {:.4}", x.distribution(s));
    }
    println!("τ(Φ(|x|)) spectral   = {:.12}", x.trace_phi_moment(&phi));
    println!("τ(Φ(|x|)) layer cake = {:.12}", x.layer_cake_trace(&phi));
    println!("Luxemburg norm       = {:.12}", x.orlicz_norm(&phi));
    let (re, im) = x.hermitian_parts();
    println!("|x|² vs Re² + Im² trace: {:.6} / {:.6}", x.gram().tau().re, (re.gram().tau() + im.gram().tau()).re);
    Ok(())
}
