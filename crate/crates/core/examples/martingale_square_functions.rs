//! A random martingale in both filtration models and its square functions.

use ncorlicz::martingale::{Filtration, Martingale};
use ncorlicz::orlicz::OrliczFunction;
use ncorlicz::random::{stream_rng, tags};

fn main() -> ncorlicz::Result<()> {
    let phi = OrliczFunction::power(2.0)?;
    let models = [
        Filtration::tensor(3, true)?,
        Filtration::partition(
            vec![
                vec![vec![0], vec![1], vec![2, 3], vec![4, 5, 6, 7]],
                vec![vec![0, 1], vec![2, 3], vec![4, 5, 6, 7]],
                vec![vec![0, 1, 2, 3, 4, 5, 6, 7]],
            ],
            false,
        )?,
    ];
    for f in models {
        let mut rng = stream_rng(11, tags::MARTINGALE, 0);
        let m = Martingale::random(&f, &mut rng, 0.0, false)?;
        let top = f.top();
        let lhs = m.last().trace_phi_moment(&phi);
        let col = m.square_function_col(top)?.trace_phi_moment(&phi);
        let row = m.square_function_row(top)?.trace_phi_moment(&phi);
        println!("{:?}", f.spec());
        println!("  τ(|x_N|²) = {lhs:.12}  τ(S_C²) = {col:.12}  τ(S_R²) = {row:.12}");
        let phi3 = OrliczFunction::power(3.0)?;
        println!(
            "  t³: τ(|x_N|³) = {:.6}  τ(S_C³) = {:.6}  τ(S_R³) = {:.6}",
            m.last().trace_phi_moment(&phi3),
            m.square_function_col(top)?.trace_phi_moment(&phi3),
            m.square_function_row(top)?.trace_phi_moment(&phi3)
        );
    }
    Ok(())
}
