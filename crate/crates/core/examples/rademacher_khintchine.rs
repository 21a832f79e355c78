//! Exact and Monte Carlo Rademacher averages against column/row modulars.

use ncorlicz::noise_fourier::{rademacher_phi_moment, RademacherMode};
use ncorlicz::operator::{column_modular, row_modular, Operator};
use ncorlicz::orlicz::OrliczFunction;
use ncorlicz::random::{gaussian_operator, stream_rng};

fn main() -> ncorlicz::Result<()> {
    let mut rng = stream_rng(5, 0, 0);
    let xs: Vec<Operator> = (0..6).map(|_| gaussian_operator(&mut rng, 4, 0.5, false)).collect();
    for spec in ["power:p=3", "power:p=4", "powerlog:a=2.5,b=0.5"] {
        let phi: OrliczFunction = spec.parse()?;
        let exact = rademacher_phi_moment(&phi, &xs, RademacherMode::Exact, 0)?;
        let mc = rademacher_phi_moment(&phi, &xs, RademacherMode::MonteCarlo { samples: 4000 }, 1)?;
        let col = column_modular(&phi, &xs)?;
        let row = row_modular(&phi, &xs)?;
        println!(
            "{spec:<22} E τΦ(|Σε x|) = {:.6} (mc {:.6} ± {:.1e})  column = {col:.6}  row = {row:.6}",
            exact.value, mc.value, mc.std_error
        );
    }
    Ok(())
}
