//! Lacunary trigonometric polynomials: block multipliers and circle averages.

use ncorlicz::noise_fourier::{
    block_square_moment, circle_phi_average_refined, lacunary_embed, min_quad_points, multiplier_block,
};
use ncorlicz::operator::{column_modular, Operator};
use ncorlicz::orlicz::OrliczFunction;
use ncorlicz::random::{gaussian_operator, stream_rng};

fn main() -> ncorlicz::Result<()> {
    let mut rng = stream_rng(8, 0, 0);
    let xs: Vec<Operator> = (0..4).map(|_| gaussian_operator(&mut rng, 3, 0.0, false)).collect();
    let f = lacunary_embed(&xs)?;
    println!("frequencies: {:?}", f.frequencies());
    for n in 0..4 {
        println!("block {n}: {:?}", multiplier_block(&f, n).frequencies());
    }
    let nodes = min_quad_points(&f).next_power_of_two() * 4;
    for spec in ["power:p=2", "power:p=4", "powerlog:a=1.2,b=0.5"] {
        let phi: OrliczFunction = spec.parse()?;
        let avg = circle_phi_average_refined(&phi, &f, nodes)?;
        let block = block_square_moment(&phi, &f, nodes)?;
        println!(
            "{spec:<22} circle = {:.10} (refinement change {:.1e})  block square = {block:.10}  column = {:.10}",
            avg.fine,
            avg.relative_change,
            column_modular(&phi, &xs)?
        );
    }
    Ok(())
}
