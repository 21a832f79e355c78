//! Seeded random ensembles.
//!
//! Every sample draws from its own ChaCha8 stream keyed by
//! `(master seed, tag, index)`, so results do not depend on evaluation order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::Operator;

/// Stream tags keeping unrelated consumers of one master seed apart.
pub mod tags {
    pub const OPERATOR: u64 = 1;
    pub const MARTINGALE: u64 = 2;
    pub const SEQUENCE: u64 = 3;
    pub const RADEMACHER: u64 = 4;
    pub const OPTIMIZER: u64 = 5;
    pub const SIGNS: u64 = 6;
    pub const INTERPOLATION: u64 = 7;
}

/// Independent generator for sample `index` under `tag`.
pub fn stream_rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 32) | (index & 0xffff_ffff));
    rng
}

pub fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Gaussian entries with variance 1/d, scaled by 10^U(−decades, decades).
/// With `hermitian` the result is (g + g*)/√2.
pub fn gaussian_operator<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    scale_decades: f64,
    hermitian: bool,
) -> Operator {
    let scale = if scale_decades > 0.0 {
        10f64.powf(rng.random_range(-scale_decades..=scale_decades))
    } else {
        1.0
    };
    let norm = scale / (d as f64).sqrt();
    let mut data = Vec::with_capacity(d * d);
    for _ in 0..d * d {
        data.push(standard_complex(rng) * norm);
    }
    let g = Operator::from_row_major(d, data).expect("finite gaussian entries");
    if hermitian {
        (&g + &g.adjoint()).scale_real(std::f64::consts::FRAC_1_SQRT_2)
    } else {
        g
    }
}

/// Diagonal operator with real Gaussian entries, scaled like [`gaussian_operator`].
pub fn gaussian_diagonal<R: Rng + ?Sized>(rng: &mut R, d: usize, scale_decades: f64) -> Operator {
    let scale = if scale_decades > 0.0 {
        10f64.powf(rng.random_range(-scale_decades..=scale_decades))
    } else {
        1.0
    };
    let diag: Vec<f64> = (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    Operator::from_real_diagonal(&diag)
}

/// Uniform ±1.
pub fn rademacher<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = gaussian_operator(&mut stream_rng(7, tags::OPERATOR, 3), 4, 1.0, false);
        let b = gaussian_operator(&mut stream_rng(7, tags::OPERATOR, 3), 4, 1.0, false);
        let c = gaussian_operator(&mut stream_rng(7, tags::OPERATOR, 4), 4, 1.0, false);
        let e = gaussian_operator(&mut stream_rng(7, tags::MARTINGALE, 3), 4, 1.0, false);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, e);
    }

    #[test]
    fn hermitian_option() {
        let h = gaussian_operator(&mut stream_rng(1, tags::OPERATOR, 0), 6, 0.0, true);
        assert!(h.hermitian_defect() < 1e-15);
    }

    #[test]
    fn normalization_is_about_unit_second_moment() {
        let mut total = 0.0;
        for i in 0..200 {
            let g = gaussian_operator(&mut stream_rng(3, tags::OPERATOR, i), 16, 0.0, false);
            total += g.gram().tau().re;
        }
        let mean = total / 200.0;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }
}
