//! Multi-start derivative-free search for
//! inf { τ(Φ[(Σ|y_k|²)^{1/2}]) + τ(Φ[(Σ|z_k*|²)^{1/2}]) : x_k = y_k + z_k }.
//!
//! Starts are y = x (column only), y = 0 (row only) and `restarts` random
//! y_k = λ_k x_k. Each start runs a pattern search along ±x_k and random
//! Gaussian directions with an expanding/shrinking step. An optional
//! projection maps every direction into the admissible subspace, e.g. the
//! level-k martingale differences.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::operator::{column_modular, row_modular, Operator};
use crate::orlicz::OrliczFunction;
use crate::random::gaussian_operator;

use super::config::OptimizerSettings;

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub ys: Vec<Operator>,
    pub zs: Vec<Operator>,
    /// An upper bound for the infimum.
    pub value: f64,
    pub column_only: f64,
    pub row_only: f64,
    pub evaluations: usize,
}

/// Projection applied to search directions: (term index, direction) ↦ direction.
pub type Projection<'a> = &'a (dyn Fn(usize, &Operator) -> Result<Operator> + Sync);

struct Objective<'a> {
    phi: &'a OrliczFunction,
    xs: &'a [Operator],
    evaluations: usize,
}

impl Objective<'_> {
    fn cost(&mut self, ys: &[Operator]) -> Result<f64> {
        self.evaluations += 1;
        let zs: Vec<Operator> = self.xs.iter().zip(ys).map(|(x, y)| x - y).collect();
        Ok(column_modular(self.phi, ys)? + row_modular(self.phi, &zs)?)
    }
}

fn axpy(ys: &[Operator], h: f64, dir: &[Operator]) -> Vec<Operator> {
    ys.iter().zip(dir).map(|(y, d)| y + &d.scale_real(h)).collect()
}

pub fn decompose_optimal(
    phi: &OrliczFunction,
    xs: &[Operator],
    settings: &OptimizerSettings,
    rng: &mut ChaCha8Rng,
    projection: Option<Projection<'_>>,
) -> Result<Decomposition> {
    let mut obj = Objective { phi, xs, evaluations: 0 };
    let zeros: Vec<Operator> = xs.iter().map(|x| Operator::zeros(x.dim())).collect();
    let column_only = obj.cost(xs)?;
    let row_only = obj.cost(&zeros)?;

    let mut best_ys = if column_only <= row_only { xs.to_vec() } else { zeros.clone() };
    let mut best = column_only.min(row_only);
    if best == 0.0 {
        let zs = xs.iter().zip(&best_ys).map(|(x, y)| x - y).collect();
        return Ok(Decomposition { ys: best_ys, zs, value: 0.0, column_only, row_only, evaluations: obj.evaluations });
    }

    let scale: Vec<f64> = xs.iter().map(|x| x.frobenius_norm()).collect();
    let n = xs.len();
    let mut starts: Vec<(Vec<Operator>, f64)> = vec![(xs.to_vec(), column_only), (zeros.clone(), row_only)];
    for _ in 0..settings.restarts {
        let ys: Vec<Operator> = xs.iter().map(|x| x.scale_real(rng.random_range(0.0..1.0))).collect();
        let c = obj.cost(&ys)?;
        starts.push((ys, c));
    }

    for (mut ys, mut current) in starts {
        let mut h = 0.5;
        for _ in 0..settings.iterations {
            if h < settings.step_tolerance {
                break;
            }
            let dir: Vec<Operator> = if rng.random_bool(0.5) {
                let k = rng.random_range(0..n);
                (0..n).map(|j| if j == k { xs[j].clone() } else { zeros[j].clone() }).collect()
            } else {
                let mut out = Vec::with_capacity(n);
                for (k, x) in xs.iter().enumerate() {
                    let g = gaussian_operator(rng, x.dim(), 0.0, false).scale_real(scale[k]);
                    out.push(match projection {
                        Some(p) => p(k, &g)?,
                        None => g,
                    });
                }
                out
            };
            let mut moved = false;
            for sign in [1.0, -1.0] {
                let trial = axpy(&ys, sign * h, &dir);
                let c = obj.cost(&trial)?;
                if c < current {
                    ys = trial;
                    current = c;
                    moved = true;
                    break;
                }
            }
            h = if moved { (h * 1.5).min(2.0) } else { h * 0.5 };
        }
        if current < best {
            best = current;
            best_ys = ys;
        }
    }
    let zs = xs.iter().zip(&best_ys).map(|(x, y)| x - y).collect();
    Ok(Decomposition { ys: best_ys, zs, value: best, column_only, row_only, evaluations: obj.evaluations })
}
