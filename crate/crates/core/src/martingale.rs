//! Filtrations of M_d, conditional expectations, martingales and their
//! square functions, transforms and the Stein map.
//!
//! Two models:
//!
//! - **Tensor**: M_d = M_2^{⊗n}; level k is M_{2^k} ⊗ 1, so E_k takes the
//!   normalized partial trace over the last n − k factors. Levels run
//!   k = 1..=n by default and k = 0..=n with the scalar level.
//! - **Partition**: pinchings onto block-diagonal algebras. Partitions are
//!   listed finest first (smallest algebra) and the last must be a single
//!   block. Indices are 0-based. The scalar level, if requested, is
//!   prepended with E(x) = τ(x)·1.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{column_gram, row_gram, Operator};
use crate::random::gaussian_operator;

/// Frobenius tolerance for the martingale property, relative to max(1, ‖x‖_F).
pub const MARTINGALE_TOL: f64 = 1e-10;

/// JSON descriptor: `{"model":"tensor","factors":4}` or
/// `{"model":"partition","levels":[[[0,1],[2,3]],[[0,1,2,3]]]}`, both with
/// an optional `"scalar_level": true`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum FiltrationSpec {
    Tensor {
        factors: usize,
        #[serde(default)]
        scalar_level: bool,
    },
    Partition {
        levels: Vec<Vec<Vec<usize>>>,
        #[serde(default)]
        scalar_level: bool,
    },
}

impl FiltrationSpec {
    pub fn build(&self) -> Result<Filtration> {
        match self {
            FiltrationSpec::Tensor { factors, scalar_level } => Filtration::tensor(*factors, *scalar_level),
            FiltrationSpec::Partition { levels, scalar_level } => {
                Filtration::partition(levels.clone(), *scalar_level)
            }
        }
    }

    /// Tensor filtration whose algebra has dimension `dim` (a power of two).
    pub fn tensor_for_dim(dim: usize) -> Result<Self> {
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidFiltration(format!(
                "tensor model needs dim = 2^n with n ≥ 1, got {dim}"
            )));
        }
        Ok(FiltrationSpec::Tensor { factors: dim.trailing_zeros() as usize, scalar_level: false })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Level {
    Scalar,
    /// Keep the first k tensor factors.
    TensorCut(usize),
    /// block_of[i] is the block containing basis index i.
    Pinch(Vec<usize>),
}

/// An increasing chain of subalgebras of M_d ending in M_d itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    dim: usize,
    spec: FiltrationSpec,
    levels: Vec<Level>,
}

impl Filtration {
    pub fn tensor(factors: usize, scalar_level: bool) -> Result<Self> {
        if factors == 0 || factors > 10 {
            return Err(Error::InvalidFiltration(format!(
                "tensor model supports 1..=10 factors, got {factors}"
            )));
        }
        let first = if scalar_level { 0 } else { 1 };
        let levels = (first..=factors).map(|k| if k == 0 { Level::Scalar } else { Level::TensorCut(k) }).collect();
        Ok(Self {
            dim: 1 << factors,
            spec: FiltrationSpec::Tensor { factors, scalar_level },
            levels,
        })
    }

    pub fn partition(partitions: Vec<Vec<Vec<usize>>>, scalar_level: bool) -> Result<Self> {
        let bad = |m: String| Error::InvalidFiltration(m);
        let first = partitions.first().ok_or_else(|| bad("partition model needs at least one level".into()))?;
        let dim: usize = first.iter().map(Vec::len).sum();
        if dim == 0 {
            return Err(bad("empty partition".into()));
        }
        let mut maps: Vec<Vec<usize>> = Vec::with_capacity(partitions.len());
        for (n, part) in partitions.iter().enumerate() {
            let mut block_of = vec![usize::MAX; dim];
            for (b, block) in part.iter().enumerate() {
                if block.is_empty() {
                    return Err(bad(format!("level {n}: empty block")));
                }
                for &i in block {
                    if i >= dim {
                        return Err(bad(format!("level {n}: index {i} out of range 0..{dim}")));
                    }
                    if block_of[i] != usize::MAX {
                        return Err(bad(format!("level {n}: index {i} appears twice")));
                    }
                    block_of[i] = b;
                }
            }
            if let Some(i) = block_of.iter().position(|b| *b == usize::MAX) {
                return Err(bad(format!("level {n}: index {i} is not covered")));
            }
            if n > 0 {
                // every block of the previous level must sit inside one block here
                for block in &partitions[n - 1] {
                    let target = block_of[block[0]];
                    if block.iter().any(|i| block_of[*i] != target) {
                        return Err(bad(format!(
                            "level {n} does not coarsen level {}: block {block:?} is split",
                            n - 1
                        )));
                    }
                }
            }
            maps.push(block_of);
        }
        if partitions.last().map(Vec::len) != Some(1) {
            return Err(bad("the last partition must be a single block (the full algebra)".into()));
        }
        let mut levels = Vec::new();
        if scalar_level {
            levels.push(Level::Scalar);
        }
        levels.extend(maps.into_iter().map(Level::Pinch));
        Ok(Self {
            dim,
            spec: FiltrationSpec::Partition { levels: partitions, scalar_level },
            levels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Index of the top level (the full algebra).
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn spec(&self) -> &FiltrationSpec {
        &self.spec
    }

    fn check(&self, level: usize, x: &Operator) -> Result<()> {
        if level >= self.levels.len() {
            return Err(Error::InvalidLevel { level, levels: self.levels.len() });
        }
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: x.dim(), right: self.dim });
        }
        Ok(())
    }

    /// E_n(x).
    pub fn conditional_expectation(&self, level: usize, x: &Operator) -> Result<Operator> {
        self.check(level, x)?;
        let d = self.dim;
        Ok(match &self.levels[level] {
            Level::Scalar => Operator::scalar(d, x.tau()),
            Level::TensorCut(k) => {
                let rest = d >> k;
                if rest == 1 {
                    return Ok(x.clone());
                }
                let head = 1usize << k;
                let mut reduced = vec![Complex64::new(0.0, 0.0); head * head];
                for a in 0..head {
                    for a2 in 0..head {
                        let mut s = Complex64::new(0.0, 0.0);
                        for c in 0..rest {
                            s += x[(a * rest + c, a2 * rest + c)];
                        }
                        reduced[a * head + a2] = s / rest as f64;
                    }
                }
                let mut out = Operator::zeros(d);
                for a in 0..head {
                    for a2 in 0..head {
                        let v = reduced[a * head + a2];
                        for b in 0..rest {
                            out[(a * rest + b, a2 * rest + b)] = v;
                        }
                    }
                }
                out
            }
            Level::Pinch(block_of) => {
                Operator::from_fn(d, |i, j| if block_of[i] == block_of[j] { x[(i, j)] } else { Complex64::new(0.0, 0.0) })
            }
        })
    }

    /// E_n(x) − E_{n−1}(x), or E_0(x) for n = 0: the projection onto level-n differences.
    pub fn difference_projection(&self, level: usize, x: &Operator) -> Result<Operator> {
        let e = self.conditional_expectation(level, x)?;
        if level == 0 {
            return Ok(e);
        }
        Ok(e - self.conditional_expectation(level - 1, x)?)
    }

    /// Random element drawn from a complex Gaussian and projected to `level`.
    pub fn random_element<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        level: usize,
        scale_decades: f64,
        hermitian: bool,
    ) -> Result<Operator> {
        let g = gaussian_operator(rng, self.dim, scale_decades, hermitian);
        self.conditional_expectation(level, &g)
    }
}

/// An adapted sequence x_0, …, x_N (N = top level) with E_n(x_{n+1}) = x_n.
#[derive(Debug, Clone, PartialEq)]
pub struct Martingale {
    filtration: Filtration,
    elements: Vec<Operator>,
    diffs: Vec<Operator>,
}

fn differences_of(elements: &[Operator]) -> Vec<Operator> {
    let mut out = Vec::with_capacity(elements.len());
    for (n, x) in elements.iter().enumerate() {
        out.push(if n == 0 { x.clone() } else { x - &elements[n - 1] });
    }
    out
}

impl Martingale {
    /// Validates the martingale and adaptedness properties.
    pub fn new(filtration: Filtration, elements: Vec<Operator>) -> Result<Self> {
        if elements.len() != filtration.num_levels() {
            return Err(Error::InvalidArgument(format!(
                "expected {} elements (one per level), got {}",
                filtration.num_levels(),
                elements.len()
            )));
        }
        for (n, x) in elements.iter().enumerate() {
            let tol = MARTINGALE_TOL * x.frobenius_norm().max(1.0);
            let adapted = filtration.conditional_expectation(n, x)?.distance(x);
            if adapted > tol {
                return Err(Error::NotAMartingale { level: n, residual: adapted });
            }
            if n + 1 < elements.len() {
                let next = &elements[n + 1];
                let residual = filtration.conditional_expectation(n, next)?.distance(x);
                if residual > MARTINGALE_TOL * next.frobenius_norm().max(1.0) {
                    return Err(Error::NotAMartingale { level: n, residual });
                }
            }
        }
        let diffs = differences_of(&elements);
        Ok(Self { filtration, elements, diffs })
    }

    /// x_n = E_n(x_final).
    pub fn from_final(filtration: &Filtration, x_final: &Operator) -> Result<Self> {
        let mut elements = Vec::with_capacity(filtration.num_levels());
        for n in 0..filtration.num_levels() {
            elements.push(filtration.conditional_expectation(n, x_final)?);
        }
        let diffs = differences_of(&elements);
        Ok(Self { filtration: filtration.clone(), elements, diffs })
    }

    /// Martingale of a complex Gaussian final element.
    pub fn random<R: Rng + ?Sized>(
        filtration: &Filtration,
        rng: &mut R,
        scale_decades: f64,
        hermitian: bool,
    ) -> Result<Self> {
        let g = gaussian_operator(rng, filtration.dim(), scale_decades, hermitian);
        Self::from_final(filtration, &g)
    }

    /// Martingale with the given difference sequence; each d_k is projected
    /// onto the level-k differences first.
    pub fn from_differences(filtration: &Filtration, diffs: &[Operator]) -> Result<Self> {
        if diffs.len() != filtration.num_levels() {
            return Err(Error::InvalidArgument(format!(
                "expected {} differences, got {}",
                filtration.num_levels(),
                diffs.len()
            )));
        }
        let mut projected = Vec::with_capacity(diffs.len());
        for (k, d) in diffs.iter().enumerate() {
            projected.push(filtration.difference_projection(k, d)?);
        }
        let mut elements: Vec<Operator> = Vec::with_capacity(diffs.len());
        for (k, d) in projected.iter().enumerate() {
            elements.push(if k == 0 { d.clone() } else { &elements[k - 1] + d });
        }
        Ok(Self { filtration: filtration.clone(), elements, diffs: projected })
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn differences(&self) -> &[Operator] {
        &self.diffs
    }

    pub fn last(&self) -> &Operator {
        self.elements.last().expect("martingale has at least one level")
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n >= self.elements.len() {
            return Err(Error::InvalidLevel { level: n, levels: self.elements.len() });
        }
        Ok(())
    }

    /// Σ_{k≤n} |dx_k|².
    pub fn column_gram(&self, n: usize) -> Result<Operator> {
        self.check_level(n)?;
        column_gram(&self.diffs[..=n])
    }

    /// Σ_{k≤n} |dx_k*|².
    pub fn row_gram(&self, n: usize) -> Result<Operator> {
        self.check_level(n)?;
        row_gram(&self.diffs[..=n])
    }

    /// S_{C,n} = (Σ_{k≤n} |dx_k|²)^{1/2}.
    pub fn square_function_col(&self, n: usize) -> Result<Operator> {
        Ok(self.column_gram(n)?.psd_sqrt())
    }

    /// S_{R,n} = (Σ_{k≤n} |dx_k*|²)^{1/2}.
    pub fn square_function_row(&self, n: usize) -> Result<Operator> {
        Ok(self.row_gram(n)?.psd_sqrt())
    }

    /// The martingale with differences α_k·dx_k. Elements are computed as
    /// x_n + Σ_{k≤n} (α_k − 1)·dx_k, so α ≡ 1 reproduces `self` exactly.
    pub fn transform(&self, alpha: &[Complex64]) -> Result<Self> {
        let n = self.elements.len();
        if alpha.len() < n {
            return Err(Error::InvalidArgument(format!(
                "symbol has {} entries, need at least {n}",
                alpha.len()
            )));
        }
        if alpha.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidArgument("symbol entries must be finite".into()));
        }
        let one = Complex64::new(1.0, 0.0);
        let mut correction = Operator::zeros(self.filtration.dim());
        let mut elements = Vec::with_capacity(n);
        let mut diffs = Vec::with_capacity(n);
        for k in 0..n {
            if alpha[k] != one {
                correction = correction + self.diffs[k].scale(alpha[k] - one);
                diffs.push(self.diffs[k].scale(alpha[k]));
            } else {
                diffs.push(self.diffs[k].clone());
            }
            elements.push(&self.elements[k] + &correction);
        }
        Ok(Self { filtration: self.filtration.clone(), elements, diffs })
    }
}

/// (E_n(a_n))_n.
pub fn stein_map(filtration: &Filtration, a: &[Operator]) -> Result<Vec<Operator>> {
    if a.len() > filtration.num_levels() {
        return Err(Error::InvalidArgument(format!(
            "stein map takes at most {} terms, got {}",
            filtration.num_levels(),
            a.len()
        )));
    }
    a.iter()
        .enumerate()
        .map(|(n, x)| filtration.conditional_expectation(n, x))
        .collect()
}
