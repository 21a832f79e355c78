//! Rademacher averages of Φ-moments and operator-valued trigonometric
//! polynomials with lacunary block multipliers.
//!
//! Circle integrals use the N-th roots of unity. Angles are reduced exactly
//! as (j·k mod N)/N before taking sin/cos, so large frequencies cost no
//! accuracy.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::operator::{phi_moment_of_sqrt, Operator};
use crate::orlicz::OrliczFunction;
use crate::random::{rademacher, stream_rng, tags};

/// Largest sequence length accepted by exact sign enumeration.
pub const EXACT_MAX_TERMS: usize = 14;
/// Largest lacunary length, keeping 3^k well inside i64.
pub const LACUNARY_MAX_TERMS: usize = 20;

/// How the expectation over signs is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RademacherMode {
    Exact,
    MonteCarlo { samples: usize },
}

impl fmt::Display for RademacherMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RademacherMode::Exact => write!(f, "exact"),
            RademacherMode::MonteCarlo { samples } => write!(f, "mc:{samples}"),
        }
    }
}

impl FromStr for RademacherMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "exact" {
            return Ok(RademacherMode::Exact);
        }
        if let Some(n) = s.strip_prefix("mc:") {
            let samples: usize = n
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("rademacher mode `{s}`: `{n}` is not a sample count")))?;
            if samples == 0 {
                return Err(Error::InvalidArgument("rademacher mode needs at least one sample".into()));
            }
            return Ok(RademacherMode::MonteCarlo { samples });
        }
        Err(Error::InvalidArgument(format!("rademacher mode `{s}`: expected `exact` or `mc:<samples>`")))
    }
}

impl Serialize for RademacherMode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RademacherMode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RademacherMoment {
    pub value: f64,
    /// Standard error of the Monte Carlo mean; zero in exact mode.
    pub std_error: f64,
    pub evaluations: usize,
}

fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Flip the sign so the first nonzero entry is positive (re first, then im).
fn canonical_sign(x: &Operator) -> Operator {
    let first = x.entries().iter().find(|z| z.re != 0.0 || z.im != 0.0);
    match first {
        Some(z) if z.re < 0.0 || (z.re == 0.0 && z.im < 0.0) => -x,
        _ => x.clone(),
    }
}

fn signed_sum(xs: &[Operator], pattern: u64) -> Operator {
    let mut acc = xs[0].clone();
    for (k, x) in xs.iter().enumerate().skip(1) {
        acc = if pattern >> (k - 1) & 1 == 1 { acc - x } else { acc + x };
    }
    acc
}

/// ∫ τ(Φ(|Σ ε_k x_k|)) dP over independent uniform signs.
///
/// Exact mode canonicalizes each term's sign and sorts the sequence, then
/// enumerates the 2^{n−1} patterns with ε₀ = +1 (|−y| = |y|). The result is
/// therefore bit-identical under permutations and sign flips of the input.
pub fn rademacher_phi_moment(
    phi: &OrliczFunction,
    xs: &[Operator],
    mode: RademacherMode,
    seed: u64,
) -> Result<RademacherMoment> {
    let first = xs.first().ok_or_else(|| Error::InvalidArgument("empty sequence".into()))?;
    if xs.iter().any(|x| x.dim() != first.dim()) {
        let bad = xs.iter().find(|x| x.dim() != first.dim()).unwrap();
        return Err(Error::DimensionMismatch { left: first.dim(), right: bad.dim() });
    }
    match mode {
        RademacherMode::Exact => {
            if xs.len() > EXACT_MAX_TERMS {
                return Err(Error::Refused(format!(
                    "exact enumeration is limited to {EXACT_MAX_TERMS} terms (got {}); use `mc:<samples>`",
                    xs.len()
                )));
            }
            let mut canon: Vec<Operator> = xs.iter().map(canonical_sign).collect();
            canon.sort_by(|a, b| {
                a.entries()
                    .iter()
                    .zip(b.entries())
                    .map(|(x, y)| cmp_complex(x, y))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            });
            let patterns = 1u64 << (canon.len() - 1);
            let values: Vec<f64> = (0..patterns)
                .into_par_iter()
                .map(|p| signed_sum(&canon, p).trace_phi_moment(phi))
                .collect();
            let total: f64 = values.iter().sum();
            Ok(RademacherMoment { value: total / patterns as f64, std_error: 0.0, evaluations: patterns as usize })
        }
        RademacherMode::MonteCarlo { samples } => {
            let values: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(seed, tags::RADEMACHER, i as u64);
                    let mut acc = Operator::zeros(first.dim());
                    for x in xs {
                        acc = acc + x.scale_real(rademacher(&mut rng));
                    }
                    acc.trace_phi_moment(phi)
                })
                .collect();
            let n = samples as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = if samples > 1 {
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            Ok(RademacherMoment { value: mean, std_error: (var / n).sqrt(), evaluations: samples })
        }
    }
}

/// Σ_k c_k z^k with operator coefficients; only nonzero frequencies are stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPolynomial {
    coeffs: BTreeMap<i64, Operator>,
}

impl TrigPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(freq: i64, c: Operator) -> Self {
        let mut p = Self::zero();
        p.coeffs.insert(freq, c);
        p
    }

    /// Adds c·z^freq.
    pub fn add_term(&mut self, freq: i64, c: Operator) -> Result<()> {
        if let Some(d) = self.dim() {
            if d != c.dim() {
                return Err(Error::DimensionMismatch { left: d, right: c.dim() });
            }
        }
        match self.coeffs.get_mut(&freq) {
            Some(existing) => *existing = &*existing + &c,
            None => {
                self.coeffs.insert(freq, c);
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> Option<usize> {
        self.coeffs.values().next().map(Operator::dim)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(Operator::is_zero)
    }

    pub fn frequencies(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn coefficient(&self, freq: i64) -> Option<&Operator> {
        self.coeffs.get(&freq)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Operator)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    pub fn max_abs_frequency(&self) -> u64 {
        self.coeffs.keys().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> Option<Operator> {
        let d = self.dim()?;
        let mut acc = Operator::zeros(d);
        for (k, c) in &self.coeffs {
            acc = acc + c.scale(z.powi(*k as i32));
        }
        Some(acc)
    }

    /// f(ω^j) with ω = e^{2πi/n}.
    pub fn eval_root(&self, j: u64, n: u64) -> Option<Operator> {
        let d = self.dim()?;
        let mut acc = Operator::zeros(d);
        for (k, c) in &self.coeffs {
            acc = acc + c.scale(root_power(j, *k, n));
        }
        Some(acc)
    }
}

/// ω^{j·k} for ω = e^{2πi/n}, with the exponent reduced mod n in integers.
fn root_power(j: u64, k: i64, n: u64) -> Complex64 {
    let r = ((j as i128) * (k as i128)).rem_euclid(n as i128) as f64;
    let theta = std::f64::consts::TAU * r / n as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// f(z) = Σ_k x_k z^{3^k}.
pub fn lacunary_embed(xs: &[Operator]) -> Result<TrigPolynomial> {
    if xs.len() > LACUNARY_MAX_TERMS {
        return Err(Error::InvalidArgument(format!(
            "lacunary embedding takes at most {LACUNARY_MAX_TERMS} terms, got {}",
            xs.len()
        )));
    }
    let mut f = TrigPolynomial::zero();
    for (k, x) in xs.iter().enumerate() {
        let freq = 3i64.checked_pow(k as u32).ok_or_else(|| Error::InvalidArgument("frequency overflow".into()))?;
        f.add_term(freq, x.clone())?;
    }
    Ok(f)
}

/// True when freq lies in I_n = (3^n/2, 3^n].
pub fn in_block(freq: i64, n: u32) -> bool {
    match 3i64.checked_pow(n) {
        Some(top) => freq <= top && 2 * freq > top,
        None => false,
    }
}

/// Δ_n f: the coefficients with frequency in (3^n/2, 3^n].
pub fn multiplier_block(f: &TrigPolynomial, n: u32) -> TrigPolynomial {
    TrigPolynomial {
        coeffs: f.coeffs.iter().filter(|(k, _)| in_block(**k, n)).map(|(k, v)| (*k, v.clone())).collect(),
    }
}

/// Indices n whose block I_n can meet the frequencies of f.
fn relevant_blocks(f: &TrigPolynomial) -> Vec<u32> {
    let max = f.max_abs_frequency() as i64;
    let mut out = Vec::new();
    let mut n = 0u32;
    while let Some(top) = 3i64.checked_pow(n) {
        if 2 * max < top {
            break;
        }
        out.push(n);
        n += 1;
    }
    out
}

/// Smallest admissible number of quadrature nodes for f.
pub fn min_quad_points(f: &TrigPolynomial) -> u64 {
    2 * f.max_abs_frequency() + 1
}

fn check_nodes(f: &TrigPolynomial, n: u64) -> Result<()> {
    let need = min_quad_points(f);
    if n < need {
        return Err(Error::Refused(format!(
            "{n} quadrature nodes cannot resolve frequency {}; need at least {need}",
            f.max_abs_frequency()
        )));
    }
    Ok(())
}

/// (1/N) Σ_{j<N} τ(Φ(|f(ω^j)|)).
pub fn circle_phi_average(phi: &OrliczFunction, f: &TrigPolynomial, nodes: u64) -> Result<f64> {
    check_nodes(f, nodes)?;
    if f.dim().is_none() {
        return Ok(0.0);
    }
    let values: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|j| f.eval_root(j, nodes).unwrap().trace_phi_moment(phi))
        .collect();
    Ok(values.iter().sum::<f64>() / nodes as f64)
}

/// Circle average at N and 2N nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinedAverage {
    pub coarse: f64,
    pub fine: f64,
    /// |A_N − A_{2N}| / A_{2N}.
    pub relative_change: f64,
}

pub fn circle_phi_average_refined(phi: &OrliczFunction, f: &TrigPolynomial, nodes: u64) -> Result<RefinedAverage> {
    let coarse = circle_phi_average(phi, f, nodes)?;
    let fine = circle_phi_average(phi, f, 2 * nodes)?;
    let relative_change = if fine == 0.0 { (coarse - fine).abs() } else { (coarse - fine).abs() / fine };
    Ok(RefinedAverage { coarse, fine, relative_change })
}

/// ∫ τ(Φ[(Σ_n Δ_n f(z)* Δ_n f(z))^{1/2}]) dm by root-of-unity quadrature.
pub fn block_square_moment(phi: &OrliczFunction, f: &TrigPolynomial, nodes: u64) -> Result<f64> {
    check_nodes(f, nodes)?;
    let d = match f.dim() {
        Some(d) => d,
        None => return Ok(0.0),
    };
    let blocks: Vec<TrigPolynomial> = relevant_blocks(f)
        .into_iter()
        .map(|n| multiplier_block(f, n))
        .filter(|b| b.dim().is_some())
        .collect();
    if blocks.is_empty() {
        return Ok(0.0);
    }
    let values: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let mut gram = Operator::zeros(d);
            for b in &blocks {
                gram = gram + b.eval_root(j, nodes).unwrap().gram();
            }
            phi_moment_of_sqrt(phi, &gram)
        })
        .collect();
    Ok(values.iter().sum::<f64>() / nodes as f64)
}
