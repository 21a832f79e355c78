//! End-to-end inequality verifiers over seeded random ensembles.
//!
//! Every verifier draws its inputs from per-sample counter-based RNG streams,
//! so reports are independent of scheduling. Analytic constants (Power cases,
//! constant-one facts) and certified interpolation constants are asserted as
//! checks; empirical constants without a numeric counterpart are findings.

mod config;
mod decompose;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{AlphaSpec, EnsembleConfig, Exponent, Generator, OptimizerSettings, DEFAULT_DIM};
pub use decompose::{decompose_optimal, Decomposition, Projection};

use crate::error::{Error, Result};
use crate::interpolation::{
    certified_constant, check_interpolation_regime, column_embed, row_embed, verify_interpolation, weak_type_ratio,
    with_split_pieces, SublinearOperator,
};
use crate::martingale::{stein_map, Filtration, Martingale};
use crate::noise_fourier::{
    block_square_moment, circle_phi_average, lacunary_embed, min_quad_points, rademacher_phi_moment, RademacherMode,
    LACUNARY_MAX_TERMS,
};
use crate::operator::{column_modular, row_modular, Operator};
use crate::orlicz::{Delta2, OrliczFunction};
use crate::random::{gaussian_diagonal, gaussian_operator, stream_rng, tags};
use crate::report::{Check, Regime, SampleRecord, VerificationReport};

/// Slack for the analytic constant-one checks.
pub const ANALYTIC_TOL: f64 = 1e-9;
/// Slack for the exact L₂ isometry.
pub const ISOMETRY_TOL: f64 = 1e-10;
/// Index estimates within this distance of 2 count as touching 2.
pub const BOUNDARY_TOL: f64 = 1e-6;
/// Sign patterns drawn when 2^N is too many to enumerate.
pub const SAMPLED_PATTERNS: usize = 1024;
const MAX_ENUMERATED_LEVELS: usize = 14;

/// Inequality families handled by [`ensemble_run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Inequality {
    Transform,
    Signs,
    Stein,
    Khintchine,
    Bg,
}

impl Inequality {
    pub const ALL: [Inequality; 5] =
        [Inequality::Transform, Inequality::Signs, Inequality::Stein, Inequality::Khintchine, Inequality::Bg];
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Inequality::Transform => "transform",
            Inequality::Signs => "signs",
            Inequality::Stein => "stein",
            Inequality::Khintchine => "khintchine",
            Inequality::Bg => "bg",
        };
        f.write_str(s)
    }
}

impl FromStr for Inequality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Inequality::ALL
            .into_iter()
            .find(|i| i.to_string() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown inequality `{s}`: expected one of transform, signs, stein, khintchine, bg")))
    }
}

/// Which side of 2 the indices fall on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    /// 1 < p_Φ ≤ q_Φ < 2.
    Below,
    /// 2 < p_Φ ≤ q_Φ < ∞.
    Above,
    /// Straddles or touches 2; only reachable with `regime_override`.
    Boundary,
}

/// Requires 1 < p_Φ ≤ q_Φ < ∞ and Δ₂.
fn base_regime(phi: &OrliczFunction) -> Result<Regime> {
    let idx = phi.indices();
    if !(idx.p_phi > 1.0 + BOUNDARY_TOL) || !idx.q_phi.is_finite() {
        return Err(Error::Regime(format!(
            "{phi} needs 1 < p_Φ ≤ q_Φ < ∞, estimated p_Φ ≈ {:.4}, q_Φ ≈ {:.4}",
            idx.p_phi, idx.q_phi
        )));
    }
    if matches!(phi.delta2_constant(), Delta2::Unbounded) {
        return Err(Error::Regime(format!("{phi} fails the Δ₂ condition")));
    }
    Ok(Regime { p_phi: idx.p_phi, q_phi: idx.q_phi, label: "1 < p_Φ ≤ q_Φ < ∞".into() })
}

fn side_of(phi: &OrliczFunction, allow_boundary: bool) -> Result<(Side, Regime)> {
    let mut regime = base_regime(phi)?;
    let (p, q) = (regime.p_phi, regime.q_phi);
    let side = if q < 2.0 - BOUNDARY_TOL {
        regime.label = "1 < p_Φ ≤ q_Φ < 2".into();
        Side::Below
    } else if p > 2.0 + BOUNDARY_TOL {
        regime.label = "2 < p_Φ ≤ q_Φ < ∞".into();
        Side::Above
    } else if allow_boundary {
        regime.label = "override: p_Φ ≤ 2 ≤ q_Φ".into();
        Side::Boundary
    } else {
        return Err(Error::Regime(format!(
            "{phi} has p_Φ ≈ {p:.4} ≤ 2 ≤ q_Φ ≈ {q:.4}: the square-function comparison gives no information in this regime"
        )));
    };
    Ok((side, regime))
}

fn is_power(phi: &OrliczFunction, p: f64) -> bool {
    phi.power_exponent() == Some(p)
}

fn power_at_least_two(phi: &OrliczFunction) -> bool {
    phi.power_exponent().is_some_and(|r| r >= 2.0)
}

/// The final element of sample `i`, drawn from the martingale stream.
pub fn sample_final(cfg: &EnsembleConfig, dim: usize, i: usize) -> Operator {
    let mut rng = stream_rng(cfg.seed, tags::MARTINGALE, i as u64);
    match cfg.generator {
        Generator::Gaussian => gaussian_operator(&mut rng, dim, cfg.scale_decades, cfg.hermitian),
        Generator::Diagonal => gaussian_diagonal(&mut rng, dim, cfg.scale_decades),
    }
}

/// Sequence `i` of `len` operators from the sequence stream, plus a seed for
/// any Monte Carlo evaluation that belongs to it.
pub fn sample_sequence(cfg: &EnsembleConfig, dim: usize, len: usize, i: usize) -> (Vec<Operator>, u64) {
    let mut rng = stream_rng(cfg.seed, tags::SEQUENCE, i as u64);
    let xs = (0..len)
        .map(|_| match cfg.generator {
            Generator::Gaussian => gaussian_operator(&mut rng, dim, cfg.scale_decades, cfg.hermitian),
            Generator::Diagonal => gaussian_diagonal(&mut rng, dim, cfg.scale_decades),
        })
        .collect();
    (xs, rng.random())
}

fn finals(cfg: &EnsembleConfig, dim: usize) -> Vec<Operator> {
    (0..cfg.samples).into_par_iter().map(|i| sample_final(cfg, dim, i)).collect()
}

fn interpolation_exponents(cfg: &EnsembleConfig) -> Result<(f64, f64)> {
    let (p0, p1) = cfg.exponents();
    check_interpolation_regime(&cfg.phi, p0, p1)?;
    Ok((p0, p1))
}

fn max_over<T>(items: &[T], f: impl Fn(&T) -> Result<f64> + Sync + Send) -> Result<f64>
where
    T: Sync,
{
    let values: Vec<f64> = items.par_iter().map(f).collect::<Result<_>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// τ(Φ(|T_α x|)) against τ(Φ(|x|)) with the certified interpolation constant.
pub fn verify_transform(cfg: &EnsembleConfig, alpha: &AlphaSpec) -> Result<VerificationReport> {
    cfg.validate()?;
    let regime = base_regime(&cfg.phi)?;
    let f = cfg.filtration()?;
    let levels = f.num_levels();
    let symbol = alpha.vector(levels)?;
    let sup_alpha = alpha.sup_abs(levels)?;
    let (p0, p1) = interpolation_exponents(cfg)?;
    let xs = finals(cfg, f.dim());
    let t = SublinearOperator::martingale_transform(f, symbol.clone());
    let mut report = verify_interpolation(&t, &cfg.phi, p0, p1, &xs, cfg.to_json())?;
    report.inequality = "transform".into();
    report.regime = regime;
    for s in &mut report.samples {
        s.label = format!("alpha={alpha}");
    }
    let one = Complex64::new(1.0, 0.0);
    if symbol[..levels].iter().all(|a| *a == one) {
        report.checks.push(Check::new("identity symbol: ratio = 1", "ratio", 1.0));
        report.checks.push(Check::new("identity symbol: inverse ratio = 1", "inverse_ratio", 1.0));
    }
    if is_power(&cfg.phi, 2.0) && sup_alpha <= 1.0 {
        report.checks.push(Check::new("L2 contraction for |α| ≤ 1", "ratio", 1.0 + ANALYTIC_TOL));
    }
    report.finalize();
    Ok(report)
}

fn pattern_label(pattern: u64, n: usize) -> String {
    (0..n).map(|k| if pattern >> k & 1 == 1 { '-' } else { '+' }).collect()
}

fn pattern_symbol(pattern: u64, n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::new(if pattern >> k & 1 == 1 { -1.0 } else { 1.0 }, 0.0)).collect()
}

/// τ(Φ(|Σ ε_k dx_k|)) against τ(Φ(|x|)) for every sign pattern, two-sided.
pub fn verify_sign_equivalence(cfg: &EnsembleConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut regime = base_regime(&cfg.phi)?;
    let f = cfg.filtration()?;
    let n = f.num_levels();
    let (p0, p1) = interpolation_exponents(cfg)?;
    let patterns: Vec<u64> = if n <= MAX_ENUMERATED_LEVELS {
        (0..1u64 << n).collect()
    } else {
        let mut rng = stream_rng(cfg.seed, tags::SIGNS, 0);
        let mut v: Vec<u64> = (0..SAMPLED_PATTERNS).map(|_| rng.random::<u64>() & ((1u64 << n.min(63)) - 1)).collect();
        v.insert(0, 0);
        v
    };
    let martingales: Vec<Martingale> =
        finals(cfg, f.dim()).iter().map(|x| Martingale::from_final(&f, x)).collect::<Result<_>>()?;

    let probe = with_split_pieces(&martingales.iter().map(|m| m.last().clone()).collect::<Vec<_>>());
    let weak = |p: f64| -> Result<f64> {
        max_over(&patterns, |pat| {
            let t = SublinearOperator::martingale_transform(f.clone(), pattern_symbol(*pat, n));
            Ok(weak_type_ratio(&t, p, &probe)?.a)
        })
    };
    let a0 = weak(p0)?;
    let a1 = weak(p1)?;
    let cert = certified_constant(&cfg.phi, p0, p1, a0.max(f64::MIN_POSITIVE), a1.max(f64::MIN_POSITIVE))?;

    let jobs: Vec<(usize, u64)> =
        (0..martingales.len()).flat_map(|i| patterns.iter().map(move |p| (i, *p))).collect();
    let records: Vec<SampleRecord> = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, (i, pat))| {
            let m = &martingales[*i];
            let rhs = m.last().trace_phi_moment(&cfg.phi);
            let lhs = m.transform(&pattern_symbol(*pat, n))?.last().trace_phi_moment(&cfg.phi);
            Ok(SampleRecord::new(idx, format!("m{i}:{}", pattern_label(*pat, n)), lhs, rhs))
        })
        .collect::<Result<_>>()?;

    if n > MAX_ENUMERATED_LEVELS {
        regime.label.push_str(&format!("; {} sampled sign patterns", patterns.len()));
    }
    let mut report = VerificationReport::new("signs", regime, cfg.to_json());
    report.samples = records;
    report.aggregate.bound = Some(cert.value);
    report.checks.push(Check::new("ratio ≤ certified constant", "ratio", cert.value));
    report.checks.push(Check::new("inverse ratio ≤ certified constant", "inverse_ratio", cert.value));
    if is_power(&cfg.phi, 2.0) {
        report.checks.push(Check::new("L2 sign invariance", "ratio", 1.0 + ANALYTIC_TOL));
        report.checks.push(Check::new("L2 sign invariance (reverse)", "inverse_ratio", 1.0 + ANALYTIC_TOL));
    }
    report.findings.push(format!(
        "uniform over {} patterns: A0 = {:.6e} (p0 = {p0}), A1 = {:.6e} (p1 = {p1}), C = {:.6e}",
        patterns.len(),
        cert.a0,
        cert.a1,
        cert.value
    ));
    report.finalize();
    Ok(report)
}

/// Column and row Stein inequalities for random sequences (a_0, …, a_N).
pub fn verify_stein(cfg: &EnsembleConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let regime = base_regime(&cfg.phi)?;
    let f = cfg.filtration()?;
    let (p0, p1) = interpolation_exponents(cfg)?;
    let levels = f.num_levels();
    let seqs: Vec<Vec<Operator>> =
        (0..cfg.samples).into_par_iter().map(|i| sample_sequence(cfg, f.dim(), levels, i).0).collect();

    let mut constants = Vec::new();
    for (label, t, embed) in [
        ("column", SublinearOperator::stein_column(f.clone()), column_embed as fn(&[Operator]) -> Operator),
        ("row", SublinearOperator::stein_row(f.clone()), row_embed as fn(&[Operator]) -> Operator),
    ] {
        let probe = with_split_pieces(&seqs.iter().map(|a| embed(a)).collect::<Vec<_>>());
        let a0 = weak_type_ratio(&t, p0, &probe)?.a;
        let a1 = weak_type_ratio(&t, p1, &probe)?.a;
        let cert = certified_constant(&cfg.phi, p0, p1, a0.max(f64::MIN_POSITIVE), a1.max(f64::MIN_POSITIVE))?;
        constants.push((label, cert));
    }

    let rows: Vec<Vec<SampleRecord>> = seqs
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let ea = stein_map(&f, a)?;
            let col = SampleRecord::new(i, "column", column_modular(&cfg.phi, &ea)?, column_modular(&cfg.phi, a)?);
            let row = SampleRecord::new(i, "row", row_modular(&cfg.phi, &ea)?, row_modular(&cfg.phi, a)?);
            Ok([(col, constants[0].1.value), (row, constants[1].1.value)]
                .into_iter()
                .map(|(r, c)| {
                    let over = r.ratio.map_or(f64::NAN, |x| x / c);
                    r.metric("ratio_over_certified", over)
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut report = VerificationReport::new("stein", regime, cfg.to_json());
    report.samples = rows.into_iter().flatten().collect();
    report.aggregate.bound = Some(constants.iter().map(|(_, c)| c.value).fold(0.0, f64::max));
    report.checks.push(Check::new("ratio ≤ certified constant of its side", "ratio_over_certified", 1.0));
    if is_power(&cfg.phi, 2.0) {
        report.checks.push(Check::new("L2 contraction", "ratio", 1.0 + ANALYTIC_TOL));
    }
    for (label, cert) in &constants {
        report.findings.push(format!(
            "{label}: A0 = {:.6e} (p0 = {p0}), A1 = {:.6e} (p1 = {p1}), C = {:.6e}",
            cert.a0, cert.a1, cert.value
        ));
    }
    report.finalize();
    Ok(report)
}

/// Rademacher averages against column/row modulars on the admissible side of 2.
pub fn verify_khintchine(cfg: &EnsembleConfig, generator: Generator) -> Result<VerificationReport> {
    cfg.validate()?;
    let (side, regime) = side_of(&cfg.phi, cfg.regime_override)?;
    let cfg = &EnsembleConfig { generator, ..cfg.clone() };
    let dim = cfg.dim();
    let exact = cfg.rademacher == RademacherMode::Exact;
    let quad = cfg.quad.filter(|_| cfg.terms <= LACUNARY_MAX_TERMS);

    let records: Vec<SampleRecord> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let (xs, mc_seed) = sample_sequence(cfg, dim, cfg.terms, i);
            let rad = rademacher_phi_moment(&cfg.phi, &xs, cfg.rademacher, mc_seed)?;
            let col = column_modular(&cfg.phi, &xs)?;
            let row = row_modular(&cfg.phi, &xs)?;
            let mut rec = match side {
                Side::Below => {
                    let mut rng = stream_rng(cfg.seed, tags::OPTIMIZER, i as u64);
                    let dec = decompose_optimal(&cfg.phi, &xs, &cfg.optimizer, &mut rng, None)?;
                    SampleRecord::new(i, "rademacher/decomposition", rad.value, dec.value)
                        .metric("decomposition", dec.value)
                        .metric("rademacher_over_min", rad.value / col.min(row))
                }
                Side::Above | Side::Boundary => {
                    SampleRecord::new(i, "max(column,row)/rademacher", col.max(row), rad.value)
                }
            };
            rec = rec.metric("column", col).metric("row", row).metric("rademacher", rad.value);
            if !exact {
                rec = rec.metric("rademacher_std_error", rad.std_error);
            }
            if let Some(nodes) = quad {
                let lac = lacunary_embed(&xs)?;
                let n = nodes.max(min_quad_points(&lac));
                let circle = circle_phi_average(&cfg.phi, &lac, n)?;
                let block = block_square_moment(&cfg.phi, &lac, n)?;
                rec = rec
                    .metric("circle_average", circle)
                    .metric("block_square", block)
                    .metric("block_over_circle", block / circle);
            }
            Ok(rec)
        })
        .collect::<Result<_>>()?;

    let mut report = VerificationReport::new("khintchine", regime, cfg.to_json());
    report.samples = records;
    report.finalize();
    match side {
        Side::Below => {
            report.findings.push(format!(
                "upper constant sup rademacher/decomposition = {}; lower constant sup decomposition/rademacher = {}",
                fmt_opt(report.aggregate.max_ratio),
                fmt_opt(report.aggregate.max_inverse_ratio)
            ));
            report.findings.push(format!(
                "sup rademacher/min(column,row) = {}",
                fmt_opt(max_metric(&report, "rademacher_over_min"))
            ));
        }
        Side::Above | Side::Boundary => {
            if power_at_least_two(&cfg.phi) && exact {
                report.checks.push(Check::new("max(column,row) ≤ rademacher", "ratio", 1.0 + ANALYTIC_TOL));
            } else {
                let violations = report.ratios().iter().filter(|r| **r > 1.0 + ANALYTIC_TOL).count();
                report.findings.push(format!(
                    "max(column,row) > rademacher on {violations} of {} samples",
                    report.ratios().len()
                ));
            }
            report.findings.push(format!(
                "lower constant sup max/rademacher = {}; upper constant sup rademacher/max = {}",
                fmt_opt(report.aggregate.max_ratio),
                fmt_opt(report.aggregate.max_inverse_ratio)
            ));
        }
    }
    if quad.is_some() {
        report.findings.push(format!(
            "sup block_square/circle_average = {}",
            fmt_opt(max_metric(&report, "block_over_circle"))
        ));
    }
    report.finalize();
    Ok(report)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |x| format!("{x:.6e}"))
}

fn max_metric(report: &VerificationReport, key: &str) -> Option<f64> {
    report.samples.iter().filter_map(|s| s.metrics.get(key).copied()).reduce(f64::max)
}

/// Modulars of one martingale: (τΦ(|x_N|), column, row).
pub fn martingale_modulars(phi: &OrliczFunction, m: &Martingale) -> Result<(f64, f64, f64)> {
    let lhs = m.last().trace_phi_moment(phi);
    Ok((lhs, column_modular(phi, m.differences())?, row_modular(phi, m.differences())?))
}

/// τ(Φ(|x_N|)) against square-function modulars of random martingales.
pub fn verify_bg(cfg: &EnsembleConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let (side, regime) = side_of(&cfg.phi, cfg.regime_override)?;
    let f = cfg.filtration()?;
    let records: Vec<SampleRecord> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let m = Martingale::from_final(&f, &sample_final(cfg, f.dim(), i))?;
            bg_record(cfg, &f, side, i, &m)
        })
        .collect::<Result<_>>()?;
    let mut report = VerificationReport::new("bg", regime, cfg.to_json());
    report.samples = records;
    report.finalize();
    let label = match side {
        Side::Below => "decomposition",
        _ => "max(column,row)",
    };
    report.findings.push(format!(
        "sup τΦ(|x_N|)/{label} = {}; sup {label}/τΦ(|x_N|) = {}",
        fmt_opt(report.aggregate.max_ratio),
        fmt_opt(report.aggregate.max_inverse_ratio)
    ));
    if side == Side::Above {
        // Not a theorem: stopped random walks violate it for p > 2.
        let violations = report
            .samples
            .iter()
            .filter(|s| s.value_of("inverse_ratio").is_some_and(|r| r > 1.0 + ANALYTIC_TOL))
            .count();
        report.findings.push(format!(
            "max(column,row) > τΦ(|x_N|) on {violations} of {} samples",
            report.ratios().len()
        ));
    }
    if is_power(&cfg.phi, 2.0) {
        report.checks.push(Check::new("L2 isometry", "isometry_defect", ISOMETRY_TOL));
    }
    report.finalize();
    Ok(report)
}

fn bg_record(cfg: &EnsembleConfig, f: &Filtration, side: Side, i: usize, m: &Martingale) -> Result<SampleRecord> {
    let (lhs, col, row) = martingale_modulars(&cfg.phi, m)?;
    let mut rec = match side {
        Side::Below => {
            let project = |k: usize, g: &Operator| f.difference_projection(k, g);
            let mut rng = stream_rng(cfg.seed, tags::OPTIMIZER, i as u64);
            let dec = decompose_optimal(&cfg.phi, m.differences(), &cfg.optimizer, &mut rng, Some(&project))?;
            SampleRecord::new(i, "x_N/decomposition", lhs, dec.value).metric("decomposition", dec.value)
        }
        Side::Above | Side::Boundary => SampleRecord::new(i, "x_N/max(column,row)", lhs, col.max(row)),
    };
    rec = rec.metric("column", col).metric("row", row);
    if is_power(&cfg.phi, 2.0) {
        let scale = lhs.max(f64::MIN_POSITIVE);
        rec = rec.metric("isometry_defect", (lhs - col).abs().max((lhs - row).abs()) / scale);
    }
    Ok(rec)
}

/// Operators accepted by [`verify_interpolation_target`].
#[derive(Debug, Clone, PartialEq)]
pub enum InterpolationTarget {
    Identity,
    /// x ↦ c·x.
    Scale(f64),
    /// Martingale transform with the config's symbol.
    Transform,
    SteinColumn,
    SteinRow,
}

impl FromStr for InterpolationTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "transform" => Ok(Self::Transform),
            "stein-column" => Ok(Self::SteinColumn),
            "stein-row" => Ok(Self::SteinRow),
            _ => match s.strip_prefix("scale:").map(str::parse::<f64>) {
                Some(Ok(c)) if c.is_finite() => Ok(Self::Scale(c)),
                _ => Err(Error::InvalidArgument(format!(
                    "operator `{s}`: expected identity, scale:<c>, transform, stein-column or stein-row"
                ))),
            },
        }
    }
}

/// Runs [`verify_interpolation`] for `target` on the config's ensemble:
/// random final elements, or embedded random sequences for the Stein maps.
pub fn verify_interpolation_target(cfg: &EnsembleConfig, target: &InterpolationTarget) -> Result<VerificationReport> {
    cfg.validate()?;
    base_regime(&cfg.phi)?;
    let (p0, p1) = interpolation_exponents(cfg)?;
    let f = cfg.filtration()?;
    let levels = f.num_levels();
    let dim = f.dim();
    let sequences = |embed: fn(&[Operator]) -> Operator| -> Vec<Operator> {
        (0..cfg.samples).into_par_iter().map(|i| embed(&sample_sequence(cfg, dim, levels, i).0)).collect()
    };
    let (t, ensemble) = match target {
        InterpolationTarget::Identity => (SublinearOperator::identity(), finals(cfg, dim)),
        InterpolationTarget::Scale(c) => (SublinearOperator::scaled(*c), finals(cfg, dim)),
        InterpolationTarget::Transform => {
            (SublinearOperator::martingale_transform(f.clone(), cfg.alpha.vector(levels)?), finals(cfg, dim))
        }
        InterpolationTarget::SteinColumn => (SublinearOperator::stein_column(f.clone()), sequences(column_embed)),
        InterpolationTarget::SteinRow => (SublinearOperator::stein_row(f.clone()), sequences(row_embed)),
    };
    verify_interpolation(&t, &cfg.phi, p0, p1, &ensemble, cfg.to_json())
}

/// A verifier that failed inside [`ensemble_run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierFailure {
    pub inequality: Inequality,
    pub message: String,
    /// True for regime and argument errors.
    pub usage: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutcome {
    pub reports: Vec<VerificationReport>,
    pub failures: Vec<VerifierFailure>,
}

pub fn run_one(cfg: &EnsembleConfig, which: Inequality) -> Result<VerificationReport> {
    match which {
        Inequality::Transform => verify_transform(cfg, &cfg.alpha),
        Inequality::Signs => verify_sign_equivalence(cfg),
        Inequality::Stein => verify_stein(cfg),
        Inequality::Khintchine => verify_khintchine(cfg, cfg.generator),
        Inequality::Bg => verify_bg(cfg),
    }
}

/// Runs each selected verifier once (duplicates ignored, first occurrence
/// order kept); one verifier's error does not stop the others.
pub fn ensemble_run(cfg: &EnsembleConfig, which: &[Inequality]) -> EnsembleOutcome {
    let mut seen = Vec::new();
    for w in which {
        if !seen.contains(w) {
            seen.push(*w);
        }
    }
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for w in seen {
        match run_one(cfg, w) {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(VerifierFailure {
                inequality: w,
                usage: matches!(e, Error::Regime(_) | Error::InvalidArgument(_) | Error::InvalidFiltration(_)),
                message: e.to_string(),
            }),
        }
    }
    EnsembleOutcome { reports, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::FiltrationSpec;

    fn cfg(phi: &str, samples: usize) -> EnsembleConfig {
        EnsembleConfig { phi: phi.parse().unwrap(), samples, ..Default::default() }
    }

    #[test]
    fn transform_identity_symbol_is_exact() {
        let r = verify_transform(&cfg("power:p=2", 10), &AlphaSpec::Ones).unwrap();
        assert!(r.samples.iter().all(|s| s.ratio == Some(1.0)));
        assert_eq!(r.pass, Some(true));
        assert!(r.is_consistent());
    }

    #[test]
    fn transform_l2_contraction() {
        let c = EnsembleConfig { hermitian: true, ..cfg("power:p=2", 20) };
        let r = verify_transform(&c, &AlphaSpec::Values(vec![0.5, -1.0, 0.25])).unwrap();
        assert!(r.checks.iter().any(|c| c.name.starts_with("L2")));
        assert_eq!(r.pass, Some(true), "{:?}", r.checks);
    }

    #[test]
    fn transform_rejects_bad_regime() {
        assert!(matches!(verify_transform(&cfg("power:p=1", 2), &AlphaSpec::Ones), Err(Error::Regime(_))));
    }

    #[test]
    fn signs_power_two_is_invariant() {
        let c = EnsembleConfig { filtration: Some(FiltrationSpec::Tensor { factors: 2, scalar_level: false }), ..cfg("power:p=2", 5) };
        let r = verify_sign_equivalence(&c).unwrap();
        assert_eq!(r.samples.len(), 5 * 4);
        assert_eq!(r.pass, Some(true));
        assert!(r.samples.iter().filter(|s| s.label.ends_with(":++")).all(|s| s.ratio == Some(1.0)));
    }

    #[test]
    fn stein_power_two_contracts() {
        let r = verify_stein(&cfg("power:p=2", 10)).unwrap();
        assert_eq!(r.samples.len(), 20);
        assert_eq!(r.pass, Some(true), "{:?}", r.checks);
    }

    #[test]
    fn stein_adapted_sequence_is_fixed() {
        let f = Filtration::tensor(3, false).unwrap();
        let mut rng = stream_rng(4, 0, 0);
        let a: Vec<Operator> = (0..3).map(|k| f.random_element(&mut rng, k, 0.0, false).unwrap()).collect();
        let ea = stein_map(&f, &a).unwrap();
        let phi = OrliczFunction::power_log(1.2, 0.5).unwrap();
        let r = column_modular(&phi, &ea).unwrap() / column_modular(&phi, &a).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dichotomy_gate() {
        for phi in ["powerlog:a=1.5,b=1", "power:p=2"] {
            let err = verify_bg(&cfg(phi, 2)).unwrap_err();
            assert!(matches!(err, Error::Regime(_)));
            assert!(err.to_string().contains("gives no information"));
            assert!(verify_khintchine(&cfg(phi, 2), Generator::Gaussian).is_err());
        }
    }

    #[test]
    fn khintchine_single_term_ratio_one() {
        let c = EnsembleConfig { terms: 1, ..cfg("power:p=3", 5) };
        let r = verify_khintchine(&c, Generator::Gaussian).unwrap();
        for s in &r.samples {
            // column and row modulars of one term both equal τΦ(|x|)
            assert!((s.ratio.unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(r.pass, Some(true));
    }

    #[test]
    fn khintchine_below_two_reports_findings() {
        let r = verify_khintchine(&cfg("powerlog:a=1.2,b=0.5", 4), Generator::Gaussian).unwrap();
        assert_eq!(r.pass, None);
        for s in &r.samples {
            assert!(s.metrics["decomposition"] <= s.metrics["column"].min(s.metrics["row"]) + 1e-12);
        }
    }

    #[test]
    fn khintchine_quadrature_metrics() {
        let c = EnsembleConfig { quad: Some(64), terms: 3, ..cfg("power:p=4", 3) };
        let r = verify_khintchine(&c, Generator::Gaussian).unwrap();
        assert!(r.samples.iter().all(|s| s.metrics.contains_key("block_over_circle")));
    }

    #[test]
    fn bg_isometry_under_override() {
        let c = EnsembleConfig { regime_override: true, ..cfg("power:p=2", 10) };
        let r = verify_bg(&c).unwrap();
        assert_eq!(r.pass, Some(true), "{:?}", r.checks);
    }

    #[test]
    fn bg_constant_martingale() {
        let f = Filtration::tensor(2, true).unwrap();
        let x0 = Operator::identity(4).scale_real(0.7);
        let m = Martingale::from_final(&f, &x0).unwrap();
        let phi = OrliczFunction::power(3.0).unwrap();
        let (lhs, col, row) = martingale_modulars(&phi, &m).unwrap();
        assert!((lhs - col).abs() < 1e-12 && (lhs - row).abs() < 1e-12);
    }

    #[test]
    fn trace_jensen_comparison_can_fail_for_stopped_walks() {
        // Simple random walk on 6 fair coin flips stopped on leaving (−2, 2), as
        // a diagonal martingale on 64 points: E S⁴ = 15 > E|x_N|⁴ = 14.
        let steps = 6;
        let f = Filtration::tensor(steps, true).unwrap();
        let mut path = vec![0.0; 1 << steps];
        for (w, v) in path.iter_mut().enumerate() {
            let mut s: f64 = 0.0;
            for k in 0..steps {
                if s.abs() >= 2.0 {
                    break;
                }
                s += if w >> (steps - 1 - k) & 1 == 1 { -1.0 } else { 1.0 };
            }
            *v = s;
        }
        let m = Martingale::from_final(&f, &Operator::from_real_diagonal(&path)).unwrap();
        let phi = OrliczFunction::power(4.0).unwrap();
        let (lhs, col, row) = martingale_modulars(&phi, &m).unwrap();
        assert!((col - row).abs() < 1e-12);
        assert!((lhs - 14.0).abs() < 1e-9 && (col - 15.0).abs() < 1e-9, "col = {col}, lhs = {lhs}");
    }

    #[test]
    fn interpolation_targets() {
        let c = cfg("powerlog:a=1.2,b=0.5", 8);
        for op in ["identity", "scale:2", "transform", "stein-column", "stein-row"] {
            let r = verify_interpolation_target(&c, &op.parse().unwrap()).unwrap();
            assert_eq!(r.pass, Some(true), "{op}");
        }
        assert!("scale:x".parse::<InterpolationTarget>().is_err());
    }

    #[test]
    fn ensemble_run_collects_failures() {
        let c = cfg("power:p=2", 3);
        let out = ensemble_run(&c, &[]);
        assert!(out.reports.is_empty() && out.failures.is_empty());
        let out = ensemble_run(&c, &[Inequality::Transform, Inequality::Bg, Inequality::Transform]);
        assert_eq!(out.reports.len(), 1);
        assert_eq!(out.failures.len(), 1);
        assert!(out.failures[0].usage);
    }

    #[test]
    fn reports_are_reproducible() {
        let c = cfg("power:p=3", 6);
        let a = serde_json::to_string(&ensemble_run(&c, &Inequality::ALL).reports).unwrap();
        let b = serde_json::to_string(&ensemble_run(&c, &Inequality::ALL).reports).unwrap();
        assert_eq!(a, b);
    }
}
