//! Spectral splitting, weak-type measurement and certified Φ-moment
//! interpolation constants for sublinear maps on M_d.
//!
//! For weak types (p0, p0) and (p1, p1) with constants A0, A1 and
//! p0 < p_Φ ≤ q_Φ < p1 < ∞ the certified constant is
//!
//! C = D·K·(A0^{p0}·B₀(p0) + A1^{p1}·B₁(p1))
//!
//! with D = sup tΦ'(t)/Φ(t), K the Δ₂ constant and B₀, B₁ the integral
//! bounds of [`OrliczFunction`]. For p1 = ∞ (a bound ‖Tx‖_∞ ≤ A1‖x‖_∞) the
//! split is taken at s/(2·A1), giving
//!
//! C = D·M(2·A1, Φ)·(A0/A1)^{p0}·B₀(p0).

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::martingale::{stein_map, Filtration, Martingale};
use crate::operator::Operator;
use crate::orlicz::{Delta2, OrliczFunction};
use crate::report::{Check, Regime, SampleRecord, VerificationReport};

/// Number of log-spaced α per sample in [`weak_type_ratio`].
pub const WEAK_GRID_POINTS: usize = 60;
/// The α grid spans [WEAK_GRID_LOW, WEAK_GRID_HIGH]·‖x‖_p.
pub const WEAK_GRID_LOW: f64 = 1e-3;
pub const WEAK_GRID_HIGH: f64 = 1e3;

/// (x·E_{(α,∞)}(|x|), x − x·E_{(α,∞)}(|x|)).
pub fn split(x: &Operator, alpha: f64) -> (Operator, Operator) {
    assert!(alpha >= 0.0, "split level must be nonnegative");
    let p = x.spectral_projection(alpha);
    let x0 = x * &p;
    let x1 = x - &x0;
    (x0, x1)
}

type MapFn = dyn Fn(&Operator) -> Result<Operator> + Send + Sync;

/// A map on operators treated as sublinear. `serial` marks maps that must not
/// be called concurrently.
#[derive(Clone)]
pub struct SublinearOperator {
    name: String,
    serial: bool,
    f: Arc<MapFn>,
}

impl std::fmt::Debug for SublinearOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SublinearOperator({})", self.name)
    }
}

impl SublinearOperator {
    pub fn new(
        name: impl Into<String>,
        serial: bool,
        f: impl Fn(&Operator) -> Result<Operator> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), serial, f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_serial(&self) -> bool {
        self.serial
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        (self.f)(x)
    }

    pub fn identity() -> Self {
        Self::new("identity", false, |x| Ok(x.clone()))
    }

    /// x ↦ c·x.
    pub fn scaled(c: f64) -> Self {
        Self::new(format!("scale({c})"), false, move |x| Ok(x.scale_real(c)))
    }

    /// x ↦ T_α(x): transform of the martingale generated by x, read at the top level.
    pub fn martingale_transform(filtration: Filtration, alpha: Vec<Complex64>) -> Self {
        Self::new("transform", false, move |x| {
            let m = Martingale::from_final(&filtration, x)?;
            Ok(m.transform(&alpha)?.last().clone())
        })
    }

    /// Stein map acting on column matrices: an operator X on M_{d·L} is read
    /// through its first block column (a_0, …, a_{L−1}) and mapped to the
    /// column (E_0(a_0), …, E_{L−1}(a_{L−1})). With the normalized trace on
    /// M_{d·L}, τ(Φ(|X|)) = τ_d(Φ((Σ|a_k|²)^{1/2}))/L.
    pub fn stein_column(filtration: Filtration) -> Self {
        Self::new("stein-column", false, move |x| {
            let d = filtration.dim();
            let levels = filtration.num_levels();
            check_embedding(x, d, levels)?;
            let a: Vec<Operator> = (0..levels).map(|k| x.block(d, k, 0)).collect();
            Ok(column_embed(&stein_map(&filtration, &a)?))
        })
    }

    /// Row version: reads the first block row and maps it to (E_k(a_k)) as a row.
    pub fn stein_row(filtration: Filtration) -> Self {
        Self::new("stein-row", false, move |x| {
            let d = filtration.dim();
            let levels = filtration.num_levels();
            check_embedding(x, d, levels)?;
            let a: Vec<Operator> = (0..levels).map(|k| x.block(d, 0, k)).collect();
            Ok(row_embed(&stein_map(&filtration, &a)?))
        })
    }
}

fn check_embedding(x: &Operator, d: usize, levels: usize) -> Result<()> {
    if x.dim() != d * levels {
        return Err(Error::DimensionMismatch { left: x.dim(), right: d * levels });
    }
    Ok(())
}

/// Σ_k a_k ⊗ e_{k,0}.
pub fn column_embed(a: &[Operator]) -> Operator {
    let d = a[0].dim();
    let mut out = Operator::zeros(d * a.len());
    for (k, x) in a.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                out[(k * d + i, j)] = x[(i, j)];
            }
        }
    }
    out
}

/// Σ_k a_k ⊗ e_{0,k}.
pub fn row_embed(a: &[Operator]) -> Operator {
    let d = a[0].dim();
    let mut out = Operator::zeros(d * a.len());
    for (k, x) in a.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                out[(i, k * d + j)] = x[(i, j)];
            }
        }
    }
    out
}

/// Measured weak-type constant over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakTypeMeasurement {
    pub p: f64,
    /// sup α^p λ_α(|Tx|)/‖x‖_p^p; absent for p = ∞.
    pub a_pow_p: Option<f64>,
    /// A itself (sup ‖Tx‖_∞/‖x‖_∞ for p = ∞).
    pub a: f64,
    pub evaluated: usize,
    pub skipped_zero: usize,
}

/// sup over the ensemble and over α of α^p λ_α(|Tx|)/‖x‖_p^p.
///
/// α runs over a log grid of [`WEAK_GRID_POINTS`] points in
/// [[`WEAK_GRID_LOW`], [`WEAK_GRID_HIGH`]]·‖x‖_p together with the left limits
/// at the singular values of Tx, where α^p λ_α jumps and attains its local suprema.
pub fn weak_type_ratio(t: &SublinearOperator, p: f64, ensemble: &[Operator]) -> Result<WeakTypeMeasurement> {
    if ensemble.is_empty() {
        return Err(Error::InvalidArgument("weak-type measurement needs a nonempty ensemble".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("weak type needs p ≥ 1, got {p}")));
    }
    let mut sup: f64 = 0.0;
    let mut skipped = 0;
    for x in ensemble {
        let sx = x.singular_value_list();
        let nx = crate::operator::lp_norm_of_values(&sx, p);
        if nx == 0.0 {
            skipped += 1;
            continue;
        }
        let sy = t.apply(x)?.singular_value_list();
        if p.is_infinite() {
            sup = sup.max(sy[0] / nx);
            continue;
        }
        let d = sy.len() as f64;
        let norm_p = nx.powf(p);
        let mut best: f64 = 0.0;
        for i in 0..WEAK_GRID_POINTS {
            let frac = i as f64 / (WEAK_GRID_POINTS - 1) as f64;
            let alpha = nx * WEAK_GRID_LOW * (WEAK_GRID_HIGH / WEAK_GRID_LOW).powf(frac);
            let lam = crate::operator::distribution_of(&sy, alpha);
            best = best.max(alpha.powf(p) * lam);
        }
        for (i, s) in sy.iter().enumerate() {
            if *s > 0.0 {
                // sy is descending, so #{σ_j ≥ σ_i} = last index with that value + 1
                let count = sy.iter().skip(i).take_while(|v| **v >= *s).count() + i;
                best = best.max(s.powf(p) * count as f64 / d);
            }
        }
        sup = sup.max(best / norm_p);
    }
    let (a_pow_p, a) = if p.is_infinite() { (None, sup) } else { (Some(sup), sup.powf(1.0 / p)) };
    Ok(WeakTypeMeasurement { p, a_pow_p, a, evaluated: ensemble.len() - skipped, skipped_zero: skipped })
}

/// The pieces of the certified constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedConstant {
    pub value: f64,
    pub p0: f64,
    /// `None` stands for p1 = ∞.
    pub p1: Option<f64>,
    pub a0: f64,
    pub a1: f64,
    pub log_derivative_sup: f64,
    pub delta2: f64,
    pub b0: f64,
    pub b1: Option<f64>,
    /// M(2·A1, Φ), used only when p1 = ∞.
    pub growth_factor: Option<f64>,
}

/// Checks p0 < p_Φ ≤ q_Φ < p1 against the index estimates.
pub fn check_interpolation_regime(phi: &OrliczFunction, p0: f64, p1: f64) -> Result<()> {
    let idx = phi.indices();
    if !(p0 > 0.0 && p0 < idx.p_phi) {
        return Err(Error::Regime(format!(
            "interpolation needs p0 < p_Φ: p0 = {p0}, p_Φ ≈ {:.4} for {phi}",
            idx.p_phi
        )));
    }
    if !(p1 > idx.q_phi) {
        return Err(Error::Regime(format!(
            "interpolation needs q_Φ < p1: p1 = {p1}, q_Φ ≈ {:.4} for {phi}",
            idx.q_phi
        )));
    }
    if p0 >= p1 {
        return Err(Error::Regime(format!("interpolation needs p0 < p1, got {p0} ≥ {p1}")));
    }
    Ok(())
}

/// Certified interpolation constant; p1 may be `f64::INFINITY`.
pub fn certified_constant(phi: &OrliczFunction, p0: f64, p1: f64, a0: f64, a1: f64) -> Result<CertifiedConstant> {
    check_interpolation_regime(phi, p0, p1)?;
    if !(a0 > 0.0 && a1 > 0.0 && a0.is_finite() && a1.is_finite()) {
        return Err(Error::InvalidArgument(format!("weak-type constants must be positive and finite, got A0={a0}, A1={a1}")));
    }
    let delta2 = match phi.delta2_constant() {
        Delta2::Finite(k) => k,
        Delta2::Unbounded => return Err(Error::Regime(format!("{phi} fails the Δ₂ condition"))),
    };
    let d = phi.log_derivative_sup();
    let b0 = phi.index_integral_bound_low(p0)?;
    if p1.is_infinite() {
        let growth = phi.growth_function(2.0 * a1);
        let value = d * growth * (a0 / a1).powf(p0) * b0;
        return Ok(CertifiedConstant {
            value,
            p0,
            p1: None,
            a0,
            a1,
            log_derivative_sup: d,
            delta2,
            b0,
            b1: None,
            growth_factor: Some(growth),
        });
    }
    let b1 = phi.index_integral_bound_high(p1)?;
    let value = d * delta2 * (a0.powf(p0) * b0 + a1.powf(p1) * b1);
    Ok(CertifiedConstant {
        value,
        p0,
        p1: Some(p1),
        a0,
        a1,
        log_derivative_sup: d,
        delta2,
        b0,
        b1: Some(b1),
        growth_factor: None,
    })
}

/// Adds the two split pieces at the median singular value of each member, so
/// weak types are also measured on the inputs the certificate splits into.
pub fn with_split_pieces(ensemble: &[Operator]) -> Vec<Operator> {
    let mut out = Vec::with_capacity(3 * ensemble.len());
    for x in ensemble {
        out.push(x.clone());
        let s = x.singular_value_list();
        let median = s[s.len() / 2];
        if median > 0.0 {
            let (x0, x1) = split(x, median);
            out.push(x0);
            out.push(x1);
        }
    }
    out
}

/// Ratios τ(Φ(|Tx|))/τ(Φ(|x|)) over the ensemble, each checked against the
/// certified constant built from weak types measured on the same ensemble.
pub fn verify_interpolation(
    t: &SublinearOperator,
    phi: &OrliczFunction,
    p0: f64,
    p1: f64,
    ensemble: &[Operator],
    config: serde_json::Value,
) -> Result<VerificationReport> {
    check_interpolation_regime(phi, p0, p1)?;
    let probe = with_split_pieces(ensemble);
    let w0 = weak_type_ratio(t, p0, &probe)?;
    let w1 = weak_type_ratio(t, p1, &probe)?;
    let cert = certified_constant(phi, p0, p1, w0.a.max(f64::MIN_POSITIVE), w1.a.max(f64::MIN_POSITIVE))?;
    let idx = phi.indices();
    let regime = Regime {
        p_phi: idx.p_phi,
        q_phi: idx.q_phi,
        label: format!("p0={p0} < p_Φ ≤ q_Φ < p1={p1}"),
    };
    let mut report = VerificationReport::new(format!("interpolation:{}", t.name()), regime, config);
    for (i, x) in ensemble.iter().enumerate() {
        let lhs = t.apply(x)?.trace_phi_moment(phi);
        let rhs = x.trace_phi_moment(phi);
        report.samples.push(SampleRecord::new(i, t.name(), lhs, rhs));
    }
    report.aggregate.bound = Some(cert.value);
    report.checks.push(Check::new("ratio ≤ certified constant", "ratio", cert.value));
    report.findings.push(format!(
        "measured A0 = {:.6e} (p0 = {p0}), A1 = {:.6e} (p1 = {p1}); C = {:.6e} from D = {:.6e}, K = {:.6e}, B0 = {:.6e}, B1 = {}",
        cert.a0,
        cert.a1,
        cert.value,
        cert.log_derivative_sup,
        cert.delta2,
        cert.b0,
        cert.b1.map_or("n/a".to_string(), |b| format!("{b:.6e}")),
    ));
    if w0.skipped_zero > 0 {
        report.findings.push(format!("{} zero inputs skipped in weak-type measurement", w0.skipped_zero));
    }
    report.finalize();
    Ok(report)
}
