//! Orlicz functions as a closed parametric family.
//!
//! Three families are supported:
//!
//! - `power:p=..`        Φ(t) = t^p, p ≥ 1
//! - `powerlog:a=..,b=..` Φ(t) = t^a ln(1 + t^b), a > 1, b > 0
//! - `powersin:p=..,c=..` Φ(t) = t^p (1 + c sin(p ln t)), 0 < c < 1/2, p > 1/(1 - 2c)
//!
//! Every descriptor that is a supremum over s > 0 (the growth function
//! M(t, Φ), the Δ₂ constant, the log-derivative bound and the integral
//! bounds behind the index characterisation) is evaluated on one shared
//! log-uniform grid, [`GRID_POINTS`] points with ln s in
//! [[`GRID_LN_MIN`], [`GRID_LN_MAX`]]. All of these work on ln Φ(e^u), which
//! the closed families provide analytically, so the grid never overflows.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// ln(1e-100).
pub const GRID_LN_MIN: f64 = -230.258_509_299_404_55;
/// ln(1e100).
pub const GRID_LN_MAX: f64 = 230.258_509_299_404_55;
pub const GRID_POINTS: usize = 10_000;

/// Points t at which ln M(t, Φ) is sampled for the lower index.
pub const LOW_INDEX_POINTS: [f64; 3] = [1e-3, 1e-4, 1e-5];
/// Points t at which ln M(t, Φ) is sampled for the upper index.
pub const HIGH_INDEX_POINTS: [f64; 3] = [1e3, 1e4, 1e5];

/// Running Δ₂ supremum above which the function is declared non-Δ₂.
pub const DELTA2_CUTOFF: f64 = 1e12;

/// Absolute tolerance of the adaptive Simpson rule used for the integral bounds.
pub const QUAD_ABS_TOL: f64 = 1e-10;

/// The parametric families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Power { p: f64 },
    #[serde(rename = "powerlog")]
    PowerLog { a: f64, b: f64 },
    #[serde(rename = "powersin")]
    PowerSin { p: f64, c: f64 },
}

impl Family {
    fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        match *self {
            Family::Power { p } => {
                if !finite(p) || p < 1.0 {
                    return Err(Error::InvalidPhi(format!("power requires p >= 1, got p={p}")));
                }
            }
            Family::PowerLog { a, b } => {
                if !finite(a) || a <= 1.0 {
                    return Err(Error::InvalidPhi(format!("powerlog requires a > 1, got a={a}")));
                }
                if !finite(b) || b <= 0.0 {
                    return Err(Error::InvalidPhi(format!("powerlog requires b > 0, got b={b}")));
                }
            }
            Family::PowerSin { p, c } => {
                if !finite(c) || c <= 0.0 || c >= 0.5 {
                    return Err(Error::InvalidPhi(format!(
                        "powersin requires 0 < c < 1/2, got c={c}"
                    )));
                }
                let min_p = 1.0 / (1.0 - 2.0 * c);
                if !finite(p) || p <= min_p {
                    return Err(Error::InvalidPhi(format!(
                        "powersin requires p > 1/(1-2c) = {min_p}, got p={p}"
                    )));
                }
            }
        }
        Ok(())
    }
}

type CustomFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Family(Family),
    Custom { name: String, f: CustomFn },
}

#[derive(Default)]
struct BoundCache {
    low: HashMap<u64, f64>,
    high: HashMap<u64, f64>,
}

/// An Orlicz function with lazily computed, cached descriptors.
#[derive(Clone)]
pub struct OrliczFunction {
    repr: Repr,
    indices: OnceLock<IndexEstimate>,
    delta2: OnceLock<Delta2>,
    log_derivative_sup: OnceLock<f64>,
    bounds: Arc<Mutex<BoundCache>>,
}

impl fmt::Debug for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OrliczFunction({self})")
    }
}

impl PartialEq for OrliczFunction {
    fn eq(&self, other: &Self) -> bool {
        match (&self.repr, &other.repr) {
            (Repr::Family(a), Repr::Family(b)) => a == b,
            (Repr::Custom { name: n1, f: f1 }, Repr::Custom { name: n2, f: f2 }) => {
                n1 == n2 && Arc::ptr_eq(f1, f2)
            }
            _ => false,
        }
    }
}

/// Result of [`OrliczFunction::delta2_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delta2 {
    Finite(f64),
    Unbounded,
}

impl Delta2 {
    pub fn value(&self) -> Option<f64> {
        match self {
            Delta2::Finite(v) => Some(*v),
            Delta2::Unbounded => None,
        }
    }
}

/// Grid-based estimate of the Matuszewska indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub p_phi: f64,
    pub q_phi: f64,
    /// RMS residual of the least-squares fit of ln M(t) against ln t near 0.
    pub low_residual: f64,
    /// Same, near infinity.
    pub high_residual: f64,
    pub grid_ln_min: f64,
    pub grid_ln_max: f64,
    pub grid_points: usize,
    /// Set when non-finite values were dropped from the grid.
    pub clamped: bool,
    /// Set when the raw slopes violated 1 ≤ p ≤ q and were projected onto it.
    pub order_corrected: bool,
}

/// Nearest point (Euclidean) to (p, q) with 1 ≤ p ≤ q.
fn project_ordered(p: f64, q: f64) -> (f64, f64) {
    let (p, q) = if p > q {
        let m = 0.5 * (p + q);
        (m, m)
    } else {
        (p, q)
    };
    (p.max(1.0), q.max(1.0))
}

fn grid_ln(i: usize) -> f64 {
    GRID_LN_MIN + (GRID_LN_MAX - GRID_LN_MIN) * (i as f64) / ((GRID_POINTS - 1) as f64)
}

/// ln(ln(1 + e^y)) without overflow or cancellation.
fn ln_softplus(y: f64) -> f64 {
    if y > 35.0 {
        (y + (-y).exp().ln_1p()).ln()
    } else if y < -35.0 {
        y - 0.5 * y.exp()
    } else {
        y.exp().ln_1p().ln()
    }
}

/// sigmoid(y) / ln(1 + e^y).
fn sigmoid_over_softplus(y: f64) -> f64 {
    if y < -35.0 {
        1.0
    } else if y > 35.0 {
        1.0 / (y + (-y).exp().ln_1p())
    } else {
        let sig = 1.0 / (1.0 + (-y).exp());
        sig / y.exp().ln_1p()
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (my + slope * (x - mx));
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

impl OrliczFunction {
    fn from_repr(repr: Repr) -> Self {
        Self {
            repr,
            indices: OnceLock::new(),
            delta2: OnceLock::new(),
            log_derivative_sup: OnceLock::new(),
            bounds: Arc::new(Mutex::new(BoundCache::default())),
        }
    }

    pub fn from_family(family: Family) -> Result<Self> {
        family.validate()?;
        Ok(Self::from_repr(Repr::Family(family)))
    }

    pub fn power(p: f64) -> Result<Self> {
        Self::from_family(Family::Power { p })
    }

    pub fn power_log(a: f64, b: f64) -> Result<Self> {
        Self::from_family(Family::PowerLog { a, b })
    }

    pub fn power_sin(p: f64, c: f64) -> Result<Self> {
        Self::from_family(Family::PowerSin { p, c })
    }

    /// Wraps an arbitrary callable. Nothing is checked: no convexity, no
    /// index guarantees. Intended for probing the estimators in tests.
    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_repr(Repr::Custom { name: name.into(), f: Arc::new(f) })
    }

    pub fn family(&self) -> Option<Family> {
        match self.repr {
            Repr::Family(f) => Some(f),
            Repr::Custom { .. } => None,
        }
    }

    /// The exponent p when Φ(t) = t^p.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.repr {
            Repr::Family(Family::Power { p }) => Some(p),
            _ => None,
        }
    }

    /// Φ(t) for t ≥ 0.
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0, "Φ evaluated at negative argument {t}");
        if t == 0.0 {
            return 0.0;
        }
        match &self.repr {
            Repr::Family(Family::Power { p }) => t.powf(*p),
            Repr::Family(Family::PowerLog { a, b }) => t.powf(*a) * t.powf(*b).ln_1p(),
            Repr::Family(Family::PowerSin { p, c }) => t.powf(*p) * (1.0 + c * (p * t.ln()).sin()),
            Repr::Custom { f, .. } => f(t),
        }
    }

    /// ln Φ(e^u).
    pub fn ln_eval_exp(&self, u: f64) -> f64 {
        match &self.repr {
            Repr::Family(Family::Power { p }) => p * u,
            Repr::Family(Family::PowerLog { a, b }) => a * u + ln_softplus(b * u),
            Repr::Family(Family::PowerSin { p, c }) => p * u + (c * (p * u).sin()).ln_1p(),
            Repr::Custom { f, .. } => f(u.exp()).ln(),
        }
    }

    /// Right derivative Φ'(t). At t = 0 this is the limit from the right.
    pub fn eval_derivative(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match &self.repr {
            Repr::Family(Family::Power { p }) => {
                if t == 0.0 {
                    if *p == 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    p * t.powf(p - 1.0)
                }
            }
            Repr::Family(Family::PowerLog { a, b }) => {
                if t == 0.0 {
                    return 0.0;
                }
                let tb = t.powf(*b);
                a * t.powf(a - 1.0) * tb.ln_1p() + b * t.powf(a + b - 1.0) / (1.0 + tb)
            }
            Repr::Family(Family::PowerSin { p, c }) => {
                if t == 0.0 {
                    return 0.0;
                }
                let phase = p * t.ln();
                p * t.powf(p - 1.0) * (1.0 + c * phase.sin() + c * phase.cos())
            }
            Repr::Custom { f, .. } => {
                let h = 1e-7 * t.max(1e-3);
                (f(t + h) - f(t)) / h
            }
        }
    }

    /// t Φ'(t) / Φ(t) at t = e^u.
    pub fn log_derivative_exp(&self, u: f64) -> f64 {
        match &self.repr {
            Repr::Family(Family::Power { p }) => *p,
            Repr::Family(Family::PowerLog { a, b }) => a + b * sigmoid_over_softplus(b * u),
            Repr::Family(Family::PowerSin { p, c }) => {
                let phase = p * u;
                p + c * p * phase.cos() / (1.0 + c * phase.sin())
            }
            Repr::Custom { .. } => {
                let h = 1e-5;
                (self.ln_eval_exp(u + h) - self.ln_eval_exp(u - h)) / (2.0 * h)
            }
        }
    }

    /// ln M(e^{ln_t}, Φ) as a grid maximum, plus whether any grid point was dropped.
    fn ln_growth(&self, ln_t: f64) -> (f64, bool) {
        let mut best = f64::NEG_INFINITY;
        let mut clamped = false;
        for i in 0..GRID_POINTS {
            let u = grid_ln(i);
            let v = self.ln_eval_exp(u + ln_t) - self.ln_eval_exp(u);
            if v.is_finite() {
                best = best.max(v);
            } else {
                clamped = true;
            }
        }
        (best, clamped)
    }

    /// M(t, Φ) = sup_s Φ(ts)/Φ(s), estimated on the standard grid.
    pub fn growth_function(&self, t: f64) -> f64 {
        assert!(t > 0.0, "growth function needs t > 0");
        self.ln_growth(t.ln()).0.exp()
    }

    /// Matuszewska indices from least-squares slopes of ln M(t) over three decades.
    pub fn indices(&self) -> &IndexEstimate {
        self.indices.get_or_init(|| {
            let mut clamped = false;
            let mut fit = |points: &[f64; 3]| {
                let xs: Vec<f64> = points.iter().map(|t| t.ln()).collect();
                let ys: Vec<f64> = xs
                    .iter()
                    .map(|&x| {
                        let (v, c) = self.ln_growth(x);
                        clamped |= c;
                        v
                    })
                    .collect();
                least_squares_slope(&xs, &ys)
            };
            let (p_raw, low_residual) = fit(&LOW_INDEX_POINTS);
            let (q_raw, high_residual) = fit(&HIGH_INDEX_POINTS);
            let (p_phi, q_phi) = project_ordered(p_raw, q_raw);
            IndexEstimate {
                p_phi,
                q_phi,
                low_residual,
                high_residual,
                grid_ln_min: GRID_LN_MIN,
                grid_ln_max: GRID_LN_MAX,
                grid_points: GRID_POINTS,
                clamped,
                order_corrected: (p_phi, q_phi) != (p_raw, q_raw),
            }
        })
    }

    /// sup_t Φ(2t)/Φ(t) over the grid, or `Unbounded` once it passes [`DELTA2_CUTOFF`].
    pub fn delta2_constant(&self) -> Delta2 {
        *self.delta2.get_or_init(|| {
            let ln2 = std::f64::consts::LN_2;
            let mut sup: f64 = 0.0;
            for i in 0..GRID_POINTS {
                let u = grid_ln(i);
                let ratio = (self.ln_eval_exp(u + ln2) - self.ln_eval_exp(u)).exp();
                if !ratio.is_finite() || ratio > DELTA2_CUTOFF {
                    return Delta2::Unbounded;
                }
                sup = sup.max(ratio);
            }
            Delta2::Finite(sup)
        })
    }

    /// D = sup_t t Φ'(t) / Φ(t) over the grid.
    pub fn log_derivative_sup(&self) -> f64 {
        *self.log_derivative_sup.get_or_init(|| {
            (0..GRID_POINTS)
                .map(|i| self.log_derivative_exp(grid_ln(i)))
                .filter(|v| v.is_finite())
                .fold(f64::NEG_INFINITY, f64::max)
        })
    }

    /// B₀(p) = sup_t t^p ∫₀^t s^{-p-1} Φ(s) ds / Φ(t). Requires p < p_Φ.
    pub fn index_integral_bound_low(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidArgument(format!("lower integral bound needs p > 0, got {p}")));
        }
        let p_phi = self.indices().p_phi;
        if p >= p_phi {
            return Err(Error::Divergent(format!(
                "p = {p} is not below p_Φ ≈ {p_phi}; ∫₀^t s^(-p) Φ(s) ds/s is not O(t^(-p) Φ(t))"
            )));
        }
        if let Some(v) = self.bounds.lock().unwrap().low.get(&p.to_bits()) {
            return Ok(*v);
        }
        let value = self.integral_sup(|u, v| {
            (self.ln_eval_exp(u - v) - self.ln_eval_exp(u) + p * v).exp()
        })?;
        self.bounds.lock().unwrap().low.insert(p.to_bits(), value);
        Ok(value)
    }

    /// B₁(q) = sup_t t^q ∫_t^∞ s^{-q-1} Φ(s) ds / Φ(t). Requires q > q_Φ.
    pub fn index_integral_bound_high(&self, q: f64) -> Result<f64> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "upper integral bound needs finite q > 0, got {q}"
            )));
        }
        let q_phi = self.indices().q_phi;
        if q <= q_phi {
            return Err(Error::Divergent(format!(
                "q = {q} is not above q_Φ ≈ {q_phi}; ∫_t^∞ s^(-q) Φ(s) ds/s is not O(t^(-q) Φ(t))"
            )));
        }
        if let Some(v) = self.bounds.lock().unwrap().high.get(&q.to_bits()) {
            return Ok(*v);
        }
        let value = self.integral_sup(|u, v| {
            (self.ln_eval_exp(u + v) - self.ln_eval_exp(u) - q * v).exp()
        })?;
        self.bounds.lock().unwrap().high.insert(q.to_bits(), value);
        Ok(value)
    }

    /// sup over grid u of ∫₀^∞ integrand(u, v) dv.
    fn integral_sup(&self, integrand: impl Fn(f64, f64) -> f64 + Sync) -> Result<f64> {
        let values: Vec<Option<f64>> = (0..GRID_POINTS)
            .into_par_iter()
            .map(|i| {
                let u = grid_ln(i);
                integrate_half_line(|v| integrand(u, v))
            })
            .collect();
        let mut sup = f64::NEG_INFINITY;
        for (i, v) in values.into_iter().enumerate() {
            match v {
                Some(v) => sup = sup.max(v),
                None => {
                    return Err(Error::Divergent(format!(
                        "integral does not converge at t = e^{:.3}",
                        grid_ln(i)
                    )))
                }
            }
        }
        Ok(sup)
    }
}

/// ∫₀^∞ f(v) dv over doubling chunks; `None` if the tail has not died out by v = 2^17.
fn integrate_half_line(f: impl Fn(f64) -> f64) -> Option<f64> {
    const MAX_DOUBLINGS: i32 = 17;
    let mut total = adaptive_simpson(&f, 0.0, 1.0, QUAD_ABS_TOL);
    let mut lo = 1.0;
    for _ in 0..MAX_DOUBLINGS {
        let hi = 2.0 * lo;
        let piece = adaptive_simpson(&f, lo, hi, QUAD_ABS_TOL);
        if !piece.is_finite() {
            return None;
        }
        total += piece;
        if lo >= 8.0 && piece <= 1e-13 * total.abs().max(1e-300) {
            return Some(total);
        }
        lo = hi;
    }
    None
}

/// Adaptive Simpson quadrature on [a, b] to an absolute tolerance.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

impl fmt::Display for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Family(Family::Power { p }) => write!(f, "power:p={p}"),
            Repr::Family(Family::PowerLog { a, b }) => write!(f, "powerlog:a={a},b={b}"),
            Repr::Family(Family::PowerSin { p, c }) => write!(f, "powersin:p={p},c={c}"),
            Repr::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

impl FromStr for OrliczFunction {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let fail = |reason: String| Error::PhiSpec { spec: spec.to_string(), reason };
        let (name, params) = spec
            .trim()
            .split_once(':')
            .ok_or_else(|| fail("expected `<family>:<key>=<value>,...`".into()))?;
        let keys: &[&str] = match name {
            "power" => &["p"],
            "powerlog" => &["a", "b"],
            "powersin" => &["p", "c"],
            other => return Err(fail(format!("unknown family `{other}`"))),
        };
        let mut values: Vec<Option<f64>> = vec![None; keys.len()];
        for item in params.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| fail(format!("`{}` is not of the form key=value", item.trim())))?;
            let key = key.trim();
            let slot = keys
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| fail(format!("unknown key `{key}` for family `{name}`")))?;
            if values[slot].is_some() {
                return Err(fail(format!("duplicate key `{key}`")));
            }
            let v: f64 = raw
                .trim()
                .parse()
                .map_err(|_| fail(format!("key `{key}` has non-numeric value `{}`", raw.trim())))?;
            values[slot] = Some(v);
        }
        let mut got = Vec::with_capacity(keys.len());
        for (k, v) in keys.iter().zip(values) {
            got.push(v.ok_or_else(|| fail(format!("missing key `{k}`")))?);
        }
        let family = match name {
            "power" => Family::Power { p: got[0] },
            "powerlog" => Family::PowerLog { a: got[0], b: got[1] },
            _ => Family::PowerSin { p: got[0], c: got[1] },
        };
        Self::from_family(family)
    }
}

impl Serialize for OrliczFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OrliczFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn powerlog() -> OrliczFunction {
        OrliczFunction::power_log(1.2, 0.5).unwrap()
    }

    #[test]
    fn eval_examples() {
        let sq = OrliczFunction::power(2.0).unwrap();
        assert_eq!(sq.eval(3.0), 9.0);
        assert_eq!(sq.eval(0.0), 0.0);
        assert!((powerlog().eval(1.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(OrliczFunction::power_log(1.0, 1.0).is_err());
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        assert!(OrliczFunction::power(0.5).is_err());
        assert!(OrliczFunction::power(f64::NAN).is_err());
        assert!(OrliczFunction::power_log(1.5, 0.0).is_err());
        assert!(OrliczFunction::power_sin(4.0, 0.5).is_err());
        // 1/(1-2c) = 2.5 for c = 0.3
        assert!(OrliczFunction::power_sin(2.4, 0.3).is_err());
        assert!(OrliczFunction::power_sin(2.6, 0.3).is_ok());
    }

    #[test]
    fn derivative_examples() {
        let sq = OrliczFunction::power(2.0).unwrap();
        assert_eq!(sq.eval_derivative(3.0), 6.0);
        assert_eq!(sq.eval_derivative(0.0), 0.0);
        assert_eq!(OrliczFunction::power(1.0).unwrap().eval_derivative(0.0), 1.0);
        for p in [1.0, 1.5, 3.0] {
            let phi = OrliczFunction::power(p).unwrap();
            for t in [0.1, 1.0, 7.0] {
                let ld = t * phi.eval_derivative(t) / phi.eval(t);
                assert!((ld - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let cases = [powerlog(), OrliczFunction::power_sin(4.0, 0.2).unwrap()];
        for phi in &cases {
            for t in [0.3, 2.0, 11.0] {
                let h = 1e-5 * t;
                let fd = (phi.eval(t + h) - phi.eval(t - h)) / (2.0 * h);
                let d = phi.eval_derivative(t);
                assert!((d - fd).abs() <= 1e-6 * d.abs(), "{phi} t={t}: {d} vs {fd}");
            }
        }
    }

    #[test]
    fn log_derivative_matches_closed_derivative() {
        let cases = [powerlog(), OrliczFunction::power_sin(4.0, 0.2).unwrap()];
        for phi in &cases {
            for t in [1e-3, 0.5, 3.0, 1e4] {
                let direct = t * phi.eval_derivative(t) / phi.eval(t);
                let via_log = phi.log_derivative_exp(t.ln());
                assert!((direct - via_log).abs() < 1e-10 * direct, "{phi} t={t}");
            }
        }
    }

    #[test]
    fn ln_eval_agrees_with_eval() {
        let cases = [
            OrliczFunction::power(2.5).unwrap(),
            powerlog(),
            OrliczFunction::power_sin(4.0, 0.2).unwrap(),
        ];
        for phi in &cases {
            for t in [1e-20, 1e-3, 0.7, 1.0, 5.0, 1e8] {
                let direct = phi.eval(t).ln();
                let via = phi.ln_eval_exp(t.ln());
                assert!((direct - via).abs() < 1e-11 * direct.abs().max(1.0), "{phi} t={t}");
            }
        }
    }

    #[test]
    fn growth_function_examples() {
        let phi = OrliczFunction::power(1.5).unwrap();
        for t in [0.01, 0.5, 3.0, 100.0] {
            let m = phi.growth_function(t);
            assert!((m - t.powf(1.5)).abs() < 1e-12 * m);
        }
        assert!((powerlog().growth_function(1.0) - 1.0).abs() < 1e-15);
        let m10 = powerlog().growth_function(10.0);
        assert!(m10 >= 10f64.powf(1.2) && m10 <= 10f64.powf(1.7) * (1.0 + 1e-12));
    }

    #[test]
    fn growth_function_is_submultiplicative() {
        let phi = OrliczFunction::power_sin(4.0, 0.2).unwrap();
        for (s, t) in [(0.1, 3.0), (2.0, 5.0), (0.01, 0.3)] {
            let lhs = phi.growth_function(s * t);
            let rhs = phi.growth_function(s) * phi.growth_function(t);
            assert!(lhs <= rhs * (1.0 + 1e-9), "M({s}·{t})={lhs} > {rhs}");
        }
    }

    #[test]
    fn index_examples() {
        let idx = OrliczFunction::power(1.5).unwrap().indices().clone();
        assert!((idx.p_phi - 1.5).abs() < 1e-2 && (idx.q_phi - 1.5).abs() < 1e-2);
        let idx = powerlog().indices().clone();
        assert!((idx.p_phi - 1.2).abs() < 5e-2, "{idx:?}");
        assert!((idx.q_phi - 1.7).abs() < 5e-2, "{idx:?}");
        let idx = OrliczFunction::power_sin(4.0, 0.2).unwrap().indices().clone();
        assert!((idx.p_phi - 4.0).abs() < 5e-2 && (idx.q_phi - 4.0).abs() < 5e-2, "{idx:?}");
        assert!(!idx.clamped);
    }

    #[test]
    fn delta2_examples() {
        for p in [1.0, 2.0, 3.7] {
            let k = OrliczFunction::power(p).unwrap().delta2_constant().value().unwrap();
            assert!((k - 2f64.powf(p)).abs() < 1e-9, "p={p}: {k}");
        }
        let k = powerlog().delta2_constant().value().unwrap();
        assert!(k <= 2f64.powf(1.7) + 1e-2);
        assert!(k <= powerlog().growth_function(2.0) * (1.0 + 1e-12));
        let exp = OrliczFunction::custom("exp-1", |t: f64| t.exp_m1());
        assert_eq!(exp.delta2_constant(), Delta2::Unbounded);
    }

    #[test]
    fn integral_bounds_for_powers() {
        let r = 2.0;
        let phi = OrliczFunction::power(r).unwrap();
        for p in [1.0, 1.5, 1.9] {
            let b = phi.index_integral_bound_low(p).unwrap();
            assert!((b - 1.0 / (r - p)).abs() < 1e-6, "B0({p}) = {b}");
        }
        for q in [2.2, 3.0, 5.0] {
            let b = phi.index_integral_bound_high(q).unwrap();
            assert!((b - 1.0 / (q - r)).abs() < 1e-6, "B1({q}) = {b}");
        }
        assert!(matches!(phi.index_integral_bound_low(r), Err(Error::Divergent(_))));
        assert!(matches!(phi.index_integral_bound_high(r), Err(Error::Divergent(_))));
    }

    #[test]
    fn spec_strings_round_trip_and_name_bad_keys() {
        for s in ["power:p=2", "powerlog:a=1.2,b=0.5", "powersin:p=4,c=0.2"] {
            let phi: OrliczFunction = s.parse().unwrap();
            assert_eq!(phi.to_string(), s);
        }
        let err = "powerlog:a=1.2,z=3".parse::<OrliczFunction>().unwrap_err().to_string();
        assert!(err.contains("`z`"), "{err}");
        let err = "powerlog:a=1.2".parse::<OrliczFunction>().unwrap_err().to_string();
        assert!(err.contains("`b`"), "{err}");
        let err = "power:p=two".parse::<OrliczFunction>().unwrap_err().to_string();
        assert!(err.contains("`p`"), "{err}");
        let err = "cosh:p=2".parse::<OrliczFunction>().unwrap_err().to_string();
        assert!(err.contains("`cosh`"), "{err}");
    }
}
