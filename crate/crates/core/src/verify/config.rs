use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::martingale::{Filtration, FiltrationSpec};
use crate::noise_fourier::RademacherMode;
use crate::orlicz::OrliczFunction;

/// Settings of the multi-start decomposition search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub iterations: usize,
    pub step_tolerance: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self { restarts: 3, iterations: 60, step_tolerance: 1e-6 }
    }
}

/// Martingale-transform symbol.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSpec {
    Ones,
    /// α_k = (−1)^k.
    Alternating,
    Values(Vec<f64>),
}

impl AlphaSpec {
    pub fn vector(&self, levels: usize) -> Result<Vec<Complex64>> {
        Ok(match self {
            AlphaSpec::Ones => vec![Complex64::new(1.0, 0.0); levels],
            AlphaSpec::Alternating => {
                (0..levels).map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect()
            }
            AlphaSpec::Values(v) => {
                if v.len() < levels {
                    return Err(Error::InvalidArgument(format!(
                        "alpha has {} entries but the filtration has {levels} levels",
                        v.len()
                    )));
                }
                v.iter().map(|a| Complex64::new(*a, 0.0)).collect()
            }
        })
    }

    /// sup_k |α_k| over the first `levels` entries.
    pub fn sup_abs(&self, levels: usize) -> Result<f64> {
        Ok(self.vector(levels)?.iter().map(|a| a.norm()).fold(0.0, f64::max))
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Ones => write!(f, "ones"),
            AlphaSpec::Alternating => write!(f, "alternating"),
            AlphaSpec::Values(v) => {
                let parts: Vec<String> = v.iter().map(|a| a.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

impl FromStr for AlphaSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ones" => Ok(AlphaSpec::Ones),
            "alternating" => Ok(AlphaSpec::Alternating),
            list => {
                let values: std::result::Result<Vec<f64>, _> = list.split(',').map(|t| t.trim().parse::<f64>()).collect();
                match values {
                    Ok(v) if !v.is_empty() && v.iter().all(|a| a.is_finite()) => Ok(AlphaSpec::Values(v)),
                    _ => Err(Error::InvalidArgument(format!(
                        "alpha `{s}`: expected `ones`, `alternating` or a comma-separated list of numbers"
                    ))),
                }
            }
        }
    }
}

impl Serialize for AlphaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlphaSpec::Values(v) => v.serialize(s),
            other => s.collect_str(other),
        }
    }
}

impl<'de> Deserialize<'de> for AlphaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Values(Vec<f64>),
        }
        match Raw::deserialize(d)? {
            Raw::Name(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Values(v) if !v.is_empty() => Ok(AlphaSpec::Values(v)),
            Raw::Values(_) => Err(serde::de::Error::custom("alpha list must be nonempty")),
        }
    }
}

/// Distribution of random inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    /// Complex Gaussian entries.
    Gaussian,
    /// Real diagonal operators (commuting, Hermitian).
    Diagonal,
}

impl FromStr for Generator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Generator::Gaussian),
            "diagonal" => Ok(Generator::Diagonal),
            _ => Err(Error::InvalidArgument(format!("generator `{s}`: expected `gaussian` or `diagonal`"))),
        }
    }
}

/// An interpolation exponent that may be infinite; serialized as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" => Ok(Exponent(f64::INFINITY)),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0)
                .map(Exponent)
                .ok_or_else(|| Error::InvalidArgument(format!("exponent `{s}` must be a positive number or `inf`"))),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v > 0.0 => Ok(Exponent(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("exponent must be positive, got {v}"))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Everything a verifier run depends on. A fixed seed makes runs bit-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub phi: OrliczFunction,
    /// Defaults to the tensor model on `dim` (which must then be a power of two).
    pub filtration: Option<FiltrationSpec>,
    /// Defaults to the filtration's dimension, or 8.
    pub dim: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub rademacher: RademacherMode,
    pub optimizer: OptimizerSettings,
    /// Length of Khintchine sequences.
    pub terms: usize,
    pub hermitian: bool,
    /// Inputs are scaled by 10^U(−s, s).
    pub scale_decades: f64,
    /// Interpolation exponents; default (1 + p_Φ)/2 and 2·q_Φ.
    pub p0: Option<Exponent>,
    pub p1: Option<Exponent>,
    pub alpha: AlphaSpec,
    /// Quadrature nodes for the lacunary circle checks in Khintchine runs.
    pub quad: Option<u64>,
    pub generator: Generator,
    /// Runs regime-gated verifiers outside their regime (sanity checks only).
    pub regime_override: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            phi: OrliczFunction::power_log(1.2, 0.5).expect("valid default"),
            filtration: None,
            dim: None,
            samples: 50,
            seed: 0,
            rademacher: RademacherMode::Exact,
            optimizer: OptimizerSettings::default(),
            terms: 4,
            hermitian: false,
            scale_decades: 1.0,
            p0: None,
            p1: None,
            alpha: AlphaSpec::Ones,
            quad: None,
            generator: Generator::Gaussian,
            regime_override: false,
        }
    }
}

pub const DEFAULT_DIM: usize = 8;

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        if self.terms == 0 {
            return Err(Error::InvalidArgument("terms must be at least 1".into()));
        }
        if !(self.scale_decades >= 0.0 && self.scale_decades <= 10.0) {
            return Err(Error::InvalidArgument(format!("scale_decades must lie in [0, 10], got {}", self.scale_decades)));
        }
        if self.optimizer.step_tolerance <= 0.0 || !self.optimizer.step_tolerance.is_finite() {
            return Err(Error::InvalidArgument("optimizer step_tolerance must be positive".into()));
        }
        if matches!(self.dim, Some(0)) {
            return Err(Error::InvalidArgument("dim must be positive".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match (&self.dim, &self.filtration) {
            (Some(d), _) => *d,
            (None, Some(spec)) => spec.build().map(|f| f.dim()).unwrap_or(DEFAULT_DIM),
            (None, None) => DEFAULT_DIM,
        }
    }

    pub fn filtration(&self) -> Result<Filtration> {
        let spec = match &self.filtration {
            Some(spec) => spec.clone(),
            None => FiltrationSpec::tensor_for_dim(self.dim())?,
        };
        let f = spec.build()?;
        if let Some(d) = self.dim {
            if d != f.dim() {
                return Err(Error::InvalidFiltration(format!(
                    "dim = {d} disagrees with the filtration's dimension {}",
                    f.dim()
                )));
            }
        }
        Ok(f)
    }

    /// (p0, p1), explicit or (1 + p_Φ)/2 and 2·q_Φ.
    pub fn exponents(&self) -> (f64, f64) {
        let idx = self.phi.indices();
        let p0 = self.p0.map_or(0.5 * (1.0 + idx.p_phi), |e| e.0);
        let p1 = self.p1.map_or(2.0 * idx.q_phi, |e| e.0);
        (p0, p1)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let cfg = EnsembleConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.dim(), 8);
        assert_eq!(cfg.filtration().unwrap().num_levels(), 3);
        let s = serde_json::to_string(&cfg).unwrap();
        let back: EnsembleConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: EnsembleConfig = serde_json::from_str(
            r#"{"phi":"power:p=3","filtration":{"model":"tensor","factors":2},"alpha":[1,-1],"p1":"inf","rademacher":"mc:100"}"#,
        )
        .unwrap();
        assert_eq!(cfg.dim(), 4);
        assert_eq!(cfg.samples, 50);
        assert_eq!(cfg.p1, Some(Exponent(f64::INFINITY)));
        assert_eq!(cfg.alpha, AlphaSpec::Values(vec![1.0, -1.0]));
        assert_eq!(cfg.rademacher, RademacherMode::MonteCarlo { samples: 100 });
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(serde_json::from_str::<EnsembleConfig>(r#"{"sampels":3}"#).is_err());
        assert!(serde_json::from_str::<EnsembleConfig>(r#"{"phi":"power:q=2"}"#).is_err());
        assert!(serde_json::from_str::<EnsembleConfig>(r#"{"optimizer":{"restart":2}}"#).is_err());
        let cfg = EnsembleConfig { dim: Some(6), ..Default::default() };
        assert!(cfg.validate().is_ok() && cfg.filtration().is_err());
        let cfg = EnsembleConfig {
            dim: Some(8),
            filtration: Some(FiltrationSpec::Tensor { factors: 2, scalar_level: false }),
            ..Default::default()
        };
        assert!(cfg.filtration().is_err());
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!("ones".parse::<AlphaSpec>().unwrap(), AlphaSpec::Ones);
        assert_eq!("1,-0.5".parse::<AlphaSpec>().unwrap(), AlphaSpec::Values(vec![1.0, -0.5]));
        assert!("1,x".parse::<AlphaSpec>().is_err());
        let v = AlphaSpec::Alternating.vector(3).unwrap();
        assert_eq!(v.iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, -1.0, 1.0]);
        assert!(AlphaSpec::Values(vec![1.0]).vector(2).is_err());
    }

    #[test]
    fn automatic_exponents() {
        let cfg = EnsembleConfig { phi: OrliczFunction::power(3.0).unwrap(), ..Default::default() };
        let (p0, p1) = cfg.exponents();
        assert!((p0 - 2.0).abs() < 1e-9 && (p1 - 6.0).abs() < 1e-9);
    }
}
