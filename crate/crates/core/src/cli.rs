//! The `ncorlicz` command line.
//!
//! Settings resolve as defaults < `--config` file < flags. Exit codes: 0 when
//! every asserted check holds (findings-only reports count as success), 1 when
//! an asserted check fails, 2 for usage, config and regime errors.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::martingale::FiltrationSpec;
use crate::noise_fourier::RademacherMode;
use crate::orlicz::{Delta2, IndexEstimate, OrliczFunction};
use crate::report::VerificationReport;
use crate::verify::{
    ensemble_run, run_one, verify_interpolation_target, AlphaSpec, EnsembleConfig, Exponent, Generator, Inequality,
    InterpolationTarget, VerifierFailure,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ncorlicz", version, about = "Orlicz-modular inequalities for matrix martingales")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the lower and upper indices of Φ.
    Indices(PhiArgs),
    /// Δ₂ constant and sup t·Φ'(t)/Φ(t).
    Delta2(PhiArgs),
    /// Check τ(Φ(|Tx|)) ≤ C·τ(Φ(|x|)) with the certified constant.
    Interpolate {
        /// identity, scale:<c>, transform, stein-column or stein-row.
        #[arg(long, default_value = "identity")]
        op: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run one verifier.
    Verify {
        #[arg(value_enum)]
        which: VerifierName,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run several verifiers with a shared seed.
    Ensemble {
        /// Comma-separated list of transform, signs, stein, khintchine, bg, or `all`.
        #[arg(long, default_value = "all")]
        which: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifierName {
    Transform,
    Stein,
    Khintchine,
    Bg,
    Signs,
}

impl From<VerifierName> for Inequality {
    fn from(v: VerifierName) -> Self {
        match v {
            VerifierName::Transform => Inequality::Transform,
            VerifierName::Stein => Inequality::Stein,
            VerifierName::Khintchine => Inequality::Khintchine,
            VerifierName::Bg => Inequality::Bg,
            VerifierName::Signs => Inequality::Signs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct PhiArgs {
    /// Φ spec, e.g. `power:p=2`, `powerlog:a=1.2,b=0.5`, `powersin:p=4,c=0.2`.
    #[arg(long, value_parser = parse_phi)]
    pub phi: OrliczFunction,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_phi)]
    pub phi: Option<OrliczFunction>,
    /// Inline JSON (`{"model":"tensor","factors":3}`) or a path to a JSON file.
    #[arg(long)]
    pub filtration: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `ones`, `alternating` or a comma-separated list.
    #[arg(long, value_parser = parse_alpha, allow_hyphen_values = true)]
    pub alpha: Option<AlphaSpec>,
    /// `exact` or `mc:<samples>`.
    #[arg(long, value_parser = parse_rademacher)]
    pub rademacher: Option<RademacherMode>,
    /// Quadrature nodes for lacunary circle checks.
    #[arg(long)]
    pub quad: Option<u64>,
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub step_tolerance: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    pub p0: Option<Exponent>,
    /// A number or `inf`.
    #[arg(long, value_parser = parse_exponent)]
    pub p1: Option<Exponent>,
    /// `gaussian` or `diagonal`.
    #[arg(long, value_parser = parse_generator)]
    pub generator: Option<Generator>,
    #[arg(long)]
    pub scale_decades: Option<f64>,
    #[arg(long)]
    pub hermitian: bool,
    /// Run regime-gated verifiers outside their regime.
    #[arg(long)]
    pub regime_override: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_phi(s: &str) -> std::result::Result<OrliczFunction, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_alpha(s: &str) -> std::result::Result<AlphaSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_rademacher(s: &str) -> std::result::Result<RademacherMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_exponent(s: &str) -> std::result::Result<Exponent, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_generator(s: &str) -> std::result::Result<Generator, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_filtration(s: &str) -> Result<FiltrationSpec> {
    let text = if s.trim_start().starts_with('{') { s.to_string() } else { fs::read_to_string(s)? };
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidFiltration(format!("`{s}`: {e}")))
}

impl CommonArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<EnsembleConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                serde_json::from_str::<EnsembleConfig>(&text)
                    .map_err(|e| Error::InvalidArgument(format!("config `{}`: {e}", path.display())))?
            }
            None => EnsembleConfig::default(),
        };
        if let Some(phi) = &self.phi {
            cfg.phi = phi.clone();
        }
        if let Some(f) = &self.filtration {
            cfg.filtration = Some(parse_filtration(f)?);
        }
        if self.dim.is_some() {
            cfg.dim = self.dim;
        }
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field.clone() { cfg.$field = v; } )* };
        }
        set!(samples, seed, alpha, rademacher, terms, generator, scale_decades);
        if self.quad.is_some() {
            cfg.quad = self.quad;
        }
        if self.p0.is_some() {
            cfg.p0 = self.p0;
        }
        if self.p1.is_some() {
            cfg.p1 = self.p1;
        }
        if let Some(v) = self.restarts {
            cfg.optimizer.restarts = v;
        }
        if let Some(v) = self.iterations {
            cfg.optimizer.iterations = v;
        }
        if let Some(v) = self.step_tolerance {
            cfg.optimizer.step_tolerance = v;
        }
        cfg.hermitian |= self.hermitian;
        cfg.regime_override |= self.regime_override;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct IndicesOutput<'a> {
    phi: String,
    #[serde(flatten)]
    estimate: &'a IndexEstimate,
}

#[derive(Serialize)]
struct Delta2Output {
    phi: String,
    /// `null` when Δ₂ fails.
    delta2: Option<f64>,
    bounded: bool,
    log_derivative_sup: f64,
}

#[derive(Serialize)]
struct EnsembleOutput<'a> {
    reports: &'a [VerificationReport],
    failures: &'a [VerifierFailure],
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Indices(args) => {
            let est = args.phi.indices();
            let out = IndicesOutput { phi: args.phi.to_string(), estimate: est };
            match args.output.format {
                Format::Json => emit_json(&out, args.output.out.as_deref())?,
                Format::Csv => emit_csv_record(&out, args.output.out.as_deref())?,
            }
            Ok(EXIT_OK)
        }
        Command::Delta2(args) => {
            let d = args.phi.delta2_constant();
            let out = Delta2Output {
                phi: args.phi.to_string(),
                delta2: d.value(),
                bounded: matches!(d, Delta2::Finite(_)),
                log_derivative_sup: args.phi.log_derivative_sup(),
            };
            match args.output.format {
                Format::Json => emit_json(&out, args.output.out.as_deref())?,
                Format::Csv => emit_csv_record(&out, args.output.out.as_deref())?,
            }
            Ok(EXIT_OK)
        }
        Command::Interpolate { op, common } => {
            let target: InterpolationTarget = op.parse()?;
            let cfg = common.resolve()?;
            let report = verify_interpolation_target(&cfg, &target)?;
            emit_reports(std::slice::from_ref(&report), &[], false, &common.output)?;
            Ok(exit_code(std::slice::from_ref(&report), &[]))
        }
        Command::Verify { which, common } => {
            let cfg = common.resolve()?;
            let report = run_one(&cfg, (*which).into())?;
            emit_reports(std::slice::from_ref(&report), &[], false, &common.output)?;
            Ok(exit_code(std::slice::from_ref(&report), &[]))
        }
        Command::Ensemble { which, common } => {
            let which = parse_which(which)?;
            let cfg = common.resolve()?;
            let outcome = ensemble_run(&cfg, &which);
            for f in &outcome.failures {
                eprintln!("error: {}: {}", f.inequality, f.message);
            }
            emit_reports(&outcome.reports, &outcome.failures, true, &common.output)?;
            Ok(exit_code(&outcome.reports, &outcome.failures))
        }
    }
}

/// `all` or a comma-separated list of inequality ids.
pub fn parse_which(s: &str) -> Result<Vec<Inequality>> {
    if s.trim() == "all" {
        return Ok(Inequality::ALL.to_vec());
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let w: Inequality = part.parse()?;
        if seen.insert(w) {
            out.push(w);
        }
    }
    Ok(out)
}

/// 2 if a verifier errored, else 1 if an asserted check failed, else 0.
pub fn exit_code(reports: &[VerificationReport], failures: &[VerifierFailure]) -> i32 {
    if !failures.is_empty() {
        EXIT_USAGE
    } else if reports.iter().any(|r| r.pass == Some(false)) {
        EXIT_FAILED
    } else {
        EXIT_OK
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit_json<T: Serialize + ?Sized>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut w = open_output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn emit_csv_record<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let json = serde_json::to_value(value)?;
    let map = json.as_object().ok_or_else(|| Error::InvalidArgument("expected an object".into()))?;
    let mut w = csv::Writer::from_writer(open_output(path)?);
    w.write_record(map.keys())?;
    w.write_record(map.values().map(|v| match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }))?;
    w.flush()?;
    Ok(())
}

/// Writes reports as JSON (a single report, or `{reports, failures}` for an
/// ensemble) or as CSV with one row per sample.
pub fn emit_reports(
    reports: &[VerificationReport],
    failures: &[VerifierFailure],
    ensemble: bool,
    output: &OutputArgs,
) -> Result<()> {
    let path = output.out.as_deref();
    match output.format {
        Format::Json if ensemble => emit_json(&EnsembleOutput { reports, failures }, path),
        Format::Json => emit_json(&reports[0], path),
        Format::Csv => write_csv(reports, open_output(path)?),
    }
}

/// Header `inequality,index,label,lhs,rhs,ratio,degenerate` followed by the
/// sorted union of metric keys; missing values are empty.
pub fn write_csv<W: Write>(reports: &[VerificationReport], out: W) -> Result<()> {
    let keys: BTreeSet<&str> =
        reports.iter().flat_map(|r| r.samples.iter().flat_map(|s| s.metrics.keys().map(String::as_str))).collect();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["inequality", "index", "label", "lhs", "rhs", "ratio", "degenerate"];
    header.extend(keys.iter().copied());
    w.write_record(&header)?;
    for r in reports {
        for s in &r.samples {
            let mut row = vec![
                r.inequality.clone(),
                s.index.to_string(),
                s.label.clone(),
                fmt_float(s.lhs),
                fmt_float(s.rhs),
                s.ratio.map(fmt_float).unwrap_or_default(),
                s.degenerate.to_string(),
            ];
            row.extend(keys.iter().map(|k| s.metrics.get(*k).map(|v| fmt_float(*v)).unwrap_or_default()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Shortest representation that parses back to the same f64.
fn fmt_float(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(args: &[&str]) -> CommonArgs {
        let mut argv = vec!["ncorlicz", "verify", "bg"];
        argv.extend_from_slice(args);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Verify { common, .. } => common,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"phi":"power:p=3","samples":7,"seed":5}"#).unwrap();
        let cfg = common(&["--config", path.to_str().unwrap(), "--seed", "9"]).resolve().unwrap();
        assert_eq!(cfg.phi.to_string(), "power:p=3");
        assert_eq!(cfg.samples, 7);
        assert_eq!(cfg.seed, 9);
        let cfg = common(&["--alpha", "-1,1,0.5", "--p1", "inf", "--filtration", r#"{"model":"tensor","factors":2}"#])
            .resolve()
            .unwrap();
        assert_eq!(cfg.alpha, AlphaSpec::Values(vec![-1.0, 1.0, 0.5]));
        assert!(cfg.p1.unwrap().0.is_infinite());
        assert_eq!(cfg.dim(), 4);
    }

    #[test]
    fn bad_tokens_are_named() {
        let err = Cli::try_parse_from(["ncorlicz", "indices", "--phi", "powerlog:a=1.2,q=3"]).unwrap_err();
        assert!(err.to_string().contains("`q`"), "{err}");
        assert_eq!(run(["ncorlicz", "indices", "--phi", "bogus:p=2"]), EXIT_USAGE);
        assert_eq!(run(["ncorlicz", "verify", "bg", "--filtration", "{\"model\":\"tree\"}"]), EXIT_USAGE);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"phi":"power:p=3","smaples":7}"#).unwrap();
        assert_eq!(run(["ncorlicz", "verify", "bg", "--config", path.to_str().unwrap()]), EXIT_USAGE);
    }

    #[test]
    fn which_lists() {
        assert_eq!(parse_which("all").unwrap().len(), 5);
        assert_eq!(parse_which("bg,stein,bg").unwrap(), vec![Inequality::Bg, Inequality::Stein]);
        assert!(parse_which("bg,foo").is_err());
        assert!(parse_which("").unwrap().is_empty());
    }

    #[test]
    fn exit_codes() {
        use crate::report::{Check, Regime, SampleRecord};
        let mut r = VerificationReport::new(
            "demo",
            Regime { p_phi: 2.0, q_phi: 2.0, label: String::new() },
            serde_json::Value::Null,
        );
        r.samples.push(SampleRecord::new(0, "x", 2.0, 1.0));
        r.finalize();
        assert_eq!(exit_code(&[r.clone()], &[]), EXIT_OK);
        r.checks.push(Check::new("c", "ratio", 1.0));
        r.finalize();
        assert_eq!(exit_code(&[r], &[]), EXIT_FAILED);
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let cfg = EnsembleConfig { phi: "power:p=3".parse().unwrap(), samples: 3, ..Default::default() };
        let r = run_one(&cfg, Inequality::Bg).unwrap();
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("inequality,index,label,lhs,rhs,ratio,degenerate,column,row"));
    }
}
