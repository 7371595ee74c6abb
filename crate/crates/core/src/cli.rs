//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error, 3 invalid
//! configuration, 4 engine cap exceeded, 5 self-test failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Deserializer, Serialize};

use crate::experiments::{self, parse_range, Engine, Protocol, ProtocolKind, RunOutput};
use crate::models::{ModelKind, ModelSpec, PARAM_NAMES};
use crate::{selftest, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_CAP: i32 = 4;
pub const EXIT_SELFTEST: i32 = 5;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "BOUNDARY_CHARGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "boundary-charge", version, about = "Charge dynamics of 1D chains under a symmetry-breaking boundary term")]
struct Cli {
    /// Worker threads (falls back to BOUNDARY_CHARGE_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Progress and timing on stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Charge variance at t = 2L over a parameter grid.
    Scan(RunArgs),
    /// N(t) and E(t) for a boundary switched on at t = L.
    Quench(RunArgs),
    /// Charge variance after round(t/2) periods of the two-step drive.
    Floquet(RunArgs),
    /// Right-half charge variance of two coupled half-chains.
    Transport(RunArgs),
    /// Frozen/fluctuating labels over a two-parameter grid (JSON, plus CSV next to --output).
    PhaseDiagram(RunArgs),
    /// Mean boundary matrix element between near-degenerate states of neighbouring charges.
    Criterion(RunArgs),
    /// Oracle-equivalence suite.
    Selftest(SelftestArgs),
}

/// Values written with `:` or `,` become sweeps; a plain number fixes the parameter.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunArgs {
    /// JSON file with the same keys as the long flags; flags win.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// free | interacting | xxz | spinful | transport
    #[arg(long)]
    model: Option<String>,
    /// System sizes, e.g. `50,100,200`.
    #[arg(long = "L")]
    #[serde(rename = "L", default, deserialize_with = "loose_string")]
    l: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "loose_string")]
    t0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "loose_string")]
    mu0: Option<String>,
    #[arg(long = "Delta", allow_hyphen_values = true)]
    #[serde(rename = "Delta", default, deserialize_with = "loose_string")]
    delta: Option<String>,
    #[arg(long = "U", allow_hyphen_values = true)]
    #[serde(rename = "U", default, deserialize_with = "loose_string")]
    u: Option<String>,
    #[arg(long = "Jperp", allow_hyphen_values = true)]
    #[serde(rename = "Jperp", default, deserialize_with = "loose_string")]
    jperp: Option<String>,
    #[arg(long = "Jz", allow_hyphen_values = true)]
    #[serde(rename = "Jz", default, deserialize_with = "loose_string")]
    jz: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "loose_string")]
    h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "loose_string")]
    tl: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "loose_string")]
    tr: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "loose_string")]
    mul: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "loose_string")]
    mur: Option<String>,
    /// Open chain instead of a ring.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    open: Option<bool>,
    /// Drop the boundary term.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    boundary_off: Option<bool>,
    /// Filling (left half for transport, spin-up fraction for spinful).
    #[arg(long)]
    nu: Option<f64>,
    /// Right-half filling (transport).
    #[arg(long)]
    nu_r: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// auto | gaussian | ed
    #[arg(long)]
    engine: Option<String>,
    /// Measurement time (default 2L).
    #[arg(long)]
    time: Option<f64>,
    #[arg(long)]
    energy_tol: Option<f64>,
    /// Maximum number of sampled degenerate pairs.
    #[arg(long)]
    pairs: Option<usize>,
    /// Variance-density threshold of the frozen label.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    growth_ratio: Option<f64>,
    /// Quench time-grid points over [0, 2L].
    #[arg(long)]
    time_steps: Option<usize>,
    /// Largest ED sector dimension.
    #[arg(long)]
    dim_cap: Option<usize>,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// JSON report file.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Accepts a string, a number or an array of numbers.
fn loose_string<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    use serde::de::Error as _;
    let v = Option::<serde_json::Value>::deserialize(d)?;
    let scalar = |v: &serde_json::Value| match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(D::Error::custom(format!("expected a number or string, found {other}"))),
    };
    match v {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(serde_json::Value::Array(items)) => Ok(Some(items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(","))),
        Some(other) => scalar(&other).map(Some),
    }
}

enum Failure {
    Lib(Error),
    SelftestFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::InvalidModel(_)
        | Error::UnsupportedModel(_)
        | Error::UnrealizableCharge(_)
        | Error::SectorIncompatible(_)
        | Error::InvalidSites(_) => EXIT_CONFIG,
        Error::CapExceeded { .. } => EXIT_CAP,
        _ => EXIT_RUNTIME,
    }
}

impl RunArgs {
    /// Config file values under the flags given on the command line.
    fn merged(self) -> Result<RunArgs, Error> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = std::fs::read_to_string(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut base: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let Some(map) = base.as_object_mut() else {
            return Err(Error::Config(format!("{}: expected a JSON object", path.display())));
        };
        let flags = serde_json::to_value(&self)?;
        for (k, v) in flags.as_object().into_iter().flatten() {
            if !v.is_null() {
                map.insert(k.clone(), v.clone());
            }
        }
        let mut out: RunArgs = serde_json::from_value(base).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        out.config = self.config;
        Ok(out)
    }

    fn params(&self) -> [(&'static str, &Option<String>); 11] {
        let names = PARAM_NAMES;
        [
            (names[0], &self.t0),
            (names[1], &self.mu0),
            (names[2], &self.delta),
            (names[3], &self.u),
            (names[4], &self.jperp),
            (names[5], &self.jz),
            (names[6], &self.h),
            (names[7], &self.tl),
            (names[8], &self.tr),
            (names[9], &self.mul),
            (names[10], &self.mur),
        ]
    }

    fn protocol(&self, kind: ProtocolKind) -> Result<Protocol, Error> {
        let model = self.model.as_deref().ok_or_else(|| Error::Config("--model is required".into()))?;
        let sizes_text = self.l.as_deref().ok_or_else(|| Error::Config("--L is required".into()))?;
        let sizes = parse_range(sizes_text)?
            .into_iter()
            .map(|v| {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::Config(format!("system size {v} is not a positive integer")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut spec = ModelSpec::new(ModelKind::parse(model)?, sizes[0]);
        spec.periodic = !self.open.unwrap_or(false);
        spec.boundary_on = !self.boundary_off.unwrap_or(false);
        let mut sweeps = Vec::new();
        for (name, value) in self.params() {
            let Some(text) = value else { continue };
            let values = parse_range(text)?;
            if text.contains([':', ',']) {
                sweeps.push((name, values));
            } else {
                spec.set_param(name, values[0])?;
            }
        }
        let mut p = Protocol::new(kind, spec).with_sizes(sizes);
        for (name, values) in sweeps {
            p = p.with_sweep(name, values);
        }
        if let Some(v) = self.nu {
            p.nu = v;
        }
        if let Some(v) = self.nu_r {
            p.nu_r = v;
        }
        if let Some(v) = self.samples {
            p.n_samples = v;
        }
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if let Some(e) = &self.engine {
            p.engine = Engine::parse(e)?;
        }
        p.time = self.time.or(p.time);
        p.energy_tol = self.energy_tol.or(p.energy_tol);
        if let Some(v) = self.pairs {
            p.max_pairs = v;
        }
        if let Some(v) = self.threshold {
            p.threshold = v;
        }
        if let Some(v) = self.growth_ratio {
            p.growth_ratio = v;
        }
        if let Some(v) = self.time_steps {
            p.time_steps = v;
        }
        if let Some(v) = self.dim_cap {
            p.dim_cap = v;
        }
        p.validate()?;
        Ok(p)
    }
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn sibling_csv(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|e| e == "json") {
        path.with_extension("csv")
    } else {
        let mut s = path.as_os_str().to_owned();
        s.push(".csv");
        PathBuf::from(s)
    }
}

fn run_protocol(kind: ProtocolKind, args: RunArgs, verbose: u8) -> Result<(), Failure> {
    let args = args.merged()?;
    let protocol = args.protocol(kind)?;
    let start = Instant::now();
    let out = experiments::run(&protocol)?;
    let mut buf = Vec::new();
    let rows = match &out {
        RunOutput::Scan(s) => {
            s.write_csv(&mut buf)?;
            s.rows.len()
        }
        RunOutput::Quench(q) => {
            q.write_csv(&mut buf)?;
            q.rows.len()
        }
        RunOutput::Criterion(c) => {
            c.write_csv(&mut buf)?;
            c.rows.len()
        }
        RunOutput::Phase(d) => {
            d.write_json(&mut buf)?;
            buf.push(b'\n');
            if let Some(path) = &args.output {
                let mut csv = Vec::new();
                d.scan.write_csv(&mut csv)?;
                emit(Some(&sibling_csv(path)), &csv)?;
            }
            d.cells.len()
        }
    };
    emit(args.output.as_deref(), &buf)?;
    if verbose > 0 {
        let dest = args.output.as_ref().map_or("stdout".to_string(), |p| p.display().to_string());
        eprintln!("{rows} rows to {dest} in {:.2?}", start.elapsed());
    }
    Ok(())
}

fn run_selftest(args: SelftestArgs) -> Result<(), Failure> {
    let report = selftest::run(args.seed)?;
    for c in &report.checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} {} cases={} worst={:e} tol={:e}", c.name, c.cases, c.worst, c.tolerance);
    }
    if let Some(path) = &args.output {
        let mut buf = serde_json::to_vec_pretty(&report).map_err(Error::from)?;
        buf.push(b'\n');
        emit(Some(path), &buf)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::SelftestFailed)
    }
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, Error> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map(Some).map_err(|_| Error::Config(format!("{THREADS_ENV}={v} is not a thread count")))
        }
        _ => Ok(None),
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let verbose = cli.verbose;
    let job = move || match cli.command {
        Command::Scan(a) => run_protocol(ProtocolKind::SteadyScan, a, verbose),
        Command::Quench(a) => run_protocol(ProtocolKind::QuenchEnergy, a, verbose),
        Command::Floquet(a) => run_protocol(ProtocolKind::FloquetScan, a, verbose),
        Command::Transport(a) => run_protocol(ProtocolKind::TransportScan, a, verbose),
        Command::PhaseDiagram(a) => run_protocol(ProtocolKind::PhaseDiagram2d, a, verbose),
        Command::Criterion(a) => run_protocol(ProtocolKind::CriterionScan, a, verbose),
        Command::Selftest(a) => run_selftest(a),
    };
    match threads(cli.threads)? {
        Some(0) => Err(Error::Config("--threads must be at least 1".into()).into()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::Config(e.to_string()))?;
            pool.install(job)
        }
        None => job(),
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    faer::set_global_parallelism(faer::Par::Seq);
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::SelftestFailed) => {
            eprintln!("error: self-test failed");
            EXIT_SELFTEST
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(argv: &[&str]) -> RunArgs {
        let cli = Cli::try_parse_from(std::iter::once("bc").chain(argv.iter().copied())).unwrap();
        match cli.command {
            Command::Scan(a) | Command::Criterion(a) | Command::PhaseDiagram(a) => a,
            _ => panic!(),
        }
    }

    #[test]
    fn ranges_sweep_and_numbers_fix() {
        let a = args(&["scan", "--model", "interacting", "--L", "8,10", "--mu0", "0:4:0.25", "--U", "2", "--Delta=-1"]);
        let p = a.protocol(ProtocolKind::SteadyScan).unwrap();
        assert_eq!(p.sizes, vec![8, 10]);
        assert_eq!(p.param_names(), vec!["mu0"]);
        assert_eq!(p.sweeps[0].values.len(), 17);
        assert_eq!((p.model.u, p.model.delta), (2.0, -1.0));
        assert_eq!(p.n_samples, 50);
    }

    #[test]
    fn single_value_list_is_a_sweep() {
        let a = args(&["criterion", "--model", "interacting", "--L", "12", "--mu0", "2,"]);
        assert!(a.protocol(ProtocolKind::CriterionScan).is_err());
        let a = args(&["criterion", "--model", "interacting", "--L", "12", "--mu0", "2:2:1"]);
        assert_eq!(a.protocol(ProtocolKind::CriterionScan).unwrap().sweeps[0].values, vec![2.0]);
    }

    #[test]
    fn config_merges_under_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"model": "free", "L": [50, 100], "mu0": 3, "samples": 40, "seed": 9, "Delta": "0:1:0.5"}"#).unwrap();
        let a = args(&["scan", "--config", path.to_str().unwrap(), "--seed", "11"]).merged().unwrap();
        let p = a.protocol(ProtocolKind::SteadyScan).unwrap();
        assert_eq!(p.sizes, vec![50, 100]);
        assert_eq!((p.model.mu0, p.n_samples, p.seed), (3.0, 40, 11));
        assert_eq!(p.sweeps[0].values, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn unknown_config_key_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, r#"{"model": "free", "L": 8, "colour": 1}"#).unwrap();
        let e = args(&["scan", "--config", path.to_str().unwrap()]).merged().unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CONFIG);
    }

    #[test]
    fn bad_sizes_and_missing_model() {
        for argv in [
            &["scan", "--model", "free", "--L", "8.5"][..],
            &["scan", "--model", "free", "--L", "0"],
            &["scan", "--L", "8"],
            &["scan", "--model", "free"],
            &["scan", "--model", "nope", "--L", "8"],
            &["scan", "--model", "free", "--L", "8", "--engine", "fast"],
        ] {
            let e = args(argv).protocol(ProtocolKind::SteadyScan).unwrap_err();
            assert_eq!(exit_code(&e), EXIT_CONFIG, "{argv:?}");
        }
    }

    #[test]
    fn sibling_csv_paths() {
        assert_eq!(sibling_csv(Path::new("out/pd.json")), PathBuf::from("out/pd.csv"));
        assert_eq!(sibling_csv(Path::new("pd")), PathBuf::from("pd.csv"));
    }
}
