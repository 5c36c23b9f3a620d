// Copyright 2026 The unroll authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Argument parsing and the subcommands of the `unroll` binary.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use unroll_core::{
    best_linear, bilevel_optimal, c_constant, local_minima, optimal_omega, scalar_landscape, softplus,
    unrolling_optimal, CnRegime, DataKind, FrameDataset, Matrix, ModelParams, OptimalRiskReport, StepsizeMode,
    TrainConfig,
};

use crate::io::{self, csv_floats, emit, fmt_f64, IoError};
use crate::par::{build_pool, sweep_depth_par};
use crate::sweep::{self, Quantity, RiskSource, SweepSpec};
use crate::verify::{run_suite, SUITES};

pub const SUBCOMMANDS: &[&str] = &[
    "sweep",
    "verify",
    "train",
    "landscape",
    "c-constant",
    "best-risk",
    "optimal-omega",
];

/// How a command failed, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// A verification ran and did not pass.
    Check(String),
    /// Bad arguments or parameters.
    Usage(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<unroll_core::Error> for Failure {
    fn from(e: unroll_core::Error) -> Self {
        match e {
            unroll_core::Error::Diverged { .. } => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Core(c) => c.into(),
            other => Failure::Io(other.to_string()),
        }
    }
}

impl From<sweep::SweepError> for Failure {
    fn from(e: sweep::SweepError) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "unroll",
    version,
    about = "Optimal risks of bilevel and unrolled linear denoisers"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON object of flag values; flags on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Signal model: `const` or `iid`.
    #[arg(long, default_value = "const")]
    pub kind: DataKind,
    /// Signal length.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Standard deviation of the signal entries or level.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Failure> {
        Ok(ModelParams::new(
            self.n,
            self.mu,
            self.theta * self.theta,
            self.sigma * self.sigma,
            self.kind,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorClass {
    BestLinear,
    Bilevel,
    Unrolling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Fixed,
    Learned,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one quantity over a parameter grid.
    Sweep(SweepArgs),
    /// Run an oracle battery and report every check.
    Verify {
        #[arg(long)]
        suite: String,
    },
    /// Train a regularizer (and optionally the stepsize) on frames.
    Train(TrainArgs),
    /// Risk of the scalar unrolled estimator as a function of `r`.
    Landscape {
        #[arg(long = "n-steps")]
        n_steps: usize,
        #[arg(long)]
        omega: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long = "r-max", default_value_t = 8.0)]
        r_max: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Spectral floor of odd-depth unrolled estimators.
    CConstant {
        #[arg(long = "n-steps")]
        n_steps: usize,
        #[arg(long)]
        omega: f64,
    },
    /// Optimal risk, estimator and regularizer of one estimator class.
    BestRisk {
        #[arg(long, value_enum)]
        class: EstimatorClass,
        #[command(flatten)]
        model: ModelArgs,
        /// Regularizer rows; defaults to `n`.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long = "n-steps")]
        n_steps: Option<usize>,
        #[arg(long)]
        omega: Option<f64>,
        /// Write the optimal regularizer (CSV, or binary for `.bin`).
        #[arg(long = "regularizer-out")]
        regularizer_out: Option<PathBuf>,
    },
    /// Stepsize minimizing the optimal unrolled risk.
    OptimalOmega {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long = "n-steps")]
        n_steps: usize,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub quantity: Quantity,
    /// Comma-separated lists; integers accept `a:b[:step]`, reals
    /// `lo:hi:count` (inclusive, evenly spaced).
    #[arg(long, value_delimiter = ',', default_value = "const")]
    pub kind: Vec<DataKind>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub n: Vec<String>,
    /// Defaults to the `n` axis value when omitted.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<String>,
    #[arg(long = "n-steps", value_delimiter = ',', default_value = "2")]
    pub n_steps: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub omega: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub mu: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub theta: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub sigma: Vec<String>,
    #[arg(long, default_value = "best-linear")]
    pub numerator: RiskSource,
    #[arg(long, default_value = "bilevel")]
    pub denominator: RiskSource,
    #[arg(long = "mc-samples", default_value_t = 100_000)]
    pub mc_samples: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "n-steps", default_value_t = 1)]
    pub n_steps: usize,
    /// Comma-separated depths; runs both stepsize modes per depth and emits
    /// a table.
    #[arg(long, value_delimiter = ',')]
    pub depths: Vec<String>,
    /// Initial (or fixed) stepsize; defaults to softplus(-2).
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long, value_enum, default_value = "fixed")]
    pub mode: Mode,
    /// Number of synthetic frames.
    #[arg(long, default_value_t = 1000)]
    pub frames: usize,
    /// Signal file (CSV or raw little-endian f64) to cut into frames.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Keep at most this many frames from `--input`.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long = "lr", default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[arg(long = "batch-size")]
    pub batch_size: Option<usize>,
    #[arg(long = "init-scale", default_value_t = 1.0)]
    pub init_scale: f64,
    #[arg(long = "heldout-fraction", default_value_t = 0.2)]
    pub heldout_fraction: f64,
    #[arg(long = "regularizer-out")]
    pub regularizer_out: Option<PathBuf>,
}

/// Splices the flags of a `--config` JSON file in right after the subcommand
/// name, so that flags given later on the command line override them.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(Failure::Io(format!("{}: expected a JSON object", path.display())));
    };
    let mut injected: Vec<OsString> = Vec::new();
    for (key, v) in map {
        if key == "config" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &Value| match v {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            Value::Bool(b) => Some(b.to_string()),
            _ => None,
        };
        match &v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => injected.push(flag.into()),
            Value::Array(items) => {
                let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
                let parts = parts.ok_or_else(|| Failure::Usage(format!("config key {key}: nested values")))?;
                injected.push(flag.into());
                injected.push(parts.join(",").into());
            }
            Value::Object(_) => return Err(Failure::Usage(format!("config key {key}: nested object"))),
            other => {
                injected.push(flag.into());
                injected.push(scalar(other).expect("scalar").into());
            }
        }
    }
    let at = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map_or(1.min(args.len()), |i| i + 1);
    let mut out = args[..at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

fn parse_ints(items: &[String], name: &str) -> Result<Vec<usize>, Failure> {
    let bad = |s: &str| Failure::Usage(format!("--{name}: cannot parse {s:?}"));
    let mut out = Vec::new();
    for item in items {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad(item));
        match parts.as_slice() {
            [one] => out.push(num(one)?),
            [a, b] | [a, b, _] => {
                let step = if parts.len() == 3 { num(parts[2])? } else { 1 };
                if step == 0 {
                    return Err(bad(item));
                }
                out.extend((num(a)?..=num(b)?).step_by(step));
            }
            _ => return Err(bad(item)),
        }
    }
    Ok(out)
}

fn parse_reals(items: &[String], name: &str) -> Result<Vec<f64>, Failure> {
    let bad = |s: &str| Failure::Usage(format!("--{name}: cannot parse {s:?}"));
    let mut out = Vec::new();
    for item in items {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(item));
        match parts.as_slice() {
            [one] => out.push(num(one)?),
            [lo, hi, count] => {
                let (lo, hi) = (num(lo)?, num(hi)?);
                let count: usize = count.parse().map_err(|_| bad(item))?;
                match count {
                    0 => return Err(bad(item)),
                    1 => out.push(lo),
                    _ => out.extend((0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)),
                }
            }
            _ => return Err(bad(item)),
        }
    }
    Ok(out)
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn matrix_json(m: &Matrix) -> Value {
    Value::Array((0..m.rows()).map(|i| json!(m.row(i))).collect())
}

fn report_json(rep: &OptimalRiskReport) -> Value {
    json!({
        "risk": rep.risk,
        "attained": rep.attained,
        "branch": rep.branch.to_string(),
        "constants": rep.constants,
        "estimator": rep.estimator.as_ref().map(|t| matrix_json(t.matrix())),
        "regularizer": rep.regularizer.as_ref().map(|r| matrix_json(r.matrix())),
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> Outcome {
    let args = expand_config(args.into_iter().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(Failure::Usage(e.render().to_string()));
        }
    };
    let pool = build_pool(cli.threads).map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    pool.install(|| dispatch(&cli))
}

fn dispatch(cli: &Cli) -> Outcome {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Sweep(args) => cmd_sweep(args, cli.seed, cli.format.unwrap_or(Format::Csv), out),
        Command::Verify { suite } => cmd_verify(suite, cli.seed, out),
        Command::Train(args) => cmd_train(args, cli.seed, cli.format, out),
        Command::Landscape {
            n_steps,
            omega,
            mu,
            theta,
            sigma,
            r_max,
            points,
        } => {
            let params = ModelParams::new(1, *mu, theta * theta, sigma * sigma, DataKind::RandomConstant)?;
            cmd_landscape(
                *n_steps,
                *omega,
                &params,
                *r_max,
                *points,
                cli.format.unwrap_or(Format::Csv),
                out,
            )
        }
        Command::CConstant { n_steps, omega } => {
            let c = c_constant(*n_steps, *omega)?;
            let branch = match c.regime {
                CnRegime::Bounds => "bounds",
                CnRegime::Else => "else",
            };
            let value = json!({
                "branch": branch,
                "lower": c.lower,
                "upper": c.upper,
                "value": c.value,
                "argmin_s": c.argmin_s,
            });
            Ok(emit(out, &pretty(&value))?)
        }
        Command::BestRisk {
            class,
            model,
            k,
            n_steps,
            omega,
            regularizer_out,
        } => {
            let params = model.params()?;
            let k = k.unwrap_or(params.n);
            let rep = match class {
                EstimatorClass::BestLinear => best_linear(&params)?,
                EstimatorClass::Bilevel => bilevel_optimal(&params, k)?,
                EstimatorClass::Unrolling => {
                    let depth = n_steps.ok_or_else(|| Failure::Usage("--n-steps is required for unrolling".into()))?;
                    let omega = omega.ok_or_else(|| Failure::Usage("--omega is required for unrolling".into()))?;
                    unrolling_optimal(&params, k, depth, omega)?
                }
            };
            if let Some(path) = regularizer_out {
                let reg = rep
                    .regularizer
                    .as_ref()
                    .ok_or_else(|| Failure::Check("the optimum is not attained; no regularizer to write".into()))?;
                io::write_regularizer(reg, path)?;
            }
            Ok(emit(out, &pretty(&report_json(&rep)))?)
        }
        Command::OptimalOmega { model, k, n_steps } => {
            let params = model.params()?;
            let rep = optimal_omega(&params, k.unwrap_or(params.n), *n_steps)?;
            let value = json!({
                "omegas": rep.omegas,
                "omega": rep.omegas.representative(),
                "risk": rep.risk,
                "method": rep.method,
            });
            Ok(emit(out, &pretty(&value))?)
        }
    }
}

fn cmd_sweep(args: &SweepArgs, seed: u64, format: Format, out: Option<&Path>) -> Outcome {
    let n = parse_ints(&args.n, "n")?;
    let k = if args.k.is_empty() {
        Vec::new()
    } else {
        parse_ints(&args.k, "k")?
    };
    let spec = SweepSpec {
        quantity: args.quantity,
        kind: args.kind.clone(),
        k: if k.is_empty() { n.clone() } else { k },
        n,
        depth: parse_ints(&args.n_steps, "n-steps")?,
        omega: parse_reals(&args.omega, "omega")?,
        mu: parse_reals(&args.mu, "mu")?,
        theta: parse_reals(&args.theta, "theta")?,
        sigma: parse_reals(&args.sigma, "sigma")?,
        numerator: args.numerator,
        denominator: args.denominator,
        mc_samples: args.mc_samples,
        seed,
    };
    eprintln!("sweep: {} cells", spec.cell_count());
    let rows = sweep::run(&spec)?;
    let cols = spec.columns();
    let text = match format {
        Format::Csv => sweep::to_csv(&cols, &rows),
        Format::Json => sweep::to_json(&cols, &rows),
    };
    Ok(emit(out, &text)?)
}

fn cmd_verify(suite: &str, seed: u64, out: Option<&Path>) -> Outcome {
    let report = run_suite(suite, seed)
        .ok_or_else(|| Failure::Usage(format!("unknown suite {suite:?}; available: {}", SUITES.join(", "))))?;
    let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
    emit(out, &text)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "suite {suite}: {} of {} checks passed, {} required",
            report.checks_passed, report.checks_total, report.required
        )))
    }
}

fn cmd_landscape(
    depth: usize,
    omega: f64,
    params: &ModelParams,
    r_max: f64,
    points: usize,
    format: Format,
    out: Option<&Path>,
) -> Outcome {
    if points < 2 || r_max.is_nan() || r_max <= 0.0 {
        return Err(Failure::Usage(
            "--points must be at least 2 and --r-max positive".into(),
        ));
    }
    let grid: Vec<f64> = (0..points).map(|i| r_max * i as f64 / (points - 1) as f64).collect();
    let risk = scalar_landscape(depth, omega, params, &grid)?;
    let minima: Vec<f64> = local_minima(&risk).into_iter().map(|i| grid[i]).collect();
    eprintln!(
        "landscape: {} local minima at r = {}",
        minima.len(),
        csv_floats(&minima)
    );
    let text = match format {
        Format::Csv => {
            let mut s = String::from("r,risk\n");
            for (r, v) in grid.iter().zip(&risk) {
                let _ = writeln!(s, "{},{}", fmt_f64(*r), fmt_f64(*v));
            }
            s
        }
        Format::Json => pretty(&json!({ "r": grid, "risk": risk, "minima": minima })),
    };
    Ok(emit(out, &text)?)
}

fn cmd_train(args: &TrainArgs, seed: u64, format: Option<Format>, out: Option<&Path>) -> Outcome {
    let params = args.model.params()?;
    let n = params.n;
    let k = args.k.unwrap_or(n);
    let omega = args.omega.unwrap_or_else(|| softplus(-2.0));
    let stepsize = match args.mode {
        Mode::Fixed => StepsizeMode::Fixed(omega),
        Mode::Learned => StepsizeMode::Learned(unroll_core::softplus_inv(omega)),
    };
    let mut cfg = TrainConfig::new(k, n, args.n_steps, stepsize);
    cfg.learning_rate = args.learning_rate;
    cfg.steps = args.steps;
    cfg.batch_size = args.batch_size;
    cfg.seed = seed;
    cfg.init_scale = args.init_scale;
    cfg.heldout_fraction = args.heldout_fraction;
    cfg.validate()?;

    let data = match &args.input {
        Some(path) => io::ingest_frames(path, n, args.limit, args.model.sigma)?,
        None => FrameDataset::synthetic(&params, args.frames, seed)?,
    };

    if !args.depths.is_empty() {
        let depths = parse_ints(&args.depths, "depths")?;
        let rows = sweep_depth_par(&cfg, &data, &depths)?;
        let text = match format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let mut s = String::from("N,mode,k,n,omega_final,mse_train,mse_heldout,seed\n");
                for r in &rows {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{}",
                        r.depth,
                        r.mode,
                        r.k,
                        r.n,
                        fmt_f64(r.omega_final),
                        fmt_f64(r.mse_train),
                        fmt_f64(r.mse_heldout),
                        r.seed
                    );
                }
                s
            }
            Format::Json => pretty(&serde_json::to_value(&rows).expect("serializable")),
        };
        return Ok(emit(out, &text)?);
    }

    let res = unroll_core::train(&cfg, &data)?;
    if let Some(path) = &args.regularizer_out {
        io::write_regularizer(&res.regularizer, path)?;
    }
    let value = json!({
        "N": cfg.depth,
        "mode": cfg.stepsize.label(),
        "k": k,
        "n": n,
        "frames": data.len(),
        "omega_final": res.omega,
        "mse_train": res.mse_train,
        "mse_heldout": res.mse_heldout,
        "seed": res.seed,
        "loss_trace": res.loss_trace,
    });
    if format == Some(Format::Csv) {
        return Err(Failure::Usage(
            "a single training run is reported as JSON; use --depths for CSV".into(),
        ));
    }
    Ok(emit(out, &pretty(&value))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn integer_ranges() {
        assert_eq!(parse_ints(&strs(&["1:4", "10"]), "k").unwrap(), vec![1, 2, 3, 4, 10]);
        assert_eq!(parse_ints(&strs(&["0:10:5"]), "k").unwrap(), vec![0, 5, 10]);
        assert!(parse_ints(&strs(&["x"]), "k").is_err());
    }

    #[test]
    fn real_ranges() {
        assert_eq!(parse_reals(&strs(&["0:1:3"]), "t").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_reals(&strs(&["0.25"]), "t").unwrap(), vec![0.25]);
        assert!(parse_reals(&strs(&["0:1"]), "t").is_err());
    }

    #[test]
    fn config_lands_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"n_steps": 3, "omega": 0.1, "flag": true, "list": [1, 2]}"#).unwrap();
        let args: Vec<OsString> = [
            "unroll",
            "--config",
            path.to_str().unwrap(),
            "c-constant",
            "--omega",
            "1.8",
        ]
        .iter()
        .map(OsString::from)
        .collect();
        let out: Vec<String> = expand_config(args)
            .unwrap()
            .into_iter()
            .map(|s| s.into_string().unwrap())
            .collect();
        assert_eq!(
            &out[4..],
            &[
                "--n-steps",
                "3",
                "--omega",
                "0.1",
                "--flag",
                "--list",
                "1,2",
                "--omega",
                "1.8"
            ]
        );
    }
}
