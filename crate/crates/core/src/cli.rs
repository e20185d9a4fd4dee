//! Command-line front end.
//!
//! Subcommands map onto the library surface: `plot-irf` emits response and
//! derivative curves, `check` runs the regularity-condition checkers over a
//! model file, `recover` reconstructs one item's curve (exactly from a model
//! file, or as a regressogram from a response matrix), `converge` measures
//! recovery error against model size, `bounds` verifies the concentration
//! bounds, and `simulate` writes seeded response data.
//!
//! Every command is deterministic given its flags and seed; timestamps live
//! only in the run manifest, which goes to stderr (and a `.manifest.json`
//! sidecar next to `--out`), so re-runs produce byte-identical outputs.
//!
//! Exit codes: 0 pass, 1 check or run failure, 2 usage/config error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{
    check_hoeffding, check_lemma1, check_lemma2, check_normal_approx, convergence_experiment,
    simulate_responses, BoundCheckReport, FamilySampler, LemmaCheckConfig, SimConfig,
};
use crate::irf::{
    check_condition3, check_condition4, derivative_limits, Irf, ItemFamily, ItemParams,
};
use crate::manifest::{rest_score_moments, ModelSpec};
use crate::recovery::{recover_irf_empirical, recover_irf_oracle, ResponseMatrix};

// ---------------------------------------------------------------------------
// Argument definitions
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "irt-identify",
    version,
    about = "Manifest distributions, condition checks, and identifiability experiments for monotone item response models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit theta, p, p_prime for one item over uniform and tail grids (CSV).
    PlotIrf(PlotArgs),
    /// Check derivative bounds, tail flatness, and endpoint limits per item.
    Check(CheckArgs),
    /// Recover one item's response curve from manifest data or responses.
    Recover(RecoverArgs),
    /// Measure oracle-recovery error along a grid of model sizes.
    Converge(ConvergeArgs),
    /// Verify concentration bounds behind the recovery argument.
    Bounds(BoundsArgs),
    /// Simulate seeded response data for a model or preset.
    Simulate(SimulateArgs),
}

#[derive(Args, Serialize)]
struct PlotArgs {
    /// Item parameter file (one `family a b [c d]` per line).
    #[arg(long)]
    model: PathBuf,
    /// Item index within the model file.
    #[arg(long, default_value_t = 0)]
    item: usize,
    /// Points on the uniform grid over (0.001, 0.999).
    #[arg(long, default_value_t = 999)]
    points: usize,
    /// Points on each geometric tail grid (1e-8 .. 1e-2 from either end).
    #[arg(long, default_value_t = 25)]
    tail_points: usize,
    /// Output path (stdout when omitted).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CheckArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.95)]
    beta: f64,
    /// Tail-flatness level.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Grid points for the derivative-bound certificate.
    #[arg(long, default_value_t = 1001)]
    grid: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct RecoverArgs {
    /// Model file: exact (oracle) recovery with a p_true column.
    #[arg(long, conflicts_with = "data")]
    model: Option<PathBuf>,
    /// Response matrix CSV: empirical regressogram recovery.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    item: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    /// Maximum regressogram bins (empirical mode).
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args, Serialize)]
struct ConvergeArgs {
    /// Model family preset.
    #[arg(long)]
    preset: String,
    /// Comma-separated model sizes.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100,200,400")]
    n_grid: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `json`: full report; `csv`: n,error curve.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BoundCheckKind {
    Lemma1,
    Lemma2,
    Hoeffding,
    NormalApprox,
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    /// Which bound to verify.
    #[arg(long, value_enum)]
    lemma: BoundCheckKind,
    /// Model family preset (lemma checks, or the model for hoeffding /
    /// normal-approx when no --model file is given).
    #[arg(long, default_value = "homogeneous-identity")]
    preset: String,
    /// Model file overriding the preset (hoeffding / normal-approx only).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Comma-separated model sizes for the lemma checks.
    #[arg(long, value_delimiter = ',', default_value = "11,21,41,81,161")]
    n_grid: Vec<usize>,
    /// Model size for hoeffding / normal-approx with a preset.
    #[arg(long, default_value_t = 101)]
    n: usize,
    /// Rest-score level as a fraction of n - 1.
    #[arg(long, default_value_t = 0.5)]
    k_ratio: f64,
    /// Explicit rest-score count for normal-approx (defaults to the mode).
    #[arg(long)]
    k: Option<usize>,
    /// Trait interval I_delta = (delta, 1 - delta) for lemma2.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Proof-window exponent (carried in reports).
    #[arg(long, default_value_t = 0.25)]
    eta: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    /// Hoeffding radius.
    #[arg(long, default_value_t = 0.1)]
    m: f64,
    /// Conditioning trait value for hoeffding / normal-approx.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Excluded item for hoeffding / normal-approx.
    #[arg(long, default_value_t = 0)]
    item: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    /// Model file; mutually exclusive with --preset.
    #[arg(long, conflicts_with = "preset")]
    model: Option<PathBuf>,
    /// Model family preset.
    #[arg(long)]
    preset: Option<String>,
    /// Model size when using a preset.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Number of respondents.
    #[arg(long, default_value_t = 10_000)]
    respondents: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Parse and dispatch; returns the process exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/usage text; --help and --version
            // exit cleanly.
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };

    if let Err(e) = init_thread_pool() {
        eprintln!("error: {e}");
        return 2;
    }

    let started = unix_now();
    let outcome = match &cli.command {
        Command::PlotIrf(a) => cmd_plot_irf(a),
        Command::Check(a) => cmd_check(a),
        Command::Recover(a) => cmd_recover(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Simulate(a) => cmd_simulate(a),
    };

    match outcome {
        Ok(run) => {
            let manifest = RunManifest {
                command: run.command,
                config_digest: run.config_digest,
                seed: run.seed,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                started_unix: started,
                finished_unix: unix_now(),
            };
            emit_manifest(&manifest, run.out.as_deref());
            if run.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::InvalidParams { .. }
        | Error::TooManyItems { .. } => 2,
        _ => 1,
    }
}

fn init_thread_pool() -> Result<()> {
    if let Ok(v) = std::env::var("IRT_IDENTIFY_THREADS") {
        let threads: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("IRT_IDENTIFY_THREADS = '{v}' is not a count")))?;
        if threads == 0 {
            return Err(Error::Config("IRT_IDENTIFY_THREADS must be positive".into()));
        }
        // Ignore failure: the global pool may already exist (e.g. in tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Provenance record emitted with every run. Identical configurations yield
/// identical digests; timestamps appear only here.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub tool_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
}

struct RunOutcome {
    command: String,
    config_digest: String,
    seed: u64,
    out: Option<PathBuf>,
    pass: bool,
}

/// FNV-1a over the serialized config; a fingerprint, not a cryptographic
/// digest.
fn config_digest<T: Serialize>(config: &T) -> String {
    let text = serde_json::to_string(config).unwrap_or_default();
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    format!("{hash:016x}")
}

fn emit_manifest(manifest: &RunManifest, out: Option<&Path>) {
    let json = serde_json::to_string(manifest).unwrap_or_default();
    eprintln!("{json}");
    if let Some(path) = out {
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(".manifest.json");
        let _ = fs::write(sidecar, json + "\n");
    }
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

/// 17 significant digits, '.' decimal separator.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// Read a plain-text item parameter file: one `family a b [c d]` per line,
/// whitespace-separated, `#` starts a comment.
pub fn read_model_file(path: &Path) -> Result<Vec<ItemParams>> {
    let text = fs::read_to_string(path)?;
    let path_str = path.display().to_string();
    let mut items = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let parse_err = |message: String| Error::Parse {
            path: path_str.clone(),
            line: lineno,
            message,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let family = ItemFamily::from_str(tokens[0]).map_err(&parse_err)?;
        let nums: Vec<f64> = tokens[1..]
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(format!("'{t}' is not a number")))
            })
            .collect::<Result<_>>()?;
        let params = match (family, nums.as_slice()) {
            (ItemFamily::NormalOgive, [a, b]) => ItemParams::normal_ogive(*a, *b),
            (ItemFamily::NormalOgive, [a, b, c, d]) => {
                if *c != 0.0 || *d != 1.0 {
                    return Err(parse_err(format!(
                        "normal ogive asymptotes are fixed at 0 and 1, got {c} {d}"
                    )));
                }
                ItemParams::normal_ogive(*a, *b)
            }
            (ItemFamily::Logistic4Pl, [a, b, c, d]) => ItemParams::logistic_4pl(*a, *b, *c, *d),
            _ => {
                return Err(parse_err(format!(
                    "expected 'family a b' or 'family a b c d', got {} fields",
                    tokens.len()
                )))
            }
        };
        items.push(params.map_err(|e| parse_err(e.to_string()))?);
    }
    if items.is_empty() {
        return Err(Error::Parse {
            path: path_str,
            line: 0,
            message: "no items in model file".into(),
        });
    }
    Ok(items)
}

/// Read a header-less CSV of 0/1 responses, respondents as rows.
pub fn read_response_csv(path: &Path) -> Result<ResponseMatrix> {
    let text = fs::read_to_string(path)?;
    let path_str = path.display().to_string();
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| match tok.trim() {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(Error::Parse {
                    path: path_str.clone(),
                    line: idx + 1,
                    message: format!("expected 0 or 1, got '{other}'"),
                }),
            })
            .collect::<Result<Vec<u8>>>()?;
        rows.push(row);
    }
    ResponseMatrix::from_rows(&rows)
}

fn model_from_params(items: &[ItemParams]) -> Result<ModelSpec> {
    ModelSpec::new(items.iter().copied().map(Irf::from_params).collect())
}

fn lookup_preset(name: &str, seed: u64) -> Result<FamilySampler> {
    FamilySampler::from_preset(name, seed).ok_or_else(|| {
        Error::Config(format!(
            "unknown preset '{name}'; available: {}",
            FamilySampler::PRESET_NAMES.join(", ")
        ))
    })
}

// ---------------------------------------------------------------------------
// plot-irf
// ---------------------------------------------------------------------------

/// Three evaluation blocks, in emission order: uniform on (0.001, 0.999),
/// the theta -> 0 geometric tail ascending from 1e-8 to 1e-2, and the
/// theta -> 1 geometric tail ascending toward 1 - 1e-8. The tails overlap
/// the uniform range, so theta is monotone within each block, not globally.
fn plot_grids(points: usize, tail_points: usize) -> Vec<f64> {
    let mut thetas = Vec::with_capacity(points + 2 * tail_points);
    for j in 0..points {
        thetas.push(0.001 + 0.998 * j as f64 / (points - 1) as f64);
    }
    for j in 0..tail_points {
        let e = -8.0 + 6.0 * j as f64 / (tail_points - 1) as f64;
        thetas.push(10f64.powf(e));
    }
    for j in (0..tail_points).rev() {
        let e = -8.0 + 6.0 * j as f64 / (tail_points - 1) as f64;
        thetas.push(1.0 - 10f64.powf(e));
    }
    thetas
}

fn cmd_plot_irf(args: &PlotArgs) -> Result<RunOutcome> {
    if args.points < 2 || args.tail_points < 2 {
        return Err(Error::Config(
            "plot grids need at least 2 points each".into(),
        ));
    }
    let items = read_model_file(&args.model)?;
    let params = *items.get(args.item).ok_or_else(|| {
        Error::Config(format!(
            "item {} out of range (model has {} items)",
            args.item,
            items.len()
        ))
    })?;
    let irf = Irf::from_params(params);

    let mut csv = String::from("theta,p,p_prime\n");
    for theta in plot_grids(args.points, args.tail_points) {
        let p = irf.eval(theta)?;
        let dp = irf.deriv(theta)?;
        let _ = writeln!(csv, "{},{},{}", fmt_f64(theta), fmt_f64(p), fmt_f64(dp));
    }
    write_output(args.out.as_deref(), &csv)?;

    Ok(RunOutcome {
        command: "plot-irf".into(),
        config_digest: config_digest(args),
        seed: 0,
        out: args.out.clone(),
        pass: true,
    })
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ItemCheckReport {
    index: usize,
    family: ItemFamily,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    condition3: serde_json::Value,
    condition4: serde_json::Value,
    derivative_limits: serde_json::Value,
    pass: bool,
}

fn cmd_check(args: &CheckArgs) -> Result<RunOutcome> {
    let items = read_model_file(&args.model)?;
    for (i, p) in items.iter().enumerate() {
        if p.a() == 0.0 {
            return Err(Error::InvalidParams {
                index: Some(i),
                reason: "flat item (a = 0) cannot satisfy the derivative bound".into(),
            });
        }
    }

    let mut reports = Vec::with_capacity(items.len());
    let mut all_pass = true;
    let mut seq_lower = f64::INFINITY;
    let mut seq_upper = f64::NEG_INFINITY;
    for (index, params) in items.iter().enumerate() {
        let irf = Irf::from_params(*params);
        let c3 = check_condition3(&irf, args.alpha, args.beta, args.grid)?;
        let c4 = check_condition4(&irf, args.epsilon)?;
        let limits = derivative_limits(params);
        seq_lower = seq_lower.min(c3.lower);
        seq_upper = seq_upper.max(c3.upper);
        let pass = c3.passes() && c4.passes() && limits.lower_trend_ok && limits.upper_trend_ok;
        all_pass &= pass;
        reports.push(ItemCheckReport {
            index,
            family: params.family(),
            a: params.a(),
            b: params.b(),
            c: params.c(),
            d: params.d(),
            condition3: serde_json::json!({
                "lower": c3.lower,
                "upper": c3.upper,
                "pass": c3.passes(),
            }),
            condition4: serde_json::json!({
                "l_eps": c4.l_eps,
                "u_eps": c4.u_eps,
                "sup_low": c4.sup_low,
                "sup_high": c4.sup_high,
                "pass": c4.passes(),
            }),
            derivative_limits: serde_json::to_value(&limits).unwrap_or_default(),
            pass,
        });
    }

    let report = serde_json::json!({
        "config": args,
        "items": reports,
        // Uniformity over the supplied sequence: extremes across items.
        "sequence": { "min_deriv_lower": seq_lower, "max_deriv_upper": seq_upper },
        "all_pass": all_pass,
    });
    write_output(
        args.out.as_deref(),
        &(serde_json::to_string_pretty(&report).expect("serializable") + "\n"),
    )?;

    Ok(RunOutcome {
        command: "check".into(),
        config_digest: config_digest(args),
        seed: 0,
        out: args.out.clone(),
        pass: all_pass,
    })
}

// ---------------------------------------------------------------------------
// recover
// ---------------------------------------------------------------------------

fn cmd_recover(args: &RecoverArgs) -> Result<RunOutcome> {
    let csv = match (&args.model, &args.data) {
        (Some(model_path), None) => {
            let model = model_from_params(&read_model_file(model_path)?)?;
            let grid = recover_irf_oracle(&model, args.item, args.alpha, args.beta)?;
            let truth = &model.items()[args.item];
            let max_err = grid
                .entries
                .iter()
                .map(|e| (e.p_hat - truth.eval_raw(e.theta_k)).abs())
                .fold(0.0, f64::max);
            let mut csv = String::new();
            let _ = writeln!(csv, "# max_abs_err = {}", fmt_f64(max_err));
            csv.push_str("k,theta_k,p_hat,p_true\n");
            for e in &grid.entries {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    e.k,
                    fmt_f64(e.theta_k),
                    fmt_f64(e.p_hat),
                    fmt_f64(truth.eval_raw(e.theta_k))
                );
            }
            csv
        }
        (None, Some(data_path)) => {
            let data = read_response_csv(data_path)?;
            let grid = recover_irf_empirical(&data, args.item, args.bins)?;
            let mut csv = String::from("k,theta_k,p_hat\n");
            for e in &grid.entries {
                let _ = writeln!(csv, "{},{},{}", e.k, fmt_f64(e.theta_k), fmt_f64(e.p_hat));
            }
            csv
        }
        _ => {
            return Err(Error::Config(
                "recover needs exactly one of --model or --data".into(),
            ))
        }
    };
    write_output(args.out.as_deref(), &csv)?;

    Ok(RunOutcome {
        command: "recover".into(),
        config_digest: config_digest(args),
        seed: 0,
        out: args.out.clone(),
        pass: true,
    })
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

fn cmd_converge(args: &ConvergeArgs) -> Result<RunOutcome> {
    let family = lookup_preset(&args.preset, args.seed)?;
    let report = convergence_experiment(&family, &args.n_grid, args.alpha, args.beta)?;
    let pass = report.decreasing_end_to_end();

    let content = match args.format {
        OutputFormat::Json => {
            let json = serde_json::json!({
                "config": args,
                "report": report,
                "pass": pass,
            });
            serde_json::to_string_pretty(&json).expect("serializable") + "\n"
        }
        OutputFormat::Csv => {
            let mut csv = String::from("n,error\n");
            for (n, e) in report.n_grid.iter().zip(&report.errors) {
                let _ = writeln!(csv, "{n},{}", fmt_f64(*e));
            }
            csv
        }
    };
    write_output(args.out.as_deref(), &content)?;

    Ok(RunOutcome {
        command: "converge".into(),
        config_digest: config_digest(args),
        seed: args.seed,
        out: args.out.clone(),
        pass,
    })
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

fn bounds_model(args: &BoundsArgs) -> Result<ModelSpec> {
    match &args.model {
        Some(path) => model_from_params(&read_model_file(path)?),
        None => lookup_preset(&args.preset, args.seed)?.model(args.n),
    }
}

fn cmd_bounds(args: &BoundsArgs) -> Result<RunOutcome> {
    let reports: Vec<BoundCheckReport> = match args.lemma {
        BoundCheckKind::Lemma1 | BoundCheckKind::Lemma2 => {
            let family = lookup_preset(&args.preset, args.seed)?;
            let cfg = LemmaCheckConfig {
                delta: args.delta,
                eta: args.eta,
                alpha: args.alpha,
                beta: args.beta,
                n_grid: args.n_grid.clone(),
                m: args.m,
            };
            match args.lemma {
                BoundCheckKind::Lemma1 => check_lemma1(&family, args.k_ratio, &cfg)?,
                _ => check_lemma2(&family, args.k_ratio, &cfg)?,
            }
        }
        BoundCheckKind::Hoeffding => {
            let model = bounds_model(args)?;
            vec![check_hoeffding(
                &model,
                args.item,
                args.theta,
                args.m,
                args.trials,
                args.seed,
            )?]
        }
        BoundCheckKind::NormalApprox => {
            let model = bounds_model(args)?;
            let k = match args.k {
                Some(k) => k,
                None => rest_score_moments(&model, args.item, args.theta)?.mu.round() as usize,
            };
            vec![check_normal_approx(&model, args.item, args.theta, k)?]
        }
    };

    let all_pass = reports.iter().all(|r| r.pass);
    let json = serde_json::json!({
        "config": args,
        "reports": reports,
        "all_pass": all_pass,
    });
    write_output(
        args.out.as_deref(),
        &(serde_json::to_string_pretty(&json).expect("serializable") + "\n"),
    )?;

    Ok(RunOutcome {
        command: "bounds".into(),
        config_digest: config_digest(args),
        seed: args.seed,
        out: args.out.clone(),
        pass: all_pass,
    })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(args: &SimulateArgs) -> Result<RunOutcome> {
    let model = match (&args.model, &args.preset) {
        (Some(path), None) => model_from_params(&read_model_file(path)?)?,
        (None, Some(preset)) => lookup_preset(preset, args.seed)?.model(args.n)?,
        _ => {
            return Err(Error::Config(
                "simulate needs exactly one of --model or --preset".into(),
            ))
        }
    };
    let data = simulate_responses(
        &model,
        &SimConfig {
            seed: args.seed,
            num_respondents: args.respondents,
        },
    );
    let mut csv = String::with_capacity(data.n_respondents() * (2 * data.n_items()));
    for r in 0..data.n_respondents() {
        let row: Vec<String> = data.row(r).iter().map(u8::to_string).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    write_output(args.out.as_deref(), &csv)?;

    Ok(RunOutcome {
        command: "simulate".into(),
        config_digest: config_digest(args),
        seed: args.seed,
        out: args.out.clone(),
        pass: true,
    })
}
