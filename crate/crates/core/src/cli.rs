//! The `histrule` command-line harness.
//!
//! Exit codes: 0 on success, 1 when a check fails or a run errors, 2 on a
//! configuration error (bad flags, unreadable or invalid config/model/data).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::Error;
use crate::grid::GridSpec;
use crate::hist::{erm_verify, HistogramClassifier, ERM_MAX_OCCUPIED};
use crate::margin::{self, near_far_partition};
use crate::rates::{self, GridShift, RateExperimentConfig, RateMode, RateParams};
use crate::risk::{self, empirical_risk};
use crate::synth::{self, Bump, FamilyKind, SyntheticFamily};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Names accepted by `verify --checks`.
pub const CHECKS: [&str; 8] = [
    "lemma-sets",
    "tube",
    "variance",
    "erm",
    "lower-control",
    "upper-control",
    "risk-split",
    "approx-error",
];

#[derive(Debug, Parser)]
#[command(name = "histrule", version, about = "Grid histogram classifiers and learning-rate experiments")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all available).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a histogram classifier to a dataset or a synthetic sample.
    Fit(FitArgs),
    /// Label the rows of a dataset with a fitted classifier.
    Predict(PredictArgs),
    /// Run geometric and risk checks on a synthetic family.
    Verify(VerifyArgs),
    /// Run a learning-rate experiment or print the exponent table.
    Rates(RatesArgs),
}

#[derive(Debug, Args, Default)]
struct FamilyArgs {
    /// Synthetic family: linear, power_mass or far_noise.
    #[arg(long)]
    family: Option<FamilyKind>,
    /// Input dimension
    #[arg(long)]
    d: Option<usize>,
    /// Boundary exponent of the noise profile
    #[arg(long)]
    gamma: Option<f64>,
    /// Margin exponent (power_mass only).
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Labeled dataset (CSV rows `x_1,...,x_d,label`).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Synthetic sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Cell width in (0, 1].
    #[arg(long)]
    s: Option<f64>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Classifier written by `fit`
    #[arg(long)]
    model: PathBuf,
    /// CSV rows `x_1,...,x_d` with an optional trailing label
    #[arg(long)]
    data: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Comma-separated checks (default: all).
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    /// Cell width for the grid-based checks.
    #[arg(long)]
    s: Option<f64>,
    /// Near/far threshold (default: s).
    #[arg(long)]
    r: Option<f64>,
    /// Monte Carlo sample size for the noise-control checks.
    #[arg(long)]
    n: Option<usize>,
    /// Random classifiers or datasets per check.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Debug, Args)]
struct RatesArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Margin-noise exponent (default: alpha + gamma).
    #[arg(long)]
    beta: Option<f64>,
    /// Noise exponent (default: alpha / gamma).
    #[arg(long)]
    q: Option<f64>,
    /// Comma-separated, strictly increasing sample sizes.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    /// Repetitions per sample size
    #[arg(long)]
    reps: Option<usize>,
    /// fixed_schedule or tvhr.
    #[arg(long)]
    mode: Option<RateMode>,
    /// Multiplier of the cell-width schedule.
    #[arg(long)]
    scale: Option<f64>,
    /// Grid placement per repetition: none, random or stratified.
    #[arg(long)]
    shift: Option<GridShift>,
    /// Fixed cell width instead of the schedule.
    #[arg(long)]
    s_override: Option<f64>,
    /// Confidence parameter for the oracle-bound flags.
    #[arg(long)]
    tau: Option<f64>,
    /// Only print the table of rate exponents.
    #[arg(long)]
    exponents_only: bool,
}

/// Family block of a configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub kind: Option<FamilyKind>,
    pub d: Option<usize>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub bump: Option<Bump>,
}

/// JSON configuration shared by all subcommands.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Option<FamilySpec>,
    pub mode: Option<RateMode>,
    pub ns: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub scale: Option<f64>,
    pub tau: Option<f64>,
    pub s_override: Option<f64>,
    pub shift: Option<GridShift>,
    pub beta: Option<f64>,
    pub q: Option<f64>,
    pub s: Option<f64>,
    pub r: Option<f64>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub checks: Option<Vec<String>>,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_FAILURE,
        }
    }
}

trait Classify<T> {
    fn config(self) -> Result<T, CliError>;
    fn runtime(self) -> Result<T, CliError>;
}

impl<T> Classify<T> for Result<T, Error> {
    fn config(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Config(e.to_string()))
    }
    fn runtime(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Runtime(e.to_string()))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_CONFIG;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(e) => {
            match &e {
                CliError::Config(m) => eprintln!("configuration error: {m}"),
                CliError::Runtime(m) => eprintln!("error: {m}"),
            }
            e.code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let ctx = Context {
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        out: cli.out.clone().or_else(|| cfg.out.clone()),
        cfg,
    };
    match &cli.command {
        Command::Fit(a) => cmd_fit(&ctx, a),
        Command::Predict(a) => cmd_predict(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
        Command::Rates(a) => cmd_rates(&ctx, a),
    }
}

struct Context {
    seed: u64,
    out: Option<PathBuf>,
    cfg: ExperimentConfig,
}

impl Context {
    fn family(&self, args: &FamilyArgs) -> Result<SyntheticFamily, CliError> {
        let spec = self.cfg.family.as_ref();
        let kind = args
            .family
            .or(spec.and_then(|f| f.kind))
            .unwrap_or(FamilyKind::Linear);
        let d = args.d.or(spec.and_then(|f| f.d)).unwrap_or(1);
        let gamma = args.gamma.or(spec.and_then(|f| f.gamma)).unwrap_or(1.0);
        let alpha = args.alpha.or(spec.and_then(|f| f.alpha));
        if alpha.is_some() && kind != FamilyKind::PowerMass {
            return Err(CliError::Config(format!("alpha is fixed to 1 for the {kind} family")));
        }
        match kind {
            FamilyKind::Linear => SyntheticFamily::linear(d, gamma),
            FamilyKind::PowerMass => SyntheticFamily::power_mass(d, alpha.unwrap_or(1.0), gamma),
            FamilyKind::FarNoise => match spec.and_then(|f| f.bump.clone()) {
                Some(b) => SyntheticFamily::far_noise_with(d, gamma, b),
                None => SyntheticFamily::far_noise(d, gamma),
            },
        }
        .config()
    }

    fn write_output(&self, text: &str) -> Result<bool, CliError> {
        match &self.out {
            Some(p) => {
                fs::write(p, text)
                    .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display())))?;
                Ok(true)
            }
            None => {
                print!("{text}");
                Ok(false)
            }
        }
    }
}

fn read_text(path: &Path, what: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {what} {}: {e}", path.display())))
}

fn cmd_fit(ctx: &Context, a: &FitArgs) -> Result<i32, CliError> {
    let s = a
        .s
        .or(ctx.cfg.s)
        .ok_or_else(|| CliError::Config("fit needs a cell width --s".into()))?;
    let data = a.data.clone().or_else(|| ctx.cfg.data.clone());
    let sample = match data {
        Some(path) => {
            let d = a.family.d.or(ctx.cfg.family.as_ref().and_then(|f| f.d));
            synth::parse_dataset(&read_text(&path, "dataset")?, d).config()?
        }
        None => {
            let n = a
                .n
                .or(ctx.cfg.n)
                .ok_or_else(|| CliError::Config("fit needs --data or a sample size --n".into()))?;
            ctx.family(&a.family)?.sample(n, ctx.seed).config()?
        }
    };
    let grid = GridSpec::new(sample.d(), s).config()?;
    let c = HistogramClassifier::fit(&sample, &grid).runtime()?;
    let risk = empirical_risk(&c, &sample, None).runtime()?;
    let to_file = ctx.write_output(&c.to_text())?;
    let summary = format!("occupied cells: {}\ntraining risk: {risk}", c.stored_cells());
    if to_file {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(EXIT_OK)
}

fn cmd_predict(ctx: &Context, a: &PredictArgs) -> Result<i32, CliError> {
    let model = HistogramClassifier::from_text(&read_text(&a.model, "model")?).config()?;
    let d = model.grid().d();
    let rows = synth::parse_rows(&read_text(&a.data, "dataset")?, Some(d)).config()?;
    let mut out = String::new();
    let mut predicted = Vec::with_capacity(rows.points.len() / d);
    for x in rows.points.chunks_exact(d) {
        let l = model.predict(x).runtime()?;
        predicted.push(l);
        let _ = writeln!(out, "{l}");
    }
    let to_file = ctx.write_output(&out)?;
    if let Some(labels) = &rows.labels {
        let errors = predicted.iter().zip(labels).filter(|(p, y)| p != y).count();
        let msg = format!("empirical risk: {}", errors as f64 / labels.len() as f64);
        if to_file {
            println!("{msg}");
        } else {
            eprintln!("{msg}");
        }
    }
    Ok(EXIT_OK)
}

struct CheckOutcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> CheckOutcome {
    CheckOutcome { pass, detail }
}

fn cmd_verify(ctx: &Context, a: &VerifyArgs) -> Result<i32, CliError> {
    let family = ctx.family(&a.family)?;
    let checks: Vec<String> = match a.checks.clone().or_else(|| ctx.cfg.checks.clone()) {
        Some(c) => c.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None => CHECKS.iter().map(|s| s.to_string()).collect(),
    };
    if let Some(bad) = checks.iter().find(|c| !CHECKS.contains(&c.as_str())) {
        return Err(CliError::Config(format!(
            "unknown check '{bad}' (known: {})",
            CHECKS.join(", ")
        )));
    }
    let s = a.s.or(ctx.cfg.s).unwrap_or(0.25);
    let grid = GridSpec::new(family.d(), s).config()?;
    let r = a.r.or(ctx.cfg.r).unwrap_or(s);
    if r < s / 2.0 {
        return Err(CliError::Config(format!("r = {r} must be at least s/2 = {}", s / 2.0)));
    }
    let n = a.n.or(ctx.cfg.n).unwrap_or(100_000);
    let trials = a.trials.or(ctx.cfg.trials).unwrap_or(100);
    let seed = ctx.seed;

    let mut report = String::new();
    let mut all_pass = true;
    for check in &checks {
        let o = match check.as_str() {
            "lemma-sets" => check_lemma_sets(&family, a.s.or(ctx.cfg.s)),
            "tube" => check_tube(&family),
            "variance" => {
                let v = risk::variance_bound_check(&family, &grid, r, trials, seed).runtime()?;
                Ok(outcome(
                    v.holds,
                    format!(
                        "worst ratio {:.6} <= bound {:.6} over {} classifiers{}",
                        v.worst_ratio,
                        v.bound,
                        v.evaluated,
                        if v.degenerate { " (far set empty)" } else { "" }
                    ),
                ))
            }
            "erm" => check_erm(&family, trials, seed),
            "lower-control" => margin::check_lower_control(&family, n, seed).map(|c| {
                outcome(c.holds, format!("worst ratio {} over {} points", c.worst_ratio, c.evaluated))
            }),
            "upper-control" => margin::check_upper_control(&family, n, seed).map(|c| {
                outcome(c.holds, format!("worst ratio {} over {} points", c.worst_ratio, c.evaluated))
            }),
            "risk-split" => check_risk_split(&family, &grid, r, trials, seed),
            "approx-error" => check_approx_error(&family, a.s.or(ctx.cfg.s)),
            _ => unreachable!("validated above"),
        }
        .runtime()?;
        all_pass &= o.pass;
        let _ = writeln!(report, "{} {check}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    print!("{report}");
    if let Some(p) = &ctx.out {
        fs::write(p, &report).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_FAILURE })
}

/// `(s, r)` pairs with `r >= s/2`.
fn s_r_pairs(s: Option<f64>) -> Vec<(f64, f64)> {
    let widths = match s {
        Some(s) => vec![s],
        None => vec![1.0, 0.5, 0.25, 0.125],
    };
    widths
        .into_iter()
        .flat_map(|s| [0.5, 0.75, 1.0, 1.5, 2.0].map(|m| (s, m * s)))
        .collect()
}

fn check_lemma_sets(family: &SyntheticFamily, s: Option<f64>) -> crate::Result<CheckOutcome> {
    let pairs = s_r_pairs(s);
    let (mut cover_fail, mut purity_fail) = (0, 0);
    for &(s, r) in &pairs {
        let grid = GridSpec::new(family.d(), s)?;
        let split = near_far_partition(family, &grid, r)?;
        cover_fail += !split.covers_j(&grid)? as usize;
        purity_fail += !margin::check_far_purity(&split, family, &grid)? as usize;
    }
    Ok(outcome(
        cover_fail + purity_fail == 0,
        format!(
            "{} (s, r) pairs: {cover_fail} cover failures, {purity_fail} purity failures",
            pairs.len()
        ),
    ))
}

fn check_tube(family: &SyntheticFamily) -> crate::Result<CheckOutcome> {
    let h = family.margin_profile().hausdorff_boundary;
    let mut worst = 0.0f64;
    for k in 1..=20 {
        let delta = k as f64 / 20.0;
        worst = worst.max(margin::tube_volume(family, delta)? / (4.0 * h * delta));
    }
    Ok(outcome(
        worst <= 1.0 + 1e-12,
        format!("worst volume / (4 H delta) = {worst} over 20 widths"),
    ))
}

fn check_erm(family: &SyntheticFamily, trials: usize, seed: u64) -> crate::Result<CheckOutcome> {
    let d = family.d();
    let widths: Vec<f64> = [1.0, 0.5]
        .into_iter()
        .filter(|s: &f64| (2.0 / s).powi(d as i32) <= ERM_MAX_OCCUPIED as f64)
        .collect();
    if widths.is_empty() {
        return Err(Error::Precondition(format!("no cell width keeps d = {d} within the exhaustive-search limit")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut runs = 0;
    for t in 0..trials {
        let n = rng.random_range(1..=30);
        let sample = family.sample_with(n, &mut rng)?;
        let s = widths[t % widths.len()];
        let grid = GridSpec::new(d, s)?;
        let c = HistogramClassifier::fit(&sample, &grid)?;
        let split = near_far_partition(family, &grid, s / 2.0)?;
        for region in [None, Some(&split.near), Some(&split.far)] {
            runs += 1;
            failures += !erm_verify(&c, &sample, region)? as usize;
        }
    }
    Ok(outcome(
        failures == 0,
        format!("{failures} mismatches in {runs} exhaustive searches"),
    ))
}

fn check_risk_split(
    family: &SyntheticFamily,
    grid: &GridSpec,
    r: f64,
    trials: usize,
    seed: u64,
) -> crate::Result<CheckOutcome> {
    let split = near_far_partition(family, grid, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classifiers = vec![HistogramClassifier::infinite_sample_fit(family, grid)?];
    for _ in 0..trials {
        classifiers.push(HistogramClassifier::random_cellwise(grid, &mut rng)?);
    }
    let mut failures = 0;
    for c in &classifiers {
        failures += !risk::risk_split_check(c, family, &split)?.holds as usize;
    }
    Ok(outcome(
        failures == 0,
        format!("{failures} violations over {} classifiers", classifiers.len()),
    ))
}

fn check_approx_error(family: &SyntheticFamily, s: Option<f64>) -> crate::Result<CheckOutcome> {
    let pairs = s_r_pairs(s);
    let mut worst = 0.0f64;
    for &(s, r) in &pairs {
        let grid = GridSpec::new(family.d(), s)?;
        let split = near_far_partition(family, &grid, r)?;
        let c = HistogramClassifier::infinite_sample_fit(family, &grid)?;
        worst = worst.max(risk::excess_risk_exact(&c, family, Some(&split.far))?.excess);
    }
    Ok(outcome(
        worst == 0.0,
        format!("largest far-set excess {worst} over {} (s, r) pairs", pairs.len()),
    ))
}

fn exponent_table(p: &RateParams, beta_given: bool) -> Result<String, CliError> {
    let mut table = rates::comparison_exponents(p.alpha, p.gamma, p.d, p.q).config()?;
    if beta_given {
        table[0].exponent = rates::our_exponent(p).config()?;
    }
    let mut out = String::new();
    for e in &table {
        let _ = writeln!(
            out,
            "{:<18} {:.4}{}",
            e.name,
            e.exponent,
            if e.log_factor { "  [log]" } else { "" }
        );
    }
    Ok(out)
}

fn cmd_rates(ctx: &Context, a: &RatesArgs) -> Result<i32, CliError> {
    let cfg = &ctx.cfg;
    let family = ctx.family(&a.family)?;
    let profile = family.margin_profile();
    let beta = a.beta.or(cfg.beta);
    let q = a.q.or(cfg.q).unwrap_or(profile.q);
    let p = RateParams::new(profile.alpha, beta.unwrap_or(profile.beta), profile.gamma, family.d(), q).config()?;
    if !p.applicable() {
        return Err(CliError::Config(
            Error::OutOfRegime {
                beta: p.beta,
                bound: p.beta_bound(),
            }
            .to_string(),
        ));
    }
    let table = exponent_table(&p, beta.is_some())?;
    if a.exponents_only {
        print!("{table}");
        return Ok(EXIT_OK);
    }

    let defaults = RateExperimentConfig::default();
    let exp = RateExperimentConfig {
        ns: a.ns.clone().or_else(|| cfg.ns.clone()).unwrap_or(defaults.ns),
        reps: a.reps.or(cfg.reps).unwrap_or(defaults.reps),
        mode: a.mode.or(cfg.mode).unwrap_or(defaults.mode),
        scale: a.scale.or(cfg.scale).unwrap_or(defaults.scale),
        seed: ctx.seed,
        shift: a.shift.or(cfg.shift).unwrap_or(defaults.shift),
        s_override: a.s_override.or(cfg.s_override),
        tau: a.tau.or(cfg.tau).unwrap_or(defaults.tau),
    };
    validate_experiment(&exp)?;
    let result = rates::run_rate_experiment(&family, &p, &exp).runtime()?;
    let summary = result.summary_json(exp.mode, &p, &exp);
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
    let csv = result.to_csv();
    match &ctx.out {
        Some(path) => {
            let json_path = if path.extension().is_some_and(|e| e == "json") {
                path.with_extension("summary.json")
            } else {
                path.with_extension("json")
            };
            fs::write(path, &csv).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
            fs::write(&json_path, &json)
                .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", json_path.display())))?;
            print!("{table}");
            println!(
                "slope {:.4} (theoretical exponent {:.4}), r^2 {:.4}",
                result.slope, result.theoretical_exponent, result.r_squared
            );
            if !result.excluded.is_empty() {
                eprintln!("warning: zero mean excess at n = {:?}; left out of the fit", result.excluded);
            }
        }
        None => {
            print!("{csv}{json}");
        }
    }
    Ok(EXIT_OK)
}

fn validate_experiment(exp: &RateExperimentConfig) -> Result<(), CliError> {
    if exp.ns.is_empty() || exp.ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config("ns must be non-empty and strictly increasing".into()));
    }
    if exp.ns.contains(&0) || (exp.mode == RateMode::Tvhr && exp.ns[0] < 4) {
        return Err(CliError::Config("sample sizes are too small for the selected mode".into()));
    }
    if exp.reps == 0 {
        return Err(CliError::Config("reps must be at least 1".into()));
    }
    if !(exp.scale > 0.0 && exp.scale.is_finite()) {
        return Err(CliError::Config(format!("scale must be positive, got {}", exp.scale)));
    }
    if !(exp.tau > 0.0) {
        return Err(CliError::Config(format!("tau must be positive, got {}", exp.tau)));
    }
    if let Some(s) = exp.s_override {
        if !(s > 0.0 && s <= 1.0) {
            return Err(CliError::Config(format!("s_override {s} outside (0, 1]")));
        }
    }
    Ok(())
}
