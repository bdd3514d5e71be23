//! Rate exponents, theoretical constants, the cell-width schedule and the
//! rate-experiment runner.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hist::{make_s_grid, shifted_grid, tvhr_fit_with_phase, HistogramClassifier};
use crate::risk::excess_risk_exact;
use crate::synth::{MarginProfile, SyntheticFamily};

/// Default multiplier of the cell-width schedule in rate experiments.
pub const DEFAULT_SCALE: f64 = 4.0;

const REGIME_SLACK: f64 = 1e-12;

/// Margin and noise exponents plus the dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub d: usize,
    pub q: f64,
}

impl RateParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, d: usize, q: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidParameter("alpha and beta must be positive".into()));
        }
        if d == 0 {
            return Err(Error::InvalidParameter("dimension d must be at least 1".into()));
        }
        if !(q.is_finite() && q >= 0.0) {
            return Err(Error::InvalidParameter(format!("q must be finite and >= 0, got {q}")));
        }
        Ok(RateParams { alpha, beta, gamma, d, q })
    }

    pub fn from_profile(profile: &MarginProfile, d: usize) -> Result<Self> {
        Self::new(profile.alpha, profile.beta, profile.gamma, d, profile.q)
    }

    /// `(1 + γ)(α + γ)`
    pub fn kappa(&self) -> f64 {
        (1.0 + self.gamma) * (self.alpha + self.gamma)
    }

    /// `α / (α + γ)`
    pub fn theta(&self) -> f64 {
        self.alpha / (self.alpha + self.gamma)
    }

    /// `κ / γ`, the largest `β` the schedule is derived for.
    pub fn beta_bound(&self) -> f64 {
        if self.gamma == 0.0 {
            f64::INFINITY
        } else {
            self.kappa() / self.gamma
        }
    }

    pub fn applicable(&self) -> bool {
        self.beta <= self.beta_bound() * (1.0 + REGIME_SLACK)
    }

    fn denominator(&self) -> f64 {
        let k = self.kappa();
        self.beta * (k + self.gamma * self.gamma) + self.d as f64 * k
    }
}

/// `βκ / (β(κ + γ²) + dκ)`.
pub fn our_exponent(p: &RateParams) -> Result<f64> {
    if !p.applicable() {
        return Err(Error::OutOfRegime {
            beta: p.beta,
            bound: p.beta_bound(),
        });
    }
    Ok(p.beta * p.kappa() / p.denominator())
}

/// `(α + γ) / (α + 2γ + d - γ/(1 + γ))`, the exponent when `β = α + γ`.
pub fn simplified_exponent(alpha: f64, gamma: f64, d: usize) -> f64 {
    (alpha + gamma) / (alpha + 2.0 * gamma + d as f64 - gamma / (1.0 + gamma))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonExponent {
    pub name: &'static str,
    pub exponent: f64,
    /// The rate carries an additional logarithmic factor.
    pub log_factor: bool,
}

/// Our exponent alongside the rates of competing learners, in display order.
pub fn comparison_exponents(alpha: f64, gamma: f64, d: usize, q: f64) -> Result<Vec<ComparisonExponent>> {
    if !(q >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise exponent q must be >= 0, got {q}")));
    }
    if !(alpha > 0.0 && gamma >= 0.0) || d == 0 {
        return Err(Error::InvalidParameter("need alpha > 0, gamma >= 0, d >= 1".into()));
    }
    let (a, g, df) = (alpha, gamma, d as f64);
    let no_lc = g * (q + 1.0) / (g * (q + 2.0) + df);
    let e = |name, exponent, log_factor| ComparisonExponent { name, exponent, log_factor };
    Ok(vec![
        e("ours", simplified_exponent(a, g, d), false),
        e("svm", (a + g) / (a + 2.0 * g + df), false),
        e("kokr_plain", (a + g) / (a + 3.0 * g + df), false),
        e("kokr_dense", (a + g) / (2.0 * g + df), false),
        e("bicodade_general", (a + g) / (a + 2.0 * g + df), true),
        e("bicodade_uniform", (1.0 + g) / (2.0 * g + df), true),
        e("auts_general", no_lc, false),
        e("ours_no_lc", no_lc, false),
    ])
}

/// `scale · n^{-κ/(β(κ+γ²)+dκ)}`, clamped to at most 1.
pub fn s_schedule(n: usize, p: &RateParams, scale: f64) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("schedule scale must be > 0, got {scale}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be positive".into()));
    }
    let s = scale * (n as f64).powf(-p.kappa() / p.denominator());
    Ok(s.min(1.0))
}

/// Constants of the oracle inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoreticalConstants {
    pub c_tilde: f64,
    pub c_hat: f64,
    pub c_main: f64,
    pub v: f64,
    pub c2: f64,
}

pub fn theoretical_constants(
    alpha: f64,
    gamma: f64,
    d: usize,
    hausdorff_boundary: f64,
    c_lc: f64,
    c_me: f64,
) -> Result<TheoreticalConstants> {
    if gamma == 0.0 {
        return Err(Error::InvalidParameter("constants are undefined for gamma = 0".into()));
    }
    for (name, v) in [
        ("alpha", alpha),
        ("gamma", gamma),
        ("hausdorff_boundary", hausdorff_boundary),
        ("c_lc", c_lc),
        ("c_me", c_me),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension d must be at least 1".into()));
    }
    let (a, g) = (alpha, gamma);
    let c2 = ((a + g) / g) * c_me.powf(a * g / (a + g)) * (g * c_lc / a).powf(a / (a + g));
    let v = c2.max(1.0);
    let c_hat = 32.0 * (12.0 * hausdorff_boundary).max(1.0) * v;
    let eight = 8f64.powi(d as i32 + 1);
    let lc_term = c_lc.max(2f64.powf(g));
    let inner = 16.0 * g * (a + 2.0 * g) * eight * lc_term / (a + g) / c_hat.powf((a + g) / (a + 2.0 * g));
    let c_tilde = inner.powf((a + g) / (a + g + g * (a + 2.0 * g)));
    let c_main = 128.0 * eight * lc_term * (g * (a + 2.0 * g) / (a + g)).max(1.0) * c_tilde.powf(-g);
    Ok(TheoreticalConstants {
        c_tilde,
        c_hat,
        c_main,
        v,
        c2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleBound {
    pub value: f64,
    pub approximation: f64,
    pub estimation: f64,
    /// Both side conditions on `(s, n, τ)` hold.
    pub in_force: bool,
}

/// `6 (c_MNE s)^β + c_main (τ / (s^d n))^{κ/(κ+γ²)}` together with the side
/// conditions under which it holds with probability `1 - 2e^{-τ}`.
pub fn oracle_bound(
    s: f64,
    n: usize,
    tau: f64,
    c_mne: f64,
    delta_star: f64,
    consts: &TheoreticalConstants,
    p: &RateParams,
) -> Result<OracleBound> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!("cell width {s} outside (0, 1]")));
    }
    if n == 0 || !(tau > 0.0) || !(delta_star > 0.0) {
        return Err(Error::InvalidParameter("need n >= 1, tau > 0, delta_star > 0".into()));
    }
    let (k, g, df, nf) = (p.kappa(), p.gamma, p.d as f64, n as f64);
    let kg = k + g * g;
    let approximation = 6.0 * (c_mne * s).powf(p.beta);
    let estimation = consts.c_main * (tau / (s.powf(df) * nf)).powf(k / kg);
    let s_max = consts.c_tilde.powf(kg / (kg + df * g)) * (tau / nf).powf(g / (kg + df * g));
    let needed = tau * (consts.c_tilde / (delta_star / 3.0).min(1.0)).powf(kg / g);
    let in_force = s <= s_max && s.powf(df) * nf >= needed;
    Ok(OracleBound {
        value: approximation + estimation,
        approximation,
        estimation,
        in_force,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `log y` on `log x`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter("xs and ys differ in length".into()));
    }
    if xs.len() < 2 {
        return Err(Error::Estimation(format!("log-log fit needs at least 2 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter("log-log fit needs positive finite inputs".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Estimation("log-log fit needs at least two distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}

/// How the cell width is chosen in a rate experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    /// `s = s_schedule(n)` with the true exponents.
    FixedSchedule,
    /// Training-validation selection over the `n^{-1/d}`-net.
    Tvhr,
}

impl FromStr for RateMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed_schedule" | "fixed-schedule" | "fixed" => Ok(RateMode::FixedSchedule),
            "tvhr" => Ok(RateMode::Tvhr),
            other => Err(Error::InvalidParameter(format!("unknown mode '{other}'"))),
        }
    }
}

impl fmt::Display for RateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateMode::FixedSchedule => "fixed_schedule",
            RateMode::Tvhr => "tvhr",
        })
    }
}

/// Placement of the grid in each repetition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridShift {
    /// Cells anchored at the origin.
    None,
    /// Each repetition shifts the grid by `u · s` with `u ~ U[0,1)^d`.
    Random,
    /// As `Random`, but the phases of the repetitions at one sample size form
    /// a Latin hypercube: along each axis every stratum `[k/reps, (k+1)/reps)`
    /// holds exactly one repetition.
    Stratified,
}

impl FromStr for GridShift {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(GridShift::None),
            "random" => Ok(GridShift::Random),
            "stratified" => Ok(GridShift::Stratified),
            other => Err(Error::InvalidParameter(format!("unknown grid shift '{other}'"))),
        }
    }
}

impl fmt::Display for GridShift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridShift::None => "none",
            GridShift::Random => "random",
            GridShift::Stratified => "stratified",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateExperimentConfig {
    pub ns: Vec<usize>,
    pub reps: usize,
    pub mode: RateMode,
    pub scale: f64,
    pub seed: u64,
    pub shift: GridShift,
    /// Fixed cell width overriding the schedule.
    pub s_override: Option<f64>,
    /// Confidence parameter used for the reported oracle-bound flags.
    pub tau: f64,
}

impl Default for RateExperimentConfig {
    fn default() -> Self {
        RateExperimentConfig {
            ns: (9..=15).map(|k| 1usize << k).collect(),
            reps: 100,
            mode: RateMode::FixedSchedule,
            scale: DEFAULT_SCALE,
            seed: 0,
            shift: GridShift::Stratified,
            s_override: None,
            tau: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub mean_excess: f64,
    pub std_excess: f64,
    pub reps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateExperimentResult {
    pub rows: Vec<RateRow>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub theoretical_exponent: f64,
    /// Sample sizes left out of the fit because their mean excess was zero.
    pub excluded: Vec<usize>,
    /// Per row: whether the oracle inequality's side conditions hold for the
    /// scheduled width (fixed schedule only).
    pub oracle_in_force: Option<Vec<bool>>,
}

impl RateExperimentResult {
    /// `n,mean_excess,std_excess,reps` with ten significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,mean_excess,std_excess,reps\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:.9e},{:.9e},{}\n", r.n, r.mean_excess, r.std_excess, r.reps));
        }
        out
    }

    pub fn summary_json(&self, mode: RateMode, p: &RateParams, cfg: &RateExperimentConfig) -> serde_json::Value {
        serde_json::json!({
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "theoretical_exponent": self.theoretical_exponent,
            "mode": mode,
            "params": {
                "alpha": p.alpha,
                "beta": p.beta,
                "gamma": p.gamma,
                "d": p.d,
                "q": p.q,
                "kappa": p.kappa(),
                "theta": p.theta(),
            },
            "ns": cfg.ns,
            "reps": cfg.reps,
            "scale": cfg.scale,
            "seed": cfg.seed,
            "shift": cfg.shift,
            "s_override": cfg.s_override,
            "tau": cfg.tau,
            "excluded": self.excluded,
            "oracle_in_force": self.oracle_in_force,
        })
    }
}

/// Generator for repetition `pair` of an experiment: one stream per
/// `(n, repetition)` pair so results do not depend on scheduling.
pub fn pair_rng(seed: u64, pair: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pair);
    rng
}

/// Per-axis strata for the repetitions at sample-size index `ni`: axis 0
/// uses the identity, the other axes independent permutations.
fn strata(seed: u64, ni: usize, reps: usize, d: usize) -> Vec<Vec<usize>> {
    let mut rng = pair_rng(seed, u64::MAX - ni as u64);
    (0..d)
        .map(|axis| {
            let mut perm: Vec<usize> = (0..reps).collect();
            if axis > 0 {
                perm.shuffle(&mut rng);
            }
            perm
        })
        .collect()
}

struct Job<'a> {
    n: usize,
    rep: usize,
    pair: u64,
    strata: &'a [Vec<usize>],
}

fn one_repetition(family: &SyntheticFamily, p: &RateParams, cfg: &RateExperimentConfig, job: &Job) -> Result<f64> {
    let mut rng = pair_rng(cfg.seed, job.pair);
    let d = family.d();
    let phase: Vec<f64> = match cfg.shift {
        GridShift::None => vec![0.0; d],
        GridShift::Random => (0..d).map(|_| rng.random::<f64>()).collect(),
        GridShift::Stratified => (0..d)
            .map(|axis| (job.strata[axis][job.rep] as f64 + rng.random::<f64>()) / cfg.reps as f64)
            .collect(),
    };
    let n = job.n;
    let sample = family.sample_with(n, &mut rng)?;
    let classifier = match cfg.mode {
        RateMode::FixedSchedule => {
            let s = match cfg.s_override {
                Some(s) => s,
                None => s_schedule(n, p, cfg.scale)?,
            };
            HistogramClassifier::fit(&sample, &shifted_grid(d, s, &phase)?)?
        }
        RateMode::Tvhr => tvhr_fit_with_phase(&sample, &make_s_grid(n, d)?, &phase)?.classifier,
    };
    Ok(excess_risk_exact(&classifier, family, None)?.excess)
}

/// Runs `reps` repetitions per sample size and fits the log-log slope of the
/// mean exact excess risk against `n`.
pub fn run_rate_experiment(
    family: &SyntheticFamily,
    p: &RateParams,
    cfg: &RateExperimentConfig,
) -> Result<RateExperimentResult> {
    if p.d != family.d() {
        return Err(Error::DimensionMismatch {
            expected: family.d(),
            got: p.d,
        });
    }
    if cfg.ns.is_empty() || cfg.ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("sample sizes must be non-empty and strictly increasing".into()));
    }
    if cfg.reps == 0 {
        return Err(Error::InvalidParameter("need at least one repetition".into()));
    }
    if let Some(s) = cfg.s_override {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidParameter(format!("cell width {s} outside (0, 1]")));
        }
    }
    let theoretical_exponent = our_exponent(p)?;
    if cfg.mode == RateMode::FixedSchedule && cfg.s_override.is_none() {
        s_schedule(1, p, cfg.scale)?;
    }

    let strata: Vec<Vec<Vec<usize>>> = (0..cfg.ns.len())
        .map(|ni| strata(cfg.seed, ni, cfg.reps, family.d()))
        .collect();
    let jobs: Vec<Job> = cfg
        .ns
        .iter()
        .enumerate()
        .flat_map(|(ni, &n)| {
            let strata = &strata[ni];
            (0..cfg.reps).map(move |rep| Job {
                n,
                rep,
                pair: (ni * cfg.reps + rep) as u64,
                strata,
            })
        })
        .collect();
    let excess = jobs
        .par_iter()
        .map(|job| one_repetition(family, p, cfg, job))
        .collect::<Result<Vec<f64>>>()?;

    let rows: Vec<RateRow> = cfg
        .ns
        .iter()
        .zip(excess.chunks(cfg.reps))
        .map(|(&n, xs)| {
            let m = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / m;
            let var = if xs.len() > 1 {
                xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            RateRow {
                n,
                mean_excess: mean,
                std_excess: var.sqrt(),
                reps: xs.len(),
            }
        })
        .collect();

    let (fitted, excluded): (Vec<&RateRow>, Vec<&RateRow>) = rows.iter().partition(|r| r.mean_excess > 0.0);
    let xs: Vec<f64> = fitted.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = fitted.iter().map(|r| r.mean_excess).collect();
    let fit = fit_loglog(&xs, &ys)?;

    let oracle_in_force = if cfg.mode == RateMode::FixedSchedule && p.gamma > 0.0 {
        let profile = family.margin_profile();
        let consts = theoretical_constants(
            p.alpha,
            p.gamma,
            p.d,
            profile.hausdorff_boundary,
            profile.c_lc,
            profile.c_me,
        )?;
        let flags = cfg
            .ns
            .iter()
            .map(|&n| {
                let s = match cfg.s_override {
                    Some(s) => s,
                    None => s_schedule(n, p, cfg.scale)?,
                };
                Ok(oracle_bound(s, n, cfg.tau, profile.c_mne, profile.delta_star, &consts, p)?.in_force)
            })
            .collect::<Result<Vec<bool>>>()?;
        Some(flags)
    } else {
        None
    };

    Ok(RateExperimentResult {
        excluded: excluded.iter().map(|r| r.n).collect(),
        rows,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        theoretical_exponent,
        oracle_in_force,
    })
}
