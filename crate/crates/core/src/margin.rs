//! Decision-boundary geometry and empirical margin-condition estimators.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{CellBox, CellIndex, GridSpec};
use crate::rates::fit_loglog;
use crate::synth::SyntheticFamily;

/// Default grid for the exponent estimators.
pub const DEFAULT_T_GRID: [f64; 5] = [0.5, 0.25, 0.1, 0.05, 0.02];

const RATIO_SLACK: f64 = 1e-9;

/// Cells near the decision boundary (`max Δ <= 3r`) and far from it
/// (`min Δ >= r`). The two sets may overlap.
#[derive(Clone, Debug, PartialEq)]
pub struct NearFarSplit {
    pub r: f64,
    pub near: BTreeSet<CellIndex>,
    pub far: BTreeSet<CellIndex>,
}

impl NearFarSplit {
    pub fn new(r: f64, near: BTreeSet<CellIndex>, far: BTreeSet<CellIndex>) -> Self {
        NearFarSplit { r, near, far }
    }

    /// Whether every cell meeting `X` lies in `near ∪ far`.
    pub fn covers_j(&self, grid: &GridSpec) -> Result<bool> {
        Ok(grid
            .cells_meeting_x()?
            .iter()
            .all(|c| self.near.contains(c) || self.far.contains(c)))
    }
}

/// Range of `x_1` over the part of a cell inside `X`.
fn x1_range(grid: &GridSpec, cell: &CellIndex) -> Result<Option<(f64, f64, CellBox)>> {
    let b = grid.cell_bounds(cell)?;
    Ok(b.clip_to_domain().map(|c| (c.lower[0], c.upper[0], c)))
}

/// Infimum and supremum of `Δ_η` over a clipped cell.
fn delta_range(family: &SyntheticFamily, clipped: &CellBox) -> (f64, f64) {
    let (a, b) = (clipped.lower[0], clipped.upper[0]);
    let sup = a.abs().max(b.abs());
    let mut inf = if a <= 0.0 && 0.0 < b {
        0.0
    } else if a > 0.0 {
        a
    } else {
        b.abs()
    };
    // an interior point with eta = 1/2 has Δ = 0
    let critical = family.critical_interior_points();
    if critical.iter().any(|p| clipped.contains(p)) {
        inf = 0.0;
    }
    (inf, sup)
}

/// Sorts the cells meeting `X` into the near and far sets for threshold `r`.
pub fn near_far_partition(family: &SyntheticFamily, grid: &GridSpec, r: f64) -> Result<NearFarSplit> {
    if family.d() != grid.d() {
        return Err(Error::DimensionMismatch {
            expected: grid.d(),
            got: family.d(),
        });
    }
    if !(r > 0.0) || r < grid.s() / 2.0 {
        return Err(Error::Precondition(format!(
            "near/far threshold r = {r} must satisfy r >= s/2 = {}",
            grid.s() / 2.0
        )));
    }
    let mut near = BTreeSet::new();
    let mut far = BTreeSet::new();
    for cell in grid.cells_meeting_x()? {
        let Some((_, _, clipped)) = x1_range(grid, &cell)? else { continue };
        let (lo, hi) = delta_range(family, &clipped);
        if hi <= 3.0 * r {
            near.insert(cell.clone());
        }
        if lo >= r {
            far.insert(cell);
        }
    }
    Ok(NearFarSplit { r, near, far })
}

/// True iff no far cell meets both classes, i.e. no far cell has an
/// `x_1`-range straddling zero.
pub fn check_far_purity(split: &NearFarSplit, family: &SyntheticFamily, grid: &GridSpec) -> Result<bool> {
    if family.d() != grid.d() {
        return Err(Error::DimensionMismatch {
            expected: grid.d(),
            got: family.d(),
        });
    }
    for cell in &split.far {
        if let Some((a, b, _)) = x1_range(grid, cell)? {
            if a < 0.0 && 0.0 < b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Lebesgue volume of `{x in X : Δ_η(x) <= delta}`.
pub fn tube_volume(family: &SyntheticFamily, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("tube width must be >= 0, got {delta}")));
    }
    // the slab |x_1| <= delta; an isolated critical point has measure zero
    Ok((2.0 * delta).min(2.0) * 2f64.powi(family.d() as i32 - 1))
}

/// A fitted power law `value ≈ (constant · t)^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub constant: f64,
    pub r_squared: f64,
    /// `(t, estimated value)` pairs that entered the fit.
    pub points: Vec<(f64, f64)>,
}

fn validate_t_grid(ts: &[f64]) -> Result<()> {
    if ts.len() < 4 {
        return Err(Error::Estimation(format!(
            "exponent estimation needs at least 4 grid values, got {}",
            ts.len()
        )));
    }
    if let Some(t) = ts.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::InvalidParameter(format!("grid value {t} outside (0, 1]")));
    }
    Ok(())
}

/// `(Δ_η(x), |2η(x) - 1|)` for `m` fresh draws from `P_X`.
fn draw_delta_noise(family: &SyntheticFamily, m: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if m == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = family.d();
    let mut out = Vec::with_capacity(m);
    const CHUNK: usize = 1 << 16;
    let mut left = m;
    while left > 0 {
        let k = left.min(CHUNK);
        let pts = family.sample_points(k, &mut rng);
        out.extend(
            pts.chunks_exact(d)
                .map(|x| (family.delta_unchecked(x), family.noise_unchecked(x).abs())),
        );
        left -= k;
    }
    Ok(out)
}

fn fit_exponent(ts: &[f64], values: Vec<f64>) -> Result<ExponentFit> {
    let points: Vec<(f64, f64)> = ts
        .iter()
        .copied()
        .zip(values)
        .filter(|&(_, v)| v > 0.0)
        .collect();
    if points.len() < 2 {
        return Err(Error::Estimation(format!(
            "only {} grid values have a positive estimate",
            points.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let fit = fit_loglog(&xs, &ys)?;
    if fit.slope == 0.0 {
        return Err(Error::Estimation("fitted exponent is zero".into()));
    }
    Ok(ExponentFit {
        exponent: fit.slope,
        constant: (fit.intercept / fit.slope).exp(),
        r_squared: fit.r_squared,
        points,
    })
}

/// Estimates the margin exponent from `P_X(Δ_η < t)`.
pub fn estimate_me(family: &SyntheticFamily, sample_size: usize, t_grid: &[f64], seed: u64) -> Result<ExponentFit> {
    validate_t_grid(t_grid)?;
    let draws = draw_delta_noise(family, sample_size, seed)?;
    let m = draws.len() as f64;
    let values = t_grid
        .iter()
        .map(|&t| draws.iter().filter(|p| p.0 < t).count() as f64 / m)
        .collect();
    fit_exponent(t_grid, values)
}

/// Estimates the margin-noise exponent from `int_{Δ_η < t} |2η - 1| dP_X`.
pub fn estimate_mne(family: &SyntheticFamily, sample_size: usize, t_grid: &[f64], seed: u64) -> Result<ExponentFit> {
    validate_t_grid(t_grid)?;
    let draws = draw_delta_noise(family, sample_size, seed)?;
    let m = draws.len() as f64;
    let values = t_grid
        .iter()
        .map(|&t| draws.iter().filter(|p| p.0 < t).map(|p| p.1).sum::<f64>() / m)
        .collect();
    fit_exponent(t_grid, values)
}

/// Estimates the noise exponent from `P_X(|2η - 1| < eps)`.
pub fn estimate_ne(family: &SyntheticFamily, sample_size: usize, eps_grid: &[f64], seed: u64) -> Result<ExponentFit> {
    validate_t_grid(eps_grid)?;
    let draws = draw_delta_noise(family, sample_size, seed)?;
    let m = draws.len() as f64;
    let values = eps_grid
        .iter()
        .map(|&e| draws.iter().filter(|p| p.1 < e).count() as f64 / m)
        .collect();
    fit_exponent(eps_grid, values)
}

/// Outcome of a sampled noise-control check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlCheck {
    pub holds: bool,
    pub worst_ratio: f64,
    /// Points where the ratio was defined.
    pub evaluated: usize,
}

fn control_check(
    family: &SyntheticFamily,
    sample_size: usize,
    seed: u64,
    bound: f64,
    ratio: impl Fn(f64, f64) -> Option<f64>,
) -> Result<ControlCheck> {
    if !(family.gamma() > 0.0) {
        return Err(Error::Precondition("noise control needs gamma > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = family.sample_points(sample_size, &mut rng);
    let mut worst = 0.0f64;
    let mut evaluated = 0;
    for x in pts.chunks_exact(family.d()) {
        let dg = family.pow_gamma(family.delta_unchecked(x));
        let noise = family.noise_unchecked(x).abs();
        if let Some(q) = ratio(dg, noise) {
            worst = worst.max(q);
            evaluated += 1;
        }
    }
    Ok(ControlCheck {
        holds: worst <= bound * (1.0 + RATIO_SLACK),
        worst_ratio: worst,
        evaluated,
    })
}

/// Sampled check of `Δ_η^γ <= c_LC · |2η - 1|`.
pub fn check_lower_control(family: &SyntheticFamily, sample_size: usize, seed: u64) -> Result<ControlCheck> {
    let c = family.margin_profile().c_lc;
    control_check(family, sample_size, seed, c, |dg, noise| (noise > 0.0).then(|| dg / noise))
}

/// Sampled check of `|2η - 1| <= c_UC · Δ_η^γ`.
pub fn check_upper_control(family: &SyntheticFamily, sample_size: usize, seed: u64) -> Result<ControlCheck> {
    let c = family.margin_profile().c_uc;
    control_check(family, sample_size, seed, c, |dg, noise| (dg > 0.0).then(|| noise / dg))
}
