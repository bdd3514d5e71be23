//! Classification loss, empirical and exact risks, and the lemma-level risk
//! checks on the near/far decomposition.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{CellIndex, GridSpec};
use crate::hist::HistogramClassifier;
use crate::margin::{near_far_partition, NearFarSplit};
use crate::synth::{Label, LabeledSample, SyntheticFamily};

/// Absolute slack for comparisons between exact integrals.
pub const EXACT_SLACK: f64 = 1e-12;

const RATIO_SLACK: f64 = 1e-9;

/// Smallest Monte Carlo sample accepted by [`excess_risk_mc`].
pub const MC_MIN_DRAWS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RiskMethod {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RiskReport {
    pub risk: f64,
    pub excess: f64,
    pub region: Option<BTreeSet<CellIndex>>,
    pub method: RiskMethod,
    pub std_error: Option<f64>,
}

/// Compensated (Neumaier) summation.
#[derive(Default)]
struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// The 0-1 loss with `sign(0) = +1`.
#[inline]
pub fn classification_loss(y: Label, t: f64) -> u8 {
    (Label::from_sign(t) != y) as u8
}

/// Mean classification loss on `sample`; points outside `region` (if given)
/// contribute zero but still count towards the mean.
pub fn empirical_risk(
    c: &HistogramClassifier,
    sample: &LabeledSample,
    region: Option<&BTreeSet<CellIndex>>,
) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut errors = 0usize;
    for (x, y) in sample.iter() {
        let cell = c.grid().cell_of(x)?;
        if region.is_some_and(|r| !r.contains(&cell)) {
            continue;
        }
        if c.label_of(&cell) != y {
            errors += 1;
        }
    }
    Ok(errors as f64 / sample.len() as f64)
}

fn check_dims(c: &HistogramClassifier, family: &SyntheticFamily) -> Result<()> {
    if c.grid().d() != family.d() {
        return Err(Error::DimensionMismatch {
            expected: family.d(),
            got: c.grid().d(),
        });
    }
    Ok(())
}

/// Exact risk and excess risk of `c`, restricted to the cells of `region`
/// (all cells meeting `X` when `None`).
///
/// Each cell contributes the `|2η - 1|`-mass of the part where the Bayes label
/// disagrees with the cell label.
pub fn excess_risk_exact(
    c: &HistogramClassifier,
    family: &SyntheticFamily,
    region: Option<&BTreeSet<CellIndex>>,
) -> Result<RiskReport> {
    check_dims(c, family)?;
    let all;
    let cells: Box<dyn Iterator<Item = &CellIndex>> = match region {
        Some(r) => Box::new(r.iter()),
        None => {
            all = c.grid().cells_meeting_x()?;
            Box::new(all.iter())
        }
    };
    let mut excess = Accumulator::default();
    let mut risk = Accumulator::default();
    for cell in cells {
        let b = c.grid().cell_bounds(cell)?;
        let label = c.label_of(cell);
        excess.add(family.abs_mass_on_side(&b, label.flip()));
        risk.add(0.5 * (family.prob_mass(&b) - label.as_f64() * family.signed_mass(&b)));
    }
    Ok(RiskReport {
        risk: risk.value().max(0.0),
        excess: excess.value().max(0.0),
        region: region.cloned(),
        method: RiskMethod::Exact,
        std_error: None,
    })
}

/// Monte Carlo estimate of `E[L(Y, c(X)) - L(Y, f*(X))]` from `m` fresh draws.
pub fn excess_risk_mc(
    c: &HistogramClassifier,
    family: &SyntheticFamily,
    m: usize,
    seed: u64,
) -> Result<RiskReport> {
    check_dims(c, family)?;
    if m < MC_MIN_DRAWS {
        return Err(Error::InvalidParameter(format!(
            "Monte Carlo excess risk needs at least {MC_MIN_DRAWS} draws, got {m}"
        )));
    }
    let sample = family.sample(m, seed)?;
    let mut losses = 0u64;
    let (mut sum, mut sum_sq) = (0i64, 0u64);
    for (x, y) in sample.iter() {
        let lc = (c.predict(x)? != y) as i64;
        let lb = (family.bayes_label_unchecked(x) != y) as i64;
        losses += lc as u64;
        let diff = lc - lb;
        sum += diff;
        sum_sq += (diff * diff) as u64;
    }
    let mf = m as f64;
    let mean = sum as f64 / mf;
    let var = ((sum_sq as f64 - mf * mean * mean) / (mf - 1.0)).max(0.0);
    Ok(RiskReport {
        risk: losses as f64 / mf,
        excess: mean,
        region: None,
        method: RiskMethod::MonteCarlo,
        std_error: Some((var / mf).sqrt()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskSplitCheck {
    pub lhs: f64,
    pub rhs_near: f64,
    pub rhs_far: f64,
    pub holds: bool,
}

/// Checks `excess_X <= excess_near + excess_far`.
pub fn risk_split_check(
    c: &HistogramClassifier,
    family: &SyntheticFamily,
    split: &NearFarSplit,
) -> Result<RiskSplitCheck> {
    if !split.covers_j(c.grid())? {
        return Err(Error::Precondition("near/far split does not cover every cell meeting X".into()));
    }
    let lhs = excess_risk_exact(c, family, None)?.excess;
    let rhs_near = excess_risk_exact(c, family, Some(&split.near))?.excess;
    let rhs_far = excess_risk_exact(c, family, Some(&split.far))?.excess;
    Ok(RiskSplitCheck {
        lhs,
        rhs_near,
        rhs_far,
        holds: lhs <= rhs_near + rhs_far + EXACT_SLACK,
    })
}

/// `(E h^2, E h)` for the excess loss `h` of `c` restricted to `far`.
pub fn variance_terms(
    c: &HistogramClassifier,
    family: &SyntheticFamily,
    far: &BTreeSet<CellIndex>,
) -> Result<(f64, f64)> {
    check_dims(c, family)?;
    let mut second = Accumulator::default();
    for cell in far {
        let b = c.grid().cell_bounds(cell)?;
        second.add(family.prob_mass_on_side(&b, c.label_of(cell).flip()));
    }
    let first = excess_risk_exact(c, family, Some(far))?.excess;
    Ok((second.value(), first))
}

/// `E h^2 / E h` on `far`; `None` when `c` agrees with the Bayes classifier
/// there (both moments zero).
pub fn variance_ratio(
    c: &HistogramClassifier,
    family: &SyntheticFamily,
    far: &BTreeSet<CellIndex>,
) -> Result<Option<f64>> {
    let (second, first) = variance_terms(c, family, far)?;
    Ok(if first > 0.0 {
        Some(second / first)
    } else if second > 0.0 {
        Some(f64::INFINITY)
    } else {
        None
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceCheck {
    pub worst_ratio: f64,
    pub bound: f64,
    pub holds: bool,
    /// Set when the far set is empty and the check is vacuous.
    pub degenerate: bool,
    /// Classifiers whose ratio was defined.
    pub evaluated: usize,
}

/// Checks `E h^2 <= (c_LC / r^γ) E h` on the far set for `trials` random
/// cellwise classifiers.
pub fn variance_bound_check(
    family: &SyntheticFamily,
    grid: &GridSpec,
    r: f64,
    trials: usize,
    seed: u64,
) -> Result<VarianceCheck> {
    let profile = family.margin_profile();
    if !(profile.gamma > 0.0) {
        return Err(Error::Precondition("variance bound needs gamma > 0".into()));
    }
    let split = near_far_partition(family, grid, r)?;
    let bound = profile.c_lc / r.powf(profile.gamma);
    if split.far.is_empty() {
        return Ok(VarianceCheck {
            worst_ratio: 0.0,
            bound,
            holds: true,
            degenerate: true,
            evaluated: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classifiers = (0..trials)
        .map(|_| HistogramClassifier::random_cellwise(grid, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let ratios = classifiers
        .par_iter()
        .map(|c| variance_ratio(c, family, &split.far))
        .collect::<Result<Vec<_>>>()?;
    let defined: Vec<f64> = ratios.into_iter().flatten().collect();
    let worst = defined.iter().copied().fold(0.0, f64::max);
    Ok(VarianceCheck {
        worst_ratio: worst,
        bound,
        holds: worst <= bound * (1.0 + RATIO_SLACK),
        degenerate: false,
        evaluated: defined.len(),
    })
}
