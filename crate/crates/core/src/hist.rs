//! Histogram classifiers on a cube partition.
//!
//! The empirical rule labels each cell by the sign of the vote difference
//! `f_{D,s} = (#positives - #negatives) / n` of the observations falling into
//! it; the infinite-sample rule uses `int_{A_j} (2 eta - 1) dP_X` instead. A
//! vote of zero (including an empty cell) yields `+1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{CellIndex, GridSpec};
use crate::synth::{Label, LabeledSample, SyntheticFamily};

/// Largest number of occupied cells [`erm_verify`] enumerates exhaustively.
pub const ERM_MAX_OCCUPIED: usize = 20;

/// Dense counting is used when the cells meeting `X` number at most this.
const DENSE_CELL_LIMIT: u128 = 1 << 22;

/// A cellwise classifier `sum_j c_j 1_{A_j}` together with the votes it was
/// derived from.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramClassifier {
    grid: GridSpec,
    votes: BTreeMap<CellIndex, f64>,
    labels: BTreeMap<CellIndex, Label>,
    default_label: Label,
}

impl HistogramClassifier {
    fn from_votes(grid: GridSpec, votes: BTreeMap<CellIndex, f64>) -> Self {
        let labels = votes
            .iter()
            .map(|(k, &v)| (k.clone(), Label::from_sign(v)))
            .collect();
        HistogramClassifier {
            grid,
            votes,
            labels,
            default_label: Label::Pos,
        }
    }

    /// The empirical histogram rule `h_{D,s}`.
    pub fn fit(sample: &LabeledSample, grid: &GridSpec) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        if sample.d() != grid.d() {
            return Err(Error::DimensionMismatch {
                expected: grid.d(),
                got: sample.d(),
            });
        }
        let n = sample.len() as f64;
        let total = grid.cells_meeting_x_count();
        let mut votes = BTreeMap::new();
        if total <= DENSE_CELL_LIMIT && total <= 4 * sample.len() as u128 + 1024 {
            let ranges: Vec<(i64, i64)> = (0..grid.d()).map(|a| grid.axis_range(a)).collect();
            let mut occupied = vec![0u32; total as usize];
            let mut diff = vec![0i64; total as usize];
            for (x, y) in sample.iter() {
                let idx = grid.dense_index(x, &ranges);
                occupied[idx] += 1;
                diff[idx] += y.value() as i64;
            }
            for (idx, (&count, &delta)) in occupied.iter().zip(&diff).enumerate() {
                if count > 0 {
                    votes.insert(grid.dense_to_cell(idx, &ranges), delta as f64 / n);
                }
            }
        } else {
            let mut diff: HashMap<CellIndex, i64> = HashMap::new();
            for (x, y) in sample.iter() {
                *diff.entry(grid.cell_of(x)?).or_insert(0) += y.value() as i64;
            }
            votes.extend(diff.into_iter().map(|(k, v)| (k, v as f64 / n)));
        }
        Ok(Self::from_votes(grid.clone(), votes))
    }

    /// The infinite-sample histogram rule `h_{P,s}`, evaluated on every cell
    /// meeting `X`.
    pub fn infinite_sample_fit(family: &SyntheticFamily, grid: &GridSpec) -> Result<Self> {
        if family.d() != grid.d() {
            return Err(Error::DimensionMismatch {
                expected: grid.d(),
                got: family.d(),
            });
        }
        let mut votes = BTreeMap::new();
        for cell in grid.cells_meeting_x()? {
            let b = grid.cell_bounds(&cell)?;
            votes.insert(cell, family.signed_mass(&b));
        }
        Ok(Self::from_votes(grid.clone(), votes))
    }

    /// A classifier given directly by its cell labels; cells not listed get
    /// `default_label`.
    pub fn from_labels(
        grid: GridSpec,
        labels: BTreeMap<CellIndex, Label>,
        default_label: Label,
    ) -> Self {
        HistogramClassifier {
            grid,
            votes: BTreeMap::new(),
            labels,
            default_label,
        }
    }

    /// The constant classifier.
    pub fn constant(grid: GridSpec, label: Label) -> Self {
        Self::from_labels(grid, BTreeMap::new(), label)
    }

    /// Fair-coin labels on every cell meeting `X`.
    pub fn random_cellwise<R: Rng + ?Sized>(grid: &GridSpec, rng: &mut R) -> Result<Self> {
        let labels = grid
            .cells_meeting_x()?
            .into_iter()
            .map(|c| {
                let l = if rng.random::<bool>() { Label::Pos } else { Label::Neg };
                (c, l)
            })
            .collect();
        Ok(Self::from_labels(grid.clone(), labels, Label::Pos))
    }

    /// Overrides the label of one cell. The cell's vote, if any, is dropped.
    pub fn with_label(mut self, cell: CellIndex, label: Label) -> Self {
        self.votes.remove(&cell);
        self.labels.insert(cell, label);
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn default_label(&self) -> Label {
        self.default_label
    }

    pub fn vote(&self, cell: &CellIndex) -> Option<f64> {
        self.votes.get(cell).copied()
    }

    pub fn votes(&self) -> &BTreeMap<CellIndex, f64> {
        &self.votes
    }

    pub fn labels(&self) -> &BTreeMap<CellIndex, Label> {
        &self.labels
    }

    /// Number of cells with a stored label.
    pub fn stored_cells(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn label_of(&self, cell: &CellIndex) -> Label {
        self.labels.get(cell).copied().unwrap_or(self.default_label)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(self.label_of(&self.grid.cell_of(x)?))
    }

    /// Text serialization: header lines `key=value`, then `k_1,...,k_d:vote`.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# histogram classifier\n");
        let _ = writeln!(out, "s={}", self.grid.s());
        let _ = writeln!(out, "d={}", self.grid.d());
        let _ = writeln!(out, "default_label={}", self.default_label);
        if self.grid.has_offset() {
            let offs: Vec<String> = self.grid.offset().iter().map(|o| o.to_string()).collect();
            let _ = writeln!(out, "offset={}", offs.join(","));
        }
        for (cell, &label) in &self.labels {
            let vote = match self.votes.get(cell) {
                Some(&v) if Label::from_sign(v) == label => v,
                _ => label.as_f64(),
            };
            let _ = writeln!(out, "{cell}:{vote}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut s = None;
        let mut d = None;
        let mut default_label = Label::Pos;
        let mut offset = None;
        let mut cells = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let row = raw.trim();
            if row.is_empty() || row.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line, msg };
            if let Some((key, value)) = row.split_once('=') {
                match key.trim() {
                    "s" => s = Some(value.trim().parse::<f64>().map_err(|e| perr(e.to_string()))?),
                    "d" => d = Some(value.trim().parse::<usize>().map_err(|e| perr(e.to_string()))?),
                    "default_label" => {
                        let v: i64 = value.trim().parse().map_err(|_| perr("bad label".into()))?;
                        default_label = Label::from_int(v).ok_or_else(|| perr("bad label".into()))?;
                    }
                    "offset" => {
                        let o: std::result::Result<Vec<f64>, _> =
                            value.split(',').map(|v| v.trim().parse::<f64>()).collect();
                        offset = Some(o.map_err(|e| perr(e.to_string()))?);
                    }
                    other => return Err(perr(format!("unknown header key '{other}'"))),
                }
            } else if let Some((idx, vote)) = row.split_once(':') {
                let coords: std::result::Result<Vec<i64>, _> =
                    idx.split(',').map(|v| v.trim().parse::<i64>()).collect();
                let coords = coords.map_err(|e| perr(e.to_string()))?;
                let vote: f64 = vote.trim().parse().map_err(|_| perr(format!("bad vote '{vote}'")))?;
                cells.push((line, CellIndex::new(&coords), vote));
            } else {
                return Err(perr(format!("unrecognised line '{row}'")));
            }
        }
        let s = s.ok_or(Error::Parse { line: 0, msg: "missing s".into() })?;
        let d = d.ok_or(Error::Parse { line: 0, msg: "missing d".into() })?;
        let mut grid = GridSpec::new(d, s)?;
        if let Some(o) = offset {
            grid = grid.with_offset(o)?;
        }
        let mut votes = BTreeMap::new();
        for (line, cell, vote) in cells {
            if cell.dim() != d {
                return Err(Error::Parse {
                    line,
                    msg: format!("cell has {} coordinates, expected {d}", cell.dim()),
                });
            }
            votes.insert(cell, vote);
        }
        let mut c = Self::from_votes(grid, votes);
        c.default_label = default_label;
        Ok(c)
    }
}

/// Checks that `c` minimises the empirical risk under the loss restricted to
/// `region` (all cells when `None`) over every cellwise labeling.
///
/// The minimum is found by exhaustive enumeration of the labelings of the
/// occupied cells inside the region, walked in Gray-code order.
pub fn erm_verify(
    c: &HistogramClassifier,
    sample: &LabeledSample,
    region: Option<&BTreeSet<CellIndex>>,
) -> Result<bool> {
    let grid = c.grid();
    let mut per_cell: BTreeMap<CellIndex, [u64; 2]> = BTreeMap::new();
    let mut c_errors = 0u64;
    for (x, y) in sample.iter() {
        let cell = grid.cell_of(x)?;
        if region.is_some_and(|r| !r.contains(&cell)) {
            continue;
        }
        if c.predict(x)? != y {
            c_errors += 1;
        }
        // [errors if labeled -1, errors if labeled +1]
        let e = per_cell.entry(cell).or_insert([0, 0]);
        match y {
            Label::Pos => e[0] += 1,
            Label::Neg => e[1] += 1,
        }
    }
    let m = per_cell.len();
    if m > ERM_MAX_OCCUPIED {
        return Err(Error::Capacity {
            occupied: m,
            limit: ERM_MAX_OCCUPIED,
        });
    }
    let costs: Vec<[u64; 2]> = per_cell.into_values().collect();
    // start with every cell labeled -1
    let mut current: u64 = costs.iter().map(|c| c[0]).sum();
    let mut best = current;
    let mut gray = 0u64;
    for step in 1..(1u64 << m) {
        let bit = step.trailing_zeros() as usize;
        let was_set = gray >> bit & 1 == 1;
        gray ^= 1 << bit;
        let cost = costs[bit];
        if was_set {
            current = current - cost[1] + cost[0];
        } else {
            current = current - cost[0] + cost[1];
        }
        best = best.min(current);
    }
    Ok(c_errors == best)
}

/// A finite set of candidate cell widths in `(0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SGrid {
    values: Vec<f64>,
}

impl SGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("cell-width grid is empty".into()));
        }
        if values.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return Err(Error::InvalidParameter("cell widths must lie in (0, 1]".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("cell widths must be strictly increasing".into()));
        }
        Ok(SGrid { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The uniform `n^{-1/d}`-net `{k n^{-1/d}} ∩ (0, 1]` of `(0, 1]`.
pub fn make_s_grid(n: usize, d: usize) -> Result<SGrid> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "training-validation split needs n >= 4, got {n}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension d must be at least 1".into()));
    }
    let mut root = (n as f64).powf(1.0 / d as f64);
    if (root - root.round()).abs() < 1e-9 {
        root = root.round();
    }
    let count = root.ceil() as usize;
    let values = (1..=count)
        .map(|k| k as f64 / root)
        .filter(|&s| s <= 1.0)
        .collect();
    SGrid::new(values)
}

/// Result of the training-validation histogram rule.
#[derive(Clone, Debug)]
pub struct TvhrFit {
    pub classifier: HistogramClassifier,
    pub chosen_s: f64,
    pub validation_risk: f64,
    /// `(s, validation risk)` for every candidate, in increasing `s`.
    pub table: Vec<(f64, f64)>,
}

/// Training-validation histogram rule on origin-anchored grids.
pub fn tvhr_fit(sample: &LabeledSample, grid_values: &SGrid) -> Result<TvhrFit> {
    tvhr_fit_with_phase(sample, grid_values, &vec![0.0; sample.d()])
}

/// Training-validation histogram rule where the grid of width `s` is shifted
/// by `phase * s` along each axis.
///
/// The first `floor(n/2) + 1` rows train, the rest validate. Among widths with
/// minimal validation risk the smallest is chosen.
pub fn tvhr_fit_with_phase(
    sample: &LabeledSample,
    grid_values: &SGrid,
    phase: &[f64],
) -> Result<TvhrFit> {
    let n = sample.len();
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "training-validation split needs n >= 4, got {n}"
        )));
    }
    if phase.len() != sample.d() {
        return Err(Error::DimensionMismatch {
            expected: sample.d(),
            got: phase.len(),
        });
    }
    let (train, valid) = sample.split_at(n / 2 + 1);
    let errors = if sample.d() == 1 {
        validation_errors_sorted(&train, &valid, grid_values, phase[0])?
    } else {
        validation_errors_naive(&train, &valid, grid_values, phase)?
    };
    // errors are integers, so the smallest-s tie-break is exact
    let (best_idx, &best_err) = errors
        .iter()
        .enumerate()
        .min_by_key(|&(i, &e)| (e, i))
        .expect("non-empty grid");
    let m = valid.len() as f64;
    let chosen_s = grid_values.values()[best_idx];
    let grid = shifted_grid(sample.d(), chosen_s, phase)?;
    Ok(TvhrFit {
        classifier: HistogramClassifier::fit(&train, &grid)?,
        chosen_s,
        validation_risk: best_err as f64 / m,
        table: grid_values
            .values()
            .iter()
            .zip(&errors)
            .map(|(&s, &e)| (s, e as f64 / m))
            .collect(),
    })
}

pub(crate) fn shifted_grid(d: usize, s: f64, phase: &[f64]) -> Result<GridSpec> {
    GridSpec::new(d, s)?.with_offset(phase.iter().map(|p| p * s).collect())
}

fn validation_errors_naive(
    train: &LabeledSample,
    valid: &LabeledSample,
    grid_values: &SGrid,
    phase: &[f64],
) -> Result<Vec<u64>> {
    grid_values
        .values()
        .par_iter()
        .map(|&s| {
            let grid = shifted_grid(train.d(), s, phase)?;
            let c = HistogramClassifier::fit(train, &grid)?;
            let mut errors = 0u64;
            for (x, y) in valid.iter() {
                if c.predict(x)? != y {
                    errors += 1;
                }
            }
            Ok(errors)
        })
        .collect()
}

/// One-dimensional validation errors in `O(#occupied cells * log n)` per
/// width, using sorted coordinates and prefix counts of positive labels.
fn validation_errors_sorted(
    train: &LabeledSample,
    valid: &LabeledSample,
    grid_values: &SGrid,
    phase: f64,
) -> Result<Vec<u64>> {
    fn sorted_with_prefix(s: &LabeledSample) -> (Vec<f64>, Vec<u64>) {
        let mut rows: Vec<(f64, Label)> = s.iter().map(|(x, y)| (x[0], y)).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(rows.len() + 1);
        prefix.push(0u64);
        for &(_, y) in &rows {
            prefix.push(prefix.last().unwrap() + (y == Label::Pos) as u64);
        }
        (rows.into_iter().map(|r| r.0).collect(), prefix)
    }
    let (tx, tpos) = sorted_with_prefix(train);
    let (vx, vpos) = sorted_with_prefix(valid);
    let v_neg_total = vx.len() as u64 - vpos[vx.len()];

    grid_values
        .values()
        .par_iter()
        .map(|&s| {
            let grid = shifted_grid(1, s, &[phase])?;
            // everything labeled +1 by default, then correct the cells voting -1
            let mut errors = v_neg_total as i64;
            let mut i = 0;
            while i < tx.len() {
                let k = grid.axis_index(0, tx[i]);
                let lo = grid.axis_lower(0, k);
                let hi = grid.axis_upper(0, k);
                let end = i + tx[i..].partition_point(|&x| x < hi);
                let pos = tpos[end] - tpos[i];
                let neg = (end - i) as u64 - pos;
                if pos < neg {
                    let a = vx.partition_point(|&x| x < lo);
                    let b = a + vx[a..].partition_point(|&x| x < hi);
                    let vp = (vpos[b] - vpos[a]) as i64;
                    let vn = (b - a) as i64 - vp;
                    errors += vp - vn;
                }
                i = end;
            }
            Ok(errors as u64)
        })
        .collect()
}
