//! Cube partitions of `R^d`.
//!
//! Cells are half-open boxes `prod_i [o_i + k_i s, o_i + (k_i + 1) s)` where
//! `o` is an optional per-axis offset (zero by default, so cells sit at integer
//! multiples of `s`). Every point therefore has exactly one cell.

use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Default cap on the number of cells [`GridSpec::cells_meeting_x`] may enumerate.
pub const DEFAULT_CELL_CAP: u128 = 100_000_000;

/// Integer address of a grid cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex(pub SmallVec<[i64; 4]>);

impl CellIndex {
    pub fn new(coords: &[i64]) -> Self {
        CellIndex(SmallVec::from_slice(coords))
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

/// Axis-aligned box with `upper_i - lower_i = s` for grid cells.
#[derive(Clone, Debug, PartialEq)]
pub struct CellBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl CellBox {
    /// Half-open membership test, matching the cell convention.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lower.len()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&xi, (&lo, &hi))| lo <= xi && xi < hi)
    }

    /// Intersection with `[-1,1]^d`, or `None` when it is empty.
    ///
    /// The result is treated as a closed box; faces only matter up to
    /// Lebesgue-null sets for every integral computed over it.
    pub fn clip_to_domain(&self) -> Option<CellBox> {
        let mut lower = Vec::with_capacity(self.lower.len());
        let mut upper = Vec::with_capacity(self.upper.len());
        for (&lo, &hi) in self.lower.iter().zip(&self.upper) {
            let a = lo.max(-1.0);
            let b = hi.min(1.0);
            // a half-open cell [lo, hi) meets [-1,1] iff lo <= 1 and hi > -1
            if lo > 1.0 || hi <= -1.0 {
                return None;
            }
            lower.push(a);
            upper.push(b.max(a));
        }
        Some(CellBox { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

/// A partition of `R^d` into cubes of side length `s in (0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    d: usize,
    s: f64,
    offset: Vec<f64>,
    cell_cap: u128,
}

impl GridSpec {
    pub fn new(d: usize, s: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension d must be at least 1".into()));
        }
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cell side length s = {s} must lie in (0, 1]"
            )));
        }
        Ok(GridSpec {
            d,
            s,
            offset: vec![0.0; d],
            cell_cap: DEFAULT_CELL_CAP,
        })
    }

    /// Shifts the partition by `offset` (one entry per axis).
    pub fn with_offset(mut self, offset: Vec<f64>) -> Result<Self> {
        if offset.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: offset.len(),
            });
        }
        if offset.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidParameter("grid offset must be finite".into()));
        }
        self.offset = offset;
        Ok(self)
    }

    pub fn with_cell_cap(mut self, cap: u128) -> Self {
        self.cell_cap = cap;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn has_offset(&self) -> bool {
        self.offset.iter().any(|&o| o != 0.0)
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got,
            });
        }
        Ok(())
    }

    /// Index of the cell along `axis` containing the coordinate `x`.
    ///
    /// The floor of `(x - o) / s` can be off by one under rounding; the result
    /// is corrected so that `lower(k) <= x < upper(k)` holds with the exact
    /// expressions used by [`GridSpec::cell_bounds`].
    #[inline]
    pub fn axis_index(&self, axis: usize, x: f64) -> i64 {
        let o = self.offset[axis];
        let mut k = ((x - o) / self.s).floor() as i64;
        if x < o + k as f64 * self.s {
            k -= 1;
        } else if x >= o + (k + 1) as f64 * self.s {
            k += 1;
        }
        k
    }

    #[inline]
    pub fn axis_lower(&self, axis: usize, k: i64) -> f64 {
        self.offset[axis] + k as f64 * self.s
    }

    #[inline]
    pub fn axis_upper(&self, axis: usize, k: i64) -> f64 {
        self.offset[axis] + (k + 1) as f64 * self.s
    }

    pub fn cell_of(&self, x: &[f64]) -> Result<CellIndex> {
        self.check_dim(x.len())?;
        Ok(CellIndex(
            x.iter()
                .enumerate()
                .map(|(axis, &xi)| self.axis_index(axis, xi))
                .collect(),
        ))
    }

    pub fn cell_bounds(&self, idx: &CellIndex) -> Result<CellBox> {
        self.check_dim(idx.dim())?;
        let lower = idx
            .coords()
            .iter()
            .enumerate()
            .map(|(axis, &k)| self.axis_lower(axis, k))
            .collect();
        let upper = idx
            .coords()
            .iter()
            .enumerate()
            .map(|(axis, &k)| self.axis_upper(axis, k))
            .collect();
        Ok(CellBox { lower, upper })
    }

    /// Inclusive index range along `axis` of the cells meeting `[-1, 1]`.
    pub fn axis_range(&self, axis: usize) -> (i64, i64) {
        (self.axis_index(axis, -1.0), self.axis_index(axis, 1.0))
    }

    /// Number of cells meeting `X = [-1,1]^d`, without enumerating them.
    pub fn cells_meeting_x_count(&self) -> u128 {
        (0..self.d)
            .map(|axis| {
                let (lo, hi) = self.axis_range(axis);
                (hi - lo + 1) as u128
            })
            .fold(1u128, |acc, m| acc.saturating_mul(m))
    }

    /// All cells `A_j` with `A_j ∩ [-1,1]^d` nonempty, in lexicographic order.
    pub fn cells_meeting_x(&self) -> Result<Vec<CellIndex>> {
        let needed = self.cells_meeting_x_count();
        if needed > self.cell_cap {
            return Err(Error::TooManyCells {
                needed,
                cap: self.cell_cap,
            });
        }
        let ranges: Vec<(i64, i64)> = (0..self.d).map(|a| self.axis_range(a)).collect();
        let mut out = Vec::with_capacity(needed as usize);
        let mut current: SmallVec<[i64; 4]> = ranges.iter().map(|r| r.0).collect();
        loop {
            out.push(CellIndex(current.clone()));
            // odometer increment, last axis fastest
            let mut axis = self.d;
            loop {
                if axis == 0 {
                    return Ok(out);
                }
                axis -= 1;
                if current[axis] < ranges[axis].1 {
                    current[axis] += 1;
                    break;
                }
                current[axis] = ranges[axis].0;
            }
        }
    }

    /// Dense linear index of a point inside `[-1,1]^d` relative to the box of
    /// cells meeting `X`; used by the counting fast path of the fitter.
    pub(crate) fn dense_index(&self, x: &[f64], ranges: &[(i64, i64)]) -> usize {
        let mut idx = 0usize;
        for (axis, (&xi, &(lo, hi))) in x.iter().zip(ranges).enumerate() {
            let k = self.axis_index(axis, xi);
            idx = idx * (hi - lo + 1) as usize + (k - lo) as usize;
        }
        idx
    }

    pub(crate) fn dense_to_cell(&self, mut idx: usize, ranges: &[(i64, i64)]) -> CellIndex {
        let mut coords: SmallVec<[i64; 4]> = SmallVec::from_elem(0, self.d);
        for axis in (0..self.d).rev() {
            let (lo, hi) = ranges[axis];
            let width = (hi - lo + 1) as usize;
            coords[axis] = lo + (idx % width) as i64;
            idx /= width;
        }
        CellIndex(coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cell_of_examples() {
        let g = GridSpec::new(1, 1.0).unwrap();
        assert_eq!(g.cell_of(&[0.0]).unwrap(), CellIndex::new(&[0]));
        let g = GridSpec::new(2, 0.5).unwrap();
        assert_eq!(g.cell_of(&[-0.3, 0.7]).unwrap(), CellIndex::new(&[-1, 1]));
        let g = GridSpec::new(1, 0.5).unwrap();
        assert_eq!(g.cell_of(&[1.0]).unwrap(), CellIndex::new(&[2]));
    }

    #[test]
    fn cell_of_rejects_wrong_dimension() {
        let g = GridSpec::new(2, 0.5).unwrap();
        assert!(matches!(
            g.cell_of(&[0.1]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn cell_bounds_examples() {
        let g = GridSpec::new(1, 1.0).unwrap();
        let b = g.cell_bounds(&CellIndex::new(&[0])).unwrap();
        assert_eq!((b.lower[0], b.upper[0]), (0.0, 1.0));

        let g = GridSpec::new(2, 0.5).unwrap();
        let b = g.cell_bounds(&CellIndex::new(&[-1, 1])).unwrap();
        assert_eq!(b.lower, vec![-0.5, 0.5]);
        assert_eq!(b.upper, vec![0.0, 1.0]);

        let g = GridSpec::new(1, 0.5).unwrap();
        let b = g.cell_bounds(&CellIndex::new(&[2])).unwrap();
        assert_eq!((b.lower[0], b.upper[0]), (1.0, 1.5));
    }

    #[test]
    fn cells_meeting_x_examples() {
        let cells = GridSpec::new(1, 1.0).unwrap().cells_meeting_x().unwrap();
        let ks: Vec<i64> = cells.iter().map(|c| c.0[0]).collect();
        assert_eq!(ks, vec![-1, 0, 1]);

        let cells = GridSpec::new(1, 0.5).unwrap().cells_meeting_x().unwrap();
        let ks: Vec<i64> = cells.iter().map(|c| c.0[0]).collect();
        assert_eq!(ks, vec![-2, -1, 0, 1, 2]);

        assert_eq!(GridSpec::new(2, 1.0).unwrap().cells_meeting_x().unwrap().len(), 9);
    }

    #[test]
    fn cell_cap_is_enforced() {
        let g = GridSpec::new(3, 0.01).unwrap().with_cell_cap(1000);
        assert!(matches!(g.cells_meeting_x(), Err(Error::TooManyCells { .. })));
    }

    #[test]
    fn invalid_side_lengths() {
        assert!(GridSpec::new(1, 0.0).is_err());
        assert!(GridSpec::new(1, 1.5).is_err());
        assert!(GridSpec::new(0, 0.5).is_err());
        assert!(GridSpec::new(1, f64::NAN).is_err());
    }

    #[test]
    fn enumeration_matches_brute_force_intersection() {
        for &(d, s) in &[(1, 0.3), (2, 0.4), (2, 1.0), (3, 0.7)] {
            let g = GridSpec::new(d, s).unwrap();
            let cells = g.cells_meeting_x().unwrap();
            // brute force over a generous index window
            let window = (2.0 / s).ceil() as i64 + 2;
            let mut expected = 0usize;
            let mut idx = vec![-window; d];
            loop {
                let b = g.cell_bounds(&CellIndex::new(&idx)).unwrap();
                if b.lower.iter().zip(&b.upper).all(|(&lo, &hi)| lo <= 1.0 && hi > -1.0) {
                    expected += 1;
                    assert!(cells.contains(&CellIndex::new(&idx)));
                }
                let mut axis = d;
                let mut done = true;
                while axis > 0 {
                    axis -= 1;
                    if idx[axis] < window {
                        idx[axis] += 1;
                        done = false;
                        break;
                    }
                    idx[axis] = -window;
                }
                if done {
                    break;
                }
            }
            assert_eq!(cells.len(), expected);
            assert!((cells.len() as f64) <= 8f64.powi(d as i32) * s.powi(-(d as i32)));
        }
    }

    #[test]
    fn offset_grid_straddles_origin() {
        let g = GridSpec::new(1, 1.0).unwrap().with_offset(vec![-0.5]).unwrap();
        assert_eq!(g.cell_of(&[0.2]).unwrap(), CellIndex::new(&[0]));
        let b = g.cell_bounds(&CellIndex::new(&[0])).unwrap();
        assert_eq!((b.lower[0], b.upper[0]), (-0.5, 0.5));
    }

    proptest! {
        #[test]
        fn round_trip(d in 1usize..4, s in 0.01f64..=1.0, seed in prop::collection::vec(-1.0f64..=1.0, 3), off in 0.0f64..1.0) {
            let x = &seed[..d];
            let g = GridSpec::new(d, s).unwrap().with_offset(vec![off * s; d]).unwrap();
            let idx = g.cell_of(x).unwrap();
            prop_assert!(g.cell_bounds(&idx).unwrap().contains(x));
            let (lo, hi) = g.axis_range(0);
            prop_assert!(lo <= idx.0[0] && idx.0[0] <= hi);
        }

        #[test]
        fn cardinality_bound(d in 1usize..4, s in 0.05f64..=1.0) {
            let g = GridSpec::new(d, s).unwrap();
            let count = g.cells_meeting_x_count() as f64;
            prop_assert!(count <= 8f64.powi(d as i32) * s.powi(-(d as i32)));
        }

        #[test]
        fn distinct_cells_are_disjoint(s in 0.05f64..=1.0, a in -30i64..30, b in -30i64..30) {
            prop_assume!(a != b);
            let g = GridSpec::new(1, s).unwrap();
            let ba = g.cell_bounds(&CellIndex::new(&[a])).unwrap();
            let bb = g.cell_bounds(&CellIndex::new(&[b])).unwrap();
            prop_assert!(ba.upper[0] <= bb.lower[0] || bb.upper[0] <= ba.lower[0]);
        }
    }
}
