//! Synthetic distributions on `X x Y` with `X = [-1,1]^d`, `Y = {-1,+1}`.
//!
//! Every family has its decision boundary on the hyperplane `x_1 = 0` and a
//! posterior of the form `2 eta(x) - 1 = sign(x_1) |x_1|^gamma`, so the
//! distance to the boundary is `|x_1|` and both noise controls hold with
//! constant one. The families differ in their marginal:
//!
//! - `linear`: uniform on `X`.
//! - `power_mass`: `x_1` has density `(alpha/2) |x_1|^(alpha-1)`, the other
//!   coordinates are uniform. `alpha = 1` is the linear family.
//! - `far_noise`: uniform marginal, but inside a sup-norm ball far from the
//!   boundary `eta` is pulled towards `1/2` without changing sign. This keeps
//!   the Bayes classifier and breaks lower control of the noise.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CellBox;
use crate::quad;

/// Tolerance used by the quadrature fallbacks of `far_noise`.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// A binary label. `Pos` is `+1`, `Neg` is `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// `+1` for `v >= 0`, `-1` otherwise.
    #[inline]
    pub fn from_sign(v: f64) -> Label {
        if v >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn from_int(v: i64) -> Option<Label> {
        match v {
            1 => Some(Label::Pos),
            -1 => Some(Label::Neg),
            _ => None,
        }
    }

    #[inline]
    pub fn value(self) -> i8 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Linear,
    PowerMass,
    FarNoise,
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(FamilyKind::Linear),
            "power_mass" | "power-mass" => Ok(FamilyKind::PowerMass),
            "far_noise" | "far-noise" => Ok(FamilyKind::FarNoise),
            other => Err(Error::InvalidParameter(format!("unknown family kind '{other}'"))),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Linear => "linear",
            FamilyKind::PowerMass => "power_mass",
            FamilyKind::FarNoise => "far_noise",
        })
    }
}

/// Region of critical noise for the `far_noise` family.
///
/// Inside the sup-norm ball of radius `radius` around `center` the weight
/// `w(x) = prod_i smoothstep(1 - |x_i - c_i| / radius)` blends the noise
/// level towards `floor`:
/// `|2 eta - 1| = (1 - depth w) |x_1|^gamma + depth w floor`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub depth: f64,
    pub floor: f64,
}

impl Bump {
    pub fn default_for(d: usize) -> Bump {
        let mut center = vec![0.0; d];
        center[0] = 0.7;
        Bump {
            center,
            radius: 0.15,
            depth: 1.0,
            floor: 1e-9,
        }
    }

    fn validate(&self, d: usize, gamma: f64) -> Result<()> {
        if self.center.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.center.len(),
            });
        }
        let rho = self.radius;
        if !(rho > 0.0) {
            return Err(Error::InvalidParameter("bump radius must be positive".into()));
        }
        if self.center.iter().any(|&c| c - rho < -1.0 || c + rho > 1.0) {
            return Err(Error::InvalidParameter("bump must lie inside [-1,1]^d".into()));
        }
        if !(self.center[0] > 3.0 * rho) {
            return Err(Error::InvalidParameter(
                "bump must lie inside {x_1 > 2 radius}".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.depth) {
            return Err(Error::InvalidParameter("bump depth must lie in [0, 1]".into()));
        }
        let min_noise = (self.center[0] - rho).powf(gamma);
        if !(self.floor >= 0.0 && self.floor < min_noise) {
            return Err(Error::InvalidParameter(format!(
                "bump floor must lie in [0, {min_noise})"
            )));
        }
        Ok(())
    }

    #[inline]
    fn profile(&self, x: f64, c: f64) -> f64 {
        let t = 1.0 - (x - c).abs() / self.radius;
        if t <= 0.0 {
            0.0
        } else {
            t * t * (3.0 - 2.0 * t)
        }
    }

    fn weight(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(&xi, &ci)| self.profile(xi, ci))
            .product()
    }

    /// `true` when `eta = 1/2` is attained at the center.
    fn has_critical_center(&self) -> bool {
        self.depth == 1.0 && self.floor == 0.0
    }
}

/// Exponents and constants of the margin conditions of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginProfile {
    /// Margin exponent.
    pub alpha: f64,
    /// Margin-noise exponent.
    pub beta: f64,
    /// Noise-control exponent.
    pub gamma: f64,
    /// Noise exponent.
    pub q: f64,
    pub c_me: f64,
    pub c_mne: f64,
    pub c_lc: f64,
    pub c_uc: f64,
    pub c_ne: f64,
    /// `(d-1)`-dimensional Hausdorff measure of the decision boundary.
    pub hausdorff_boundary: f64,
    /// Radius up to which the tube-volume bound is asserted.
    pub delta_star: f64,
    /// `false` for families whose noise is not controlled from below.
    pub lower_control: bool,
}

/// A synthetic distribution with analytic posterior.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticFamily {
    kind: FamilyKind,
    d: usize,
    gamma: f64,
    alpha: f64,
    bump: Option<Bump>,
}

fn check_common(d: usize, gamma: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension d must be at least 1".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
    }
    Ok(())
}

impl SyntheticFamily {
    pub fn linear(d: usize, gamma: f64) -> Result<Self> {
        check_common(d, gamma)?;
        Ok(SyntheticFamily {
            kind: FamilyKind::Linear,
            d,
            gamma,
            alpha: 1.0,
            bump: None,
        })
    }

    pub fn power_mass(d: usize, alpha: f64, gamma: f64) -> Result<Self> {
        check_common(d, gamma)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
        }
        Ok(SyntheticFamily {
            kind: FamilyKind::PowerMass,
            d,
            gamma,
            alpha,
            bump: None,
        })
    }

    pub fn far_noise(d: usize, gamma: f64) -> Result<Self> {
        Self::far_noise_with(d, gamma, Bump::default_for(d.max(1)))
    }

    pub fn far_noise_with(d: usize, gamma: f64, bump: Bump) -> Result<Self> {
        check_common(d, gamma)?;
        bump.validate(d, gamma)?;
        Ok(SyntheticFamily {
            kind: FamilyKind::FarNoise,
            d,
            gamma,
            alpha: 1.0,
            bump: Some(bump),
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Exponent of the `x_1` marginal; `1` unless the family is `power_mass`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bump(&self) -> Option<&Bump> {
        self.bump.as_ref()
    }

    #[inline]
    pub(crate) fn pow_gamma(&self, t: f64) -> f64 {
        if self.gamma == 1.0 {
            t
        } else {
            t.powf(self.gamma)
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !(v.abs() <= 1.0)) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        Ok(())
    }

    /// `2 eta(x) - 1` for a point already known to lie in `X`.
    #[inline]
    pub(crate) fn noise_unchecked(&self, x: &[f64]) -> f64 {
        let x1 = x[0];
        if x1 == 0.0 {
            return 0.0;
        }
        let base = self.pow_gamma(x1.abs());
        let level = match &self.bump {
            Some(b) => {
                let w = b.depth * b.weight(x);
                if w > 0.0 {
                    (1.0 - w) * base + w * b.floor
                } else {
                    base
                }
            }
            None => base,
        };
        level.copysign(x1)
    }

    /// The signed noise `2 eta(x) - 1`.
    pub fn noise(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.noise_unchecked(x))
    }

    /// Posterior probability of the label `+1`.
    pub fn eta(&self, x: &[f64]) -> Result<f64> {
        Ok(0.5 * (1.0 + self.noise(x)?))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, x: &[f64]) -> f64 {
        if self.noise_unchecked(x) == 0.0 {
            0.0
        } else {
            x[0].abs()
        }
    }

    /// Sup-norm distance to the region of the opposite class; zero on `X_0`.
    pub fn delta_eta(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.delta_unchecked(x))
    }

    /// `sign(2 eta - 1)` with `sign(0) = +1`.
    pub fn bayes_label(&self, x: &[f64]) -> Result<Label> {
        Ok(Label::from_sign(self.noise(x)?))
    }

    #[inline]
    pub(crate) fn bayes_label_unchecked(&self, x: &[f64]) -> Label {
        Label::from_sign(self.noise_unchecked(x))
    }

    /// Points in the interior of `X_1 ∪ X_{-1}` where `eta = 1/2` anyway.
    pub(crate) fn critical_interior_points(&self) -> Vec<Vec<f64>> {
        match &self.bump {
            Some(b) if b.has_critical_center() => vec![b.center.clone()],
            _ => Vec::new(),
        }
    }

    // ---- x_1 marginal integrals -------------------------------------------

    /// `int_0^t (p/2) u^(p-1) u^e du` for `t >= 0`.
    #[inline]
    fn m(&self, e: f64, t: f64) -> f64 {
        let p = self.alpha;
        let k = p + e;
        if t <= 0.0 {
            return 0.0;
        }
        let tk = if k == 1.0 {
            t
        } else if k == 2.0 {
            t * t
        } else {
            t.powf(k)
        };
        0.5 * p * tk / k
    }

    #[inline]
    fn odd(&self, e: f64, t: f64) -> f64 {
        self.m(e, t.abs()).copysign(t)
    }

    fn others_factor(lower: &[f64], upper: &[f64]) -> f64 {
        lower[1..]
            .iter()
            .zip(&upper[1..])
            .map(|(&l, &u)| 0.5 * (u - l).max(0.0))
            .product()
    }

    fn far_correction(&self, lower: &[f64], upper: &[f64]) -> f64 {
        let Some(b) = &self.bump else { return 0.0 };
        if b.depth == 0.0 {
            return 0.0;
        }
        let rho = b.radius;
        let mut total = b.depth;
        for axis in 0..self.d {
            let c = b.center[axis];
            let lo = lower[axis].max(c - rho);
            let hi = upper[axis].min(c + rho);
            if hi <= lo {
                return 0.0;
            }
            let factor = if axis == 0 {
                let g = |x: f64| 0.5 * b.profile(x, c) * (self.pow_gamma(x) - b.floor);
                piecewise(&g, lo, hi, c)
            } else {
                let g = |x: f64| 0.5 * b.profile(x, c);
                piecewise(&g, lo, hi, c)
            };
            total *= factor;
        }
        total
    }

    /// `P_X(B)` for a box `B` (clipped to `X`).
    pub fn prob_mass(&self, b: &CellBox) -> f64 {
        let Some(c) = b.clip_to_domain() else { return 0.0 };
        (self.odd(0.0, c.upper[0]) - self.odd(0.0, c.lower[0]))
            * Self::others_factor(&c.lower, &c.upper)
    }

    /// `int_B (2 eta - 1) dP_X`.
    pub fn signed_mass(&self, b: &CellBox) -> f64 {
        let Some(c) = b.clip_to_domain() else { return 0.0 };
        let g = self.gamma;
        let lin = (self.m(g, c.upper[0].abs()) - self.m(g, c.lower[0].abs()))
            * Self::others_factor(&c.lower, &c.upper);
        lin - self.far_correction(&c.lower, &c.upper)
    }

    /// `int_B |2 eta - 1| dP_X`.
    pub fn abs_mass(&self, b: &CellBox) -> f64 {
        self.abs_mass_on_side(b, Label::Pos) + self.abs_mass_on_side(b, Label::Neg)
    }

    fn side_range(c: &CellBox, side: Label) -> Option<(f64, f64)> {
        let (a, b) = (c.lower[0], c.upper[0]);
        let (lo, hi) = match side {
            Label::Pos => (a.max(0.0), b),
            Label::Neg => (a, b.min(0.0)),
        };
        (hi > lo).then_some((lo, hi))
    }

    /// `int_{B ∩ {Bayes label = side}} |2 eta - 1| dP_X`.
    pub fn abs_mass_on_side(&self, b: &CellBox, side: Label) -> f64 {
        let Some(c) = b.clip_to_domain() else { return 0.0 };
        let Some((lo, hi)) = Self::side_range(&c, side) else { return 0.0 };
        let g = self.gamma;
        let lin = (self.odd(g, hi) - self.odd(g, lo)) * Self::others_factor(&c.lower, &c.upper);
        let corr = match side {
            Label::Pos => {
                let mut lower = c.lower.clone();
                let mut upper = c.upper.clone();
                lower[0] = lo;
                upper[0] = hi;
                self.far_correction(&lower, &upper)
            }
            // the bump lies inside {x_1 > 0}
            Label::Neg => 0.0,
        };
        lin - corr
    }

    /// `P_X(B ∩ {Bayes label = side})`.
    pub fn prob_mass_on_side(&self, b: &CellBox, side: Label) -> f64 {
        let Some(c) = b.clip_to_domain() else { return 0.0 };
        let Some((lo, hi)) = Self::side_range(&c, side) else { return 0.0 };
        (self.odd(0.0, hi) - self.odd(0.0, lo)) * Self::others_factor(&c.lower, &c.upper)
    }

    fn whole_domain(&self) -> CellBox {
        CellBox {
            lower: vec![-1.0; self.d],
            upper: vec![1.0; self.d],
        }
    }

    /// `int min(eta, 1 - eta) dP_X`.
    pub fn bayes_risk(&self) -> f64 {
        0.5 * (1.0 - self.abs_mass(&self.whole_domain()))
    }

    pub fn margin_profile(&self) -> MarginProfile {
        let alpha = self.alpha;
        let gamma = self.gamma;
        let beta = alpha + gamma;
        MarginProfile {
            alpha,
            beta,
            gamma,
            q: alpha / gamma,
            c_me: 1.0,
            c_mne: (alpha / beta).powf(1.0 / beta),
            c_lc: 1.0,
            c_uc: 1.0,
            c_ne: 1.0,
            hausdorff_boundary: 2f64.powi(self.d as i32 - 1),
            delta_star: 1.0,
            lower_control: self.kind != FamilyKind::FarNoise,
        }
    }

    // ---- sampling ------------------------------------------------------------

    #[inline]
    fn draw_point<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        for axis in 0..self.d {
            let v = 2.0 * rng.random::<f64>() - 1.0;
            let x = if axis == 0 && self.kind == FamilyKind::PowerMass && self.alpha != 1.0 {
                v.abs().powf(1.0 / self.alpha).copysign(v)
            } else {
                v
            };
            out.push(x);
        }
    }

    /// Draws `n` i.i.d. observations from a generator seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<LabeledSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<LabeledSample> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mut points = Vec::with_capacity(n * self.d);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            self.draw_point(rng, &mut points);
            let x = &points[i * self.d..];
            let eta = 0.5 * (1.0 + self.noise_unchecked(x));
            labels.push(if rng.random::<f64>() < eta {
                Label::Pos
            } else {
                Label::Neg
            });
        }
        Ok(LabeledSample {
            d: self.d,
            points,
            labels,
        })
    }

    /// Draws `n` points from the marginal `P_X` only (flat, row-major).
    pub fn sample_points<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let mut points = Vec::with_capacity(n * self.d);
        for _ in 0..n {
            self.draw_point(rng, &mut points);
        }
        points
    }
}

fn piecewise(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, kink: f64) -> f64 {
    if lo < kink && kink < hi {
        quad::integrate(f, lo, kink, 0.5 * QUADRATURE_TOL)
            + quad::integrate(f, kink, hi, 0.5 * QUADRATURE_TOL)
    } else {
        quad::integrate(f, lo, hi, QUADRATURE_TOL)
    }
}

/// An i.i.d. dataset `D = ((x_1, y_1), ..., (x_n, y_n))`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    d: usize,
    points: Vec<f64>,
    labels: Vec<Label>,
}

impl LabeledSample {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        let d = points.first().map(|p| p.len()).ok_or(Error::EmptySample)?;
        let mut flat = Vec::with_capacity(points.len() * d);
        for p in &points {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        Self::from_flat(d, flat, labels)
    }

    pub fn from_flat(d: usize, points: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptySample);
        }
        if d == 0 || points.len() != d * labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates do not form {} points of dimension {d}",
                points.len(),
                labels.len()
            )));
        }
        if let Some(bad) = points.chunks(d).find(|p| p.iter().any(|v| !(v.abs() <= 1.0))) {
            return Err(Error::OutsideDomain(bad.to_vec()));
        }
        Ok(LabeledSample { d, points, labels })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn flat_points(&self) -> &[f64] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], Label)> + '_ {
        self.points.chunks(self.d).zip(self.labels.iter().copied())
    }

    /// Rows `0..k` and `k..n`. Either part may be empty.
    pub fn split_at(&self, k: usize) -> (LabeledSample, LabeledSample) {
        let k = k.min(self.len());
        let first = LabeledSample {
            d: self.d,
            points: self.points[..k * self.d].to_vec(),
            labels: self.labels[..k].to_vec(),
        };
        let second = LabeledSample {
            d: self.d,
            points: self.points[k * self.d..].to_vec(),
            labels: self.labels[k..].to_vec(),
        };
        (first, second)
    }

    /// The rows listed in `order`, in that order.
    pub fn select(&self, order: &[usize]) -> LabeledSample {
        let mut points = Vec::with_capacity(order.len() * self.d);
        let mut labels = Vec::with_capacity(order.len());
        for &i in order {
            points.extend_from_slice(self.point(i));
            labels.push(self.labels[i]);
        }
        LabeledSample {
            d: self.d,
            points,
            labels,
        }
    }

    /// Writes the dataset in the comma-separated text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, y) in self.iter() {
            for v in x {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{y}\n"));
        }
        out
    }
}

/// Rows of a dataset file; labels are present only if every row carries one.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRows {
    pub d: usize,
    pub points: Vec<f64>,
    pub labels: Option<Vec<Label>>,
}

fn parse_label(field: &str, line: usize) -> Result<Label> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("label '{field}' is not a number"),
    })?;
    if v == 1.0 {
        Ok(Label::Pos)
    } else if v == -1.0 {
        Ok(Label::Neg)
    } else {
        Err(Error::Parse {
            line,
            msg: format!("label {field} is not in {{-1, +1}}"),
        })
    }
}

/// Parses dataset text whose rows carry either `d` coordinates (unlabeled) or
/// `d` coordinates followed by a label. When `d` is `None` every row is taken
/// to be labeled and `d` is inferred from the first row.
pub fn parse_rows(text: &str, d: Option<usize>) -> Result<DatasetRows> {
    let mut dim = d;
    let mut labeled: Option<bool> = None;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }
        let normalized = row.replace('\u{2212}', "-");
        let fields: Vec<&str> = normalized.split(',').map(str::trim).collect();
        let dd = *dim.get_or_insert(fields.len().saturating_sub(1).max(1));
        let has_label = if fields.len() == dd + 1 {
            true
        } else if fields.len() == dd {
            false
        } else {
            return Err(Error::Parse {
                line,
                msg: format!("expected {dd} coordinates plus an optional label, found {} fields", fields.len()),
            });
        };
        if *labeled.get_or_insert(has_label) != has_label {
            return Err(Error::Parse {
                line,
                msg: "rows mix labeled and unlabeled observations".into(),
            });
        }
        let start = points.len();
        for f in &fields[..dd] {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("coordinate '{f}' is not a number"),
            })?;
            if !(v.abs() <= 1.0) {
                return Err(Error::Parse {
                    line,
                    msg: format!("coordinate {v} lies outside [-1, 1]"),
                });
            }
            points.push(v);
        }
        debug_assert_eq!(points.len() - start, dd);
        if has_label {
            labels.push(parse_label(fields[dd], line)?);
        }
    }
    let Some(d) = dim.filter(|_| !points.is_empty()) else {
        return Err(Error::EmptySample);
    };
    Ok(DatasetRows {
        d,
        points,
        labels: labeled.unwrap_or(false).then_some(labels),
    })
}

/// Parses labeled dataset text.
pub fn parse_dataset(text: &str, d: Option<usize>) -> Result<LabeledSample> {
    let rows = parse_rows(text, d)?;
    let labels = rows.labels.ok_or(Error::Parse {
        line: 1,
        msg: "dataset rows carry no labels".into(),
    })?;
    LabeledSample::from_flat(rows.d, rows.points, labels)
}

/// Reads a labeled dataset file.
pub fn import_dataset(path: impl AsRef<Path>, d: Option<usize>) -> Result<LabeledSample> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, d)
}
