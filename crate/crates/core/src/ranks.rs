//! Residual ranks and Gini's cograduation index at a fixed slope.

use std::fmt;

use num::rational::Ratio;
use num::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, DEFAULT_REL_TOL};

/// Design points `x` (strictly increasing) paired with responses `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<S> {
    x: Vec<S>,
    y: Vec<S>,
    rel_tol: f64,
}

impl<S: Scalar> Sample<S> {
    pub fn new(x: Vec<S>, y: Vec<S>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { x: x.len(), y: y.len() });
        }
        if x.len() < 2 {
            return Err(Error::TooFewPoints(x.len()));
        }
        for (index, v) in x.iter().chain(y.iter()).enumerate() {
            if !v.is_finite_value() {
                return Err(Error::NonFinite { index: index % x.len() });
            }
        }
        for index in 1..x.len() {
            if x[index] <= x[index - 1] {
                return Err(Error::NotIncreasing { index });
            }
        }
        Ok(Self { x, y, rel_tol: DEFAULT_REL_TOL })
    }

    /// Build a sample from `(x, y)` rows in any order; duplicate `x` is an error.
    pub fn from_unsorted(mut rows: Vec<(S, S)>) -> Result<Self> {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateX { value: format!("{:?}", w[0].0) });
        }
        let (x, y) = rows.into_iter().unzip();
        Self::new(x, y)
    }

    /// Relative tolerance for floating ties; ignored by exact scalars.
    pub fn with_tolerance(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn x(&self) -> &[S] {
        &self.x
    }

    pub fn y(&self) -> &[S] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn tolerance(&self) -> f64 {
        self.rel_tol
    }

    /// Residuals `y_i - b x_i`.
    pub fn residuals(&self, b: &S) -> Vec<S> {
        self.x.iter().zip(&self.y).map(|(x, y)| y.clone() - b.clone() * x.clone()).collect()
    }

    /// Same design, responses replaced by `f(x_i, y_i)`.
    pub fn map_y(&self, f: impl Fn(&S, &S) -> S) -> Self {
        let y = self.x.iter().zip(&self.y).map(|(x, y)| f(x, y)).collect();
        Self { x: self.x.clone(), y, rel_tol: self.rel_tol }
    }

    pub fn to_f64(&self) -> Sample<f64> {
        Sample {
            x: self.x.iter().map(Scalar::as_f64).collect(),
            y: self.y.iter().map(Scalar::as_f64).collect(),
            rel_tol: self.rel_tol,
        }
    }
}

/// A permutation of `1..=N`, stored 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankVector(Vec<usize>);

impl RankVector {
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        let n = ranks.len();
        let mut seen = vec![false; n];
        for &r in &ranks {
            if r == 0 || r > n || seen[r - 1] {
                return Err(Error::Domain(format!("{ranks:?} is not a permutation of 1..={n}")));
            }
            seen[r - 1] = true;
        }
        Ok(Self(ranks))
    }

    pub fn identity(n: usize) -> Self {
        Self((1..=n).collect())
    }

    pub(crate) fn from_raw(ranks: Vec<usize>) -> Self {
        debug_assert!(Self::new(ranks.clone()).is_ok());
        Self(ranks)
    }

    /// The mirrored ranking `r_i -> N + 1 - r_i`.
    pub fn reversed(&self) -> Self {
        let n = self.0.len();
        Self(self.0.iter().map(|r| n + 1 - r).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_permutation(&self) -> bool {
        Self::new(self.0.clone()).is_ok()
    }
}

/// An exact value of the cograduation index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "RationalPair", from = "RationalPair")]
pub struct GiniValue(Ratio<i64>);

#[derive(Serialize, Deserialize)]
struct RationalPair {
    num: i64,
    den: i64,
}

impl From<GiniValue> for RationalPair {
    fn from(g: GiniValue) -> Self {
        Self { num: g.numer(), den: g.denom() }
    }
}

impl From<RationalPair> for GiniValue {
    fn from(p: RationalPair) -> Self {
        Self::new(p.num, p.den)
    }
}

impl GiniValue {
    pub const ONE: GiniValue = GiniValue(Ratio::new_raw(1, 1));
    pub const MINUS_ONE: GiniValue = GiniValue(Ratio::new_raw(-1, 1));
    pub const ZERO: GiniValue = GiniValue(Ratio::new_raw(0, 1));

    pub fn new(num: i64, den: i64) -> Self {
        Self(Ratio::new(num, den))
    }

    pub fn from_ratio(r: Ratio<i64>) -> Self {
        Self(r)
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        Self(if self.0 < Ratio::zero() { -self.0 } else { self.0 })
    }
}

impl std::ops::Neg for GiniValue {
    type Output = GiniValue;
    fn neg(self) -> GiniValue {
        GiniValue(-self.0)
    }
}

impl fmt::Display for GiniValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The normalising constant: `N^2` for even `N`, `N^2 - 1` for odd `N`.
pub fn gini_denominator(n: usize) -> i64 {
    let n = n as i64;
    if n % 2 == 0 {
        n * n
    } else {
        n * n - 1
    }
}

/// Ranks of distinct values; `ranks[i] = #{j : values[j] <= values[i]}`.
pub fn compute_ranks<S: Scalar>(values: &[S], rel_tol: f64) -> Result<RankVector> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    for w in order.windows(2) {
        if values[w[0]].coincides(&values[w[1]], rel_tol) {
            let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::TiedValues { first, second });
        }
    }
    let mut ranks = vec![0; values.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    Ok(RankVector(ranks))
}

/// `sum_i |N+1-i-r_i| - |i-r_i|` with 1-based positions; the index is `2/D` times this.
pub(crate) fn cograduation_sum(ranks: &[usize]) -> i64 {
    let n1 = ranks.len() as i64 + 1;
    ranks
        .iter()
        .enumerate()
        .map(|(pos, &r)| {
            let i = pos as i64 + 1;
            let r = r as i64;
            (n1 - i - r).abs() - (i - r).abs()
        })
        .sum()
}

/// Gini's cograduation index between the ranking `ranks` and the natural order.
pub fn gini_index(ranks: &RankVector) -> GiniValue {
    let n = ranks.len();
    GiniValue::new(2 * cograduation_sum(&ranks.0), gini_denominator(n))
}

/// Index of the residuals `y - b x` against the design order.
pub fn gini_at<S: Scalar>(sample: &Sample<S>, b: &S) -> Result<GiniValue> {
    let residuals = sample.residuals(b);
    match compute_ranks(&residuals, sample.tolerance()) {
        Ok(ranks) => Ok(gini_index(&ranks)),
        Err(Error::TiedValues { .. }) => Err(Error::BreakpointHit { slope: b.as_f64() }),
        Err(e) => Err(e),
    }
}
