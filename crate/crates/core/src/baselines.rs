//! Reference slope estimators: least squares and the median of pairwise slopes.

use crate::process::pairwise_slopes;
use crate::ranks::Sample;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineFit<S> {
    pub beta_hat: S,
    pub beta_star: S,
    pub slopes_used: usize,
}

pub fn fit_baselines<S: Scalar>(sample: &Sample<S>) -> BaselineFit<S> {
    let n = sample.len();
    BaselineFit { beta_hat: ols_slope(sample), beta_star: theil_sen(sample), slopes_used: n * (n - 1) / 2 }
}

fn mean<S: Scalar>(v: &[S]) -> S {
    let n = S::from_usize(v.len()).expect("length fits the scalar");
    v.iter().cloned().fold(S::zero(), |a, b| a + b) / n
}

/// `sum (x - xbar)(y - ybar) / sum (x - xbar)^2`.
pub fn ols_slope<S: Scalar>(sample: &Sample<S>) -> S {
    let (x, y) = (sample.x(), sample.y());
    let (xbar, ybar) = (mean(x), mean(y));
    let mut sxy = S::zero();
    let mut sxx = S::zero();
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi.clone() - xbar.clone();
        sxy = sxy + dx.clone() * (yi.clone() - ybar.clone());
        sxx = sxx + dx.clone() * dx;
    }
    sxy / sxx
}

/// Least squares written as the mean of pairwise slopes weighted by `(x_j - x_i)^2`.
pub fn ols_pairwise<S: Scalar>(sample: &Sample<S>) -> S {
    let (x, y) = (sample.x(), sample.y());
    let mut num = S::zero();
    let mut den = S::zero();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[j].clone() - x[i].clone();
            num = num + (y[j].clone() - y[i].clone()) * dx.clone();
            den = den + dx.clone() * dx;
        }
    }
    num / den
}

/// Median of the pairwise slopes; the mean of the two central order
/// statistics when their count is even.
pub fn theil_sen<S: Scalar>(sample: &Sample<S>) -> S {
    let mut slopes = pairwise_slopes(sample);
    median_by_selection(&mut slopes)
}

pub(crate) fn median_by_selection<S: Scalar>(values: &mut [S]) -> S {
    let m = values.len();
    let upper_index = m / 2;
    let (below, upper, _) = values.select_nth_unstable_by(upper_index, |a, b| a.total_cmp(b));
    let upper = upper.clone();
    if m % 2 == 1 {
        return upper;
    }
    let lower = below.iter().max_by(|a, b| a.total_cmp(b)).expect("even count >= 2").clone();
    lower.midpoint(&upper)
}
