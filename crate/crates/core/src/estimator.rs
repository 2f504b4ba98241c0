//! The maximum G-indifference slope estimate and its distribution-free
//! confidence bounds.

use std::collections::HashMap;

use num::rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::null::{
    critical_value_with_slack, exact_null_with_ceiling, monte_carlo_null, normal_critical_value, ratio_f64,
    NullDistribution, NullSource, DEFAULT_CEILING, DEFAULT_LEVEL_SLACK,
};
use crate::process::{build_step_function, enumerate_breakpoints, interval_probe, BuildMethod, GiniStepFunction};
use crate::ranks::{gini_at, GiniValue, Sample};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeEstimate<S> {
    pub beta_tilde: S,
    /// `[b(s), b(s+1))` when the index vanishes on a whole interval.
    pub zero_plateau: Option<(S, S)>,
}

/// Midpoint of `sup{b: G > 0}` and `inf{b: G < 0}`.
pub fn point_estimate<S: Scalar>(step: &GiniStepFunction<S>) -> SlopeEstimate<S> {
    let first_nonpositive = step.values.iter().position(|v| *v <= GiniValue::ZERO).expect("step function ends at -1");
    let first_negative = step.values.iter().position(|v| *v < GiniValue::ZERO).expect("step function ends at -1");
    estimate_from_indices(&step.breakpoints, first_nonpositive, first_negative)
}

fn estimate_from_indices<S: Scalar>(
    breakpoints: &[S],
    first_nonpositive: usize,
    first_negative: usize,
) -> SlopeEstimate<S> {
    let sup_positive = breakpoints[first_nonpositive - 1].clone();
    let inf_negative = breakpoints[first_negative - 1].clone();
    let beta_tilde = sup_positive.midpoint(&inf_negative);
    let zero_plateau = (first_negative > first_nonpositive).then_some((sup_positive, inf_negative));
    SlopeEstimate { beta_tilde, zero_plateau }
}

/// Same estimate without tabulating every interval: the index is
/// nonincreasing in the interval number, so both sign changes are found by
/// bisection over the sorted breakpoints.
pub fn point_estimate_fast<S: Scalar>(sample: &Sample<S>) -> Result<SlopeEstimate<S>> {
    let set = enumerate_breakpoints(sample)?;
    let r = set.len();
    let mut cache: HashMap<usize, GiniValue> = HashMap::new();
    let mut value = |k: usize| -> Result<GiniValue> {
        if k == r {
            return Ok(GiniValue::MINUS_ONE);
        }
        if let Some(v) = cache.get(&k) {
            return Ok(*v);
        }
        let v = gini_at(sample, &interval_probe(&set.breakpoints, k))?;
        cache.insert(k, v);
        Ok(v)
    };
    let first_nonpositive = first_true(1, r, |k| Ok(value(k)? <= GiniValue::ZERO))?;
    let first_negative = first_true(first_nonpositive, r, |k| Ok(value(k)? < GiniValue::ZERO))?;
    Ok(estimate_from_indices(&set.breakpoints, first_nonpositive, first_negative))
}

/// Smallest `k` in `[lo, hi]` with `pred(k)`, given `pred` is monotone and `pred(hi)` holds.
fn first_true(mut lo: usize, mut hi: usize, mut pred: impl FnMut(usize) -> Result<bool>) -> Result<usize> {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

fn first_interval<S>(step: &GiniStepFunction<S>, pred: impl Fn(GiniValue) -> bool) -> usize {
    step.values.iter().position(|v| pred(*v)).expect("step function spans [-1, 1]")
}

/// `(inf{b: G(b) < g*}, sup{b: G(b) > -g*})` for `0 < g* <= 1`.
pub fn ci_bounds<S: Scalar>(step: &GiniStepFunction<S>, g_star: GiniValue) -> Result<(S, S)> {
    if g_star <= GiniValue::ZERO || g_star > GiniValue::ONE {
        return Err(Error::DegenerateLevel(g_star.to_f64()));
    }
    let lower = first_interval(step, |v| v < g_star);
    let upper = first_interval(step, |v| v <= -g_star);
    Ok((step.breakpoints[lower - 1].clone(), step.breakpoints[upper - 1].clone()))
}

/// `(inf{b: G(b) <= g}, sup{b: G(b) >= -g})` for `0 <= g < 1`: the bounds for
/// the closed acceptance region `-g <= G <= g`.
pub fn ci_bounds_inclusive<S: Scalar>(step: &GiniStepFunction<S>, g: GiniValue) -> Result<(S, S)> {
    if g < GiniValue::ZERO || g >= GiniValue::ONE {
        return Err(Error::DegenerateLevel(g.to_f64()));
    }
    let lower = first_interval(step, |v| v <= g);
    let upper = first_interval(step, |v| v < -g);
    Ok((step.breakpoints[lower - 1].clone(), step.breakpoints[upper - 1].clone()))
}

/// How to obtain the null law when `n` exceeds the enumeration ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullPolicy {
    ExactOnly,
    MonteCarlo { reps: usize, seed: u64 },
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiOptions {
    pub ceiling: usize,
    pub policy: NullPolicy,
    pub level_slack: f64,
}

impl Default for CiOptions {
    fn default() -> Self {
        Self { ceiling: DEFAULT_CEILING, policy: NullPolicy::ExactOnly, level_slack: DEFAULT_LEVEL_SLACK }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NullUsed {
    Exact,
    MonteCarlo { reps: usize, seed: u64 },
    Normal,
}

impl From<NullSource> for NullUsed {
    fn from(s: NullSource) -> Self {
        match s {
            NullSource::Exact => NullUsed::Exact,
            NullSource::MonteCarlo { reps, seed } => NullUsed::MonteCarlo { reps, seed },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceInterval<S> {
    pub lower: S,
    pub upper: S,
    pub g_star: GiniValue,
    pub achieved_level: f64,
    /// Present whenever the level comes from counts (exact or Monte Carlo).
    pub achieved_level_exact: Option<Ratio<i64>>,
    pub target_level: f64,
    pub null: NullUsed,
}

pub fn confidence_interval<S: Scalar>(sample: &Sample<S>, target_level: f64) -> Result<ConfidenceInterval<S>> {
    confidence_interval_with(sample, target_level, &CiOptions::default())
}

pub fn confidence_interval_with<S: Scalar>(
    sample: &Sample<S>,
    target_level: f64,
    options: &CiOptions,
) -> Result<ConfidenceInterval<S>> {
    let n = sample.len();
    if !(target_level > 0.0 && target_level < 1.0) {
        return Err(Error::InvalidTargetLevel(target_level));
    }
    let step = build_step_function(sample, BuildMethod::Incremental)?;
    if n <= options.ceiling {
        let null = exact_null_with_ceiling(n, options.ceiling)?;
        return interval_from_null(&step, &null, target_level, options.level_slack);
    }
    match options.policy {
        NullPolicy::ExactOnly => Err(Error::NullTooLarge { n, ceiling: options.ceiling }),
        NullPolicy::MonteCarlo { reps, seed } => {
            let null = monte_carlo_null(n, reps, seed)?;
            interval_from_null(&step, &null, target_level, options.level_slack)
        }
        NullPolicy::Normal => {
            let (g_star, level) = normal_critical_value(n, target_level)?;
            let (lower, upper) = ci_bounds(&step, g_star)?;
            Ok(ConfidenceInterval {
                lower,
                upper,
                g_star,
                achieved_level: level,
                achieved_level_exact: None,
                target_level,
                null: NullUsed::Normal,
            })
        }
    }
}

/// Interval for a precomputed step function and null law of matching size.
pub fn interval_from_null<S: Scalar>(
    step: &GiniStepFunction<S>,
    null: &NullDistribution,
    target_level: f64,
    level_slack: f64,
) -> Result<ConfidenceInterval<S>> {
    let (g_star, level) = critical_value_with_slack(null, target_level, level_slack)?;
    let (lower, upper) = ci_bounds(step, g_star)?;
    Ok(ConfidenceInterval {
        lower,
        upper,
        g_star,
        achieved_level: ratio_f64(level),
        achieved_level_exact: Some(level),
        target_level,
        null: null.source.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn ints(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&a| q(a, 1)).collect()
    }

    fn worked_example() -> Sample<BigRational> {
        Sample::new(ints(&[1, 2, 3, 4]), vec![q(2, 1), q(5, 2), q(4, 1), q(5, 1)]).unwrap()
    }

    fn step(s: &Sample<BigRational>) -> GiniStepFunction<BigRational> {
        build_step_function(s, BuildMethod::Incremental).unwrap()
    }

    #[test]
    fn worked_example_estimate() {
        let s = worked_example();
        let est = point_estimate(&step(&s));
        assert_eq!(est.beta_tilde, q(1, 1));
        assert_eq!(est.zero_plateau, None);
        assert_eq!(point_estimate_fast(&s).unwrap(), est);
        assert_eq!(point_estimate_fast(&s.to_f64()).unwrap().beta_tilde, 1.0);
    }

    #[test]
    fn two_points_give_their_slope() {
        let s = Sample::new(vec![1.0, 2.0], vec![2.0, 5.0]).unwrap();
        let st = build_step_function(&s, BuildMethod::Direct).unwrap();
        assert_eq!(point_estimate(&st).beta_tilde, 3.0);
        assert_eq!(point_estimate_fast(&s).unwrap().beta_tilde, 3.0);
    }

    #[test]
    fn zero_plateau_midpoint() {
        let s = Sample::new(ints(&[1, 2, 3, 4]), ints(&[-3, -3, -1, -2])).unwrap();
        let st = step(&s);
        assert_eq!(st.breakpoints, vec![q(-1, 1), q(0, 1), q(1, 3), q(1, 2), q(1, 1), q(2, 1)]);
        let probes = [q(-2, 1), q(-1, 2), q(1, 6), q(5, 12), q(3, 4), q(3, 2), q(3, 1)];
        let brute: Vec<GiniValue> = probes.iter().map(|b| gini_at(&s, b).unwrap()).collect();
        assert_eq!(st.values, brute);
        let est = point_estimate(&st);
        assert_eq!(est.zero_plateau, Some((q(1, 3), q(1, 2))));
        assert_eq!(est.beta_tilde, q(5, 12));
        assert_eq!(point_estimate_fast(&s).unwrap(), est);
    }

    #[test]
    fn worked_example_bounds() {
        let st = step(&worked_example());
        assert_eq!(ci_bounds(&st, GiniValue::ONE).unwrap(), (q(1, 2), q(3, 2)));
        assert_eq!(ci_bounds_inclusive(&st, GiniValue::new(3, 4)).unwrap(), (q(1, 2), q(3, 2)));
        // Strict form at 3/4: first value below 3/4 sits on [1, 1.25).
        assert_eq!(ci_bounds(&st, GiniValue::new(3, 4)).unwrap(), (q(1, 1), q(3, 2)));
        assert!(matches!(ci_bounds(&st, GiniValue::ZERO), Err(Error::DegenerateLevel(_))));
        assert!(matches!(ci_bounds(&st, GiniValue::new(-1, 2)), Err(Error::DegenerateLevel(_))));
        assert!(matches!(ci_bounds_inclusive(&st, GiniValue::ONE), Err(Error::DegenerateLevel(_))));
    }

    #[test]
    fn tiny_critical_value_sandwiches_estimate() {
        let st = step(&worked_example());
        let est = point_estimate(&st).beta_tilde;
        let (lo, hi) = ci_bounds(&st, GiniValue::new(1, 1000)).unwrap();
        assert!(lo <= est && est <= hi);
        assert_eq!((lo, hi), (q(1, 1), q(1, 1)));
    }

    #[test]
    fn worked_example_interval() {
        let ci = confidence_interval(&worked_example(), 0.92).unwrap();
        assert_eq!((ci.lower.clone(), ci.upper.clone()), (q(1, 2), q(3, 2)));
        assert_eq!(ci.g_star, GiniValue::ONE);
        assert_eq!(ci.achieved_level_exact, Some(Ratio::new(11, 12)));
        assert_eq!(ci.null, NullUsed::Exact);
    }

    #[test]
    fn half_level_interval() {
        // n = 4 null: P{|G| < 1/4} = 1/12, P{|G| < 1/2} = 7/12.
        let ci = confidence_interval(&worked_example(), 0.5).unwrap();
        assert_eq!(ci.g_star, GiniValue::new(1, 2));
        assert_eq!(ci.achieved_level_exact, Some(Ratio::new(7, 12)));
        assert_eq!((ci.lower, ci.upper), (q(1, 1), q(5, 4)));
    }

    #[test]
    fn unattainable_and_too_large() {
        let s = Sample::new(vec![1.0, 2.0], vec![2.0, 5.0]).unwrap();
        assert!(matches!(confidence_interval(&s, 0.9), Err(Error::LevelUnattainable { .. })));

        let x: Vec<f64> = (1..=12).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 1.7).sin() + 0.3 * v).collect();
        let s = Sample::new(x, y).unwrap();
        assert!(matches!(confidence_interval(&s, 0.9), Err(Error::NullTooLarge { n: 12, ceiling: 10 })));
        let normal = CiOptions { policy: NullPolicy::Normal, ..CiOptions::default() };
        let ci = confidence_interval_with(&s, 0.9, &normal).unwrap();
        assert_eq!(ci.null, NullUsed::Normal);
        assert!(ci.lower <= ci.upper);
        let mc = CiOptions { policy: NullPolicy::MonteCarlo { reps: 5000, seed: 9 }, ..CiOptions::default() };
        let ci = confidence_interval_with(&s, 0.9, &mc).unwrap();
        assert_eq!(ci.null, NullUsed::MonteCarlo { reps: 5000, seed: 9 });
        assert!(ci.achieved_level >= 0.895);
    }
}
