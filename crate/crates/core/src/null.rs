//! Distribution of the cograduation index under indifference.
//!
//! Exact laws come from enumerating all `n!` rankings; larger `n` can use a
//! seeded Monte Carlo approximation or the normal limit with variance `2/(3n)`.

use num::rational::Ratio;
use num::Zero;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::ranks::{cograduation_sum, gini_denominator, GiniValue};
use crate::rng::replication_rng;

/// Default largest `n` enumerated exactly.
pub const DEFAULT_CEILING: usize = 10;
/// `n!` must fit the 64-bit counts and rational masses.
pub const HARD_CEILING: usize = 20;
/// Target levels within this distance below an achieved level are accepted.
pub const DEFAULT_LEVEL_SLACK: f64 = 0.005;
pub const MIN_MC_REPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NullSource {
    Exact,
    MonteCarlo { reps: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    pub n: usize,
    /// Sorted ascending.
    pub support: Vec<GiniValue>,
    pub counts: Vec<u64>,
    /// `n!` for exact laws, the replication count otherwise.
    pub total: u64,
    pub source: NullSource,
}

impl NullDistribution {
    fn from_sum_counts(n: usize, sum_counts: &[u64], total: u64, source: NullSource) -> Self {
        let half = gini_denominator(n) / 2;
        let den = gini_denominator(n);
        let mut support = Vec::new();
        let mut counts = Vec::new();
        for (offset, &c) in sum_counts.iter().enumerate() {
            if c > 0 {
                support.push(GiniValue::new(2 * (offset as i64 - half), den));
                counts.push(c);
            }
        }
        Self { n, support, counts, total, source }
    }

    pub fn masses(&self) -> Vec<Ratio<i64>> {
        self.counts.iter().map(|&c| Ratio::new(c as i64, self.total as i64)).collect()
    }

    pub fn mass_at(&self, g: GiniValue) -> Ratio<i64> {
        self.support
            .binary_search(&g)
            .map(|i| Ratio::new(self.counts[i] as i64, self.total as i64))
            .unwrap_or_else(|_| Ratio::zero())
    }

    pub fn total_mass(&self) -> Ratio<i64> {
        self.masses().into_iter().sum()
    }

    pub fn mean(&self) -> Ratio<i64> {
        self.support.iter().zip(self.masses()).map(|(g, p)| g.ratio() * p).sum()
    }

    pub fn variance_f64(&self) -> f64 {
        let t = self.total as f64;
        let mean: f64 = self.support.iter().zip(&self.counts).map(|(g, &c)| g.to_f64() * c as f64).sum::<f64>() / t;
        self.support.iter().zip(&self.counts).map(|(g, &c)| (g.to_f64() - mean).powi(2) * c as f64).sum::<f64>() / t
    }

    pub fn is_symmetric(&self) -> bool {
        self.support
            .iter()
            .zip(&self.counts)
            .all(|(g, &c)| self.support.binary_search(&-*g).is_ok_and(|i| self.counts[i] == c))
    }

    /// `P{-g* < G < g*}`.
    pub fn coverage(&self, g_star: GiniValue) -> Ratio<i64> {
        let inside: u64 =
            self.support.iter().zip(&self.counts).filter(|(g, _)| g.abs() < g_star).map(|(_, &c)| c).sum();
        Ratio::new(inside as i64, self.total as i64)
    }

    /// Candidate critical values: positive support points together with 1.
    pub fn candidates(&self) -> Vec<GiniValue> {
        let mut c: Vec<GiniValue> = self.support.iter().copied().filter(|g| *g > GiniValue::ZERO).collect();
        c.push(GiniValue::ONE);
        c.dedup();
        c
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Visit every permutation of `items` (Heap's algorithm), calling `f` on each.
fn for_each_permutation(items: &mut [usize], mut f: impl FnMut(&[usize])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    f(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            f(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

const PARALLEL_FROM: usize = 8;

pub fn exact_null(n: usize) -> Result<NullDistribution> {
    exact_null_with_ceiling(n, DEFAULT_CEILING)
}

/// Enumerate all `n!` rankings. Work is split by the rank in the first
/// position; per-part integer counts are summed, so the result does not
/// depend on scheduling.
pub fn exact_null_with_ceiling(n: usize, ceiling: usize) -> Result<NullDistribution> {
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if n > ceiling.min(HARD_CEILING) {
        return Err(Error::NullTooLarge { n, ceiling: ceiling.min(HARD_CEILING) });
    }
    let den = gini_denominator(n);
    let width = den as usize + 1;
    let half = den / 2;
    let part = |first: usize| {
        let mut local = vec![0u64; width];
        let mut rest: Vec<usize> = (1..=n).filter(|&r| r != first).collect();
        let mut ranks = vec![0usize; n];
        ranks[0] = first;
        for_each_permutation(&mut rest, |perm| {
            ranks[1..].copy_from_slice(perm);
            local[(cograduation_sum(&ranks) + half) as usize] += 1;
        });
        local
    };
    let add = |mut a: Vec<u64>, b: Vec<u64>| {
        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        a
    };
    // Small tables are cheaper than waking the thread pool.
    let counts = if n < PARALLEL_FROM {
        (1..=n).map(part).fold(vec![0u64; width], add)
    } else {
        (1..=n).into_par_iter().map(part).reduce(|| vec![0u64; width], add)
    };
    Ok(NullDistribution::from_sum_counts(n, &counts, factorial(n), NullSource::Exact))
}

/// Empirical law of the index over `reps` uniformly random rankings.
pub fn monte_carlo_null(n: usize, reps: usize, seed: u64) -> Result<NullDistribution> {
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if reps < MIN_MC_REPS {
        return Err(Error::TooFewReplications { got: reps, min: MIN_MC_REPS });
    }
    let den = gini_denominator(n);
    let half = den / 2;
    let sums: Vec<i64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(seed, rep as u64);
            let mut ranks: Vec<usize> = (1..=n).collect();
            ranks.shuffle(&mut rng);
            cograduation_sum(&ranks)
        })
        .collect();
    let mut counts = vec![0u64; den as usize + 1];
    for s in sums {
        counts[(s + half) as usize] += 1;
    }
    Ok(NullDistribution::from_sum_counts(n, &counts, reps as u64, NullSource::MonteCarlo { reps, seed }))
}

fn check_target(target_level: f64) -> Result<()> {
    if !(target_level > 0.0 && target_level < 1.0) {
        return Err(Error::InvalidTargetLevel(target_level));
    }
    Ok(())
}

pub fn critical_value(dist: &NullDistribution, target_level: f64) -> Result<(GiniValue, Ratio<i64>)> {
    critical_value_with_slack(dist, target_level, DEFAULT_LEVEL_SLACK)
}

/// Smallest candidate `g*` with `P{-g* < G < g*} >= target_level - slack`.
pub fn critical_value_with_slack(
    dist: &NullDistribution,
    target_level: f64,
    slack: f64,
) -> Result<(GiniValue, Ratio<i64>)> {
    check_target(target_level)?;
    let threshold = target_level - slack.max(0.0);
    let mut best = Ratio::zero();
    for g in dist.candidates() {
        let level = dist.coverage(g);
        if ratio_f64(level) >= threshold {
            return Ok((g, level));
        }
        best = best.max(level);
    }
    Err(Error::LevelUnattainable { target: target_level, n: dist.n, max_attainable: ratio_f64(best) })
}

/// Critical value from the normal limit `G ~ N(0, 2/(3n))`, rounded up to the
/// lattice `2k/D` of attainable index values. Returns `(g*, approximate level)`.
pub fn normal_critical_value(n: usize, target_level: f64) -> Result<(GiniValue, f64)> {
    check_target(target_level)?;
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let sd = (2.0 / (3.0 * n as f64)).sqrt();
    let std_normal = Normal::standard();
    let z = std_normal.inverse_cdf(0.5 + target_level / 2.0);
    let den = gini_denominator(n);
    let k = ((z * sd * den as f64) / 2.0).ceil().max(1.0) as i64;
    let g = GiniValue::new((2 * k).min(den), den);
    let level = 2.0 * std_normal.cdf(g.to_f64() / sd) - 1.0;
    Ok((g, level))
}

pub(crate) fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: i64, d: i64) -> GiniValue {
        GiniValue::new(n, d)
    }

    #[test]
    fn n2_and_n3() {
        let d2 = exact_null(2).unwrap();
        assert_eq!(d2.support, vec![GiniValue::MINUS_ONE, GiniValue::ONE]);
        assert_eq!(d2.masses(), vec![Ratio::new(1, 2), Ratio::new(1, 2)]);

        let d3 = exact_null(3).unwrap();
        assert_eq!(d3.support, vec![g(-1, 1), g(-1, 2), g(1, 2), g(1, 1)]);
        assert_eq!(d3.masses(), vec![Ratio::new(1, 6), Ratio::new(1, 3), Ratio::new(1, 3), Ratio::new(1, 6)]);
    }

    #[test]
    fn n4_central_mass() {
        let d = exact_null(4).unwrap();
        let inside: Ratio<i64> =
            d.support.iter().zip(d.masses()).filter(|(v, _)| v.abs() <= g(3, 4)).map(|(_, p)| p).sum();
        assert_eq!(inside, Ratio::new(11, 12));
        assert_eq!(d.coverage(GiniValue::ONE), Ratio::new(11, 12));
        assert_eq!(d.total, 24);
    }

    #[test]
    fn exact_invariants_small_n() {
        for n in 2..=7 {
            let d = exact_null(n).unwrap();
            assert_eq!(d.total_mass(), Ratio::from_integer(1));
            assert!(d.mean().is_zero());
            assert!(d.is_symmetric());
            let nf = factorial(n) as i64;
            assert_eq!(d.mass_at(GiniValue::ONE), Ratio::new(1, nf));
            assert_eq!(d.mass_at(GiniValue::MINUS_ONE), Ratio::new(1, nf));
            assert!(d.support.iter().all(|v| v.abs() <= GiniValue::ONE));
            let levels: Vec<_> = d.candidates().into_iter().map(|c| d.coverage(c)).collect();
            assert!(levels.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn ceiling_enforced() {
        assert_eq!(exact_null(11).unwrap_err(), Error::NullTooLarge { n: 11, ceiling: 10 });
        assert_eq!(exact_null_with_ceiling(21, 30).unwrap_err(), Error::NullTooLarge { n: 21, ceiling: 20 });
        assert!(matches!(exact_null(1), Err(Error::TooFewPoints(1))));
    }

    #[test]
    fn critical_values() {
        let d4 = exact_null(4).unwrap();
        assert_eq!(critical_value(&d4, 0.92).unwrap(), (GiniValue::ONE, Ratio::new(11, 12)));
        // P{|G| < 1/4} = 2/24, P{|G| < 1/2} = 14/24.
        assert_eq!(critical_value(&d4, 0.5).unwrap(), (g(1, 2), Ratio::new(7, 12)));
        let d3 = exact_null(3).unwrap();
        assert_eq!(critical_value(&d3, 0.3).unwrap(), (GiniValue::ONE, Ratio::new(2, 3)));
        let d2 = exact_null(2).unwrap();
        assert!(matches!(critical_value(&d2, 0.99), Err(Error::LevelUnattainable { .. })));
        assert!(matches!(critical_value_with_slack(&d4, 0.92, 0.0), Err(Error::LevelUnattainable { .. })));
        assert!(matches!(critical_value(&d4, 1.0), Err(Error::InvalidTargetLevel(_))));
    }

    #[test]
    fn monte_carlo_matches_exact_n4() {
        let d = monte_carlo_null(4, 100_000, 3).unwrap();
        let inside: f64 =
            d.support.iter().zip(&d.counts).filter(|(v, _)| v.abs() <= g(3, 4)).map(|(_, &c)| c as f64).sum::<f64>()
                / d.total as f64;
        assert!((inside - 11.0 / 12.0).abs() <= 0.01, "{inside}");
        assert_eq!(d, monte_carlo_null(4, 100_000, 3).unwrap());
        assert!(monte_carlo_null(4, 999, 3).is_err());
    }

    #[test]
    fn monte_carlo_moments() {
        let d = monte_carlo_null(50, 20_000, 1).unwrap();
        assert!(ratio_f64(d.mean()).abs() <= 0.02);
        let d = monte_carlo_null(200, 20_000, 1).unwrap();
        let scaled = 200.0 * d.variance_f64();
        assert!((scaled - 2.0 / 3.0).abs() <= 0.05, "{scaled}");
    }

    #[test]
    fn normal_critical_value_on_lattice() {
        let (gs, level) = normal_critical_value(40, 0.9).unwrap();
        assert_eq!(1600 % gs.denom(), 0);
        assert!(level >= 0.9);
        let sd = (2.0f64 / 120.0).sqrt();
        assert!(gs.to_f64() >= 1.6448 * sd && gs.to_f64() - 2.0 / 1600.0 < 1.6449 * sd);
    }
}
