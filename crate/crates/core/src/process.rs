//! The step function `b -> G(y; b)` over the pairwise-slope breakpoints.
//!
//! Between consecutive distinct pairwise slopes the residual ranks do not
//! change, so the index is piecewise constant. Values are right-continuous:
//! at a breakpoint the function takes the value of the interval to its right.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::ranks::{gini_at, gini_index, GiniValue, RankVector, Sample};
use crate::scalar::Scalar;

/// Largest sample the pairwise-slope routines accept unless overridden.
pub const DEFAULT_MAX_POINTS: usize = 5000;

/// Sorted distinct pairwise slopes, each with the index pairs `(i, j)`, `i < j`,
/// (0-based) whose slope equals it.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointSet<S> {
    pub breakpoints: Vec<S>,
    pub groups: Vec<Vec<(usize, usize)>>,
}

impl<S> BreakpointSet<S> {
    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildMethod {
    /// Evaluate the index at one interior point of every interval.
    Direct,
    /// Walk the breakpoints from the left, reversing the ranks of each
    /// collinear family as its common slope is crossed.
    Incremental,
}

/// Right-continuous nonincreasing step function with `r` breakpoints and
/// `r + 1` interval values.
#[derive(Debug, Clone, PartialEq)]
pub struct GiniStepFunction<S> {
    pub breakpoints: Vec<S>,
    pub values: Vec<GiniValue>,
}

/// One row of the exported trace; `None` stands for an infinite end.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<S> {
    pub interval_left: Option<S>,
    pub interval_right: Option<S>,
    pub value: GiniValue,
}

fn check_size<S: Scalar>(sample: &Sample<S>, max_points: usize) -> Result<()> {
    if sample.len() > max_points {
        return Err(Error::TooManyPoints { n: sample.len(), max: max_points });
    }
    Ok(())
}

/// All pairwise slopes `(y_j - y_i)/(x_j - x_i)` for `i < j`, unsorted.
pub fn pairwise_slopes<S: Scalar>(sample: &Sample<S>) -> Vec<S> {
    let (x, y) = (sample.x(), sample.y());
    let n = sample.len();
    let mut slopes = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            slopes.push((y[j].clone() - y[i].clone()) / (x[j].clone() - x[i].clone()));
        }
    }
    slopes
}

pub fn enumerate_breakpoints<S: Scalar>(sample: &Sample<S>) -> Result<BreakpointSet<S>> {
    enumerate_breakpoints_capped(sample, DEFAULT_MAX_POINTS)
}

pub fn enumerate_breakpoints_capped<S: Scalar>(sample: &Sample<S>, max_points: usize) -> Result<BreakpointSet<S>> {
    check_size(sample, max_points)?;
    let n = sample.len();
    let mut slopes: Vec<(S, (usize, usize))> = Vec::with_capacity(n * (n - 1) / 2);
    let mut it = pairwise_slopes(sample).into_iter();
    for i in 0..n {
        for j in i + 1..n {
            slopes.push((it.next().expect("slope count"), (i, j)));
        }
    }
    slopes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let tol = sample.tolerance();
    let mut breakpoints: Vec<S> = Vec::new();
    let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut last: Option<S> = None;
    for (slope, pair) in slopes {
        let joins = last.as_ref().is_some_and(|prev| prev.coincides(&slope, tol));
        if joins {
            groups.last_mut().expect("group").push(pair);
        } else {
            breakpoints.push(slope.clone());
            groups.push(vec![pair]);
        }
        last = Some(slope);
    }
    Ok(BreakpointSet { breakpoints, groups })
}

/// Point strictly inside interval `k` (0 = left tail, `r` = right tail).
pub(crate) fn interval_probe<S: Scalar>(breakpoints: &[S], k: usize) -> S {
    let r = breakpoints.len();
    if k == 0 {
        breakpoints[0].clone() - S::one()
    } else if k == r {
        breakpoints[r - 1].clone() + S::one()
    } else {
        breakpoints[k - 1].midpoint(&breakpoints[k])
    }
}

pub fn build_step_function<S: Scalar>(sample: &Sample<S>, method: BuildMethod) -> Result<GiniStepFunction<S>> {
    let set = enumerate_breakpoints(sample)?;
    build_from_breakpoints(sample, set, method)
}

pub fn build_from_breakpoints<S: Scalar>(
    sample: &Sample<S>,
    set: BreakpointSet<S>,
    method: BuildMethod,
) -> Result<GiniStepFunction<S>> {
    let values = match method {
        BuildMethod::Direct => (0..=set.len())
            .map(|k| gini_at(sample, &interval_probe(&set.breakpoints, k)))
            .collect::<Result<Vec<_>>>()?,
        BuildMethod::Incremental => rank_table(sample.len(), &set)?.iter().map(gini_index).collect(),
    };
    Ok(GiniStepFunction { breakpoints: set.breakpoints, values })
}

/// Rank vectors on each of the `r + 1` intervals, computed by the update rule
/// `R(v_i) += m - 2i` applied to every collinear family `v_0 < ... < v_m`
/// sharing a breakpoint.
pub fn rank_table<S>(n: usize, set: &BreakpointSet<S>) -> Result<Vec<RankVector>> {
    let mut ranks: Vec<usize> = (1..=n).collect();
    let mut table = Vec::with_capacity(set.len() + 1);
    table.push(RankVector::from_raw(ranks.clone()));
    let mut parent: Vec<usize> = (0..n).collect();
    for group in &set.groups {
        for family in collinear_families(group, &mut parent) {
            let m = family.len() - 1;
            let base = ranks[family[0]];
            if family.iter().enumerate().any(|(i, &v)| ranks[v] != base + i) {
                return Err(Error::InconsistentBreakpoints);
            }
            for (i, &v) in family.iter().enumerate() {
                ranks[v] = ranks[v] + m - 2 * i;
            }
        }
        table.push(RankVector::from_raw(ranks.clone()));
    }
    Ok(table)
}

/// Connected components of the points joined by the pairs of one group, each
/// sorted by index. `parent` is scratch space of length `n`.
fn collinear_families(group: &[(usize, usize)], parent: &mut [usize]) -> Vec<Vec<usize>> {
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for &(i, j) in group {
        parent[i] = i;
        parent[j] = j;
    }
    for &(i, j) in group {
        let (a, b) = (find(parent, i), find(parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut members: Vec<(usize, usize)> = Vec::with_capacity(2 * group.len());
    for &(i, j) in group {
        members.push((find(parent, i), i));
        members.push((find(parent, j), j));
    }
    members.sort_unstable();
    members.dedup();
    let mut families: Vec<Vec<usize>> = Vec::new();
    let mut current_root = usize::MAX;
    for (root, v) in members {
        if root != current_root {
            families.push(Vec::new());
            current_root = root;
        }
        families.last_mut().expect("family").push(v);
    }
    for family in &families {
        for &v in family {
            parent[v] = v;
        }
    }
    families
}

impl<S: Scalar> GiniStepFunction<S> {
    /// Value at `b` under the right-continuous convention.
    pub fn evaluate(&self, b: &S) -> GiniValue {
        let k = self.breakpoints.partition_point(|bk| bk.total_cmp(b) != Ordering::Greater);
        self.values[k]
    }

    /// Left end of interval `k` (`None` for the left tail).
    pub fn left_end(&self, k: usize) -> Option<&S> {
        k.checked_sub(1).map(|i| &self.breakpoints[i])
    }

    pub fn breakpoint_count(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn trace(&self) -> Vec<TraceRecord<S>> {
        let r = self.breakpoints.len();
        (0..=r)
            .map(|k| TraceRecord {
                interval_left: self.left_end(k).cloned(),
                interval_right: self.breakpoints.get(k).cloned(),
                value: self.values[k],
            })
            .collect()
    }
}
