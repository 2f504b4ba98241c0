use cograd::baselines::{ols_pairwise, ols_slope};
use cograd::estimator::{ci_bounds, point_estimate, point_estimate_fast};
use cograd::process::{build_step_function, enumerate_breakpoints, rank_table, BuildMethod, GiniStepFunction};
use cograd::ranks::{compute_ranks, gini_denominator, gini_index, GiniValue, Sample};
use cograd::scalar::Scalar;
use num::{BigInt, BigRational};
use proptest::prelude::*;

type Q = BigRational;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Strictly increasing integer x (gaps 1..=3) and quarter-integer y, 2 <= N <= 30.
/// Small ranges make coincident slopes common.
fn exact_sample() -> impl Strategy<Value = Sample<Q>> {
    (2usize..=30).prop_flat_map(|n| {
        (-10i64..10, prop::collection::vec(1i64..=3, n), prop::collection::vec((-40i64..=40, 1i64..=4), n)).prop_map(
            |(start, gaps, ys)| {
                let x: Vec<Q> = gaps
                    .iter()
                    .scan(start, |acc, g| {
                        *acc += g;
                        Some(q(*acc, 1))
                    })
                    .collect();
                let y = ys.into_iter().map(|(a, b)| q(a, b)).collect();
                Sample::new(x, y).unwrap()
            },
        )
    })
}

fn float_sample() -> impl Strategy<Value = Sample<f64>> {
    (2usize..=30).prop_flat_map(|n| {
        (prop::collection::vec(0.01f64..2.0, n), prop::collection::vec(-100.0f64..100.0, n)).prop_map(|(gaps, y)| {
            let x: Vec<f64> = gaps
                .iter()
                .scan(0.0, |acc, g| {
                    *acc += g;
                    Some(*acc)
                })
                .collect();
            Sample::new(x, y).unwrap()
        })
    })
}

fn step(s: &Sample<Q>) -> GiniStepFunction<Q> {
    build_step_function(s, BuildMethod::Incremental).unwrap()
}

/// One interior point of every constancy interval, from left to right.
fn probes(st: &GiniStepFunction<Q>) -> Vec<Q> {
    let bps = &st.breakpoints;
    let mut out = vec![bps[0].clone() - q(1, 1)];
    out.extend(bps.windows(2).map(|w| (w[0].clone() + w[1].clone()) / q(2, 1)));
    out.push(bps[bps.len() - 1].clone() + q(1, 1));
    out
}

fn rational() -> impl Strategy<Value = Q> {
    (-60i64..60, 1i64..9).prop_map(|(a, b)| q(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn step_function_is_nonincreasing_from_one_to_minus_one(s in exact_sample()) {
        let st = step(&s);
        prop_assert!(st.is_nonincreasing());
        prop_assert_eq!(st.values[0], GiniValue::ONE);
        prop_assert_eq!(*st.values.last().unwrap(), GiniValue::MINUS_ONE);
    }

    #[test]
    fn builders_agree(s in exact_sample()) {
        let direct: GiniStepFunction<Q> = build_step_function(&s, BuildMethod::Direct).unwrap();
        prop_assert_eq!(direct, step(&s));
    }

    #[test]
    fn rank_table_matches_direct_ranking(s in exact_sample()) {
        let set = enumerate_breakpoints(&s).unwrap();
        let table = rank_table(s.len(), &set).unwrap();
        let st = step(&s);
        for (ranks, b) in table.iter().zip(probes(&st)) {
            let direct = compute_ranks(&s.residuals(&b), s.tolerance()).unwrap();
            prop_assert_eq!(ranks, &direct);
            prop_assert_eq!(gini_index(ranks), st.evaluate(&b));
        }
    }

    #[test]
    fn estimate_is_regression_equivariant(s in exact_sample(), c in rational(), d in rational()) {
        let beta = point_estimate(&step(&s)).beta_tilde;
        let moved = s.map_y(|x, y| y.clone() + c.clone() + d.clone() * x.clone());
        prop_assert_eq!(point_estimate(&step(&moved)).beta_tilde, beta + d);
    }

    #[test]
    fn estimate_is_antisymmetric(s in exact_sample()) {
        let beta = point_estimate(&step(&s)).beta_tilde;
        let negated = s.map_y(|_, y| -y.clone());
        prop_assert_eq!(point_estimate(&step(&negated)).beta_tilde, -beta);
    }

    #[test]
    fn negation_reflects_the_step_function(s in exact_sample()) {
        let st = step(&s);
        let negated = step(&s.map_y(|_, y| -y.clone()));
        for b in probes(&st) {
            prop_assert_eq!(negated.evaluate(&-b.clone()), -st.evaluate(&b));
        }
    }

    #[test]
    fn bounds_sandwich_the_estimate(s in exact_sample(), k in 1i64..=1000) {
        let st = step(&s);
        let den = gini_denominator(s.len());
        let g_star = GiniValue::new(1 + k % den, den);
        let beta = point_estimate(&st).beta_tilde;
        let (lower, upper) = ci_bounds(&st, g_star).unwrap();
        prop_assert!(lower <= beta && beta <= upper);
    }

    #[test]
    fn intervals_nest_in_the_critical_value(s in exact_sample(), a in 1i64..=1000, b in 1i64..=1000) {
        let st = step(&s);
        let den = gini_denominator(s.len());
        let (small, large) = (1 + a.min(b) % den, 1 + a.max(b) % den);
        let (small, large) = (small.min(large), small.max(large));
        let (l1, u1) = ci_bounds(&st, GiniValue::new(small, den)).unwrap();
        let (l2, u2) = ci_bounds(&st, GiniValue::new(large, den)).unwrap();
        prop_assert!(l2 <= l1 && u1 <= u2);
    }

    #[test]
    fn bisection_matches_full_step_function(s in exact_sample()) {
        prop_assert_eq!(point_estimate_fast(&s).unwrap(), point_estimate(&step(&s)));
    }

    #[test]
    fn least_squares_is_weighted_pairwise_slope(s in float_sample()) {
        let direct = ols_slope(&s);
        let pairwise = ols_pairwise(&s);
        prop_assert!((direct - pairwise).abs() <= 1e-10 * direct.abs().max(1.0), "{} vs {}", direct, pairwise);
    }

    #[test]
    fn float_and_exact_estimates_agree(s in exact_sample()) {
        let exact = point_estimate(&step(&s)).beta_tilde;
        let float = s.to_f64();
        let fst: GiniStepFunction<f64> = build_step_function(&float, BuildMethod::Incremental).unwrap();
        let approx = point_estimate(&fst).beta_tilde;
        let exact_f = exact.as_f64();
        prop_assert!((approx - exact_f).abs() <= 1e-9 * exact_f.abs().max(1.0));
    }
}
