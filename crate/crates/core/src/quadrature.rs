//! Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
//!
//! The 15-point rule never evaluates the interval ends, so integrands with
//! integrable endpoint singularities on `(0, 1)` are handled by bisection
//! toward the singular end.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Stop once the summed error estimate is below this.
    pub target: f64,
    /// Fail if the estimate is still above this when the budget runs out.
    pub acceptable: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { target: 1e-8, acceptable: 1e-6, max_intervals: 4000 }
    }
}

impl QuadratureOptions {
    pub fn with_target(target: f64) -> Self {
        Self { target, acceptable: target.max(1e-6), ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        e = res_asc * (200.0 * e / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    if !value.is_finite() {
        return Err(Error::QuadratureFailure { tolerance: 0.0, estimate: f64::INFINITY });
    }
    let error = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    Ok(Segment { a, b, value, error })
}

pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, options: QuadratureOptions) -> Result<Integral> {
    let fail = |estimate: f64| Error::QuadratureFailure { tolerance: options.acceptable, estimate };
    let mut heap = BinaryHeap::new();
    let first = kronrod15(&f, a, b).map_err(|_| fail(f64::INFINITY))?;
    let mut total_error = first.error;
    heap.push(first);
    while total_error > options.target && heap.len() < options.max_intervals {
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = kronrod15(&f, worst.a, mid).map_err(|_| fail(f64::INFINITY))?;
        let right = kronrod15(&f, mid, worst.b).map_err(|_| fail(f64::INFINITY))?;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().map(|s| s.value).sum();
    let error: f64 = segments.iter().map(|s| s.error).sum();
    if error > options.acceptable {
        return Err(fail(error));
    }
    Ok(Integral { value, error, intervals: segments.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|u| 3.0 * u * u, 0.0, 1.0, QuadratureOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn endpoint_singularities() {
        let r = integrate(|u: f64| -u.ln(), 0.0, 1.0, QuadratureOptions::with_target(1e-10)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{r:?}");
        let r = integrate(|u: f64| 1.0 / u.sqrt(), 0.0, 1.0, QuadratureOptions::with_target(1e-9)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn oscillatory() {
        let r = integrate(|u: f64| (20.0 * u).cos(), 0.0, 1.0, QuadratureOptions::default()).unwrap();
        assert!((r.value - (20.0f64).sin() / 20.0).abs() < 1e-10);
    }

    #[test]
    fn failure_is_reported() {
        let opts = QuadratureOptions { target: 1e-12, acceptable: 1e-12, max_intervals: 3 };
        assert!(matches!(integrate(|u: f64| 1.0 / u, 0.0, 1.0, opts), Err(Error::QuadratureFailure { .. })));
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, QuadratureOptions::default()).is_err());
    }
}
