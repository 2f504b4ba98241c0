//! Error laws used by the efficiency computations and the simulations.
//!
//! Every integral in this crate is taken after the substitution `u = F(y)`,
//! so models expose their density and score (`f'/f`) as functions of `u`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub trait DistributionModel: Send + Sync {
    fn name(&self) -> String;
    fn pdf(&self, y: f64) -> f64;
    fn pdf_deriv(&self, y: f64) -> f64;
    fn cdf(&self, y: f64) -> f64;
    fn quantile(&self, u: f64) -> f64;
    /// `+inf` when the second moment does not exist.
    fn variance(&self) -> f64;
    fn is_symmetric(&self) -> bool;

    fn has_quantile(&self) -> bool {
        true
    }

    /// Discontinuities of the density as `(F(y0), f(y0+) - f(y0-))`; they
    /// contribute point masses to `f'`.
    fn density_jumps(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }

    /// `f(F^{-1}(u))`.
    fn density_at_quantile(&self, u: f64) -> f64 {
        self.pdf(self.quantile(u))
    }

    /// `(f'/f)(F^{-1}(u))`.
    fn score_at_quantile(&self, u: f64) -> f64 {
        let y = self.quantile(u);
        let f = self.pdf(y);
        if f > 0.0 {
            self.pdf_deriv(y) / f
        } else {
            0.0
        }
    }
}

impl fmt::Debug for dyn DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DistributionModel({})", self.name())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StandardNormal;

impl DistributionModel for StandardNormal {
    fn name(&self) -> String {
        "normal".into()
    }
    fn pdf(&self, y: f64) -> f64 {
        Normal::standard().pdf(y)
    }
    fn pdf_deriv(&self, y: f64) -> f64 {
        -y * self.pdf(y)
    }
    fn cdf(&self, y: f64) -> f64 {
        Normal::standard().cdf(y)
    }
    fn quantile(&self, u: f64) -> f64 {
        Normal::standard().inverse_cdf(u)
    }
    fn variance(&self) -> f64 {
        1.0
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn score_at_quantile(&self, u: f64) -> f64 {
        -self.quantile(u)
    }
}

/// Double exponential with density `exp(-|y|)/2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardLaplace;

impl DistributionModel for StandardLaplace {
    fn name(&self) -> String {
        "laplace".into()
    }
    fn pdf(&self, y: f64) -> f64 {
        0.5 * (-y.abs()).exp()
    }
    fn pdf_deriv(&self, y: f64) -> f64 {
        if y == 0.0 {
            0.0
        } else {
            -y.signum() * self.pdf(y)
        }
    }
    fn cdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            0.5 * y.exp()
        } else {
            1.0 - 0.5 * (-y).exp()
        }
    }
    fn quantile(&self, u: f64) -> f64 {
        if u < 0.5 {
            (2.0 * u).ln()
        } else {
            -(2.0 * (1.0 - u)).ln()
        }
    }
    fn variance(&self) -> f64 {
        2.0
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn density_at_quantile(&self, u: f64) -> f64 {
        u.min(1.0 - u)
    }
    fn score_at_quantile(&self, u: f64) -> f64 {
        if u < 0.5 {
            1.0
        } else if u > 0.5 {
            -1.0
        } else {
            0.0
        }
    }
}

/// Density `1/(pi (1 + y^2))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardCauchy;

impl DistributionModel for StandardCauchy {
    fn name(&self) -> String {
        "cauchy".into()
    }
    fn pdf(&self, y: f64) -> f64 {
        1.0 / (PI * (1.0 + y * y))
    }
    fn pdf_deriv(&self, y: f64) -> f64 {
        let d = 1.0 + y * y;
        -2.0 * y / (PI * d * d)
    }
    fn cdf(&self, y: f64) -> f64 {
        0.5 + y.atan() / PI
    }
    fn quantile(&self, u: f64) -> f64 {
        (PI * (u - 0.5)).tan()
    }
    fn variance(&self) -> f64 {
        f64::INFINITY
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn density_at_quantile(&self, u: f64) -> f64 {
        (PI * u).sin().powi(2) / PI
    }
    fn score_at_quantile(&self, u: f64) -> f64 {
        (2.0 * PI * u).sin()
    }
}

/// Uniform on `[0, 1]`; the density jumps by `+1` at 0 and `-1` at 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardUniform;

impl DistributionModel for StandardUniform {
    fn name(&self) -> String {
        "uniform".into()
    }
    fn pdf(&self, y: f64) -> f64 {
        if (0.0..=1.0).contains(&y) {
            1.0
        } else {
            0.0
        }
    }
    fn pdf_deriv(&self, _y: f64) -> f64 {
        0.0
    }
    fn cdf(&self, y: f64) -> f64 {
        y.clamp(0.0, 1.0)
    }
    fn quantile(&self, u: f64) -> f64 {
        u
    }
    fn variance(&self) -> f64 {
        1.0 / 12.0
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn density_jumps(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 1.0), (1.0, -1.0)]
    }
    fn density_at_quantile(&self, _u: f64) -> f64 {
        1.0
    }
    fn score_at_quantile(&self, _u: f64) -> f64 {
        0.0
    }
}

/// The law of `s * Y` for `Y` distributed as `inner`.
#[derive(Clone)]
pub struct Scaled {
    inner: Arc<dyn DistributionModel>,
    scale: f64,
}

impl Scaled {
    pub fn new(inner: Arc<dyn DistributionModel>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidModel(format!("scale must be positive, got {scale}")));
        }
        Ok(Self { inner, scale })
    }
}

impl DistributionModel for Scaled {
    fn name(&self) -> String {
        format!("{}*{}", self.scale, self.inner.name())
    }
    fn pdf(&self, y: f64) -> f64 {
        self.inner.pdf(y / self.scale) / self.scale
    }
    fn pdf_deriv(&self, y: f64) -> f64 {
        self.inner.pdf_deriv(y / self.scale) / (self.scale * self.scale)
    }
    fn cdf(&self, y: f64) -> f64 {
        self.inner.cdf(y / self.scale)
    }
    fn quantile(&self, u: f64) -> f64 {
        self.scale * self.inner.quantile(u)
    }
    fn variance(&self) -> f64 {
        self.scale * self.scale * self.inner.variance()
    }
    fn is_symmetric(&self) -> bool {
        self.inner.is_symmetric()
    }
    fn has_quantile(&self) -> bool {
        self.inner.has_quantile()
    }
    fn density_jumps(&self) -> Vec<(f64, f64)> {
        self.inner.density_jumps().into_iter().map(|(u, j)| (u, j / self.scale)).collect()
    }
    fn density_at_quantile(&self, u: f64) -> f64 {
        self.inner.density_at_quantile(u) / self.scale
    }
    fn score_at_quantile(&self, u: f64) -> f64 {
        self.inner.score_at_quantile(u) / self.scale
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied law given by its density, density derivative, cdf and
/// (optionally) quantile function.
#[derive(Clone)]
pub struct CustomModel {
    name: String,
    pdf: RealFn,
    pdf_deriv: RealFn,
    cdf: RealFn,
    quantile: Option<RealFn>,
    variance: f64,
    symmetric: bool,
}

impl CustomModel {
    pub fn new(
        name: impl Into<String>,
        pdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        pdf_deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            pdf: Arc::new(pdf),
            pdf_deriv: Arc::new(pdf_deriv),
            cdf: Arc::new(cdf),
            quantile: None,
            variance: f64::INFINITY,
            symmetric: false,
        }
    }

    pub fn with_quantile(mut self, quantile: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.quantile = Some(Arc::new(quantile));
        self
    }

    pub fn with_variance(mut self, variance: f64) -> Self {
        self.variance = variance;
        self
    }

    pub fn symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }
}

impl DistributionModel for CustomModel {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn pdf(&self, y: f64) -> f64 {
        (self.pdf)(y)
    }
    fn pdf_deriv(&self, y: f64) -> f64 {
        (self.pdf_deriv)(y)
    }
    fn cdf(&self, y: f64) -> f64 {
        (self.cdf)(y)
    }
    fn quantile(&self, u: f64) -> f64 {
        self.quantile.as_ref().map_or(f64::NAN, |q| q(u))
    }
    fn variance(&self) -> f64 {
        self.variance
    }
    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
    fn has_quantile(&self) -> bool {
        self.quantile.is_some()
    }
}

/// Grid used by [`validate_model`] when the caller has no better choice.
pub fn default_grid() -> Vec<f64> {
    (0..=120).map(|k| -6.03 + 0.1 * k as f64).collect()
}

/// Check a model on a grid: nonnegative density, monotone cdf in `[0, 1]`,
/// `quantile(cdf(y)) ~ y` to 1e-8, and `pdf_deriv` against central
/// differences to 1e-5. Points where the density is negligible are skipped
/// for the inversion check.
pub fn validate_model(model: &dyn DistributionModel, grid: &[f64]) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidModel(format!("{}: {msg}", model.name())));
    let mut prev_cdf = f64::NEG_INFINITY;
    for &y in grid {
        let (f, c) = (model.pdf(y), model.cdf(y));
        if f.is_nan() || f < 0.0 {
            return bad(format!("negative or undefined density at {y}"));
        }
        if !(0.0..=1.0).contains(&c) || c < prev_cdf {
            return bad(format!("cdf not a nondecreasing map into [0, 1] at {y}"));
        }
        prev_cdf = c;
        let h = 1e-5 * y.abs().max(1.0);
        let fd = (model.pdf(y + h) - model.pdf(y - h)) / (2.0 * h);
        if (fd - model.pdf_deriv(y)).abs() > 1e-5 {
            return bad(format!("pdf_deriv disagrees with finite differences at {y}"));
        }
        if model.has_quantile() && f > 1e-6 && c > 1e-9 && c < 1.0 - 1e-9 {
            let back = model.quantile(c);
            if (back - y).abs() > 1e-8 * y.abs().max(1.0) {
                return bad(format!("quantile(cdf({y})) = {back}"));
            }
        }
    }
    Ok(())
}

pub fn builtin_model(name: &str) -> Option<Arc<dyn DistributionModel>> {
    let model: Arc<dyn DistributionModel> = match name.to_ascii_lowercase().as_str() {
        "normal" | "gaussian" => Arc::new(StandardNormal),
        "laplace" | "double-exponential" | "double_exponential" => Arc::new(StandardLaplace),
        "cauchy" => Arc::new(StandardCauchy),
        "uniform" => Arc::new(StandardUniform),
        _ => return None,
    };
    Some(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtins() -> Vec<Arc<dyn DistributionModel>> {
        ["normal", "laplace", "cauchy"].iter().map(|n| builtin_model(n).unwrap()).collect()
    }

    #[test]
    fn builtins_validate() {
        for m in builtins() {
            validate_model(m.as_ref(), &default_grid()).unwrap();
        }
        let inside: Vec<f64> = (1..100).map(|k| k as f64 / 100.0 + 0.003).filter(|y| *y < 1.0).collect();
        validate_model(&StandardUniform, &inside).unwrap();
    }

    #[test]
    fn quantile_shortcuts_match_generic_path() {
        for m in builtins() {
            for k in 1..50 {
                let u = k as f64 / 50.0 + 0.0037;
                let y = m.quantile(u);
                assert!((m.density_at_quantile(u) - m.pdf(y)).abs() < 1e-12, "{}", m.name());
                let score = m.pdf_deriv(y) / m.pdf(y);
                assert!((m.score_at_quantile(u) - score).abs() < 1e-9, "{} at {u}", m.name());
            }
        }
    }

    #[test]
    fn broken_models_are_rejected() {
        let wrong_deriv = CustomModel::new(
            "bad",
            |y: f64| (-y * y / 2.0).exp() / (2.0 * PI).sqrt(),
            |_| 0.3,
            |y| Normal::standard().cdf(y),
        )
        .with_quantile(|u| Normal::standard().inverse_cdf(u));
        assert!(validate_model(&wrong_deriv, &default_grid()).is_err());

        let wrong_quantile = CustomModel::new(
            "bad-q",
            |y| StandardCauchy.pdf(y),
            |y| StandardCauchy.pdf_deriv(y),
            |y| StandardCauchy.cdf(y),
        )
        .with_quantile(|u| 2.0 * u);
        assert!(validate_model(&wrong_quantile, &default_grid()).is_err());

        let good = CustomModel::new("logistic", logistic_pdf, logistic_deriv, logistic_cdf)
            .with_quantile(|u| (u / (1.0 - u)).ln())
            .with_variance(PI * PI / 3.0)
            .symmetric(true);
        validate_model(&good, &default_grid()).unwrap();
    }

    fn logistic_pdf(y: f64) -> f64 {
        let e = (-y.abs()).exp();
        e / (1.0 + e).powi(2)
    }
    fn logistic_deriv(y: f64) -> f64 {
        let c = logistic_cdf(y);
        logistic_pdf(y) * (1.0 - 2.0 * c)
    }
    fn logistic_cdf(y: f64) -> f64 {
        1.0 / (1.0 + (-y).exp())
    }

    #[test]
    fn scaled_model() {
        let s = Scaled::new(Arc::new(StandardLaplace), 3.0).unwrap();
        validate_model(&s, &default_grid()).unwrap();
        assert_eq!(s.variance(), 18.0);
        assert!(Scaled::new(Arc::new(StandardLaplace), 0.0).is_err());
    }
}
