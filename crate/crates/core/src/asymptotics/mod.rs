//! Large-sample constants: the design function `psi`, the constant `C` that
//! fixes the asymptotic variance `1/(24 T^2 C^2)` of the slope estimate,
//! `B = \int f^2`, and the efficiencies relative to least squares and to the
//! median of pairwise slopes.

mod design;
pub mod models;

pub use design::DesignSequence;
pub use models::{
    builtin_model, default_grid, validate_model, CustomModel, DistributionModel, Scaled, StandardCauchy,
    StandardLaplace, StandardNormal, StandardUniform,
};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use design::centered;

/// Target and failure thresholds for the `C` integrals.
const C_OPTIONS: QuadratureOptions = QuadratureOptions { target: 1e-8, acceptable: 1e-6, max_intervals: 4000 };
const B_OPTIONS: QuadratureOptions = QuadratureOptions { target: 1e-9, acceptable: 1e-6, max_intervals: 4000 };
/// Largest disagreement tolerated between the two routes to `C` for even densities.
pub const EVEN_ROUTE_TOLERANCE: f64 = 1e-7;
/// `|C|` below this means the limit theory does not apply.
pub const DEGENERATE_C: f64 = 1e-10;

/// `psi(u) = (2u^3 - 3u^2)/sqrt(12)` for the design `x_i = i`.
pub fn psi_linear(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("psi argument {u} outside [0, 1]")));
    }
    Ok((2.0 * u.powi(3) - 3.0 * u * u) / 12f64.sqrt())
}

/// Finite-`n` value `(1/(n^{3/2} T)) sum_{i <= floor(n u)} (x_i - xbar)(n u - i)`.
pub fn psi_numeric(design: &DesignSequence, u: f64, n: usize) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!("psi argument {u} outside (0, 1]")));
    }
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let x = design.generate(n);
    if x.len() != n || x.windows(2).any(|w| w[1] <= w[0]) || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "design {} is not strictly increasing and finite at n = {n}",
            design.label()
        )));
    }
    let d = centered(&x);
    let t = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nu = n as f64 * u;
    let upto = (nu.floor() as usize).min(n);
    let sum: f64 = d[..upto].iter().enumerate().map(|(k, dk)| dk * (nu - (k + 1) as f64)).sum();
    Ok(sum / ((n as f64).powf(1.5) * t))
}

fn point_terms(model: &dyn DistributionModel, weight: impl Fn(f64) -> f64) -> f64 {
    model.density_jumps().into_iter().map(|(u, jump)| weight(u) * jump).sum()
}

/// `C = \int [psi(1 - F) - psi(F)] f' dy`, integrated in `u = F(y)`. For even
/// densities the value is cross-checked against `-2 \int psi(F) f' dy`.
pub fn compute_c(model: &dyn DistributionModel, psi: &dyn Fn(f64) -> f64) -> Result<f64> {
    let g = |u: f64| psi(1.0 - u) - psi(u);
    let main = integrate(|u| g(u) * model.score_at_quantile(u), 0.0, 1.0, C_OPTIONS)?.value;
    let c = main + point_terms(model, g);
    if model.is_symmetric() {
        let even = compute_c_even(model, psi)?;
        if (even - c).abs() > EVEN_ROUTE_TOLERANCE {
            return Err(Error::QuadratureFailure { tolerance: EVEN_ROUTE_TOLERANCE, estimate: (even - c).abs() });
        }
    }
    Ok(c)
}

/// `-2 \int psi(F) f' dy`, valid only for even densities.
pub fn compute_c_even(model: &dyn DistributionModel, psi: &dyn Fn(f64) -> f64) -> Result<f64> {
    let main = integrate(|u| psi(u) * model.score_at_quantile(u), 0.0, 1.0, C_OPTIONS)?.value;
    Ok(-2.0 * (main + point_terms(model, psi)))
}

/// `C` for the linear design after integrating by parts:
/// `-sqrt(12) \int F (1 - F) f^2 dy`.
pub fn compute_c_alt(model: &dyn DistributionModel) -> Result<f64> {
    let r = integrate(|u| u * (1.0 - u) * model.density_at_quantile(u), 0.0, 1.0, C_OPTIONS)?;
    Ok(-12f64.sqrt() * r.value)
}

/// `B = \int f^2 dy = \int_0^1 f(F^{-1}(u)) du`.
pub fn compute_b(model: &dyn DistributionModel) -> Result<f64> {
    Ok(integrate(|u| model.density_at_quantile(u), 0.0, 1.0, B_OPTIONS)?.value)
}

/// Mean difference `E|X - X'| = 2 \int F (1 - F) dy`.
pub fn mean_difference(model: &dyn DistributionModel) -> Result<f64> {
    if !model.variance().is_finite() {
        return Err(Error::InfiniteVariance(model.name()));
    }
    let r = integrate(|u| u * (1.0 - u) / model.density_at_quantile(u), 0.0, 1.0, B_OPTIONS)?;
    Ok(2.0 * r.value)
}

/// Fisher information `\int (f'/f)^2 f dy` of the absolutely continuous part.
pub fn fisher_information(model: &dyn DistributionModel) -> Result<f64> {
    Ok(integrate(|u| model.score_at_quantile(u).powi(2), 0.0, 1.0, C_OPTIONS)?.value)
}

fn extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::json::serialize_extended(*v, s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub model: String,
    pub design: String,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(serialize_with = "extended")]
    pub sigma2: f64,
    #[serde(serialize_with = "extended")]
    pub are_vs_ols: f64,
    pub are_vs_theil: f64,
    /// `1/(24 C^2)`: variance of the slope estimate times `T^2`.
    #[serde(rename = "var_tilde_unitT2")]
    pub var_tilde: f64,
    #[serde(rename = "var_hat_unitT2", serialize_with = "extended")]
    pub var_hat: f64,
    #[serde(rename = "var_star_unitT2")]
    pub var_star: f64,
}

/// All asymptotic constants for one error law and design. The Theil–Sen
/// variance `1/(12 T^2 B^2)` is the linear-design result.
pub fn efficiency_report(model: &dyn DistributionModel, design: &DesignSequence) -> Result<EfficiencyReport> {
    let psi = |u: f64| design.psi(u).unwrap_or(f64::NAN);
    let c = compute_c(model, &psi)?;
    if c.abs() < DEGENERATE_C {
        return Err(Error::DegenerateDesign);
    }
    let b = compute_b(model)?;
    let sigma2 = model.variance();
    let c2 = c * c;
    Ok(EfficiencyReport {
        model: model.name(),
        design: design.label().to_string(),
        c,
        b,
        sigma2,
        are_vs_ols: if sigma2.is_finite() { 24.0 * sigma2 * c2 } else { f64::INFINITY },
        are_vs_theil: 2.0 * c2 / (b * b),
        var_tilde: 1.0 / (24.0 * c2),
        var_hat: sigma2,
        var_star: 1.0 / (12.0 * b * b),
    })
}
