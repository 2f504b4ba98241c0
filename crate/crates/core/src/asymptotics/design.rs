use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Generator = Arc<dyn Fn(usize) -> Vec<f64> + Send + Sync>;
type PsiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A family of designs `N -> (x_1, ..., x_N)`.
#[derive(Clone)]
pub struct DesignSequence {
    label: String,
    generator: Generator,
    psi_limit: Option<PsiFn>,
    reference_n: usize,
}

impl fmt::Debug for DesignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DesignSequence")
            .field("label", &self.label)
            .field("closed_form_psi", &self.psi_limit.is_some())
            .field("reference_n", &self.reference_n)
            .finish()
    }
}

impl DesignSequence {
    /// `n` is used to approximate the limit of `psi` when no closed form is known.
    pub fn new(
        label: impl Into<String>,
        reference_n: usize,
        generator: impl Fn(usize) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), generator: Arc::new(generator), psi_limit: None, reference_n }
    }

    pub fn with_psi_limit(mut self, psi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.psi_limit = Some(Arc::new(psi));
        self
    }

    /// `x_i = i`.
    pub fn linear() -> Self {
        Self::new("linear", 100_000, |n| (1..=n).map(|i| i as f64).collect())
            .with_psi_limit(|u| super::psi_linear(u).unwrap_or(f64::NAN))
    }

    /// `x_i = ratio^i`; the limiting `psi` vanishes identically.
    pub fn geometric(ratio: f64) -> Self {
        Self::new(format!("geometric({ratio})"), 40, move |n| (1..=n).map(|i| ratio.powi(i as i32)).collect())
            .with_psi_limit(|_| 0.0)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generate(&self, n: usize) -> Vec<f64> {
        (self.generator)(n)
    }

    pub fn reference_n(&self) -> usize {
        self.reference_n
    }

    /// Limiting `psi(u)`: the closed form when known, else the finite sum at the reference size.
    pub fn psi(&self, u: f64) -> Result<f64> {
        match &self.psi_limit {
            Some(psi) => {
                if !(0.0..=1.0).contains(&u) {
                    return Err(Error::Domain(format!("psi argument {u} outside [0, 1]")));
                }
                Ok(psi(u))
            }
            None if u == 0.0 => Ok(0.0),
            None => super::psi_numeric(self, u, self.reference_n),
        }
    }

    /// `T^2 = sum (x_i - xbar)^2`.
    pub fn t_squared(&self, n: usize) -> f64 {
        let x = self.generate(n);
        centered(&x).iter().map(|d| d * d).sum()
    }

    /// `T^2 / max_i (x_i - xbar)^2`, which must diverge for the limit theory to apply.
    pub fn t2_over_m(&self, n: usize) -> f64 {
        let x = self.generate(n);
        let d = centered(&x);
        let t2: f64 = d.iter().map(|v| v * v).sum();
        let m = d.iter().map(|v| v * v).fold(0.0, f64::max);
        t2 / m
    }
}

pub(crate) fn centered(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}
