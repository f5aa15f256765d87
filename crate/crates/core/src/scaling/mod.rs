//! Closed-form scaling laws, growth ODE integration, and log-log regression.
//!
//! Everything here is pure and generic over the scalar type, so the same
//! code drives `f32` and `f64` instantiations.

mod growth;
mod regression;

pub use growth::{
    asymptotic_mass, city_growth, growth_analytic, integrate_growth, CityGrowthParams,
    CityGrowthResult, GrowthParams,
};
pub use regression::{linear_fit, loglog_fit, RegressionResult};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A power law `c·x^e`.
///
/// Houses sublinear flow exponents, superlinear interaction exponents, and
/// the metabolic 3/4 alike; only the numbers differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw<F> {
    coefficient: F,
    exponent: F,
}

impl<F: Real> PowerLaw<F> {
    pub fn new(coefficient: F, exponent: F) -> Result<Self> {
        if !(coefficient > F::zero()) || !coefficient.is_finite() {
            return Err(Error::Domain(format!(
                "power-law coefficient must be positive and finite, got {coefficient}"
            )));
        }
        if !exponent.is_finite() {
            return Err(Error::Domain(format!("power-law exponent must be finite, got {exponent}")));
        }
        Ok(Self { coefficient, exponent })
    }

    pub fn coefficient(&self) -> F {
        self.coefficient
    }

    pub fn exponent(&self) -> F {
        self.exponent
    }

    /// Evaluate `c·x^e` at `x > 0`.
    pub fn eval(&self, x: F) -> Result<F> {
        if !(x > F::zero()) {
            return Err(Error::Domain(format!("power law defined for x > 0, got {x}")));
        }
        Ok(self.coefficient * x.powf(self.exponent))
    }
}

/// Evaluate a power law at `x`; free-function form of [`PowerLaw::eval`].
pub fn power_eval<F: Real>(law: &PowerLaw<F>, x: F) -> Result<F> {
    law.eval(x)
}

/// Number of pairwise interactions among `n` nodes.
///
/// Directed counts every ordered pair `n(n-1)`; undirected halves that.
pub fn interaction_count(n: u64, directed: bool) -> u128 {
    let n = n as u128;
    let ordered = n.saturating_mul(n.saturating_sub(1));
    if directed {
        ordered
    } else {
        ordered / 2
    }
}
