//! Per-user utility functions and their scaling decomposition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scheduler::RATE_FLOOR;

/// Concave increasing per-user utility `u`.
///
/// Log-type utilities are continued linearly below [`RATE_FLOOR`] so that
/// zero rates stay finite; `value_exact` is the unmodified formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "")]
pub enum Utility<T: Real = f64> {
    WeightedSum,
    ProportionalFair,
    AlphaFair { alpha: T },
}

impl<T: Real> Utility<T> {
    /// `AlphaFair` with `alpha = 1` is the same function as proportional fair.
    pub fn normalized(self) -> Self {
        match self {
            Utility::AlphaFair { alpha } if alpha == T::one() => Utility::ProportionalFair,
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Utility::AlphaFair { alpha } if !(alpha > T::zero()) || !alpha.is_finite() => {
                Err(Error::Config(format!("alpha must be positive and finite, got {alpha}")))
            }
            _ => Ok(()),
        }
    }

    fn floored(&self) -> bool {
        !matches!(self, Utility::WeightedSum)
    }

    pub fn value_exact(&self, r: T) -> T {
        match self.normalized() {
            Utility::WeightedSum => r,
            Utility::ProportionalFair => r.ln(),
            Utility::AlphaFair { alpha } => r.powf(T::one() - alpha) / (T::one() - alpha),
        }
    }

    fn derivative_exact(&self, r: T) -> T {
        match self.normalized() {
            Utility::WeightedSum => T::one(),
            Utility::ProportionalFair => T::one() / r,
            Utility::AlphaFair { alpha } => r.powf(-alpha),
        }
    }

    pub fn value(&self, r: T) -> T {
        let eps = T::lit(RATE_FLOOR);
        if self.floored() && r < eps {
            self.value_exact(eps) + self.derivative_exact(eps) * (r - eps)
        } else {
            self.value_exact(r)
        }
    }

    pub fn derivative(&self, r: T) -> T {
        if self.floored() {
            self.derivative_exact(r.max(T::lit(RATE_FLOOR)))
        } else {
            T::one()
        }
    }

    /// `(f(c), g(c))` with `u(c r) = f(c) u(r) + g(c)`.
    pub fn scaling_pair(&self, c: T) -> (T, T) {
        match self.normalized() {
            Utility::WeightedSum => (c, T::zero()),
            Utility::ProportionalFair => (T::one(), c.ln()),
            Utility::AlphaFair { alpha } => (c.powf(T::one() - alpha), T::zero()),
        }
    }
}

/// `sum_k w_k u(r_k)`.
pub fn utility_value<T: Real>(utility: &Utility<T>, weights: &[T], rates: &[T]) -> Result<T> {
    let mut total = T::zero();
    for (&w, &r) in weights.iter().zip(rates) {
        if !r.is_finite() {
            return Err(Error::NonFinite("rate".into()));
        }
        if r < T::zero() {
            return Err(Error::NegativeRate(r.as_f64()));
        }
        total = total + w * utility.value(r);
    }
    Ok(total)
}
