//! Meromorphic function models.
//!
//! Two concrete representations are provided: [`FactoredFunction`], a
//! product of linear, scaled, exponential and constant factors with signed
//! multiplicities, and [`RationalFunction`], a quotient of dense
//! polynomials. Both implement [`Meromorphic`], the interface consumed by
//! the argument field, the locator and the certifier.

mod factored;
mod rational;

pub use factored::{Factor, FactorBase, FactoredFunction};
pub(crate) use factored::{ln_1p, CompensatedSum};
pub use rational::{RationalFunction, MAX_ORACLE_DEGREE};

use crate::complex::ComplexPoint;
use crate::error::Result;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A zero or pole location with its order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub point: ComplexPoint,
    pub multiplicity: u32,
}

/// Zeros and poles of a model, each with multiplicity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ZerosAndPoles {
    pub zeros: Vec<Singularity>,
    pub poles: Vec<Singularity>,
}

impl ZerosAndPoles {
    pub fn iter(&self) -> impl Iterator<Item = &Singularity> {
        self.zeros.iter().chain(self.poles.iter())
    }

    /// Distance from `s` to the closest zero or pole (infinite if none).
    pub fn nearest_distance(&self, s: Complex64) -> f64 {
        self.iter()
            .map(|z| (z.point.to_complex() - s).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty() && self.poles.is_empty()
    }
}

/// A meromorphic function `W` that can be evaluated together with its
/// logarithmic derivative `L = W'/W` and `L'`.
///
/// These methods do not enforce any clearance from zeros and poles; they
/// fail only when the result is not finite. Callers that need the
/// clearance precondition go through [`crate::argfield::ArgField`].
pub trait Meromorphic: Sync {
    fn evaluate(&self, s: Complex64) -> Result<Complex64>;

    fn log_derivative(&self, s: Complex64) -> Result<Complex64>;

    fn log_derivative_prime(&self, s: Complex64) -> Result<Complex64>;

    fn zeros_and_poles(&self) -> Result<ZerosAndPoles>;

    /// Product form used by the factor-sum gradient route and the certifier.
    fn factored_form(&self) -> Option<&FactoredFunction> {
        None
    }

    /// Part of `L` not represented by [`Meromorphic::factored_form`] (for
    /// instance an asymptotic tail of an infinite product).
    fn residual_log_derivative(&self, _s: Complex64) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }
}

pub(crate) fn finite(z: Complex64, what: &'static str) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(crate::error::Error::NonFinite(what))
    }
}
