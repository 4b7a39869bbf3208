//! Truncated product models of `Gamma` and of the Riemann `xi` function,
//! with bounds on the omitted tail of each gradient component.

mod gamma;
mod xi;

pub use gamma::{
    build_gamma, digamma_real_zeros, gamma_grad, GammaGradient, GammaModel, EULER_GAMMA, MIN_TRUNCATION,
};
pub use xi::{
    build_xi, ingest_zeta_zeros, xi_critical_line_derivative_zeros, CriticalLineReport, GapRoots, XiModel,
    ZetaZeroTable, BUNDLED_ZEROS,
};

use crate::certifier::{ExclusionCertificate, Sign};
use serde::{Deserialize, Serialize};

/// Interval known to contain the contribution of the omitted terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub lower: f64,
    pub upper: f64,
}

impl TailBound {
    pub fn symmetric(b: f64) -> Self {
        Self { lower: -b, upper: b }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn magnitude(&self) -> f64 {
        self.lower.abs().max(self.upper.abs())
    }

    /// How far the tail can push a quantity of sign `sign` toward zero.
    pub fn adverse(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Positive => (-self.lower).max(0.0),
            Sign::Negative => self.upper.max(0.0),
        }
    }
}

/// Tail bounds for both gradient components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientTail {
    pub d_sigma: TailBound,
    pub d_t: TailBound,
}

/// A certificate of a truncated model extends to the full function when
/// its margin exceeds the worst adverse tail.
pub fn covers_tail(cert: &ExclusionCertificate, tail: &TailBound) -> bool {
    cert.margin > tail.adverse(cert.sign)
}
