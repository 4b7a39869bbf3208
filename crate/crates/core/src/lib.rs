//! Locate and certify zeros of `W'` for meromorphic `W` through the
//! gradient of `arg W`.
//!
//! Away from zeros and poles of `W`, both partial derivatives of
//! `phi = arg W(sigma + i t)` vanish exactly where `W'` does, and a
//! rectangle on which one partial keeps a strict sign contains no zero of
//! `W'`. The crate turns those two facts into a root locator
//! ([`locator::locate`]) and an exclusion certifier
//! ([`certifier::certify_termwise`], [`certifier::certify_interval`]), and
//! applies them to truncated product models of `Gamma` and of the Riemann
//! `xi` function ([`special`]).

pub mod argfield;
pub mod bench;
pub mod certifier;
pub mod cli;
pub mod complex;
pub mod error;
pub mod locator;
pub mod model;
pub mod poly;
pub mod special;

pub use argfield::{argument_value, ArgField, ArgGradient, GradientRoute};
pub use complex::{ComplexPoint, NumericPolicy, Rectangle};
pub use error::{Error, Result};
pub use model::{Factor, FactorBase, FactoredFunction, Meromorphic, RationalFunction, ZerosAndPoles};
pub use num_complex::Complex64;
