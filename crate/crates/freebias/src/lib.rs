//! Numerical free probability on the upper half plane.
//!
//! The building blocks are probability measures on the real line
//! ([`measure::ProbabilityMeasure`]), their Cauchy transforms as honest
//! functions C+ -> C- ([`holomorphic::AnalyticTransform`]), a family of bias
//! transforms acting on measures and transforms ([`transforms`]), Stieltjes
//! inversion back to densities ([`inversion`]), additive free convolution via
//! subordination ([`freeconv`]), and the free Levy-Khintchine machinery for
//! free infinite divisibility ([`infdiv`]).

pub mod cli;
pub mod config;
pub mod error;
pub mod freeconv;
pub mod holomorphic;
pub mod infdiv;
pub mod inversion;
pub mod measure;
pub mod transforms;

/// The scalar used throughout the numeric core.
pub type Real = f64;
/// Complex double, the currency of every transform evaluation.
pub type C64 = num_complex::Complex<f64>;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use holomorphic::AnalyticTransform;
pub use measure::ProbabilityMeasure;
