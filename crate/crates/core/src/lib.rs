//! Utility-based magnitude decisions.
//!
//! An effect estimate and its confidence limits are combined with a weak (or
//! user) prior, the posterior is split across twelve magnitude bands, and the
//! band probabilities are weighted by points to give an expected utility. The
//! [`appio`] module runs the whole chain from a JSON config.

pub mod appio;
pub mod dist;
pub mod error;
pub mod heterogeneity;
pub mod inference;
pub mod magnitudes;
pub mod num;
pub mod posterior;
pub mod riskconv;
pub mod scales;
pub mod sensitivity;
pub mod utility;

pub use appio::{analyze_json, parse_config, run_analysis, AnalysisConfig, AnalysisReport};
pub use error::{Error, Result};
