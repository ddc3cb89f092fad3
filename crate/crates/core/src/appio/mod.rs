//! Config ingestion, the end-to-end pipeline and report emission.

pub mod config;
pub mod defaults;
pub mod pipeline;
pub mod report;

pub use defaults::{defaults_for, Defaults};
pub use config::{parse_config, AnalysisConfig, HeterogeneityConfig, MetaConfig, PriorConfig, ReportLevel};
pub use pipeline::{analyze_json, run_analysis};
pub use report::{AnalysisReport, ENGINE_VERSION};
