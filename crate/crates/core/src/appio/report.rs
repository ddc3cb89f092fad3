//! The analysis report and its text rendering.
//!
//! JSON reports are deterministic: struct fields serialize in declaration
//! order and floats use the shortest representation that round-trips.

use super::config::AnalysisConfig;
use crate::heterogeneity::{HeterogeneityResult, TwoStepResult};
use crate::inference::{ComparisonPValues, MbdAssessment};
use crate::riskconv::BackTransform;
use crate::utility::UtilityResult;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub engine_version: String,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub observed: ObservedSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleSummary>,
    pub prior: PriorSummary,
    pub posterior: PosteriorSummary,
    pub bands: Vec<BandRow>,
    pub p_benefit: f64,
    pub p_trivial: f64,
    pub p_harm: f64,
    pub clinical_mbd: MbdAssessment,
    pub p_values: ComparisonPValues,
    pub utility: UtilityResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heterogeneity: Option<HeterogeneityResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<MetaSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub back_transform: Option<BackTransformPanel>,
    pub warnings: Vec<String>,
    pub config: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedSummary {
    pub effect_type: String,
    pub value: f64,
    /// Point estimate on the analysis scale (after any small-sample correction).
    pub mean: f64,
    pub se: f64,
    pub df: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub adjustments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSummary {
    pub threshold_small: f64,
    pub series: String,
    pub multipliers: [f64; 4],
    /// The eleven band boundaries on the natural scale, from extremely large harmful upwards in benefit.
    pub boundaries: [f64; 11],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSummary {
    pub kind: String,
    pub mean: f64,
    pub sd: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    /// Natural scale.
    pub value: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub ci_level: f64,
    /// Analysis scale.
    pub mean: f64,
    pub se: f64,
    pub df: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub band: String,
    pub probability: f64,
    pub points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaSummary {
    pub tau: f64,
    pub sd_ir: f64,
    /// Interval for the true effect in a new setting, natural scale.
    pub prediction_interval: [f64; 2],
    pub steps: Vec<TwoStepResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackTransformPanel {
    pub reference_risk: f64,
    pub estimate: BackTransform,
    pub ci_lower: BackTransform,
    pub ci_upper: BackTransform,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable summary: EU to 2 decimals, proportions in whole percent.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let pct = |p: f64| format!("{:.0}%", 100.0 * p);
        if let Some(d) = &self.description {
            let _ = writeln!(s, "{d}");
        }
        let p = &self.posterior;
        let _ = writeln!(
            s,
            "posterior {} {:.3} ({:.0}% CI {:.3} to {:.3})",
            self.observed.effect_type,
            p.value,
            100.0 * p.ci_level,
            p.ci_lower,
            p.ci_upper
        );
        let _ = writeln!(
            s,
            "chances: beneficial {}, trivial {}, harmful {}",
            pct(self.p_benefit),
            pct(self.p_trivial),
            pct(self.p_harm)
        );
        let u = &self.utility;
        let _ = writeln!(s, "EU {:.2} ({}), f_harm {}, threshold {}", u.eu, u.magnitude_label, u.f_harm, u.eu_threshold);
        let _ = writeln!(s, "decision: {}", u.decision);
        let _ = writeln!(s, "context: {}", u.evidence_context);
        let m = &self.clinical_mbd;
        let _ = writeln!(s, "clinical MBD: {} (odds-ratio rule: {})", m.conservative_decision, m.odds_ratio_decision);
        let _ = writeln!(
            s,
            "p-values: nil {:.3}, inferiority {:.3}, non-superiority {:.3}",
            self.p_values.p_nil, self.p_values.p_inferiority, self.p_values.p_nonsuperiority
        );
        let props = |s: &mut String, label: &str, h: &HeterogeneityResult| {
            let _ = writeln!(
                s,
                "{label}: net benefit {}, negligible {}, net harm {} (SD of utilities {:.2})",
                pct(h.p_net_benefit),
                pct(h.p_negligible),
                pct(h.p_net_harm),
                h.sd_utilities
            );
        };
        if let Some(h) = &self.heterogeneity {
            props(&mut s, &format!("{:?} SD {}", h.kind, h.sd).to_lowercase(), h);
        }
        if let Some(meta) = &self.meta {
            if let Some(first) = meta.steps.first() {
                props(&mut s, &format!("settings (tau {})", meta.tau), &first.setting);
            }
            for step in &meta.steps {
                props(&mut s, &format!("individuals (SD {}, setting shift {})", meta.sd_ir, step.setting_mean_shift), &step.individual);
            }
        }
        if let Some(bt) = &self.back_transform {
            let _ = writeln!(
                s,
                "at reference risk {}: risk difference {:.3} ({:.3} to {:.3}), extra wins per 10 {:.2}",
                bt.reference_risk,
                bt.estimate.risk_difference,
                bt.ci_lower.risk_difference,
                bt.ci_upper.risk_difference,
                bt.estimate.extra_wins_per_10
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "config {} engine {}", &self.config_hash[..12], self.engine_version);
        s
    }
}
