//! One-dimensional sweeps over the subjective inputs and the bias-shifted
//! estimate, plus the two-dimensional bias by SD grid.

use crate::appio::config::{config_from_value, deserialize_with_path, AnalysisConfig, MAX_CONFIG_BYTES};
use crate::appio::pipeline::run_analysis;
use crate::error::{Error, Result};
use crate::utility::Decision;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub const MAX_SWEEP_VALUES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepDimension {
    FHarm,
    SdHeterogeneity,
    SideEffectPoints,
    CostPoints,
    EuThreshold,
    /// Replacement point estimates on the natural scale.
    BiasShift,
}

impl SweepDimension {
    pub const ALL: [SweepDimension; 6] = [
        SweepDimension::FHarm,
        SweepDimension::SdHeterogeneity,
        SweepDimension::SideEffectPoints,
        SweepDimension::CostPoints,
        SweepDimension::EuThreshold,
        SweepDimension::BiasShift,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepDimension::FHarm => "f_harm",
            SweepDimension::SdHeterogeneity => "sd_heterogeneity",
            SweepDimension::SideEffectPoints => "side_effect_points",
            SweepDimension::CostPoints => "cost_points",
            SweepDimension::EuThreshold => "eu_threshold",
            SweepDimension::BiasShift => "bias_shift",
        }
    }
}

impl fmt::Display for SweepDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepDimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|d| d.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|d| d.as_str()).collect();
            Error::validation("dimension", format!("unknown dimension {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub config: AnalysisConfig,
    pub dimension: SweepDimension,
    pub values: Vec<f64>,
    /// Which side effect a `side_effect_points` sweep varies.
    #[serde(default)]
    pub side_effect_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub eu: f64,
    pub decision: Decision,
    pub p_net_harm: Option<f64>,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub dimension: SweepDimension,
    pub base_config_hash: String,
    pub rows: Vec<SweepRow>,
    pub robust: bool,
    /// Consecutive values between which the decision changes.
    pub flips: Vec<[f64; 2]>,
    /// Analysis-scale half-width of the confidence interval kept fixed by a bias sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_half_width: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpecRest {
    dimension: SweepDimension,
    values: Vec<f64>,
    #[serde(default)]
    side_effect_index: usize,
}

/// Parses a sweep request; the embedded config gets the same checks as [`crate::parse_config`].
pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec> {
    if text.len() > MAX_CONFIG_BYTES {
        return Err(Error::validation("", format!("sweep spec exceeds {MAX_CONFIG_BYTES} bytes")));
    }
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::validation("", format!("not valid JSON: {e}")))?;
    let Some(map) = value.as_object_mut() else {
        return Err(Error::validation("", "sweep spec must be a JSON object"));
    };
    let config = map.remove("config").ok_or_else(|| Error::validation("config", "missing field `config`"))?;
    let config = config_from_value(config).map_err(|e| e.in_field("config"))?;
    let rest: SweepSpecRest = deserialize_with_path(value)?;
    Ok(SweepSpec {
        config,
        dimension: rest.dimension,
        values: rest.values,
        side_effect_index: rest.side_effect_index,
    })
}

/// Copy of `config` with exactly one input replaced.
pub fn apply_dimension(config: &AnalysisConfig, dimension: SweepDimension, index: usize, value: f64) -> Result<AnalysisConfig> {
    if !value.is_finite() {
        return Err(Error::validation("values", format!("{value} is not finite")));
    }
    let mut c = config.clone();
    match dimension {
        SweepDimension::FHarm => c.f_harm = value,
        SweepDimension::EuThreshold => c.eu_threshold = value,
        SweepDimension::CostPoints => c.cost_points = (value != 0.0).then_some(value),
        SweepDimension::SdHeterogeneity => match c.heterogeneity.as_mut() {
            Some(h) => h.sd = value,
            None => return Err(Error::validation("dimension", "an sd_heterogeneity sweep needs a heterogeneity block")),
        },
        SweepDimension::SideEffectPoints => match c.side_effects.get_mut(index) {
            Some(s) => s.points = value,
            None => {
                return Err(Error::validation(
                    "side_effect_index",
                    format!("no side effect at index {index} ({} defined)", config.side_effects.len()),
                ))
            }
        },
        SweepDimension::BiasShift => c.effect = shift_estimate(config, value)?,
    }
    Ok(c)
}

/// Replaces the point estimate, moving both limits so that their distances from
/// the estimate on the analysis scale stay the same.
fn shift_estimate(config: &AnalysisConfig, value: f64) -> Result<crate::scales::EffectEstimate> {
    let mut e = config.effect.clone();
    if value == e.value {
        return Ok(e);
    }
    let t = e.kind.transform();
    let new = t.forward(value).map_err(|err| err.in_field("values"))?;
    let old = t.forward(e.value)?;
    if let (Some(lo), Some(hi)) = (e.ci_lower, e.ci_upper) {
        let (tlo, thi) = (t.forward(lo)?, t.forward(hi)?);
        e.ci_lower = Some(t.inverse(new - (old - tlo)));
        e.ci_upper = Some(t.inverse(new + (thi - old)));
    }
    e.value = value;
    Ok(e)
}

fn half_width(config: &AnalysisConfig) -> Option<f64> {
    let e = &config.effect;
    let t = e.kind.transform();
    match (e.ci_lower, e.ci_upper) {
        (Some(lo), Some(hi)) => Some(0.5 * (t.forward(hi).ok()? - t.forward(lo).ok()?)),
        _ => None,
    }
}

pub fn sweep(spec: &SweepSpec) -> Result<SweepReport> {
    if spec.values.is_empty() || spec.values.len() > MAX_SWEEP_VALUES {
        return Err(Error::validation("values", format!("give 1 to {MAX_SWEEP_VALUES} values")));
    }
    spec.config.validate().map_err(|e| e.in_field("config"))?;
    let configs = spec
        .values
        .iter()
        .map(|&v| apply_dimension(&spec.config, spec.dimension, spec.side_effect_index, v))
        .collect::<Result<Vec<_>>>()?;
    let rows = configs
        .par_iter()
        .zip(&spec.values)
        .map(|(c, &value)| {
            let r = run_analysis(c)?;
            Ok(SweepRow {
                value,
                eu: r.utility.eu,
                decision: r.utility.decision,
                p_net_harm: r.heterogeneity.map(|h| h.p_net_harm),
                config_hash: r.config_hash,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let flips = flips(&rows);
    Ok(SweepReport {
        dimension: spec.dimension,
        base_config_hash: spec.config.hash(),
        robust: flips.is_empty(),
        flips,
        rows,
        ci_half_width: (spec.dimension == SweepDimension::BiasShift).then(|| half_width(&spec.config)).flatten(),
    })
}

/// Sweep over replacement point estimates.
pub fn bias_sweep(base: &AnalysisConfig, shifted_estimates: &[f64]) -> Result<SweepReport> {
    sweep(&SweepSpec {
        config: base.clone(),
        dimension: SweepDimension::BiasShift,
        values: shifted_estimates.to_vec(),
        side_effect_index: 0,
    })
}

pub fn flips(rows: &[SweepRow]) -> Vec<[f64; 2]> {
    rows.windows(2)
        .filter(|w| w[0].decision != w[1].decision)
        .map(|w| [w[0].value, w[1].value])
        .collect()
}

/// Built-in grid for a dimension, given the base config.
pub fn default_grid(config: &AnalysisConfig, dimension: SweepDimension) -> Result<Vec<f64>> {
    let t_small = config.scale()?.t_small.abs();
    Ok(match dimension {
        SweepDimension::FHarm => vec![3.0, 5.0, 7.0, 9.0],
        SweepDimension::EuThreshold => vec![0.5, 1.0, 1.5],
        // Small, moderate and large SDs sit at half the matching thresholds.
        SweepDimension::SdHeterogeneity => [0.5, 1.5, 2.5].iter().map(|k| k * t_small).collect(),
        SweepDimension::SideEffectPoints | SweepDimension::CostPoints => vec![0.5, 1.0, 2.0],
        SweepDimension::BiasShift => {
            let t = config.effect.kind.transform();
            let m = t.forward(config.effect.value)?;
            [-1.0, 0.0, 1.0].iter().map(|k| t.inverse(m + k * t_small)).collect()
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleWhammyRow {
    pub estimate: f64,
    pub sd: f64,
    pub eu: f64,
    pub decision: Decision,
    pub p_net_harm: f64,
}

/// Bias-shifted estimates crossed with heterogeneity SDs.
pub fn double_whammy(base: &AnalysisConfig, estimates: &[f64], sds: &[f64]) -> Result<Vec<DoubleWhammyRow>> {
    if base.heterogeneity.is_none() {
        return Err(Error::validation("heterogeneity", "the bias by SD grid needs a heterogeneity block"));
    }
    if estimates.len() * sds.len() > MAX_SWEEP_VALUES || estimates.is_empty() || sds.is_empty() {
        return Err(Error::validation("values", format!("give 1 to {MAX_SWEEP_VALUES} grid points")));
    }
    let cells: Vec<(f64, f64)> = estimates.iter().flat_map(|&e| sds.iter().map(move |&s| (e, s))).collect();
    cells
        .par_iter()
        .map(|&(estimate, sd)| {
            let c = apply_dimension(base, SweepDimension::BiasShift, 0, estimate)?;
            let c = apply_dimension(&c, SweepDimension::SdHeterogeneity, 0, sd)?;
            let r = run_analysis(&c)?;
            Ok(DoubleWhammyRow {
                estimate,
                sd,
                eu: r.utility.eu,
                decision: r.utility.decision,
                p_net_harm: r.heterogeneity.map_or(0.0, |h| h.p_net_harm),
            })
        })
        .collect()
}

/// CSV with header `dimension,value,eu,decision,p_net_harm`; absent proportions are empty.
pub fn to_csv(report: &SweepReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Computation(format!("csv: {e}"));
    w.write_record(["dimension", "value", "eu", "decision", "p_net_harm"]).map_err(io)?;
    for r in &report.rows {
        w.write_record([
            report.dimension.as_str().to_string(),
            r.value.to_string(),
            r.eu.to_string(),
            r.decision.as_str().to_string(),
            r.p_net_harm.map(|p| p.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Computation(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Computation(e.to_string()))
}
