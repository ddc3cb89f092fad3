//! The JSON analysis config: schema, parsing with field-level errors, and validation.

use crate::error::{Error, Result};
use crate::heterogeneity::{HeterogeneityKind, HeterogeneitySpec, McSettings, Method, DEFAULT_UTILITY_THRESHOLD};
use crate::magnitudes::{build_scale, builtin_series, MagnitudeScale, SeriesStyle};
use crate::posterior::{default_weak_prior, PriorSpec};
use crate::riskconv::{odds_ratio_scale, RiskAnchor};
use crate::scales::{check_ci_level, EffectEstimate, EffectKind, DEFAULT_CI_LEVEL};
use crate::utility::{check_eu_threshold, check_f_harm, cost_as_side_effect, SideEffect, DEFAULT_EU_THRESHOLD, DEFAULT_F_HARM};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Upper bound on the size of a config document, in bytes.
pub const MAX_CONFIG_BYTES: usize = 1 << 20;
const MAX_LIST: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub effect: EffectEstimate,
    /// Smallest important beneficial effect on the natural scale. Odds ratios
    /// may give `risk_anchor` instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_small: Option<f64>,
    #[serde(default)]
    pub series: SeriesStyle,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default = "default_f_harm")]
    pub f_harm: f64,
    #[serde(default)]
    pub side_effects: Vec<SideEffect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_points: Option<f64>,
    #[serde(default = "default_eu_threshold")]
    pub eu_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heterogeneity: Option<HeterogeneityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<MetaConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_anchor: Option<RiskAnchor>,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default)]
    pub report_level: ReportLevel,
}

fn default_f_harm() -> f64 {
    DEFAULT_F_HARM
}

fn default_eu_threshold() -> f64 {
    DEFAULT_EU_THRESHOLD
}

fn default_utility_threshold() -> f64 {
    DEFAULT_UTILITY_THRESHOLD
}

fn default_ci_level() -> f64 {
    DEFAULT_CI_LEVEL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportLevel {
    #[default]
    Summary,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorName {
    #[default]
    Weak,
}

/// Prior interval on the natural scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalPrior {
    pub ci_lower: f64,
    pub ci_upper: f64,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
}

/// Prior mean and SD on the analysis scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentPrior {
    pub mean: f64,
    pub sd: f64,
}

/// `"weak"`, `{ci_lower, ci_upper, ci_level}` or `{mean, sd}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorConfig {
    Named(PriorName),
    Interval(IntervalPrior),
    Moments(MomentPrior),
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig::Named(PriorName::Weak)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeterogeneityConfig {
    pub kind: HeterogeneityKind,
    /// SD_IR or tau on the analysis scale (log scale for ratios).
    pub sd: f64,
    #[serde(default = "default_utility_threshold")]
    pub utility_threshold: f64,
    #[serde(default)]
    pub method: Method,
}

impl HeterogeneityConfig {
    pub fn spec(&self) -> HeterogeneitySpec {
        HeterogeneitySpec {
            kind: self.kind,
            sd: self.sd,
            utility_threshold: self.utility_threshold,
        }
    }
}

/// Two-step meta-analytic heterogeneity: settings first, then individuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaConfig {
    /// Between-setting SD on the analysis scale.
    pub tau: f64,
    /// Between-individual SD on the analysis scale.
    pub sd_ir: f64,
    /// Shifts of the setting mean (analysis scale) at which to report individuals.
    #[serde(default = "default_shifts")]
    pub setting_mean_shifts: Vec<f64>,
    #[serde(default = "default_utility_threshold")]
    pub utility_threshold: f64,
}

fn default_shifts() -> Vec<f64> {
    vec![0.0]
}

const HETEROGENEITY_FORMS: [&str; 9] = ["tau2", "tau_squared", "tau_sq", "i2", "i_squared", "isq", "q", "cochran_q", "q_statistic"];

fn reject_wrong_heterogeneity_measures(v: &Value) -> Result<()> {
    for block in ["heterogeneity", "meta"] {
        if let Some(Value::Object(map)) = v.get(block) {
            for key in map.keys() {
                if HETEROGENEITY_FORMS.contains(&key.to_ascii_lowercase().as_str()) {
                    return Err(Error::validation(
                        format!("{block}.{key}"),
                        "between-study heterogeneity must be given as τ, not τ², I², or Q",
                    ));
                }
            }
        }
    }
    Ok(())
}

fn missing_field(msg: &str) -> Option<&str> {
    let rest = msg.split("missing field `").nth(1)?;
    rest.split('`').next()
}

/// Parses a config document; reports the offending field path on failure.
pub fn parse_config(text: &str) -> Result<AnalysisConfig> {
    if text.len() > MAX_CONFIG_BYTES {
        return Err(Error::validation("", format!("config exceeds {MAX_CONFIG_BYTES} bytes")));
    }
    let value: Value = serde_json::from_str(text).map_err(|e| Error::validation("", format!("not valid JSON: {e}")))?;
    config_from_value(value)
}

pub fn config_from_value(value: Value) -> Result<AnalysisConfig> {
    if !value.is_object() {
        return Err(Error::validation("", "config must be a JSON object"));
    }
    reject_wrong_heterogeneity_measures(&value)?;
    let config: AnalysisConfig = deserialize_with_path(value)?;
    config.validate()?;
    Ok(config)
}

/// Deserializes a JSON value, naming the failing field path in the error.
pub(crate) fn deserialize_with_path<T: serde::de::DeserializeOwned>(value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let mut field = if path == "." { String::new() } else { path };
        if let Some(missing) = missing_field(&inner) {
            field = if field.is_empty() { missing.to_string() } else { format!("{field}.{missing}") };
        }
        Error::validation(field, inner)
    })
}

impl AnalysisConfig {
    /// Minimal config with defaults for everything but the effect and threshold.
    pub fn new(effect: EffectEstimate, threshold_small: f64) -> Self {
        AnalysisConfig {
            description: None,
            effect,
            threshold_small: Some(threshold_small),
            series: SeriesStyle::default(),
            prior: PriorConfig::default(),
            f_harm: DEFAULT_F_HARM,
            side_effects: Vec::new(),
            cost_points: None,
            eu_threshold: DEFAULT_EU_THRESHOLD,
            heterogeneity: None,
            meta: None,
            risk_anchor: None,
            mc: McSettings::default(),
            report_level: ReportLevel::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.effect.validate().map_err(|e| e.in_field("effect"))?;
        self.scale()?;
        self.prior_spec()?;
        check_f_harm(self.f_harm)?;
        check_eu_threshold(self.eu_threshold)?;
        if self.side_effects.len() > MAX_LIST {
            return Err(Error::validation("side_effects", format!("at most {MAX_LIST} entries")));
        }
        for (i, s) in self.side_effects.iter().enumerate() {
            s.validate().map_err(|e| e.in_field(&format!("side_effects[{i}]")))?;
        }
        if let Some(c) = self.cost_points {
            cost_as_side_effect(c)?;
        }
        if let Some(h) = &self.heterogeneity {
            h.spec().validate().map_err(|e| e.in_field("heterogeneity"))?;
            if h.method == Method::MonteCarlo {
                self.mc.validate().map_err(|e| e.in_field("mc"))?;
            }
        }
        if let Some(m) = &self.meta {
            for (name, v) in [("tau", m.tau), ("sd_ir", m.sd_ir)] {
                HeterogeneitySpec {
                    kind: HeterogeneityKind::Setting,
                    sd: v,
                    utility_threshold: m.utility_threshold,
                }
                .validate()
                .map_err(|e| match e {
                    Error::Validation { field, message } if field == "sd" => Error::validation(format!("meta.{name}"), message),
                    other => other.in_field("meta"),
                })?;
            }
            if m.setting_mean_shifts.is_empty() || m.setting_mean_shifts.len() > MAX_LIST {
                return Err(Error::validation("meta.setting_mean_shifts", format!("give 1 to {MAX_LIST} shifts")));
            }
            if m.setting_mean_shifts.iter().any(|s| !s.is_finite()) {
                return Err(Error::validation("meta.setting_mean_shifts", "shifts must be finite"));
            }
        }
        Ok(())
    }

    /// Magnitude scale from `threshold_small` or, for odds ratios, the risk anchor.
    pub fn scale(&self) -> Result<MagnitudeScale> {
        let kind = self.effect.kind;
        match (&self.risk_anchor, self.threshold_small) {
            (Some(_), _) if kind != EffectKind::OddsRatio => {
                Err(Error::validation("risk_anchor", "only applies to odds_ratio effects"))
            }
            (Some(_), Some(_)) => Err(Error::validation(
                "threshold_small",
                "give either threshold_small or risk_anchor, not both",
            )),
            (Some(anchor), None) => {
                let mut scale = odds_ratio_scale(anchor).map_err(|e| e.in_field("risk_anchor"))?;
                if self.series != SeriesStyle::Default {
                    scale = build_scale(scale.threshold_small, kind, builtin_series(kind, &self.series)?)
                        .map_err(|e| e.in_field("series"))?;
                }
                Ok(scale)
            }
            (None, Some(t)) => build_scale(t, kind, builtin_series(kind, &self.series).map_err(|e| e.in_field("series"))?),
            (None, None) => Err(Error::validation(
                "threshold_small",
                "missing field `threshold_small` (odds ratios may give risk_anchor instead)",
            )),
        }
    }

    pub fn prior_spec(&self) -> Result<PriorSpec> {
        let kind = self.effect.kind;
        match self.prior {
            PriorConfig::Named(PriorName::Weak) => Ok(default_weak_prior(&self.scale()?)),
            PriorConfig::Interval(p) => {
                check_ci_level(p.ci_level).map_err(|e| e.in_field("prior"))?;
                PriorSpec::informative_from_ci(kind, p.ci_lower, p.ci_upper, p.ci_level).map_err(|e| e.in_field("prior"))
            }
            PriorConfig::Moments(p) => PriorSpec::informative(kind, p.mean, p.sd).map_err(|e| e.in_field("prior")),
        }
    }

    /// Side effects with the cost appended as a certain harmful one.
    pub fn all_side_effects(&self) -> Result<Vec<SideEffect>> {
        let mut out = self.side_effects.clone();
        if let Some(c) = self.cost_points {
            out.push(cost_as_side_effect(c)?);
        }
        Ok(out)
    }

    /// Canonical serialization: fields in declaration order, defaults filled in.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
