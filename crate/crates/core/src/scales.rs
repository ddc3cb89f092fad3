//! Effect types, their analysis scales, and standard errors from confidence limits.

use crate::dist::Shape;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Kind of effect statistic supplied by the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectKind {
    RawMean,
    StandardizedMean,
    FactorMean,
    HazardRatio,
    CountRatio,
    OddsRatio,
    /// Athlete performance expressed as a factor (e.g. 1.021 for +2.1%).
    PerformanceMean,
    Correlation,
}

impl EffectKind {
    pub const ALL: [EffectKind; 8] = [
        EffectKind::RawMean,
        EffectKind::StandardizedMean,
        EffectKind::FactorMean,
        EffectKind::HazardRatio,
        EffectKind::CountRatio,
        EffectKind::OddsRatio,
        EffectKind::PerformanceMean,
        EffectKind::Correlation,
    ];

    pub fn transform(self) -> Transform {
        match self {
            EffectKind::RawMean | EffectKind::StandardizedMean => Transform::Identity,
            EffectKind::FactorMean
            | EffectKind::HazardRatio
            | EffectKind::CountRatio
            | EffectKind::PerformanceMean => Transform::Log,
            EffectKind::OddsRatio => Transform::LogOdds,
            EffectKind::Correlation => Transform::FisherZ,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EffectKind::RawMean => "raw_mean",
            EffectKind::StandardizedMean => "standardized_mean",
            EffectKind::FactorMean => "factor_mean",
            EffectKind::HazardRatio => "hazard_ratio",
            EffectKind::CountRatio => "count_ratio",
            EffectKind::OddsRatio => "odds_ratio",
            EffectKind::PerformanceMean => "performance_mean",
            EffectKind::Correlation => "correlation",
        }
    }

    /// Value representing no effect, on the natural scale.
    pub fn null_value(self) -> f64 {
        match self.transform() {
            Transform::Identity | Transform::FisherZ => 0.0,
            Transform::Log | Transform::LogOdds => 1.0,
        }
    }
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EffectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EffectKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = EffectKind::ALL.iter().map(|k| k.as_str()).collect();
                Error::validation("type", format!("unknown effect type {s:?}; expected one of {}", known.join(", ")))
            })
    }
}

/// Scale on which an effect's sampling distribution is approximately normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Log,
    /// Log of the odds ratio; numerically the same map as `Log`.
    LogOdds,
    FisherZ,
}

impl Transform {
    pub fn check_domain(self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::domain("", format!("value {x} is not finite")));
        }
        match self {
            Transform::Identity => Ok(()),
            Transform::Log | Transform::LogOdds if x <= 0.0 => {
                Err(Error::domain("", format!("ratio {x} must be strictly positive")))
            }
            Transform::FisherZ if x.abs() >= 1.0 => {
                Err(Error::domain("", format!("correlation {x} must lie strictly between -1 and 1")))
            }
            _ => Ok(()),
        }
    }

    /// Maps a natural-scale value onto the analysis scale.
    pub fn forward(self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match self {
            Transform::Identity => x,
            Transform::Log | Transform::LogOdds => x.ln(),
            Transform::FisherZ => x.atanh(),
        })
    }

    pub fn inverse(self, y: f64) -> f64 {
        match self {
            Transform::Identity => y,
            Transform::Log | Transform::LogOdds => y.exp(),
            Transform::FisherZ => y.tanh(),
        }
    }
}

pub fn to_transformed(kind: EffectKind, x: f64) -> Result<f64> {
    kind.transform().forward(x)
}

pub fn from_transformed(kind: EffectKind, y: f64) -> f64 {
    kind.transform().inverse(y)
}

pub const DEFAULT_CI_LEVEL: f64 = 0.90;

fn default_ci_level() -> f64 {
    DEFAULT_CI_LEVEL
}

pub fn check_ci_level(level: f64) -> Result<()> {
    if level.is_finite() && level > 0.5 && level <= 0.999 {
        Ok(())
    } else {
        Err(Error::validation("ci_level", format!("{level} must lie in (0.5, 0.999]")))
    }
}

/// An observed effect with its uncertainty, as reported by a study or meta-analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectEstimate {
    #[serde(rename = "type")]
    pub kind: EffectKind,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_upper: Option<f64>,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    /// Sampling degrees of freedom; absent means infinite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df: Option<u32>,
    /// Degrees of freedom of the standardizing SD (standardized means only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df_sd: Option<u32>,
    /// Sample size, as an alternative to confidence limits for correlations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
}

/// An estimate expressed on its analysis scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedEstimate {
    pub mean: f64,
    pub se: f64,
    pub df: Option<u32>,
    /// Adjustments applied on the way in (e.g. small-sample corrections).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub adjustments: Vec<String>,
}

impl TransformedEstimate {
    pub fn shape(&self) -> Shape {
        Shape::from_df(self.df)
    }
}

impl EffectEstimate {
    /// Estimate with a confidence interval at the default 90% level.
    pub fn with_ci(kind: EffectKind, value: f64, lower: f64, upper: f64) -> Self {
        EffectEstimate {
            kind,
            value,
            ci_lower: Some(lower),
            ci_upper: Some(upper),
            ci_level: DEFAULT_CI_LEVEL,
            df: None,
            df_sd: None,
            n: None,
        }
    }

    pub fn correlation_with_n(value: f64, n: u32) -> Self {
        EffectEstimate {
            kind: EffectKind::Correlation,
            value,
            ci_lower: None,
            ci_upper: None,
            ci_level: DEFAULT_CI_LEVEL,
            df: None,
            df_sd: None,
            n: Some(n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.kind.transform();
        t.check_domain(self.value).map_err(|e| e.in_field("value"))?;
        check_ci_level(self.ci_level)?;
        if let Some(df) = self.df {
            if df < 3 {
                return Err(Error::validation("df", format!("{df} must be at least 3 (or omitted for infinite)")));
            }
        }
        if let Some(df_sd) = self.df_sd {
            if self.kind != EffectKind::StandardizedMean {
                return Err(Error::validation("df_sd", "only applies to standardized_mean effects"));
            }
            if df_sd < 3 {
                return Err(Error::validation("df_sd", format!("{df_sd} must be at least 3")));
            }
        }
        match (self.ci_lower, self.ci_upper, self.n) {
            (Some(lo), Some(hi), None) => {
                t.check_domain(lo).map_err(|e| e.in_field("ci_lower"))?;
                t.check_domain(hi).map_err(|e| e.in_field("ci_upper"))?;
                let (tlo, tv, thi) = (t.forward(lo)?, t.forward(self.value)?, t.forward(hi)?);
                if !(tlo < tv && tv < thi) {
                    return Err(Error::validation(
                        "ci_lower",
                        format!("confidence limits ({lo}, {hi}) must bracket the estimate {}", self.value),
                    ));
                }
                Ok(())
            }
            (None, None, Some(n)) => {
                if self.kind != EffectKind::Correlation {
                    return Err(Error::validation("n", "sample size is only an uncertainty source for correlations"));
                }
                if n < 4 {
                    return Err(Error::validation("n", format!("{n} must be at least 4")));
                }
                Ok(())
            }
            (Some(_), None, _) | (None, Some(_), _) => {
                Err(Error::validation("ci_upper", "confidence limits must be given as a pair"))
            }
            (Some(_), Some(_), Some(_)) => Err(Error::validation(
                "n",
                "give either confidence limits or a sample size, not both",
            )),
            (None, None, None) => Err(Error::validation(
                "ci_lower",
                "missing uncertainty: supply confidence limits (or n for a correlation)",
            )),
        }
    }

    pub fn shape(&self) -> Shape {
        Shape::from_df(self.df)
    }

    /// Point estimate on the analysis scale, with the small-sample shrinkage
    /// `1 - 3/(4 df_sd - 1)` applied to standardized means when `df_sd` is given.
    pub fn transformed_mean(&self) -> Result<f64> {
        let mut m = to_transformed(self.kind, self.value).map_err(|e| e.in_field("value"))?;
        if let Some(df_sd) = self.df_sd {
            m *= hedges_factor(df_sd);
        }
        Ok(m)
    }

    /// Standard error on the analysis scale.
    pub fn standard_error(&self) -> Result<f64> {
        se_from_estimate(self)
    }

    /// Validates and converts to the analysis scale.
    pub fn to_analysis_scale(&self) -> Result<TransformedEstimate> {
        self.validate()?;
        let mut adjustments = Vec::new();
        if let Some(df_sd) = self.df_sd {
            adjustments.push(format!(
                "standardized estimate multiplied by {:.6} and SE by {:.6} for df_sd = {df_sd}",
                hedges_factor(df_sd),
                sd_uncertainty_factor(df_sd)
            ));
        }
        Ok(TransformedEstimate {
            mean: self.transformed_mean()?,
            se: se_from_estimate(self)?,
            df: self.df,
            adjustments,
        })
    }
}

/// Small-sample bias factor for a mean standardized by an estimated SD.
pub fn hedges_factor(df_sd: u32) -> f64 {
    1.0 - 3.0 / (4.0 * f64::from(df_sd) - 1.0)
}

/// Inflation of the SE for the uncertainty in an estimated standardizing SD.
pub fn sd_uncertainty_factor(df_sd: u32) -> f64 {
    let v = f64::from(df_sd);
    (v / (v - 2.0)).sqrt()
}

/// Standard error on the transformed scale from confidence limits (or `n` for a correlation).
pub fn se_from_estimate(e: &EffectEstimate) -> Result<f64> {
    let t = e.kind.transform();
    let se = match (e.ci_lower, e.ci_upper, e.n) {
        (Some(lo), Some(hi), None) => {
            check_ci_level(e.ci_level)?;
            let q = e.shape().two_sided(e.ci_level);
            let width = t.forward(hi).map_err(|x| x.in_field("ci_upper"))?
                - t.forward(lo).map_err(|x| x.in_field("ci_lower"))?;
            width / (2.0 * q)
        }
        (None, None, Some(n)) if e.kind == EffectKind::Correlation && n > 3 => 1.0 / f64::from(n - 3).sqrt(),
        _ => {
            return Err(Error::validation(
                "ci_lower",
                "missing uncertainty: supply confidence limits (or n for a correlation)",
            ))
        }
    };
    let se = match e.df_sd {
        Some(df_sd) if e.kind == EffectKind::StandardizedMean => se * sd_uncertainty_factor(df_sd),
        _ => se,
    };
    if !(se.is_finite() && se > 0.0) {
        return Err(Error::validation("ci_upper", format!("standard error {se} is not positive")));
    }
    Ok(se)
}
