//! Odds ratios against risks: anchoring an odds-ratio threshold on a reference
//! risk, and reading a posterior odds ratio back as risk ratio, risk
//! difference, a 0-100 scale shift or extra wins in ten.

use crate::error::{Error, Result};
use crate::magnitudes::{build_scale, odds_ratio_series, MagnitudeScale};
use crate::scales::EffectKind;
use serde::{Deserialize, Serialize};

/// Below this reference risk, odds-ratio thresholds follow the relative (hazard-ratio) scale.
pub const RARE_EVENT_RISK: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorKind {
    RiskRatio,
    RiskDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskAnchor {
    pub reference_risk: f64,
    pub anchor_kind: AnchorKind,
    /// Smallest important effect on the anchor scale.
    pub anchor_value: f64,
}

fn odds(p: f64) -> f64 {
    p / (1.0 - p)
}

fn check_risk(field: &str, r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(field, format!("risk {r} is outside (0, 1)")))
    }
}

impl RiskAnchor {
    /// Risk in the exposed group implied by the anchor.
    pub fn exposed_risk(&self) -> Result<f64> {
        check_risk("reference_risk", self.reference_risk)?;
        if !self.anchor_value.is_finite() {
            return Err(Error::validation("anchor_value", "must be finite"));
        }
        let r1 = match self.anchor_kind {
            AnchorKind::RiskRatio => self.reference_risk * self.anchor_value,
            AnchorKind::RiskDifference => self.reference_risk + self.anchor_value,
        };
        check_risk("anchor_value", r1)?;
        Ok(r1)
    }

    pub fn validate(&self) -> Result<()> {
        self.exposed_risk().map(|_| ())
    }
}

pub fn or_from_anchor(a: &RiskAnchor) -> Result<f64> {
    let r1 = a.exposed_risk()?;
    Ok(odds(r1) / odds(a.reference_risk))
}

/// Odds-ratio magnitude scale whose smallest threshold is set by the anchor.
pub fn odds_ratio_scale(a: &RiskAnchor) -> Result<MagnitudeScale> {
    let or = or_from_anchor(a)?;
    build_scale(or, EffectKind::OddsRatio, odds_ratio_series(a.anchor_kind == AnchorKind::RiskRatio))
}

/// Odds ratio between the risks `0.5 + d/2` and `0.5 - d/2`.
pub fn centered_difference_or(d: f64) -> Result<f64> {
    if !(d > -1.0 && d < 1.0) {
        return Err(Error::domain("difference", format!("{d} is outside (-1, 1)")));
    }
    Ok(odds(0.5 + 0.5 * d) / odds(0.5 - 0.5 * d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackTransform {
    pub odds_ratio: f64,
    pub reference_risk: f64,
    pub risk: f64,
    pub risk_ratio: f64,
    pub risk_difference: f64,
    /// Risk difference on a 0-100 visual-analogue or rescaled Likert scale.
    pub vas_shift_0_100: f64,
    pub extra_wins_per_10: f64,
}

pub fn back_transform_or(or: f64, reference_risk: f64) -> Result<BackTransform> {
    if !(or.is_finite() && or > 0.0) {
        return Err(Error::domain("odds_ratio", format!("{or} must be positive and finite")));
    }
    check_risk("reference_risk", reference_risk)?;
    let o1 = or * odds(reference_risk);
    let r1 = o1 / (1.0 + o1);
    let rd = r1 - reference_risk;
    Ok(BackTransform {
        odds_ratio: or,
        reference_risk,
        risk: r1,
        risk_ratio: r1 / reference_risk,
        risk_difference: rd,
        vas_shift_0_100: 100.0 * rd,
        extra_wins_per_10: 10.0 * rd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Rare events: thresholds as for hazard ratios.
    Relative,
    /// Common events: anchor on a risk difference.
    AbsoluteDifference,
}

impl ThresholdMode {
    pub fn recommendation(self) -> &'static str {
        match self {
            ThresholdMode::Relative => {
                "event rate below 10%: define the odds-ratio thresholds on the relative scale, as for hazard ratios"
            }
            ThresholdMode::AbsoluteDifference => {
                "event rate of 10% or more: anchor the odds-ratio thresholds on risk differences"
            }
        }
    }
}

pub fn or_threshold_mode(reference_risk: f64) -> Result<ThresholdMode> {
    check_risk("reference_risk", reference_risk)?;
    Ok(if reference_risk < RARE_EVENT_RISK {
        ThresholdMode::Relative
    } else {
        ThresholdMode::AbsoluteDifference
    })
}
