//! Expected utility on the points scale, the implement/don't-implement rule and
//! the magnitude reading of the score.

use crate::error::{Error, Result};
use crate::inference::{clinical_mbd, BandProbabilities, MbdAssessment};
use crate::magnitudes::{points_table, Band, Direction};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const DEFAULT_F_HARM: f64 = 5.0;
pub const DEFAULT_EU_THRESHOLD: f64 = 1.0;

/// A side effect valued against the main outcome.
///
/// `points` is how much of the main beneficial effect (on the points scale)
/// a subject would give up to avoid (or gain) the side effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideEffect {
    #[serde(default)]
    pub label: String,
    pub probability: f64,
    pub points: f64,
    pub direction: Direction,
    /// Catastrophic outcome: any chance of it rules the intervention out.
    #[serde(default)]
    pub veto: bool,
}

impl SideEffect {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(Error::validation("probability", format!("{} is not in [0, 1]", self.probability)));
        }
        if !(self.points.is_finite() && self.points > 0.0) {
            return Err(Error::validation("points", format!("{} must be positive", self.points)));
        }
        Ok(())
    }

    /// Signed contribution to the expected utility.
    pub fn contribution(&self) -> f64 {
        match self.direction {
            Direction::Beneficial => self.probability * self.points,
            Direction::Harmful => -self.probability * self.points,
        }
    }

    fn vetoes(&self) -> bool {
        self.veto && self.direction == Direction::Harmful
    }
}

/// A cost is a harmful side effect that always happens.
pub fn cost_as_side_effect(points: f64) -> Result<SideEffect> {
    let se = SideEffect {
        label: "cost".into(),
        probability: 1.0,
        points,
        direction: Direction::Harmful,
        veto: false,
    };
    se.validate().map_err(|e| e.in_field("cost_points"))?;
    Ok(se)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Implement,
    DoNotImplement,
    Vetoed,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Implement => "implement",
            Decision::DoNotImplement => "do_not_implement",
            Decision::Vetoed => "vetoed",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityResult {
    pub eu: f64,
    /// Main effect only, before side effects.
    pub eu_main: f64,
    pub eu_side: f64,
    pub decision: Decision,
    pub magnitude_label: String,
    pub evidence_context: String,
    pub f_harm: f64,
    pub eu_threshold: f64,
}

pub fn check_f_harm(f_harm: f64) -> Result<()> {
    if !(f_harm.is_finite() && f_harm >= 1.0) {
        return Err(Error::validation("f_harm", format!("{f_harm} must be at least 1")));
    }
    Ok(())
}

pub fn check_eu_threshold(eu_threshold: f64) -> Result<()> {
    if !(eu_threshold.is_finite() && eu_threshold > 0.0) {
        return Err(Error::validation("eu_threshold", format!("{eu_threshold} must be positive")));
    }
    Ok(())
}

/// Probability-weighted band points.
pub fn main_utility(p: &[f64; Band::COUNT], f_harm: f64) -> f64 {
    p.iter().zip(points_table(f_harm)).map(|(p, pts)| p * pts).sum()
}

pub fn side_utility(side_effects: &[SideEffect]) -> f64 {
    side_effects.iter().map(SideEffect::contribution).sum()
}

pub fn expected_utility(
    bp: &BandProbabilities,
    f_harm: f64,
    side_effects: &[SideEffect],
    eu_threshold: f64,
) -> Result<UtilityResult> {
    check_f_harm(f_harm)?;
    for (i, s) in side_effects.iter().enumerate() {
        s.validate().map_err(|e| e.in_field(&format!("side_effects[{i}]")))?;
    }
    let eu_main = main_utility(&bp.p, f_harm);
    let eu_side = side_utility(side_effects);
    let eu = eu_main + eu_side;
    let vetoed = side_effects.iter().any(SideEffect::vetoes);
    let decision = decide(eu, eu_threshold, vetoed)?;
    let mut out = UtilityResult {
        eu,
        eu_main,
        eu_side,
        decision,
        magnitude_label: interpret_eu(eu),
        evidence_context: String::new(),
        f_harm,
        eu_threshold,
    };
    out.evidence_context = evidence_context(&out, &clinical_mbd(bp));
    Ok(out)
}

pub fn decide(eu: f64, eu_threshold: f64, vetoed: bool) -> Result<Decision> {
    check_eu_threshold(eu_threshold)?;
    Ok(if vetoed {
        Decision::Vetoed
    } else if eu >= eu_threshold {
        Decision::Implement
    } else {
        Decision::DoNotImplement
    })
}

/// Magnitude of the net benefit (or harm) expressed by an EU score.
pub fn interpret_eu(eu: f64) -> String {
    let size = match eu.abs() {
        a if a < 1.0 => return "below smallest important".into(),
        a if a < 3.0 => "small",
        a if a < 5.0 => "moderate",
        a if a < 7.0 => "large",
        a if a < 9.0 => "very large",
        _ => "extremely large",
    };
    let side = if eu > 0.0 { "benefit" } else { "harm" };
    format!("{size} net {side}")
}

fn benefit_is_likely(mbd: &MbdAssessment) -> bool {
    matches!(mbd.descriptor_benefit.as_str(), "likely" | "very likely" | "most likely")
}

fn benefit_is_unlikely(mbd: &MbdAssessment) -> bool {
    mbd.descriptor_benefit.ends_with("unlikely")
}

/// Reading of the EU decision against the clinical magnitude-based decision.
pub fn evidence_context(ur: &UtilityResult, mbd: &MbdAssessment) -> String {
    let marginal = ur.eu < 2.0 * ur.eu_threshold;
    match ur.decision {
        Decision::Vetoed => "vetoed by a catastrophic side effect; do not use whatever the expected utility".into(),
        Decision::Implement if benefit_is_unlikely(mbd) => format!(
            "unlikely beneficial paradox: clinical MBD reads {} beneficial but EU {:.2} exceeds the threshold; \
             harm is improbable enough that the small chance of benefit carries the decision",
            mbd.descriptor_benefit, ur.eu
        ),
        Decision::Implement if benefit_is_likely(mbd) && !mbd.unclear && !marginal => {
            "EU and clinical MBD agree; implement with confidence".into()
        }
        Decision::Implement if marginal => {
            "EU only marginally exceeds the threshold; consider gathering more data".into()
        }
        Decision::Implement if mbd.unclear => {
            "EU supports implementing although conservative clinical MBD is unclear".into()
        }
        Decision::Implement => "EU exceeds the threshold; implement".into(),
        Decision::DoNotImplement if mbd.unclear => {
            "EU is below the threshold and clinical MBD is unclear; gather more data if feasible, otherwise don't implement".into()
        }
        Decision::DoNotImplement if mbd.conservative_decision.ends_with("don't use") => {
            "EU and clinical MBD agree; don't implement with confidence".into()
        }
        Decision::DoNotImplement => "EU is below the threshold; don't implement".into(),
    }
}
