//! Inverse-variance combination of an observed effect with a prior, and the
//! resulting credible and prediction intervals.

use crate::dist::{LocationScale, Shape};
use crate::error::{Error, Result};
use crate::magnitudes::MagnitudeScale;
use crate::scales::{check_ci_level, EffectEstimate, EffectKind, TransformedEstimate};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    WeaklyInformative,
    Informative,
}

/// Gaussian prior on the analysis scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub kind: PriorKind,
    pub effect: EffectKind,
    pub mean: f64,
    pub sd: f64,
}

impl PriorSpec {
    pub fn informative(effect: EffectKind, mean: f64, sd: f64) -> Result<Self> {
        let p = PriorSpec {
            kind: PriorKind::Informative,
            effect,
            mean,
            sd,
        };
        p.validate()?;
        Ok(p)
    }

    /// Prior from a natural-scale interval, converted like an observed effect.
    pub fn informative_from_ci(effect: EffectKind, lower: f64, upper: f64, level: f64) -> Result<Self> {
        check_ci_level(level)?;
        let t = effect.transform();
        let lo = t.forward(lower).map_err(|e| e.in_field("ci_lower"))?;
        let hi = t.forward(upper).map_err(|e| e.in_field("ci_upper"))?;
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::validation("ci_lower", "prior limits must satisfy lower < upper"));
        }
        let q = Shape::GAUSSIAN.two_sided(level);
        Self::informative(effect, 0.5 * (lo + hi), (hi - lo) / (2.0 * q))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::validation("mean", "prior mean must be finite"));
        }
        if !(self.sd.is_finite() && self.sd > 0.0) {
            return Err(Error::validation("sd", format!("prior sd {} must be positive", self.sd)));
        }
        Ok(())
    }

    /// Natural-scale central interval of the prior.
    pub fn interval(&self, level: f64) -> (f64, f64) {
        let q = Shape::GAUSSIAN.two_sided(level);
        let t = self.effect.transform();
        (t.inverse(self.mean - q * self.sd), t.inverse(self.mean + q * self.sd))
    }
}

/// Null-centred prior whose 90% interval reaches the extremely-large thresholds.
pub fn default_weak_prior(scale: &MagnitudeScale) -> PriorSpec {
    let q90 = Shape::GAUSSIAN.two_sided(0.90);
    PriorSpec {
        kind: PriorKind::WeaklyInformative,
        effect: scale.kind,
        mean: 0.0,
        sd: scale.extremely_large_threshold() / q90,
    }
}

/// Updated belief about the effect on the analysis scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub mean: f64,
    pub se: f64,
    /// Carried from the observed effect; absent means Gaussian.
    pub df: Option<u32>,
}

impl Posterior {
    pub fn shape(&self) -> Shape {
        Shape::from_df(self.df)
    }

    pub fn distribution(&self) -> LocationScale {
        LocationScale::new(self.mean, self.se, self.shape())
    }

    pub fn with_mean(self, mean: f64) -> Self {
        Posterior { mean, ..self }
    }

    pub fn precision(&self) -> f64 {
        1.0 / (self.se * self.se)
    }
}

pub fn update(observed: &EffectEstimate, prior: &PriorSpec) -> Result<Posterior> {
    if observed.kind != prior.effect {
        return Err(Error::validation(
            "prior",
            format!("prior is for {} but the observed effect is {}", prior.effect, observed.kind),
        ));
    }
    update_transformed(&observed.to_analysis_scale()?, prior)
}

/// Precision-weighted combination on the analysis scale.
pub fn update_transformed(observed: &TransformedEstimate, prior: &PriorSpec) -> Result<Posterior> {
    prior.validate().map_err(|e| e.in_field("prior"))?;
    let w_obs = 1.0 / (observed.se * observed.se);
    let w_prior = 1.0 / (prior.sd * prior.sd);
    let w = w_obs + w_prior;
    if !(w.is_finite() && w > 0.0 && w_obs.is_finite()) {
        return Err(Error::Computation(format!(
            "degenerate precisions (observed se {}, prior sd {})",
            observed.se, prior.sd
        )));
    }
    let mean = (observed.mean * w_obs + prior.mean * w_prior) / w;
    let se = w.sqrt().recip();
    Ok(Posterior {
        mean,
        se,
        df: observed.df,
    })
}

/// Central credible interval, back on the natural scale.
pub fn credible_interval(post: &Posterior, kind: EffectKind, level: f64) -> Result<(f64, f64)> {
    prediction_interval(post, kind, 0.0, level)
}

/// Interval for the true effect in a new setting (or individual) with extra spread `extra_sd`.
pub fn prediction_interval(post: &Posterior, kind: EffectKind, extra_sd: f64, level: f64) -> Result<(f64, f64)> {
    check_ci_level(level)?;
    if !(extra_sd >= 0.0 && extra_sd.is_finite()) {
        return Err(Error::validation("extra_sd", format!("{extra_sd} must be non-negative")));
    }
    let q = post.shape().two_sided(level);
    let spread = post.se.hypot(extra_sd);
    let t = kind.transform();
    Ok((t.inverse(post.mean - q * spread), t.inverse(post.mean + q * spread)))
}
