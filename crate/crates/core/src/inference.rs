//! Band probabilities, clinical magnitude-based decisions and the comparison p-values.
//!
//! Probability descriptors:
//!
//! | probability      | descriptor      |
//! |------------------|-----------------|
//! | < 0.005          | most unlikely   |
//! | 0.005 – 0.05     | very unlikely   |
//! | 0.05 – 0.25      | unlikely        |
//! | 0.25 – 0.75      | possibly        |
//! | 0.75 – 0.95      | likely          |
//! | 0.95 – 0.995     | very likely     |
//! | ≥ 0.995          | most likely     |
//!
//! Clinical decisions (`pb`, `ph` are the chances of benefit and harm):
//!
//! | condition                         | conservative decision                 |
//! |-----------------------------------|---------------------------------------|
//! | pb > 0.25 and ph > 0.005          | `unclear; get more data`              |
//! | ph ≤ 0.005, pb ≥ 0.95             | `<desc(pb)> beneficial; use it`       |
//! | ph ≤ 0.005, 0.25 < pb < 0.95      | `<desc(pb)> beneficial; consider using it` |
//! | ph ≤ 0.005, pb ≤ 0.25             | `<desc(pb)> beneficial; don't use`    |
//! | pb ≤ 0.25, ph > 0.005             | `<desc(ph)> harmful; don't use`       |
//!
//! The odds-ratio decision is the same, except that an unclear effect with a
//! benefit/harm odds ratio above 66 becomes `<desc(pb)> beneficial; consider using it`.

use crate::dist::LocationScale;
use crate::magnitudes::{Band, MagnitudeScale};
use crate::posterior::Posterior;
use crate::scales::TransformedEstimate;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Benefit/harm odds ratio above which an unclear effect is still worth using.
pub const USE_IT_ODDS_RATIO: f64 = 66.0;
/// Maximum chance of harm for an effect to be usable.
pub const HARM_RULED_OUT: f64 = 0.005;
/// Minimum chance of benefit for an effect to be considered.
pub const BENEFIT_POSSIBLE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandProbabilities {
    /// Indexed like [`Band::index`], extremely-large harmful first.
    pub p: [f64; Band::COUNT],
    pub p_benefit: f64,
    pub p_trivial: f64,
    pub p_harm: f64,
}

impl BandProbabilities {
    pub fn from_bands(p: [f64; Band::COUNT]) -> Self {
        BandProbabilities {
            p,
            p_harm: p[..5].iter().sum(),
            p_trivial: p[5] + p[6],
            p_benefit: p[7..].iter().sum(),
        }
    }

    pub fn get(&self, band: Band) -> f64 {
        self.p[band.index()]
    }
}

/// Probability of each band under the posterior (Gaussian or Student-t).
pub fn band_probabilities(post: &Posterior, scale: &MagnitudeScale) -> BandProbabilities {
    let oriented = LocationScale::new(scale.oriented(post.mean), post.se, post.shape());
    band_probabilities_of(&oriented, scale)
}

/// Band probabilities of a distribution already expressed on the benefit-oriented scale.
pub fn band_probabilities_of(oriented: &LocationScale, scale: &MagnitudeScale) -> BandProbabilities {
    let bounds = scale.oriented_boundaries();
    let mut cdf = [0.0; Band::COUNT + 1];
    cdf[Band::COUNT] = 1.0;
    for (k, b) in bounds.iter().enumerate() {
        cdf[k + 1] = oriented.cdf(*b);
    }
    let mut p = [0.0; Band::COUNT];
    for i in 0..Band::COUNT {
        p[i] = (cdf[i + 1] - cdf[i]).max(0.0);
    }
    BandProbabilities::from_bands(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Descriptor {
    MostUnlikely,
    VeryUnlikely,
    Unlikely,
    Possibly,
    Likely,
    VeryLikely,
    MostLikely,
}

impl Descriptor {
    pub fn as_str(self) -> &'static str {
        match self {
            Descriptor::MostUnlikely => "most unlikely",
            Descriptor::VeryUnlikely => "very unlikely",
            Descriptor::Unlikely => "unlikely",
            Descriptor::Possibly => "possibly",
            Descriptor::Likely => "likely",
            Descriptor::VeryLikely => "very likely",
            Descriptor::MostLikely => "most likely",
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn mbd_descriptor(prob: f64) -> Descriptor {
    match prob {
        p if p < 0.005 => Descriptor::MostUnlikely,
        p if p < 0.05 => Descriptor::VeryUnlikely,
        p if p < 0.25 => Descriptor::Unlikely,
        p if p < 0.75 => Descriptor::Possibly,
        p if p < 0.95 => Descriptor::Likely,
        p if p < 0.995 => Descriptor::VeryLikely,
        _ => Descriptor::MostLikely,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbdAssessment {
    pub descriptor_benefit: String,
    pub descriptor_harm: String,
    #[serde(serialize_with = "crate::num::serialize_extended", deserialize_with = "crate::num::deserialize_extended")]
    pub bh_odds_ratio: f64,
    pub conservative_decision: String,
    pub odds_ratio_decision: String,
    /// True when the conservative rule finds the effect unclear.
    pub unclear: bool,
}

fn odds(p: f64) -> f64 {
    p / (1.0 - p)
}

/// Odds of benefit divided by odds of harm.
pub fn benefit_harm_odds_ratio(p_benefit: f64, p_harm: f64) -> f64 {
    if p_benefit == 0.0 && p_harm == 0.0 {
        return 1.0;
    }
    if p_harm == 0.0 || p_benefit >= 1.0 {
        return f64::INFINITY;
    }
    if p_harm >= 1.0 {
        return 0.0;
    }
    odds(p_benefit) / odds(p_harm)
}

pub fn clinical_mbd(bp: &BandProbabilities) -> MbdAssessment {
    let (pb, ph) = (bp.p_benefit, bp.p_harm);
    let benefit = mbd_descriptor(pb);
    let harm = mbd_descriptor(ph);
    let bh = benefit_harm_odds_ratio(pb, ph);
    let unclear = pb > BENEFIT_POSSIBLE && ph > HARM_RULED_OUT;
    let conservative = if unclear {
        "unclear; get more data".to_string()
    } else if ph <= HARM_RULED_OUT {
        let action = if pb >= 0.95 {
            "use it"
        } else if pb > BENEFIT_POSSIBLE {
            "consider using it"
        } else {
            "don't use"
        };
        format!("{benefit} beneficial; {action}")
    } else {
        format!("{harm} harmful; don't use")
    };
    let odds_ratio = if unclear && bh > USE_IT_ODDS_RATIO {
        format!("{benefit} beneficial; consider using it")
    } else {
        conservative.clone()
    };
    MbdAssessment {
        descriptor_benefit: benefit.to_string(),
        descriptor_harm: harm.to_string(),
        bh_odds_ratio: bh,
        conservative_decision: conservative,
        odds_ratio_decision: odds_ratio,
        unclear,
    }
}

/// P-values from the observed effect alone, for comparison with other frameworks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPValues {
    /// Two-sided test of no effect.
    pub p_nil: f64,
    /// One-sided test of the hypothesis that the effect is harmful (beyond the small harm threshold).
    pub p_inferiority: f64,
    /// One-sided test of the hypothesis that the effect is not beneficial.
    pub p_nonsuperiority: f64,
}

pub fn comparison_pvalues(observed: &TransformedEstimate, scale: &MagnitudeScale) -> ComparisonPValues {
    let shape = observed.shape();
    let m = scale.oriented(observed.mean);
    let se = observed.se;
    let ts = scale.t_small.abs();
    let p_benefit_observed = 1.0 - shape.cdf((ts - m) / se);
    ComparisonPValues {
        p_nil: (2.0 * shape.cdf(-(m / se).abs())).min(1.0),
        p_inferiority: shape.cdf(-(m + ts) / se),
        p_nonsuperiority: 1.0 - p_benefit_observed,
    }
}
