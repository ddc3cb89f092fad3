//! Threshold ladders and the points attached to each magnitude band.
//!
//! A ladder is anchored on the smallest important effect and extended by a
//! multiplier series on the analysis scale. Bands are indexed 0..12 from
//! extremely-large harmful to extremely-large beneficial.

use crate::error::{Error, Result};
use crate::scales::{to_transformed, EffectKind};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Magnitude {
    Trivial,
    Small,
    Moderate,
    Large,
    VeryLarge,
    ExtremelyLarge,
}

impl Magnitude {
    pub const ALL: [Magnitude; 6] = [
        Magnitude::Trivial,
        Magnitude::Small,
        Magnitude::Moderate,
        Magnitude::Large,
        Magnitude::VeryLarge,
        Magnitude::ExtremelyLarge,
    ];

    /// Midpoint points of the beneficial band of this magnitude.
    pub fn midpoint_points(self) -> f64 {
        BENEFICIAL_POINTS[self as usize]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Magnitude::Trivial => "trivial",
            Magnitude::Small => "small",
            Magnitude::Moderate => "moderate",
            Magnitude::Large => "large",
            Magnitude::VeryLarge => "very_large",
            Magnitude::ExtremelyLarge => "extremely_large",
        }
    }
}

/// Midpoints between threshold points 0, 1, 3, 5, 7, 9 (and 11 for the open band).
pub const BENEFICIAL_POINTS: [f64; 6] = [0.5, 2.0, 4.0, 6.0, 8.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Harmful,
    Beneficial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Band {
    pub magnitude: Magnitude,
    pub direction: Direction,
}

impl Band {
    pub const COUNT: usize = 12;

    pub fn from_index(i: usize) -> Option<Band> {
        match i {
            0..=5 => Some(Band {
                magnitude: Magnitude::ALL[5 - i],
                direction: Direction::Harmful,
            }),
            6..=11 => Some(Band {
                magnitude: Magnitude::ALL[i - 6],
                direction: Direction::Beneficial,
            }),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self.direction {
            Direction::Harmful => 5 - self.magnitude as usize,
            Direction::Beneficial => 6 + self.magnitude as usize,
        }
    }

    pub fn all() -> impl Iterator<Item = Band> {
        (0..Self::COUNT).filter_map(Band::from_index)
    }

    pub fn label(self) -> String {
        format!(
            "{}_{}",
            self.magnitude.as_str(),
            match self.direction {
                Direction::Harmful => "harmful",
                Direction::Beneficial => "beneficial",
            }
        )
    }

    pub fn parse(label: &str) -> Result<Band> {
        Band::all()
            .find(|b| b.label() == label)
            .ok_or_else(|| Error::validation("band", format!("unknown band label {label:?}")))
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Points for a band; harmful bands are weighted by the harm/benefit factor.
pub fn band_points(band: Band, f_harm: f64) -> f64 {
    let p = band.magnitude.midpoint_points();
    match band.direction {
        Direction::Beneficial => p,
        Direction::Harmful => -f_harm * p,
    }
}

/// Points for all twelve bands in index order.
pub fn points_table(f_harm: f64) -> [f64; Band::COUNT] {
    let mut out = [0.0; Band::COUNT];
    for b in Band::all() {
        out[b.index()] = band_points(b, f_harm);
    }
    out
}

/// Multipliers of the small threshold for moderate, large, very large and extremely large.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSeries {
    pub name: String,
    pub multipliers: [f64; 4],
}

pub const DEFAULT_MULTIPLIERS: [f64; 4] = [3.0, 6.0, 10.0, 20.0];
pub const RATIO_MULTIPLIERS: [f64; 4] = [3.4, 6.6, 11.4, 21.9];
pub const DIFFERENCE_MULTIPLIERS: [f64; 4] = [3.1, 5.5, 8.6, 14.7];
pub const PERFORMANCE_MULTIPLIERS: [f64; 4] = [3.0, 5.3, 8.3, 13.3];

impl MultiplierSeries {
    pub fn new(name: impl Into<String>, multipliers: [f64; 4]) -> Result<Self> {
        let s = MultiplierSeries {
            name: name.into(),
            multipliers,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.multipliers;
        let ok = m.iter().all(|x| x.is_finite()) && 1.0 < m[0] && m[0] < m[1] && m[1] < m[2] && m[2] < m[3];
        if ok {
            Ok(())
        } else {
            Err(Error::validation(
                "series",
                format!("multipliers {m:?} must be finite and strictly increasing above 1"),
            ))
        }
    }

    /// Factors for all five thresholds, starting with 1 for small.
    pub fn factors(&self) -> [f64; 5] {
        let m = self.multipliers;
        [1.0, m[0], m[1], m[2], m[3]]
    }

    pub fn extremely_large(&self) -> f64 {
        self.multipliers[3]
    }
}

/// How the multiplier series is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SeriesStyle {
    /// The 3, 6, 10, 20 reference series for every effect type.
    #[default]
    Default,
    TypeSpecific,
    Custom([f64; 4]),
}

/// Built-in multiplier series for an effect type.
///
/// Odds ratios default to the difference-anchored series; use
/// [`odds_ratio_series`] when the anchoring is known.
pub fn builtin_series(kind: EffectKind, style: &SeriesStyle) -> Result<MultiplierSeries> {
    let (name, m) = match style {
        SeriesStyle::Default => ("default", DEFAULT_MULTIPLIERS),
        SeriesStyle::Custom(m) => return MultiplierSeries::new("custom", *m),
        SeriesStyle::TypeSpecific => match kind {
            EffectKind::HazardRatio | EffectKind::CountRatio => ("ratio", RATIO_MULTIPLIERS),
            EffectKind::OddsRatio | EffectKind::Correlation => ("difference", DIFFERENCE_MULTIPLIERS),
            EffectKind::PerformanceMean => ("performance", PERFORMANCE_MULTIPLIERS),
            EffectKind::RawMean | EffectKind::StandardizedMean | EffectKind::FactorMean => {
                ("default", DEFAULT_MULTIPLIERS)
            }
        },
    };
    MultiplierSeries::new(name, m)
}

/// Type-specific series for an odds ratio, by the scale its threshold is anchored on.
pub fn odds_ratio_series(anchored_on_risk_ratio: bool) -> MultiplierSeries {
    if anchored_on_risk_ratio {
        MultiplierSeries {
            name: "ratio".into(),
            multipliers: RATIO_MULTIPLIERS,
        }
    } else {
        MultiplierSeries {
            name: "difference".into(),
            multipliers: DIFFERENCE_MULTIPLIERS,
        }
    }
}

/// Signed ladder of eleven thresholds on the analysis scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeScale {
    pub kind: EffectKind,
    /// Smallest important beneficial effect on the natural scale.
    pub threshold_small: f64,
    /// `threshold_small` on the analysis scale, relative to the null.
    pub t_small: f64,
    pub series: MultiplierSeries,
    /// From -XL to +XL, ordered by benefit: `boundaries[k] == -boundaries[10 - k]`.
    pub boundaries: [f64; 11],
}

impl MagnitudeScale {
    /// +1 when larger transformed values are beneficial, -1 otherwise.
    pub fn direction(&self) -> f64 {
        self.t_small.signum()
    }

    /// Analysis-scale value reoriented so that benefit is positive.
    pub fn oriented(&self, x: f64) -> f64 {
        self.direction() * x
    }

    /// Positive thresholds (S, M, L, VL, XL) on the benefit-oriented scale.
    pub fn oriented_thresholds(&self) -> [f64; 5] {
        let s = self.t_small.abs();
        self.series.factors().map(|f| s * f)
    }

    /// The eleven boundaries on the benefit-oriented scale, ascending.
    pub fn oriented_boundaries(&self) -> [f64; 11] {
        let d = self.direction();
        self.boundaries.map(|b| d * b)
    }

    /// The eleven boundaries back on the natural scale.
    pub fn natural_boundaries(&self) -> [f64; 11] {
        let t = self.kind.transform();
        self.boundaries.map(|b| t.inverse(b))
    }

    /// Band containing an analysis-scale value (upper boundaries belong to the lower band).
    pub fn band_of(&self, x: f64) -> Band {
        let o = self.oriented(x);
        let idx = self.oriented_boundaries().iter().take_while(|&&b| o > b).count();
        Band::from_index(idx).expect("index in 0..=11")
    }

    /// Symmetric weak-prior width: the extremely-large threshold.
    pub fn extremely_large_threshold(&self) -> f64 {
        self.t_small.abs() * self.series.extremely_large()
    }
}

/// Builds the ladder from the signed smallest important effect.
pub fn build_scale(threshold_small: f64, kind: EffectKind, series: MultiplierSeries) -> Result<MagnitudeScale> {
    series.validate()?;
    // Every transform maps the null value to 0.
    let t_small = to_transformed(kind, threshold_small).map_err(|e| e.in_field("threshold_small"))?;
    if t_small == 0.0 || !t_small.is_finite() {
        return Err(Error::validation(
            "threshold_small",
            format!("{threshold_small} equals the null value {}", kind.null_value()),
        ));
    }
    let d = t_small.signum();
    let pos = series.factors().map(|f| t_small.abs() * f);
    let mut boundaries = [0.0; 11];
    for (k, p) in pos.iter().enumerate() {
        boundaries[6 + k] = d * p;
        boundaries[4 - k] = -d * p;
    }
    Ok(MagnitudeScale {
        kind,
        threshold_small,
        t_small,
        series,
        boundaries,
    })
}
