//! Built-in settings per effect type, as served by `defaults`.

use crate::magnitudes::{build_scale, builtin_series, MultiplierSeries, SeriesStyle};
use crate::posterior::default_weak_prior;
use crate::scales::{EffectKind, DEFAULT_CI_LEVEL};
use crate::utility::{DEFAULT_EU_THRESHOLD, DEFAULT_F_HARM};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakPriorDefault {
    pub mean: f64,
    pub sd: f64,
    /// Natural-scale 90% interval.
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defaults {
    pub effect_type: EffectKind,
    /// Beneficial smallest important effect, when one is built in.
    pub threshold_small: Option<f64>,
    pub threshold_note: String,
    pub series: MultiplierSeries,
    pub type_specific_series: MultiplierSeries,
    /// Weak prior implied by `threshold_small` and the default series.
    pub weak_prior: Option<WeakPriorDefault>,
    pub f_harm: f64,
    pub eu_threshold: f64,
    pub ci_level: f64,
}

/// Smallest important effect built in for a type, with a note on how to set it otherwise.
pub fn builtin_threshold(kind: EffectKind) -> (Option<f64>, &'static str) {
    match kind {
        EffectKind::StandardizedMean => (Some(0.20), "use -0.20 when a decrease is beneficial"),
        EffectKind::HazardRatio | EffectKind::CountRatio => {
            (Some(0.90), "one event in 10; use 1.11 when an increase is beneficial")
        }
        EffectKind::Correlation => (Some(0.10), "use -0.10 when a negative correlation is beneficial"),
        EffectKind::RawMean | EffectKind::FactorMean => {
            (None, "0.20 of a between-subject SD, in the units of the effect")
        }
        EffectKind::PerformanceMean => (None, "0.3 of the within-athlete variability of top athletes"),
        EffectKind::OddsRatio => (None, "derive from a risk_anchor (reference risk plus a risk ratio or difference)"),
    }
}

pub fn defaults_for(kind: EffectKind) -> Defaults {
    let (threshold_small, note) = builtin_threshold(kind);
    let series = builtin_series(kind, &SeriesStyle::Default).expect("built-in series are valid");
    let type_specific_series = builtin_series(kind, &SeriesStyle::TypeSpecific).expect("built-in series are valid");
    let weak_prior = threshold_small.map(|t| {
        let scale = build_scale(t, kind, series.clone()).expect("built-in threshold is valid");
        let p = default_weak_prior(&scale);
        let (lo, hi) = p.interval(0.90);
        WeakPriorDefault {
            mean: p.mean,
            sd: p.sd,
            ci_lower: lo,
            ci_upper: hi,
        }
    });
    Defaults {
        effect_type: kind,
        threshold_small,
        threshold_note: note.to_string(),
        series,
        type_specific_series,
        weak_prior,
        f_harm: DEFAULT_F_HARM,
        eu_threshold: DEFAULT_EU_THRESHOLD,
        ci_level: DEFAULT_CI_LEVEL,
    }
}
