//! Runs a config through every stage and assembles the report.

use super::config::{parse_config, AnalysisConfig, ReportLevel};
use super::report::*;
use crate::error::Result;
use crate::heterogeneity::{response_proportions, two_step_meta, Method};
use crate::inference::{band_probabilities, clinical_mbd, comparison_pvalues};
use crate::magnitudes::{points_table, Band};
use crate::posterior::{credible_interval, prediction_interval, update_transformed, PriorKind};
use crate::riskconv::back_transform_or;
use crate::scales::{from_transformed, EffectKind};
use crate::utility::{expected_utility, side_utility, Decision};

/// Proportion of net harm above which the report flags the decision for ethical review.
pub const ETHICAL_HARM_FLAG: f64 = 0.05;

pub fn run_analysis(config: &AnalysisConfig) -> Result<AnalysisReport> {
    config.validate()?;
    let kind = config.effect.kind;
    let scale = config.scale()?;
    let prior = config.prior_spec()?;
    let observed = config.effect.to_analysis_scale().map_err(|e| e.in_field("effect"))?;
    let post = update_transformed(&observed, &prior)?;
    let level = config.effect.ci_level;
    let (ci_lower, ci_upper) = credible_interval(&post, kind, level)?;

    let bp = band_probabilities(&post, &scale);
    let mbd = clinical_mbd(&bp);
    let p_values = comparison_pvalues(&observed, &scale);
    let side_effects = config.all_side_effects()?;
    let utility = expected_utility(&bp, config.f_harm, &side_effects, config.eu_threshold)?;
    let eu_side = side_utility(&side_effects);

    let mut warnings = Vec::new();
    let mut flag_harm = |label: &str, p: f64| {
        if p > ETHICAL_HARM_FLAG {
            warnings.push(format!(
                "{label}: {:.1}% net harm exceeds {:.0}%; the decision warrants ethical consideration",
                100.0 * p,
                100.0 * ETHICAL_HARM_FLAG
            ));
        }
    };

    let heterogeneity = match &config.heterogeneity {
        Some(h) => {
            let mc = (h.method == Method::MonteCarlo).then_some(config.mc);
            let r = response_proportions(&post, &scale, config.f_harm, eu_side, &h.spec(), mc)
                .map_err(|e| e.in_field("heterogeneity"))?;
            flag_harm("individuals", r.p_net_harm);
            Some(r)
        }
        None => None,
    };

    let meta = match &config.meta {
        Some(m) => {
            let mc = config
                .heterogeneity
                .filter(|h| h.method == Method::MonteCarlo)
                .map(|_| config.mc);
            let mut steps = Vec::with_capacity(m.setting_mean_shifts.len());
            for &shift in &m.setting_mean_shifts {
                let step = two_step_meta(&post, &scale, config.f_harm, eu_side, m.tau, m.sd_ir, shift, m.utility_threshold, mc)
                    .map_err(|e| e.in_field("meta"))?;
                if steps.is_empty() {
                    flag_harm("settings", step.setting.p_net_harm);
                }
                flag_harm(&format!("individuals at setting shift {shift}"), step.individual.p_net_harm);
                steps.push(step);
            }
            let (lo, hi) = prediction_interval(&post, kind, m.tau, level)?;
            Some(MetaSummary {
                tau: m.tau,
                sd_ir: m.sd_ir,
                prediction_interval: [lo, hi],
                steps,
            })
        }
        None => None,
    };

    if utility.decision == Decision::Vetoed {
        let labels: Vec<&str> = side_effects
            .iter()
            .filter(|s| s.veto && s.direction == crate::magnitudes::Direction::Harmful)
            .map(|s| s.label.as_str())
            .collect();
        warnings.push(format!("vetoed by side effect(s) {labels:?}; the intervention should not be used"));
    }
    if let Some(adj) = observed.adjustments.first() {
        warnings.push(adj.clone());
    }

    let back_transform = match (kind, &config.risk_anchor) {
        (EffectKind::OddsRatio, Some(anchor)) => {
            let r0 = anchor.reference_risk;
            let t = kind.transform();
            Some(BackTransformPanel {
                reference_risk: r0,
                estimate: back_transform_or(t.inverse(post.mean), r0)?,
                ci_lower: back_transform_or(ci_lower, r0)?,
                ci_upper: back_transform_or(ci_upper, r0)?,
            })
        }
        _ => None,
    };

    let points = points_table(config.f_harm);
    let bands = Band::all()
        .map(|b| BandRow {
            band: b.label(),
            probability: bp.p[b.index()],
            points: points[b.index()],
        })
        .collect();

    let full = config.report_level == ReportLevel::Full;
    let (prior_lo, prior_hi) = prior.interval(level);
    Ok(AnalysisReport {
        engine_version: ENGINE_VERSION.to_string(),
        config_hash: config.hash(),
        description: config.description.clone(),
        observed: ObservedSummary {
            effect_type: kind.to_string(),
            value: config.effect.value,
            mean: observed.mean,
            se: observed.se,
            df: observed.df,
            adjustments: observed.adjustments.clone(),
        },
        scale: full.then(|| ScaleSummary {
            threshold_small: scale.threshold_small,
            series: scale.series.name.clone(),
            multipliers: scale.series.multipliers,
            boundaries: scale.natural_boundaries(),
        }),
        prior: PriorSummary {
            kind: match prior.kind {
                PriorKind::WeaklyInformative => "weakly_informative".into(),
                PriorKind::Informative => "informative".into(),
            },
            mean: prior.mean,
            sd: prior.sd,
            ci_lower: prior_lo,
            ci_upper: prior_hi,
        },
        posterior: PosteriorSummary {
            value: from_transformed(kind, post.mean),
            ci_lower,
            ci_upper,
            ci_level: level,
            mean: post.mean,
            se: post.se,
            df: post.df,
        },
        bands,
        p_benefit: bp.p_benefit,
        p_trivial: bp.p_trivial,
        p_harm: bp.p_harm,
        clinical_mbd: mbd,
        p_values,
        utility,
        heterogeneity,
        meta,
        back_transform,
        warnings,
        config: config.clone(),
    })
}

/// Parses, validates and runs a JSON config.
pub fn analyze_json(text: &str) -> Result<AnalysisReport> {
    run_analysis(&parse_config(text)?)
}
