use approx::assert_abs_diff_eq;
use umbd_core::appio::config::ReportLevel;
use umbd_core::sensitivity::{apply_dimension, double_whammy, SweepDimension};
use umbd_core::utility::Decision;
use umbd_core::{analyze_json, parse_config, run_analysis, AnalysisConfig, AnalysisReport};

fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn fixture(name: &str) -> AnalysisConfig {
    parse_config(&fixture_text(name)).unwrap()
}

fn with_sd(c: &AnalysisConfig, sd: f64) -> AnalysisConfig {
    apply_dimension(c, SweepDimension::SdHeterogeneity, 0, sd).unwrap()
}

fn harm(c: &AnalysisConfig) -> f64 {
    run_analysis(c).unwrap().heterogeneity.unwrap().p_net_harm
}

#[test]
fn example_one_wider_individual_sd() {
    let c = with_sd(&fixture("ex1"), 0.45);
    let h = run_analysis(&c).unwrap().heterogeneity.unwrap();
    assert_abs_diff_eq!(h.p_net_harm, 0.14, epsilon = 0.01);
    assert_abs_diff_eq!(h.sd_utilities, 3.5, epsilon = 0.1);
}

#[test]
fn example_two_harmful_responders() {
    let c = fixture("ex2");
    assert!(harm(&with_sd(&c, 1.05_f64.ln())) < 0.005);
    // Reported as 20% in the sensitivity text and 13% in the conclusion.
    let p = harm(&with_sd(&c, 1.20_f64.ln()));
    assert!((0.13..=0.24).contains(&p), "{p}");
}

#[test]
fn example_three_harmful_responders() {
    let c = fixture("ex3");
    assert!(harm(&with_sd(&c, 1.05_f64.ln())) < 0.005);
    assert_abs_diff_eq!(harm(&with_sd(&c, 1.20_f64.ln())), 0.07, epsilon = 0.03);
}

#[test]
fn example_three_double_whammy() {
    let rows = double_whammy(&fixture("ex3"), &[0.80], &[1.05_f64.ln(), 1.20_f64.ln()]).unwrap();
    assert!(rows[0].p_net_harm < 0.01);
    assert_abs_diff_eq!(rows[1].p_net_harm, 0.24, epsilon = 0.04);
    assert_abs_diff_eq!(rows[0].eu, rows[1].eu, epsilon = 1e-12);
}

#[test]
fn example_reports_are_stable() {
    for name in ["ex1", "ex2", "ex3", "ex4"] {
        let a = analyze_json(&fixture_text(name)).unwrap().to_json();
        let b = analyze_json(&fixture_text(name)).unwrap().to_json();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn config_echo_reruns_identically() {
    for name in ["ex1", "ex2", "ex3", "ex4"] {
        let first = analyze_json(&fixture_text(name)).unwrap();
        let echo = serde_json::to_string(&first.config).unwrap();
        let second = analyze_json(&echo).unwrap();
        assert_eq!(first.to_json(), second.to_json(), "{name}");
    }
}

#[test]
fn report_round_trips_through_json() {
    let r = analyze_json(&fixture_text("ex3")).unwrap();
    let back: AnalysisReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn report_level_controls_scale_block() {
    let mut c = fixture("ex1");
    assert!(run_analysis(&c).unwrap().scale.is_none());
    c.report_level = ReportLevel::Full;
    let r = run_analysis(&c).unwrap();
    let s = r.scale.unwrap();
    assert_abs_diff_eq!(s.boundaries[6], 0.2, epsilon = 1e-15);
    assert_abs_diff_eq!(s.boundaries[10], 4.0, epsilon = 1e-12);
}

#[test]
fn ethical_flag_and_veto_warnings() {
    let r = run_analysis(&fixture("ex4")).unwrap();
    assert!(r.warnings.iter().any(|w| w.contains("ethical")));
    let text = fixture_text("ex1").replacen(
        "\"f_harm\"",
        "\"side_effects\": [{\"label\": \"stroke\", \"probability\": 0.001, \"points\": 10, \"direction\": \"harmful\", \"veto\": true}], \"f_harm\"",
        1,
    );
    let r = analyze_json(&text).unwrap();
    assert_eq!(r.utility.decision, Decision::Vetoed);
    assert!(r.warnings.iter().any(|w| w.contains("vetoed") && w.contains("stroke")));
}

#[test]
fn text_report_rounding() {
    let text = run_analysis(&fixture("ex1")).unwrap().to_text();
    assert!(text.contains("EU 2.84"), "{text}");
    assert!(text.contains("net benefit 84%"), "{text}");
    assert!(text.contains("decision: implement"), "{text}");
}

#[test]
fn odds_ratio_back_transform_panel() {
    let text = r#"{
        "effect": {"type": "odds_ratio", "value": 1.714, "ci_lower": 1.1, "ci_upper": 2.7},
        "risk_anchor": {"reference_risk": 0.70, "anchor_kind": "risk_difference", "anchor_value": 0.05}
    }"#;
    let r = analyze_json(text).unwrap();
    let bt = r.back_transform.unwrap();
    assert_eq!(bt.reference_risk, 0.70);
    assert!(bt.ci_lower.risk_difference < bt.estimate.risk_difference);
    assert!(bt.estimate.risk_difference < bt.ci_upper.risk_difference);
    assert_abs_diff_eq!(bt.estimate.extra_wins_per_10, 10.0 * bt.estimate.risk_difference, epsilon = 1e-12);
}

#[test]
fn student_t_effects_run() {
    let text = r#"{
        "effect": {"type": "factor_mean", "value": 1.05, "ci_lower": 0.98, "ci_upper": 1.12, "df": 18},
        "threshold_small": 1.01,
        "heterogeneity": {"kind": "individual", "sd": 0.02}
    }"#;
    let r = analyze_json(text).unwrap();
    assert_eq!(r.posterior.df, Some(18));
    let h = r.heterogeneity.unwrap();
    assert_abs_diff_eq!(h.p_net_benefit + h.p_negligible + h.p_net_harm, 1.0, epsilon = 1e-9);
}

#[test]
fn validation_errors_name_fields() {
    let err = analyze_json(r#"{"effect": {"type": "hazard_ratio", "value": -0.7, "ci_lower": 0.5, "ci_upper": 0.9}, "threshold_small": 0.9}"#)
        .unwrap_err();
    assert_eq!(err.field(), Some("effect.value"));
    assert!(matches!(err, umbd_core::Error::Domain { .. }));
    let err = analyze_json(r#"{"effect": {"type": "raw_mean", "value": 1, "ci_lower": 0, "ci_upper": 2}, "threshold_small": 1, "f_harm": 0.5}"#)
        .unwrap_err();
    assert_eq!(err.field(), Some("f_harm"));
}
