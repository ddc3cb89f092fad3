#![no_main]

use libfuzzer_sys::fuzz_target;
use umbd_core::heterogeneity::MIN_MC_DRAWS;
use umbd_core::{parse_config, run_analysis};

fuzz_target!(|data: &str| {
    let Ok(mut config) = parse_config(data) else {
        return;
    };
    // The canonical echo must parse back to the same config.
    let again = parse_config(&config.canonical_json()).expect("canonical config re-parses");
    assert_eq!(config.hash(), again.hash());

    config.mc.draws = config.mc.draws.min(MIN_MC_DRAWS);
    if let Some(m) = config.meta.as_mut() {
        m.setting_mean_shifts.truncate(2);
    }
    let _ = run_analysis(&config);
});
