#![no_main]

use libfuzzer_sys::fuzz_target;
use umbd_core::heterogeneity::MIN_MC_DRAWS;
use umbd_core::sensitivity::{parse_sweep_spec, sweep, to_csv};

fuzz_target!(|data: &str| {
    let Ok(mut spec) = parse_sweep_spec(data) else {
        return;
    };
    spec.values.truncate(4);
    spec.config.mc.draws = spec.config.mc.draws.min(MIN_MC_DRAWS);
    if let Ok(report) = sweep(&spec) {
        let csv = to_csv(&report).expect("csv");
        assert_eq!(csv.lines().count(), report.rows.len() + 1);
    }
});
