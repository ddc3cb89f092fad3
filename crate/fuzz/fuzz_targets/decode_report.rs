#![no_main]

use libfuzzer_sys::fuzz_target;
use umbd_core::AnalysisReport;

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = serde_json::from_slice::<AnalysisReport>(data) {
        let text = report.to_json();
        let back: AnalysisReport = serde_json::from_str(&text).expect("emitted report decodes");
        assert_eq!(back.to_json(), text);
    }
});
