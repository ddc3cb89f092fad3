#![no_main]

use libfuzzer_sys::fuzz_target;
use std::str::FromStr;
use umbd_core::scales::EffectKind;
use umbd_core::sensitivity::SweepDimension;

fuzz_target!(|data: &str| {
    if let Ok(k) = EffectKind::from_str(data) {
        assert_eq!(k.as_str(), data);
    }
    if let Ok(d) = SweepDimension::from_str(data) {
        assert_eq!(d.as_str(), data);
    }
});
