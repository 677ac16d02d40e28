#![no_main]

use dlim_core::instance::from_json_str;
use dlim_core::FiniteMeasureSpace;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(space) = from_json_str::<FiniteMeasureSpace>(s) else { return };
    assert!(space.weights().iter().all(|w| !w.is_negative()));
    let json = serde_json::to_string(&space).unwrap();
    assert_eq!(from_json_str::<FiniteMeasureSpace>(&json).unwrap(), space);
});
