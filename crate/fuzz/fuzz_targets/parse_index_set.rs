#![no_main]

use dlim_core::instance::from_json_str;
use dlim_core::IndexSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(set) = from_json_str::<IndexSet>(s) else { return };
    let json = serde_json::to_string(&set).unwrap();
    assert_eq!(from_json_str::<IndexSet>(&json).unwrap(), set);
    let limit = set.horizon().unwrap_or(256).min(256);
    let mut prev = 0;
    for n in 1..=limit {
        let c = set.prefix_count(n).unwrap();
        assert!(c >= prev && c <= prev + 1);
        assert_eq!(c - prev, set.contains(n).unwrap() as u64);
        prev = c;
    }
});
