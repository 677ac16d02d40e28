#![no_main]

use dlim_core::InstanceBundle;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(bundle) = InstanceBundle::from_json(s) else { return };
    let again = InstanceBundle::from_json(&bundle.to_json()).expect("serialized bundle must parse");
    assert_eq!(again.to_json(), bundle.to_json());
});
