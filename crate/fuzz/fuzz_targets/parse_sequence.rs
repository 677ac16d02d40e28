#![no_main]

use dlim_core::instance::from_json_str;
use dlim_core::{d_lim_verdict, q, Rational, RealSequence};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(seq) = from_json_str::<RealSequence>(s) else { return };
    let json = serde_json::to_string(&seq).unwrap();
    assert_eq!(from_json_str::<RealSequence>(&json).unwrap(), seq);
    let n = (seq.prefix().len() as u64).clamp(1, 512);
    // Errors are fine (e.g. no tail past the prefix); panics are not.
    let _ = d_lim_verdict(&seq, &Rational::zero(), &q(1, 2), n, &q(1, 100));
});
