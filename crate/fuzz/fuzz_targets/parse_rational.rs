#![no_main]

use dlim_core::Rational;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(x) = s.parse::<Rational>() {
        // Display is canonical: reparsing gives the same value and text.
        let text = x.to_string();
        let y: Rational = text.parse().expect("display output must parse");
        assert_eq!(x, y);
        assert_eq!(text, y.to_string());
    }
});
