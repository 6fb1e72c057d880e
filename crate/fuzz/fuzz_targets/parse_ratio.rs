#![no_main]

use charsum::parse::{format_ratio, parse_ratio};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(r) = parse_ratio(s) {
            assert!(*r.denom() > 0);
            let again = parse_ratio(&format_ratio(&r)).expect("formatted ratio parses");
            assert_eq!(again, r);
        }
    }
});
