#![no_main]

use charsum::parse::{parse_int_list, parse_real_list, parse_uint_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(v) = parse_real_list(s) {
            assert!(v.iter().all(|x| x.is_finite()));
        }
        let _ = parse_int_list(s);
        if let Ok(v) = parse_uint_list(s) {
            let text = v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
            assert_eq!(parse_uint_list(&text).unwrap(), v);
        }
    }
});
