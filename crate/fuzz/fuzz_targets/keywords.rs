#![no_main]

use charsum::characters::Parity;
use charsum::expsum::Sign;
use charsum::lattice::ResidueSign;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = s.parse::<Parity>();
        let _ = s.parse::<Sign>();
        let _ = s.parse::<ResidueSign>();
    }
});
