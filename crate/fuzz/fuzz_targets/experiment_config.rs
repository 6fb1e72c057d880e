#![no_main]

use charsum::harness::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(config) = ExperimentConfig::from_json(s) {
            assert_eq!(config.hash(), config.clone().hash());
        }
    }
});
