#![no_main]

use charsum::harness::RecordLine;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(line) = serde_json::from_slice::<RecordLine>(data) {
        let text = serde_json::to_string(&line).expect("records serialize");
        let again = serde_json::from_str::<RecordLine>(&text).expect("serialized record parses");
        assert_eq!(again, line);
    }
});
