#![no_main]

use libfuzzer_sys::fuzz_target;
use memrep::config::{parse_config, validate};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(raw) = parse_config(text) {
            let _ = validate(&raw, std::path::Path::new("/nonexistent"));
        }
    }
});
