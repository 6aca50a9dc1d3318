#![no_main]

use libfuzzer_sys::fuzz_target;
use memrep::io::read_initial_function;

fuzz_target!(|data: &[u8]| {
    if let Ok(history) = read_initial_function(data) {
        let _ = history.sample(0.01, 100);
    }
});
