#![no_main]

use libfuzzer_sys::fuzz_target;
use tsps_core::io::peek_kind;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = peek_kind(text);
    }
});
