#![no_main]

use libfuzzer_sys::fuzz_target;
use tsps_core::io::{from_json, to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((value, meta)) = from_json::<tsps_core::timescale::GridFunction<tsps_core::geom::Vec3>>(text) {
        // Anything accepted must re-encode and decode to the same value.
        let text = to_json(&value, &meta);
        let (again, meta2) = from_json::<tsps_core::timescale::GridFunction<tsps_core::geom::Vec3>>(&text).expect("re-encoded payload decodes");
        assert_eq!(to_json(&again, &meta2), text);
    }
});
