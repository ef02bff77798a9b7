#![no_main]

use hardylab::cli::parse_support_cap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cap) = parse_support_cap(text) {
        assert!(cap.0 >= 1);
    }
});
