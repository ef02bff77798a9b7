#![no_main]

use hardylab::cli::parse_perturbation;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((site, eps)) = parse_perturbation(text) {
        assert!(site >= 1);
        assert!(eps.is_finite() && eps > 0.0);
    }
});
