#![no_main]

use hardylab::forms::identity_report;
use hardylab::numerics::SummationMode;
use hardylab::sequences::parse_sequence_text;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(u) = parse_sequence_text(text) {
        // Accepted input is strictly increasing, finite and free of index 0.
        let mut prev = 0;
        for (n, z) in u.iter() {
            assert!(n > prev);
            assert!(z.re.is_finite() && z.im.is_finite());
            prev = n;
        }
        // Keep huge magnitudes out: the identity tolerance is relative but
        // squares of 1e200 overflow.
        if u.support_size() <= 64 && u.iter().all(|(_, z)| z.norm() < 1e100) {
            identity_report(&u, SummationMode::Compensated).unwrap();
        }
    }
});
