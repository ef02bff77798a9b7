#![no_main]

use hardylab::sequences::{parse_builtin, Builtin, SupportCap};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(name) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(Some(builtin)) = parse_builtin(name) {
        // Display is the canonical spelling and parses back to the same value.
        let canonical = builtin.to_string();
        assert_eq!(parse_builtin(&canonical).unwrap(), Some(builtin));
        let small = match builtin {
            Builtin::Unit(_) => true,
            Builtin::Step(m) | Builtin::Sqrt(m) => m <= 1000,
            Builtin::Probe(n) => n <= 30,
        };
        if small {
            builtin.build(SupportCap(1000)).unwrap();
        }
    }
});
