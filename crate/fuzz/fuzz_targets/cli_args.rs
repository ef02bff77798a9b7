#![no_main]

//! Argument vectors are NUL-separated; only parsing and flag resolution are
//! exercised, never the (possibly expensive) commands themselves.

use clap::Parser;
use hardylab::cli::{resolve_mode, Cli};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args = std::iter::once("hardylab").chain(text.split('\0'));
    if let Ok(cli) = Cli::try_parse_from(args) {
        let _ = resolve_mode(cli.mode, cli.bits);
    }
});
