#![no_main]

use libfuzzer_sys::fuzz_target;
use termwpo_cli::parse_args;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args = std::iter::once("termwpo").chain(text.split('\n'));
    if let Ok(inv) = parse_args(args) {
        assert!(!inv.strategy.is_empty());
    }
});
