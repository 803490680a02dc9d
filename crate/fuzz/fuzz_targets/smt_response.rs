#![no_main]

use libfuzzer_sys::fuzz_target;
use termwpo::smt::{is_complete, parse_get_value, parse_sexp_bytes};

fuzz_target!(|data: &[u8]| {
    let _ = parse_sexp_bytes(data);
    if let Ok(text) = std::str::from_utf8(data) {
        if is_complete(text) {
            let _ = parse_get_value(text);
        }
    }
});
