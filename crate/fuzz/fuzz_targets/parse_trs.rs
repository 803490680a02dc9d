#![no_main]

use libfuzzer_sys::fuzz_target;
use termwpo::trs::{parse_trs, print_trs};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(trs) = parse_trs(text) {
        let printed = print_trs(&trs);
        let again = parse_trs(&printed).expect("printed system parses");
        assert_eq!(print_trs(&again), printed);
    }
});
