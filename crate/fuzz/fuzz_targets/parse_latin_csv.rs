#![no_main]

use isoent::io::{latin_csv, parse_latin_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ls) = parse_latin_csv(text) {
        assert_eq!(parse_latin_csv(&latin_csv(&ls)).expect("re-parse"), ls);
    }
});
