#![no_main]

use isoent_cli::config::{parse_run_config, resolve_seed};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match parse_run_config(text) {
        Ok(c) => {
            let _ = resolve_seed(None, Some(text), c.seed);
        }
        Err(e) => assert_eq!(e.code, 2),
    }
});
