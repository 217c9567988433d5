#![no_main]

use isoent::families::{closed_form_tangle, gen_family};
use isoent::io::parse_family_params;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_family_params(text) {
        if let Ok(b) = gen_family(&p) {
            assert!(isoent::orthonormality_residual(&b) < 1e-9);
            let _ = closed_form_tangle(&p);
        }
    }
});
