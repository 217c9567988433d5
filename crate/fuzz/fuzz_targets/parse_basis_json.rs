#![no_main]

use isoent::io::{basis_json, parse_basis_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(b) = parse_basis_json(text) {
        // anything accepted must survive a round trip unchanged
        let back = parse_basis_json(&basis_json(&b)).expect("re-parse");
        assert_eq!(back.matrix().matrix(), b.matrix().matrix());
        let _ = isoent::orthonormality_residual(&b);
        if b.dims() == (2, 2) {
            let _ = b.tangles();
        }
    }
});
