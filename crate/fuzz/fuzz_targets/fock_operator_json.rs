#![no_main]

use blurlab::fock::FockOperator;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = FockOperator::from_json(text) {
        assert_eq!(x.dim(), x.matrix().nrows());
        let _ = x.operator().validate_state();
    }
});
