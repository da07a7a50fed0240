#![no_main]

use blurlab::types::TypeVector;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = TypeVector::from_json(text) {
        assert_eq!(t.counts().iter().sum::<usize>(), t.n());
    }
});
