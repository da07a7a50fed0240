#![no_main]

use blurlab::linalg::DenseOperator;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(op) = DenseOperator::from_json(text) {
        // accepted operators must be square and survive validation without panicking
        assert_eq!(op.matrix().nrows(), op.matrix().ncols());
        let _ = op.validate_state();
    }
});
