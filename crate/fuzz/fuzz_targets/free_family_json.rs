#![no_main]

use blurlab::free_sets::FreeFamily;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = FreeFamily::from_json(text) {
        for n in f.levels().collect::<Vec<_>>() {
            let _ = f.level(n);
        }
        let _ = f.to_json();
    }
});
