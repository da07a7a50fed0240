#![no_main]

use blurlab_cli::config::{params_as_flags, validate, ExperimentConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_json(text) {
        // input files are not read here: paths come from the fuzzer
        let mut cfg = cfg;
        cfg.inputs = Default::default();
        let _ = validate(&cfg);
        let _ = params_as_flags(&cfg.params);
    }
});
