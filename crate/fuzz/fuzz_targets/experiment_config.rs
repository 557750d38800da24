#![no_main]

use fracstable_cli::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(cfg) = ExperimentConfig::from_json(text) else { return };
    let _ = cfg.validate();
    // The echo written into manifests must parse back.
    let echo = serde_json::to_string(&cfg).expect("config serializes");
    ExperimentConfig::from_json(&echo).expect("echoed config parses");
});
