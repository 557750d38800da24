#![no_main]

use fracstable::io::parse_field_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(f) = parse_field_csv(text) {
        assert_eq!(f.values.len(), f.header.grid().expect("validated grid").len());
    }
});
