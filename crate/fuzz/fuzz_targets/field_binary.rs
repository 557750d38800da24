#![no_main]

use fracstable::io::{decode_field, parse_sidecar};
use libfuzzer_sys::fuzz_target;

// Input layout: u16 little-endian sidecar length, sidecar JSON, raw payload.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let n = u16::from_le_bytes([data[0], data[1]]) as usize;
    let rest = &data[2..];
    if n > rest.len() {
        return;
    }
    let (json, payload) = rest.split_at(n);
    let Ok(json) = std::str::from_utf8(json) else { return };
    let Ok(side) = parse_sidecar(json) else { return };
    if let Ok(values) = decode_field(payload, &side) {
        assert_eq!(values.len(), side.len);
    }
});
