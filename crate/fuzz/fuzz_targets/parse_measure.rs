#![no_main]

use fracstable::symbol::{parse_measure, Symbol};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(m) = parse_measure(text) else { return };
    assert!(m.total_mass() > 0.0 && m.total_mass().is_finite());
    // Anything accepted must yield a symbol that is even on a few probes.
    if let Ok(s) = Symbol::new(m, 1.5) {
        let d = s.dimension();
        let xi = [0.3, -1.1, 2.0];
        let neg: Vec<f64> = xi[..d].iter().map(|v| -v).collect();
        let (a, b) = (s.psi(&xi[..d]), s.psi(&neg));
        assert!(a >= 0.0 && (a - b).abs() <= 1e-9 * a.max(1e-300));
    }
});
