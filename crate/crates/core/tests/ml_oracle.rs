use fracstable::mittag_leffler::{ml, MittagLeffler, MlInterpolant};

fn oracle() -> Vec<(f64, f64, f64, f64)> {
    include_str!("data/ml_oracle.csv")
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], v[1], v[2], v[3])
        })
        .collect()
}

#[test]
fn evaluator_matches_extended_precision_oracle() {
    let rows = oracle();
    assert_eq!(rows.len(), 4000);
    let mut worst = 0.0f64;
    for (a, d, x, v) in rows {
        let got = MittagLeffler::new(a, d).unwrap().eval(x);
        let rel = ((got - v) / v).abs();
        worst = worst.max(rel);
        assert!(rel <= 1e-10, "E_{{{a},{d}}}(-{x}) = {got}, oracle {v}");
    }
    eprintln!("worst relative error {worst:e}");
}

#[test]
fn interpolant_matches_oracle() {
    let mut cache: Vec<((f64, f64), MlInterpolant)> = Vec::new();
    for (a, d, x, v) in oracle() {
        if !cache.iter().any(|(k, _)| *k == (a, d)) {
            cache.push(((a, d), MlInterpolant::new(a, d).unwrap()));
        }
        let f = &cache.iter().find(|(k, _)| *k == (a, d)).unwrap().1;
        assert!(((f.eval(x) - v) / v).abs() <= 1e-10, "{a} {d} {x}");
    }
}

#[test]
fn closed_forms() {
    assert!((ml(1.0, 1.0, -1.0).unwrap() - (-1f64).exp()).abs() < 1e-10);
    // e·erfc(1)
    assert!((ml(0.5, 1.0, -1.0).unwrap() - 0.427_583_576_155_807).abs() < 1e-10);
}
