//! One-dimensional quadrature: adaptive Gauss-Kronrod, Gauss-Legendre rules and
//! geometrically graded composite rules for integrands with endpoint singularities.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration over `[a, b]` with optional
/// interior breakpoints. Converges when the summed error estimate is below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    assert!(points.len() >= 2);
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let mut evals = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (v, e) = kronrod15(&mut f, w[0], w[1]);
            evals += 15;
            intervals.push((w[0], w[1], v, e));
        }
    }
    loop {
        let value: f64 = intervals.iter().map(|iv| iv.2).sum();
        let error: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !value.is_finite() {
            return Err(Error::QuadratureNonConvergent("non-finite integrand".into()));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Integral { value, error, evaluations: evals });
        }
        if intervals.len() >= max_intervals {
            // Round-off plateau: accept if the estimate is within a few ulps of the target.
            if error <= 50.0 * abs_tol.max(rel_tol * value.abs()) {
                return Ok(Integral { value, error, evaluations: evals });
            }
            return Err(Error::QuadratureNonConvergent(format!(
                "error estimate {error:e} exceeds tolerance after {} intervals",
                intervals.len()
            )));
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (a, b, _, _) = intervals.swap_remove(worst);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(Integral { value, error, evaluations: evals });
        }
        let (v1, e1) = kronrod15(&mut f, a, m);
        let (v2, e2) = kronrod15(&mut f, m, b);
        evals += 30;
        intervals.push((a, m, v1, e1));
        intervals.push((m, b, v2, e2));
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { z } else { p1 };
                let pn1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
                let dz = pn / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }

    /// Composite rule with `panels` equal panels over `[a, b]`.
    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let w = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * w;
                self.integrate(lo, lo + w, &mut f)
            })
            .sum()
    }
}

/// Panel endpoints of `[a, b]` graded geometrically toward both ends:
/// the panels shrink by `ratio` per level over `levels` levels on each side.
pub fn two_sided_geometric_panels(a: f64, b: f64, ratio: f64, levels: usize) -> Vec<f64> {
    let m = 0.5 * (a + b);
    let half = m - a;
    let mut left = vec![a];
    let mut offsets: Vec<f64> = (1..=levels).map(|k| half * ratio.powi((levels - k + 1) as i32)).collect();
    offsets.push(half);
    left.extend(offsets.iter().map(|o| a + o));
    let mut right: Vec<f64> = offsets.iter().rev().skip(1).map(|o| b - o).collect();
    right.push(b);
    left.extend(right);
    left
}
