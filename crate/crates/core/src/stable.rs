//! Densities of the standard symmetric β-stable law (E e^{iξX} = e^{-|ξ|^β})
//! and of the standard one-sided α-stable law (E e^{-pD} = e^{-p^α}).
//!
//! Both use single-integral representations of the form
//! c/x ∫ g(φ) e^{-g(φ)} dφ with g monotone in φ, so the integrand is a single
//! bump located where g = 1. Breakpoints are placed at fixed levels of ln g.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::special::{gamma, sin_pi};

const REL_TOL: f64 = 1e-12;

/// ∫_a^b g e^{-g} dφ where `ln_g` is monotone on (a, b).
fn bump_integral(a: f64, b: f64, ln_g: impl Fn(f64) -> f64) -> Result<f64> {
    let f = |phi: f64| {
        let l = ln_g(phi);
        if !(l < 700.0) || l < -745.0 {
            0.0
        } else {
            (l - l.exp()).exp()
        }
    };
    let increasing = ln_g(a + 1e-9 * (b - a)) < ln_g(b - 1e-9 * (b - a));
    // φ at which ln g crosses `level`
    let crossing = |level: f64| -> Option<f64> {
        let (mut lo, mut hi) = (a, b);
        let below = |phi: f64| (ln_g(phi) < level) == increasing;
        if !below(lo + 1e-15 * (b - a)) || below(hi - 1e-15 * (b - a)) {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * (b - a) {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    };
    let mut points = vec![a, b];
    for level in [-37.0, -8.0, -3.0, -1.0, 0.0, 1.0, 2.0, 3.5, 6.5] {
        if let Some(p) = crossing(level) {
            points.push(p);
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    Ok(integrate_adaptive(f, &points, 0.0, REL_TOL, 2000)?.value)
}

/// Density of the standard symmetric β-stable law at x.
pub fn symmetric_stable_density(beta: f64, x: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::UnsupportedParameters(format!("beta = {beta} not in (0, 2]")));
    }
    let x = x.abs();
    if beta == 2.0 {
        return Ok((-x * x / 4.0).exp() / (2.0 * PI.sqrt()));
    }
    if beta == 1.0 {
        return Ok(1.0 / (PI * (1.0 + x * x)));
    }
    if x < 1e-7 {
        // f(x) = (1/πβ) Σ (-1)^k Γ((2k+1)/β) x^{2k}/(2k)!
        return Ok((gamma(1.0 / beta) - gamma(3.0 / beta) * x * x / 2.0) / (PI * beta));
    }
    if let Some(v) = symmetric_stable_tail(beta, x) {
        return Ok(v);
    }
    let e = beta / (beta - 1.0);
    let lnx = x.ln();
    let ln_g = |theta: f64| {
        let (c, s) = (theta.cos(), (beta * theta).sin());
        e * (lnx + c.ln() - s.ln()) + ((beta - 1.0) * theta).cos().ln() - c.ln()
    };
    let i = bump_integral(0.0, 0.5 * PI, ln_g)?;
    Ok(beta * i / (PI * (beta - 1.0).abs() * x))
}

/// Large-x expansion f(x) = (1/π) Σ_{k≥1} (-1)^{k+1} Γ(βk+1) sin(πβk/2) x^{-βk-1}/k!,
/// used when it converges to full precision within a few terms.
fn symmetric_stable_tail(beta: f64, x: f64) -> Option<f64> {
    let xb = x.powf(-beta);
    if xb > 1e-3 {
        return None;
    }
    let mut sum = 0.0;
    let mut pow = 1.0 / x;
    let mut fact = 1.0;
    for k in 1..40 {
        pow *= xb;
        fact *= k as f64;
        let sn = sin_pi(0.5 * beta * k as f64);
        if sn == 0.0 {
            continue;
        }
        let term = gamma(beta * k as f64 + 1.0) * sn * pow / fact;
        let term = if k % 2 == 1 { term } else { -term };
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            return Some(sum / PI);
        }
    }
    None
}

/// Symmetric stable density with characteristic function e^{-c|ξ|^β}.
pub fn scaled_symmetric_stable_density(beta: f64, c: f64, x: f64) -> Result<f64> {
    let sigma = c.powf(1.0 / beta);
    Ok(symmetric_stable_density(beta, x / sigma)? / sigma)
}

/// Density w_α(s) of the one-sided α-stable law with Laplace transform e^{-p^α}.
pub fn stable_subordinator_density(alpha: f64, s: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::UnsupportedParameters(format!("alpha = {alpha} not in (0, 1)")));
    }
    if !(s > 0.0) {
        return Ok(0.0);
    }
    if let Some(v) = subordinator_tail(alpha, s) {
        return Ok(v);
    }
    let r = 1.0 / (1.0 - alpha);
    let lns = s.ln();
    let ln_g = |phi: f64| {
        let (sa, sp) = ((alpha * phi).sin(), phi.sin());
        -alpha * r * lns + r * (sa.ln() - sp.ln()) + ((1.0 - alpha) * phi).sin().ln() - sa.ln()
    };
    let i = bump_integral(0.0, PI, ln_g)?;
    Ok(alpha * r * i / (PI * s))
}

/// Large-s expansion w_α(s) = (1/π) Σ_{k≥1} (-1)^{k+1} Γ(αk+1) sin(παk) s^{-αk-1}/k!.
fn subordinator_tail(alpha: f64, s: f64) -> Option<f64> {
    let sa = s.powf(-alpha);
    if sa > 1e-3 {
        return None;
    }
    let mut sum = 0.0;
    let mut pow = 1.0 / s;
    let mut fact = 1.0;
    for k in 1..40 {
        pow *= sa;
        fact *= k as f64;
        let sn = sin_pi(alpha * k as f64);
        if sn == 0.0 {
            continue;
        }
        let term = gamma(alpha * k as f64 + 1.0) * sn * pow / fact;
        let term = if k % 2 == 1 { term } else { -term };
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            return Some(sum / PI);
        }
    }
    None
}

const TABLE_WIDTH: f64 = 0.25;
const TABLE_DEGREE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Law {
    Symmetric(f64),
    Subordinator(f64),
}

/// Piecewise Chebyshev table of ln f against ln x for one of the two laws,
/// with the exact small- and large-argument forms outside the table.
#[derive(Debug, Clone)]
pub struct DensityTable {
    law: Law,
    lo: f64,
    hi: f64,
    width: f64,
    panels: Vec<Vec<f64>>,
}

impl DensityTable {
    /// Table for the standard symmetric β-stable density.
    pub fn symmetric(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 2.0) {
            return Err(Error::UnsupportedParameters(format!("beta = {beta} not in (0, 2)")));
        }
        let law = Law::Symmetric(beta);
        if beta == 1.0 {
            return Ok(Self { law, lo: 0.0, hi: 0.0, width: 1.0, panels: Vec::new() });
        }
        Self::build(law, 1e-7f64.ln(), 1e3f64.ln() / beta)
    }

    /// Table for the one-sided α-stable density w_α.
    pub fn subordinator(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::UnsupportedParameters(format!("alpha = {alpha} not in (0, 1)")));
        }
        // below s_lo, ln w_α < -700
        let k = alpha / (1.0 - alpha);
        let c = (1.0 - alpha) * alpha.powf(k);
        let lo = -(700.0 / c).ln() / k;
        Self::build(Law::Subordinator(alpha), lo, 1e3f64.ln() / alpha)
    }

    fn exact(&self, x: f64) -> Result<f64> {
        match self.law {
            Law::Symmetric(b) => symmetric_stable_density(b, x),
            Law::Subordinator(a) => stable_subordinator_density(a, x),
        }
    }

    fn build(law: Law, lo: f64, hi: f64) -> Result<Self> {
        let count = ((hi - lo) / TABLE_WIDTH).ceil().max(1.0) as usize;
        let width = (hi - lo) / count as f64;
        let n = TABLE_DEGREE + 1;
        let cheb: Vec<f64> = (0..n).map(|i| (PI * (i as f64 + 0.5) / n as f64).cos()).collect();
        let mut table = Self { law, lo, hi, width, panels: Vec::with_capacity(count) };
        for p in 0..count {
            let a = lo + p as f64 * width;
            let mut vals = Vec::with_capacity(n);
            for t in &cheb {
                vals.push(table.exact((a + 0.5 * width * (t + 1.0)).exp())?.ln());
            }
            let coeffs = (0..n)
                .map(|j| {
                    let s: f64 = vals
                        .iter()
                        .enumerate()
                        .map(|(i, v)| v * (PI * j as f64 * (i as f64 + 0.5) / n as f64).cos())
                        .sum();
                    s * if j == 0 { 1.0 } else { 2.0 } / n as f64
                })
                .collect();
            table.panels.push(coeffs);
        }
        Ok(table)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = match self.law {
            Law::Symmetric(1.0) => return 1.0 / (PI * (1.0 + x * x)),
            Law::Symmetric(_) => x.abs(),
            Law::Subordinator(_) if !(x > 0.0) => return 0.0,
            Law::Subordinator(_) => x,
        };
        let u = x.ln();
        if u < self.lo {
            return match self.law {
                Law::Symmetric(b) => (gamma(1.0 / b) - gamma(3.0 / b) * x * x / 2.0) / (PI * b),
                Law::Subordinator(_) => 0.0,
            };
        }
        if u > self.hi {
            return self.exact(x).unwrap_or(0.0);
        }
        let p = (((u - self.lo) / self.width) as usize).min(self.panels.len() - 1);
        let a = self.lo + p as f64 * self.width;
        let t = 2.0 * (u - a) / self.width - 1.0;
        let c = &self.panels[p];
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        (t * b1 - b2 + c[0]).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    /// (1/π) ∫_0^∞ cos(ξx) e^{-ξ^β} dξ by adaptive quadrature.
    fn fourier_oracle(beta: f64, x: f64) -> f64 {
        let upper = 45f64.powf(1.0 / beta);
        let mut pts: Vec<f64> = (0..=400).map(|i| upper * (i as f64 / 400.0).powi(2)).collect();
        pts.dedup();
        let f = |xi: f64| (xi * x).cos() * (-xi.powf(beta)).exp();
        crate::quadrature::integrate_adaptive(f, &pts, 1e-15, 1e-13, 20000).unwrap().value / PI
    }

    #[test]
    fn symmetric_density_matches_fourier_inversion() {
        for &beta in &[0.6, 0.9, 1.2, 1.5, 1.8] {
            for &x in &[0.0, 1e-3, 0.3, 1.0, 2.5, 7.0] {
                let f = symmetric_stable_density(beta, x).unwrap();
                let o = fourier_oracle(beta, x);
                assert!((f - o).abs() < 1e-9 * o.max(1e-3), "beta {beta} x {x}: {f} vs {o}");
            }
        }
    }

    #[test]
    fn symmetric_density_continuity_at_switches() {
        for &beta in &[0.7, 1.3, 1.7] {
            let x = 1e3f64.powf(1.0 / beta);
            let a = symmetric_stable_density(beta, x * (1.0 - 1e-13)).unwrap();
            let b = symmetric_stable_density(beta, x * (1.0 + 1e-13)).unwrap();
            assert!((a - b).abs() < 1e-10 * a, "{beta}: {a} {b}");
        }
    }

    #[test]
    fn levy_closed_form() {
        // α = 1/2: w(s) = s^{-3/2} e^{-1/(4s)} / (2√π)
        for &s in &[0.05, 0.3, 1.0, 4.0, 50.0, 1e4, 1e7] {
            let w = stable_subordinator_density(0.5, s).unwrap();
            let exact = s.powf(-1.5) * (-0.25 / s).exp() / (2.0 * PI.sqrt());
            assert!((w - exact).abs() <= 1e-10 * exact, "s {s}: {w} vs {exact}");
        }
        let w1 = stable_subordinator_density(0.5, 1.0).unwrap();
        assert!((w1 - 0.219_695_644_733_861_3).abs() < 1e-8);
    }

    #[test]
    fn subordinator_density_normalized() {
        for &a in &[0.3, 0.5, 0.8] {
            // s = e^u
            let gl = GaussLegendre::new(20);
            let total = gl.composite(-30.0, 60.0, 900, |u| {
                let s = f64::exp(u);
                s * stable_subordinator_density(a, s).unwrap()
            });
            assert!((total - 1.0).abs() < 1e-6, "{a}: {total}");
        }
    }

    #[test]
    fn tables_match_direct_evaluation() {
        for &b in &[0.6, 1.0, 1.5, 1.9] {
            let t = DensityTable::symmetric(b).unwrap();
            for i in 0..300 {
                let x = 10f64.powf(-8.0 + 14.0 * (i as f64 + 0.31) / 300.0);
                let (a, e) = (t.eval(x), symmetric_stable_density(b, x).unwrap());
                assert!((a - e).abs() <= 1e-12 * e, "beta {b} x {x}: {a} {e}");
            }
        }
        for &al in &[0.2, 0.5, 0.9] {
            let t = DensityTable::subordinator(al).unwrap();
            for i in 0..300 {
                let s = 10f64.powf(-3.0 + 12.0 * (i as f64 + 0.31) / 300.0);
                let (a, e) = (t.eval(s), stable_subordinator_density(al, s).unwrap());
                assert!(a == e || (a - e).abs() <= 1e-12 * e * e.ln().abs().max(1.0), "alpha {al} s {s}: {a} {e}");
            }
        }
    }

    #[test]
    fn subordinator_tail_ratio() {
        let a = 0.7;
        let r: Vec<f64> =
            [1e2, 1e3, 1e4].iter().map(|&t: &f64| stable_subordinator_density(a, t).unwrap() * t.powf(1.0 + a)).collect();
        let c = a / gamma(1.0 - a);
        for v in r {
            assert!((v / c - 1.0).abs() < 0.05);
        }
    }
}
