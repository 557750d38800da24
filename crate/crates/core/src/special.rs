//! Gamma-function helpers shared by the Mittag-Leffler evaluator and the kernels.

use std::f64::consts::PI;

/// Euler Gamma function.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

/// Reciprocal Gamma function 1/Γ(x); entire, zero at the non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x < 0.5 {
        // reflection: 1/Γ(x) = sin(πx) Γ(1-x) / π
        sin_pi(x) * gamma(1.0 - x) / PI
    } else {
        1.0 / gamma(x)
    }
}

/// g_ρ(t) = t^{ρ-1}/Γ(ρ), the Riemann-Liouville kernel.
pub fn riesz_kernel(rho: f64, t: f64) -> f64 {
    t.powf(rho - 1.0) * rgamma(rho)
}

/// Surface area of the unit sphere S^{d-1}.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rgamma_poles_are_zero() {
        for k in 0..6 {
            assert_eq!(rgamma(-(k as f64)), 0.0);
        }
    }

    #[test]
    fn rgamma_matches_known_values() {
        assert!((rgamma(0.5) - 1.0 / PI.sqrt()).abs() < 1e-15);
        // Γ(-1/2) = -2√π
        assert!((rgamma(-0.5) + 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        assert!((rgamma(5.0) - 1.0 / 24.0).abs() < 1e-16);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }
}
