//! Periodic tensor grids on [-L/2, L/2)^d and the discrete Fourier transform
//! conventions tying node values to samples of the continuous transform
//! f̂(ξ) = ∫ f(x) e^{-iξ·x} dx.
//!
//! With x_j = -L/2 + jh and ξ_k = 2πk/L, k ∈ [-N/2, N/2):
//!
//! * synthesis: f(x_j) ≈ L^{-d} Σ_k f̂(ξ_k) e^{iξ_k·x_j}
//! * analysis:  f̂(ξ_k) ≈ h^d Σ_j f(x_j) e^{-iξ_k·x_j}
//!
//! Both are exact inverses of each other, so h^d Σ_j f(x_j) = f̂(0) holds to
//! round-off for any synthesized field.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub dimension: usize,
    /// Per-axis extent L.
    pub extent: f64,
    /// Per-axis node count N.
    pub points: usize,
}

impl Grid {
    pub fn new(dimension: usize, extent: f64, points: usize) -> Result<Self> {
        let g = Self { dimension, extent, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dimension) {
            return Err(Error::UnsupportedDimension(self.dimension));
        }
        if !(self.extent > 0.0) || !self.extent.is_finite() {
            return Err(Error::InvalidGrid(format!("extent {} must be positive and finite", self.extent)));
        }
        if self.points < 16 || !self.points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("N = {} must be a power of two >= 16", self.points)));
        }
        let total = (self.points as f64).powi(self.dimension as i32);
        if total > 2f64.powi(28) {
            return Err(Error::InvalidGrid(format!("{total} nodes exceed the supported size")));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.points as f64
    }

    /// h^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same node count, extent multiplied by `s`.
    pub fn rescaled(&self, s: f64) -> Self {
        Self { extent: self.extent * s, ..*self }
    }

    /// Coordinate of 1-D node j.
    pub fn coordinate(&self, j: usize) -> f64 {
        -0.5 * self.extent + j as f64 * self.spacing()
    }

    /// Axis coordinates.
    pub fn axis(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coordinate(j)).collect()
    }

    /// Signed frequency index of FFT slot k.
    pub fn signed_index(&self, k: usize) -> i64 {
        if k < self.points / 2 {
            k as i64
        } else {
            k as i64 - self.points as i64
        }
    }

    pub fn frequency(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.signed_index(k) as f64 / self.extent
    }

    /// Multi-index (row-major, last axis fastest) of a flat index.
    pub fn unflatten(&self, mut i: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.dimension).rev() {
            idx[a] = i % self.points;
            i /= self.points;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.dimension).fold(0, |acc, &j| acc * self.points + j)
    }

    /// Node position of a flat index (unused trailing components are 0).
    pub fn node(&self, i: usize) -> [f64; 3] {
        let idx = self.unflatten(i);
        let mut x = [0.0; 3];
        for a in 0..self.dimension {
            x[a] = self.coordinate(idx[a]);
        }
        x
    }

    /// Frequency vector of a flat FFT index.
    pub fn wavevector(&self, i: usize) -> [f64; 3] {
        let idx = self.unflatten(i);
        let mut k = [0.0; 3];
        for a in 0..self.dimension {
            k[a] = self.frequency(idx[a]);
        }
        k
    }

    /// (-1)^{Σ k} for a flat FFT index: the phase of the shifted origin.
    pub fn phase_sign(&self, i: usize) -> f64 {
        let idx = self.unflatten(i);
        let s: i64 = (0..self.dimension).map(|a| self.signed_index(idx[a])).sum();
        if s.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Flat index of the node at the origin.
    pub fn origin(&self) -> usize {
        let half = [self.points / 2; 3];
        self.flatten(&half[..self.dimension])
    }

    /// Whether a flat index lies on the boundary of the box.
    pub fn on_boundary(&self, i: usize) -> bool {
        let idx = self.unflatten(i);
        (0..self.dimension).any(|a| idx[a] == 0 || idx[a] == self.points - 1)
    }

    /// Nearest node to a point, if inside the box.
    pub fn nearest(&self, x: &[f64]) -> Option<usize> {
        let mut idx = [0usize; 3];
        for a in 0..self.dimension {
            let j = ((x[a] + 0.5 * self.extent) / self.spacing()).round();
            if j < 0.0 || j >= self.points as f64 {
                return None;
            }
            idx[a] = j as usize;
        }
        Some(self.flatten(&idx[..self.dimension]))
    }

    /// Transform samples f̂(ξ_k) in FFT order from a function of the wavevector.
    pub fn sample_spectrum<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let d = self.dimension;
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let k = self.wavevector(i);
                f(&k[..d])
            })
            .collect()
    }

    /// Node values from transform samples. Returns the real part and the
    /// largest imaginary residue.
    pub fn synthesize(&self, spectrum: &[f64]) -> (Vec<f64>, f64) {
        assert_eq!(spectrum.len(), self.len());
        let mut buf: Vec<Complex64> =
            spectrum.par_iter().enumerate().map(|(i, &v)| Complex64::new(v * self.phase_sign(i), 0.0)).collect();
        fft_nd(&mut buf, self.points, self.dimension, true);
        let scale = self.extent.powi(-(self.dimension as i32));
        let imag = buf.par_iter().map(|c| (c.im * scale).abs()).reduce(|| 0.0, f64::max);
        (buf.into_par_iter().map(|c| c.re * scale).collect(), imag)
    }

    /// Transform samples f̂(ξ_k), FFT order, of node values.
    pub fn analyze(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.len());
        let mut buf: Vec<Complex64> = values.par_iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut buf, self.points, self.dimension, false);
        let h = self.cell_volume();
        buf.par_iter_mut().enumerate().for_each(|(i, c)| *c *= h * self.phase_sign(i));
        buf
    }

    /// Node values of the function whose transform samples are `spectrum`.
    pub fn synthesize_complex(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = spectrum.par_iter().enumerate().map(|(i, &c)| c * self.phase_sign(i)).collect();
        fft_nd(&mut buf, self.points, self.dimension, true);
        let scale = self.extent.powi(-(self.dimension as i32));
        buf.into_par_iter().map(|c| c.re * scale).collect()
    }

    /// Periodic convolution K ⋆ v where `multiplier` holds K̂(ξ_k) in FFT order.
    pub fn convolve(&self, multiplier: &[f64], values: &[f64]) -> Vec<f64> {
        let mut spec = self.analyze(values);
        spec.par_iter_mut().zip(multiplier.par_iter()).for_each(|(c, m)| *c *= *m);
        self.synthesize_complex(&spec)
    }
}

/// In-place unnormalized multi-dimensional FFT on a row-major cube.
pub fn fft_nd(data: &mut [Complex64], n: usize, d: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft: Arc<dyn Fft<f64>> = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    // last axis: contiguous lines
    data.par_chunks_mut(n).for_each(|line| fft.process(line));
    for axis in 0..d.saturating_sub(1) {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        // each block holds `stride` interleaved lines along `axis`
        data.par_chunks_mut(block).for_each(|blk| {
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            for s in 0..stride {
                for j in 0..n {
                    line[j] = blk[j * stride + s];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for j in 0..n {
                    blk[j * stride + s] = line[j];
                }
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1, 10.0, 100).is_err());
        assert!(Grid::new(1, 10.0, 8).is_err());
        assert!(Grid::new(1, -1.0, 64).is_err());
        assert!(Grid::new(4, 1.0, 64).is_err());
        assert!(Grid::new(2, 1.0, 64).is_ok());
    }

    #[test]
    fn origin_and_frequencies() {
        let g = Grid::new(2, 8.0, 16).unwrap();
        assert_eq!(g.node(g.origin()), [0.0, 0.0, 0.0]);
        assert_eq!(g.signed_index(8), -8);
        assert_eq!(g.wavevector(0), [0.0, 0.0, 0.0]);
        assert_eq!(g.nearest(&[0.01, -0.02]), Some(g.origin()));
    }

    #[test]
    fn gaussian_round_trip_and_mass() {
        for d in 1..=3 {
            let g = Grid::new(d, 20.0, 64).unwrap();
            // transform of exp(-|x|²/2) is (2π)^{d/2} exp(-|ξ|²/2)
            let spec = g.sample_spectrum(|k| {
                let r2: f64 = k.iter().map(|x| x * x).sum();
                (2.0 * std::f64::consts::PI).powf(d as f64 / 2.0) * (-0.5 * r2).exp()
            });
            let (v, imag) = g.synthesize(&spec);
            assert!(imag < 1e-12);
            let x0 = g.origin();
            assert!((v[x0] - 1.0).abs() < 1e-12);
            let mass: f64 = v.iter().sum::<f64>() * g.cell_volume();
            assert!((mass - spec[0]).abs() < 1e-12 * spec[0]);
            let back = g.analyze(&v);
            for (a, b) in back.iter().zip(&spec) {
                assert!((a.re - b).abs() < 1e-12 && a.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn convolution_with_unit_multiplier_is_identity() {
        let g = Grid::new(2, 10.0, 32).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let w = g.convolve(&vec![1.0; g.len()], &v);
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
