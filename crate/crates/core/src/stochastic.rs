//! Monte Carlo samples of X(E(t)), the stable process X with
//! E e^{iξ·X(s)} = e^{-s ψ(ξ)} run on the inverse α-stable subordinator E.
//! The time-t marginal has density Z(t, ·).
//!
//! Samples are produced in shards of [`SHARD_SIZE`]; shard k draws from the
//! ChaCha8 stream k of the user seed, so the output does not depend on the
//! thread count.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::{cell_masses, KernelKind};
use crate::params::ModelParams;
use crate::symbol::{Atom, SpectralMeasure, Symbol};

pub const SHARD_SIZE: usize = 4096;
/// Atoms used to sample a measure given by a density.
pub const SAMPLING_ATOMS: usize = 64;
/// Largest fraction of samples allowed to fall outside the grid.
pub const MAX_OUTSIDE_FRACTION: f64 = 1e-3;
/// Grid size for one-dimensional KS references. Heavy tails force wide
/// grids, and the CDF error scales with the spacing.
pub const KS_POINTS_1D: usize = 1 << 20;

/// Standard symmetric β-stable variate, E e^{iξS} = e^{-|ξ|^β}
/// (Chambers-Mallows-Stuck).
pub fn symmetric_stable_variate<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.gen::<f64>() - 0.5);
    if beta == 1.0 {
        return v.tan();
    }
    let w = exponential(rng);
    (beta * v).sin() / v.cos().powf(1.0 / beta) * (((1.0 - beta) * v).cos() / w).powf((1.0 - beta) / beta)
}

/// Standard one-sided α-stable variate, E e^{-pD} = e^{-p^α} (Kanter).
pub fn positive_stable_variate<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    // U uniform on (0, π)
    let u = PI * open_unit(rng);
    let w = exponential(rng);
    (alpha * u).sin() / u.sin().powf(1.0 / alpha) * (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha)
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

fn exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -open_unit(rng).ln()
}

fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

/// Runs `draw` for every sample index in deterministic shards and flattens the
/// `width` outputs of each draw.
fn sharded<F>(n: usize, width: usize, seed: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let shards = n.div_ceil(SHARD_SIZE);
    let mut out = vec![0.0; n * width];
    out.par_chunks_mut(SHARD_SIZE * width).enumerate().for_each(|(k, chunk)| {
        let mut rng = shard_rng(seed, k);
        for slot in chunk.chunks_mut(width) {
            draw(&mut rng, slot);
        }
    });
    debug_assert_eq!(out.len().div_ceil(SHARD_SIZE * width.max(1)), shards);
    out
}

fn sampling_atoms(measure: &SpectralMeasure) -> Result<Vec<Atom>> {
    if !(1..=3).contains(&measure.dimension()) {
        return Err(Error::UnsupportedDimension(measure.dimension()));
    }
    measure.to_atoms(SAMPLING_ATOMS)
}

/// Adds s^{1/β} Σ_i w_i^{1/β} S_i η_i to `out`.
fn stable_vector<R: Rng + ?Sized>(beta: f64, atoms: &[(f64, &[f64])], s: f64, rng: &mut R, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let scale = s.powf(1.0 / beta);
    for (w, eta) in atoms {
        let x = scale * w * symmetric_stable_variate(beta, rng);
        for (o, e) in out.iter_mut().zip(eta.iter()) {
            *o += x * e;
        }
    }
}

/// n samples (flattened, d per sample) with characteristic function
/// e^{-t_op ψ(ξ)}. A stable vector with atomic spectral measure Σ w_i δ_{η_i}
/// is the sum of independent symmetric variables w_i^{1/β} S_i along η_i.
pub fn sample_stable(beta: f64, measure: &SpectralMeasure, t_op: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(t_op > 0.0) {
        return Err(Error::NonPositiveTime(t_op));
    }
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::UnsupportedParameters(format!("beta = {beta} not in (0, 2]")));
    }
    let atoms = sampling_atoms(measure)?;
    let scaled: Vec<(f64, &[f64])> = atoms.iter().map(|a| (a.weight.powf(1.0 / beta), a.direction.as_slice())).collect();
    Ok(sharded(n, measure.dimension(), seed, |rng, slot| stable_vector(beta, &scaled, t_op, rng, slot)))
}

/// n samples of E(t) = (t/D)^α with D standard one-sided α-stable.
pub fn sample_inverse_subordinator(alpha: f64, t: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::UnsupportedParameters(format!("alpha = {alpha} not in (0, 1)")));
    }
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(sharded(n, 1, seed, |rng, slot| slot[0] = (t / positive_stable_variate(alpha, rng)).powf(alpha)))
}

/// Samples of X(E(t)).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEnsemble {
    pub params: ModelParams,
    pub t: f64,
    pub n: usize,
    pub seed: u64,
    /// Flattened, `params.dimension` coordinates per sample.
    pub samples: Vec<f64>,
}

impl McEnsemble {
    pub fn sample(&self, i: usize) -> &[f64] {
        let d = self.params.dimension;
        &self.samples[i * d..(i + 1) * d]
    }
}

pub fn sample_time_changed(params: &ModelParams, measure: &SpectralMeasure, t: f64, n: usize, seed: u64) -> Result<McEnsemble> {
    params.validate()?;
    if measure.dimension() != params.dimension {
        return Err(Error::InvalidInput("measure and params dimensions differ".into()));
    }
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let (a, b) = (params.alpha, params.beta);
    let atoms = sampling_atoms(measure)?;
    let scaled: Vec<(f64, &[f64])> = atoms.iter().map(|at| (at.weight.powf(1.0 / b), at.direction.as_slice())).collect();
    let samples = sharded(n, params.dimension, seed, |rng, slot| {
        let e = (t / positive_stable_variate(a, rng)).powf(a);
        stable_vector(b, &scaled, e, rng, slot);
    });
    Ok(McEnsemble { params: *params, t, n, seed, samples })
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic 5% critical value of the one-sample statistic.
pub fn ks_critical(n: usize) -> f64 {
    1.358 / (n as f64).sqrt()
}

/// Asymptotic 5% critical value of the two-sample statistic.
pub fn ks_critical_two_sample(n: usize, m: usize) -> f64 {
    1.358 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// CDF of Z(t, ·) in d = 1 from exact cell masses, linear within cells.
#[derive(Debug, Clone)]
pub struct GridCdf {
    /// Cell edges x_j - h/2, j = 0..=N.
    edges: Vec<f64>,
    values: Vec<f64>,
}

impl GridCdf {
    /// Anchored by symmetry at F(0) = 1/2.
    pub fn from_cell_masses(grid: &Grid, masses: &[f64]) -> Self {
        let n = grid.points;
        let h = grid.spacing();
        let o = n / 2;
        let mut values = vec![0.0; n + 1];
        values[o] = 0.5 - 0.5 * masses[o];
        values[o + 1] = 0.5 + 0.5 * masses[o];
        for j in o + 1..n {
            values[j + 1] = values[j] + masses[j];
        }
        for j in (0..o).rev() {
            values[j] = values[j + 1] - masses[j];
        }
        let edges = (0..=n).map(|j| grid.coordinate(0) - 0.5 * h + j as f64 * h).collect();
        Self { edges, values }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.edges.len() - 1;
        if x <= self.edges[0] {
            return self.values[0].max(0.0);
        }
        if x >= self.edges[n] {
            return self.values[n].min(1.0);
        }
        let h = self.edges[1] - self.edges[0];
        let j = (((x - self.edges[0]) / h) as usize).min(n - 1);
        let r = (x - self.edges[j]) / h;
        self.values[j] + r * (self.values[j + 1] - self.values[j])
    }

    pub fn lower(&self) -> f64 {
        self.edges[0]
    }

    pub fn upper(&self) -> f64 {
        *self.edges.last().expect("non-empty")
    }
}

/// Distance between the samples and Z(t, ·): the KS statistic in d = 1, the
/// L1 distance between histogram and cell masses of Z in d = 2.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalReport {
    pub dimension: usize,
    pub n: usize,
    pub seed: u64,
    pub statistic: f64,
    /// 5% KS critical value (d = 1), or twice the expected multinomial L1
    /// noise (d = 2).
    pub threshold: f64,
    pub outside_fraction: f64,
    pub pass: bool,
}

pub fn empirical_vs_z(
    params: &ModelParams,
    symbol: &Symbol,
    grid: &Grid,
    t: f64,
    n: usize,
    seed: u64,
) -> Result<EmpiricalReport> {
    let ens = sample_time_changed(params, symbol.measure(), t, n, seed)?;
    empirical_report(&ens, symbol, grid)
}

/// Compares an existing ensemble with Z(t, ·) on `grid`.
pub fn empirical_report(ens: &McEnsemble, symbol: &Symbol, grid: &Grid) -> Result<EmpiricalReport> {
    let params = &ens.params;
    let masses = cell_masses(KernelKind::Z, params, symbol, grid, ens.t)?;
    let half = 0.5 * grid.extent + 0.5 * grid.spacing();
    let outside = (0..ens.n).filter(|&i| ens.sample(i).iter().any(|x| x.abs() >= half)).count();
    let outside_fraction = outside as f64 / ens.n as f64;
    if outside_fraction > MAX_OUTSIDE_FRACTION {
        return Err(Error::GridTooSmall(format!(
            "{:.3}% of the samples fall outside the grid",
            100.0 * outside_fraction
        )));
    }
    let (statistic, threshold) = match params.dimension {
        1 => {
            let cdf = GridCdf::from_cell_masses(grid, &masses);
            (ks_statistic(&ens.samples, |x| cdf.eval(x)), ks_critical(ens.n))
        }
        2 => {
            let h = grid.spacing();
            let mut counts = vec![0.0; grid.len()];
            for i in 0..ens.n {
                let x = ens.sample(i);
                if let Some(k) = grid.nearest(&[x[0].clamp(-half, half - 0.5 * h), x[1].clamp(-half, half - 0.5 * h)]) {
                    counts[k] += 1.0;
                }
            }
            let nf = ens.n as f64;
            let l1: f64 = counts.iter().zip(&masses).map(|(c, m)| (c / nf - m).abs()).sum();
            // E|Bin(n, m)/n - m| ≈ sqrt(2 m (1 - m) / (π n))
            let noise: f64 = masses.iter().map(|m| (2.0 * m.max(0.0) * (1.0 - m).max(0.0) / (PI * nf)).sqrt()).sum();
            (l1, 2.0 * noise)
        }
        d => return Err(Error::UnsupportedDimension(d)),
    };
    Ok(EmpiricalReport {
        dimension: params.dimension,
        n: ens.n,
        seed: ens.seed,
        statistic,
        threshold,
        outside_fraction,
        pass: statistic <= threshold,
    })
}
