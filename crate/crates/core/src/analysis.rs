//! Decay-exponent fits, critical-exponent scans, the asymptotic profile
//! u ≈ A Z + B Y of solutions and Lipschitz ratios in time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::{kernel_field, lp_norm, regularized_values, sized_grid, weak_lp_quasinorm, FieldOptions, KernelKind};
use crate::params::ModelParams;
use crate::solver::{nonlinearity, SolutionTrajectory};
use crate::symbol::Symbol;

pub const DEFAULT_SLOPE_TOL: f64 = 0.02;
/// Largest RMS log residual of a clean flat trace.
pub const FLAT_RESIDUAL: f64 = 1e-3;
pub const MIN_FIT_POINTS: usize = 5;
/// Relative change below which a norm counts as stable under refinement.
pub const STABLE_CHANGE: f64 = 0.01;
/// Relative growth per refinement above which a norm counts as divergent.
pub const DIVERGENT_GROWTH: f64 = 0.10;

/// Decay exponent of ‖K(t)‖_p: -(αd/β)(1 - 1/p) for Z, plus α - 1 for Y.
pub fn theoretical_slope(kind: KernelKind, params: &ModelParams, p: f64) -> f64 {
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let z = -(params.alpha * params.d() / params.beta) * (1.0 - inv);
    match kind {
        KernelKind::Z => z,
        KernelKind::Y => z + params.alpha - 1.0,
        // G decays on the operational clock
        KernelKind::G => -(params.d() / params.beta) * (1.0 - inv),
    }
}

/// Decay exponent of ‖u(t)‖_p for small data in L_{p′}:
/// -(αd/β)(1/p′ - 1/p).
pub fn solution_slope(params: &ModelParams, p_prime: f64, p: f64) -> f64 {
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    -(params.alpha * params.d() / params.beta) * (1.0 / p_prime - inv)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    pub r_squared: f64,
    /// Root-mean-square residual of the log-log line; r² is uninformative
    /// for a flat trace.
    pub residual_rms: f64,
    pub theoretical_slope: f64,
    pub slope_tol: f64,
    pub pass: bool,
}

impl DecayFit {
    /// The trace is a clean power law: r² ≥ 0.999, or, when the expected
    /// exponent is zero and r² is meaningless, log residuals below 0.1%.
    pub fn clean(&self) -> bool {
        self.r_squared >= 0.999 || (self.theoretical_slope == 0.0 && self.residual_rms < FLAT_RESIDUAL)
    }
}

/// Least-squares line through (log t, log ‖·‖) for the times t ≥ 1.
pub fn fit_decay(theoretical: f64, times: &[f64], norms: &[f64], slope_tol: f64) -> Result<DecayFit> {
    if times.len() != norms.len() {
        return Err(Error::InvalidInput(format!("{} times but {} norms", times.len(), norms.len())));
    }
    let (ts, ns): (Vec<f64>, Vec<f64>) =
        times.iter().zip(norms).filter(|(t, _)| **t >= 1.0).map(|(t, n)| (*t, *n)).unzip();
    if ts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints { needed: MIN_FIT_POINTS, got: ts.len() });
    }
    if ns.iter().any(|n| !(*n > 0.0) || !n.is_finite()) {
        return Err(Error::InvalidInput("norms must be positive and finite for a log-log fit".into()));
    }
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let (slope, intercept, r2) = least_squares(&x, &y)?;
    let residual_rms =
        (x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
    Ok(DecayFit {
        times: ts,
        norms: ns,
        fitted_slope: slope,
        fitted_intercept: intercept,
        r_squared: r2,
        residual_rms,
        theoretical_slope: theoretical,
        slope_tol,
        pass: (slope - theoretical).abs() <= slope_tol,
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidInput("fit needs at least two distinct times".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    Ok((slope, my - slope * mx, r2))
}

/// n log-spaced times from a to b inclusive.
pub fn log_times(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Grids for the times of a decay fit: `points` nodes per axis and, per
/// time, the extent from [`sized_grid`] rounded up to a power of two. The
/// rounding keeps the grids from being exactly self-similar, so the fit is
/// not a restatement of the scaling law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayGrid {
    pub points: usize,
    pub tail_tol: f64,
}

impl DecayGrid {
    pub fn for_dimension(d: usize) -> Self {
        let points = match d {
            1 => 1 << 16,
            2 => 2048,
            _ => 128,
        };
        Self { points, tail_tol: 0.05 }
    }

    pub fn grid(&self, kind: KernelKind, params: &ModelParams, symbol: &Symbol, t: f64) -> Result<Grid> {
        let g = sized_grid(kind, params, symbol, t, self.points, self.tail_tol)?;
        Grid::new(params.dimension, 2f64.powf(g.extent.log2().ceil()), self.points)
    }
}

impl Default for DecayGrid {
    fn default() -> Self {
        Self::for_dimension(1)
    }
}

/// Norms of K(t), one grid per time. With `regularize` the origin node is
/// replaced by the local singular model where K is unbounded.
pub fn kernel_norms(
    kind: KernelKind,
    params: &ModelParams,
    symbol: &Symbol,
    grids: &DecayGrid,
    times: &[f64],
    regularize: bool,
    norm: impl Fn(&[f64], f64) -> f64,
) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| {
            let grid = grids.grid(kind, params, symbol, t)?;
            let f = kernel_field(kind, params, symbol, &grid, t, &FieldOptions::unchecked())?;
            let h = grid.cell_volume();
            Ok(if regularize { norm(&regularized_values(&f, symbol), h) } else { norm(&f.values, h) })
        })
        .collect()
}

/// Whether K(t) ∈ L_p: 1 ≤ p < κ₁ (Z) or κ₂ (Y), and p = ∞ only for a
/// bounded kernel, d < β (Z) or d < 2β (Y).
pub fn admissible(kind: KernelKind, params: &ModelParams, p: f64) -> bool {
    let (limit, order) = match kind {
        KernelKind::Z => (params.kappa1(), params.beta),
        KernelKind::Y => (params.kappa2(), 2.0 * params.beta),
        KernelKind::G => return p >= 1.0,
    };
    if p.is_infinite() {
        return params.d() < order;
    }
    p >= 1.0 && p < limit
}

/// Fit of ‖K(t)‖_p over `times` against the theoretical exponent.
pub fn fit_kernel_decay(
    kind: KernelKind,
    params: &ModelParams,
    symbol: &Symbol,
    p: f64,
    times: &[f64],
    grids: &DecayGrid,
    slope_tol: f64,
) -> Result<DecayFit> {
    if !admissible(kind, params, p) {
        return Err(Error::UnsupportedParameters(format!("{kind}(t) is not in L_{p} for these parameters")));
    }
    // K ≥ 0, so ‖K‖₁ = K̂(0), which the raw node sum reproduces exactly.
    let norms = kernel_norms(kind, params, symbol, grids, times, p > 1.0, |v, h| lp_norm(v, h, p))?;
    fit_decay(theoretical_slope(kind, params, p), times, &norms, slope_tol)
}

/// Fit of the weak-L_p quasi-norm |K(t)|_{p,∞}. At the critical exponent the
/// theoretical slope is -α for Z (p = κ₁) and -α - 1 for Y (p = κ₂).
pub fn fit_weak_decay(
    kind: KernelKind,
    params: &ModelParams,
    symbol: &Symbol,
    p: f64,
    times: &[f64],
    grids: &DecayGrid,
    slope_tol: f64,
) -> Result<DecayFit> {
    let norms = kernel_norms(kind, params, symbol, grids, times, true, |v, h| weak_lp_quasinorm(v, h, p))?;
    fit_decay(theoretical_slope(kind, params, p), times, &norms, slope_tol)
}

/// Fit of ‖u(t)‖_p over the mesh nodes in [t_lo, t_hi].
pub fn fit_solution_decay(traj: &SolutionTrajectory, p: f64, t_lo: f64, t_hi: f64, slope_tol: f64) -> Result<DecayFit> {
    let idx: Vec<usize> = (0..traj.times.len()).filter(|&k| traj.times[k] >= t_lo && traj.times[k] <= t_hi).collect();
    let times: Vec<f64> = idx.iter().map(|&k| traj.times[k]).collect();
    let norms: Vec<f64> = idx.iter().map(|&k| traj.norm(k, p)).collect();
    let theory = solution_slope(&traj.params, traj.options.p_prime, p);
    fit_decay(theory, &times, &norms, slope_tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Behaviour {
    Stable,
    Divergent,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub p: f64,
    /// ‖K(t)‖_p at each refinement level.
    pub norms: Vec<f64>,
    /// Relative change between successive levels.
    pub changes: Vec<f64>,
    pub expected: Behaviour,
    pub observed: Behaviour,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdScan {
    pub kind: KernelKind,
    pub params: ModelParams,
    pub t: f64,
    pub critical_exponent: f64,
    pub extent: f64,
    pub points: Vec<usize>,
    pub refinement_factor: usize,
    pub stable_change: f64,
    pub divergent_growth: f64,
    pub rows: Vec<ThresholdRow>,
}

impl ThresholdScan {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanOptions {
    pub t: f64,
    /// Nodes per axis at the coarsest level.
    pub base_points: usize,
    /// Number of refinements after the coarsest level.
    pub levels: usize,
    /// Node count multiplier per refinement.
    pub refinement_factor: usize,
    /// Tail tolerance fixing the box; L_p norms with p > 1 are insensitive
    /// to the far field, so this can be much looser than for masses.
    pub tail_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { t: 1.0, base_points: 256, levels: 3, refinement_factor: 2, tail_tol: 0.05 }
    }
}

/// ‖K(t)‖_p of the raw node values on a fixed box while the spacing is
/// refined. Below the critical exponent the norms settle; at and above it the
/// origin singularity makes them grow.
pub fn critical_threshold_scan(
    kind: KernelKind,
    params: &ModelParams,
    symbol: &Symbol,
    p_list: &[f64],
    opts: &ScanOptions,
) -> Result<ThresholdScan> {
    if opts.refinement_factor < 2 || opts.levels == 0 {
        return Err(Error::InvalidInput("a scan needs at least one refinement with factor >= 2".into()));
    }
    let critical = match kind {
        KernelKind::Z => params.kappa1(),
        KernelKind::Y => params.kappa2(),
        KernelKind::G => f64::INFINITY,
    };
    let coarse = sized_grid(kind, params, symbol, opts.t, opts.base_points, opts.tail_tol)?;
    let points: Vec<usize> =
        (0..=opts.levels).map(|l| opts.base_points * opts.refinement_factor.pow(l as u32)).collect();
    let mut norms = vec![Vec::with_capacity(points.len()); p_list.len()];
    for &n in &points {
        let grid = Grid::new(params.dimension, coarse.extent, n)?;
        let f = kernel_field(kind, params, symbol, &grid, opts.t, &FieldOptions::unchecked())?;
        let h = grid.cell_volume();
        let level: Vec<f64> = p_list.par_iter().map(|&p| lp_norm(&f.values, h, p)).collect();
        for (row, v) in norms.iter_mut().zip(level) {
            row.push(v);
        }
    }
    let rows = p_list
        .iter()
        .zip(norms)
        .map(|(&p, norms)| {
            let changes: Vec<f64> = norms.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
            let last = *changes.last().expect("at least one refinement");
            let observed = if last.abs() < STABLE_CHANGE {
                Behaviour::Stable
            } else if changes.iter().all(|c| *c >= DIVERGENT_GROWTH) {
                Behaviour::Divergent
            } else {
                Behaviour::Indeterminate
            };
            let expected = if p < critical { Behaviour::Stable } else { Behaviour::Divergent };
            ThresholdRow { p, norms, changes, expected, observed, pass: expected == observed }
        })
        .collect();
    Ok(ThresholdScan {
        kind,
        params: *params,
        t: opts.t,
        critical_exponent: critical,
        extent: coarse.extent,
        points,
        refinement_factor: opts.refinement_factor,
        stable_change: STABLE_CHANGE,
        divergent_growth: DIVERGENT_GROWTH,
        rows,
    })
}

/// Distance of a solution from its asymptotic profile A Z(t) + B Y(t).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileError {
    pub times: Vec<f64>,
    /// ‖u(t) - A Z(t) - B Y(t)‖_p.
    pub errors: Vec<f64>,
    /// errors / ‖u(t)‖_p.
    pub normalized: Vec<f64>,
    pub a: f64,
    pub b: f64,
    /// Estimated contribution of s > T to B.
    pub b_truncation_estimate: f64,
    pub p: f64,
    /// Hypotheses of the convergence result that fail for this run.
    pub gate_violations: Vec<String>,
}

impl ProfileError {
    /// Normalized error at the last time below its value at the first.
    pub fn decreasing(&self) -> bool {
        match (self.normalized.first(), self.normalized.last()) {
            (Some(a), Some(b)) => b < a,
            _ => false,
        }
    }
}

/// Hypotheses of the profile convergence result for the run's (p, p′).
pub fn profile_gate(params: &ModelParams, p: f64, p_prime: f64) -> Vec<String> {
    let mut v = Vec::new();
    if !(params.beta > 1.0 && params.beta < 2.0) {
        v.push(format!("β = {} not in (1, 2)", params.beta));
    }
    if !(p < params.kappa1()) {
        v.push(format!("p = {p} not below κ₁ = {}", params.kappa1()));
    }
    let mu = decay_rate_of_nonlinearity(params, p_prime);
    if !(mu > 1.0) {
        v.push(format!("(αd/(βp′))(γ-1) = {mu} not above 1"));
    }
    v
}

fn decay_rate_of_nonlinearity(params: &ModelParams, p_prime: f64) -> f64 {
    params.alpha * params.d() / (params.beta * p_prime) * (params.gamma - 1.0)
}

/// A = ∫u₀ and B = λ ∫_0^∞ ∫ |u|^{γ-1}u dy ds, the time integral taken by the
/// trapezoid rule on the mesh plus a power-law tail beyond T, then the error
/// trace at the mesh nodes nearest to `times`.
pub fn profile_error(traj: &SolutionTrajectory, p: f64, times: &[f64]) -> Result<ProfileError> {
    let params = &traj.params;
    let h = traj.grid.cell_volume();
    let a = traj.mass(0);
    let nl: Vec<f64> =
        traj.fields.iter().map(|u| u.iter().map(|&v| nonlinearity(v, params.gamma)).sum::<f64>() * h).collect();
    let body: f64 = traj.times.windows(2).zip(nl.windows(2)).map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1])).sum();
    let mu = decay_rate_of_nonlinearity(params, traj.options.p_prime);
    let t_end = traj.final_time();
    let tail = if mu > 1.0 { nl.last().copied().unwrap_or(0.0) * t_end / (mu - 1.0) } else { f64::INFINITY };
    let b = params.lambda * (body + tail);
    let b_truncation_estimate = (params.lambda * tail).abs();

    let opts = FieldOptions::unchecked();
    let mut out_t = Vec::with_capacity(times.len());
    let mut errors = Vec::with_capacity(times.len());
    let mut normalized = Vec::with_capacity(times.len());
    for &t in times {
        let k = traj.nearest_index(t);
        let tk = traj.times[k];
        if tk <= 0.0 {
            continue;
        }
        let z = kernel_field(KernelKind::Z, params, &traj.symbol, &traj.grid, tk, &opts)?;
        let y = kernel_field(KernelKind::Y, params, &traj.symbol, &traj.grid, tk, &opts)?;
        let diff: Vec<f64> =
            traj.fields[k].iter().zip(&z.values).zip(&y.values).map(|((u, zv), yv)| u - a * zv - b * yv).collect();
        let e = lp_norm(&diff, h, p);
        out_t.push(tk);
        errors.push(e);
        normalized.push(e / traj.norm(k, p));
    }
    Ok(ProfileError {
        times: out_t,
        errors,
        normalized,
        a,
        b,
        b_truncation_estimate,
        p,
        gate_violations: profile_gate(params, p, traj.options.p_prime),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzTrace {
    pub pairs: Vec<(f64, f64)>,
    /// ‖K(t) - K(s)‖_p / |t - s| per pair.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Difference quotients in time of K in L_p on a fixed grid.
pub fn lipschitz_trace(
    kind: KernelKind,
    params: &ModelParams,
    symbol: &Symbol,
    grid: &Grid,
    p: f64,
    epsilon: f64,
    pairs: &[(f64, f64)],
) -> Result<LipschitzTrace> {
    if !(epsilon > 0.0) {
        return Err(Error::NonPositiveTime(epsilon));
    }
    let opts = FieldOptions::unchecked();
    let mut ratios = Vec::with_capacity(pairs.len());
    for &(t, s) in pairs {
        if t < epsilon || s < epsilon {
            return Err(Error::InvalidInput(format!("pair ({t}, {s}) reaches below ε = {epsilon}")));
        }
        if t == s {
            return Err(Error::InvalidInput(format!("pair ({t}, {s}) has equal times")));
        }
        let a = kernel_field(kind, params, symbol, grid, t, &opts)?;
        let b = kernel_field(kind, params, symbol, grid, s, &opts)?;
        let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        ratios.push(lp_norm(&diff, grid.cell_volume(), p) / (t - s).abs());
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(LipschitzTrace { pairs: pairs.to_vec(), ratios, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::SpectralMeasure;

    fn one_d(alpha: f64, beta: f64) -> (ModelParams, Symbol) {
        let p = ModelParams::linear(alpha, beta, 1).unwrap();
        (p, Symbol::new(SpectralMeasure::symmetric_1d(1.0).unwrap(), beta).unwrap())
    }

    #[test]
    fn exponent_formulas() {
        let p = ModelParams::linear(0.6, 1.5, 1).unwrap();
        assert!((theoretical_slope(KernelKind::Z, &p, f64::INFINITY) + 0.4).abs() < 1e-15);
        assert_eq!(theoretical_slope(KernelKind::Z, &p, 1.0), 0.0);
        assert!((theoretical_slope(KernelKind::Y, &p, 1.0) + 0.4).abs() < 1e-15);
        let q = ModelParams::linear(0.5, 1.5, 2).unwrap();
        assert!((theoretical_slope(KernelKind::Z, &q, q.kappa1()) + 0.5).abs() < 1e-12);
        let r = ModelParams::linear(0.5, 1.2, 3).unwrap();
        assert!((theoretical_slope(KernelKind::Y, &r, r.kappa2()) + 1.5).abs() < 1e-12);
        assert!((solution_slope(&q, 1.0, f64::INFINITY) + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let t = log_times(1.0, 64.0, 7);
        let n: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(-0.7)).collect();
        let f = fit_decay(-0.7, &t, &n, 0.02).unwrap();
        assert!((f.fitted_slope + 0.7).abs() < 1e-12 && f.r_squared > 0.999999 && f.pass);
        assert!((f.fitted_intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn too_few_points_or_early_times_are_rejected() {
        let t = [1.0, 2.0, 4.0];
        assert!(matches!(fit_decay(0.0, &t, &[1.0; 3], 0.02), Err(Error::InsufficientPoints { needed: 5, got: 3 })));
        let early = [0.1, 0.2, 0.4, 1.0, 2.0, 4.0];
        assert!(matches!(fit_decay(0.0, &early, &[1.0; 6], 0.02), Err(Error::InsufficientPoints { got: 3, .. })));
    }

    #[test]
    fn kernel_decay_slopes() {
        let (p, s) = one_d(0.6, 1.5);
        let t = log_times(1.0, 64.0, 7);
        let g = DecayGrid { points: 1 << 14, ..DecayGrid::default() };
        let zi = fit_kernel_decay(KernelKind::Z, &p, &s, f64::INFINITY, &t, &g, 0.02).unwrap();
        assert!(zi.pass && zi.r_squared > 0.999, "{zi:?}");
        let z1 = fit_kernel_decay(KernelKind::Z, &p, &s, 1.0, &t, &g, 0.02).unwrap();
        assert!(z1.pass, "{z1:?}");
        let y1 = fit_kernel_decay(KernelKind::Y, &p, &s, 1.0, &t, &g, 0.02).unwrap();
        assert!(y1.pass && y1.r_squared > 0.999, "{y1:?}");
    }

    #[test]
    fn no_divergence_when_the_critical_exponent_is_infinite() {
        let (p, s) = one_d(0.5, 1.5);
        let opts = ScanOptions { base_points: 1 << 12, levels: 2, ..ScanOptions::default() };
        let scan = critical_threshold_scan(KernelKind::Z, &p, &s, &[2.0, 4.0, 8.0], &opts).unwrap();
        assert!(scan.critical_exponent.is_infinite());
        assert!(scan.pass(), "{:?}", scan.rows);
    }

    #[test]
    fn lipschitz_ratios_settle() {
        let (p, s) = one_d(0.5, 1.5);
        let g = Grid::new(1, 400.0, 1 << 13).unwrap();
        let pairs = [(1.25, 1.0), (1.125, 1.0), (1.0625, 1.0)];
        let tr = lipschitz_trace(KernelKind::Z, &p, &s, &g, 2.0, 0.5, &pairs).unwrap();
        let lo = tr.ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(tr.max_ratio < 2.0 * lo && lo > 0.0, "{:?}", tr.ratios);
        assert!(lipschitz_trace(KernelKind::Z, &p, &s, &g, 2.0, 0.5, &[(1.0, 1.0)]).is_err());
        assert!(lipschitz_trace(KernelKind::Z, &p, &s, &g, 2.0, 0.5, &[(0.25, 1.0)]).is_err());
    }
}
