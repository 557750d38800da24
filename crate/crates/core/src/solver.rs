//! Picard iteration for the mild form
//!
//! u(t) = Z(t) ⋆ u₀ + λ ∫_0^t Y(t - s) ⋆ |u(s)|^{γ-1} u(s) ds
//!
//! on a time mesh 0 = t₀ < … < t_M = T. In Fourier variables the memory term
//! reads λ ∫_0^t (t - s)^{α-1} E_{α,α}(-(t - s)^α ψ) N̂(s) ds. The bounded factor
//! E_{α,α}(-(t - s)^α ψ) N̂(s) is interpolated linearly between mesh nodes and
//! the weight (t - s)^{α-1} is integrated exactly on each panel.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::lp_norm;
use crate::mittag_leffler::MlInterpolant;
use crate::params::ModelParams;
use crate::quadrature::GaussLegendre;
use crate::special::rgamma;
use crate::symbol::Symbol;

/// Which set of existence hypotheses a run must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    Local,
    GlobalSmall,
    GlobalPositive,
}

/// Hypotheses of the local, small-data global and non-negative global
/// existence results, evaluated for given (p, p′).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub p: f64,
    pub p_prime: f64,
    /// Auxiliary exponent p̄ of the non-negative global result, when one exists.
    pub p_bar: Option<f64>,
    pub kappa: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub satisfied_local: bool,
    pub satisfied_global_small: bool,
    pub satisfied_global_positive: bool,
    pub violated_conditions: Vec<String>,
}

impl GateReport {
    pub fn satisfied(&self, mode: GateMode) -> bool {
        match mode {
            GateMode::Local => self.satisfied_local,
            GateMode::GlobalSmall => self.satisfied_global_small,
            GateMode::GlobalPositive => self.satisfied_global_positive,
        }
    }
}

struct Checks<'a> {
    prefix: &'a str,
    ok: bool,
    violated: &'a mut Vec<String>,
}

impl Checks<'_> {
    fn require(&mut self, holds: bool, what: String) {
        if !holds {
            self.ok = false;
            self.violated.push(format!("{}: {}", self.prefix, what));
        }
    }
}

/// Evaluates every inequality of the three existence results. Never fails:
/// violations are listed in the report whatever `mode` is requested.
pub fn validate_params(params: &ModelParams, p: f64, p_prime: f64, _mode: GateMode) -> GateReport {
    let (a, b, g, d) = (params.alpha, params.beta, params.gamma, params.d());
    let kappa = params.kappa();
    let mut violated = Vec::new();

    let local_lo = 1f64.max(kappa).max(d * (g - 1.0) / b);
    let mut c = Checks { prefix: "local", ok: true, violated: &mut violated };
    c.require(p > local_lo && p.is_finite(), format!("max(1, κ, d(γ-1)/β) = {local_lo} < p = {p} < ∞"));
    let local = c.ok;

    let mut c = Checks { prefix: "global_small", ok: local, violated: &mut violated };
    let upper = d / b * (g - 1.0);
    if d < b {
        c.require(p_prime == 1.0, format!("p' = {p_prime} must equal 1 when d < β"));
        c.require(1.0 < upper, format!("1 < (d/β)(γ-1) = {upper}"));
    } else {
        c.require(d / b < p_prime && p_prime < upper, format!("d/β = {} < p' = {p_prime} < (d/β)(γ-1) = {upper}", d / b));
    }
    if !local {
        c.violated.push("global_small: local hypotheses fail".into());
    }
    let global_small = c.ok;

    let mut c = Checks { prefix: "global_positive", ok: true, violated: &mut violated };
    c.require(params.lambda < 0.0, format!("λ = {} < 0", params.lambda));
    let pos_lo = 1f64.max(kappa).max(d * g / b);
    c.require(p > pos_lo && p.is_finite(), format!("max(1, κ, dγ/β) = {pos_lo} < p = {p} < ∞"));
    c.require(a + a * d / (b * p) < 1.0, format!("α + αd/(βp) = {} < 1", a + a * d / (b * p)));
    // p̄αd/((p̄-1)βp) < 1 and p̄αdγ/(βp) < 1 with p̄ = 2 for α < 1/2, p̄ ∈ (1, 1/α) otherwise
    let ratio = b * p / (a * d);
    let p_bar = if a < 0.5 {
        Some(2.0)
    } else {
        let lo = if ratio > 1.0 { ratio / (ratio - 1.0) } else { f64::INFINITY };
        let hi = (1.0 / a).min(ratio / g);
        (lo.max(1.0) < hi).then(|| 0.5 * (lo.max(1.0) + hi))
    };
    match p_bar {
        Some(pb) => {
            c.require(pb / (pb - 1.0) < ratio, format!("p̄αd/((p̄-1)βp) < 1 with p̄ = {pb}"));
            c.require(pb * g < ratio, format!("p̄αdγ/(βp) < 1 with p̄ = {pb}"));
        }
        None => c.require(false, "no p̄ in (1, 1/α) satisfies both p̄ conditions".into()),
    }
    let global_positive = c.ok;

    GateReport {
        p,
        p_prime,
        p_bar,
        kappa,
        kappa1: params.kappa1(),
        kappa2: params.kappa2(),
        satisfied_local: local,
        satisfied_global_small: global_small,
        satisfied_global_positive: global_positive,
        violated_conditions: violated,
    }
}

/// t_k = T (k/M)^ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    #[serde(rename = "M", alias = "m", default = "default_steps")]
    pub steps: usize,
    /// Grading exponent; max(1, 2/α) when absent.
    #[serde(default)]
    pub rho: Option<f64>,
}

fn default_steps() -> usize {
    128
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self { steps: default_steps(), rho: None }
    }
}

impl MeshSpec {
    pub fn times(&self, alpha: f64, big_t: f64) -> Result<Vec<f64>> {
        if self.steps < 1 {
            return Err(Error::InvalidInput("time mesh needs at least one step".into()));
        }
        if !(big_t > 0.0) || !big_t.is_finite() {
            return Err(Error::NonPositiveTime(big_t));
        }
        let rho = self.rho.unwrap_or((2.0 / alpha).max(1.0));
        if !(rho >= 1.0) {
            return Err(Error::InvalidInput(format!("grading exponent {rho} must be at least 1")));
        }
        let m = self.steps as f64;
        Ok((0..=self.steps).map(|k| big_t * (k as f64 / m).powf(rho)).collect())
    }
}

/// Nodes appended by [`extend_solution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ExtensionMesh {
    /// t_{k+1} = t_k + step.
    Uniform { step: f64 },
    /// t_{k+1} = t_k · ratio.
    Geometric { ratio: f64 },
}

impl ExtensionMesh {
    fn times(&self, from: f64, to: f64) -> Result<Vec<f64>> {
        if !(to > from) {
            return Err(Error::InvalidInput(format!("extension end {to} must exceed {from}")));
        }
        let mut out = Vec::new();
        let mut t = from;
        loop {
            let next = match *self {
                ExtensionMesh::Uniform { step } if step > 0.0 => t + step,
                ExtensionMesh::Geometric { ratio } if ratio > 1.0 => t * ratio,
                _ => return Err(Error::InvalidInput(format!("invalid extension mesh {self:?}"))),
            };
            // snap the final node onto `to`
            if next >= to * (1.0 - 1e-9) || out.len() > 1_000_000 {
                out.push(to);
                return Ok(out);
            }
            out.push(next);
            t = next;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    /// Stop once the E_T distance between successive iterates is at most `tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Exponent p of the E_T norm and of the gates.
    pub p: f64,
    pub p_prime: f64,
    pub gate_mode: GateMode,
    pub gate_override: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 60, p: 2.0, p_prime: 1.0, gate_mode: GateMode::Local, gate_override: false }
    }
}

#[derive(Debug, Clone)]
pub struct SolutionTrajectory {
    pub params: ModelParams,
    pub symbol: Symbol,
    pub grid: Grid,
    pub times: Vec<f64>,
    /// u(t_k, ·); `fields[0]` is u₀.
    pub fields: Vec<Vec<f64>>,
    /// Z(t_k) ⋆ u₀.
    pub linear: Vec<Vec<f64>>,
    /// E_T distances between successive Picard iterates.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub options: SolveOptions,
    pub gate: GateReport,
    pub gate_overridden: bool,
}

impl SolutionTrajectory {
    /// Largest ratio r_{k+1}/r_k from the second iterate on.
    pub fn contraction(&self) -> Option<f64> {
        let r = &self.residuals;
        r.windows(2)
            .skip(1)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .fold(None, |acc: Option<f64>, q| Some(acc.map_or(q, |a| a.max(q))))
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("non-empty mesh")
    }

    pub fn mass(&self, k: usize) -> f64 {
        self.fields[k].iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn norm(&self, k: usize, p: f64) -> f64 {
        lp_norm(&self.fields[k], self.grid.cell_volume(), p)
    }

    /// Index of the mesh node closest to t.
    pub fn nearest_index(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        best
    }
}

/// Product-integration weights w_j with
/// ∫_0^{t_n} (t_n - s)^{α-1} f(s) ds ≈ Σ_{j ≤ n} w_j f(t_j)
/// for f linear between mesh nodes.
pub fn product_weights(alpha: f64, times: &[f64], n: usize) -> Vec<f64> {
    let gl = GaussLegendre::new(16);
    let tn = times[n];
    let mut w = vec![0.0; n + 1];
    for i in 0..n {
        let big_a = tn - times[i];
        let big_b = tn - times[i + 1];
        let dlt = big_a - big_b;
        if dlt <= 0.0 {
            continue;
        }
        // ∫_B^A (σ - B) σ^{α-1} dσ and ∫_B^A (A - σ) σ^{α-1} dσ
        let (left, right) = if big_b == 0.0 {
            let l = big_a.powf(alpha + 1.0) / (alpha + 1.0);
            (l, big_a.powf(alpha + 1.0) / alpha - l)
        } else if dlt < 0.5 * big_b {
            let l = gl.integrate(big_b, big_a, |s| (s - big_b) * s.powf(alpha - 1.0));
            let r = gl.integrate(big_b, big_a, |s| (big_a - s) * s.powf(alpha - 1.0));
            (l, r)
        } else {
            let i0 = (big_a.powf(alpha) - big_b.powf(alpha)) / alpha;
            let i1 = (big_a.powf(alpha + 1.0) - big_b.powf(alpha + 1.0)) / (alpha + 1.0);
            (i1 - big_b * i0, big_a * i0 - i1)
        };
        w[i] += left / dlt;
        w[i + 1] += right / dlt;
    }
    w
}

/// |v|^{γ-1} v.
pub fn nonlinearity(v: f64, gamma: f64) -> f64 {
    if gamma == 2.0 {
        v.abs() * v
    } else {
        v.abs().powf(gamma - 1.0) * v
    }
}

/// Entries of the cached multiplier table, beyond which multipliers are
/// recomputed in every iteration.
const MULTIPLIER_CACHE_LIMIT: usize = 1 << 24;

struct Engine<'a> {
    params: ModelParams,
    grid: &'a Grid,
    psi: Vec<f64>,
    ml_z: MlInterpolant,
    ml_y: MlInterpolant,
    opts: SolveOptions,
}

impl<'a> Engine<'a> {
    fn new(params: &ModelParams, symbol: &Symbol, grid: &'a Grid, opts: SolveOptions) -> Result<Self> {
        if grid.dimension != params.dimension || symbol.dimension() != params.dimension {
            return Err(Error::InvalidInput("grid, measure and params dimensions differ".into()));
        }
        Ok(Self {
            params: *params,
            grid,
            psi: grid.sample_spectrum(|k| symbol.psi(k)),
            ml_z: MlInterpolant::new(params.alpha, 1.0)?,
            ml_y: MlInterpolant::new(params.alpha, params.alpha)?,
            opts,
        })
    }

    fn linear(&self, u0_hat: &[Complex64], t: f64) -> Vec<f64> {
        let ta = t.powf(self.params.alpha);
        let spec: Vec<Complex64> =
            u0_hat.par_iter().zip(&self.psi).map(|(c, &p)| c * self.ml_z.eval(ta * p)).collect();
        self.grid.synthesize_complex(&spec)
    }

    fn nonlinear_spectrum(&self, u: &[f64]) -> Vec<Complex64> {
        let g = self.params.gamma;
        let n: Vec<f64> = u.par_iter().map(|&v| nonlinearity(v, g)).collect();
        self.grid.analyze(&n)
    }

    fn e_norm(&self, t: f64, v: &[f64]) -> (f64, f64) {
        let h = self.grid.cell_volume();
        let p = self.opts.p;
        let w = t.powf(self.params.alpha * self.params.d() / (self.params.beta * p));
        (lp_norm(v, h, p) + lp_norm(v, h, 1.0), w * lp_norm(v, h, f64::INFINITY))
    }

    /// Picard iteration for the nodes `first..times.len()`, with the earlier
    /// nodes held fixed as history.
    fn iterate(
        &self,
        times: &[f64],
        first: usize,
        fields: &mut [Vec<f64>],
        linear: &[Vec<f64>],
    ) -> Result<(Vec<f64>, bool)> {
        let a = self.params.alpha;
        let lambda = self.params.lambda;
        let m = times.len();
        let weights: Vec<Vec<f64>> = (0..m).map(|n| if n < first { Vec::new() } else { product_weights(a, times, n) }).collect();
        let pairs: usize = (first..m).map(|n| n + 1).sum();
        let len = self.grid.len();
        let cache: Option<Vec<Vec<f64>>> = (pairs * len <= MULTIPLIER_CACHE_LIMIT).then(|| {
            (first..m)
                .flat_map(|n| (0..=n).map(move |j| (n, j)))
                .map(|(n, j)| self.multiplier(times[n] - times[j]))
                .collect()
        });
        let mut offsets = vec![0usize; m];
        for n in first + 1..m {
            offsets[n] = offsets[n - 1] + n;
        }
        let linear_hat: Vec<Vec<Complex64>> = linear[first..].iter().map(|l| self.grid.analyze(l)).collect();
        let mut spectra: Vec<Vec<Complex64>> = fields.iter().map(|u| self.nonlinear_spectrum(u)).collect();
        let mut residuals = Vec::new();
        if lambda == 0.0 {
            residuals.push(0.0);
            return Ok((residuals, true));
        }
        let mut first_residual = None;
        for _ in 0..self.opts.max_iter {
            let mut new_fields = Vec::with_capacity(m - first);
            for n in first..m {
                let w = &weights[n];
                let acc: Vec<Complex64> = (0..len)
                    .into_par_iter()
                    .map(|k| {
                        let mut s = Complex64::new(0.0, 0.0);
                        for j in 0..=n {
                            let e = match &cache {
                                Some(c) => c[offsets[n] + j][k],
                                None => self.ml_y.eval((times[n] - times[j]).powf(a) * self.psi[k]),
                            };
                            s += spectra[j][k] * (w[j] * e);
                        }
                        linear_hat[n - first][k] + lambda * s
                    })
                    .collect();
                new_fields.push(self.grid.synthesize_complex(&acc));
            }
            let (mut s1, mut s2) = (0.0f64, 0.0f64);
            for (n, nf) in (first..m).zip(&new_fields) {
                let diff: Vec<f64> = nf.iter().zip(&fields[n]).map(|(x, y)| x - y).collect();
                let (a1, a2) = self.e_norm(times[n], &diff);
                s1 = s1.max(a1);
                s2 = s2.max(a2);
            }
            let r = s1 + s2;
            residuals.push(r);
            for (n, nf) in (first..m).zip(new_fields) {
                fields[n] = nf;
            }
            if !r.is_finite() {
                return Ok((residuals, false));
            }
            if r <= self.opts.tol {
                return Ok((residuals, true));
            }
            let r1 = *first_residual.get_or_insert(r);
            if r > 1e8 * r1.max(f64::MIN_POSITIVE) {
                return Ok((residuals, false));
            }
            for n in first..m {
                spectra[n] = self.nonlinear_spectrum(&fields[n]);
            }
        }
        Ok((residuals, false))
    }

    fn multiplier(&self, tau: f64) -> Vec<f64> {
        let ta = tau.powf(self.params.alpha);
        self.psi.par_iter().map(|&p| self.ml_y.eval(ta * p)).collect()
    }
}

fn check_initial(params: &ModelParams, grid: &Grid, u0: &[f64]) -> Result<()> {
    params.validate()?;
    grid.validate()?;
    if u0.len() != grid.len() {
        return Err(Error::InvalidInput(format!("u0 has {} samples, grid has {} nodes", u0.len(), grid.len())));
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("u0 contains non-finite samples".into()));
    }
    Ok(())
}

/// Runs the iteration and returns the trajectory whether or not it converged.
pub fn picard_run(
    u0: &[f64],
    params: &ModelParams,
    symbol: &Symbol,
    grid: &Grid,
    big_t: f64,
    mesh: &MeshSpec,
    opts: &SolveOptions,
) -> Result<SolutionTrajectory> {
    check_initial(params, grid, u0)?;
    let gate = validate_params(params, opts.p, opts.p_prime, opts.gate_mode);
    let ok = gate.satisfied(opts.gate_mode);
    if !ok && !opts.gate_override {
        return Err(Error::GateFailed(gate.violated_conditions.join("; ")));
    }
    let times = mesh.times(params.alpha, big_t)?;
    let engine = Engine::new(params, symbol, grid, *opts)?;
    let u0_hat = grid.analyze(u0);
    let mut linear: Vec<Vec<f64>> = vec![u0.to_vec()];
    linear.extend(times[1..].iter().map(|&t| engine.linear(&u0_hat, t)));
    let mut fields = linear.clone();
    let (residuals, converged) = engine.iterate(&times, 1, &mut fields, &linear)?;
    Ok(SolutionTrajectory {
        params: *params,
        symbol: symbol.clone(),
        grid: *grid,
        times,
        fields,
        linear,
        residuals,
        converged,
        options: *opts,
        gate,
        gate_overridden: !ok,
    })
}

/// As [`picard_run`], failing with `NotConverged` when the iteration does not
/// reach the tolerance.
pub fn picard_solve(
    u0: &[f64],
    params: &ModelParams,
    symbol: &Symbol,
    grid: &Grid,
    big_t: f64,
    mesh: &MeshSpec,
    opts: &SolveOptions,
) -> Result<SolutionTrajectory> {
    let traj = picard_run(u0, params, symbol, grid, big_t, mesh, opts)?;
    if !traj.converged {
        return Err(Error::NotConverged {
            iterations: traj.residuals.len(),
            residual: traj.residuals.last().copied().unwrap_or(f64::NAN),
        });
    }
    Ok(traj)
}

/// Continues a converged trajectory to `t_new`. The memory integral over the
/// existing mesh is carried along exactly as history; only the new nodes are
/// iterated.
pub fn extend_solution(traj: &SolutionTrajectory, t_new: f64, mesh: &ExtensionMesh) -> Result<SolutionTrajectory> {
    if !traj.converged {
        return Err(Error::InvalidInput("only converged trajectories can be extended".into()));
    }
    let new_times = mesh.times(traj.final_time(), t_new)?;
    let engine = Engine::new(&traj.params, &traj.symbol, &traj.grid, traj.options)?;
    let u0_hat = traj.grid.analyze(&traj.fields[0]);
    let first = traj.times.len();
    let mut times = traj.times.clone();
    times.extend(&new_times);
    let mut linear = traj.linear.clone();
    linear.extend(new_times.iter().map(|&t| engine.linear(&u0_hat, t)));
    let mut fields = traj.fields.clone();
    let last = traj.fields[first - 1].clone();
    fields.extend(new_times.iter().map(|_| last.clone()));
    let (residuals, converged) = engine.iterate(&times, first, &mut fields, &linear)?;
    if !converged {
        return Err(Error::NotConverged {
            iterations: residuals.len(),
            residual: residuals.last().copied().unwrap_or(f64::NAN),
        });
    }
    Ok(SolutionTrajectory { times, fields, linear, residuals, converged, ..traj.clone() })
}

/// Largest relative defect of ∫u(t_n) = ∫u₀ + λ Σ_j w_{nj} ∫N(u(t_j)) / Γ(α)
/// over the mesh, with the solver's own quadrature.
pub fn mass_balance(traj: &SolutionTrajectory) -> f64 {
    let p = &traj.params;
    let h = traj.grid.cell_volume();
    let m0 = traj.mass(0);
    let scale = traj.fields[0].iter().map(|v| v.abs()).sum::<f64>() * h;
    let nl_mass: Vec<f64> =
        traj.fields.iter().map(|u| u.iter().map(|&v| nonlinearity(v, p.gamma)).sum::<f64>() * h).collect();
    (1..traj.times.len())
        .map(|n| {
            let w = product_weights(p.alpha, &traj.times, n);
            let rhs = m0 + p.lambda * rgamma(p.alpha) * w.iter().zip(&nl_mass).map(|(a, b)| a * b).sum::<f64>();
            let lhs = traj.mass(n);
            (lhs - rhs).abs() / rhs.abs().max(scale).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// Smallest value over all nodes and mesh times.
pub fn positivity_check(traj: &SolutionTrajectory) -> f64 {
    traj.fields.iter().flat_map(|f| f.iter()).cloned().fold(f64::INFINITY, f64::min)
}

/// Largest excess u(t, x) - (Z(t) ⋆ u₀)(x) over all nodes and mesh times.
pub fn domination_excess(traj: &SolutionTrajectory) -> f64 {
    traj.fields
        .iter()
        .zip(&traj.linear)
        .flat_map(|(u, l)| u.iter().zip(l).map(|(a, b)| a - b))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_field, FieldOptions, KernelKind};
    use crate::symbol::SpectralMeasure;

    fn setup(alpha: f64, beta: f64, gamma: f64, lambda: f64) -> (ModelParams, Symbol, Grid) {
        let p = ModelParams::new(alpha, beta, gamma, lambda, 1).unwrap();
        let s = Symbol::new(SpectralMeasure::symmetric_1d(1.0).unwrap(), beta).unwrap();
        (p, s, Grid::new(1, 80.0, 512).unwrap())
    }

    fn bump(g: &Grid, amp: f64) -> Vec<f64> {
        (0..g.len()).map(|i| amp * (-0.5 * g.node(i)[0].powi(2)).exp()).collect()
    }

    #[test]
    fn gates_follow_the_inequalities() {
        let p = ModelParams::new(0.5, 1.5, 2.0, 0.0, 1).unwrap();
        assert!(validate_params(&p, 2.0, 1.0, GateMode::Local).satisfied_local);
        assert!(!validate_params(&p, 1.0, 1.0, GateMode::Local).satisfied_local);
        let q = ModelParams::new(0.5, 0.5, 2.0, 0.0, 2).unwrap();
        assert!(!validate_params(&q, 4.0, 1.0, GateMode::Local).satisfied_local);
        assert!(validate_params(&q, 4.5, 1.0, GateMode::Local).satisfied_local);
        let r = ModelParams::new(0.5, 1.5, 4.0, 0.0, 1).unwrap();
        assert!(validate_params(&r, 3.0, 1.0, GateMode::GlobalSmall).satisfied_global_small);
        let s = ModelParams::new(0.5, 1.5, 2.0, -1.0, 1).unwrap();
        let g = validate_params(&s, 2.0, 1.0, GateMode::GlobalPositive);
        assert!(g.satisfied_global_positive, "{:?}", g.violated_conditions);
        assert!(!g.satisfied_global_small);
    }

    #[test]
    fn weights_integrate_linear_functions_exactly() {
        let alpha = 0.4;
        let times = MeshSpec { steps: 20, rho: None }.times(alpha, 2.0).unwrap();
        let n = 20;
        let w = product_weights(alpha, &times, n);
        let tn = times[n];
        // ∫_0^T (T-s)^{α-1} ds and ∫_0^T (T-s)^{α-1} s ds
        let i0: f64 = w.iter().sum();
        let i1: f64 = w.iter().zip(&times).map(|(a, t)| a * t).sum();
        assert!((i0 - tn.powf(alpha) / alpha).abs() < 1e-13);
        let exact1 = tn.powf(alpha + 1.0) / (alpha * (alpha + 1.0));
        assert!((i1 - exact1).abs() < 1e-13);
    }

    #[test]
    fn linear_problem_is_the_kernel_convolution() {
        let (p, s, g) = setup(0.5, 1.5, 2.0, 0.0);
        let u0 = bump(&g, 1.0);
        let traj = picard_solve(&u0, &p, &s, &g, 1.0, &MeshSpec { steps: 8, rho: None }, &SolveOptions::default()).unwrap();
        assert_eq!(traj.residuals, vec![0.0]);
        let z = kernel_field(KernelKind::Z, &p, &s, &g, 1.0, &FieldOptions::unchecked()).unwrap();
        let zhat: Vec<f64> = g.analyze(&z.values).iter().map(|c| c.re).collect();
        let direct = g.convolve(&zhat, &u0);
        let last = traj.fields.last().unwrap();
        let err = direct.iter().zip(last).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        assert!(mass_balance(&traj) < 1e-12);
    }

    #[test]
    fn zero_data_stays_zero() {
        let (p, s, g) = setup(0.5, 1.5, 2.0, -1.0);
        let traj = picard_solve(&vec![0.0; g.len()], &p, &s, &g, 1.0, &MeshSpec { steps: 8, rho: None }, &SolveOptions::default())
            .unwrap();
        assert!(traj.fields.iter().all(|f| f.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn absorbing_problem_converges_and_balances_mass() {
        let (p, s, g) = setup(0.5, 1.5, 2.0, -1.0);
        let u0 = bump(&g, 1.0);
        let opts = SolveOptions { gate_mode: GateMode::GlobalPositive, ..Default::default() };
        let traj = picard_solve(&u0, &p, &s, &g, 1.0, &MeshSpec { steps: 32, rho: None }, &opts).unwrap();
        assert!(traj.contraction().unwrap() < 0.9);
        assert!(mass_balance(&traj) < 1e-8);
        assert!(positivity_check(&traj) > -1e-6);
        assert!(domination_excess(&traj) < 1e-6);
        let masses: Vec<f64> = (0..traj.times.len()).map(|k| traj.mass(k)).collect();
        assert!(masses.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn large_growing_data_does_not_converge() {
        let (p, s, g) = setup(0.5, 1.5, 2.0, 5.0);
        let u0 = bump(&g, 20.0);
        let opts = SolveOptions { max_iter: 12, ..Default::default() };
        let res = picard_solve(&u0, &p, &s, &g, 4.0, &MeshSpec { steps: 16, rho: None }, &opts);
        assert!(matches!(res, Err(Error::NotConverged { .. })));
    }

    #[test]
    fn extensions_compose() {
        let (p, s, g) = setup(0.5, 1.5, 2.0, -1.0);
        let u0 = bump(&g, 0.5);
        let traj = picard_solve(&u0, &p, &s, &g, 1.0, &MeshSpec { steps: 16, rho: None }, &SolveOptions::default()).unwrap();
        let mesh = ExtensionMesh::Uniform { step: 0.25 };
        let once = extend_solution(&traj, 3.0, &mesh).unwrap();
        let twice = extend_solution(&extend_solution(&traj, 2.0, &mesh).unwrap(), 3.0, &mesh).unwrap();
        assert_eq!(once.times, twice.times);
        let a = once.fields.last().unwrap();
        let b = twice.fields.last().unwrap();
        let err = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }
}
