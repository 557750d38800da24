//! The kernels Z, Y and G on periodic grids, their norms and identities, and
//! the subordination quadrature used as an independent cross-check.
//!
//! Transforms:
//!
//! * Ẑ(t, ξ) = E_{α,1}(-t^α ψ(ξ))
//! * Ŷ(t, ξ) = t^{α-1} E_{α,α}(-t^α ψ(ξ))
//! * Ĝ(t, ξ) = e^{-t ψ(ξ)}
//!
//! Fields are synthesized from exact transform samples at the dual frequency
//! nodes, so the trapezoid mass h^d Σ v_j equals the transform at ξ = 0 up to
//! round-off, independently of the grid.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::mittag_leffler::MlInterpolant;
use crate::params::ModelParams;
use crate::quadrature::GaussLegendre;
use crate::special::{gamma, rgamma, riesz_kernel, sin_pi, sphere_area};
use crate::stable::DensityTable;
use crate::symbol::{SphereMesh, Symbol};

/// Default relative tail mass allowed outside the box.
pub const DEFAULT_TAIL_TOL: f64 = 1e-3;
/// Safety factor applied to the tail estimate when sizing a grid.
pub const TAIL_SAFETY: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    Z,
    Y,
    G,
}

impl KernelKind {
    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Z => "Z",
            KernelKind::Y => "Y",
            KernelKind::G => "G",
        }
    }

    /// Exponent e with K(t, x) = t^e K(1, t^{-s} x) (s = α/β, or 1/β for G).
    pub fn time_exponent(&self, params: &ModelParams) -> f64 {
        let d = params.d();
        match self {
            KernelKind::Z => -params.alpha * d / params.beta,
            KernelKind::Y => -params.alpha * d / params.beta + params.alpha - 1.0,
            KernelKind::G => -d / params.beta,
        }
    }

    /// Spatial similarity exponent s.
    pub fn space_exponent(&self, params: &ModelParams) -> f64 {
        match self {
            KernelKind::G => 1.0 / params.beta,
            _ => params.alpha / params.beta,
        }
    }

    /// ∫ K(t, x) dx.
    pub fn mass(&self, params: &ModelParams, t: f64) -> f64 {
        match self {
            KernelKind::Y => riesz_kernel(params.alpha, t),
            _ => 1.0,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Z" | "z" => Ok(KernelKind::Z),
            "Y" | "y" => Ok(KernelKind::Y),
            "G" | "g" => Ok(KernelKind::G),
            _ => Err(Error::InvalidInput(format!("unknown kernel kind `{s}` (expected Z, Y or G)"))),
        }
    }
}

/// K̂(t, ·) as a function of ψ.
#[derive(Debug, Clone)]
pub struct KernelTransform {
    kind: KernelKind,
    t: f64,
    scale: f64,
    prefactor: f64,
    ml: Option<MlInterpolant>,
}

impl KernelTransform {
    pub fn new(kind: KernelKind, params: &ModelParams, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::NonPositiveTime(t));
        }
        let a = params.alpha;
        let (scale, prefactor, ml) = match kind {
            KernelKind::Z => (t.powf(a), 1.0, Some(MlInterpolant::new(a, 1.0)?)),
            KernelKind::Y => (t.powf(a), t.powf(a - 1.0), Some(MlInterpolant::new(a, a)?)),
            KernelKind::G => (t, 1.0, None),
        };
        Ok(Self { kind, t, scale, prefactor, ml })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn eval(&self, psi: f64) -> f64 {
        match &self.ml {
            Some(ml) => self.prefactor * ml.eval(self.scale * psi),
            None => (-self.scale * psi).exp(),
        }
    }
}

/// C_{d,β} in the far-field law F^{-1}[e^{-|ξ|^β}](x) ~ C_{d,β}|x|^{-d-β}.
pub fn tail_constant(d: usize, beta: f64) -> f64 {
    let df = d as f64;
    beta * 2f64.powf(beta - 1.0) * gamma((df + beta) / 2.0) / (PI.powf(df / 2.0) * gamma(1.0 - beta / 2.0))
}

/// Coefficient c with K̂(t, ξ)/K̂(t, 0) = 1 - c ψ(ξ) + o(ψ) as ξ → 0.
fn small_frequency_coefficient(kind: KernelKind, params: &ModelParams, t: f64) -> f64 {
    let a = params.alpha;
    match kind {
        KernelKind::Z => t.powf(a) * rgamma(1.0 + a),
        KernelKind::Y => t.powf(a) * gamma(a) * rgamma(2.0 * a),
        KernelKind::G => t,
    }
}

/// Relative mass of K(t, ·) outside the ball of radius `radius`, estimated
/// from the far-field bound c ω_max C_{d,β} |x|^{-d-β}.
pub fn relative_tail_mass(kind: KernelKind, params: &ModelParams, symbol: &Symbol, t: f64, radius: f64) -> f64 {
    let beta = params.beta;
    let (_, omega_max) = symbol.omega_bounds();
    let c = small_frequency_coefficient(kind, params, t);
    c * omega_max * tail_constant(params.dimension, beta) * sphere_area(params.dimension) * radius.powf(-beta) / beta
}

/// Grid with `points` nodes per axis whose extent keeps the tail estimate, with
/// the safety factor, below `tail_tol`. The extent scales like t^{α/β}.
pub fn sized_grid(
    kind: KernelKind,
    params: &ModelParams,
    symbol: &Symbol,
    t: f64,
    points: usize,
    tail_tol: f64,
) -> Result<Grid> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidInput(format!("tail tolerance {tail_tol} must be positive")));
    }
    let unit = relative_tail_mass(kind, params, symbol, t, 1.0);
    let radius = (TAIL_SAFETY * unit / tail_tol).powf(1.0 / params.beta);
    Grid::new(params.dimension, 2.0 * radius, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldOptions {
    pub tail_tol: f64,
    /// Reject grids whose tail estimate exceeds `tail_tol`.
    pub check_tail: bool,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self { tail_tol: DEFAULT_TAIL_TOL, check_tail: true }
    }
}

impl FieldOptions {
    pub fn unchecked() -> Self {
        Self { check_tail: false, ..Self::default() }
    }
}

/// Node values of one kernel at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField {
    pub grid: Grid,
    pub t: f64,
    pub kind: KernelKind,
    pub params: ModelParams,
    pub values: Vec<f64>,
    /// Largest imaginary part left by the inverse transform.
    pub imag_residue: f64,
    /// Largest boundary value relative to the largest value.
    pub aliasing: f64,
    /// Relative tail mass estimated beyond the box.
    pub tail_estimate: f64,
}

impl KernelField {
    /// Trapezoid mass h^d Σ v_j.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Value at the node nearest to `x`.
    pub fn value_at(&self, x: &[f64]) -> Option<f64> {
        self.grid.nearest(x).map(|i| self.values[i])
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values, self.grid.cell_volume(), p)
    }

    pub fn weak_lp_quasinorm(&self, p: f64) -> f64 {
        weak_lp_quasinorm(&self.values, self.grid.cell_volume(), p)
    }
}

fn check_compatible(params: &ModelParams, symbol: &Symbol, grid: &Grid) -> Result<()> {
    params.validate()?;
    grid.validate()?;
    if grid.dimension != params.dimension || symbol.dimension() != params.dimension {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: params d = {}, grid d = {}, measure d = {}",
            params.dimension,
            grid.dimension,
            symbol.dimension()
        )));
    }
    if (symbol.beta() - params.beta).abs() > 1e-15 {
        return Err(Error::InvalidInput(format!("symbol β = {} differs from params β = {}", symbol.beta(), params.beta)));
    }
    Ok(())
}

/// Spectral synthesis of K(t, ·) on `grid`.
pub fn kernel_field(
    kind: KernelKind,
    params: &ModelParams,
    symbol: &Symbol,
    grid: &Grid,
    t: f64,
    opts: &FieldOptions,
) -> Result<KernelField> {
    check_compatible(params, symbol, grid)?;
    let tr = KernelTransform::new(kind, params, t)?;
    let tail_estimate = relative_tail_mass(kind, params, symbol, t, 0.5 * grid.extent);
    if opts.check_tail && tail_estimate > opts.tail_tol {
        return Err(Error::GridTooSmall(format!(
            "estimated tail mass {tail_estimate:.3e} beyond L/2 = {} exceeds {:.1e}",
            0.5 * grid.extent,
            opts.tail_tol
        )));
    }
    let spectrum = grid.sample_spectrum(|k| tr.eval(symbol.psi(k)));
    let (values, imag_residue) = grid.synthesize(&spectrum);
    let vmax = values.par_iter().map(|v| v.abs()).reduce(|| 0.0, f64::max);
    let edge = values
        .par_iter()
        .enumerate()
        .filter(|(i, _)| grid.on_boundary(*i))
        .map(|(_, v)| v.abs())
        .reduce(|| 0.0, f64::max);
    let aliasing = if vmax > 0.0 { edge / vmax } else { 0.0 };
    Ok(KernelField { grid: *grid, t, kind, params: *params, values, imag_residue, aliasing, tail_estimate })
}

pub fn z_field(params: &ModelParams, symbol: &Symbol, grid: &Grid, t: f64) -> Result<KernelField> {
    kernel_field(KernelKind::Z, params, symbol, grid, t, &FieldOptions::default())
}

pub fn y_field(params: &ModelParams, symbol: &Symbol, grid: &Grid, t: f64) -> Result<KernelField> {
    kernel_field(KernelKind::Y, params, symbol, grid, t, &FieldOptions::default())
}

pub fn g_field(params: &ModelParams, symbol: &Symbol, grid: &Grid, t: f64) -> Result<KernelField> {
    kernel_field(KernelKind::G, params, symbol, grid, t, &FieldOptions::default())
}

/// Exact integrals of the periodized kernel over the grid cells centred at
/// the nodes: the transform samples are multiplied by Π_a sinc(ξ_a h/2).
pub fn cell_masses(
    kind: KernelKind,
    params: &ModelParams,
    symbol: &Symbol,
    grid: &Grid,
    t: f64,
) -> Result<Vec<f64>> {
    check_compatible(params, symbol, grid)?;
    let tr = KernelTransform::new(kind, params, t)?;
    let half = 0.5 * grid.spacing();
    let spectrum = grid.sample_spectrum(|k| {
        let window: f64 = k
            .iter()
            .map(|&x| if x == 0.0 { 1.0 } else { (x * half).sin() / (x * half) })
            .product();
        tr.eval(symbol.psi(k)) * window
    });
    let h = grid.cell_volume();
    Ok(grid.synthesize(&spectrum).0.into_iter().map(|v| v * h).collect())
}

/// The periodized kernel at an arbitrary point, by direct summation over the
/// grid's frequency nodes.
pub fn point_value(
    kind: KernelKind,
    params: &ModelParams,
    symbol: &Symbol,
    grid: &Grid,
    t: f64,
    x: &[f64],
) -> Result<f64> {
    check_compatible(params, symbol, grid)?;
    if x.len() != grid.dimension {
        return Err(Error::InvalidInput(format!("point has {} coordinates, expected {}", x.len(), grid.dimension)));
    }
    let tr = KernelTransform::new(kind, params, t)?;
    let d = grid.dimension;
    let sum: f64 = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let k = grid.wavevector(i);
            let phase: f64 = (0..d).map(|a| k[a] * x[a]).sum();
            tr.eval(symbol.psi(&k[..d])) * phase.cos()
        })
        .sum();
    Ok(sum * grid.extent.powi(-(d as i32)))
}

/// (Σ|v|^p h^d)^{1/p}, or max|v| for p = ∞.
pub fn lp_norm(values: &[f64], cell_volume: f64, p: f64) -> f64 {
    let m = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if p.is_infinite() || m == 0.0 {
        return m;
    }
    let s: f64 = values.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * (s * cell_volume).powf(1.0 / p)
}

/// sup over value levels λ of λ (|{|v| ≥ λ}| h^d)^{1/p}.
pub fn weak_lp_quasinorm(values: &[f64], cell_volume: f64, p: f64) -> f64 {
    let mut a: Vec<f64> = values.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    let mut best = 0.0f64;
    for i in 0..a.len() {
        if i + 1 < a.len() && a[i + 1] == a[i] {
            continue;
        }
        best = best.max(a[i] * ((i + 1) as f64 * cell_volume).powf(1.0 / p));
    }
    best
}

/// Spherical average of ω^{-k}.
fn mean_inverse_omega(symbol: &Symbol, k: i32) -> f64 {
    match symbol.dimension() {
        1 => symbol.omega_unchecked(&[1.0]).powi(-k),
        2 => {
            let n = 2048;
            (0..n).map(|j| symbol.omega_angle(2.0 * PI * j as f64 / n as f64).powi(-k)).sum::<f64>() / n as f64
        }
        _ => {
            let mesh = SphereMesh::sphere(24, 48).expect("valid sphere rule");
            mesh.nodes.iter().zip(&mesh.weights).map(|(n, w)| w * symbol.omega_unchecked(n).powi(-k)).sum::<f64>()
                / sphere_area(3)
        }
    }
}

/// Average of |x|^{s-d} over the cube [-h/2, h/2]^d, for 0 < s < d.
pub fn cube_average_of_power(d: usize, s: f64, h: f64) -> f64 {
    // divergence theorem: ∫_cube r^{s-d} = (1/s) ∫_∂cube r^{s-d} x·n dS
    let a = 0.5 * h;
    let e = 0.5 * (s - d as f64);
    let face = match d {
        1 => a.powf(s - 1.0),
        2 => {
            let gl = GaussLegendre::new(32);
            gl.integrate(-a, a, |y| (a * a + y * y).powf(e))
        }
        _ => {
            let gl = GaussLegendre::new(32);
            gl.integrate(-a, a, |y| gl.integrate(-a, a, |z| (a * a + y * y + z * z).powf(e)))
        }
    };
    2.0 * d as f64 * a * face / s / h.powi(d as i32)
}

/// Average of the near-origin model of K(t, ·) over the origin cell, when K
/// has an integrable singularity there: Z for d > β, Y for d > 2β.
///
/// The model inverts the leading large-|ξ| term of K̂ with ω replaced by its
/// spherical harmonic-type mean.
pub fn origin_cell_average(kind: KernelKind, params: &ModelParams, symbol: &Symbol, t: f64, h: f64) -> Option<f64> {
    let (a, b, d) = (params.alpha, params.beta, params.dimension);
    let df = d as f64;
    // K̂ ~ coef |ξ|^{-s}
    let (s, coef) = match kind {
        KernelKind::Z if df > b => (b, t.powf(-a) * rgamma(1.0 - a) * mean_inverse_omega(symbol, 1)),
        KernelKind::Y if df > 2.0 * b => {
            (2.0 * b, a * t.powf(-a - 1.0) * rgamma(1.0 - a) * mean_inverse_omega(symbol, 2))
        }
        _ => return None,
    };
    let riesz = gamma((df - s) / 2.0) / (2f64.powf(s) * PI.powf(df / 2.0) * gamma(s / 2.0));
    Some(coef * riesz * cube_average_of_power(d, s, h))
}

/// Field values with the origin node replaced by the local-model cell
/// average when K is singular at the origin.
pub fn regularized_values(field: &KernelField, symbol: &Symbol) -> Vec<f64> {
    let mut v = field.values.clone();
    if let Some(avg) = origin_cell_average(field.kind, &field.params, symbol, field.t, field.grid.spacing()) {
        v[field.grid.origin()] = avg;
    }
    v
}

/// Largest relative deviation from K(ct, x) = c^e K(t, c^{-s} x), comparing
/// the field at time ct on the grid stretched by c^s with the field at time t.
pub fn check_scaling(
    kind: KernelKind,
    params: &ModelParams,
    symbol: &Symbol,
    grid: &Grid,
    t: f64,
    c: f64,
) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!("scale factor {c} must be positive")));
    }
    let opts = FieldOptions::unchecked();
    let base = kernel_field(kind, params, symbol, grid, t, &opts)?;
    if c == 1.0 {
        return Ok(0.0);
    }
    let stretched = grid.rescaled(c.powf(kind.space_exponent(params)));
    let scaled = kernel_field(kind, params, symbol, &stretched, c * t, &opts)?;
    let factor = c.powf(kind.time_exponent(params));
    Ok(base
        .values
        .par_iter()
        .zip(scaled.values.par_iter())
        .filter(|(b, _)| **b > 1e-12)
        .map(|(b, s)| (s - factor * b).abs() / (factor * b))
        .reduce(|| 0.0, f64::max))
}

/// Range of K(t, x)/(t^e Ω^{-1-d/β}) over nodes with Ω in `omega_range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub c_min: f64,
    pub c_max: f64,
    pub samples: usize,
}

impl Envelope {
    pub fn spread(&self) -> f64 {
        self.c_max / self.c_min
    }
}

/// Far-field envelope ratios with Ω = |x|^β t^{-α} (t^{-1} for G). Only nodes
/// in the inner half of the box are used, away from periodization effects.
pub fn envelope_ratios(field: &KernelField, omega_range: (f64, f64)) -> Envelope {
    let p = &field.params;
    let t = field.t;
    let d = p.dimension;
    let time_scale = match field.kind {
        KernelKind::G => t,
        _ => t.powf(p.alpha),
    };
    let pre = t.powf(field.kind.time_exponent(p));
    let quarter = 0.25 * field.grid.extent;
    let (lo, hi, n) = field
        .values
        .par_iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let x = field.grid.node(i);
            if x[..d].iter().any(|c| c.abs() > quarter) {
                return None;
            }
            let r = x[..d].iter().map(|c| c * c).sum::<f64>().sqrt();
            let omega = r.powf(p.beta) / time_scale;
            if omega < omega_range.0 || omega > omega_range.1 {
                return None;
            }
            let ratio = v / (pre * omega.powf(-1.0 - p.d() / p.beta));
            Some((ratio, ratio, 1usize))
        })
        .reduce(|| (f64::INFINITY, f64::NEG_INFINITY, 0), |a, b| (a.0.min(b.0), a.1.max(b.1), a.2 + b.2));
    Envelope { c_min: lo, c_max: hi, samples: n }
}

/// ‖K(t) ⋆ v - v‖_p, with Y normalized by 1/g_α(t).
pub fn smoothing_defect(
    kind: KernelKind,
    params: &ModelParams,
    symbol: &Symbol,
    grid: &Grid,
    t: f64,
    v: &[f64],
    p: f64,
) -> Result<f64> {
    check_compatible(params, symbol, grid)?;
    if v.len() != grid.len() {
        return Err(Error::InvalidInput(format!("{} values for a grid of {} nodes", v.len(), grid.len())));
    }
    let tr = KernelTransform::new(kind, params, t)?;
    let norm = 1.0 / kind.mass(params, t);
    let multiplier = grid.sample_spectrum(|k| norm * tr.eval(symbol.psi(k)));
    let w = grid.convolve(&multiplier, v);
    let diff: Vec<f64> = w.iter().zip(v).map(|(a, b)| a - b).collect();
    Ok(lp_norm(&diff, grid.cell_volume(), p))
}

const SUB_U_HI: f64 = 40.0;
const SUB_U_FLOOR: f64 = -400.0;
const SUB_PANEL: f64 = 0.8;
const SUB_ORDER: usize = 20;
const SUB_CHECK_ORDER: usize = 14;
/// Relative error accepted for a subordination value.
pub const SUBORDINATION_TOL: f64 = 1e-5;

/// Outcome of one subordination quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubordinationValue {
    pub value: f64,
    pub error_estimate: f64,
    pub min_sample: f64,
}

struct MixingRule {
    nodes: Vec<f64>,
    /// weight × (1/α) e^{-u/α} w_α(e^{-u/α})
    masses: Vec<f64>,
    order: usize,
}

/// Subordination integrals in d = 1.
///
/// With s = e^u, Z(t, x) = ∫ G(t^α e^u, x) m(u) du where
/// m(u) = (1/α) e^{-u/α} w_α(e^{-u/α}) is a probability density, and
/// Y(t, x) = α t^{α-1} ∫ G(t^α e^u, x) e^u m(u) du. The u-axis is cut into
/// panels of width 0.8 ending at u = 40, each carrying a 20-point
/// Gauss-Legendre rule; a 14-point rule on the same panels gives the error
/// estimate.
pub struct Subordination {
    params: ModelParams,
    omega: f64,
    density: DensityTable,
    fine: MixingRule,
    coarse: MixingRule,
    tail_coeff: f64,
}

impl Subordination {
    pub fn new(params: &ModelParams, symbol: &Symbol) -> Result<Self> {
        params.validate()?;
        if params.dimension != 1 || symbol.dimension() != 1 {
            return Err(Error::UnsupportedParameters(
                "the subordination path is implemented for d = 1 only".into(),
            ));
        }
        let alpha = params.alpha;
        let sub = DensityTable::subordinator(alpha)?;
        let w_tail = (gamma(1.0 + alpha) * sin_pi(alpha) / PI).ln();
        let rule = |order: usize| {
            let gl = GaussLegendre::new(order);
            let panels = ((SUB_U_HI - SUB_U_FLOOR) / SUB_PANEL).round() as usize;
            let mut nodes = Vec::with_capacity(panels * order);
            let mut masses = Vec::with_capacity(panels * order);
            for p in (0..panels).rev() {
                let a = SUB_U_HI - (p + 1) as f64 * SUB_PANEL;
                for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                    let u = a + 0.5 * SUB_PANEL * (x + 1.0);
                    let ly = -u / alpha;
                    // ln w_α(y) with y = e^{ly}
                    let lw = if ly > 600.0 { w_tail - (1.0 + alpha) * ly } else { sub.eval(ly.exp()).ln() };
                    nodes.push(u);
                    masses.push(0.5 * SUB_PANEL * w * (ly + lw).exp() / alpha);
                }
            }
            MixingRule { nodes, masses, order }
        };
        let b = params.beta;
        Ok(Self {
            params: *params,
            omega: symbol.omega_unchecked(&[1.0]),
            density: DensityTable::symmetric(b)?,
            fine: rule(SUB_ORDER),
            coarse: rule(SUB_CHECK_ORDER),
            tail_coeff: gamma(1.0 + b) * sin_pi(b / 2.0) / PI,
        })
    }

    /// G(τ, x) = σ^{-1} f_β(x/σ), σ = (τω)^{1/β}.
    pub fn g(&self, tau: f64, x: f64) -> f64 {
        let b = self.params.beta;
        let ls = ((tau * self.omega).ln()) / b;
        let y = x.abs() * (-ls).exp();
        if y > 1e150 {
            return self.tail_coeff * tau * self.omega * x.abs().powf(-1.0 - b);
        }
        self.density.eval(y) * (-ls).exp()
    }

    fn lower_limit(&self, t: f64, x: f64, extra: f64) -> Result<f64> {
        let (a, b) = (self.params.alpha, self.params.beta);
        if x == 0.0 {
            // near u → -∞ the integrand decays like e^{u(1 + extra - 1/β)}
            let rate = 1.0 + extra - 1.0 / b;
            if !(rate > 0.0) {
                return Err(Error::UnsupportedParameters(format!(
                    "the kernel is infinite at x = 0 for beta = {b}"
                )));
            }
            return Ok((-40.0 / rate).max(SUB_U_FLOOR));
        }
        // below u_x the kernel is in its far field and the integrand decays like e^{2u}
        let ux = b * x.abs().ln() - self.omega.ln() - a * t.ln();
        Ok((ux - 40.0).clamp(SUB_U_FLOOR, -40.0))
    }

    fn integrate(&self, t: f64, x: f64, extra: f64) -> Result<SubordinationValue> {
        if !(t > 0.0) {
            return Err(Error::NonPositiveTime(t));
        }
        let u_lo = self.lower_limit(t, x, extra)?;
        let ta = t.powf(self.params.alpha);
        let sum = |rule: &MixingRule| -> (f64, f64) {
            let first = ((u_lo - SUB_U_FLOOR) / SUB_PANEL).floor().max(0.0) as usize * rule.order;
            let mut s = 0.0;
            let mut min = f64::INFINITY;
            for (u, m) in rule.nodes[first..].iter().zip(&rule.masses[first..]) {
                let v = self.g(ta * u.exp(), x) * m * (extra * u).exp();
                min = min.min(v);
                s += v;
            }
            (s, min)
        };
        let (fine, min_sample) = sum(&self.fine);
        let (coarse, _) = sum(&self.coarse);
        let error_estimate = if fine != 0.0 { ((fine - coarse) / fine).abs() } else { (fine - coarse).abs() };
        if !fine.is_finite() || error_estimate > SUBORDINATION_TOL {
            return Err(Error::QuadratureNonConvergent(format!(
                "subordination integral at t = {t}, x = {x}: estimated relative error {error_estimate:.2e}"
            )));
        }
        Ok(SubordinationValue { value: fine, error_estimate, min_sample })
    }

    pub fn z(&self, t: f64, x: f64) -> Result<SubordinationValue> {
        self.integrate(t, x, 0.0)
    }

    pub fn y(&self, t: f64, x: f64) -> Result<SubordinationValue> {
        let a = self.params.alpha;
        let mut v = self.integrate(t, x, 1.0)?;
        v.value *= a * t.powf(a - 1.0);
        v.min_sample *= a * t.powf(a - 1.0);
        Ok(v)
    }
}

fn scalar_point(x: &[f64]) -> Result<f64> {
    match x {
        [v] => Ok(*v),
        _ => Err(Error::InvalidInput(format!("expected a 1-D point, got {} coordinates", x.len()))),
    }
}

/// Z(t, x) from the subordination integral (d = 1).
pub fn z_subordination(params: &ModelParams, symbol: &Symbol, t: f64, x: &[f64]) -> Result<f64> {
    Ok(Subordination::new(params, symbol)?.z(t, scalar_point(x)?)?.value)
}

/// Y(t, x) from the subordination integral (d = 1).
pub fn y_subordination(params: &ModelParams, symbol: &Symbol, t: f64, x: &[f64]) -> Result<f64> {
    Ok(Subordination::new(params, symbol)?.y(t, scalar_point(x)?)?.value)
}

/// Result of differentiating g_α ⋆ Z(·, x) in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YFromZ {
    pub relative_error: f64,
    /// Central difference of g_α ⋆ Z(·, x) at t.
    pub derivative: f64,
    /// Spectral Y(t, x).
    pub reference: f64,
}

/// Default grid for the spectral reference of `y_from_z_check`.
pub fn y_reference_grid() -> Grid {
    Grid { dimension: 1, extent: 4096.0, points: 1 << 22 }
}

/// Panels of [0, 1] refined geometrically toward 0.
fn graded_unit_panels(ratio: f64, levels: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..=levels).map(|k| ratio.powi((levels - k) as i32)).collect();
    p.insert(0, 0.0);
    p
}

/// (g_α ⋆ Z(·, x))(T) = ∫_0^T g_α(T - s) Z(s, x) ds.
///
/// On [0, T/2] the substitution s = (T/2) v^{1/α} absorbs the small-s
/// behaviour of Z; on [T/2, T] the substitution T - s = (T/2) w^{1/α} turns
/// the (T - s)^{α-1} endpoint singularity into the constant (T/2)^α/Γ(1+α).
fn memory_integral(sub: &Subordination, gl: &GaussLegendre, panels: &[f64], big_t: f64, x: f64) -> Result<f64> {
    let a = sub.params.alpha;
    let half = 0.5 * big_t;
    let mut near = 0.0;
    let mut far = 0.0;
    for w in panels.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let c = 0.5 * (lo + hi);
        let r = 0.5 * (hi - lo);
        for (z, wt) in gl.nodes.iter().zip(&gl.weights) {
            let v = c + r * z;
            let s = half * v.powf(1.0 / a);
            let jac = half / a * v.powf(1.0 / a - 1.0);
            near += r * wt * riesz_kernel(a, big_t - s) * sub.z(s, x)?.value * jac;
            far += r * wt * sub.z(big_t - s, x)?.value;
        }
    }
    Ok(near + half.powf(a) * rgamma(1.0 + a) * far)
}

/// Checks Y(·, x) = d/dt (g_α ⋆ Z(·, x)) at t by central differences of step
/// h, against the spectral value of Y on [`y_reference_grid`] (d = 1).
pub fn y_from_z_check(params: &ModelParams, symbol: &Symbol, x: &[f64], t: f64, h: f64) -> Result<YFromZ> {
    let reference = point_value(KernelKind::Y, params, symbol, &y_reference_grid(), t, x)?;
    y_from_z_check_against(params, symbol, x, t, h, reference)
}

/// As [`y_from_z_check`] with a supplied reference value of Y(t, x).
pub fn y_from_z_check_against(
    params: &ModelParams,
    symbol: &Symbol,
    x: &[f64],
    t: f64,
    h: f64,
    reference: f64,
) -> Result<YFromZ> {
    if !(h > 0.0) || !(t > 2.0 * h) {
        return Err(Error::InvalidInput(format!("need t > 2h > 0, got t = {t}, h = {h}")));
    }
    let x = scalar_point(x)?;
    let sub = Subordination::new(params, symbol)?;
    let gl = GaussLegendre::new(20);
    let panels = graded_unit_panels(0.15, 14);
    let plus = memory_integral(&sub, &gl, &panels, t + h, x)?;
    let minus = memory_integral(&sub, &gl, &panels, t - h, x)?;
    let derivative = (plus - minus) / (2.0 * h);
    Ok(YFromZ { relative_error: ((derivative - reference) / reference).abs(), derivative, reference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::SpectralMeasure;

    fn setup(alpha: f64, beta: f64, d: usize) -> (ModelParams, Symbol) {
        let p = ModelParams::linear(alpha, beta, d).unwrap();
        let m = if d == 1 { SpectralMeasure::symmetric_1d(1.0).unwrap() } else { SpectralMeasure::uniform(d).unwrap() };
        (p, Symbol::new(m, beta).unwrap())
    }

    #[test]
    fn masses_are_exact() {
        let (p, s) = setup(0.5, 1.5, 1);
        let g = Grid::new(1, 400.0, 4096).unwrap();
        let z = z_field(&p, &s, &g, 1.0).unwrap();
        assert!((z.mass() - 1.0).abs() < 1e-12);
        assert!(z.imag_residue < 1e-9 * z.max());
        assert!(z.min() >= -1e-9 * z.max());
        for (t, m) in [(1.0f64, 0.5641895835477563), (4.0, 0.28209479177387814)] {
            let y = y_field(&p, &s, &g.rescaled(t.powf(p.alpha / p.beta)), t).unwrap();
            assert!((y.mass() - m).abs() < 1e-10, "{} vs {m}", y.mass());
        }
    }

    #[test]
    fn cauchy_kernel_at_origin() {
        let (p, s) = setup(0.5, 1.0, 1);
        let g = Grid::new(1, 16384.0, 1 << 20).unwrap();
        let f = kernel_field(KernelKind::G, &p, &s, &g, 1.0, &FieldOptions::unchecked()).unwrap();
        assert!((f.value_at(&[0.0]).unwrap() - 1.0 / PI).abs() < 1e-6);
        assert!((f.mass() - 1.0).abs() < 1e-12);
        let n = g.points;
        let o = g.origin();
        for j in 1..n / 2 {
            assert!((f.values[o + j] - f.values[o - j]).abs() <= 1e-15);
        }
    }

    #[test]
    fn small_grid_is_rejected() {
        let (p, s) = setup(0.5, 1.5, 1);
        let g = Grid::new(1, 4.0, 64).unwrap();
        assert!(matches!(z_field(&p, &s, &g, 1.0), Err(Error::GridTooSmall(_))));
        assert!(matches!(z_field(&p, &s, &g, 0.0), Err(Error::NonPositiveTime(_))));
    }

    #[test]
    fn sized_grid_meets_tail_tolerance() {
        let (p, s) = setup(0.7, 1.2, 1);
        for t in [0.25, 1.0, 16.0] {
            let g = sized_grid(KernelKind::Z, &p, &s, t, 1024, 1e-3).unwrap();
            let tail = relative_tail_mass(KernelKind::Z, &p, &s, t, 0.5 * g.extent);
            assert!((tail - 1e-4).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_is_exact() {
        let (p, s) = setup(0.5, 1.5, 1);
        let g = Grid::new(1, 400.0, 4096).unwrap();
        for kind in [KernelKind::Z, KernelKind::Y, KernelKind::G] {
            assert_eq!(check_scaling(kind, &p, &s, &g, 1.0, 1.0).unwrap(), 0.0);
            let dev = check_scaling(kind, &p, &s, &g, 1.0, 3.0).unwrap();
            assert!(dev < 1e-8, "{kind}: {dev}");
        }
    }

    #[test]
    fn norms_of_simple_fields() {
        assert_eq!(lp_norm(&[0.0; 8], 0.5, 2.0), 0.0);
        assert_eq!(weak_lp_quasinorm(&[0.0; 8], 0.5, 2.0), 0.0);
        let v = [1.0, 1.0, 1.0, 0.0];
        let m: f64 = 3.0 * 0.25;
        assert!((weak_lp_quasinorm(&v, 0.25, 3.0) - m.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!((lp_norm(&v, 0.25, 3.0) - m.powf(1.0 / 3.0)).abs() < 1e-15);
        assert_eq!(lp_norm(&[-2.0, 1.0], 1.0, f64::INFINITY), 2.0);
    }

    #[test]
    fn cube_average_matches_quadrature() {
        // d = 1: (2/h) ∫_0^{h/2} x^{s-1} dx
        let h: f64 = 0.1;
        let s = 0.5;
        let exact = 2.0 / h * (0.5 * h).powf(s) / s;
        assert!((cube_average_of_power(1, s, h) - exact).abs() < 1e-13 * exact);
        // d = 2 against a polar-coordinate formula
        let s = 1.5;
        let gl = GaussLegendre::new(40);
        let polar = 8.0 * (0.5 * h).powf(s) / s * gl.integrate(0.0, PI / 4.0, |phi| phi.cos().powf(-s)) / (h * h);
        assert!((cube_average_of_power(2, s, h) - polar).abs() < 1e-12 * polar);
    }

    #[test]
    fn subordination_matches_cauchy_closed_form() {
        let (p, s) = setup(0.5, 1.0, 1);
        let sub = Subordination::new(&p, &s).unwrap();
        for tau in [1e-3, 0.5, 1.0, 30.0] {
            for x in [0.0, 0.7, 4.0] {
                let exact = tau / (PI * (tau * tau + x * x));
                assert!((sub.g(tau, x) - exact).abs() < 1e-12 * exact);
            }
        }
        let v = sub.z(1.0, 2.0).unwrap();
        assert!(v.min_sample >= 0.0 && v.error_estimate < SUBORDINATION_TOL);
        assert!(sub.z(1.0, 0.0).is_err());
    }

    #[test]
    fn subordination_masses() {
        // ∫ Z dx = 1 and ∫ Y dx = g_α(t) along the subordination path
        let (p, s) = setup(0.6, 1.4, 1);
        let sub = Subordination::new(&p, &s).unwrap();
        let t = 2.0;
        let gl = GaussLegendre::new(30);
        let panels = two_sided(200.0);
        let mut zm = 0.0;
        let mut ym = 0.0;
        for w in panels.windows(2) {
            zm += gl.integrate(w[0], w[1], |x| sub.z(t, x).unwrap().value);
            ym += gl.integrate(w[0], w[1], |x| sub.y(t, x).unwrap().value);
        }
        // analytic tail beyond 200 is below 1e-3 of the mass
        assert!((zm - 1.0).abs() < 2e-3, "{zm}");
        assert!((ym / riesz_kernel(0.6, t) - 1.0).abs() < 2e-3, "{ym}");
    }

    fn two_sided(r: f64) -> Vec<f64> {
        let mut pos: Vec<f64> = (0..=40).map(|k| r * 0.75f64.powi(40 - k)).collect();
        pos.insert(0, 0.0);
        let mut all: Vec<f64> = pos.iter().rev().map(|v| -v).collect();
        all.extend(pos.iter().skip(1));
        all
    }

    #[test]
    fn smoothing_defect_shrinks() {
        let (p, s) = setup(0.5, 1.5, 1);
        let g = Grid::new(1, 40.0, 1024).unwrap();
        let v: Vec<f64> = (0..g.len())
            .map(|i| {
                let x = g.node(i)[0];
                if x.abs() < 1.0 {
                    (-1.0 / (1.0 - x * x)).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let mut last = f64::INFINITY;
        for t in [1.0, 0.1, 0.01, 0.001] {
            let e = smoothing_defect(KernelKind::Z, &p, &s, &g, t, &v, 2.0).unwrap();
            assert!(e < last);
            last = e;
        }
    }
}
