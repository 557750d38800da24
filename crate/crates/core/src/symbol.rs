//! Spectral measures on the unit sphere and the operator symbol
//! ψ(ξ) = |ξ|^β ω_μ(ξ/|ξ|), ω_μ(θ) = ∫ |θ·η|^β μ(dη).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::special::{gamma, sphere_area};

/// Tolerance on |‖η‖ − 1| for measure directions.
pub const DIRECTION_TOL: f64 = 1e-12;
/// Tolerance on |‖θ‖ − 1| for `omega` arguments.
pub const THETA_TOL: f64 = 1e-9;
/// Angular resolution of the d = 2 ω table.
pub const OMEGA_TABLE_SIZE: usize = 1024;
/// Default number of angles for a uniform d = 2 density.
pub const DEFAULT_CIRCLE_NODES: usize = 256;
/// Largest accepted d = 2 direction mesh.
pub const MAX_CIRCLE_NODES: usize = 1 << 16;
/// Gauss-Legendre nodes in cos(polar angle) of the d = 3 product rule.
pub const SPHERE_POLAR_NODES: usize = 32;
/// Trapezoid nodes in azimuth of the d = 3 product rule.
pub const SPHERE_AZIMUTH_NODES: usize = 64;

/// Equal-weight (d = 1, 2) or product (d = 3) quadrature mesh on S^{d-1}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereMesh {
    pub dimension: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Index of the node at -η for every node η.
    pub reflection: Vec<usize>,
}

impl SphereMesh {
    /// The two points ±1 of S⁰ with counting measure.
    pub fn pair() -> Self {
        Self { dimension: 1, nodes: vec![vec![1.0], vec![-1.0]], weights: vec![1.0, 1.0], reflection: vec![1, 0] }
    }

    /// `m` uniform angles 2πj/m on the circle with trapezoid weights.
    pub fn circle(m: usize) -> Result<Self> {
        if m < 4 || !m.is_multiple_of(2) || m > MAX_CIRCLE_NODES {
            return Err(Error::InvalidMeasure(format!(
                "circle mesh needs an even number of angles in [4, {MAX_CIRCLE_NODES}], got {m}"
            )));
        }
        let nodes = (0..m)
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / m as f64;
                vec![phi.cos(), phi.sin()]
            })
            .collect();
        let reflection = (0..m).map(|j| (j + m / 2) % m).collect();
        Ok(Self { dimension: 2, nodes, weights: vec![2.0 * PI / m as f64; m], reflection })
    }

    /// Product rule: Gauss-Legendre in cos ϑ times trapezoid in φ.
    pub fn sphere(polar: usize, azimuth: usize) -> Result<Self> {
        if polar < 2 || azimuth < 4 || !azimuth.is_multiple_of(2) {
            return Err(Error::InvalidMeasure(format!("invalid sphere rule {polar}x{azimuth}")));
        }
        let gl = GaussLegendre::new(polar);
        let mut nodes = Vec::with_capacity(polar * azimuth);
        let mut weights = Vec::with_capacity(polar * azimuth);
        let mut reflection = Vec::with_capacity(polar * azimuth);
        for (i, (&t, &wt)) in gl.nodes.iter().zip(&gl.weights).enumerate() {
            let r = (1.0 - t * t).sqrt();
            for j in 0..azimuth {
                let phi = 2.0 * PI * j as f64 / azimuth as f64;
                nodes.push(vec![r * phi.cos(), r * phi.sin(), t]);
                weights.push(wt * 2.0 * PI / azimuth as f64);
                reflection.push((polar - 1 - i) * azimuth + (j + azimuth / 2) % azimuth);
            }
        }
        Ok(Self { dimension: 3, nodes, weights, reflection })
    }

    /// Default mesh for a dimension, `angles` overriding the d = 2 size.
    pub fn default_for(dimension: usize, angles: Option<usize>) -> Result<Self> {
        match dimension {
            1 => Ok(Self::pair()),
            2 => Self::circle(angles.unwrap_or(DEFAULT_CIRCLE_NODES)),
            3 => Self::sphere(SPHERE_POLAR_NODES, SPHERE_AZIMUTH_NODES),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// A point mass of the spectral measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub direction: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Representation {
    Atoms(Vec<Atom>),
    /// Density values (with respect to surface measure) at the mesh nodes.
    Density { mesh: SphereMesh, values: Vec<f64> },
}

/// Finite, centrally symmetric measure on S^{d-1}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasure {
    dimension: usize,
    representation: Representation,
    total_mass: f64,
}

/// Density description in a measure block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySpec {
    /// Only `"uniform"` is recognized.
    Named(String),
    Samples(Vec<f64>),
}

/// JSON measure block, e.g. `{"dimension":1,"atoms":[[1.0,0.5],[-1.0,0.5]]}` or
/// `{"dimension":2,"density":"uniform"}`. An atom is `[η_1, …, η_d, weight]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    /// Number of circle angles for a uniform d = 2 density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<usize>,
    /// Total mass of a uniform density (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    /// Average the measure with its reflection instead of rejecting asymmetric input.
    #[serde(default)]
    pub symmetrize: bool,
}

impl MeasureSpec {
    pub fn unit_atoms_1d() -> Self {
        Self { dimension: 1, atoms: Some(vec![vec![1.0, 0.5], vec![-1.0, 0.5]]), density: None, angles: None, mass: None, symmetrize: false }
    }

    pub fn uniform(dimension: usize) -> Self {
        Self {
            dimension,
            atoms: None,
            density: Some(DensitySpec::Named("uniform".into())),
            angles: None,
            mass: None,
            symmetrize: false,
        }
    }
}

/// Parse a JSON measure block and build the measure.
pub fn parse_measure(json: &str) -> Result<SpectralMeasure> {
    let spec: MeasureSpec = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    build_measure(&spec)
}

fn same_direction(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

fn merge_atoms(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.iter_mut().find(|b| same_direction(&a.direction, &b.direction)) {
            Some(b) => b.weight += a.weight,
            None => out.push(a),
        }
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Validate a measure description and build the (symmetric) measure.
pub fn build_measure(spec: &MeasureSpec) -> Result<SpectralMeasure> {
    let d = spec.dimension;
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    match (&spec.atoms, &spec.density) {
        (Some(raw), None) => {
            if raw.is_empty() {
                return Err(Error::InvalidMeasure("no atoms given".into()));
            }
            let mut atoms = Vec::with_capacity(raw.len());
            for a in raw {
                if a.len() != d + 1 {
                    return Err(Error::InvalidMeasure(format!(
                        "atom {a:?} must have {} entries (direction then weight)",
                        d + 1
                    )));
                }
                let weight = a[d];
                if !(weight > 0.0) || !weight.is_finite() {
                    return Err(Error::NonPositiveWeight(weight));
                }
                let direction = a[..d].to_vec();
                let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !((norm - 1.0).abs() <= DIRECTION_TOL) {
                    return Err(Error::NonUnitDirection(norm));
                }
                atoms.push(Atom { direction, weight });
            }
            let atoms = merge_atoms(atoms);
            let atoms = if spec.symmetrize {
                let mut both = Vec::with_capacity(2 * atoms.len());
                for a in &atoms {
                    both.push(Atom { direction: a.direction.clone(), weight: 0.5 * a.weight });
                    both.push(Atom { direction: a.direction.iter().map(|x| -x).collect(), weight: 0.5 * a.weight });
                }
                merge_atoms(both)
            } else {
                for a in &atoms {
                    let neg: Vec<f64> = a.direction.iter().map(|x| -x).collect();
                    let mirrored = atoms.iter().find(|b| same_direction(&neg, &b.direction));
                    if !mirrored.is_some_and(|b| close(a.weight, b.weight)) {
                        return Err(Error::AsymmetricMeasure);
                    }
                }
                atoms
            };
            let total_mass = atoms.iter().map(|a| a.weight).sum();
            Ok(SpectralMeasure { dimension: d, representation: Representation::Atoms(atoms), total_mass })
        }
        (None, Some(density)) => {
            let (mesh, mut values) = match density {
                DensitySpec::Named(name) if name == "uniform" => {
                    let mesh = SphereMesh::default_for(d, spec.angles)?;
                    let mass = spec.mass.unwrap_or(1.0);
                    if !(mass > 0.0) || !mass.is_finite() {
                        return Err(Error::NonPositiveWeight(mass));
                    }
                    let n = mesh.len();
                    (mesh, vec![mass / sphere_area(d); n])
                }
                DensitySpec::Named(name) => {
                    return Err(Error::InvalidMeasure(format!("unknown density {name:?}")));
                }
                DensitySpec::Samples(v) => {
                    if spec.mass.is_some() {
                        return Err(Error::InvalidMeasure("`mass` only applies to a uniform density".into()));
                    }
                    let angles = if d == 2 { Some(v.len()) } else { spec.angles };
                    let mesh = SphereMesh::default_for(d, angles)?;
                    if v.len() != mesh.len() {
                        return Err(Error::InvalidMeasure(format!(
                            "density has {} samples, the d = {d} mesh has {} nodes",
                            v.len(),
                            mesh.len()
                        )));
                    }
                    (mesh, v.clone())
                }
            };
            if let Some(&bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
                return Err(Error::NonPositiveWeight(bad));
            }
            if spec.symmetrize {
                let sym: Vec<f64> = (0..values.len()).map(|j| 0.5 * (values[j] + values[mesh.reflection[j]])).collect();
                values = sym;
            } else if (0..values.len()).any(|j| !close(values[j], values[mesh.reflection[j]])) {
                return Err(Error::AsymmetricMeasure);
            }
            let total_mass = values.iter().zip(&mesh.weights).map(|(v, w)| v * w).sum();
            Ok(SpectralMeasure { dimension: d, representation: Representation::Density { mesh, values }, total_mass })
        }
        _ => Err(Error::InvalidMeasure("exactly one of `atoms` or `density` is required".into())),
    }
}

impl SpectralMeasure {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn representation(&self) -> &Representation {
        &self.representation
    }

    /// Symmetric two-point measure of mass `mass` on S⁰.
    pub fn symmetric_1d(mass: f64) -> Result<Self> {
        build_measure(&MeasureSpec {
            dimension: 1,
            atoms: Some(vec![vec![1.0, 0.5 * mass], vec![-1.0, 0.5 * mass]]),
            density: None,
            angles: None,
            mass: None,
            symmetrize: false,
        })
    }

    /// Uniform measure of unit mass on S^{d-1}.
    pub fn uniform(dimension: usize) -> Result<Self> {
        build_measure(&MeasureSpec::uniform(dimension))
    }

    /// Atomic approximation with about `count` atoms (a density is lumped onto
    /// a coarser quadrature mesh). Atomic measures are returned unchanged.
    pub fn to_atoms(&self, count: usize) -> Result<Vec<Atom>> {
        match &self.representation {
            Representation::Atoms(a) => Ok(a.clone()),
            Representation::Density { mesh, values } => {
                let coarse = match self.dimension {
                    1 => SphereMesh::pair(),
                    2 => SphereMesh::circle(count.max(4) & !1)?,
                    _ => {
                        let polar = ((count as f64 / 2.0).sqrt().round() as usize).max(2);
                        SphereMesh::sphere(polar, (count / polar).max(4) & !1)?
                    }
                };
                let density = DensityInterpolant::new(mesh, values);
                Ok(coarse
                    .nodes
                    .iter()
                    .zip(&coarse.weights)
                    .map(|(n, w)| Atom { direction: n.clone(), weight: w * density.at(n) })
                    .collect())
            }
        }
    }
}

/// Smooth interpolant of a density sampled on a sphere mesh.
struct DensityInterpolant<'a> {
    mesh: &'a SphereMesh,
    values: &'a [f64],
    fourier: Option<Vec<(f64, f64)>>,
}

impl<'a> DensityInterpolant<'a> {
    fn new(mesh: &'a SphereMesh, values: &'a [f64]) -> Self {
        let fourier = (mesh.dimension == 2).then(|| circle_fourier(values));
        Self { mesh, values, fourier }
    }

    fn at(&self, eta: &[f64]) -> f64 {
        match (self.mesh.dimension, &self.fourier) {
            (1, _) => {
                if eta[0] > 0.0 {
                    self.values[0]
                } else {
                    self.values[1]
                }
            }
            (2, Some(c)) => {
                let phi = eta[1].atan2(eta[0]);
                trig_eval(c, phi, |_| 1.0)
            }
            _ => {
                // nearest mesh node
                let mut best = (f64::NEG_INFINITY, 0);
                for (j, n) in self.mesh.nodes.iter().enumerate() {
                    let dot: f64 = n.iter().zip(eta).map(|(a, b)| a * b).sum();
                    if dot > best.0 {
                        best = (dot, j);
                    }
                }
                self.values[best.1]
            }
        }
    }
}

/// Real Fourier coefficients (a_n, b_n), n = 0..=m/2, of the trigonometric
/// interpolant of equispaced samples: f(φ) = Σ a_n cos nφ + b_n sin nφ.
fn circle_fourier(values: &[f64]) -> Vec<(f64, f64)> {
    let m = values.len();
    let half = m / 2;
    (0..=half)
        .map(|n| {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let ang = 2.0 * PI * ((n * j) % m) as f64 / m as f64;
                a += v * ang.cos();
                b += v * ang.sin();
            }
            let scale = if n == 0 || (m.is_multiple_of(2) && n == half) { 1.0 / m as f64 } else { 2.0 / m as f64 };
            (a * scale, b * scale)
        })
        .collect()
}

fn trig_eval(c: &[(f64, f64)], phi: f64, factor: impl Fn(usize) -> f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(n, (a, b))| {
            let f = factor(n);
            if f == 0.0 {
                0.0
            } else {
                let (s, co) = (n as f64 * phi).sin_cos();
                f * (a * co + b * s)
            }
        })
        .sum()
}

/// ∫_0^{2π} |cos φ|^β cos(nφ) dφ (zero for odd n).
pub fn abs_cos_moment(beta: f64, n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let h = n as f64 / 2.0;
    let b2 = beta / 2.0;
    let front = 2.0 * PI * gamma(beta + 1.0) / 2f64.powf(beta);
    if n == 0 {
        return front / (gamma(1.0 + b2) * gamma(1.0 + b2));
    }
    // 1/Γ(1+β/2-n/2) = sin(π(1+β/2-n/2)) Γ(n/2-β/2) / π
    let log_ratio = libm::lgamma(h - b2) - libm::lgamma(1.0 + b2 + h);
    let s = (PI * (1.0 + b2 - h)).sin();
    front / PI * s * log_ratio.exp()
}

#[derive(Debug, Clone)]
enum OmegaRule {
    Atoms(Vec<Atom>),
    /// Fourier coefficients of ω on the circle together with a Hermite table.
    Circle { coeffs: Vec<(f64, f64)>, values: Vec<f64>, slopes: Vec<f64> },
    Sphere { nodes: Vec<Vec<f64>>, masses: Vec<f64>, constant: Option<f64> },
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn orthogonal_probes(atoms: &[Atom], d: usize) -> Vec<Vec<f64>> {
    match d {
        2 => atoms.iter().map(|a| vec![-a.direction[1], a.direction[0]]).collect(),
        3 => {
            let mut out = Vec::new();
            for a in atoms {
                for b in atoms {
                    let c = cross(&a.direction, &b.direction);
                    let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                    if n > 1e-8 {
                        out.push(c.iter().map(|x| x / n).collect());
                    }
                }
                // a direction orthogonal to a single atom
                let e = if a.direction[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                let c = cross(&a.direction, &e);
                let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                out.push(c.iter().map(|x| x / n).collect());
                if out.len() > 4096 {
                    break;
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

/// The symbol ψ(ξ) = |ξ|^β ω_μ(ξ/|ξ|).
#[derive(Debug, Clone)]
pub struct Symbol {
    measure: SpectralMeasure,
    beta: f64,
    rule: OmegaRule,
    exact: bool,
}

impl Symbol {
    pub fn new(measure: SpectralMeasure, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 2.0) {
            return Err(Error::UnsupportedParameters(format!("beta = {beta} not in (0, 2)")));
        }
        let rule = match &measure.representation {
            Representation::Atoms(a) => OmegaRule::Atoms(a.clone()),
            Representation::Density { mesh, values } if mesh.dimension == 1 => OmegaRule::Atoms(
                mesh.nodes.iter().zip(values).map(|(n, v)| Atom { direction: n.clone(), weight: *v }).collect(),
            ),
            Representation::Density { mesh, values } if mesh.dimension == 2 => {
                let rho = circle_fourier(values);
                let coeffs: Vec<(f64, f64)> = rho
                    .iter()
                    .enumerate()
                    .map(|(n, (a, b))| {
                        let f = abs_cos_moment(beta, n);
                        (a * f, b * f)
                    })
                    .collect();
                // ω(θ) = ω(-θ): the table covers [0, π)
                let m = OMEGA_TABLE_SIZE;
                let mut values = Vec::with_capacity(m);
                let mut slopes = Vec::with_capacity(m);
                for j in 0..m {
                    let phi = PI * j as f64 / m as f64;
                    values.push(trig_eval(&coeffs, phi, |_| 1.0));
                    slopes.push(
                        coeffs
                            .iter()
                            .enumerate()
                            .map(|(n, (a, b))| {
                                let (s, c) = (n as f64 * phi).sin_cos();
                                n as f64 * (b * c - a * s)
                            })
                            .sum(),
                    );
                }
                OmegaRule::Circle { coeffs, values, slopes }
            }
            Representation::Density { mesh, values } => {
                let masses: Vec<f64> = values.iter().zip(&mesh.weights).map(|(v, w)| v * w).collect();
                let constant = values
                    .iter()
                    .all(|v| close(*v, values[0]))
                    .then(|| values[0] * 4.0 * PI / (beta + 1.0));
                OmegaRule::Sphere { nodes: mesh.nodes.clone(), masses, constant }
            }
        };
        let sym = Self { measure, beta, rule, exact: false };
        sym.assert_positive()?;
        Ok(sym)
    }

    /// Use direct summation of the trigonometric series instead of the table.
    pub fn with_exact_omega(mut self, exact: bool) -> Self {
        self.exact = exact;
        self
    }

    fn assert_positive(&self) -> Result<()> {
        let d = self.dimension();
        let mut probes: Vec<Vec<f64>> = match d {
            1 => vec![vec![1.0], vec![-1.0]],
            2 => (0..2 * OMEGA_TABLE_SIZE)
                .map(|j| {
                    let phi = PI * j as f64 / OMEGA_TABLE_SIZE as f64;
                    vec![phi.cos(), phi.sin()]
                })
                .collect(),
            _ => SphereMesh::sphere(12, 24)?.nodes,
        };
        // for atoms, ω vanishes exactly on the orthogonal complement of their span
        if let OmegaRule::Atoms(atoms) = &self.rule {
            probes.extend(orthogonal_probes(atoms, d));
        }
        for p in probes {
            let w = self.omega_unchecked(&p);
            if !(w > 1e-12 * self.measure.total_mass) {
                return Err(Error::InvalidMeasure(format!("omega vanishes in direction {p:?}")));
            }
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dimension(&self) -> usize {
        self.measure.dimension
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.measure
    }

    /// ω_μ(θ) for a unit vector θ.
    pub fn omega(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.dimension() {
            return Err(Error::InvalidInput(format!("direction has {} components, expected {}", theta.len(), self.dimension())));
        }
        let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= THETA_TOL) {
            return Err(Error::NonUnitDirection(norm));
        }
        Ok(self.omega_unchecked(theta))
    }

    /// ω_μ in the direction of θ (θ need not be normalized for d = 2).
    pub fn omega_unchecked(&self, theta: &[f64]) -> f64 {
        match &self.rule {
            OmegaRule::Atoms(atoms) => atoms
                .iter()
                .map(|a| {
                    let dot: f64 = a.direction.iter().zip(theta).map(|(x, y)| x * y).sum();
                    a.weight * dot.abs().powf(self.beta)
                })
                .sum(),
            OmegaRule::Circle { .. } => self.omega_angle(theta[1].atan2(theta[0])),
            OmegaRule::Sphere { nodes, masses, constant } => match constant {
                Some(c) => *c,
                None => nodes
                    .iter()
                    .zip(masses)
                    .map(|(n, m)| {
                        let dot: f64 = n.iter().zip(theta).map(|(x, y)| x * y).sum();
                        m * dot.abs().powf(self.beta)
                    })
                    .sum(),
            },
        }
    }

    /// ω_μ at polar angle φ (d = 2).
    pub fn omega_angle(&self, phi: f64) -> f64 {
        match &self.rule {
            OmegaRule::Circle { coeffs, values, slopes } => {
                if self.exact {
                    return trig_eval(coeffs, phi, |_| 1.0);
                }
                let m = values.len();
                let h = PI / m as f64;
                let u = phi.rem_euclid(PI) / h;
                let j = (u.floor() as usize).min(m - 1);
                let s = u - j as f64;
                let k = (j + 1) % m;
                let (s2, s3) = (s * s, s * s * s);
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                h00 * values[j] + h10 * h * slopes[j] + h01 * values[k] + h11 * h * slopes[k]
            }
            _ => self.omega_unchecked(&[phi.cos(), phi.sin()]),
        }
    }

    /// ψ(ξ); ψ(0) = 0.
    pub fn psi(&self, xi: &[f64]) -> f64 {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        if r2 == 0.0 {
            return 0.0;
        }
        let r = r2.sqrt();
        let w = match (&self.rule, xi.len()) {
            (OmegaRule::Circle { .. }, 2) => self.omega_angle(xi[1].atan2(xi[0])),
            _ => {
                let theta: Vec<f64> = xi.iter().map(|x| x / r).collect();
                self.omega_unchecked(&theta)
            }
        };
        r.powf(self.beta) * w
    }

    /// Range [min, max] of ω over the sphere (sampled).
    pub fn omega_bounds(&self) -> (f64, f64) {
        let d = self.dimension();
        let probes: Vec<Vec<f64>> = match d {
            1 => vec![vec![1.0]],
            2 => (0..OMEGA_TABLE_SIZE)
                .map(|j| {
                    let phi = 2.0 * PI * j as f64 / OMEGA_TABLE_SIZE as f64;
                    vec![phi.cos(), phi.sin()]
                })
                .collect(),
            _ => SphereMesh::sphere(12, 24).map(|m| m.nodes).unwrap_or_default(),
        };
        probes.iter().map(|p| self.omega_unchecked(p)).fold((f64::INFINITY, 0.0f64), |(lo, hi), w| (lo.min(w), hi.max(w)))
    }

    /// Direction-averaged ω, ∫ ω dS / |S^{d-1}|.
    pub fn omega_mean(&self) -> f64 {
        match self.dimension() {
            1 => self.omega_unchecked(&[1.0]),
            2 => match &self.rule {
                OmegaRule::Circle { coeffs, .. } => coeffs[0].0,
                _ => {
                    let n = OMEGA_TABLE_SIZE;
                    (0..n).map(|j| self.omega_angle(2.0 * PI * j as f64 / n as f64)).sum::<f64>() / n as f64
                }
            },
            _ => {
                let mesh = SphereMesh::sphere(24, 48).expect("valid rule");
                mesh.nodes.iter().zip(&mesh.weights).map(|(n, w)| w * self.omega_unchecked(n)).sum::<f64>()
                    / sphere_area(3)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_adaptive;

    fn atoms(d: usize, a: Vec<Vec<f64>>, symmetrize: bool) -> MeasureSpec {
        MeasureSpec { dimension: d, atoms: Some(a), density: None, angles: None, mass: None, symmetrize }
    }

    #[test]
    fn two_point_measure() {
        let m = build_measure(&MeasureSpec::unit_atoms_1d()).unwrap();
        assert_eq!(m.total_mass(), 1.0);
        let s = Symbol::new(m, 1.5).unwrap();
        assert_eq!(s.omega(&[1.0]).unwrap(), 1.0);
        assert_eq!(s.omega(&[-1.0]).unwrap(), 1.0);
        assert!((s.psi(&[2.0]) - 2f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(s.psi(&[0.0]), 0.0);
    }

    #[test]
    fn asymmetric_atoms_need_flag() {
        assert_eq!(build_measure(&atoms(1, vec![vec![1.0, 0.7]], false)), Err(Error::AsymmetricMeasure));
        let m = build_measure(&atoms(1, vec![vec![1.0, 0.7]], true)).unwrap();
        match m.representation() {
            Representation::Atoms(a) => {
                assert_eq!(a.len(), 2);
                assert!(a.iter().all(|x| x.weight == 0.35));
            }
            _ => unreachable!(),
        }
        assert!((m.total_mass() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_atoms() {
        assert_eq!(build_measure(&atoms(1, vec![vec![1.0, 0.0]], true)), Err(Error::NonPositiveWeight(0.0)));
        assert!(matches!(build_measure(&atoms(2, vec![vec![1.0, 0.1, 1.0]], true)), Err(Error::NonUnitDirection(_))));
        assert_eq!(build_measure(&atoms(4, vec![vec![1.0, 0.0, 0.0, 0.0, 1.0]], true)), Err(Error::UnsupportedDimension(4)));
    }

    #[test]
    fn uniform_circle_mass_and_omega() {
        let m = SpectralMeasure::uniform(2).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
        let s = Symbol::new(m, 1.0).unwrap();
        // oracle: adaptive quadrature of (1/2π)∫|cos φ|dφ
        let oracle = integrate_adaptive(|p: f64| p.cos().abs() / (2.0 * PI), &[0.0, PI / 2.0, 1.5 * PI, 2.0 * PI], 0.0, 1e-14, 200)
            .unwrap()
            .value;
        for phi in [0.0, 0.3, 1.0, 2.5, 4.0] {
            let th = [f64::cos(phi), f64::sin(phi)];
            let w = s.omega(&th).unwrap();
            assert!((w - oracle).abs() < 1e-6);
            assert!((w - s.omega(&[-th[0], -th[1]]).unwrap()).abs() <= 1e-12 * w);
        }
        assert!((s.psi(&[3.0, 0.0]) - 3.0 * 2.0 / PI).abs() < 1e-6);
    }

    #[test]
    fn abs_cos_moments_match_quadrature() {
        for &beta in &[0.5, 1.0, 1.5] {
            for n in [0usize, 2, 4, 10, 40] {
                let q = integrate_adaptive(
                    |p: f64| p.cos().abs().powf(beta) * (n as f64 * p).cos(),
                    &[0.0, PI / 2.0, 1.5 * PI, 2.0 * PI],
                    1e-13,
                    1e-12,
                    2000,
                )
                .unwrap()
                .value;
                assert!((abs_cos_moment(beta, n) - q).abs() < 1e-9, "{beta} {n}");
            }
        }
    }

    #[test]
    fn smooth_density_refinement() {
        let sample = |m: usize| -> Vec<f64> {
            (0..m)
                .map(|j| {
                    let phi = 2.0 * PI * j as f64 / m as f64;
                    1.0 + 0.5 * (2.0 * phi).cos() + 0.2 * (4.0 * phi).sin().powi(2)
                })
                .collect()
        };
        let build = |m: usize| {
            let spec = MeasureSpec {
                dimension: 2,
                atoms: None,
                density: Some(DensitySpec::Samples(sample(m))),
                angles: None,
                mass: None,
                symmetrize: false,
            };
            Symbol::new(build_measure(&spec).unwrap(), 1.3).unwrap()
        };
        let (a, b) = (build(64), build(128));
        for phi in [0.1, 0.7, 2.0, 3.3] {
            assert!((a.omega_angle(phi) - b.omega_angle(phi)).abs() < 1e-8);
            let ex = a.clone().with_exact_omega(true);
            assert!((a.omega_angle(phi) - ex.omega_angle(phi)).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_sphere_is_exact() {
        let s = Symbol::new(SpectralMeasure::uniform(3).unwrap(), 1.2).unwrap();
        let w = s.omega(&[0.0, 0.6, 0.8]).unwrap();
        assert!((w - 1.0 / 2.2).abs() < 1e-14);
        assert!((s.measure().total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_omega_direction_is_rejected() {
        let m = build_measure(&atoms(2, vec![vec![1.0, 0.0, 1.0], vec![-1.0, 0.0, 1.0]], false)).unwrap();
        assert!(matches!(Symbol::new(m, 1.0), Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn parses_json_blocks() {
        let m = parse_measure(r#"{"dimension":1,"atoms":[[1.0,0.5],[-1.0,0.5]]}"#).unwrap();
        assert_eq!(m.total_mass(), 1.0);
        let m = parse_measure(r#"{"dimension":2,"density":"uniform"}"#).unwrap();
        assert_eq!(m.dimension(), 2);
        assert!(matches!(parse_measure(r#"{"dimension":2,"density":"gaussian"}"#), Err(Error::InvalidMeasure(_))));
        assert!(matches!(parse_measure(r#"{"dimension":2,"foo":1}"#), Err(Error::Parse(_))));
    }

    #[test]
    fn lumped_atoms_keep_mass() {
        let m = SpectralMeasure::uniform(2).unwrap();
        let a = m.to_atoms(64).unwrap();
        assert_eq!(a.len(), 64);
        let mass: f64 = a.iter().map(|x| x.weight).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }
}
