//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero when any criterion fails. Positional numeric
//! arguments select a subset, e.g. `cargo test --test acceptance -- 3 7`.

use std::f64::consts::PI;
use std::time::Instant;

use fracstable::analysis::*;
use fracstable::grid::Grid;
use fracstable::kernels::*;
use fracstable::mittag_leffler::MittagLeffler;
use fracstable::params::ModelParams;
use fracstable::solver::*;
use fracstable::stochastic::*;
use fracstable::symbol::{SpectralMeasure, Symbol};
use fracstable::Result;

const TRIPLES: [(f64, f64, usize); 3] = [(0.5, 1.5, 1), (0.7, 1.2, 1), (0.5, 1.0, 2)];
const TIMES: [f64; 4] = [0.25, 1.0, 4.0, 16.0];
/// Seed of the Monte Carlo criterion, fixed before the run.
const MC_SEED: u64 = 1;
/// erfc(1)
const ERFC_ONE: f64 = 0.157_299_207_050_285_13;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { pass, detail: detail.into() })
}

fn symbol(d: usize, beta: f64) -> Symbol {
    let m = if d == 1 { SpectralMeasure::symmetric_1d(1.0) } else { SpectralMeasure::uniform(d) };
    Symbol::new(m.unwrap(), beta).unwrap()
}

fn default_points(d: usize) -> usize {
    if d == 1 {
        4096
    } else {
        512
    }
}

fn mass_identities() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for (a, b, d) in TRIPLES {
        let p = ModelParams::linear(a, b, d)?;
        let s = symbol(d, b);
        for t in TIMES {
            for kind in [KernelKind::Z, KernelKind::Y] {
                let g = sized_grid(kind, &p, &s, t, default_points(d), DEFAULT_TAIL_TOL)?;
                let f = kernel_field(kind, &p, &s, &g, t, &FieldOptions::default())?;
                worst = worst.max((f.mass() - kind.mass(&p, t)).abs());
            }
        }
    }
    verdict(worst <= 1e-6, format!("max |mass - exact| = {worst:.2e} (tol 1e-6)"))
}

fn scaling_law() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for (a, b, d) in TRIPLES {
        let p = ModelParams::linear(a, b, d)?;
        let s = symbol(d, b);
        for t in TIMES {
            for kind in [KernelKind::Z, KernelKind::Y] {
                let g = sized_grid(kind, &p, &s, 3.0 * t, default_points(d), DEFAULT_TAIL_TOL)?;
                worst = worst.max(check_scaling(kind, &p, &s, &g, t, 3.0)?);
            }
        }
    }
    verdict(worst <= 1e-8, format!("max scaling deviation = {worst:.2e} (tol 1e-8)"))
}

fn cross_path() -> Result<Verdict> {
    let p = ModelParams::linear(0.5, 1.0, 1)?;
    let s = symbol(1, 1.0);
    let sub = Subordination::new(&p, &s)?;
    // With ψ(ξ) = c|ξ|, G(τ, ·) is the Cauchy density of scale cτ.
    let c = s.psi(&[1.0]);
    let mut anchor: f64 = 0.0;
    for tau in [0.1, 1.0, 10.0] {
        for x in [0.0, 0.5, 3.0] {
            let sc = c * tau;
            let exact = sc / (PI * (sc * sc + x * x));
            anchor = anchor.max((sub.g(tau, x) - exact).abs() / exact);
        }
    }
    let grid = Grid::new(1, 8192.0, 1 << 21)?;
    let z = z_field(&p, &s, &grid, 1.0)?;
    let mut worst: f64 = 0.0;
    for x in [0.5, 1.0, 2.0, 3.0, 5.0] {
        let a = z.value_at(&[x]).expect("node inside the grid");
        let b = sub.z(1.0, x)?.value;
        worst = worst.max(((a - b) / b).abs());
    }
    verdict(
        worst <= 1e-4 && anchor <= 1e-10,
        format!("max relative spectral/subordination gap = {worst:.2e} (tol 1e-4); Cauchy anchor {anchor:.1e}"),
    )
}

fn mittag_leffler() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    let mut cache: Vec<((f64, f64), MittagLeffler)> = Vec::new();
    for line in include_str!("data/ml_oracle.csv").lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let key = (v[0], v[1]);
        if !cache.iter().any(|(k, _)| *k == key) {
            cache.push((key, MittagLeffler::new(v[0], v[1])?));
        }
        let e = &cache.iter().find(|(k, _)| *k == key).unwrap().1;
        worst = worst.max(((e.eval(v[2]) - v[3]) / v[3]).abs());
        rows += 1;
    }
    let e1 = (MittagLeffler::new(1.0, 1.0)?.eval(1.0) - (-1f64).exp()).abs();
    let eh = (MittagLeffler::new(0.5, 1.0)?.eval(1.0) - std::f64::consts::E * ERFC_ONE).abs();
    verdict(
        rows == 4000 && worst <= 1e-10 && e1 <= 1e-10 && eh <= 1e-10,
        format!("{rows} oracle rows, max rel err {worst:.2e}; E_1,1(-1) err {e1:.1e}; E_1/2,1(-1) err {eh:.1e} (tol 1e-10)"),
    )
}

fn decay_exponents() -> Result<Verdict> {
    let times = log_times(1.0, 64.0, 7);
    let mut fits = 0;
    let mut failed = Vec::new();
    let mut worst: f64 = 0.0;
    for (a, b, d) in TRIPLES {
        let p = ModelParams::linear(a, b, d)?;
        let s = symbol(d, b);
        let grids = DecayGrid::for_dimension(d);
        for kind in [KernelKind::Z, KernelKind::Y] {
            for q in [1.0, 2.0, f64::INFINITY] {
                if !admissible(kind, &p, q) {
                    continue;
                }
                let fit = fit_kernel_decay(kind, &p, &s, q, &times, &grids, DEFAULT_SLOPE_TOL)?;
                fits += 1;
                worst = worst.max((fit.fitted_slope - fit.theoretical_slope).abs());
                if !(fit.pass && fit.clean()) {
                    failed.push(format!("{kind} ({a},{b},{d}) p={q}: {:.4} vs {:.4}", fit.fitted_slope, fit.theoretical_slope));
                }
            }
        }
    }
    verdict(failed.is_empty(), format!("{fits} fits, max slope error {worst:.4} (tol 0.02) {}", failed.join("; ")))
}

fn critical_thresholds() -> Result<Verdict> {
    let p = ModelParams::linear(0.5, 1.5, 2)?;
    let s = symbol(2, 1.5);
    let scan = critical_threshold_scan(KernelKind::Z, &p, &s, &[2.0, 3.5, 4.0, 5.0], &ScanOptions::default())?;
    let rows: Vec<String> = scan
        .rows
        .iter()
        .map(|r| {
            let ch: Vec<String> = r.changes.iter().map(|c| format!("{:+.1}%", 100.0 * c)).collect();
            format!("p={} {:?}->{:?} [{}]", r.p, r.expected, r.observed, ch.join(" "))
        })
        .collect();
    let weak = fit_weak_decay(KernelKind::Z, &p, &s, 4.0, &log_times(1.0, 64.0, 7), &DecayGrid::for_dimension(2), 0.05)?;
    verdict(
        scan.pass() && weak.pass,
        format!(
            "κ₁ = {}; {}; weak L4 slope {:.4} vs {:.4} (tol 0.05)",
            scan.critical_exponent,
            rows.join("; "),
            weak.fitted_slope,
            weak.theoretical_slope
        ),
    )
}

fn y_from_z() -> Result<Verdict> {
    let p = ModelParams::linear(0.5, 1.5, 1)?;
    let s = symbol(1, 1.5);
    let a = y_from_z_check(&p, &s, &[1.0], 1.0, 1e-3)?;
    let b = y_from_z_check_against(&p, &s, &[1.0], 1.0, 5e-4, a.reference)?;
    let ratio = a.relative_error / b.relative_error;
    verdict(
        a.relative_error <= 1e-3 && (3.0..=5.5).contains(&ratio),
        format!("rel err {:.2e} at h=1e-3 (tol 1e-3), {:.2e} at h/2, ratio {ratio:.2} (≈4)", a.relative_error, b.relative_error),
    )
}

fn approximation_of_identity() -> Result<Verdict> {
    let p = ModelParams::linear(0.5, 1.5, 1)?;
    let s = symbol(1, 1.5);
    let g = sized_grid(KernelKind::Z, &p, &s, 1.0, 1 << 14, DEFAULT_TAIL_TOL)?;
    // C∞ bump supported on [-1, 1]
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
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [KernelKind::Z, KernelKind::Y] {
        let d: Vec<f64> =
            [1.0, 0.1, 0.01, 0.001].iter().map(|&t| smoothing_defect(kind, &p, &s, &g, t, &v, 2.0)).collect::<Result<_>>()?;
        ok &= d.windows(2).all(|w| w[1] < w[0]);
        parts.push(format!("{kind}: {}", d.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" > ")));
    }
    verdict(ok, parts.join("; "))
}

fn gaussian(g: &Grid, mass: f64, width: f64) -> Vec<f64> {
    let norm = mass / (width * (2.0 * PI).sqrt());
    (0..g.len()).map(|i| norm * (-0.5 * (g.node(i)[0] / width).powi(2)).exp()).collect()
}

fn solver() -> Result<Verdict> {
    let s = symbol(1, 1.5);
    let g = Grid::new(1, 80.0, 1024)?;
    let u0 = gaussian(&g, 1.0, 1.0);
    let mesh = MeshSpec { steps: 32, rho: None };

    let lin = ModelParams::new(0.5, 1.5, 2.0, 0.0, 1)?;
    let traj = picard_solve(&u0, &lin, &s, &g, 1.0, &mesh, &SolveOptions::default())?;
    let mut linear_err: f64 = 0.0;
    for (k, &t) in traj.times.iter().enumerate().skip(1) {
        let z = kernel_field(KernelKind::Z, &lin, &s, &g, t, &FieldOptions::unchecked())?;
        let zhat: Vec<f64> = g.analyze(&z.values).iter().map(|c| c.re).collect();
        let direct = g.convolve(&zhat, &u0);
        linear_err = direct.iter().zip(&traj.fields[k]).map(|(a, b)| (a - b).abs()).fold(linear_err, f64::max);
    }

    let nl = ModelParams::new(0.5, 1.5, 2.0, -1.0, 1)?;
    let opts = SolveOptions { gate_mode: GateMode::GlobalPositive, ..Default::default() };
    let traj = picard_run(&u0, &nl, &s, &g, 1.0, &mesh, &opts)?;
    let q = traj.contraction().unwrap_or(f64::NAN);
    let balance = mass_balance(&traj);
    let positivity = positivity_check(&traj);
    let domination = domination_excess(&traj);
    verdict(
        linear_err <= 1e-8 && traj.converged && q <= 0.9 && balance <= 1e-4 && positivity >= -1e-6 && domination <= 1e-6,
        format!(
            "λ=0 gap {linear_err:.1e}; converged {} in {} iterations, q = {q:.3}; mass balance {balance:.1e}; min u {positivity:.1e}; domination excess {domination:.1e}",
            traj.converged,
            traj.residuals.len()
        ),
    )
}

fn solution_decay() -> Result<Verdict> {
    let params = ModelParams::new(0.5, 1.5, 5.0, -1.0, 1)?;
    let s = symbol(1, 1.5);
    let g = Grid::new(1, 128.0, 32768)?;
    let u0 = gaussian(&g, 0.05, 0.02);
    let opts = SolveOptions { p: 4.0, p_prime: 1.0, gate_mode: GateMode::GlobalSmall, ..Default::default() };
    let traj = picard_solve(&u0, &params, &s, &g, 32.0, &MeshSpec { steps: 128, rho: None }, &opts)?;
    let mut ok = true;
    let mut parts = vec![format!("q = {:.4}", traj.contraction().unwrap_or(f64::NAN))];
    for p in [4.0, f64::INFINITY] {
        let fit = fit_solution_decay(&traj, p, 1.0, 32.0, 0.05)?;
        ok &= fit.pass;
        parts.push(format!("p={p}: slope {:.4} vs {:.4}", fit.fitted_slope, fit.theoretical_slope));
    }
    let prof = profile_error(&traj, 4.0, &[8.0, 16.0, 32.0])?;
    ok &= prof.decreasing() && prof.gate_violations.is_empty();
    let trace: Vec<String> = prof.times.iter().zip(&prof.normalized).map(|(t, e)| format!("{t:.1}:{e:.4}")).collect();
    parts.push(format!("profile error {}", trace.join(" ")));
    verdict(ok, parts.join("; "))
}

fn monte_carlo() -> Result<Verdict> {
    let p = ModelParams::linear(0.5, 1.0, 1)?;
    let s = symbol(1, 1.0);
    let n = 100_000;
    let g = sized_grid(KernelKind::Z, &p, &s, 1.0, KS_POINTS_1D, DEFAULT_TAIL_TOL)?;
    let ens = sample_time_changed(&p, s.measure(), 1.0, n, MC_SEED)?;
    let again = rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .expect("thread pool")
        .install(|| sample_time_changed(&p, s.measure(), 1.0, n, MC_SEED))?;
    let identical = ens.samples.iter().zip(&again.samples).all(|(a, b)| a.to_bits() == b.to_bits());
    let rep = empirical_report(&ens, &s, &g)?;
    verdict(
        rep.pass && identical,
        format!(
            "seed {MC_SEED}: KS = {:.5} vs {:.5}; outside {:.1e}; bit-identical rerun {identical}",
            rep.statistic, rep.threshold, rep.outside_fraction
        ),
    )
}

type Criterion = (usize, &'static str, fn() -> Result<Verdict>);

const CRITERIA: [Criterion; 11] = [
    (1, "mass identities", mass_identities),
    (2, "scaling law", scaling_law),
    (3, "cross-path oracle", cross_path),
    (4, "Mittag-Leffler", mittag_leffler),
    (5, "decay exponents", decay_exponents),
    (6, "critical thresholds", critical_thresholds),
    (7, "Y from Z", y_from_z),
    (8, "approximation of identity", approximation_of_identity),
    (9, "solver", solver),
    (10, "solution decay", solution_decay),
    (11, "Monte Carlo", monte_carlo),
];

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = Vec::new();
    for (id, name, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = run().unwrap_or_else(|e| Verdict { pass: false, detail: format!("error: {e}") });
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status} {name}: {} [{:.1}s]", v.detail, start.elapsed().as_secs_f64());
        if !v.pass {
            failures.push(id);
        }
    }
    if failures.is_empty() {
        println!("acceptance: all selected criteria pass");
    } else {
        println!("acceptance: failing criteria {failures:?}");
        std::process::exit(1);
    }
}
