//! Oscillation-number sweeps over energy, eigenvalue refinement through
//! `N~(E) = n + 1` and eigenfunction assembly from the quantum phase.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SymmetricPotential;
use crate::oracle::{harmonic_bc, simpson, Parity, Wavefunction};
use crate::qlm::{milne_residual, phase_grid, qlm_solve, total_phase, trial_airy, GridSpec, PhaseSolution, RiccatiField};
use crate::roots;
use crate::special::gamma;
use crate::semiclassical::{bc_series, nsc, wkb_quantize, BcMethod, BoundaryCondition};

/// Everything a single fixed-energy phase solve needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub grid: GridSpec,
    pub bc_method: BcMethod,
    /// Highest order tried by the boundary-value series.
    pub bc_order: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 30,
            grid: GridSpec::default(),
            bc_method: BcMethod::AsymptoticSeries,
            bc_order: 10,
        }
    }
}

/// How the energies of a sweep are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// In order of energy, each solve starting from the previous solution.
    WarmStart,
    /// Independent solves from the Airy trial on the rayon pool.
    Parallel,
}

/// Phase derivative at the origin by the chosen method.
pub fn boundary_condition(v: &SymmetricPotential, energy: f64, method: BcMethod, order: usize) -> Result<BoundaryCondition> {
    if !(energy > 0.0) {
        return Err(Error::NonPositiveEnergy(energy));
    }
    match method {
        BcMethod::WkbP0 => Ok(BoundaryCondition::explicit((2.0 * energy).sqrt() / v.hbar(), BcMethod::WkbP0)),
        BcMethod::AsymptoticSeries => bc_series(v, energy, order),
        BcMethod::HarmonicExact => {
            let c1 = match (v.harmonic_coefficient(), v.max_power()) {
                (Some(c), 2) => c,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "the exact harmonic boundary value needs a purely quadratic potential, got {v}"
                    )))
                }
            };
            let omega = (2.0 * c1).sqrt();
            let nu = energy / (v.hbar() * omega) - 0.5;
            // the Gamma ratio stays finite for -1 < nu < 0
            if !(nu > -1.0) {
                return Err(Error::InvalidArgument(format!("energy {energy} is too far below the zero-point energy")));
            }
            let ratio = if nu >= 0.0 {
                harmonic_bc(nu)?
            } else {
                2.0 * gamma(1.0 + 0.5 * nu) / gamma(0.5 * (1.0 + nu))
            };
            let value = ratio * (omega / v.hbar()).sqrt();
            Ok(BoundaryCondition::explicit(value, BcMethod::HarmonicExact))
        }
    }
}

const MAX_EXTENSIONS: usize = 8;

/// Quantum phase at `energy`, warm-started from `warm` when given. The far
/// end of the grid is pushed out while the phase tail is too large.
pub fn solve_phase(
    v: &SymmetricPotential,
    energy: f64,
    settings: &SolverSettings,
    warm: Option<&RiccatiField>,
) -> Result<PhaseSolution> {
    let bc = boundary_condition(v, energy, settings.bc_method, settings.bc_order)?;
    let mut grid_spec = settings.grid;
    for _ in 0..MAX_EXTENSIONS {
        let grid = phase_grid(v, energy, &grid_spec, settings.tol)?;
        let cold = || trial_airy(v, energy, &grid);
        let attempt = match warm {
            Some(w) => match qlm_solve(v, energy, &w.resample(v, &grid), &bc, settings.tol, settings.max_iter) {
                Ok(sol) => Ok(sol),
                Err(Error::NoConvergence { .. }) => qlm_solve(v, energy, &cold()?, &bc, settings.tol, settings.max_iter),
                Err(e) => Err(e),
            },
            None => qlm_solve(v, energy, &cold()?, &bc, settings.tol, settings.max_iter),
        };
        let sol = attempt?;
        match total_phase(&sol) {
            Ok(_) => return Ok(sol),
            Err(Error::TailTooLarge { .. }) => grid_spec.xmax_factor *= 1.25,
            Err(e) => return Err(e),
        }
    }
    Err(Error::TailTooLarge {
        bound: f64::INFINITY,
        tol: settings.tol,
    })
}

/// `N~(E) = sigma(inf, E) / pi`.
pub fn oscillation_number(v: &SymmetricPotential, energy: f64, settings: &SolverSettings) -> Result<f64> {
    solve_phase(v, energy, settings, None)?.oscillation_number()
}

/// Fritsch-Carlson monotone cubic through increasing data.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n || x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("interpolation needs at least two increasing abscissas".into()));
        }
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d = vec![delta[0]; 2];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                    let (w1, w2) = (2.0 * h1 + h0, h1 + 2.0 * h0);
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d[0] = end_slope(x[1] - x[0], x[2] - x[1], delta[0], delta[1]);
            d[n - 1] = end_slope(x[n - 1] - x[n - 2], x[n - 2] - x[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = self.x.partition_point(|&a| a <= t).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (h00, h10) = ((1.0 + 2.0 * s) * (1.0 - s).powi(2), s * (1.0 - s).powi(2));
        let (h01, h11) = (s * s * (3.0 - 2.0 * s), s * s * (s - 1.0));
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    /// Abscissa where the interpolant crosses `target`, if inside the data.
    pub fn inverse(&self, target: f64) -> Option<f64> {
        let i = self.y.windows(2).position(|w| w[0] <= target && target <= w[1])?;
        let (mut lo, mut hi) = (self.x[i], self.x[i + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.abs() {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// A quantized level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: usize,
    #[serde(rename = "E")]
    pub energy: f64,
}

/// A sweep energy at which the solver failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedPoint {
    #[serde(rename = "E")]
    pub energy: f64,
    pub error: String,
}

/// Per-energy solver diagnostics, aligned with the grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
    pub failed: Vec<FailedPoint>,
}

/// Sampled `N~(E)` with the levels it encloses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub potential: String,
    pub bc_method: BcMethod,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(rename = "grid")]
    pub energies: Vec<f64>,
    pub ntilde: Vec<f64>,
    /// First-order oscillation number on the same grid, when requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nsc: Option<Vec<f64>>,
    pub eigenvalues: Vec<Level>,
    pub diagnostics: Diagnostics,
}

impl SpectrumTable {
    pub fn interpolant(&self) -> Result<MonotoneCubic> {
        MonotoneCubic::new(&self.energies, &self.ntilde)
    }

    /// Adds the first-order `N^sc(E)` column.
    pub fn with_semiclassical(mut self, v: &SymmetricPotential) -> Result<Self> {
        self.nsc = Some(self.energies.iter().map(|&e| nsc(v, e)).collect::<Result<_>>()?);
        Ok(self)
    }

    /// Header `E,ntilde[,nsc]` then one row per grid energy.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        match &self.nsc {
            Some(_) => writeln!(w, "E,ntilde,nsc")?,
            None => writeln!(w, "E,ntilde")?,
        }
        for i in 0..self.energies.len() {
            write!(w, "{:.16e},{:.16e}", self.energies[i], self.ntilde[i])?;
            if let Some(s) = &self.nsc {
                write!(w, ",{:.16e}", s[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// `N~(E)` on `samples` evenly spaced energies in `[e_min, e_max]`, with
/// every level whose crossing `N~ = n + 1` falls inside refined by fresh
/// solves. Fails if more than a tenth of the energies fail.
pub fn oscillation_number_sweep(
    v: &SymmetricPotential,
    e_min: f64,
    e_max: f64,
    samples: usize,
    settings: &SolverSettings,
    mode: SweepMode,
) -> Result<SpectrumTable> {
    if !(e_min > 0.0 && e_max > e_min) {
        return Err(Error::InvalidArgument(format!("need 0 < e_min < e_max, got [{e_min}, {e_max}]")));
    }
    if samples < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 samples, got {samples}")));
    }
    let energies: Vec<f64> = (0..samples)
        .map(|i| e_min + (e_max - e_min) * i as f64 / (samples - 1) as f64)
        .collect();
    let point = |sol: Result<PhaseSolution>| -> Result<(f64, usize, f64, PhaseSolution)> {
        let sol = sol?;
        let n = sol.oscillation_number()?;
        Ok((n, sol.iterations, milne_residual(&sol, v), sol))
    };
    let results: Vec<Result<(f64, usize, f64)>> = match mode {
        SweepMode::WarmStart => {
            let mut warm: Option<RiccatiField> = None;
            energies
                .iter()
                .map(|&e| {
                    let r = point(solve_phase(v, e, settings, warm.as_ref()));
                    r.map(|(n, it, res, sol)| {
                        warm = Some(sol.field);
                        (n, it, res)
                    })
                })
                .collect()
        }
        SweepMode::Parallel => energies
            .par_iter()
            .map(|&e| point(solve_phase(v, e, settings, None)).map(|(n, it, res, _)| (n, it, res)))
            .collect(),
    };

    let mut table = SpectrumTable {
        potential: v.to_string(),
        bc_method: settings.bc_method,
        lambda: None,
        energies: Vec::new(),
        ntilde: Vec::new(),
        nsc: None,
        eigenvalues: Vec::new(),
        diagnostics: Diagnostics::default(),
    };
    for (e, r) in energies.iter().zip(results) {
        match r {
            Ok((n, it, res)) => {
                table.energies.push(*e);
                table.ntilde.push(n);
                table.diagnostics.iterations.push(it);
                table.diagnostics.residuals.push(res);
            }
            Err(err) => table.diagnostics.failed.push(FailedPoint {
                energy: *e,
                error: err.to_string(),
            }),
        }
    }
    let failed = table.diagnostics.failed.len();
    if failed * 10 > samples || table.energies.len() < 2 {
        return Err(Error::SweepFailed { failed, total: samples });
    }

    // crossings N~ = n + 1 between neighbouring samples
    let mut brackets = Vec::new();
    for i in 0..table.energies.len() - 1 {
        let (a, b) = (table.ntilde[i], table.ntilde[i + 1]);
        let first = a.floor() as i64 + 1;
        for m in first..=(b.floor() as i64) {
            if m >= 1 && (m as f64) > a {
                brackets.push((m as usize - 1, table.energies[i], table.energies[i + 1]));
            }
        }
        if a.fract() == 0.0 && a >= 1.0 && i == 0 {
            brackets.push((a as usize - 1, table.energies[0], table.energies[0]));
        }
    }
    let energy_tol = settings.tol.max(1e-14) * 10.0;
    table.eigenvalues = brackets
        .par_iter()
        .map(|&(n, lo, hi)| {
            if lo == hi {
                return Ok(Level { n, energy: lo });
            }
            refine(v, n, lo, hi, energy_tol, settings).map(|energy| Level { n, energy })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(table)
}

fn refine(v: &SymmetricPotential, n: usize, lo: f64, hi: f64, tol: f64, settings: &SolverSettings) -> Result<f64> {
    let target = n as f64 + 1.0;
    roots::brent(|e| Ok(oscillation_number(v, e, settings)? - target), lo, hi, tol, 100)
}

/// Level `n` from `N~(E_n) = n + 1`, bracketed outward from the first-order
/// energy and refined until `|dE| < tol max(1, E)`.
pub fn eigenvalue(v: &SymmetricPotential, n: usize, tol: f64, settings: &SolverSettings) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let target = n as f64 + 1.0;
    let f = |e: f64| Ok(oscillation_number(v, e, settings)? - target);
    let guess = wkb_quantize(v, n)?;
    let mut lo = guess;
    let mut hi = guess;
    let f0 = f(guess)?;
    if f0 == 0.0 {
        return Ok(guess);
    }
    let factor = 1.0 + 0.5 / (n as f64 + 1.0);
    let mut tries = 0;
    if f0 < 0.0 {
        loop {
            lo = hi;
            hi *= factor;
            if f(hi)? >= 0.0 {
                break;
            }
            tries += 1;
            if tries > 60 {
                return Err(Error::BracketNotFound {
                    level: n,
                    reason: "oscillation number stays below n + 1".into(),
                });
            }
        }
    } else {
        loop {
            hi = lo;
            lo /= factor;
            if f(lo)? <= 0.0 {
                break;
            }
            tries += 1;
            if tries > 60 {
                return Err(Error::BracketNotFound {
                    level: n,
                    reason: "oscillation number stays above n + 1".into(),
                });
            }
        }
    }
    let scale = tol * lo.max(1.0) / hi.max(1.0);
    roots::brent(f, lo, hi, scale.max(1e-15), 200)
}

/// Normalized `psi = alpha sin sigma` on `[-x_max, x_max]` at an eigenvalue,
/// extended by parity. The sign makes `psi(0) > 0` (even levels) or
/// `psi'(0) > 0` (odd levels).
pub fn eigenfunction(v: &SymmetricPotential, energy: f64, settings: &SolverSettings) -> Result<Wavefunction> {
    let sol = solve_phase(v, energy, settings, None)?;
    let big_n = sol.oscillation_number()?;
    let n = (big_n - 1.0).round().max(0.0);
    let mismatch = big_n - (n + 1.0);
    if mismatch.abs() > 1e-6 {
        return Err(Error::NotAnEigenvalue { energy, mismatch });
    }
    let level = n as usize;
    // sin((n + 1) pi - remaining) without the rounding of (n + 1) pi
    let flip = if level % 2 == 0 { 1.0 } else { -1.0 };
    let half: Vec<f64> = sol.alpha.iter().zip(&sol.remaining).map(|(a, r)| flip * a * r.sin()).collect();
    let parity = Parity::of_level(level);
    let sign = match parity {
        Parity::Even => half[0].signum(),
        Parity::Odd => half[1].signum(),
    };
    let m = sol.grid.len();
    let mut x = Vec::with_capacity(2 * m - 1);
    let mut psi = Vec::with_capacity(2 * m - 1);
    for i in (1..m).rev() {
        x.push(-sol.grid[i]);
        psi.push(sign * if parity == Parity::Odd { -half[i] } else { half[i] });
    }
    for i in 0..m {
        x.push(sol.grid[i]);
        psi.push(sign * if parity == Parity::Odd && i == 0 { 0.0 } else { half[i] });
    }
    let h = sol.grid[1] - sol.grid[0];
    let norm = simpson(&psi.iter().map(|p| p * p).collect::<Vec<_>>(), h).sqrt();
    psi.iter_mut().for_each(|p| *p /= norm);
    Ok(Wavefunction { x, psi, energy })
}

/// Relative L2 distance between two wavefunctions, sampled on the grid of `a`.
pub fn relative_l2_distance(a: &Wavefunction, b: &Wavefunction) -> f64 {
    let diff: Vec<f64> = a.x.iter().zip(&a.psi).map(|(&x, &p)| (p - b.interpolate(x)).powi(2)).collect();
    let norm: Vec<f64> = a.x.iter().map(|&x| b.interpolate(x).powi(2)).collect();
    let h = a.x[1] - a.x[0];
    (simpson(&diff, h) / simpson(&norm, h)).sqrt()
}

/// Sweeps `x^2/2 + lambda x^10/2` for each coupling.
pub fn lambda_sweep(
    lambdas: &[f64],
    e_min: f64,
    e_max: f64,
    samples: usize,
    settings: &SolverSettings,
    mode: SweepMode,
) -> Result<Vec<SpectrumTable>> {
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(Error::InvalidArgument(format!("coupling must be positive, got {lambda}")));
            }
            let v = SymmetricPotential::decadic(lambda)?;
            let mut table = oscillation_number_sweep(&v, e_min, e_max, samples, settings, mode)?;
            table.lambda = Some(lambda);
            Ok(table)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{numerov_eigenvalue, numerov_wavefunction};

    fn exact() -> SolverSettings {
        SolverSettings {
            bc_method: BcMethod::HarmonicExact,
            ..SolverSettings::default()
        }
    }

    #[test]
    fn harmonic_line() {
        let v = SymmetricPotential::harmonic();
        let t = oscillation_number_sweep(&v, 0.1, 5.5, 28, &exact(), SweepMode::Parallel).unwrap();
        for (e, n) in t.energies.iter().zip(&t.ntilde) {
            assert!((n - (e + 0.5)).abs() < 1e-8, "{e}: {n}");
        }
        let levels: Vec<usize> = t.eigenvalues.iter().map(|l| l.n).collect();
        assert_eq!(levels, vec![0, 1, 2, 3, 4]);
        for l in &t.eigenvalues {
            assert!((l.energy - (l.n as f64 + 0.5)).abs() < 1e-10, "{l:?}");
        }
    }

    #[test]
    fn harmonic_exact_bc_with_hbar_and_frequency() {
        // V = 2 x^2 (omega = 2), hbar = 0.5: levels hbar omega (n + 1/2)
        let v = SymmetricPotential::new(&[(2, 2.0)]).unwrap().with_hbar(0.5).unwrap();
        let e = eigenvalue(&v, 3, 1e-12, &exact()).unwrap();
        assert!((e - 3.5).abs() < 1e-10, "{e}");
    }

    #[test]
    fn quartic_ground_state_matches_numerov() {
        let v = SymmetricPotential::quartic();
        let e = eigenvalue(&v, 0, 1e-12, &SolverSettings::default()).unwrap();
        let reference = numerov_eigenvalue(&v, 0).unwrap();
        assert!((e - reference).abs() < 1e-9, "{e} {reference}");
        assert_eq!(format!("{e:.5}"), "0.53018");
    }

    #[test]
    fn bc_independence() {
        let v = SymmetricPotential::sextic();
        let series = eigenvalue(&v, 2, 1e-13, &SolverSettings::default()).unwrap();
        let crude = SolverSettings {
            bc_method: BcMethod::WkbP0,
            ..SolverSettings::default()
        };
        let wkb = eigenvalue(&v, 2, 1e-13, &crude).unwrap();
        assert!((series - wkb).abs() < 1e-9, "{series} {wkb}");
    }

    #[test]
    fn warm_and_parallel_sweeps_agree() {
        let v = SymmetricPotential::quartic();
        let s = SolverSettings::default();
        let a = oscillation_number_sweep(&v, 0.2, 6.0, 15, &s, SweepMode::WarmStart).unwrap();
        let b = oscillation_number_sweep(&v, 0.2, 6.0, 15, &s, SweepMode::Parallel).unwrap();
        for (x, y) in a.ntilde.iter().zip(&b.ntilde) {
            assert!((x - y).abs() < 1e-10, "{x} {y}");
        }
        assert!(a.ntilde.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(a.eigenvalues, b.eigenvalues);
        for w in a.eigenvalues.windows(2) {
            assert!(w[1].energy > w[0].energy && w[1].n == w[0].n + 1);
        }
    }

    #[test]
    fn sweep_levels_match_direct_refinement() {
        let v = SymmetricPotential::quartic();
        let s = SolverSettings::default();
        let t = oscillation_number_sweep(&v, 0.3, 4.0, 12, &s, SweepMode::Parallel).unwrap();
        assert_eq!(t.eigenvalues.len(), 3);
        for l in &t.eigenvalues {
            let direct = eigenvalue(&v, l.n, 1e-13, &s).unwrap();
            assert!((direct - l.energy).abs() < 1e-9, "{l:?} {direct}");
        }
    }

    #[test]
    fn harmonic_interpolant_is_exact_on_a_line() {
        let v = SymmetricPotential::harmonic();
        let t = oscillation_number_sweep(&v, 0.2, 3.0, 8, &exact(), SweepMode::Parallel).unwrap();
        let p = t.interpolant().unwrap();
        for n in 0..3 {
            assert!((p.inverse(n as f64 + 1.0).unwrap() - (n as f64 + 0.5)).abs() < 1e-8);
        }
    }

    #[test]
    fn pchip_is_monotone_and_interpolating() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 0.1, 0.2, 3.0, 3.05];
        let p = MonotoneCubic::new(&x, &y).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-15);
        }
        let mut last = -1.0;
        for k in 0..=400 {
            let v = p.eval(k as f64 * 0.01);
            assert!(v >= last);
            last = v;
        }
        let t = p.inverse(1.5).unwrap();
        assert!((p.eval(t) - 1.5).abs() < 1e-12);
        assert!(p.inverse(5.0).is_none());
    }

    #[test]
    fn gaussian_from_phase() {
        let v = SymmetricPotential::harmonic();
        let wf = eigenfunction(&v, 0.5, &exact()).unwrap();
        let c = std::f64::consts::PI.powf(-0.25);
        for (x, p) in wf.x.iter().zip(&wf.psi) {
            assert!((p - c * (-x * x / 2.0).exp()).abs() < 1e-6 * c, "{x}: {p}");
        }
    }

    #[test]
    fn eigenfunctions_match_numerov() {
        let v = SymmetricPotential::quartic();
        let s = SolverSettings::default();
        for n in 0..4 {
            let e = eigenvalue(&v, n, 1e-13, &s).unwrap();
            let wf = eigenfunction(&v, e, &s).unwrap();
            assert_eq!(wf.node_count(), n);
            let reference = numerov_wavefunction(&v, e, Parity::of_level(n)).unwrap();
            let d = relative_l2_distance(&wf, &reference);
            assert!(d < 1e-6, "{n}: {d}");
            for (x, p) in wf.x.iter().zip(&wf.psi) {
                let mirror = wf.interpolate(-x);
                let expect = if n % 2 == 0 { *p } else { -p };
                assert!((mirror - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn off_eigenvalue_is_rejected() {
        let v = SymmetricPotential::harmonic();
        assert!(matches!(eigenfunction(&v, 0.8, &exact()), Err(Error::NotAnEigenvalue { .. })));
    }

    #[test]
    fn decadic_strong_coupling() {
        let v = SymmetricPotential::decadic(1000.0).unwrap();
        let e = eigenvalue(&v, 0, 1e-12, &SolverSettings::default()).unwrap();
        assert!((e - 2.09).abs() < 0.02, "{e}");
    }

    #[test]
    fn lambda_ordering() {
        let s = SolverSettings::default();
        let tables = lambda_sweep(&[0.01, 1.0, 50.0], 1.0, 4.0, 5, &s, SweepMode::Parallel).unwrap();
        for k in 0..5 {
            assert!(tables[0].ntilde[k] > tables[1].ntilde[k] && tables[1].ntilde[k] > tables[2].ntilde[k]);
        }
        // away from levels the curve depends on the boundary value, so the
        // harmonic limit is compared with the same boundary method
        let small = lambda_sweep(&[1e-10], 0.6, 3.0, 6, &s, SweepMode::Parallel).unwrap();
        let harmonic = oscillation_number_sweep(&SymmetricPotential::harmonic(), 0.6, 3.0, 6, &s, SweepMode::Parallel).unwrap();
        for (a, b) in small[0].ntilde.iter().zip(&harmonic.ntilde) {
            assert!((a - b).abs() < 1e-6, "{a} {b}");
        }
        for l in &small[0].eigenvalues {
            assert!((l.energy - (l.n as f64 + 0.5)).abs() < 1e-6, "{l:?}");
        }
    }

    #[test]
    fn table_serialization() {
        let v = SymmetricPotential::harmonic();
        let t = oscillation_number_sweep(&v, 0.5, 1.5, 4, &exact(), SweepMode::WarmStart)
            .unwrap()
            .with_semiclassical(&v)
            .unwrap();
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["bc_method"], "harmonic_exact");
        assert_eq!(json["grid"].as_array().unwrap().len(), 4);
        assert!(json["eigenvalues"][0]["E"].is_number());
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("E,ntilde,nsc\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
