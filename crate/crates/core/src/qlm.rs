//! Exact quantum phase at fixed energy from the quasilinearized Riccati
//! equation `M' = i(k^2 - M^2)`, `k^2 = p^2 / hbar^2`, where
//! `M = sigma' + (i/2) (ln sigma')'`.
//!
//! Each iteration solves the linear equation
//! `M_q' = i(k^2 + M_{q-1}^2) - 2 i M_{q-1} M_q` outward from the origin with
//! `M_q(0) = bc` by four-stage Gauss-Legendre collocation on a uniform grid.
//! The real and imaginary parts are kept apart in the stage solve so that
//! `Re M` keeps its relative precision where it decays exponentially.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SymmetricPotential;
use crate::quad::GaussLegendre;
use crate::semiclassical::{airy_log_phase_slope, BoundaryCondition};

const STAGES: usize = 4;

/// Controls the uniform solution grid on `[0, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Nodes per local wavelength `2 pi hbar / |p|`, at the largest `|p|` on the grid.
    pub nodes_per_wavelength: f64,
    /// Minimum number of cells between the origin and the turning point.
    pub min_well_cells: usize,
    /// `x_max` is at least this multiple of the turning point.
    pub xmax_factor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nodes_per_wavelength: 40.0,
            min_well_cells: 200,
            xmax_factor: 2.5,
        }
    }
}

/// Forbidden action beyond which `Re M ~ exp(-2 action)` would leave the
/// normal floating-point range.
const MAX_ACTION: f64 = 250.0;

/// Uniform grid for `qlm_solve` at energy `E`.
///
/// The far end is placed where the forbidden action reaches
/// `ln(1/tol)/2 + 1`, which puts the neglected phase tail well below `tol`,
/// and no closer than `xmax_factor * t2` unless the action there would
/// exceed `MAX_ACTION`. The spacing resolves the largest `|p|` on the grid.
pub fn phase_grid(v: &SymmetricPotential, energy: f64, spec: &GridSpec, tol: f64) -> Result<Vec<f64>> {
    if !(spec.nodes_per_wavelength > 0.0 && spec.min_well_cells > 0 && spec.xmax_factor > 1.0) {
        return Err(Error::InvalidArgument(format!("bad grid specification {spec:?}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let t2 = v.turning_point(energy)?.t2;
    let hbar = v.hbar();
    let action = |x: f64| v.forbidden_action(energy, t2, x) / hbar;
    let target = 0.5 * (1.0 / tol).ln() + 1.0;
    let x_max = action_point(&action, t2, target).max(action_point(&action, t2, MAX_ACTION).min(spec.xmax_factor * t2));

    let p_max = (2.0 * energy).sqrt().max((-v.momentum_sq(energy, x_max)).max(0.0).sqrt());
    let airy_length = (hbar * hbar / (2.0 * v.derivative(t2))).cbrt();
    let h = (2.0 * PI * hbar / (spec.nodes_per_wavelength * p_max))
        .min(t2 / spec.min_well_cells as f64)
        .min(airy_length / 10.0);
    let cells = (x_max / h).ceil() as usize;
    Ok((0..=cells).map(|i| x_max * i as f64 / cells as f64).collect())
}

/// Smallest `x > t2` with `action(x) >= target`, to a relative `1e-6`.
fn action_point(action: &impl Fn(f64) -> f64, t2: f64, target: f64) -> f64 {
    let mut lo = t2;
    let mut hi = 1.25 * t2;
    while action(hi) < target {
        lo = hi;
        hi = t2 + 2.0 * (hi - t2);
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if action(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Complex `M(x)` sampled on a grid, with the collocation stage values of the
/// iterate that produced it when available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiField {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub energy: f64,
    #[serde(skip)]
    stages: Option<Vec<[Complex64; STAGES]>>,
}

impl RiccatiField {
    pub fn new(grid: Vec<f64>, values: Vec<Complex64>, energy: f64) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::InvalidArgument("grid and values must match and hold at least two nodes".into()));
        }
        if grid[0] != 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("grid must start at 0 and increase".into()));
        }
        Ok(Self {
            grid,
            values,
            energy,
            stages: None,
        })
    }

    fn from_fn(grid: &[f64], energy: f64, f: impl Fn(f64) -> Complex64) -> Self {
        let c = tableau().c;
        let values = grid.iter().map(|&x| f(x)).collect();
        let stages = grid
            .windows(2)
            .map(|w| {
                let h = w[1] - w[0];
                std::array::from_fn(|j| f(w[0] + c[j] * h))
            })
            .collect();
        Self {
            grid: grid.to_vec(),
            values,
            energy,
            stages: Some(stages),
        }
    }

    /// Local cubic interpolation; beyond the last node `M ~ -i|k|`.
    pub fn interpolate(&self, v: &SymmetricPotential, x: f64) -> Complex64 {
        let g = &self.grid;
        let n = g.len();
        if x > g[n - 1] {
            let k = (-v.momentum_sq(self.energy, x)).max(0.0).sqrt() / v.hbar();
            return Complex64::new(0.0, -k);
        }
        let i = g.partition_point(|&t| t <= x).clamp(2, n.saturating_sub(2).max(2)) - 2;
        let lo = i.min(n.saturating_sub(4));
        let idx: Vec<usize> = (lo..(lo + 4).min(n)).collect();
        let mut out = Complex64::new(0.0, 0.0);
        for &a in &idx {
            let mut w = 1.0;
            for &b in &idx {
                if a != b {
                    w *= (x - g[b]) / (g[a] - g[b]);
                }
            }
            out += self.values[a] * w;
        }
        out
    }

    /// The field on another grid, for warm starts across energies.
    pub fn resample(&self, v: &SymmetricPotential, grid: &[f64]) -> Self {
        if grid == self.grid.as_slice() && self.stages.is_some() {
            return self.clone();
        }
        Self::from_fn(grid, self.energy, |x| self.interpolate(v, x))
    }

    fn stage_values(&self, v: &SymmetricPotential) -> Vec<[Complex64; STAGES]> {
        match &self.stages {
            Some(s) => s.clone(),
            None => Self::from_fn(&self.grid, self.energy, |x| self.interpolate(v, x))
                .stages
                .expect("from_fn fills stages"),
        }
    }
}

/// Trial field from the Airy-carrier phase: `M0 = s + (i/2)(ln s)'` with
/// `s = d sigma_sc/dx` and the log-derivative by fourth-order differences
/// on the (uniform) grid, using evenness at the origin.
pub fn trial_airy(v: &SymmetricPotential, energy: f64, grid: &[f64]) -> Result<RiccatiField> {
    check_uniform(grid)?;
    let ls = airy_log_phase_slope(v, energy, grid)?;
    let n = ls.len();
    let h = grid[1] - grid[0];
    let at = |i: isize| -> f64 {
        if i < 0 {
            ls[(-i) as usize]
        } else {
            ls[i as usize]
        }
    };
    let values = (0..n)
        .map(|i| {
            let d = if i + 2 < n {
                let j = i as isize;
                (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * h)
            } else {
                let f = |k: usize| ls[i - k];
                if i + 1 < n {
                    (3.0 * ls[i + 1] + 10.0 * f(0) - 18.0 * f(1) + 6.0 * f(2) - f(3)) / (12.0 * h)
                } else {
                    (25.0 * f(0) - 48.0 * f(1) + 36.0 * f(2) - 16.0 * f(3) + 3.0 * f(4)) / (12.0 * h)
                }
            };
            Complex64::new(ls[i].exp(), 0.5 * d)
        })
        .collect();
    RiccatiField::new(grid.to_vec(), values, energy)
}

/// Step trial: `|k|` inside the well, `-i|k|` beyond the turning point,
/// blended linearly across three cells centred on it.
pub fn trial_step(v: &SymmetricPotential, energy: f64, grid: &[f64]) -> Result<RiccatiField> {
    check_uniform(grid)?;
    let t2 = v.turning_point(energy)?.t2;
    let h = grid[1] - grid[0];
    let hbar = v.hbar();
    Ok(RiccatiField::from_fn(grid, energy, |x| {
        let k = v.momentum_sq(energy, x).abs().sqrt() / hbar;
        let w = ((x - (t2 - 1.5 * h)) / (3.0 * h)).clamp(0.0, 1.0);
        Complex64::new((1.0 - w) * k, -w * k)
    }))
}

fn check_uniform(grid: &[f64]) -> Result<()> {
    if grid.len() < 6 || grid[0] != 0.0 {
        return Err(Error::InvalidArgument("grid must start at 0 and hold at least six nodes".into()));
    }
    let h = grid[1] - grid[0];
    if !(h > 0.0) || grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::InvalidArgument("grid must be uniform and increasing".into()));
    }
    Ok(())
}

struct Tableau {
    c: [f64; STAGES],
    a: [[f64; STAGES]; STAGES],
    b: [f64; STAGES],
}

fn tableau() -> &'static Tableau {
    static T: OnceLock<Tableau> = OnceLock::new();
    T.get_or_init(|| {
        let gl = GaussLegendre::new(STAGES);
        let c: [f64; STAGES] = std::array::from_fn(|j| 0.5 * (1.0 + gl.nodes[j]));
        let b: [f64; STAGES] = std::array::from_fn(|j| 0.5 * gl.weights[j]);
        // sum_j a_ij c_j^m = c_i^(m+1) / (m+1)
        let a = std::array::from_fn(|i| {
            let mut mat = [[0.0; STAGES]; STAGES];
            let mut rhs = [0.0; STAGES];
            for m in 0..STAGES {
                for j in 0..STAGES {
                    mat[m][j] = c[j].powi(m as i32);
                }
                rhs[m] = c[i].powi(m as i32 + 1) / (m as f64 + 1.0);
            }
            solve_dense(&mut mat, &mut rhs);
            rhs
        });
        Tableau { c, a, b }
    })
}

/// Gaussian elimination with partial pivoting; the solution replaces `rhs`.
fn solve_dense<const N: usize>(mat: &mut [[f64; N]; N], rhs: &mut [f64; N]) {
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| mat[i][col].abs().total_cmp(&mat[j][col].abs()))
            .unwrap_or(col);
        mat.swap(col, piv);
        rhs.swap(col, piv);
        let d = mat[col][col];
        for row in col + 1..N {
            let f = mat[row][col] / d;
            if f != 0.0 {
                for k in col..N {
                    mat[row][k] -= f * mat[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    for col in (0..N).rev() {
        let mut s = rhs[col];
        for k in col + 1..N {
            s -= mat[col][k] * rhs[k];
        }
        rhs[col] = s / mat[col][col];
    }
}

/// One quasilinearization step: the linear equation around `prev`, solved
/// outward from `M(0) = bc`.
pub fn qlm_iterate(v: &SymmetricPotential, prev: &RiccatiField, bc: f64) -> RiccatiField {
    let t = tableau();
    let hbar2 = v.hbar() * v.hbar();
    let energy = prev.energy;
    let old = prev.stage_values(v);
    let grid = &prev.grid;
    let mut values = Vec::with_capacity(grid.len());
    let mut stages = Vec::with_capacity(grid.len() - 1);
    let mut y = Complex64::new(bc, 0.0);
    values.push(y);
    for (n, w) in grid.windows(2).enumerate() {
        let h = w[1] - w[0];
        let mut cr = [0.0; STAGES];
        let mut ci = [0.0; STAGES];
        let mut gr = [0.0; STAGES];
        let mut gi = [0.0; STAGES];
        for l in 0..STAGES {
            let p = old[n][l];
            let k2 = v.momentum_sq(energy, w[0] + t.c[l] * h) / hbar2;
            // F = g + c Y with g = i(k^2 + P^2), c = -2 i P
            cr[l] = 2.0 * p.im;
            ci[l] = -2.0 * p.re;
            gr[l] = -2.0 * p.re * p.im;
            gi[l] = k2 + p.re * p.re - p.im * p.im;
        }
        let mut mat = [[0.0; 2 * STAGES]; 2 * STAGES];
        let mut rhs = [0.0; 2 * STAGES];
        for j in 0..STAGES {
            rhs[j] = y.re;
            rhs[STAGES + j] = y.im;
            mat[j][j] = 1.0;
            mat[STAGES + j][STAGES + j] = 1.0;
            for l in 0..STAGES {
                let ha = h * t.a[j][l];
                rhs[j] += ha * gr[l];
                rhs[STAGES + j] += ha * gi[l];
                mat[j][l] -= ha * cr[l];
                mat[j][STAGES + l] += ha * ci[l];
                mat[STAGES + j][l] -= ha * ci[l];
                mat[STAGES + j][STAGES + l] -= ha * cr[l];
            }
        }
        solve_dense(&mut mat, &mut rhs);
        let mut stage = [Complex64::new(0.0, 0.0); STAGES];
        let (mut dr, mut di) = (0.0, 0.0);
        for l in 0..STAGES {
            let (a, b) = (rhs[l], rhs[STAGES + l]);
            stage[l] = Complex64::new(a, b);
            dr += t.b[l] * (gr[l] + cr[l] * a - ci[l] * b);
            di += t.b[l] * (gi[l] + ci[l] * a + cr[l] * b);
        }
        y = Complex64::new(y.re + h * dr, y.im + h * di);
        values.push(y);
        stages.push(stage);
    }
    RiccatiField {
        grid: grid.clone(),
        values,
        energy,
        stages: Some(stages),
    }
}

/// Scale-free update norm `max |dM| / (1 + |M|)` over the nodes.
pub fn update_norm(prev: &RiccatiField, next: &RiccatiField) -> f64 {
    prev.values
        .iter()
        .zip(&next.values)
        .map(|(a, b)| (b - a).norm() / (1.0 + b.norm()))
        .fold(0.0, f64::max)
}

/// Converged quantum phase on `[0, x_max]`.
///
/// `sigma` is measured from `-inf`, so `sigma(0)` is half the total phase.
/// `remaining[i]` is `int_{x_i}^inf Re M`, including the tail estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSolution {
    pub grid: Vec<f64>,
    pub sigma: Vec<f64>,
    pub dsigma: Vec<f64>,
    pub alpha: Vec<f64>,
    pub remaining: Vec<f64>,
    pub field: RiccatiField,
    pub energy: f64,
    pub hbar: f64,
    pub bc: BoundaryCondition,
    pub iterations: usize,
    pub final_update_norm: f64,
    pub update_norms: Vec<f64>,
    /// Estimate of `int_{x_max}^inf Re M`.
    pub tail: f64,
    pub tol: f64,
}

impl PhaseSolution {
    /// Phase bookkeeping for a field without checking convergence.
    pub fn from_field(v: &SymmetricPotential, field: RiccatiField, bc: BoundaryCondition, tol: f64) -> Self {
        let t = tableau();
        let grid = field.grid.clone();
        let stages = field.stage_values(v);
        let steps: Vec<f64> = grid
            .windows(2)
            .zip(&stages)
            .map(|(w, s)| (w[1] - w[0]) * (0..STAGES).map(|l| t.b[l] * s[l].re).sum::<f64>())
            .collect();
        let last = field.values[field.values.len() - 1];
        let tail = if last.im < 0.0 { last.re.max(0.0) / (2.0 * last.im.abs()) } else { f64::INFINITY };
        let mut remaining = vec![tail; grid.len()];
        for i in (0..steps.len()).rev() {
            remaining[i] = remaining[i + 1] + steps[i];
        }
        let half = remaining[0];
        let sigma = remaining.iter().map(|r| 2.0 * half - r).collect();
        let dsigma: Vec<f64> = field.values.iter().map(|m| m.re).collect();
        let alpha = dsigma.iter().map(|d| d.powf(-0.5)).collect();
        Self {
            grid,
            sigma,
            dsigma,
            alpha,
            remaining,
            energy: field.energy,
            field,
            hbar: v.hbar(),
            bc,
            iterations: 0,
            final_update_norm: f64::NAN,
            update_norms: Vec::new(),
            tail,
            tol,
        }
    }

    /// Oscillation number `sigma(inf) / pi`.
    pub fn oscillation_number(&self) -> Result<f64> {
        Ok(total_phase(self)? / PI)
    }

    /// Columns `x, sigma, dsigma, alpha, re_M, im_M`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,sigma,dsigma,alpha,re_M,im_M")?;
        for i in 0..self.grid.len() {
            let m = self.field.values[i];
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.grid[i], self.sigma[i], self.dsigma[i], self.alpha[i], m.re, m.im
            )?;
        }
        Ok(())
    }
}

/// Iterates from `trial` until the update norm drops below `tol`.
pub fn qlm_solve(
    v: &SymmetricPotential,
    energy: f64,
    trial: &RiccatiField,
    bc: &BoundaryCondition,
    tol: f64,
    max_iter: usize,
) -> Result<PhaseSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(bc.value > 0.0) {
        return Err(Error::InvalidArgument(format!("boundary value must be positive, got {}", bc.value)));
    }
    if !(energy > 0.0) {
        return Err(Error::NonPositiveEnergy(energy));
    }
    let mut current = trial.clone();
    current.energy = energy;
    let mut norms = Vec::new();
    for iteration in 1..=max_iter {
        let next = qlm_iterate(v, &current, bc.value);
        let norm = update_norm(&current, &next);
        norms.push(norm);
        if !norm.is_finite() {
            break;
        }
        current = next;
        if norm < tol {
            if let Some((i, m)) = current.values.iter().enumerate().find(|(_, m)| !(m.re > 0.0)) {
                return Err(Error::NonPositivePhaseDerivative {
                    x: current.grid[i],
                    value: m.re,
                });
            }
            let mut sol = PhaseSolution::from_field(v, current, bc.clone(), tol);
            sol.iterations = iteration;
            sol.final_update_norm = norm;
            sol.update_norms = norms;
            return Ok(sol);
        }
    }
    Err(Error::NoConvergence {
        iterations: norms.len(),
        last_update: norms.last().copied().unwrap_or(f64::NAN),
    })
}

/// `sigma(inf) = 2 (int_0^{x_max} Re M + tail)`; fails when the tail
/// estimate is not below the solution tolerance.
pub fn total_phase(sol: &PhaseSolution) -> Result<f64> {
    let bound = 2.0 * sol.tail;
    if !(bound <= sol.tol) {
        return Err(Error::TailTooLarge { bound, tol: sol.tol });
    }
    Ok(2.0 * sol.sigma[0])
}

/// Largest relative violation of the Milne equation
/// `hbar^2 alpha'' + p^2 alpha = hbar^2 alpha^-3`, divided by
/// `alpha (1 + |p^2|)`.
///
/// With `u = ln alpha`, `alpha''/alpha = u'' + u'^2`. The solver carries
/// `u' = -Im M` directly, so `u''` is an eighth-order centred difference of
/// `Im M` (odd about the origin) rather than a second difference of `u`,
/// whose rounding error grows like `eps/h^2` on fine grids. The result also
/// includes `|u'_fd + Im M| / (1 + |Im M|)`, with `u'_fd` differenced from
/// `Re M` alone, so both halves of the Riccati equation are checked.
pub fn milne_residual(sol: &PhaseSolution, v: &SymmetricPotential) -> f64 {
    const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    if sol.dsigma.iter().any(|&d| !(d > 0.0)) {
        return f64::INFINITY;
    }
    let n = sol.grid.len();
    if n < 9 {
        return f64::INFINITY;
    }
    let h = sol.grid[1] - sol.grid[0];
    let hbar2 = sol.hbar * sol.hbar;
    let u: Vec<f64> = sol.dsigma.iter().map(|d| -0.5 * d.ln()).collect();
    let im: Vec<f64> = sol.field.values.iter().map(|m| m.im).collect();
    let even = |i: isize| u[i.unsigned_abs()];
    let odd = |i: isize| i.signum() as f64 * im[i.unsigned_abs()];
    let mut worst: f64 = 0.0;
    for i in 0..n - 4 {
        let j = i as isize;
        let (mut du, mut dim) = (0.0, 0.0);
        for k in 1..=4 {
            let k = k as isize;
            du += D1[k as usize - 1] * (even(j + k) - even(j - k));
            dim += D1[k as usize - 1] * (odd(j + k) - odd(j - k));
        }
        du /= h;
        dim /= h;
        let q = v.momentum_sq(sol.energy, sol.grid[i]);
        let a = sol.dsigma[i];
        let r = hbar2 * (-dim + im[i] * im[i]) + q - hbar2 * a * a;
        worst = worst.max(r.abs() / (1.0 + q.abs())).max((du + im[i]).abs() / (1.0 + im[i].abs()));
    }
    worst
}

/// `d^order alpha / dx^order` by the central difference of that order with
/// spacing `stride` cells (twice that for odd orders), using the even
/// extension of `alpha` through the origin. Returns `(x, value)` at every
/// node where the stencil fits.
pub fn amplitude_derivative(sol: &PhaseSolution, order: usize, stride: usize) -> Result<Vec<(f64, f64)>> {
    if order == 0 || stride == 0 {
        return Err(Error::InvalidArgument("order and stride must be positive".into()));
    }
    let n = sol.grid.len();
    let h = sol.grid[1] - sol.grid[0];
    let cells = if order % 2 == 0 { stride } else { 2 * stride };
    let big_h = cells as f64 * h;
    // offsets (order/2 - k) cells, in units of stride
    let reach = order * cells / 2;
    let mut binom = vec![1.0; order + 1];
    for k in 1..=order {
        binom[k] = binom[k - 1] * (order + 1 - k) as f64 / k as f64;
    }
    let scale = big_h.powi(order as i32);
    let mut out = Vec::new();
    for i in 0..n.saturating_sub(reach) {
        let mut acc = 0.0;
        for (k, c) in binom.iter().enumerate() {
            let offset = i as isize + (reach as isize - (k * cells) as isize);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * c * sol.alpha[offset.unsigned_abs()];
        }
        out.push((sol.grid[i], acc / scale));
    }
    Ok(out)
}

/// Sign changes along a sequence, skipping exact zeros.
pub fn sign_changes(values: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0;
    let mut count = 0;
    for v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            count += 1;
        }
        last = v.signum();
    }
    count
}

/// `max |hbar^2 psi'' + p^2 psi| / max |psi|` over interior nodes with
/// `x <= x_end`, for `psi = alpha sin sigma` and fourth-order differences.
pub fn schrodinger_residual(sol: &PhaseSolution, v: &SymmetricPotential, x_end: f64) -> f64 {
    let psi: Vec<f64> = sol.alpha.iter().zip(&sol.sigma).map(|(a, s)| a * s.sin()).collect();
    let h = sol.grid[1] - sol.grid[0];
    let hbar2 = sol.hbar * sol.hbar;
    let last = sol.grid.partition_point(|&x| x <= x_end).min(psi.len() - 2);
    let peak = psi[..last].iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let mut worst: f64 = 0.0;
    for i in 2..last {
        let d2 = (-psi[i - 2] + 16.0 * psi[i - 1] - 30.0 * psi[i] + 16.0 * psi[i + 1] - psi[i + 2]) / (12.0 * h * h);
        let r = hbar2 * d2 + v.momentum_sq(sol.energy, sol.grid[i]) * psi[i];
        worst = worst.max(r.abs());
    }
    worst / peak
}
