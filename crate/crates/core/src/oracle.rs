//! Independent reference values: closed forms for the harmonic oscillator
//! and a Numerov shooting solver for arbitrary symmetric potentials.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SymmetricPotential;
use crate::semiclassical::{wkb_quantize, ErmakovParameters};
use crate::special::gamma;

/// `sin(pi x)` with exact zeros at the integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// Parabolic cylinder function at the origin, normalized so that the
/// eigenfunctions `D_n(sqrt(2) x)` have unit norm:
/// `D_nu(0) = 2^(nu/2) pi^(1/4) / (Gamma(1/2 - nu/2) sqrt(Gamma(1 + nu)))`.
/// Exactly zero at odd integer `nu`.
pub fn weber_at_origin(nu: f64) -> Result<f64> {
    if !(nu > -1.0) {
        return Err(Error::GammaPole(nu));
    }
    let a = 0.5 - 0.5 * nu;
    if a <= 0.0 && a.fract() == 0.0 {
        return Ok(0.0);
    }
    Ok(2f64.powf(0.5 * nu) * PI.powf(0.25) / (gamma(a) * gamma(1.0 + nu).sqrt()))
}

/// Optimal phase slope at the origin for `x^2/2` at `E = nu + 1/2`,
/// `2 nu Gamma(nu/2) / ((nu - 1) Gamma((nu - 1)/2))`, evaluated as
/// `2 Gamma(1 + nu/2) / Gamma((1 + nu)/2)` so that `nu = 0, 1` need no limits.
pub fn harmonic_bc(nu: f64) -> Result<f64> {
    if !(nu >= 0.0) {
        return Err(Error::InvalidArgument(format!("nu must be non-negative, got {nu}")));
    }
    Ok(2.0 * gamma(1.0 + 0.5 * nu) / gamma(0.5 * (1.0 + nu)))
}

/// Ermakov parameters of the optimal phase: `I = 1/pi`,
/// `c = -cot(pi nu) pi / 2` and `W = 2 sin(pi N) / pi` with `N = nu + 1`,
/// so that `Ic = -cot(pi N)/2` and `W/I = 2 sin(pi N)`.
///
/// `W` here pairs the solutions in the opposite order to
/// [`HarmonicAnalytic::wronskian`], hence the opposite sign.
pub fn harmonic_optimal_params(nu: f64) -> Result<ErmakovParameters> {
    let s = sin_pi(nu);
    if s == 0.0 {
        return Err(Error::EigenvaluePole(nu));
    }
    Ok(ErmakovParameters {
        invariant_i: 1.0 / PI,
        c: -cos_pi(nu) / s * PI / 2.0,
        wronskian_w: 2.0 * sin_pi(nu + 1.0) / PI,
    })
}

/// Closed-form harmonic quantities at `E = nu + 1/2` (unit frequency and hbar).
/// `wronskian` is `W[D_nu(z), D_nu(-z)] = 2 sin(pi nu) / pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicAnalytic {
    pub nu: f64,
    pub weber_origin: f64,
    pub optimal_bc: f64,
    pub wronskian: f64,
    pub oscillation_number: f64,
}

impl HarmonicAnalytic {
    pub fn new(nu: f64) -> Result<Self> {
        Ok(Self {
            nu,
            weber_origin: weber_at_origin(nu)?,
            optimal_bc: harmonic_bc(nu)?,
            wronskian: 2.0 * sin_pi(nu) / PI,
            oscillation_number: nu + 1.0,
        })
    }

    pub fn energy(&self) -> f64 {
        self.nu + 0.5
    }
}

/// Parity of a bound state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_level(n: usize) -> Self {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Wavefunction samples on a symmetric grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wavefunction {
    pub x: Vec<f64>,
    pub psi: Vec<f64>,
    pub energy: f64,
}

impl Wavefunction {
    /// Sign changes on the open line, ignoring samples below `1e-10 max|psi|`.
    pub fn node_count(&self) -> usize {
        let cut = 1e-10 * self.psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        let mut last = 0.0;
        let mut nodes = 0;
        for &p in &self.psi {
            if p.abs() <= cut {
                continue;
            }
            if last != 0.0 && p.signum() != last {
                nodes += 1;
            }
            last = p.signum();
        }
        nodes
    }

    /// Local cubic interpolation inside the sampled range, zero outside.
    pub fn interpolate(&self, x: f64) -> f64 {
        let g = &self.x;
        let n = g.len();
        if x < g[0] || x > g[n - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&t| t <= x).clamp(2, n - 2) - 2;
        let lo = i.min(n - 4);
        let mut out = 0.0;
        for a in lo..lo + 4 {
            let mut w = 1.0;
            for b in lo..lo + 4 {
                if a != b {
                    w *= (x - g[b]) / (g[a] - g[b]);
                }
            }
            out += self.psi[a] * w;
        }
        out
    }
}

/// Forbidden action reached at the far end of the Numerov interval.
const EDGE_ACTION: f64 = 25.0;

/// Half-line interval and default step for level `n`.
fn numerov_setup(v: &SymmetricPotential, n: usize) -> Result<(f64, f64)> {
    let e_ref = 2.0 * wkb_quantize(v, n)? + 0.5;
    let t2 = v.turning_point(e_ref)?.t2;
    let mut l = 1.25 * t2;
    while v.forbidden_action(e_ref, t2, l) / v.hbar() < EDGE_ACTION {
        l += 0.25 * t2;
    }
    let k_max = (2.0 * e_ref).sqrt() / v.hbar();
    Ok((l, (0.05 / k_max).min(0.01)))
}

/// Numerov samples of the parity solution on `[0, l]` with `steps` cells.
fn shoot(v: &SymmetricPotential, energy: f64, parity: Parity, l: f64, steps: usize) -> Vec<f64> {
    let h = l / steps as f64;
    let f = |i: usize| {
        let x = i as f64 * h;
        h * h * v.momentum_sq(energy, x) / (v.hbar() * v.hbar()) / 12.0
    };
    let mut psi = vec![0.0; steps + 1];
    let (mut f_prev, mut f_cur) = (f(1), f(0));
    match parity {
        Parity::Even => {
            psi[0] = 1.0;
            psi[1] = (1.0 - 5.0 * f_cur) / (1.0 + f_prev);
        }
        Parity::Odd => {
            psi[0] = 0.0;
            psi[1] = h;
        }
    }
    f_prev = f_cur;
    f_cur = f(1);
    for i in 1..steps {
        let f_next = f(i + 1);
        psi[i + 1] = (2.0 * psi[i] * (1.0 - 5.0 * f_cur) - psi[i - 1] * (1.0 + f_prev)) / (1.0 + f_next);
        f_prev = f_cur;
        f_cur = f_next;
    }
    psi
}

/// Sign changes of the shot solution on `(0, l]`.
fn nodes(psi: &[f64]) -> usize {
    psi[1..].windows(2).filter(|w| w[0] != 0.0 && w[1].signum() != w[0].signum()).count()
}

/// Energy at which the `m`-th node of the given parity enters from the far
/// end, by bisection on the node count.
fn bisect_level(v: &SymmetricPotential, level: usize, l: f64, steps: usize) -> Result<f64> {
    let parity = Parity::of_level(level);
    let m = level / 2;
    let count = |e: f64| nodes(&shoot(v, e, parity, l, steps));
    let mut lo = 0.0;
    let mut hi = 2.0 * wkb_quantize(v, level)? + 1.0;
    let mut tries = 0;
    while count(hi) <= m {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 40 {
            return Err(Error::BracketNotFound {
                level,
                reason: "node count never exceeds the level".into(),
            });
        }
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if count(mid) > m {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Level `n` eigenvalue with half-line step `h` (and `h/2`), Richardson
/// combined for the fourth-order Numerov error.
pub fn numerov_eigenvalue_with_step(v: &SymmetricPotential, n: usize, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let (l, _) = numerov_setup(v, n)?;
    let steps = (l / h).ceil() as usize;
    let coarse = bisect_level(v, n, l, steps)?;
    let fine = bisect_level(v, n, l, 2 * steps)?;
    Ok(fine + (fine - coarse) / 15.0)
}

/// Level `n` eigenvalue by Numerov shooting from the origin with parity
/// starts, bisection on the node count and Richardson extrapolation.
pub fn numerov_eigenvalue(v: &SymmetricPotential, n: usize) -> Result<f64> {
    let (_, h) = numerov_setup(v, n)?;
    numerov_eigenvalue_with_step(v, n, h)
}

/// Normalized wavefunction on `[-L, L]` at an (approximate) eigenvalue:
/// outward parity solution matched at the turning point to an inward
/// solution that vanishes at `L`, then extended by parity. The sign makes
/// `psi(0) > 0` (even) or `psi'(0) > 0` (odd).
pub fn numerov_wavefunction(v: &SymmetricPotential, energy: f64, parity: Parity) -> Result<Wavefunction> {
    let level = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let nsc = v.action_difference(energy)? / (PI * v.hbar());
    let level_guess = (nsc.round().max(0.0) as usize / 2) * 2 + level;
    let (l, h) = numerov_setup(v, level_guess)?;
    let steps = (l / (0.5 * h)).ceil() as usize;
    let h = l / steps as f64;
    let t2 = v.turning_point(energy)?.t2;
    let mid = ((t2 / h).round() as usize).clamp(2, steps - 2);

    let out = shoot(v, energy, parity, l, steps);
    // inward from psi(L) = 0
    let f = |i: usize| {
        let x = i as f64 * h;
        h * h * v.momentum_sq(energy, x) / (v.hbar() * v.hbar()) / 12.0
    };
    let mut inward = vec![0.0; steps + 1];
    inward[steps - 1] = 1e-30;
    for i in (mid..steps - 1).rev() {
        inward[i - 1] =
            (2.0 * inward[i] * (1.0 - 5.0 * f(i)) - inward[i + 1] * (1.0 + f(i + 1))) / (1.0 + f(i - 1));
    }
    let scale = out[mid] / inward[mid];
    let mut half: Vec<f64> = out[..=mid].to_vec();
    half.extend(inward[mid + 1..].iter().map(|p| p * scale));

    let sign = match parity {
        Parity::Even => half[0].signum(),
        Parity::Odd => half[1].signum(),
    };
    let odd = parity == Parity::Odd;
    let mut x = Vec::with_capacity(2 * steps + 1);
    let mut psi = Vec::with_capacity(2 * steps + 1);
    for i in (1..=steps).rev() {
        x.push(-(i as f64) * h);
        psi.push(if odd { -half[i] } else { half[i] } * sign);
    }
    for (i, p) in half.iter().enumerate() {
        x.push(i as f64 * h);
        psi.push(p * sign);
    }
    let norm = simpson(&psi.iter().map(|p| p * p).collect::<Vec<_>>(), h).sqrt();
    psi.iter_mut().for_each(|p| *p /= norm);
    Ok(Wavefunction { x, psi, energy })
}

/// Composite Simpson rule on uniform samples (trapezoid on a trailing odd cell).
pub fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    if n < 3 {
        return f.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
    }
    let cells = n - 1;
    let even = cells - cells % 2;
    let mut s = f[0] + f[even];
    for i in 1..even {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f[i];
    }
    let mut total = s * h / 3.0;
    if cells % 2 == 1 {
        total += 0.5 * h * (f[n - 2] + f[n - 1]);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weber_values() {
        assert!((weber_at_origin(0.0).unwrap() - PI.powf(-0.25)).abs() < 1e-15);
        assert_eq!(weber_at_origin(1.0).unwrap(), 0.0);
        assert_eq!(weber_at_origin(3.0).unwrap(), 0.0);
        assert!(weber_at_origin(-1.5).is_err());
        // normalized oscillator state: H_2(0) / sqrt(2^2 2!) pi^(-1/4)
        assert!((weber_at_origin(2.0).unwrap() + PI.powf(-0.25) / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn harmonic_bc_limits() {
        assert!((harmonic_bc(0.0).unwrap() - 2.0 / PI.sqrt()).abs() < 1e-15);
        assert!((harmonic_bc(1.0).unwrap() - PI.sqrt()).abs() < 1e-15);
        let half = gamma(0.25) / (2.0 * gamma(0.75));
        assert!((harmonic_bc(0.5).unwrap() - half).abs() < 1e-14);
        assert!((harmonic_bc(0.5).unwrap() - 1.479_337_559_594_319).abs() < 1e-14);
        // the raw ratio away from its removable points
        for nu in [0.3, 2.5, 4.2] {
            let raw = 2.0 * nu * gamma(nu / 2.0) / ((nu - 1.0) * gamma((nu - 1.0) / 2.0));
            assert!((harmonic_bc(nu).unwrap() - raw).abs() < 1e-13 * raw.abs());
        }
    }

    #[test]
    fn bc_agrees_with_weber_form() {
        // sigma'(0) = 2 I sin^2(sigma(0)) / D_nu(0)^2 with I = 1/pi and
        // sigma(0) = pi N / 2, N = nu + 1
        for nu in [0.0, 0.25, 0.5, 2.5] {
            let d = weber_at_origin(nu).unwrap();
            let s = sin_pi(0.5 * (nu + 1.0));
            let alt = 2.0 * s * s / (PI * d * d);
            assert!((alt - harmonic_bc(nu).unwrap()).abs() < 1e-12, "{nu}: {alt}");
        }
    }

    #[test]
    fn optimal_params() {
        let p = harmonic_optimal_params(0.5).unwrap();
        assert!((p.invariant_i * p.c).abs() < 1e-16);
        assert!((p.wronskian_w / p.invariant_i + 2.0).abs() < 1e-15);
        assert!((HarmonicAnalytic::new(0.5).unwrap().wronskian + p.wronskian_w).abs() < 1e-16);
        for nu in [0.2, 1.7, 3.35] {
            let p = harmonic_optimal_params(nu).unwrap();
            let big_n = nu + 1.0;
            assert!((p.invariant_i * p.c + (PI * big_n).cos() / (PI * big_n).sin() / 2.0).abs() < 1e-12);
            assert!((p.wronskian_w / p.invariant_i - 2.0 * (PI * big_n).sin()).abs() < 1e-12);
            // W^2 = 4 I^2 sin^2(2 sigma(0)), sigma(0) = pi N / 2
            let s = (PI * big_n).sin();
            assert!((p.wronskian_w.powi(2) - 4.0 * p.invariant_i.powi(2) * s * s).abs() < 1e-14);
            let kappa2 = 9.0;
            assert!(((kappa2 * p.invariant_i) * (p.c / kappa2) - p.invariant_i * p.c).abs() < 1e-14);
        }
        assert_eq!(harmonic_optimal_params(2.0), Err(Error::EigenvaluePole(2.0)));
    }

    #[test]
    fn wronskian_vanishes_at_integers() {
        for nu in 0..6 {
            assert_eq!(HarmonicAnalytic::new(nu as f64).unwrap().wronskian, 0.0);
        }
        assert!(HarmonicAnalytic::new(0.5).unwrap().wronskian > 0.0);
    }

    #[test]
    fn numerov_harmonic_levels() {
        let v = SymmetricPotential::harmonic();
        for n in 0..=5 {
            let e = numerov_eigenvalue(&v, n).unwrap();
            assert!((e - (n as f64 + 0.5)).abs() < 1e-10, "{n}: {e}");
        }
    }

    #[test]
    fn numerov_quartic_ground_state() {
        let v = SymmetricPotential::quartic();
        let a = numerov_eigenvalue(&v, 0).unwrap();
        let b = numerov_eigenvalue_with_step(&v, 0, 0.004).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} {b}");
        assert!((2.0 * a - 1.060_362_090_4).abs() < 1e-10, "{a}");
    }

    #[test]
    fn numerov_sextic_fourth_level() {
        let e = numerov_eigenvalue(&SymmetricPotential::sextic(), 4).unwrap();
        assert!((e - 10.8571).abs() < 1e-4, "{e}");
    }

    #[test]
    fn numerov_fourth_order() {
        let v = SymmetricPotential::quartic();
        let (l, _) = numerov_setup(&v, 0).unwrap();
        let exact = numerov_eigenvalue(&v, 0).unwrap();
        let e1 = bisect_level(&v, 0, l, (l / 0.04).ceil() as usize).unwrap();
        let e2 = bisect_level(&v, 0, l, (l / 0.02).ceil() as usize).unwrap();
        let ratio = (e1 - exact) / (e2 - exact);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn gaussian_ground_state() {
        let v = SymmetricPotential::harmonic();
        let wf = numerov_wavefunction(&v, 0.5, Parity::Even).unwrap();
        let c = PI.powf(-0.25);
        for (x, p) in wf.x.iter().zip(&wf.psi) {
            assert!((p - c * (-x * x / 2.0).exp()).abs() < 1e-8, "{x}: {p}");
        }
        assert_eq!(wf.node_count(), 0);
    }

    #[test]
    fn node_counts_match_levels() {
        let v = SymmetricPotential::quartic();
        for n in 0..6 {
            let e = numerov_eigenvalue(&v, n).unwrap();
            let wf = numerov_wavefunction(&v, e, Parity::of_level(n)).unwrap();
            assert_eq!(wf.node_count(), n);
        }
    }

    #[test]
    fn casoratian_is_conserved() {
        // T_i T_{i+1} (psi_{i+1} phi_i - psi_i phi_{i+1}) is invariant
        let v = SymmetricPotential::quartic();
        let (l, steps, e) = (2.5, 2500, 0.9);
        let h = l / steps as f64;
        let even = shoot(&v, e, Parity::Even, l, steps);
        let odd = shoot(&v, e, Parity::Odd, l, steps);
        let t = |i: usize| 1.0 + h * h * v.momentum_sq(e, i as f64 * h) / 12.0;
        let c: Vec<f64> = (0..steps)
            .map(|i| t(i) * t(i + 1) * (even[i + 1] * odd[i] - even[i] * odd[i + 1]))
            .collect();
        let scale = even.iter().zip(&odd).map(|(a, b)| (a * b).abs()).fold(0.0, f64::max);
        for ci in &c {
            assert!((ci - c[0]).abs() < 1e-9 * c[0].abs().max(1e-16 * scale), "{ci} {}", c[0]);
        }
    }
}
