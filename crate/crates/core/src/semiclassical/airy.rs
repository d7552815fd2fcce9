use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::SymmetricPotential;
use crate::quad::GaussLegendre;
use crate::roots;
use crate::special::{airy_scaled, airy_zeta};

/// Airy-carrier phase on `[0, x_max]` (mirrored half-line convention).
///
/// `sigma_sc(x) = 2 phi(0) - phi(x)` with `phi = arg(Bi + i Ai)` at `xi0(x)`,
/// so `sigma_sc` rises from `phi(0)` at the origin to the total `2 phi(0)`
/// far out; `phi(t2) = pi/6`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformPhase {
    pub grid: Vec<f64>,
    pub xi0: Vec<f64>,
    pub sigma_sc: Vec<f64>,
    pub dsigma_sc: Vec<f64>,
    pub energy: f64,
}

impl UniformPhase {
    /// Total phase `2 phi(0)`.
    pub fn total(&self) -> f64 {
        self.sigma_sc[0] * 2.0
    }

    /// `phi(x) = total - sigma_sc(x)`, the phase measured from the far end.
    pub fn mirror_phase(&self) -> Vec<f64> {
        let t = self.total();
        self.sigma_sc.iter().map(|s| t - s).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,xi0,sigma_sc,dsigma_sc")?;
        for i in 0..self.grid.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.grid[i], self.xi0[i], self.sigma_sc[i], self.dsigma_sc[i]
            )?;
        }
        Ok(())
    }
}

/// `xi0` at the points `xs` (taken as `|x|`), by cumulative integration of
/// `p` outward from the turning point in `u = sqrt(|x - t2|)`.
pub fn airy_xi0_grid(v: &SymmetricPotential, energy: f64, xs: &[f64]) -> Result<Vec<f64>> {
    let t2 = v.turning_point(energy)?.t2;
    let hbar = v.hbar();
    let rule = gl10();
    let du_max = 0.05 * t2.sqrt();
    let mut out = vec![0.0; xs.len()];
    for allowed in [true, false] {
        let mut idx: Vec<(f64, usize)> = xs
            .iter()
            .enumerate()
            .filter_map(|(i, &x)| {
                let d = x.abs() - t2;
                match (allowed, d) {
                    (true, d) if d < 0.0 => Some(((-d).sqrt(), i)),
                    (false, d) if d > 0.0 => Some((d.sqrt(), i)),
                    _ => None,
                }
            })
            .collect();
        idx.sort_by(|a, b| a.0.total_cmp(&b.0));
        let sign = if allowed { -1.0 } else { 1.0 };
        let integrand = |u: f64| {
            let x = t2 + sign * u * u;
            let q = -sign * v.momentum_sq(energy, x);
            2.0 * u * q.max(0.0).sqrt()
        };
        let mut acc = 0.0;
        let mut u_prev = 0.0;
        for (u, i) in idx {
            let panels = ((u - u_prev) / du_max).ceil().max(1.0) as usize;
            let w = (u - u_prev) / panels as f64;
            for k in 0..panels {
                let a = u_prev + k as f64 * w;
                acc += rule.integrate(a, a + w, integrand);
            }
            u_prev = u;
            out[i] = sign * (1.5 * acc / hbar).powf(2.0 / 3.0);
        }
    }
    Ok(out)
}

fn gl10() -> &'static GaussLegendre {
    static RULE: std::sync::OnceLock<GaussLegendre> = std::sync::OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

/// Liouville-Green coordinate for the Airy carrier: negative between the
/// turning points, zero at `t2`, positive beyond.
pub fn airy_xi0(v: &SymmetricPotential, energy: f64, x: f64) -> Result<f64> {
    Ok(airy_xi0_grid(v, energy, &[x])?[0])
}

/// Continuous `arg(Bi(xi) + i Ai(xi))`: 0 at `+inf`, `pi/6` at 0 and
/// `~ 2/3 |xi|^(3/2) + pi/4` towards `-inf`.
pub fn airy_phase(xi: f64) -> f64 {
    let v = airy_scaled(xi);
    if xi >= 0.0 {
        let z = airy_zeta(xi);
        return (v.ai * (-2.0 * z).exp()).atan2(v.bi);
    }
    let raw = v.ai.atan2(v.bi);
    // the leading asymptotic phase is within 0.3 of the true one everywhere
    let est = 2.0 / 3.0 * (-xi).powf(1.5) + PI / 4.0;
    raw + 2.0 * PI * ((est - raw) / (2.0 * PI)).round()
}

/// `d xi0 / dx` from `xi0' = sqrt(-p^2 / xi0) / hbar`, with the turning-point
/// limit `(|dQ/dx| / hbar^2)^(1/3)`.
fn xi0_slope(v: &SymmetricPotential, energy: f64, t2: f64, x: f64, xi: f64) -> f64 {
    let hbar = v.hbar();
    let near = (x - t2).abs() < 1e-7 * t2 || xi.abs() < 1e-10;
    if near {
        let f = 2.0 * v.derivative(t2);
        (f / (hbar * hbar)).cbrt()
    } else {
        (-v.momentum_sq(energy, x) / xi).max(0.0).sqrt() / hbar
    }
}

/// `d sigma_sc / dx = xi0' / (pi (Ai^2 + Bi^2))` at the given points.
fn phase_slope(v: &SymmetricPotential, energy: f64, t2: f64, x: f64, xi: f64) -> f64 {
    let slope = xi0_slope(v, energy, t2, x.abs(), xi);
    let a = airy_scaled(xi);
    if xi > 0.0 {
        let z = airy_zeta(xi);
        let e2 = (-2.0 * z).exp();
        slope * e2 / (PI * (a.ai * a.ai * e2 * e2 + a.bi * a.bi))
    } else {
        slope / (PI * (a.ai * a.ai + a.bi * a.bi))
    }
}

/// Airy-carrier phase and its derivative on `grid` (non-negative, increasing).
pub fn airy_uniform_phase(v: &SymmetricPotential, energy: f64, grid: &[f64]) -> Result<UniformPhase> {
    let t2 = v.turning_point(energy)?.t2;
    let mut pts = grid.to_vec();
    pts.push(0.0);
    let xi_all = airy_xi0_grid(v, energy, &pts)?;
    let xi_origin = xi_all[grid.len()];
    let xi0 = xi_all[..grid.len()].to_vec();
    let total = 2.0 * airy_phase(xi_origin);
    let sigma_sc = xi0.iter().map(|&xi| total - airy_phase(xi)).collect();
    let dsigma_sc = grid
        .iter()
        .zip(&xi0)
        .map(|(&x, &xi)| phase_slope(v, energy, t2, x, xi))
        .collect();
    Ok(UniformPhase {
        grid: grid.to_vec(),
        xi0,
        sigma_sc,
        dsigma_sc,
        energy,
    })
}

/// `ln(d sigma_sc / dx)` at non-negative points, finite far into the
/// forbidden region where the slope itself underflows.
pub(crate) fn airy_log_phase_slope(v: &SymmetricPotential, energy: f64, xs: &[f64]) -> Result<Vec<f64>> {
    let t2 = v.turning_point(energy)?.t2;
    let xi = airy_xi0_grid(v, energy, xs)?;
    Ok(xs
        .iter()
        .zip(&xi)
        .map(|(&x, &xi)| {
            let slope = xi0_slope(v, energy, t2, x.abs(), xi).ln() - PI.ln();
            let a = airy_scaled(xi);
            if xi > 0.0 {
                let z = airy_zeta(xi);
                slope - 2.0 * z - (a.bi * a.bi + a.ai * a.ai * (-4.0 * z).exp()).ln()
            } else {
                slope - (a.ai * a.ai + a.bi * a.bi).ln()
            }
        })
        .collect())
}

/// Solves `phi(xi0(0, E)) = (n + 1) pi / 2`.
pub fn airy_quantize(v: &SymmetricPotential, n: usize) -> Result<f64> {
    let target = (n as f64 + 1.0) * PI / 2.0;
    let f = |e: f64| Ok(airy_phase(airy_xi0(v, e, 0.0)?) - target);
    let guess = super::wkb_quantize(v, n)?;
    let (lo, hi) = roots::bracket_increasing(f, guess, n)?;
    roots::brent(f, lo, hi, 1e-13, 200)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi0_examples() {
        let v = SymmetricPotential::harmonic();
        let xi = airy_xi0(&v, 0.5, 0.0).unwrap();
        let expect = -(1.5 * PI / 4.0f64).powf(2.0 / 3.0);
        assert!((xi - expect).abs() < 1e-13, "{xi} vs {expect}");
        assert!((xi + 1.1155).abs() < 1e-4);
        assert_eq!(airy_xi0(&v, 0.5, 1.0).unwrap(), 0.0);
        let far = airy_xi0(&v, 0.5, 3.0).unwrap();
        assert!(far > 0.0);
        // forbidden side: int_1^3 sqrt(x^2 - 1) dx
        let a: f64 = 3.0 * 8f64.sqrt() / 2.0 - (3.0 + 8f64.sqrt()).ln() / 2.0;
        assert!((far - (1.5 * a).powf(2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn phase_at_turning_point_and_far_away() {
        assert!((airy_phase(0.0) - PI / 6.0).abs() < 1e-15);
        assert!(airy_phase(30.0) < 1e-30);
        // continuity through the oscillatory side
        let mut prev = airy_phase(0.0);
        let mut xi = 0.0;
        while xi > -60.0 {
            xi -= 0.37;
            let p = airy_phase(xi);
            assert!(p > prev && p - prev < 4.0, "{xi}");
            prev = p;
        }
    }

    #[test]
    fn log_slope_matches_slope() {
        let v = SymmetricPotential::sextic();
        let e = 3.0;
        let t2 = v.turning_point(e).unwrap().t2;
        let xs: Vec<f64> = (0..40).map(|k| k as f64 * 0.05 * t2).collect();
        let up = airy_uniform_phase(&v, e, &xs).unwrap();
        let ls = airy_log_phase_slope(&v, e, &xs).unwrap();
        for (d, l) in up.dsigma_sc.iter().zip(&ls) {
            assert!((d.ln() - l).abs() < 1e-12, "{d} {l}");
        }
    }

    #[test]
    fn uniform_phase_shape() {
        let v = SymmetricPotential::quartic();
        let e = 0.53;
        let t2 = v.turning_point(e).unwrap().t2;
        let grid: Vec<f64> = (0..=400).map(|k| k as f64 * 3.0 * t2 / 400.0).collect();
        let up = airy_uniform_phase(&v, e, &grid).unwrap();
        assert!(up.sigma_sc.windows(2).all(|w| w[1] >= w[0]));
        assert!(up.dsigma_sc.iter().all(|&d| d > 0.0));
        // phi(t2) = pi/6 on the mirrored half
        let phi = up.mirror_phase();
        let k = grid.iter().position(|&x| x >= t2).unwrap();
        assert!((phi[k] - PI / 6.0).abs() < 0.02);
        assert!(up.xi0[k - 1] < 0.0 && up.xi0[k + 1] > 0.0);
        assert!((up.sigma_sc[400] - up.total()).abs() < 1e-6);
    }

    #[test]
    fn slope_matches_finite_differences() {
        let v = SymmetricPotential::sextic();
        let e = 3.0;
        let t2 = v.turning_point(e).unwrap().t2;
        let h = 1e-4;
        for x in [0.1 * t2, 0.6 * t2, t2, 1.2 * t2] {
            let g = [x - h, x, x + h];
            let up = airy_uniform_phase(&v, e, &g).unwrap();
            let fd = (up.sigma_sc[2] - up.sigma_sc[0]) / (2.0 * h);
            assert!((fd - up.dsigma_sc[1]).abs() < 1e-6 * (1.0 + fd), "x = {x}: {fd} vs {}", up.dsigma_sc[1]);
        }
    }

    #[test]
    fn large_energy_matches_action_plus_quarter() {
        let v = SymmetricPotential::harmonic();
        let mut last = f64::INFINITY;
        for e in [2.5, 9.5, 20.5] {
            let t2 = v.turning_point(e).unwrap().t2;
            let grid: Vec<f64> = (0..=50).map(|k| k as f64 * 0.5 * t2 / 50.0).collect();
            let up = airy_uniform_phase(&v, e, &grid).unwrap();
            let dev = grid
                .iter()
                .zip(&up.sigma_sc)
                .map(|(&x, &s)| (s - v.classical_action(e, x).unwrap() - PI / 4.0).abs())
                .fold(0.0, f64::max);
            if e == 9.5 {
                assert!(dev < 0.01, "{dev}");
            }
            assert!(dev < last);
            last = dev;
        }
    }

    #[test]
    fn airy_quantization_values() {
        let q = airy_quantize(&SymmetricPotential::quartic(), 0).unwrap();
        assert!((q - 0.480).abs() < 5e-4, "{q}");
        // regression snapshot (independently reproduced with mpmath)
        let h = airy_quantize(&SymmetricPotential::harmonic(), 0).unwrap();
        assert!((h - 0.539674452718556).abs() < 1e-10, "{h}");
    }
}
