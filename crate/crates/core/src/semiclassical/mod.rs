//! Semiclassical quantization: first-order WKB, higher-order Dunham sums,
//! the Airy-carrier uniform phase and the boundary-value series at the origin.

mod airy;
mod boundary;
mod dunham;

pub(crate) use airy::airy_log_phase_slope;
pub use airy::{airy_phase, airy_quantize, airy_uniform_phase, airy_xi0, airy_xi0_grid, UniformPhase};
pub use boundary::{bc_series, BcMethod, BoundaryCondition};
pub use dunham::{dunham_integral, dunham_quantize, Contour, Terminant};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SymmetricPotential;
use crate::roots;

/// Ermakov invariant `I`, constant `c` and Wronskian `W` of a phase family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErmakovParameters {
    pub invariant_i: f64,
    pub c: f64,
    pub wronskian_w: f64,
}

/// First-order oscillation number `(S(t2) - S(t1)) / (pi hbar) + 1/2`.
pub fn nsc(v: &SymmetricPotential, energy: f64) -> Result<f64> {
    Ok(v.action_difference(energy)? / (PI * v.hbar()) + 0.5)
}

/// Solves `S(t2) - S(t1) = pi hbar (n + 1/2)`.
pub fn wkb_quantize(v: &SymmetricPotential, n: usize) -> Result<f64> {
    let target = PI * v.hbar() * (n as f64 + 0.5);
    let f = |e: f64| Ok(v.action_difference(e)? - target);
    let (lo, hi) = roots::bracket_increasing(f, n as f64 + 0.5, n)?;
    roots::brent(f, lo, hi, 1e-14, 200)
}

/// The semiclassical phase of the `(I, c)` family, from
/// `cot s = cot(S + phi) - [cot(S(t2) + 2 phi) + 2 I c]`, on the branch that
/// shares its pi-band with `S + phi` (continuous in `x`).
pub fn sc_phase_ambiguity(s_x: f64, phi: f64, s_t2: f64, invariant_i: f64, c: f64) -> Result<f64> {
    let base = s_x + phi;
    if base.sin().abs() < 1e-15 {
        return Err(Error::PhasePole);
    }
    let cot = |a: f64| a.cos() / a.sin();
    let value = cot(base) - (cot(s_t2 + 2.0 * phi) + 2.0 * invariant_i * c);
    // arccot onto (0, pi)
    let acot = if value == 0.0 {
        PI / 2.0
    } else {
        let a = (1.0 / value).atan();
        if a < 0.0 {
            a + PI
        } else {
            a
        }
    };
    Ok((base / PI).floor() * PI + acot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_wkb_is_exact() {
        let v = SymmetricPotential::harmonic();
        for n in 0..=20 {
            let e = wkb_quantize(&v, n).unwrap();
            assert!((e - (n as f64 + 0.5)).abs() < 1e-12 * e, "n = {n}: {e}");
        }
    }

    #[test]
    fn harmonic_nsc_is_linear() {
        let v = SymmetricPotential::harmonic();
        for e in [0.3, 1.0, 7.25] {
            assert!((nsc(&v, e).unwrap() - (e + 0.5)).abs() < 1e-13);
        }
    }

    #[test]
    fn quartic_wkb_ground_state() {
        let v = SymmetricPotential::quartic();
        let e = wkb_quantize(&v, 0).unwrap();
        assert!((e - 0.434).abs() < 5e-4, "{e}");
        assert!((nsc(&v, e).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn decadic_wkb_ground_state() {
        let v = SymmetricPotential::decadic(1000.0).unwrap();
        let e = wkb_quantize(&v, 0).unwrap();
        assert!((e - 1.22).abs() < 0.02, "{e}");
    }

    #[test]
    fn optimal_c_removes_the_ambiguity() {
        let (s_t2, phi, i) = (2.3, PI / 4.0, 0.7);
        let c = -(s_t2 + 2.0 * phi).cos() / (s_t2 + 2.0 * phi).sin() / (2.0 * i);
        for s in [0.1, 0.9, 1.7, 2.2] {
            let sigma = sc_phase_ambiguity(s, phi, s_t2, i, c).unwrap();
            assert!((sigma - (s + phi)).abs() < 1e-12, "{s}: {sigma}");
        }
    }

    #[test]
    fn ambiguity_pole() {
        assert_eq!(sc_phase_ambiguity(PI, 0.0, 1.0, 1.0, 0.0), Err(Error::PhasePole));
    }

    #[test]
    fn generic_c_makes_the_derivative_oscillate() {
        // Harmonic-like S(x) = x on [0, 2 pi]: d sigma/dx must wiggle.
        let (phi, s_t2, i, c) = (PI / 4.0, 5.0, 1.0, 0.8);
        let h = 1e-3;
        let xs: Vec<f64> = (1..6000).map(|k| k as f64 * h).collect();
        let sig: Vec<f64> = xs
            .iter()
            .map(|&x| sc_phase_ambiguity(x, phi, s_t2, i, c).unwrap_or(f64::NAN))
            .collect();
        let mut changes = 0;
        let mut last = 0.0;
        for k in 2..sig.len() - 2 {
            let d2 = sig[k + 1] - 2.0 * sig[k] + sig[k - 1];
            if !d2.is_finite() || d2.abs() < 1e-12 {
                continue;
            }
            if last != 0.0 && d2.signum() != last {
                changes += 1;
            }
            last = d2.signum();
        }
        assert!(changes >= 2, "{changes}");
    }
}
