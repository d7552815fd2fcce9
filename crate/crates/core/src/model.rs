//! Symmetric polynomial potentials, classical momentum, turning points and
//! the classical action.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Even polynomial potential `V(x) = sum_m c_m x^(2m)`, `m >= 1`, with a
/// reduced Planck constant `hbar`.
///
/// All coefficients are non-negative and the highest one is positive, so the
/// well is confining with a single minimum at `x = 0` and `V(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricPotential {
    /// Map from the even power `2m` to `c_m`.
    coefficients: BTreeMap<u32, f64>,
    hbar: f64,
}

impl SymmetricPotential {
    /// Builds a potential from `(power, coefficient)` pairs; powers must be
    /// even and at least 2. Repeated powers are summed.
    pub fn new(terms: &[(u32, f64)]) -> Result<Self> {
        let mut coefficients = BTreeMap::new();
        for &(power, c) in terms {
            if power < 2 || power % 2 != 0 {
                return Err(Error::InvalidPotential(format!(
                    "power {power} is not an even integer >= 2"
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidPotential(format!(
                    "coefficient of x^{power} is not finite"
                )));
            }
            *coefficients.entry(power).or_insert(0.0) += c;
        }
        coefficients.retain(|_, c| *c != 0.0);
        if coefficients.is_empty() {
            return Err(Error::InvalidPotential("no non-zero terms".into()));
        }
        if let Some((p, c)) = coefficients.iter().find(|(_, c)| **c < 0.0) {
            return Err(Error::InvalidPotential(format!(
                "negative coefficient {c} for x^{p}; only single-well potentials are supported"
            )));
        }
        Ok(Self {
            coefficients,
            hbar: 1.0,
        })
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidPotential(format!("hbar must be positive, got {hbar}")));
        }
        self.hbar = hbar;
        Ok(self)
    }

    /// `x^2 / 2`.
    pub fn harmonic() -> Self {
        Self::homogeneous(1)
    }

    /// `x^4 / 2`.
    pub fn quartic() -> Self {
        Self::homogeneous(2)
    }

    /// `x^6 / 2`.
    pub fn sextic() -> Self {
        Self::homogeneous(3)
    }

    /// `x^8 / 2`.
    pub fn octic() -> Self {
        Self::homogeneous(4)
    }

    /// `x^(2m) / 2`.
    pub fn homogeneous(m: u32) -> Self {
        Self::new(&[(2 * m, 0.5)]).expect("valid homogeneous potential")
    }

    /// `x^2 / 2 + lambda x^10 / 2`.
    pub fn decadic(lambda: f64) -> Result<Self> {
        Self::new(&[(2, 0.5), (10, 0.5 * lambda)])
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `(power, coefficient)` pairs in increasing power.
    pub fn terms(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coefficients.iter().map(|(&p, &c)| (p, c))
    }

    pub fn max_power(&self) -> u32 {
        *self.coefficients.keys().next_back().expect("non-empty")
    }

    /// `Some(c_1)` if the potential is purely quadratic.
    pub fn harmonic_coefficient(&self) -> Option<f64> {
        match self.coefficients.len() {
            1 => self.coefficients.get(&2).copied(),
            _ => None,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let w = x * x;
        self.coefficients
            .iter()
            .map(|(&p, &c)| c * w.powi((p / 2) as i32))
            .sum()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .map(|(&p, &c)| c * p as f64 * x.powi(p as i32 - 1))
            .sum()
    }

    /// n-th derivative of `V` at a complex point.
    pub fn derivative_n_complex(&self, n: usize, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&p, &c) in &self.coefficients {
            let p = p as usize;
            if n > p {
                continue;
            }
            let falling: f64 = (0..n).map(|j| (p - j) as f64).product();
            acc += c * falling * z.powi((p - n) as i32);
        }
        acc
    }

    /// n-th derivative of `V` at a real point.
    pub fn derivative_n(&self, n: usize, x: f64) -> f64 {
        self.derivative_n_complex(n, Complex64::new(x, 0.0)).re
    }

    /// `(V(a) - V(b)) / (a - b)` from the factored power differences, free
    /// of cancellation when `a` and `b` are close.
    fn secant_slope(&self, a: f64, b: f64) -> f64 {
        self.coefficients
            .iter()
            .map(|(&p, &c)| {
                let mut sum = 0.0;
                let mut ap = 1.0;
                // sum_j a^j b^(p-1-j)
                for _ in 0..p {
                    sum = sum * b + ap;
                    ap *= a;
                }
                c * sum
            })
            .sum()
    }

    /// `p^2(x, E) = 2 (E - V(x))`.
    pub fn momentum_sq(&self, energy: f64, x: f64) -> f64 {
        2.0 * (energy - self.value(x))
    }

    /// The positive root `t2` of `p^2(., E)`, with `t1 = -t2`.
    pub fn turning_point(&self, energy: f64) -> Result<TurningPoints> {
        if !(energy > 0.0) {
            return Err(Error::NonPositiveEnergy(energy));
        }
        let q = |x: f64| self.momentum_sq(energy, x);
        let mut hi = 1.0;
        while q(hi) > 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        // Q is strictly decreasing on (0, inf): safeguarded Newton.
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let fx = q(x);
            if fx > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = -2.0 * self.derivative(x);
            let mut next = if slope < 0.0 { x - fx / slope } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - x).abs();
            x = next;
            if step <= 1e-16 * x || hi - lo <= 1e-15 * x {
                break;
            }
        }
        Ok(TurningPoints {
            t1: -x,
            t2: x,
            energy,
        })
    }

    /// `int_y^{t2} p dx` for `0 <= y <= t2`, via `x = t2 - u^2`.
    pub fn action_to_turning_point(&self, energy: f64, t2: f64, y: f64) -> f64 {
        let span = t2 - y;
        if span <= 0.0 {
            return 0.0;
        }
        let scale = (2.0 * energy).sqrt() * span;
        let gap = self.momentum_sq(energy, t2);
        quad::adaptive(0.0, span.sqrt(), 1e-15 * scale.max(1e-300), |u| {
            let q = (gap + 2.0 * u * u * self.secant_slope(t2, t2 - u * u)).max(0.0);
            2.0 * u * q.sqrt()
        })
    }

    /// `int_{t2}^x |p| dx` for `x >= t2`, via `x = t2 + u^2`.
    pub fn forbidden_action(&self, energy: f64, t2: f64, x: f64) -> f64 {
        let span = x - t2;
        if span <= 0.0 {
            return 0.0;
        }
        let scale = (2.0 * (self.value(x) - energy)).abs().sqrt() * span;
        let gap = self.momentum_sq(energy, t2);
        quad::adaptive(0.0, span.sqrt(), 1e-15 * scale.max(1e-300), |u| {
            let q = (2.0 * u * u * self.secant_slope(t2 + u * u, t2) - gap).max(0.0);
            2.0 * u * q.sqrt()
        })
    }

    /// `S(x) = int_{t1}^x p dx'` on `[t1, t2]`, so `S(t1) = 0`.
    pub fn classical_action(&self, energy: f64, x: f64) -> Result<f64> {
        let tp = self.turning_point(energy)?;
        if x < tp.t1 * (1.0 + 1e-14) || x > tp.t2 * (1.0 + 1e-14) {
            return Err(Error::OutsideAllowedRegion {
                x,
                t1: tp.t1,
                t2: tp.t2,
            });
        }
        let x = x.clamp(tp.t1, tp.t2);
        let half = self.action_to_turning_point(energy, tp.t2, 0.0);
        Ok(if x >= 0.0 {
            2.0 * half - self.action_to_turning_point(energy, tp.t2, x)
        } else {
            self.action_to_turning_point(energy, tp.t2, -x)
        })
    }

    /// `S(t2) - S(t1)`.
    pub fn action_difference(&self, energy: f64) -> Result<f64> {
        let tp = self.turning_point(energy)?;
        Ok(2.0 * self.action_to_turning_point(energy, tp.t2, 0.0))
    }
}

impl fmt::Display for SymmetricPotential {
    /// Comma-separated `2m:c_m` pairs, the format accepted by `FromStr`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, c) in self.terms() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{p}:{c}")?;
        }
        Ok(())
    }
}

impl FromStr for SymmetricPotential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (p, c) = item.split_once(':').ok_or_else(|| {
                Error::InvalidPotential(format!("term `{item}` is not of the form 2m:c"))
            })?;
            let p: u32 = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidPotential(format!("bad power in `{item}`")))?;
            let c: f64 = c
                .trim()
                .parse()
                .map_err(|_| Error::InvalidPotential(format!("bad coefficient in `{item}`")))?;
            terms.push((p, c));
        }
        Self::new(&terms)
    }
}

/// Real turning points of `p^2(., E)`; `t1 = -t2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoints {
    pub t1: f64,
    pub t2: f64,
    pub energy: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn momentum_examples() {
        let h = SymmetricPotential::harmonic();
        let nu = 1.3;
        for x in [0.0, 0.4, -1.7] {
            assert!((h.momentum_sq(nu + 0.5, x) - (2.0 * nu + 1.0 - x * x)).abs() < 1e-14);
        }
        assert_eq!(SymmetricPotential::octic().momentum_sq(0.7, 0.0), 1.4);
        assert_eq!(SymmetricPotential::quartic().momentum_sq(0.5, 1.0), 0.0);
    }

    #[test]
    fn turning_points() {
        let t = SymmetricPotential::harmonic().turning_point(0.5).unwrap();
        assert!((t.t2 - 1.0).abs() < 1e-15 && t.t1 == -t.t2);
        let t = SymmetricPotential::quartic().turning_point(0.5).unwrap();
        assert!((t.t2 - 1.0).abs() < 1e-15);
        assert!(matches!(
            SymmetricPotential::quartic().turning_point(0.0),
            Err(Error::NonPositiveEnergy(_))
        ));
    }

    #[test]
    fn decadic_turning_point_matches_bisection() {
        // independent bisection on x^2 + x^10 - 2
        let (mut lo, mut hi) = (0.0f64, 2f64.powf(0.1));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid + mid.powi(10) - 2.0 > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let v = SymmetricPotential::decadic(1.0).unwrap();
        let t = v.turning_point(1.0).unwrap();
        assert!((t.t2 - lo).abs() < 1e-14 * lo);
        // x^2 + x^10 = 2 is solved exactly by x = 1
        assert!((t.t2 - 1.0).abs() < 1e-14);
        assert!(v.momentum_sq(1.0, t.t2).abs() < 1e-12 * 2.0);
    }

    #[test]
    fn harmonic_action_is_e_pi() {
        let h = SymmetricPotential::harmonic();
        for e in [0.5, 1.5, 7.25] {
            let s = h.action_difference(e).unwrap();
            assert!((s - e * PI).abs() < 1e-13 * e);
            let t = h.turning_point(e).unwrap();
            assert_eq!(h.classical_action(e, t.t1).unwrap(), 0.0);
        }
    }

    #[test]
    fn quartic_action_against_reference_quadrature() {
        // Gauss-Legendre on theta in x = t2 sin(theta) removes the endpoint
        // singularity; 10x the resolution of the production rule.
        let v = SymmetricPotential::quartic();
        let e: f64 = 0.53018;
        let t2 = (2.0 * e).powf(0.25);
        let rule = quad::GaussLegendre::new(200);
        let reference = rule.integrate(-PI / 2.0, PI / 2.0, |th: f64| {
            let x = t2 * th.sin();
            (2.0 * e - x.powi(4)).max(0.0).sqrt() * t2 * th.cos()
        });
        let s = v.classical_action(e, t2).unwrap();
        assert!((s - reference).abs() < 1e-12, "{s} vs {reference}");
    }

    #[test]
    fn parse_and_display_round_trip() {
        let v: SymmetricPotential = "2:0.5,10:500".parse().unwrap();
        assert_eq!(v, SymmetricPotential::decadic(1000.0).unwrap());
        assert_eq!(v.to_string(), "2:0.5,10:500");
        assert!("3:1".parse::<SymmetricPotential>().is_err());
        assert!("4:-1".parse::<SymmetricPotential>().is_err());
        assert!("4".parse::<SymmetricPotential>().is_err());
    }

    #[test]
    fn secant_slope_matches_difference_quotient() {
        let v = SymmetricPotential::decadic(3.0).unwrap();
        let (a, b) = (1.3, 0.4);
        let direct = (v.value(a) - v.value(b)) / (a - b);
        assert!((v.secant_slope(a, b) - direct).abs() < 1e-12 * direct);
        assert!((v.secant_slope(0.7, 0.7) - v.derivative(0.7)).abs() < 1e-13);
    }

    #[test]
    fn action_near_the_turning_point() {
        let v = SymmetricPotential::quartic();
        let e = 0.5301810452421155;
        let t2 = v.turning_point(e).unwrap().t2;
        // int_y^t2 p ~ (2/3) sqrt(2 V'(t2)) (t2 - y)^(3/2)
        let d: f64 = 1e-9;
        let leading = 2.0 / 3.0 * (2.0 * v.derivative(t2)).sqrt() * d.powf(1.5);
        assert!((v.action_to_turning_point(e, t2, t2 - d) / leading - 1.0).abs() < 1e-6);
    }
}
