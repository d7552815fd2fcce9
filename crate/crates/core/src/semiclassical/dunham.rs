use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diffalg::{Branch, JetPoint, TermCache};
use crate::error::{Error, Result};
use crate::model::SymmetricPotential;
use crate::roots;

/// Clockwise ellipse around the cut `[t1, t2]`, axes in units of `t2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Relative tolerance of the trapezoid sums.
    pub tol: f64,
}

impl Default for Contour {
    fn default() -> Self {
        Self {
            semi_major: 1.25,
            semi_minor: 0.5,
            tol: 1e-13,
        }
    }
}

/// Treatment of the last retained term of an asymptotic sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminant {
    None,
    StieltjesHalf,
}

const MIN_NODES: usize = 64;
const MAX_NODES: usize = 1 << 16;

fn trapezoid(
    v: &SymmetricPotential,
    energy: f64,
    t2: f64,
    order: usize,
    contour: &Contour,
    n: usize,
) -> Result<(Complex64, f64)> {
    let cache = TermCache::global();
    let term = cache.compiled_riccati(order)?;
    let (a, b) = (contour.semi_major * t2, contour.semi_minor * t2);
    let branch = Branch::CutBetweenTurningPoints { t2 };
    let mut sum = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    let mut prev_root: Option<Complex64> = None;
    let mut first_root = Complex64::new(0.0, 0.0);
    let mut flipped = false;
    for j in 0..n {
        let th = 2.0 * PI * j as f64 / n as f64;
        let (s, c) = th.sin_cos();
        let z = Complex64::new(a * c, -b * s);
        let dz = Complex64::new(-a * s, -b * c);
        let pt = JetPoint::new(v, energy, z, term.max_derivative());
        let mut root = pt.root(branch);
        if let Some(p) = prev_root {
            // analytic continuation of sqrt(Q) from the previous node
            if (root - p).norm() > (root + p).norm() {
                root = -root;
                flipped = !flipped;
            }
        } else {
            first_root = root;
        }
        prev_root = Some(root);
        let f = term.evaluate_with_root(&pt.q, root)? * dz;
        magnitude += f.norm();
        sum += f;
    }
    if let Some(last) = prev_root {
        let closes = (last - first_root).norm() <= (last + first_root).norm();
        if !closes || flipped {
            return Err(Error::ContourTooTight(format!(
                "square root of p^2 does not return to its starting sheet at E = {energy}"
            )));
        }
    }
    let w = 2.0 * PI / n as f64;
    Ok((sum * w, magnitude * w))
}

/// `oint zeta_{2k}'(z) dz` on the ellipse, by the trapezoid rule with node
/// doubling until the relative change drops below `contour.tol`.
pub fn dunham_integral(v: &SymmetricPotential, energy: f64, k: usize, contour: &Contour) -> Result<Complex64> {
    let t2 = v.turning_point(energy)?.t2;
    if !(contour.semi_major > 1.0 && contour.semi_minor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "contour must enclose the turning points: {contour:?}"
        )));
    }
    let order = 2 * k;
    let mut n = MIN_NODES;
    let (mut last, _) = trapezoid(v, energy, t2, order, contour, n)?;
    while n < MAX_NODES {
        n *= 2;
        let (next, magnitude) = trapezoid(v, energy, t2, order, contour, n)?;
        let change = (next - last).norm();
        // the second test accepts sums that cancel down to rounding level
        if change <= contour.tol * next.norm().max(1.0) || change <= 1e-14 * magnitude {
            return Ok(next);
        }
        last = next;
    }
    Err(Error::ContourTooTight(format!(
        "trapezoid sum for order {order} not converged with {MAX_NODES} nodes"
    )))
}

/// `sum_{k < k_max} (-1)^k hbar^(2k) I_{2k}(E)`: `k_max` counts the retained
/// orders, so `k_max = 1` is first-order WKB. The terminant halves the last
/// retained order.
pub fn dunham_sum(
    v: &SymmetricPotential,
    energy: f64,
    k_max: usize,
    terminant: Terminant,
    contour: &Contour,
) -> Result<f64> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must retain at least one order".into()));
    }
    let h2 = v.hbar() * v.hbar();
    let mut total = 0.0;
    for k in 0..k_max {
        let mut t = dunham_integral(v, energy, k, contour)?.re * h2.powi(k as i32);
        if k % 2 == 1 {
            t = -t;
        }
        if k + 1 == k_max && k > 0 && terminant == Terminant::StieltjesHalf {
            t *= 0.5;
        }
        total += t;
    }
    Ok(total)
}

/// Solves the Dunham condition `sum = 2 pi hbar (n + 1/2)` starting from the
/// first-order energy.
pub fn dunham_quantize(
    v: &SymmetricPotential,
    n: usize,
    k_max: usize,
    terminant: Terminant,
    contour: &Contour,
) -> Result<f64> {
    let target = 2.0 * PI * v.hbar() * (n as f64 + 0.5);
    let f = |e: f64| Ok(dunham_sum(v, e, k_max, terminant, contour)? - target);
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must retain at least one order".into()));
    }
    let guess = super::wkb_quantize(v, n)?;
    if k_max == 1 {
        return Ok(guess);
    }
    let f0 = f(guess)?;
    let (mut lo, mut hi) = (guess, guess);
    let mut tries = 0;
    if f0 < 0.0 {
        while f(hi)? < 0.0 {
            lo = hi;
            hi *= 1.1;
            tries += 1;
            if tries > 60 {
                return Err(Error::BracketNotFound {
                    level: n,
                    reason: "Dunham sum stays below the target".into(),
                });
            }
        }
    } else if f0 > 0.0 {
        while f(lo)? > 0.0 {
            hi = lo;
            lo /= 1.1;
            tries += 1;
            if tries > 60 {
                return Err(Error::BracketNotFound {
                    level: n,
                    reason: "Dunham sum stays above the target".into(),
                });
            }
        }
    } else {
        return Ok(guess);
    }
    roots::brent(f, lo, hi, 1e-13, 200)
}
