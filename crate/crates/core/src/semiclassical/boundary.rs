use serde::{Deserialize, Serialize};

use crate::diffalg::TermCache;
use crate::error::{Error, Result};
use crate::model::SymmetricPotential;

/// How the phase derivative at the origin was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcMethod {
    /// `p(0) / hbar`.
    WkbP0,
    /// Truncated asymptotic series with the Stieltjes terminant.
    AsymptoticSeries,
    /// Closed form for a purely quadratic well.
    HarmonicExact,
}

/// Real value of `d sigma / dx` at `x = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub value: f64,
    pub order_used: usize,
    pub method: BcMethod,
    /// Raw contributions `D_k(0) hbar^(2k - 1)` before any halving.
    pub terms: Vec<f64>,
}

impl BoundaryCondition {
    pub fn explicit(value: f64, method: BcMethod) -> Self {
        Self {
            value,
            order_used: 0,
            method,
            terms: vec![value],
        }
    }
}

/// Sums the phase-derivative series at the origin up to the last term
/// before the magnitudes start growing (capped at `k_cap`), halving the last
/// retained term. Vanishing terms are skipped when looking for the turnover;
/// `k_cap` is clamped to the orders held by the global term cache.
pub fn bc_series(v: &SymmetricPotential, energy: f64, k_cap: usize) -> Result<BoundaryCondition> {
    let q0 = v.momentum_sq(energy, 0.0);
    if !(q0 > 0.0) {
        return Err(Error::ZeroMomentumAtOrigin(energy));
    }
    let cache = TermCache::global();
    // orders past the cache are never reached before the turnover in practice
    let k_cap = k_cap.min(cache.max_order());
    let hbar = v.hbar();
    let root = q0.sqrt();
    let mut terms = Vec::with_capacity(k_cap + 1);
    let mut last_nonzero: Option<(usize, f64)> = None;
    let mut k_max = 0;
    for k in 0..=k_cap {
        let term = cache.compiled_sigma(k)?;
        let jet: Vec<f64> = (0..=term.max_derivative())
            .map(|n| {
                if n == 0 {
                    q0
                } else {
                    -2.0 * v.derivative_n(n, 0.0)
                }
            })
            .collect();
        let t = term.evaluate_real(&jet, root)? * hbar.powi(2 * k as i32 - 1);
        if t != 0.0 {
            if let Some((_, prev)) = last_nonzero {
                if t.abs() > prev.abs() {
                    break;
                }
            }
            last_nonzero = Some((k, t));
        }
        terms.push(t);
        k_max = k;
    }
    let mut value: f64 = terms.iter().sum();
    if let Some((k, t)) = last_nonzero {
        if k > 0 {
            value -= 0.5 * t;
        }
    }
    let order_used = last_nonzero.map(|(k, _)| k).unwrap_or(0).min(k_max);
    Ok(BoundaryCondition {
        value,
        order_used,
        method: BcMethod::AsymptoticSeries,
        terms,
    })
}
