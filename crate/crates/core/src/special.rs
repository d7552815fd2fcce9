//! Airy functions of real argument and the Gamma function.
//!
//! Ai and Bi are evaluated from three pieces:
//!
//! * `|x| >= 10`: the standard asymptotic expansions in `zeta = 2/3 |x|^(3/2)`,
//!   truncated at the smallest term (relative error ~ `exp(-2 zeta)`).
//! * `|x| < 10`: a single Taylor step of the Airy equation `w'' = x w` from the
//!   nearest node of a table spaced 0.5 apart.
//!
//! The table itself is filled by Taylor stepping in the numerically stable
//! direction: Bi outward from its exact values at 0, Ai inward from its
//! asymptotic values at `x = 10`. On the oscillatory side both functions are
//! stepped from 0 and from `x = -10` towards the middle.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// `Ai(x)`, `Ai'(x)`, `Bi(x)`, `Bi'(x)`; for `x > 0` exponentially scaled
/// (see [`airy_scaled`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValues {
    pub ai: f64,
    pub aip: f64,
    pub bi: f64,
    pub bip: f64,
}

const AI0: f64 = 0.355_028_053_887_817_239_260_063_186_004_183_176_397_979_174_199;
const AIP0: f64 = -0.258_819_403_792_806_798_405_183_560_189_203_963_479_091_138_354;
const SQRT3: f64 = 1.732_050_807_568_877_293_527_446_341_505_872_366_942_805_253_810;

const TABLE_EDGE: f64 = 10.0;
const TABLE_STEP: f64 = 0.5;
const TABLE_LEN: usize = 41;

/// `zeta = 2/3 x^(3/2)` for `x > 0`, else 0.
pub fn airy_zeta(x: f64) -> f64 {
    if x > 0.0 {
        2.0 / 3.0 * x * x.sqrt()
    } else {
        0.0
    }
}

/// Unscaled `Ai, Ai', Bi, Bi'`. Overflows/underflows for `x` beyond ~100.
pub fn airy(x: f64) -> AiryValues {
    let mut v = airy_scaled(x);
    if x > 0.0 {
        let z = airy_zeta(x);
        let (dn, up) = ((-z).exp(), z.exp());
        v.ai *= dn;
        v.aip *= dn;
        v.bi *= up;
        v.bip *= up;
    }
    v
}

/// For `x > 0` returns `Ai e^zeta, Ai' e^zeta, Bi e^-zeta, Bi' e^-zeta`;
/// for `x <= 0` the plain values.
pub fn airy_scaled(x: f64) -> AiryValues {
    if x >= TABLE_EDGE {
        asymptotic_positive(x)
    } else if x <= -TABLE_EDGE {
        asymptotic_negative(-x)
    } else {
        let table = table();
        let j = ((x + TABLE_EDGE) / TABLE_STEP).round() as usize;
        let j = j.min(TABLE_LEN - 1);
        let x0 = -TABLE_EDGE + TABLE_STEP * j as f64;
        let node = &table[j];
        let (ai, aip) = taylor_step(x0, node.ai, node.aip, x - x0);
        let (bi, bip) = taylor_step(x0, node.bi, node.bip, x - x0);
        let mut v = AiryValues { ai, aip, bi, bip };
        if x > 0.0 {
            let z = airy_zeta(x);
            let (up, dn) = (z.exp(), (-z).exp());
            v.ai *= up;
            v.aip *= up;
            v.bi *= dn;
            v.bip *= dn;
        }
        v
    }
}

fn table() -> &'static [AiryValues; TABLE_LEN] {
    static TABLE: OnceLock<[AiryValues; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

fn build_table() -> [AiryValues; TABLE_LEN] {
    let zero = AiryValues {
        ai: 0.0,
        aip: 0.0,
        bi: 0.0,
        bip: 0.0,
    };
    let mut t = [zero; TABLE_LEN];
    let mid = TABLE_LEN / 2;
    let x_of = |j: usize| -TABLE_EDGE + TABLE_STEP * j as f64;

    // Oscillatory side: the inner half from the origin, the outer half from
    // the asymptotic values at -10, so no node is more than 10 steps away.
    let quarter = mid / 2;
    let (mut ai, mut aip) = (AI0, AIP0);
    let (mut bi, mut bip) = (SQRT3 * AI0, -SQRT3 * AIP0);
    t[mid] = AiryValues { ai, aip, bi, bip };
    for j in (quarter + 1..mid).rev() {
        let x0 = x_of(j + 1);
        (ai, aip) = taylor_step(x0, ai, aip, -TABLE_STEP);
        (bi, bip) = taylor_step(x0, bi, bip, -TABLE_STEP);
        t[j] = AiryValues { ai, aip, bi, bip };
    }
    t[0] = asymptotic_negative(TABLE_EDGE);
    let AiryValues {
        mut ai,
        mut aip,
        mut bi,
        mut bip,
    } = t[0];
    for j in 1..=quarter {
        let x0 = x_of(j - 1);
        (ai, aip) = taylor_step(x0, ai, aip, TABLE_STEP);
        (bi, bip) = taylor_step(x0, bi, bip, TABLE_STEP);
        t[j] = AiryValues { ai, aip, bi, bip };
    }

    let (mut bi, mut bip) = (SQRT3 * AI0, -SQRT3 * AIP0);
    for j in mid + 1..TABLE_LEN {
        (bi, bip) = taylor_step(x_of(j - 1), bi, bip, TABLE_STEP);
        t[j].bi = bi;
        t[j].bip = bip;
    }

    let edge = asymptotic_positive(TABLE_EDGE);
    let scale = (-airy_zeta(TABLE_EDGE)).exp();
    let (mut ai, mut aip) = (edge.ai * scale, edge.aip * scale);
    t[TABLE_LEN - 1].ai = ai;
    t[TABLE_LEN - 1].aip = aip;
    for j in (mid + 1..TABLE_LEN - 1).rev() {
        (ai, aip) = taylor_step(x_of(j + 1), ai, aip, -TABLE_STEP);
        t[j].ai = ai;
        t[j].aip = aip;
    }
    t
}

/// Taylor expansion of a solution of `w'' = x w` about `x0`, evaluated at
/// `x0 + h`.
fn taylor_step(x0: f64, w: f64, wp: f64, h: f64) -> (f64, f64) {
    if h == 0.0 {
        return (w, wp);
    }
    // Scaled coefficients b[k] = a[k] h^k with
    // (k+2)(k+1) a[k+2] = x0 a[k] + a[k-1].
    let (h2, h3) = (h * h, h * h * h);
    let mut prev = 0.0; // b[k-1]
    let mut cur = w; // b[k]
    let mut next = wp * h; // b[k+1]
    let mut val = cur + next;
    let mut der = wp;
    let mut small = 0;
    for k in 0..200usize {
        let kf = k as f64;
        let b = (x0 * cur * h2 + prev * h3) / ((kf + 2.0) * (kf + 1.0));
        val += b;
        der += (kf + 2.0) * b / h;
        small = if b.abs() <= 1e-18 * val.abs().max(w.abs()) {
            small + 1
        } else {
            0
        };
        if small >= 3 {
            break;
        }
        prev = cur;
        cur = next;
        next = b;
    }
    (val, der)
}

/// Coefficients `u_k`, `v_k` of the Airy asymptotic series.
fn uv_coefficients() -> &'static (Vec<f64>, Vec<f64>) {
    static UV: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    UV.get_or_init(|| {
        let mut u = vec![1.0];
        let mut v = vec![1.0];
        for k in 1..60 {
            let kf = k as f64;
            let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            u.push(uk);
            v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
        }
        (u, v)
    })
}

/// Sums `sum_k sign(k) c_k zeta^-k` up to the smallest term.
fn asymptotic_sum(coeffs: &[f64], zeta: f64, alternate: bool, parity: Option<usize>) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut zpow = 1.0;
    for (k, &c) in coeffs.iter().enumerate() {
        if k > 0 {
            zpow /= zeta;
        }
        let term = c * zpow;
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        let take = match parity {
            Some(p) => k % 2 == p,
            None => true,
        };
        if take {
            let sign = match (alternate, parity) {
                (true, None) => {
                    if k % 2 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                }
                // (-1)^j for k = 2j or k = 2j + 1
                (true, Some(_)) => {
                    if (k / 2) % 2 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                }
                (false, _) => 1.0,
            };
            sum += sign * term;
        }
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn asymptotic_positive(x: f64) -> AiryValues {
    let (u, v) = uv_coefficients();
    let zeta = airy_zeta(x);
    let q = x.powf(0.25);
    let sp = PI.sqrt();
    AiryValues {
        ai: asymptotic_sum(u, zeta, true, None) / (2.0 * sp * q),
        aip: -q * asymptotic_sum(v, zeta, true, None) / (2.0 * sp),
        bi: asymptotic_sum(u, zeta, false, None) / (sp * q),
        bip: q * asymptotic_sum(v, zeta, false, None) / sp,
    }
}

fn asymptotic_negative(z: f64) -> AiryValues {
    let (u, v) = uv_coefficients();
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let q = z.powf(0.25);
    let sp = PI.sqrt();
    let (s, c) = (zeta - PI / 4.0).sin_cos();
    let ue = asymptotic_sum(u, zeta, true, Some(0));
    let uo = asymptotic_sum(u, zeta, true, Some(1));
    let ve = asymptotic_sum(v, zeta, true, Some(0));
    let vo = asymptotic_sum(v, zeta, true, Some(1));
    AiryValues {
        ai: (c * ue + s * uo) / (sp * q),
        aip: q * (s * ve - c * vo) / sp,
        bi: (-s * ue + c * uo) / (sp * q),
        bip: q * (c * ve + s * vo) / sp,
    }
}

/// `Gamma(x)` for real `x` (poles at non-positive integers return +-inf/NaN).
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        let v = airy(0.0);
        assert!((v.ai - AI0).abs() < 1e-16);
        assert!((v.bi / v.ai - SQRT3).abs() < 1e-15);
    }

    #[test]
    fn wronskian_is_one_over_pi() {
        for &x in &[-25.0, -9.7, -3.3, -0.2, 0.0, 0.7, 4.4, 9.9, 10.5, 30.0] {
            let v = airy_scaled(x);
            // scaling factors cancel in the product
            let w = v.ai * v.bip - v.aip * v.bi;
            assert!((w - 1.0 / PI).abs() < 2e-14, "x = {x}: {w}");
        }
    }

    #[test]
    fn table_and_asymptotic_agree_at_edges() {
        let a = asymptotic_positive(10.0);
        let t = airy_scaled(10.0 - 1e-15);
        assert!(((a.ai - t.ai) / a.ai).abs() < 1e-13);
        assert!(((a.bi - t.bi) / a.bi).abs() < 1e-13);
        // seam between the two halves of the oscillatory table
        let (l, r) = (airy_scaled(-4.75 - 1e-13), airy_scaled(-4.75 + 1e-13));
        assert!((l.ai - r.ai).abs() < 1e-12 && (l.bi - r.bi).abs() < 1e-12);
        assert!((l.aip - r.aip).abs() < 1e-12 && (l.bip - r.bip).abs() < 1e-12);
    }

    #[test]
    fn gamma_half() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-15);
    }
}
