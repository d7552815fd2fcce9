//! Scalar root finding on bracketed, monotone functions.

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Stops when the bracket is narrower than `rel_tol * max(1, |x|)`.
pub fn brent<F>(mut f: F, a: f64, b: f64, rel_tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidArgument(format!(
            "root not bracketed: f({a}) = {fa}, f({b}) = {fb}"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * rel_tol * b.abs().max(1.0);
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_update: (c - b).abs(),
    })
}

/// Finds `[lo, hi]` with `f(lo) < 0 < f(hi)` for an increasing `f` on `(0, inf)`,
/// starting from `guess` and expanding geometrically.
pub fn bracket_increasing<F>(mut f: F, guess: f64, level: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut lo = guess;
    let mut hi = guess;
    let mut flo = f(lo)?;
    let mut fhi = flo;
    let mut tries = 0;
    while flo >= 0.0 {
        hi = lo;
        fhi = flo;
        lo *= 0.5;
        flo = f(lo)?;
        tries += 1;
        if tries > 80 {
            return Err(Error::BracketNotFound {
                level,
                reason: "function stays non-negative towards E -> 0".into(),
            });
        }
    }
    tries = 0;
    while fhi <= 0.0 {
        lo = hi.max(lo);
        hi *= 2.0;
        fhi = f(hi)?;
        tries += 1;
        if tries > 80 {
            return Err(Error::BracketNotFound {
                level,
                reason: "function stays non-positive".into(),
            });
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cube_root() {
        let r = brent(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn bracket_then_solve() {
        let f = |x: f64| Ok(x.ln() - 3.0);
        let (lo, hi) = bracket_increasing(f, 1.0, 0).unwrap();
        assert!(lo < 3f64.exp() && hi > 3f64.exp());
        let r = brent(f, lo, hi, 1e-14, 200).unwrap();
        assert!((r - 3f64.exp()).abs() < 1e-11);
    }

    #[test]
    fn unbracketed_is_an_error() {
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 50).is_err());
    }
}
