//! Exact differential algebra over the jet of `Q = p^2`.
//!
//! An expression is a finite sum of monomials `c * P^e * Q1^m1 * Q2^m2 * ...`
//! with rational `c`, integer `e` and `P = sqrt(Q0)`. Even powers of `P` stand
//! for powers of `Q0`, so every expression is already in a canonical
//! two-sheet form: the Laurent structure is only ever in `P`, because the
//! recurrences below divide by the leading term alone.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::SymmetricPotential;

/// Default highest term index kept by the global cache.
pub const DEFAULT_MAX_ORDER: usize = 10;

/// `P^p * prod_n Q_n^q[n-1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    p: i32,
    q: Vec<u16>,
}

impl Monomial {
    fn one() -> Self {
        Self { p: 0, q: Vec::new() }
    }

    fn trimmed(mut self) -> Self {
        while self.q.last() == Some(&0) {
            self.q.pop();
        }
        self
    }

    fn mul(&self, other: &Self) -> Self {
        let n = self.q.len().max(other.q.len());
        let q = (0..n)
            .map(|i| self.q.get(i).copied().unwrap_or(0) + other.q.get(i).copied().unwrap_or(0))
            .collect();
        Self { p: self.p + other.p, q }
    }

    /// Power of `P`.
    pub fn p_power(&self) -> i32 {
        self.p
    }

    /// Power of `Q_n` for `n >= 1`.
    pub fn q_power(&self, n: usize) -> u16 {
        assert!(n >= 1, "Q0 is carried by the P power");
        self.q.get(n - 1).copied().unwrap_or(0)
    }

    fn max_derivative(&self) -> usize {
        self.q.len()
    }
}

/// Rational expression in `P, Q1, Q2, ...` with a monomial denominator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JetExpression {
    terms: BTreeMap<Monomial, BigRational>,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl JetExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut e = Self::zero();
        e.add_term(Monomial::one(), c);
        e
    }

    /// `P = sqrt(Q0)`.
    pub fn p() -> Self {
        Self::p_pow(1)
    }

    pub fn p_pow(e: i32) -> Self {
        let mut x = Self::zero();
        x.add_term(Monomial { p: e, q: Vec::new() }, BigRational::one());
        x
    }

    /// `Q^(n)`, the n-th derivative of `Q`.
    pub fn q(n: usize) -> Self {
        if n == 0 {
            return Self::p_pow(2);
        }
        let mut q = vec![0u16; n];
        q[n - 1] = 1;
        let mut x = Self::zero();
        x.add_term(Monomial { p: 0, q }, BigRational::one());
        x
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// Highest derivative order of `Q` appearing (0 when only `P` occurs).
    pub fn max_derivative(&self) -> usize {
        self.terms.keys().map(Monomial::max_derivative).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let m = m.trimmed();
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn add_scaled(&mut self, other: &Self, factor: &BigRational) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * factor);
        }
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, factor);
        out
    }

    /// Multiplies by `P^e`.
    pub fn shift_p(&self, e: i32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    (
                        Monomial {
                            p: m.p + e,
                            q: m.q.clone(),
                        },
                        c.clone(),
                    )
                })
                .collect(),
        }
    }

    /// Total derivative: `Q_n -> Q_{n+1}`, `P -> Q1 / (2P)`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.p != 0 {
                let mut q = m.q.clone();
                if q.is_empty() {
                    q.push(0);
                }
                q[0] += 1;
                out.add_term(Monomial { p: m.p - 2, q }, c * ratio(m.p as i64, 2));
            }
            for (i, &pow) in m.q.iter().enumerate() {
                if pow == 0 {
                    continue;
                }
                let mut q = m.q.clone();
                q[i] -= 1;
                if q.len() == i + 1 {
                    q.push(0);
                }
                q[i + 1] += 1;
                out.add_term(Monomial { p: m.p, q }, c * BigRational::from_integer(pow.into()));
            }
        }
        out
    }

    /// Splits into a numerator with non-negative `P` powers and the power of
    /// `P` that divides it.
    pub fn as_fraction(&self) -> (JetExpression, u32) {
        let lowest = self.terms.keys().map(|m| m.p).min().unwrap_or(0);
        if lowest >= 0 {
            (self.clone(), 0)
        } else {
            (self.shift_p(-lowest), (-lowest) as u32)
        }
    }

    /// Float image for fast repeated evaluation.
    pub fn compile(&self) -> CompiledJet {
        CompiledJet {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| CompiledTerm {
                    coeff: c.to_f64().unwrap_or(f64::NAN),
                    p: m.p,
                    q: m
                        .q
                        .iter()
                        .enumerate()
                        .filter(|(_, &k)| k > 0)
                        .map(|(i, &k)| (i + 1, k as i32))
                        .collect(),
                })
                .collect(),
            max_derivative: self.max_derivative(),
        }
    }

    /// Substitutes the jet values at `pt`, with `P` on the requested branch.
    pub fn evaluate(&self, pt: &JetPoint, branch: Branch) -> Result<Complex64> {
        self.compile().evaluate(pt, branch)
    }
}

impl Add for &JetExpression {
    type Output = JetExpression;
    fn add(self, rhs: Self) -> JetExpression {
        let mut out = self.clone();
        out.add_scaled(rhs, &BigRational::one());
        out
    }
}

impl Sub for &JetExpression {
    type Output = JetExpression;
    fn sub(self, rhs: Self) -> JetExpression {
        let mut out = self.clone();
        out.add_scaled(rhs, &-BigRational::one());
        out
    }
}

impl Neg for &JetExpression {
    type Output = JetExpression;
    fn neg(self) -> JetExpression {
        self.scale(&-BigRational::one())
    }
}

impl Mul for &JetExpression {
    type Output = JetExpression;
    fn mul(self, rhs: Self) -> JetExpression {
        let mut out = JetExpression::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, first: &mut bool, sep: &str, name: &str, pow: u32) -> fmt::Result {
    if pow == 0 {
        return Ok(());
    }
    if !*first {
        f.write_str(sep)?;
    }
    *first = false;
    if pow == 1 {
        write!(f, "{name}")
    } else {
        write!(f, "{name}^{pow}")
    }
}

impl fmt::Display for JetExpression {
    /// Canonical text: `P^e` is rendered as `Q0^(e div 2) * P^(e mod 2)` and
    /// negative powers go to a `/`-separated denominator, e.g. `-1/4*Q1/Q0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let c = c.abs();
            let (q0_num, p_num, q0_den, p_den) = if m.p >= 0 {
                ((m.p / 2) as u32, (m.p % 2) as u32, 0, 0)
            } else {
                let e = -m.p;
                (0, 0, (e / 2) as u32, (e % 2) as u32)
            };
            let has_num = q0_num + p_num > 0 || m.q.iter().any(|&k| k > 0);
            let mut first = true;
            if !c.is_one() || !has_num {
                write!(f, "{c}")?;
                first = false;
            }
            write_factor(f, &mut first, "*", "P", p_num)?;
            write_factor(f, &mut first, "*", "Q0", q0_num)?;
            for (n, &k) in m.q.iter().enumerate() {
                write_factor(f, &mut first, "*", &format!("Q{}", n + 1), k as u32)?;
            }
            let mut dfirst = true;
            for (name, pow) in [("P", p_den), ("Q0", q0_den)] {
                if pow > 0 {
                    if dfirst {
                        f.write_str("/")?;
                    }
                    write_factor(f, &mut dfirst, "/", name, pow)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct CompiledTerm {
    coeff: f64,
    p: i32,
    q: Vec<(usize, i32)>,
}

/// Floating-point image of a [`JetExpression`].
#[derive(Debug, Clone)]
pub struct CompiledJet {
    terms: Vec<CompiledTerm>,
    max_derivative: usize,
}

impl CompiledJet {
    pub fn max_derivative(&self) -> usize {
        self.max_derivative
    }

    /// Evaluates with an explicit value of `P`.
    pub fn evaluate_with_root(&self, q: &[Complex64], root: Complex64) -> Result<Complex64> {
        if q.len() <= self.max_derivative {
            return Err(Error::InvalidArgument(format!(
                "jet point carries {} derivatives, expression needs {}",
                q.len() - 1,
                self.max_derivative
            )));
        }
        let needs_inverse = self.terms.iter().any(|t| t.p < 0);
        if needs_inverse && root == Complex64::new(0.0, 0.0) {
            return Err(Error::PoleAtPoint);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut v = root.powi(t.p) * t.coeff;
            for &(n, k) in &t.q {
                v *= q[n].powi(k);
            }
            sum += v;
        }
        if !sum.re.is_finite() || !sum.im.is_finite() {
            return Err(Error::PoleAtPoint);
        }
        Ok(sum)
    }

    /// Real evaluation with `P = root` (used inside the allowed region).
    pub fn evaluate_real(&self, q: &[f64], root: f64) -> Result<f64> {
        let qc: Vec<Complex64> = q.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.evaluate_with_root(&qc, Complex64::new(root, 0.0))?.re)
    }

    pub fn evaluate(&self, pt: &JetPoint, branch: Branch) -> Result<Complex64> {
        self.evaluate_with_root(&pt.q, pt.root(branch))
    }
}

/// Which sheet of `P = sqrt(Q0)` to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    Principal,
    /// Cut on the real segment `[-t2, t2]`; `P > 0` approached from above.
    CutBetweenTurningPoints { t2: f64 },
}

/// Values `Q^(n)(z)` for `n = 0..=order` at a point `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub z: Complex64,
    pub q: Vec<Complex64>,
}

impl JetPoint {
    pub fn new(v: &SymmetricPotential, energy: f64, z: Complex64, order: usize) -> Self {
        let q = (0..=order)
            .map(|n| {
                let d = v.derivative_n_complex(n, z);
                if n == 0 {
                    2.0 * (energy - d)
                } else {
                    -2.0 * d
                }
            })
            .collect();
        Self { z, q }
    }

    pub fn real(v: &SymmetricPotential, energy: f64, x: f64, order: usize) -> Self {
        Self::new(v, energy, Complex64::new(x, 0.0), order)
    }

    /// Arbitrary jet values, not tied to a potential.
    pub fn from_values(z: Complex64, q: Vec<Complex64>) -> Self {
        Self { z, q }
    }

    pub fn root(&self, branch: Branch) -> Complex64 {
        match branch {
            Branch::Principal => self.q[0].sqrt(),
            Branch::CutBetweenTurningPoints { t2 } => {
                // Q = (t2^2 - z^2) G(z^2) with G free of zeros near the cut;
                // z sqrt(1 - t2^2/z^2) carries the cut on [-t2, t2].
                let z = self.z;
                let t2sq = Complex64::new(t2 * t2, 0.0);
                let g = self.q[0] / (t2sq - z * z);
                let h = z * (Complex64::new(1.0, 0.0) - t2sq / (z * z)).sqrt();
                Complex64::new(0.0, -1.0) * h * g.sqrt()
            }
        }
    }
}

/// Memoized Riccati and phase-derivative terms.
pub struct TermCache {
    max_order: usize,
    riccati: Mutex<Vec<Arc<JetExpression>>>,
    sigma: Mutex<SigmaState>,
    compiled_riccati: Mutex<BTreeMap<usize, Arc<CompiledJet>>>,
    compiled_sigma: Mutex<BTreeMap<usize, Arc<CompiledJet>>>,
}

#[derive(Default)]
struct SigmaState {
    d: Vec<Arc<JetExpression>>,
    // log-derivative terms Y_k of D and Schwarzian terms
    y: Vec<JetExpression>,
    schw: Vec<JetExpression>,
}

impl TermCache {
    /// `max_order` bounds the phase-derivative index `k` and the Dunham index
    /// (Riccati terms up to `2 * max_order`).
    pub fn new(max_order: usize) -> Self {
        Self {
            max_order,
            riccati: Mutex::new(vec![Arc::new(JetExpression::p())]),
            sigma: Mutex::new(SigmaState::default()),
            compiled_riccati: Mutex::new(BTreeMap::new()),
            compiled_sigma: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn global() -> &'static TermCache {
        static CACHE: OnceLock<TermCache> = OnceLock::new();
        CACHE.get_or_init(|| TermCache::new(DEFAULT_MAX_ORDER))
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `zeta_k'`: `zeta_0' = P`,
    /// `zeta_k' = -(zeta_{k-1}'' + sum_{j=1}^{k-1} zeta_j' zeta_{k-j}') / (2P)`.
    pub fn riccati_term(&self, k: usize) -> Result<Arc<JetExpression>> {
        if k > 2 * self.max_order {
            return Err(Error::InvalidArgument(format!(
                "Riccati term {k} exceeds the cache limit {}",
                2 * self.max_order
            )));
        }
        let mut terms = self.riccati.lock().expect("term cache poisoned");
        while terms.len() <= k {
            let n = terms.len();
            let mut acc = terms[n - 1].derivative();
            for j in 1..n {
                acc = &acc + &(&*terms[j] * &*terms[n - j]);
            }
            let next = acc.shift_p(-1).scale(&ratio(-1, 2));
            terms.push(Arc::new(next));
        }
        Ok(terms[k].clone())
    }

    /// `D_k`, the coefficient of `hbar^(2k)` in the phase derivative, from
    /// `D^2 + (hbar^2/2) (D''/D - 3/2 (D'/D)^2) = Q`.
    pub fn sigma_term(&self, k: usize) -> Result<Arc<JetExpression>> {
        if k > self.max_order {
            return Err(Error::InvalidArgument(format!(
                "phase term {k} exceeds the cache limit {}",
                self.max_order
            )));
        }
        let mut st = self.sigma.lock().expect("term cache poisoned");
        if st.d.is_empty() {
            let d0 = JetExpression::p();
            let y0 = d0.derivative().shift_p(-1);
            let s0 = &y0.derivative() - &(&y0 * &y0).scale(&ratio(1, 2));
            st.d.push(Arc::new(d0));
            st.y.push(y0);
            st.schw.push(s0);
        }
        while st.d.len() <= k {
            let n = st.d.len();
            let mut acc = st.schw[n - 1].scale(&ratio(1, 2));
            for j in 1..n {
                acc = &acc + &(&*st.d[j] * &*st.d[n - j]);
            }
            let dn = acc.shift_p(-1).scale(&ratio(-1, 2));

            let mut yn = dn.derivative();
            for j in 1..=n {
                let dj: &JetExpression = if j == n { &dn } else { &st.d[j] };
                yn = &yn - &(dj * &st.y[n - j]);
            }
            let yn = yn.shift_p(-1);

            let mut sn = yn.derivative();
            let half = ratio(1, 2);
            for j in 0..=n {
                let yj = if j == n { &yn } else { &st.y[j] };
                let yk = if n - j == n { &yn } else { &st.y[n - j] };
                sn = &sn - &(yj * yk).scale(&half);
            }
            st.d.push(Arc::new(dn));
            st.y.push(yn);
            st.schw.push(sn);
        }
        Ok(st.d[k].clone())
    }

    pub fn compiled_riccati(&self, k: usize) -> Result<Arc<CompiledJet>> {
        if let Some(c) = self.compiled_riccati.lock().expect("poisoned").get(&k) {
            return Ok(c.clone());
        }
        let c = Arc::new(self.riccati_term(k)?.compile());
        self.compiled_riccati
            .lock()
            .expect("poisoned")
            .insert(k, c.clone());
        Ok(c)
    }

    pub fn compiled_sigma(&self, k: usize) -> Result<Arc<CompiledJet>> {
        if let Some(c) = self.compiled_sigma.lock().expect("poisoned").get(&k) {
            return Ok(c.clone());
        }
        let c = Arc::new(self.sigma_term(k)?.compile());
        self.compiled_sigma.lock().expect("poisoned").insert(k, c.clone());
        Ok(c)
    }
}

/// `zeta_k'` from the global cache.
pub fn riccati_term(k: usize) -> Result<Arc<JetExpression>> {
    TermCache::global().riccati_term(k)
}

/// `D_k` from the global cache.
pub fn sigma_term(k: usize) -> Result<Arc<JetExpression>> {
    TermCache::global().sigma_term(k)
}

pub fn jet_derivative(e: &JetExpression) -> JetExpression {
    e.derivative()
}
