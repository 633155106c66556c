//! Numerical evaluation of `He^{s1..sr}(z)`, the regularized `He¹`, the
//! Hurwitz zeta function and generator polynomials.
//!
//! Nested sums are computed by a backward recurrence over the innermost
//! index `m = N, …, 1`, started from asymptotic expansions of the tail
//! sums `T_k(m) = Σ_{n1>…>nk>m} Π (ni+z)^{-si}` in powers of `1/(m+z)`.
//! The expansion coefficients are exact rationals obtained by composing
//! the Euler–Maclaurin series of `ζ(p, a+1)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composition::{Composition, FormalSum};
use crate::graded::GeneratorPolynomial;
use crate::mp::{bits_for_digits, parse_decimal_rational, Complex, Real};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_PRECISION: u32 = 28;
pub const GUARD_DIGITS: u32 = 5;
pub const MIN_PRECISION: u32 = 10;
pub const MAX_PRECISION: u32 = 300;
/// Arguments closer than this to a pole are rejected.
pub const POLE_RADIUS: f64 = 1e-15;
pub const VALIDATED_DEPTH: usize = 4;
pub const VALIDATED_WEIGHT: u64 = 8;

const REFINEMENT_ROUNDS: usize = 4;
/// Bits used to hold user-supplied arguments before rounding to working
/// precision.
const INPUT_BITS: u32 = 3400;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("divergent series: {0} has first part < 2")]
    Divergent(Composition),
    #[error("argument {re}{im:+}i lies on the pole set")]
    Pole { re: f64, im: f64 },
    #[error("exponent {0} must be ≥ 2")]
    BadExponent(u32),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("precision must lie in {MIN_PRECISION}..={MAX_PRECISION} digits, got {0}")]
    InvalidPrecision(u32),
    #[error("tolerance {tolerance:e} is below 1e-{} for precision {precision}", .precision - GUARD_DIGITS)]
    ToleranceTooSmall { tolerance: f64, precision: u32 },
    #[error("refinement did not settle below {tolerance:e} (last difference {difference:e})")]
    NotConverged { tolerance: f64, difference: f64 },
    #[error("malformed value: {0}")]
    Malformed(String),
}

/// How `error_bound` was obtained. Ordered from strongest to weakest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Exact,
    Certified,
    Heuristic,
    HeuristicUnvalidated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    /// Number of terms summed directly.
    pub truncation: u64,
    /// Number of asymptotic correction terms.
    pub em_order: u32,
    /// Working precision in decimal digits.
    pub precision: u32,
    /// Working precision in bits.
    pub bits: u32,
    pub bound_kind: BoundKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: Complex,
    pub error_bound: f64,
    pub params: EvalParams,
}

impl EvalResult {
    fn exact(value: Complex, precision: u32) -> Self {
        EvalResult {
            value,
            error_bound: 0.0,
            params: EvalParams {
                truncation: 0,
                em_order: 0,
                precision,
                bits: working_bits(precision),
                bound_kind: BoundKind::Exact,
            },
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        self.value.to_f64()
    }

    pub fn to_serial(&self) -> SerialEvalResult {
        SerialEvalResult {
            value: SerialComplex::from_complex(&self.value, self.params.precision as usize + 5),
            error_bound: format!("{:e}", self.error_bound),
            params: self.params.clone(),
        }
    }

    pub fn from_serial(s: &SerialEvalResult) -> Result<Self, EvalError> {
        let error_bound: f64 = s
            .error_bound
            .parse()
            .map_err(|_| EvalError::Malformed(s.error_bound.clone()))?;
        Ok(EvalResult {
            value: s.value.to_complex(s.params.bits)?,
            error_bound,
            params: s.params.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerialComplex {
    pub re: String,
    pub im: String,
}

impl SerialComplex {
    pub fn from_complex(z: &Complex, digits: usize) -> Self {
        SerialComplex {
            re: z.re.to_sci_string(digits),
            im: z.im.to_sci_string(digits),
        }
    }

    pub fn to_complex(&self, bits: u32) -> Result<Complex, EvalError> {
        let part = |t: &str| {
            Real::parse_decimal(t, bits).ok_or_else(|| EvalError::Malformed(t.to_string()))
        };
        Ok(Complex::new(part(&self.re)?, part(&self.im)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerialEvalResult {
    pub value: SerialComplex,
    pub error_bound: String,
    pub params: EvalParams,
}

#[derive(Debug, Clone)]
pub struct EvalRequest {
    pub composition: Composition,
    pub z: Complex,
    pub tolerance: f64,
    pub precision: u32,
}

impl EvalRequest {
    pub fn new(composition: Composition, z: Complex) -> Self {
        EvalRequest {
            composition,
            z,
            tolerance: DEFAULT_TOLERANCE,
            precision: DEFAULT_PRECISION,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_precision(mut self, precision: u32) -> Self {
        self.precision = precision;
        self
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        check_numerics(self.tolerance, self.precision)?;
        check_pole(&self.z, false)
    }
}

/// A complex argument holding `re + im·i` exactly.
pub fn point(re: f64, im: f64) -> Complex {
    Complex::from_f64(re, im, 64)
}

/// Parses `re` or `re,im` decimal text.
pub fn parse_point(text: &str) -> Result<Complex, EvalError> {
    let part = |t: &str| {
        parse_decimal_rational(t)
            .map(|q| Real::from_rational(&q, INPUT_BITS))
            .ok_or_else(|| EvalError::Malformed(text.to_string()))
    };
    match text.split_once(',') {
        Some((re, im)) => Ok(Complex::new(part(re)?, part(im)?)),
        None => Ok(Complex::from_real(part(text)?)),
    }
}

/// Smallest tolerance accepted at `precision` digits.
pub fn min_tolerance(precision: u32) -> f64 {
    10f64.powi(-(precision.saturating_sub(GUARD_DIGITS) as i32))
}

fn check_numerics(tolerance: f64, precision: u32) -> Result<(), EvalError> {
    if !(MIN_PRECISION..=MAX_PRECISION).contains(&precision) {
        return Err(EvalError::InvalidPrecision(precision));
    }
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(EvalError::InvalidTolerance(tolerance));
    }
    // compare with a little slack so that 1e-23 passes at 28 digits
    if tolerance < min_tolerance(precision) * (1.0 - 1e-9) {
        return Err(EvalError::ToleranceTooSmall {
            tolerance,
            precision,
        });
    }
    Ok(())
}

/// Rejects `z` within [`POLE_RADIUS`] of a negative integer, or of zero
/// when `zero_is_pole`.
fn check_pole(z: &Complex, zero_is_pole: bool) -> Result<(), EvalError> {
    let (re, im) = z.to_f64();
    let nearest = re.round();
    let limit = if zero_is_pole { 0.0 } else { -1.0 };
    if nearest <= limit && (re - nearest).hypot(im) <= POLE_RADIUS {
        return Err(EvalError::Pole { re, im });
    }
    Ok(())
}

fn working_bits(precision: u32) -> u32 {
    bits_for_digits(precision) + 16
}

fn rounding_floor(bits: u32, steps: u64, magnitude: f64) -> f64 {
    2f64.powi(-(bits as i32)) * 64.0 * steps.max(1) as f64 * magnitude.max(1.0)
}

// ---------------------------------------------------------------------------
// Bernoulli numbers

fn bernoulli_cache() -> &'static RwLock<Vec<BigRational>> {
    static CACHE: OnceLock<RwLock<Vec<BigRational>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(vec![BigRational::one()]))
}

/// `B_n` with the convention `B_1 = −1/2`.
pub fn bernoulli(n: usize) -> BigRational {
    if let Some(b) = bernoulli_cache().read().expect("cache lock").get(n) {
        return b.clone();
    }
    let mut cache = bernoulli_cache().write().expect("cache lock");
    while cache.len() <= n {
        let m = cache.len();
        // Σ_{j=0}^{m} C(m+1, j) B_j = 0
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for (j, b) in cache.iter().enumerate() {
            if !b.is_zero() {
                acc += b * BigRational::from_integer(binom.clone());
            }
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        cache.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    cache[n].clone()
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn rising(p: u32, len: u32) -> BigInt {
    (0..len).fold(BigInt::one(), |acc, i| acc * (p + i))
}

/// `ln(|B_{2m}| / (2m)!)`.
fn ln_bernoulli_over_factorial(m: u32) -> f64 {
    let q = bernoulli(2 * m as usize) / BigRational::from_integer(factorial(2 * m));
    Real::from_rational(&q.abs(), 64).to_f64().ln()
}

/// Euler–Maclaurin remainder after `m` Bernoulli corrections for
/// `Σ_{n≥N} (n+a)^{-s}` with `x = N + Re a > 0`:
/// `|B_{2m}|/(2m)! · (s)_{2m} / (s+2m−1) · x^{1−s−2m}`.
fn em_remainder_bound(s: u32, m: u32, x: f64) -> f64 {
    let ln_rising: f64 = (0..2 * m).map(|i| f64::from(s + i).ln()).sum();
    let ln = ln_bernoulli_over_factorial(m) + ln_rising - f64::from(s + 2 * m - 1).ln()
        + (1.0 - f64::from(s) - f64::from(2 * m)) * x.ln();
    ln.exp()
}

// ---------------------------------------------------------------------------
// Tail expansions

/// Coefficients `c_j`, `j = 0..=order`, of
/// `ζ(p, a+1) = Σ_{n>0} (n+a)^{-p} ~ Σ_j c_j a^{-j}`.
fn shifted_zeta_series(p: u32, order: u32) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); order as usize + 1];
    if p - 1 <= order {
        v[(p - 1) as usize] += BigRational::new(BigInt::one(), BigInt::from(p - 1));
    }
    if p <= order {
        v[p as usize] -= BigRational::new(BigInt::one(), BigInt::from(2));
    }
    let mut k = 1;
    while p + 2 * k - 1 <= order {
        let c =
            bernoulli(2 * k as usize) * BigRational::new(rising(p, 2 * k - 1), factorial(2 * k));
        v[(p + 2 * k - 1) as usize] += c;
        k += 1;
    }
    v
}

type TailSeries = Arc<Vec<Vec<BigRational>>>;

/// Expansion coefficients of `T_0 = 1, T_1, …, T_r` in powers of
/// `1/(m+z)`, truncated after `order`.
fn tail_series(parts: &[u32], order: u32) -> TailSeries {
    static CACHE: OnceLock<Mutex<HashMap<(Vec<u32>, u32), TailSeries>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (parts.to_vec(), order);
    if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
        return hit.clone();
    }
    let len = order as usize + 1;
    let mut zeta_memo: HashMap<u32, Vec<BigRational>> = HashMap::new();
    let mut out = Vec::with_capacity(parts.len() + 1);
    let mut prev = vec![BigRational::zero(); len];
    prev[0] = BigRational::one();
    out.push(prev.clone());
    for &s in parts {
        let mut next = vec![BigRational::zero(); len];
        for (j, c) in prev.iter().enumerate() {
            let p = s + j as u32;
            if c.is_zero() || p - 1 > order {
                continue;
            }
            let z = zeta_memo
                .entry(p)
                .or_insert_with(|| shifted_zeta_series(p, order));
            for (slot, zc) in next.iter_mut().zip(z.iter()) {
                if !zc.is_zero() {
                    *slot += c * zc;
                }
            }
        }
        out.push(next.clone());
        prev = next;
    }
    let series = Arc::new(out);
    cache
        .lock()
        .expect("cache lock")
        .insert(key, series.clone());
    series
}

fn horner(coeffs: &[Real], u: &Complex) -> Complex {
    let prec = u.prec();
    let mut acc = Complex::zero(prec);
    for c in coeffs.iter().rev() {
        acc = (&acc * u).add_real(c);
    }
    acc
}

/// `He^{parts}(z)` with `n` directly summed layers and tail expansions to
/// `order`.
fn nested_sum(parts: &[u32], z: &Complex, n: u64, order: u32, bits: u32) -> Complex {
    let r = parts.len();
    let series = tail_series(parts, order);
    let a = z.add_real(&Real::from_u64(n, bits));
    let u = a.inv();
    let mut t: Vec<Complex> = series
        .iter()
        .map(|coeffs| {
            let reals: Vec<Real> = coeffs
                .iter()
                .map(|q| Real::from_rational(q, bits))
                .collect();
            horner(&reals, &u)
        })
        .collect();
    let max_part = *parts.iter().max().expect("nonempty") as usize;
    for m in (1..=n).rev() {
        let w = z.add_real(&Real::from_u64(m, bits)).inv();
        let mut powers = Vec::with_capacity(max_part + 1);
        powers.push(Complex::one(bits));
        for e in 1..=max_part {
            let next = &powers[e - 1] * &w;
            powers.push(next);
        }
        for k in (1..=r).rev() {
            let term = &powers[parts[k - 1] as usize] * &t[k - 1];
            t[k] = &t[k] + &term;
        }
    }
    t.swap_remove(r)
}

#[derive(Debug, Clone, Copy)]
struct Plan {
    truncation: u64,
    order: u32,
}

impl Plan {
    fn refined(self) -> Plan {
        Plan {
            truncation: 2 * self.truncation,
            order: self.order + 8,
        }
    }
}

/// Evaluates at successive refinements until two agree within
/// `tolerance / 4`. `eval` returns a value and an a priori error estimate.
fn refine(
    tolerance: f64,
    mut plan: Plan,
    eval: impl Fn(Plan) -> (Complex, f64),
) -> Result<(Complex, f64, Plan), EvalError> {
    let (mut prev, _) = eval(plan);
    let mut difference = f64::INFINITY;
    for _ in 0..REFINEMENT_ROUNDS {
        let next = plan.refined();
        let (value, a_priori) = eval(next);
        difference = (&value - &prev).abs().to_f64();
        let bound = difference.max(a_priori);
        if difference <= tolerance / 4.0 && bound <= tolerance {
            return Ok((value, bound, next));
        }
        prev = value;
        plan = next;
    }
    Err(EvalError::NotConverged {
        tolerance,
        difference,
    })
}

fn initial_truncation(precision: u32, z: &Complex) -> u64 {
    u64::from(precision.max(20)) + (2.0 * z.abs_f64()).ceil() as u64
}

/// Evaluates `He^c(z)` and validates the result by refinement.
pub fn eval_hmzf(req: &EvalRequest) -> Result<EvalResult, EvalError> {
    req.validate()?;
    let c = &req.composition;
    if c.is_empty() {
        return Ok(EvalResult::exact(
            Complex::one(working_bits(req.precision)),
            req.precision,
        ));
    }
    if !c.is_convergent() {
        return Err(EvalError::Divergent(c.clone()));
    }
    let bits = working_bits(req.precision);
    let z = req.z.with_prec(bits);
    let parts = c.parts();
    let re_z = z.re.to_f64();
    let plan = Plan {
        truncation: initial_truncation(req.precision, &z),
        order: req.precision + c.weight() as u32 + 10,
    };
    let (value, error_bound, plan) = refine(req.tolerance, plan, |p| {
        let v = nested_sum(parts, &z, p.truncation, p.order, bits);
        let steps = (p.truncation + u64::from(p.order)) * parts.len() as u64;
        let mut a_priori = rounding_floor(bits, steps, v.abs_f64());
        if parts.len() == 1 {
            let s = parts[0];
            let m = (p.order + 1).saturating_sub(s) / 2;
            let x = p.truncation as f64 + re_z;
            a_priori += if m == 0 {
                f64::INFINITY
            } else {
                em_remainder_bound(s, m, x)
            };
        }
        (v, a_priori)
    })?;
    let bound_kind = if parts.len() == 1 {
        BoundKind::Certified
    } else if parts.len() > VALIDATED_DEPTH || c.weight() > VALIDATED_WEIGHT {
        BoundKind::HeuristicUnvalidated
    } else {
        BoundKind::Heuristic
    };
    Ok(EvalResult {
        value,
        error_bound,
        params: EvalParams {
            truncation: plan.truncation,
            em_order: plan.order,
            precision: req.precision,
            bits,
            bound_kind,
        },
    })
}

/// `He^c(z)` at default tolerance and precision.
pub fn eval_at(c: &Composition, z: &Complex) -> Result<EvalResult, EvalError> {
    eval_hmzf(&EvalRequest::new(c.clone(), z.clone()))
}

/// Multizeta value `He^c(0)`.
pub fn eval_mzv(c: &Composition, tolerance: f64) -> Result<EvalResult, EvalError> {
    eval_hmzf(&EvalRequest::new(c.clone(), point(0.0, 0.0)).with_tolerance(tolerance))
}

/// Smallest `m ≥ 1` with `bound(m) ≤ target`, together with the bound;
/// `None` once the bound stops decreasing.
fn smallest_order(target: f64, bound: impl Fn(u32) -> f64) -> Option<(u32, f64)> {
    let mut last = f64::INFINITY;
    for m in 1..=2000 {
        let b = bound(m);
        if b <= target {
            return Some((m, b));
        }
        if b >= last {
            return None;
        }
        last = b;
    }
    None
}

/// `ζ(s, a) = Σ_{n≥0} (n+a)^{-s}` by direct summation and an
/// Euler–Maclaurin tail, with a certified remainder bound.
pub fn hurwitz_zeta(s: u32, a: &Complex, precision: u32) -> Result<EvalResult, EvalError> {
    if s < 2 {
        return Err(EvalError::BadExponent(s));
    }
    check_numerics(min_tolerance(precision), precision)?;
    check_pole(a, true)?;
    let bits = working_bits(precision);
    let a = a.with_prec(bits);
    let target = 10f64.powi(-(precision as i32) - 2);
    let re_a = a.re.to_f64();
    let mut n = initial_truncation(precision, &a);
    let (m, remainder) = loop {
        let x = n as f64 + re_a;
        if let Some(found) = smallest_order(target, |m| em_remainder_bound(s, m, x)) {
            break found;
        }
        n *= 2;
    };
    let mut sum = Complex::zero(bits);
    for k in (0..n).rev() {
        let term = a.add_real(&Real::from_u64(k, bits)).inv().powu(s);
        sum = &sum + &term;
    }
    let b = a.add_real(&Real::from_u64(n, bits));
    let binv = b.inv();
    let bs = binv.powu(s);
    sum = &sum + &(&b * &bs).scale(&(Real::one(bits) / Real::from_u64(u64::from(s - 1), bits)));
    sum = &sum + &bs.scale(&Real::from_f64(0.5, bits));
    let binv2 = &binv * &binv;
    let mut power = &bs * &binv;
    for k in 1..=m {
        let q =
            bernoulli(2 * k as usize) * BigRational::new(rising(s, 2 * k - 1), factorial(2 * k));
        sum = &sum + &power.scale(&Real::from_rational(&q, bits));
        power = &power * &binv2;
    }
    let error_bound = remainder + rounding_floor(bits, n + u64::from(m), sum.abs_f64());
    Ok(EvalResult {
        value: sum,
        error_bound,
        params: EvalParams {
            truncation: n,
            em_order: m,
            precision,
            bits,
            bound_kind: BoundKind::Certified,
        },
    })
}

/// Regularized `He¹(z) = Σ_{n>0} (1/(n+z) − 1/n)`, certified.
///
/// The tail beyond `N` equals `ψ(N+1) − ψ(N+1+z)`, computed from the
/// logarithm and Bernoulli expansions of the digamma function.
pub fn eval_h1(z: &Complex, precision: u32) -> Result<EvalResult, EvalError> {
    check_numerics(min_tolerance(precision), precision)?;
    check_pole(z, false)?;
    let bits = working_bits(precision);
    if z.is_zero() {
        return Ok(EvalResult::exact(Complex::zero(bits), precision));
    }
    let z = z.with_prec(bits);
    let target = 10f64.powi(-(precision as i32) - 2);
    let z_abs = z.abs_f64();
    let re_z = z.re.to_f64();
    let mut n = initial_truncation(precision, &z);
    let (m, remainder) = loop {
        let b = (n + 1) as f64;
        let re_c = b + re_z;
        let bound = |m: u32| {
            let ln_b = ln_bernoulli_over_factorial(m) + ln_factorial(2 * m - 1);
            ln_b.exp() * (re_c.powi(-2 * m as i32) + b.powi(-2 * m as i32))
        };
        if let Some(found) = smallest_order(target, bound) {
            break found;
        }
        n *= 2;
    };
    let b_f = (n + 1) as f64;
    let q = z_abs / (2.0 * b_f - z_abs);
    let mut atanh_terms = 1u32;
    let atanh_tail =
        |l: u32| 2.0 * q.powi(2 * l as i32 + 1) / (f64::from(2 * l + 1) * (1.0 - q * q));
    while atanh_tail(atanh_terms) > target {
        atanh_terms += 1;
    }

    let mut sum = Complex::zero(bits);
    for k in (1..=n).rev() {
        let kr = Real::from_u64(k, bits);
        let denom = z.add_real(&kr).scale(&kr);
        sum = &sum - &(&z / &denom);
    }
    let b = Real::from_u64(n + 1, bits);
    let c = z.add_real(&b);
    // −ln(1 + z/b) = −2·atanh(v), v = z/(2b + z)
    let v = &z / &z.add_real(&b.mul_u64(2));
    let v2 = &v * &v;
    let mut vp = v.clone();
    let mut atanh = Complex::zero(bits);
    for l in 0..atanh_terms {
        let t = vp.scale(&(Real::one(bits) / Real::from_u64(u64::from(2 * l + 1), bits)));
        atanh = &atanh + &t;
        vp = &vp * &v2;
    }
    sum = &sum - &atanh.scale(&Real::from_i64(2, bits));
    let half = Real::from_f64(0.5, bits);
    let binv = Real::one(bits) / &b;
    let cinv = c.inv();
    sum = &sum + &(&cinv - &Complex::from_real(binv.clone())).scale(&half);
    let binv2 = &binv * &binv;
    let cinv2 = &cinv * &cinv;
    let mut bp = binv2.clone();
    let mut cp = cinv2.clone();
    for k in 1..=m {
        let q = bernoulli(2 * k as usize) / BigRational::from_integer(BigInt::from(2 * k));
        let diff = Complex::from_real(bp.clone()) - &cp;
        sum = &sum - &diff.scale(&Real::from_rational(&q, bits));
        bp = &bp * &binv2;
        cp = &cp * &cinv2;
    }
    let error_bound = remainder
        + atanh_tail(atanh_terms)
        + rounding_floor(bits, n + u64::from(m + atanh_terms), sum.abs_f64());
    Ok(EvalResult {
        value: sum,
        error_bound,
        params: EvalParams {
            truncation: n,
            em_order: m,
            precision,
            bits,
            bound_kind: BoundKind::Certified,
        },
    })
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

/// Accumulates `Σ coeff · Π value^exponent` with first-order-free error
/// propagation.
struct Combiner {
    bits: u32,
    values: BTreeMap<Composition, EvalResult>,
    tolerance: f64,
    precision: u32,
    z: Complex,
}

impl Combiner {
    fn new(z: &Complex, tolerance: f64, precision: u32) -> Result<Self, EvalError> {
        check_numerics(tolerance, precision)?;
        check_pole(z, false)?;
        Ok(Combiner {
            bits: working_bits(precision),
            values: BTreeMap::new(),
            tolerance,
            precision,
            z: z.clone(),
        })
    }

    fn value(&mut self, c: &Composition, tolerance: f64) -> Result<EvalResult, EvalError> {
        if let Some(v) = self.values.get(c) {
            return Ok(v.clone());
        }
        let req = EvalRequest::new(c.clone(), self.z.clone())
            .with_tolerance(tolerance)
            .with_precision(self.precision);
        let v = eval_hmzf(&req)?;
        self.values.insert(c.clone(), v.clone());
        Ok(v)
    }

    fn inner_tolerance(&self, total_weight: f64) -> f64 {
        (self.tolerance / (4.0 * total_weight.max(1.0))).max(min_tolerance(self.precision))
    }

    /// Product of `values^exponents` and its propagated error.
    fn monomial(
        &mut self,
        factors: &BTreeMap<Composition, u32>,
        tolerance: f64,
    ) -> Result<(Complex, f64), EvalError> {
        let mut value = Complex::one(self.bits);
        let mut factors_err = Vec::with_capacity(factors.len());
        for (c, &k) in factors {
            let v = self.value(c, tolerance)?;
            value = &value * &v.value.powu(k);
            factors_err.push((v.value.abs_f64(), v.error_bound, k));
        }
        Ok((value, product_error(&factors_err)))
    }

    fn finish(self, value: Complex, error: f64, steps: u64) -> EvalResult {
        let bound_kind = self
            .values
            .values()
            .map(|v| v.params.bound_kind)
            .max()
            .unwrap_or(BoundKind::Exact);
        let truncation = self
            .values
            .values()
            .map(|v| v.params.truncation)
            .max()
            .unwrap_or(0);
        let em_order = self
            .values
            .values()
            .map(|v| v.params.em_order)
            .max()
            .unwrap_or(0);
        let floor = if bound_kind == BoundKind::Exact {
            0.0
        } else {
            rounding_floor(self.bits, steps, value.abs_f64())
        };
        EvalResult {
            value,
            error_bound: error + floor,
            params: EvalParams {
                truncation,
                em_order,
                precision: self.precision,
                bits: self.bits,
                bound_kind,
            },
        }
    }
}

/// `Π(|v|+e)^k − Π|v|^k` for factors `(|v|, e, k)`, without the
/// cancellation of forming both products.
pub fn product_error(factors: &[(f64, f64, u32)]) -> f64 {
    if factors.iter().any(|&(m, _, _)| m == 0.0) {
        let upper: f64 = factors
            .iter()
            .map(|&(m, e, k)| (m + e).powi(k as i32))
            .product();
        let exact: f64 = factors.iter().map(|&(m, _, k)| m.powi(k as i32)).product();
        return upper - exact;
    }
    let exact: f64 = factors.iter().map(|&(m, _, k)| m.powi(k as i32)).product();
    let log_growth: f64 = factors
        .iter()
        .map(|&(m, e, k)| f64::from(k) * (e / m).ln_1p())
        .sum();
    exact * log_growth.exp_m1()
}

fn abs_f64(q: &BigRational) -> f64 {
    Real::from_rational(&q.abs(), 64).to_f64()
}

/// Substitutes `He^g(z)` for every generator `g` of `p`.
pub fn eval_polynomial(
    p: &GeneratorPolynomial,
    z: &Complex,
    tolerance: f64,
    precision: u32,
) -> Result<EvalResult, EvalError> {
    let mut comb = Combiner::new(z, tolerance, precision)?;
    let total: f64 = p
        .terms()
        .map(|(m, q)| abs_f64(q) * f64::from(m.degree().max(1)))
        .sum();
    let inner = comb.inner_tolerance(total);
    let bits = comb.bits;
    let mut value = Complex::zero(bits);
    let mut error = 0.0;
    for (m, q) in p.terms() {
        for g in m.exponents().keys() {
            if !g.is_convergent() {
                return Err(EvalError::Divergent(g.clone()));
            }
        }
        let (v, e) = comb.monomial(m.exponents(), inner)?;
        value = &value + &v.scale(&Real::from_rational(q, bits));
        error += abs_f64(q) * e;
    }
    Ok(comb.finish(value, error, p.len() as u64))
}

/// `Σ coeff · He^c(z)` over the terms of a formal sum.
pub fn eval_formal_sum(
    sum: &FormalSum,
    z: &Complex,
    tolerance: f64,
    precision: u32,
) -> Result<EvalResult, EvalError> {
    let mut comb = Combiner::new(z, tolerance, precision)?;
    let total: f64 = sum.iter().map(|(_, q)| abs_f64(q)).sum();
    let inner = comb.inner_tolerance(total);
    let bits = comb.bits;
    let mut value = Complex::zero(bits);
    let mut error = 0.0;
    for (c, q) in sum.iter() {
        let v = comb.value(c, inner)?;
        value = &value + &v.value.scale(&Real::from_rational(q, bits));
        error += abs_f64(q) * v.error_bound;
    }
    Ok(comb.finish(value, error, sum.len() as u64))
}
