//! Smooth-number counts, exponent-lattice counts and the saddle-point
//! approximation for the number of `y`-smooth integers up to `X`.

use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{arg_err, Error, Result};
use crate::ff::nt::{is_prime, primes_up_to};
use crate::output::fmt_f64;

/// Parses `12345`, `10^12` or `1e12` as an exact non-negative integer.
pub fn parse_big(s: &str) -> Result<BigUint> {
    let s = s.trim();
    let bad = || Error::Argument(format!("cannot parse {s:?} as a non-negative integer"));
    if let Some((b, e)) = s.split_once('^') {
        let b = BigUint::from_str(b).map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return Ok(b.pow(e));
    }
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m = BigUint::from_str(m).map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return Ok(m * BigUint::from(10u32).pow(e));
    }
    BigUint::from_str(s).map_err(|_| bad())
}

/// `ln X` for arbitrary-precision `X >= 1`.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift as usize).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Number of `y`-smooth integers in `[1, X]`.
///
/// Recurses on the largest prime: smooth numbers divisible by exactly
/// `q^k` are `q^k` times `(q-1)`-smooth numbers up to `X / q^k`.
pub fn psi_exact(y: u64, x: &BigUint) -> Result<BigUint> {
    if y < 2 {
        return arg_err(format!("smoothness bound must be at least 2, got {y}"));
    }
    if x.is_zero() {
        return arg_err("X must be at least 1");
    }
    let primes = primes_up_to(y);
    if let Some(small) = x.to_u128() {
        return Ok(BigUint::from(psi_u128(&primes, small)));
    }
    Ok(psi_big(&primes, x))
}

fn psi_u128(primes: &[u64], x: u128) -> u128 {
    match primes.split_last() {
        None => (x >= 1) as u128,
        Some((_, [])) => {
            // powers of two up to x
            if x == 0 {
                0
            } else {
                128 - x.leading_zeros() as u128
            }
        }
        Some((&q, rest)) => {
            let mut total = 0;
            let mut bound = x;
            while bound > 0 {
                total += psi_u128(rest, bound);
                bound /= q as u128;
            }
            total
        }
    }
}

fn psi_big(primes: &[u64], x: &BigUint) -> BigUint {
    if let Some(small) = x.to_u128() {
        return BigUint::from(psi_u128(primes, small));
    }
    match primes.split_last() {
        None => BigUint::one(),
        Some((&q, rest)) => {
            let mut total = BigUint::zero();
            let mut bound = x.clone();
            let qb = BigUint::from(q);
            while !bound.is_zero() {
                total += psi_big(rest, &bound);
                bound /= &qb;
            }
            total
        }
    }
}

/// Number of exponent vectors with `q_1^a_1 ... q_r^a_r <= X`, by extending
/// partial products coordinate by coordinate.
pub fn phi_count(qs: &[u64], x: &BigUint) -> Result<BigUint> {
    for (i, &q) in qs.iter().enumerate() {
        if !is_prime(q) || qs[..i].contains(&q) {
            return arg_err(format!("expected distinct primes, got {qs:?}"));
        }
    }
    if x.is_zero() {
        return arg_err("X must be at least 1");
    }
    fn rec(qs: &[u64], prod: &BigUint, x: &BigUint) -> BigUint {
        let Some((&q, rest)) = qs.split_first() else {
            return BigUint::one();
        };
        let mut total = BigUint::zero();
        let mut cur = prod.clone();
        while &cur <= x {
            total += rec(rest, &cur, x);
            cur *= q;
        }
        total
    }
    Ok(rec(qs, &BigUint::one(), x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMode {
    Asymptotic,
    Saddle,
}

impl FromStr for AlphaMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(AlphaMode::Asymptotic),
            "saddle" => Ok(AlphaMode::Saddle),
            _ => arg_err(format!("unknown mode {s:?}; use asymptotic or saddle")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HtApprox {
    pub alpha: f64,
    pub zeta_alpha_y: f64,
    /// `X^alpha zeta(alpha, y) sqrt(log y / (2 pi y))`; may overflow to infinity.
    pub psi_estimate: f64,
    pub log_psi: f64,
    /// `(y / log y) log(log X / y)`.
    pub log_simplified: f64,
    pub regime_warning: Option<String>,
}

pub fn saddle_lhs(alpha: f64, primes: &[u64]) -> f64 {
    primes
        .iter()
        .map(|&q| {
            let lq = (q as f64).ln();
            lq / (alpha * lq).exp_m1()
        })
        .sum()
}

/// Solves `sum_{q <= y} log q / (q^alpha - 1) = log X` by bisection.
pub fn saddle_alpha(log_x: f64, y: u64) -> Result<f64> {
    let primes = primes_up_to(y);
    if primes.is_empty() || log_x <= 0.0 {
        return arg_err("saddle point needs y >= 2 and X > 1");
    }
    let (mut lo, mut hi) = (1e-300f64, 1.0f64);
    while saddle_lhs(hi, &primes) > log_x {
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if saddle_lhs(mid, &primes) > log_x {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn ht_approx(log_x: f64, y: u64, mode: AlphaMode) -> Result<HtApprox> {
    if y < 5 {
        return arg_err(format!("approximation needs y >= 5, got {y}"));
    }
    if log_x <= 0.0 {
        return arg_err("X must exceed 1");
    }
    let ly = (y as f64).ln();
    let regime_warning =
        (y as f64 > log_x).then(|| format!("y = {y} exceeds log X = {log_x:.3}; outside the y = o(log X) regime"));
    let alpha = match mode {
        AlphaMode::Asymptotic => y as f64 / (log_x * ly),
        AlphaMode::Saddle => saddle_alpha(log_x, y)?,
    };
    let log_zeta: f64 = primes_up_to(y).iter().map(|&q| -(-(-alpha * (q as f64).ln()).exp()).ln_1p()).sum();
    let log_psi = alpha * log_x + log_zeta + 0.5 * (ly / (2.0 * std::f64::consts::PI * y as f64)).ln();
    Ok(HtApprox {
        alpha,
        zeta_alpha_y: log_zeta.exp(),
        psi_estimate: log_psi.exp(),
        log_psi,
        log_simplified: y as f64 / ly * (log_x / y as f64).ln(),
        regime_warning,
    })
}

/// The first `r` primes not dividing `n`.
pub fn coprime_primes(n: &BigUint, r: usize) -> Result<Vec<u64>> {
    if r == 0 {
        return arg_err("r must be at least 1");
    }
    let mut out = Vec::with_capacity(r);
    let mut q = 2u64;
    while out.len() < r {
        if is_prime(q) && !(n % q).is_zero() {
            out.push(q);
        }
        q += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperSmooth {
    pub flag: bool,
    pub pi_yt_n: u64,
    pub pi_y: u64,
    pub cutoff: f64,
}

/// `pi(y^T; N) / pi(y) < cutoff`, counting primes up to `y^T` coprime to `N`.
pub fn is_supersmooth(n: &BigUint, y: u64, t: u32, cutoff: f64) -> Result<SuperSmooth> {
    if y < 2 || t < 1 {
        return arg_err("need y >= 2 and T >= 1");
    }
    let bound = y
        .checked_pow(t)
        .filter(|&b| b <= 1 << 32)
        .ok_or_else(|| Error::Resource(format!("y^T = {y}^{t} too large to sieve")))?;
    let pi_yt_n = primes_up_to(bound).iter().filter(|&&q| !(n % q).is_zero()).count() as u64;
    let pi_y = primes_up_to(y).len() as u64;
    Ok(SuperSmooth { flag: (pi_yt_n as f64) / (pi_y as f64) < cutoff, pi_yt_n, pi_y, cutoff })
}

/// `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothRow {
    pub x: BigUint,
    pub y: u64,
    pub psi_exact: BigUint,
    pub alpha_asym: f64,
    pub alpha_saddle: f64,
    /// Log of the saddle-mode estimate.
    pub log_psi_ht: f64,
    /// `log(estimate) / log(exact)`.
    pub log_ratio: f64,
}

pub fn smooth_row(x: &BigUint, y: u64) -> Result<SmoothRow> {
    let exact = psi_exact(y, x)?;
    let log_x = ln_big(x);
    let asym = ht_approx(log_x, y, AlphaMode::Asymptotic)?;
    let saddle = ht_approx(log_x, y, AlphaMode::Saddle)?;
    Ok(SmoothRow {
        x: x.clone(),
        y,
        log_ratio: saddle.log_psi / ln_big(&exact),
        psi_exact: exact,
        alpha_asym: asym.alpha,
        alpha_saddle: saddle.alpha,
        log_psi_ht: saddle.log_psi,
    })
}

pub fn smooth_csv(rows: &[SmoothRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["X", "y", "psi_exact", "alpha_asym", "alpha_saddle", "psi_ht", "log_ratio"])?;
    for r in rows {
        w.write_record([
            r.x.to_string(),
            r.y.to_string(),
            r.psi_exact.to_string(),
            fmt_f64(r.alpha_asym),
            fmt_f64(r.alpha_saddle),
            fmt_f64(r.log_psi_ht.exp()),
            fmt_f64(r.log_ratio),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Whether every prime factor of `m` is at most `y`.
pub fn is_smooth(mut m: u64, y: u64) -> bool {
    if m == 0 {
        return false;
    }
    for q in 2..=y {
        while m.is_multiple_of(q) {
            m /= q;
        }
    }
    m == 1
}
