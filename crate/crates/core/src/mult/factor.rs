//! Factoring monic integer polynomials whose roots lie in a known interval.
//!
//! Distinct-degree patterns modulo several small primes restrict the
//! possible factor degrees; factors up to a degree cap are then found by
//! Hensel lifting one modular factorization and recombining subsets.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ff::intpoly::IntPoly;
use crate::ff::nt::{inv_mod, is_prime};

/// Polynomial over `F_q`, lowest degree first, no trailing zeros.
type Zq = Vec<u64>;

fn trim(mut a: Zq) -> Zq {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn deg(a: &[u64]) -> usize {
    a.len().saturating_sub(1)
}

fn zq_sub(a: &[u64], b: &[u64], q: u64) -> Zq {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + q - y) % q
        })
        .collect();
    trim(out)
}

fn zq_mul(a: &[u64], b: &[u64], q: u64) -> Zq {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % q;
        }
    }
    trim(out)
}

fn zq_divrem(a: &[u64], b: &[u64], q: u64) -> (Zq, Zq) {
    assert!(!b.is_empty(), "division by zero polynomial");
    let db = deg(b);
    let inv = inv_mod(b[db], q).expect("leading coefficient is a unit");
    let mut r = a.to_vec();
    if r.len() < b.len() {
        return (Vec::new(), trim(r));
    }
    let mut quo = vec![0u64; r.len() - db];
    for i in (db..r.len()).rev() {
        let c = r[i] * inv % q;
        if c == 0 {
            continue;
        }
        quo[i - db] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[i - db + j] = (r[i - db + j] + q - c * bj % q) % q;
        }
    }
    r.truncate(db);
    (trim(quo), trim(r))
}

fn zq_rem(a: &[u64], b: &[u64], q: u64) -> Zq {
    zq_divrem(a, b, q).1
}

fn zq_monic(a: &[u64], q: u64) -> Zq {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => {
            let inv = inv_mod(lc, q).expect("nonzero leading coefficient");
            a.iter().map(|&c| c * inv % q).collect()
        }
    }
}

fn zq_gcd(a: &[u64], b: &[u64], q: u64) -> Zq {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = zq_rem(&a, &b, q);
        a = b;
        b = r;
    }
    zq_monic(&a, q)
}

/// `(g, s, t)` with `s a + t b = g` monic.
fn zq_ext_gcd(a: &[u64], b: &[u64], q: u64) -> (Zq, Zq, Zq) {
    let (mut r0, mut r1) = (trim(a.to_vec()), trim(b.to_vec()));
    let (mut s0, mut s1) = (vec![1u64], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
    while !r1.is_empty() {
        let (quo, r) = zq_divrem(&r0, &r1, q);
        let s = zq_sub(&s0, &zq_mul(&quo, &s1, q), q);
        let t = zq_sub(&t0, &zq_mul(&quo, &t1, q), q);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        t0 = std::mem::replace(&mut t1, t);
    }
    let inv = inv_mod(*r0.last().expect("inputs not both zero"), q).unwrap();
    let scale = |v: Zq| trim(v.into_iter().map(|c| c * inv % q).collect());
    (scale(r0), scale(s0), scale(t0))
}

fn zq_derivative(a: &[u64], q: u64) -> Zq {
    trim(a.iter().enumerate().skip(1).map(|(i, &c)| (i as u64 % q) * c % q).collect())
}

fn zq_powmod(base: &[u64], exp: &BigUint, f: &[u64], q: u64) -> Zq {
    let mut result = vec![1u64];
    let base = zq_rem(base, f, q);
    for i in (0..exp.bits()).rev() {
        result = zq_rem(&zq_mul(&result, &result, q), f, q);
        if exp.bit(i) {
            result = zq_rem(&zq_mul(&result, &base, q), f, q);
        }
    }
    result
}

fn reduce(f: &IntPoly, q: u64) -> Zq {
    trim(f.reduce_mod(q))
}

fn is_squarefree_mod(f: &[u64], q: u64) -> bool {
    deg(&zq_gcd(f, &zq_derivative(f, q), q)) == 0
}

/// Pairs `(d, g)` where `g` is the product of the degree-`d` irreducible
/// factors of the monic square-free `f`.
fn distinct_degree(f: &[u64], q: u64) -> Vec<(usize, Zq)> {
    let n = deg(f);
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    if n == 1 {
        out.push((1, f.to_vec()));
        return out;
    }
    let x = vec![0u64, 1];
    // rows[j] = x^{qj} mod f, so that g(x)^q = sum_j g_j rows[j]
    let xq = zq_powmod(&x, &BigUint::from(q), f, q);
    let mut rows: Vec<Zq> = Vec::with_capacity(n);
    rows.push(vec![1]);
    for j in 1..n {
        rows.push(zq_rem(&zq_mul(&rows[j - 1], &xq, q), f, q));
    }
    let frob = |g: &[u64]| -> Zq {
        let mut acc = vec![0u64; n];
        for (gj, row) in g.iter().zip(&rows) {
            if *gj == 0 {
                continue;
            }
            for (k, &r) in row.iter().enumerate() {
                acc[k] = (acc[k] + gj * r) % q;
            }
        }
        trim(acc)
    };
    let mut rest = f.to_vec();
    let mut h = x.clone();
    let mut d = 0;
    while deg(&rest) >= 2 * (d + 1) {
        d += 1;
        h = frob(&h);
        let g = zq_gcd(&rest, &zq_sub(&h, &x, q), q);
        if deg(&g) > 0 {
            rest = zq_divrem(&rest, &g, q).0;
            out.push((d, g));
        }
    }
    if deg(&rest) > 0 {
        out.push((deg(&rest), zq_monic(&rest, q)));
    }
    out
}

/// Splits a product of distinct monic irreducibles of degree `d` (odd `q`).
fn equal_degree(g: &[u64], d: usize, q: u64, rng: &mut ChaCha8Rng, out: &mut Vec<Zq>) {
    if deg(g) == d {
        out.push(g.to_vec());
        return;
    }
    let exp = (BigUint::from(q).pow(d as u32) - 1u32) / 2u32;
    loop {
        let a: Zq = trim((0..deg(g)).map(|_| rng.gen_range(0..q)).collect());
        if deg(&a) == 0 {
            continue;
        }
        let b = zq_sub(&zq_powmod(&a, &exp, g, q), &[1], q);
        let h = zq_gcd(g, &b, q);
        if deg(&h) > 0 && deg(&h) < deg(g) {
            let other = zq_monic(&zq_divrem(g, &h, q).0, q);
            equal_degree(&h, d, q, rng, out);
            equal_degree(&other, d, q, rng, out);
            return;
        }
    }
}

fn pattern(ddf: &[(usize, Zq)]) -> Vec<usize> {
    let mut degs: Vec<usize> = ddf.iter().flat_map(|(d, g)| std::iter::repeat_n(*d, deg(g) / d)).collect();
    degs.sort_unstable();
    degs
}

/// Degrees reachable as sums of sub-multisets of `pattern`.
fn subset_sums(pattern: &[usize], n: usize) -> Vec<bool> {
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for &d in pattern {
        for s in (d..=n).rev() {
            if reach[s - d] {
                reach[s] = true;
            }
        }
    }
    reach
}

// Polynomials over Z/M, coefficients in [0, M).

type Zm = Vec<BigInt>;

fn zm_trim(mut a: Zm) -> Zm {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn zm_reduce(a: &[BigInt], m: &BigInt) -> Zm {
    zm_trim(a.iter().map(|c| c.mod_floor(m)).collect())
}

fn zm_from(a: &[u64]) -> Zm {
    a.iter().map(|&c| BigInt::from(c)).collect()
}

fn zm_add(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Zm {
    let n = a.len().max(b.len());
    let zero = BigInt::zero();
    let out: Zm = (0..n).map(|i| a.get(i).unwrap_or(&zero) + b.get(i).unwrap_or(&zero)).collect();
    zm_reduce(&out, m)
}

fn zm_sub(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Zm {
    let n = a.len().max(b.len());
    let zero = BigInt::zero();
    let out: Zm = (0..n).map(|i| a.get(i).unwrap_or(&zero) - b.get(i).unwrap_or(&zero)).collect();
    zm_reduce(&out, m)
}

fn zm_mul(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Zm {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    zm_reduce(&out, m)
}

/// Division by a monic polynomial modulo `m`.
fn zm_divrem_monic(a: &[BigInt], b: &[BigInt], m: &BigInt) -> (Zm, Zm) {
    let db = b.len() - 1;
    let mut r = a.to_vec();
    if r.len() <= db {
        return (Vec::new(), zm_trim(r));
    }
    let mut quo = vec![BigInt::zero(); r.len() - db];
    for i in (db..r.len()).rev() {
        let c = r[i].mod_floor(m);
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            r[i - db + j] -= &c * bj;
        }
        quo[i - db] = c;
    }
    r.truncate(db);
    (zm_reduce(&quo, m), zm_reduce(&r, m))
}

/// One quadratic Hensel step: from `f = g h (mod m)`, `s g + t h = 1 (mod m)`
/// to the same relations modulo `m^2`, with `g`, `h` monic.
fn hensel_step(f: &[BigInt], g: &Zm, h: &Zm, s: &Zm, t: &Zm, m: &BigInt) -> (Zm, Zm, Zm, Zm) {
    let m2 = m * m;
    let e = zm_sub(&zm_reduce(f, &m2), &zm_mul(g, h, &m2), &m2);
    let (qq, r) = zm_divrem_monic(&zm_mul(s, &e, &m2), h, &m2);
    let g1 = zm_add(&zm_add(g, &zm_mul(t, &e, &m2), &m2), &zm_mul(&qq, g, &m2), &m2);
    let h1 = zm_add(h, &r, &m2);
    let b = zm_sub(&zm_add(&zm_mul(s, &g1, &m2), &zm_mul(t, &h1, &m2), &m2), &[BigInt::one()], &m2);
    let (c, d) = zm_divrem_monic(&zm_mul(s, &b, &m2), &h1, &m2);
    let s1 = zm_sub(s, &d, &m2);
    let t1 = zm_sub(&zm_sub(t, &zm_mul(t, &b, &m2), &m2), &zm_mul(&c, &g1, &m2), &m2);
    (g1, h1, s1, t1)
}

fn zq_product(factors: &[Zq], q: u64) -> Zq {
    factors.iter().fold(vec![1u64], |acc, f| zq_mul(&acc, f, q))
}

/// Lifts the monic factorization `f = prod factors (mod q)` to modulus
/// `q^(2^steps)`.
fn hensel_lift(f: &[BigInt], factors: &[Zq], q: u64, steps: u32) -> Vec<Zm> {
    let mut modulus = BigInt::from(q);
    for _ in 0..steps {
        modulus = &modulus * &modulus;
    }
    if factors.len() == 1 {
        return vec![zm_reduce(f, &modulus)];
    }
    let k = factors.len() / 2;
    let g0 = zq_product(&factors[..k], q);
    let h0 = zq_product(&factors[k..], q);
    let (one, s0, t0) = zq_ext_gcd(&g0, &h0, q);
    debug_assert_eq!(one, vec![1]);
    let (mut g, mut h, mut s, mut t) = (zm_from(&g0), zm_from(&h0), zm_from(&s0), zm_from(&t0));
    let mut m = BigInt::from(q);
    for _ in 0..steps {
        (g, h, s, t) = hensel_step(f, &g, &h, &s, &t, &m);
        m = &m * &m;
    }
    let mut out = hensel_lift(&g, &factors[..k], q, steps);
    out.extend(hensel_lift(&h, &factors[k..], q, steps));
    out
}

fn symmetric(a: &[BigInt], m: &BigInt) -> IntPoly {
    let half = m >> 1;
    IntPoly::new(a.iter().map(|c| if c > &half { c - m } else { c.clone() }).collect())
}

/// Result of [`factor_squarefree`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntFactorization {
    /// Monic factors whose product is the input.
    pub factors: Vec<IntPoly>,
    /// Whether each factor is proven irreducible.
    pub irreducible: Vec<bool>,
    /// Distinct-degree patterns of the input modulo the auxiliary primes.
    pub patterns: Vec<(u64, Vec<usize>)>,
    /// Number of subset products tested during recombination.
    pub trials: usize,
}

impl IntFactorization {
    pub fn conclusive(&self) -> bool {
        self.irreducible.iter().all(|&b| b)
    }
}

/// Tuning for [`factor_squarefree`].
#[derive(Clone, Copy, Debug)]
pub struct FactorConfig {
    /// Every real root of the input has absolute value at most this.
    pub root_bound: u64,
    /// Factors up to this degree are reconstructed exactly.
    pub max_factor_degree: usize,
    pub aux_primes: usize,
    pub trial_cap: usize,
    pub seed: u64,
}

impl FactorConfig {
    pub fn new(root_bound: u64) -> Self {
        FactorConfig { root_bound, max_factor_degree: 64, aux_primes: 7, trial_cap: 2_000_000, seed: 0 }
    }
}

const PRIME_SCAN: usize = 60;

/// Auxiliary primes modulo which `f` stays square-free.
fn good_primes(f: &IntPoly, want: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 11u64;
    let mut scanned = 0;
    while out.len() < want && scanned < PRIME_SCAN {
        if is_prime(q) {
            scanned += 1;
            if is_squarefree_mod(&reduce(f, q), q) {
                out.push(q);
            }
        }
        q += 2;
    }
    out
}

/// True when `f` is square-free modulo some auxiliary prime, which certifies
/// that it is square-free over Q.
pub fn certify_squarefree(f: &IntPoly) -> bool {
    f.degree().unwrap_or(0) == 0 || !good_primes(f, 1).is_empty()
}

/// Distinct-degree patterns of `f` modulo up to `count` auxiliary primes.
pub fn degree_patterns(f: &IntPoly, count: usize) -> Vec<(u64, Vec<usize>)> {
    good_primes(f, count).into_iter().map(|q| (q, pattern(&distinct_degree(&reduce(f, q), q)))).collect()
}

fn eval_int(f: &IntPoly, x: i64) -> BigInt {
    let x = BigInt::from(x);
    f.coeffs().iter().rev().fold(BigInt::zero(), |acc, c| acc * &x + c)
}

/// Factors a monic square-free integer polynomial. Returns `None` when no
/// auxiliary prime keeps it square-free, which happens for every prime if
/// the input has a repeated factor.
pub fn factor_squarefree(f: &IntPoly, cfg: &FactorConfig) -> Option<IntFactorization> {
    assert!(f.is_monic() || f.degree() == Some(0), "input must be monic");
    let n = f.degree().unwrap_or(0);
    if n == 0 {
        return Some(IntFactorization { factors: vec![], irreducible: vec![], patterns: vec![], trials: 0 });
    }
    let primes = good_primes(f, cfg.aux_primes);
    if primes.is_empty() {
        return None;
    }
    let patterns: Vec<(u64, Vec<usize>)> =
        primes.iter().map(|&q| (q, pattern(&distinct_degree(&reduce(f, q), q)))).collect();

    let mut factors = Vec::new();
    let mut irreducible = Vec::new();
    let mut rest = f.clone();
    let r = cfg.root_bound as i64;
    for x in -r..=r {
        while rest.degree().unwrap_or(0) > 0 && eval_int(&rest, x).is_zero() {
            rest = rest.div_exact_monic(&IntPoly::linear(x)).expect("root gives an exact factor");
            factors.push(IntPoly::linear(x));
            irreducible.push(true);
        }
    }
    let mut trials = 0;
    if rest.degree().unwrap_or(0) > 0 {
        let (found, proven, used) = factor_rest(&rest, &primes, cfg);
        trials = used;
        for (g, p) in found.into_iter().zip(proven) {
            factors.push(g);
            irreducible.push(p);
        }
    }
    Some(IntFactorization { factors, irreducible, patterns, trials })
}

/// Degrees that every modular pattern of `f` can realize.
fn allowed_degrees(f: &IntPoly, primes: &[u64]) -> (Vec<bool>, Vec<Vec<usize>>) {
    let n = f.degree().unwrap_or(0);
    let mut allowed = vec![true; n + 1];
    let mut patterns = Vec::new();
    for &q in primes {
        let pat = pattern(&distinct_degree(&reduce(f, q), q));
        for (a, r) in allowed.iter_mut().zip(subset_sums(&pat, n)) {
            *a &= r;
        }
        patterns.push(pat);
    }
    (allowed, patterns)
}

/// Factors of a polynomial without integer roots, each flagged proven
/// irreducible or not, and the number of recombination trials used.
fn factor_rest(f: &IntPoly, primes: &[u64], cfg: &FactorConfig) -> (Vec<IntPoly>, Vec<bool>, usize) {
    let n = f.degree().unwrap();
    let (allowed, patterns) = allowed_degrees(f, primes);
    if !(1..n).any(|d| allowed[d]) {
        return (vec![f.clone()], vec![true], 0);
    }
    let (best, _) = patterns.iter().enumerate().min_by_key(|(_, p)| p.len()).unwrap();
    let q = primes[best];
    let fq = reduce(f, q);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ q);
    let mut modular = Vec::new();
    for (d, g) in distinct_degree(&fq, q) {
        equal_degree(&g, d, q, &mut rng, &mut modular);
    }

    let cap = cfg.max_factor_degree.min(n / 2);
    // coefficients of a monic factor of degree <= cap are below (1 + R)^cap
    let bound = BigInt::from(1 + cfg.root_bound).pow(cap as u32);
    let target = bound * 2u32 + 1u32;
    let mut steps = 0u32;
    let mut m = BigInt::from(q);
    while m <= target {
        m = &m * &m;
        steps += 1;
    }
    let lifted = hensel_lift(f.coeffs(), &modular, q, steps);
    let degs: Vec<usize> = modular.iter().map(|g| deg(g)).collect();
    recombine(f.clone(), lifted, degs, &m, cfg, &allowed, primes)
}

struct Search<'a> {
    lifted: &'a [Zm],
    degs: &'a [usize],
    m: &'a BigInt,
    trials: usize,
    cap: usize,
}

impl Search<'_> {
    /// First subset of `live` of the given size and degree at most `limit`
    /// (and allowed) whose product divides `rest`.
    fn find(
        &mut self,
        live: &[usize],
        size: usize,
        limit: usize,
        allowed: &[bool],
        rest: &IntPoly,
    ) -> Option<(Vec<usize>, IntPoly, IntPoly)> {
        let mut chosen = Vec::with_capacity(size);
        let one = vec![BigInt::one()];
        self.walk(live, 0, size, 0, limit, allowed, rest, &one, &mut chosen)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &mut self,
        live: &[usize],
        start: usize,
        size: usize,
        degree: usize,
        limit: usize,
        allowed: &[bool],
        rest: &IntPoly,
        partial: &Zm,
        chosen: &mut Vec<usize>,
    ) -> Option<(Vec<usize>, IntPoly, IntPoly)> {
        if chosen.len() == size {
            if degree == 0 || !allowed[degree] || self.trials >= self.cap {
                return None;
            }
            self.trials += 1;
            let cand = symmetric(partial, self.m);
            let c0 = &cand.coeffs()[0];
            let r0 = &rest.coeffs()[0];
            if c0.is_zero() || !r0.mod_floor(&c0.abs()).is_zero() {
                return None;
            }
            return rest.div_exact_monic(&cand).map(|quo| (chosen.clone(), cand, quo));
        }
        for k in start..live.len() {
            let idx = live[k];
            let d = degree + self.degs[idx];
            if d > limit {
                continue;
            }
            if live.len() - k < size - chosen.len() {
                break;
            }
            chosen.push(idx);
            let prod = zm_mul(partial, &self.lifted[idx], self.m);
            let hit = self.walk(live, k + 1, size, d, limit, allowed, rest, &prod, chosen);
            chosen.pop();
            if hit.is_some() {
                return hit;
            }
            if self.trials >= self.cap {
                return None;
            }
        }
        None
    }
}

fn recombine(
    f: IntPoly,
    lifted: Vec<Zm>,
    degs: Vec<usize>,
    m: &BigInt,
    cfg: &FactorConfig,
    allowed_f: &[bool],
    primes: &[u64],
) -> (Vec<IntPoly>, Vec<bool>, usize) {
    let mut search = Search { lifted: &lifted, degs: &degs, m, trials: 0, cap: cfg.trial_cap };
    let mut live: Vec<usize> = (0..lifted.len()).collect();
    let mut rest = f;
    let mut found = Vec::new();
    let mut allowed = allowed_f.to_vec();
    let mut size = 1;
    loop {
        let n = rest.degree().unwrap_or(0);
        let limit = cfg.max_factor_degree.min(n / 2);
        let smallest: usize = {
            let mut d: Vec<usize> = live.iter().map(|&i| degs[i]).collect();
            d.sort_unstable();
            d.iter().take(size).sum()
        };
        if size > live.len() || smallest > limit {
            break;
        }
        match search.find(&live, size, limit, &allowed, &rest) {
            Some((used, g, quo)) => {
                live.retain(|i| !used.contains(i));
                found.push(g);
                rest = quo;
                allowed = if rest.degree().unwrap_or(0) > 0 { allowed_degrees(&rest, primes).0 } else { vec![true] };
            }
            None if search.trials >= search.cap => {
                let mut proven = vec![true; found.len()];
                found.push(rest);
                proven.push(false);
                return (found, proven, search.trials);
            }
            None => size += 1,
        }
    }
    let mut proven = vec![true; found.len()];
    let n = rest.degree().unwrap_or(0);
    if n > 0 {
        let limit = cfg.max_factor_degree.min(n / 2);
        // no factor of degree <= limit remains; any split needs one of degree in (limit, n - limit)
        let split_possible = live.len() > 1 && (limit + 1..n.saturating_sub(limit)).any(|d| allowed[d]);
        found.push(rest);
        proven.push(!split_possible);
    }
    (found, proven, search.trials)
}

// Exact square-free decomposition over Z.

fn content(a: &IntPoly) -> BigInt {
    a.coeffs().iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn primitive(a: &IntPoly) -> IntPoly {
    let c = content(a);
    if c.is_zero() {
        return a.clone();
    }
    let sign = if a.leading().is_some_and(|l| l.is_negative()) { -c } else { c };
    IntPoly::new(a.coeffs().iter().map(|x| x / &sign).collect())
}

/// `lc(b)^(deg a - deg b + 1) a mod b`.
fn pseudo_rem(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let db = b.degree().unwrap();
    let lb = b.leading().unwrap().clone();
    let mut r: Vec<BigInt> = a.coeffs().to_vec();
    while r.len() > db && !r.is_empty() {
        let top = r.len() - 1;
        let c = r[top].clone();
        for x in r.iter_mut() {
            *x *= &lb;
        }
        for (j, bj) in b.coeffs().iter().enumerate() {
            r[top - db + j] -= &c * bj;
        }
        r.pop();
        while r.last().is_some_and(|x| x.is_zero()) {
            r.pop();
        }
    }
    IntPoly::new(r)
}

/// Greatest common divisor over Z, primitive with positive leading coefficient.
pub fn int_gcd(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let (mut a, mut b) = (primitive(a), primitive(b));
    if a.degree() < b.degree() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_zero() {
        let r = pseudo_rem(&a, &b);
        a = b;
        b = if r.is_zero() { r } else { primitive(&r) };
    }
    a
}

/// `f = prod_i g_i^i` with each `g_i` monic square-free (Yun), omitting
/// trivial parts. The input must be monic.
pub fn squarefree_decomposition(f: &IntPoly) -> Vec<(IntPoly, u32)> {
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let df = f.derivative();
    let a0 = int_gcd(f, &df);
    let mut b = f.div_exact_monic(&a0).expect("gcd divides f");
    let mut c = df.div_exact_monic(&a0).expect("gcd divides f'");
    let mut d = c.sub(&b.derivative());
    let mut i = 1;
    while b.degree().unwrap_or(0) > 0 {
        let a = int_gcd(&b, &d);
        if a.degree().unwrap_or(0) > 0 {
            out.push((a.clone(), i));
        }
        b = b.div_exact_monic(&a).expect("exact");
        c = d.div_exact_monic(&a).expect("exact");
        d = c.sub(&b.derivative());
        i += 1;
    }
    out
}
