//! Elementary number theory on machine integers: primality, factorization,
//! Legendre symbols and the arithmetic functions attached to a level `N`.

use num_integer::Integer;
use serde::Serialize;

use crate::error::{arg_err, Result};

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Sieve of Eratosthenes; primes `<= bound` in ascending order.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Prime factorization by trial division, ascending primes with exponents.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Legendre symbol `(a|p)` for an odd prime `p`.
pub fn legendre(a: i64, p: u64) -> Result<i8> {
    if p < 3 || !is_prime(p) {
        return arg_err(format!("legendre symbol needs an odd prime modulus, got {p}"));
    }
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return Ok(0);
    }
    Ok(if pow_mod(r, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

/// Number of positive divisors.
pub fn divisor_count(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Dedekind psi: `N * prod_{p | N} (1 + 1/p)`.
pub fn dedekind_psi(n: u64) -> u64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p + 1))
}

/// Dimension of weight-2 cusp forms on Gamma_0(N) for prime `N`.
pub fn cusp_dim_prime(n: u64) -> Option<u64> {
    if !is_prime(n) {
        return None;
    }
    let base = (n + 1) / 12;
    Some(if n % 12 == 1 { base - 1 } else { base })
}

/// Whether `n` (coprime to `modulus`) is a square modulo `modulus`.
pub fn is_square_mod(n: i64, modulus: u64) -> Result<bool> {
    if modulus == 0 {
        return arg_err("modulus must be positive");
    }
    if (n.rem_euclid(modulus as i64) as u64).gcd(&modulus) != 1 {
        return arg_err(format!("{n} is not coprime to {modulus}"));
    }
    for (q, e) in factorize(modulus) {
        let ok = if q == 2 {
            match e {
                1 => true,
                2 => n.rem_euclid(4) == 1,
                _ => n.rem_euclid(8) == 1,
            }
        } else {
            legendre(n, q)? == 1
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NtValues {
    pub d: u64,
    pub psi: u64,
    /// Cusp form dimension; only defined for prime level.
    pub s: Option<u64>,
    /// `delta_N(n, square)`, present when an `n` was supplied.
    pub delta_square: Option<u8>,
}

pub fn nt_values(level: u64, n: Option<i64>) -> Result<NtValues> {
    if level == 0 {
        return arg_err("level must be positive");
    }
    let delta_square = match n {
        Some(n) => Some(is_square_mod(n, level)? as u8),
        None => None,
    };
    Ok(NtValues { d: divisor_count(level), psi: dedekind_psi(level), s: cusp_dim_prime(level), delta_square })
}

/// Primes `p = 1 (mod 12)` in `[13, bound]`.
pub fn level_ladder(bound: u64) -> Vec<u64> {
    primes_up_to(bound).into_iter().filter(|&p| p >= 13 && p % 12 == 1).collect()
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..).take_while(|d| d * d <= n).filter(|d| n.is_multiple_of(*d)).collect();
    let mut hi: Vec<u64> = out.iter().rev().map(|d| n / d).filter(|&d| d * d != n).collect();
    out.append(&mut hi);
    out
}

pub fn integer_sqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squares_mod(p: u64) -> Vec<u64> {
        let mut s: Vec<u64> = (1..p).map(|x| x * x % p).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(squares_mod(13), vec![1, 3, 4, 9, 10, 12]);
        assert_eq!(legendre(1, 7).unwrap(), 1);
        assert_eq!(legendre(3, 13).unwrap(), 1);
        assert_eq!(legendre(2, 13).unwrap(), -1);
        assert_eq!(legendre(26, 13).unwrap(), 0);
        assert!(legendre(3, 2).is_err());
        assert!(legendre(3, 15).is_err());
    }

    #[test]
    fn legendre_matches_enumeration() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
            let sq = squares_mod(p);
            for a in 1..p {
                let expect = if sq.contains(&a) { 1 } else { -1 };
                assert_eq!(legendre(a as i64, p).unwrap(), expect);
            }
        }
    }

    #[test]
    fn nt_values_examples() {
        let v = nt_values(12, None).unwrap();
        assert_eq!((v.d, v.psi), (6, 24));
        let v = nt_values(13, Some(3)).unwrap();
        assert_eq!(v.s, Some(0));
        assert_eq!(v.delta_square, Some(1));
        let v = nt_values(37, None).unwrap();
        assert_eq!((v.s, v.psi), (Some(2), 38));
        assert!(nt_values(12, Some(9)).is_err());
    }

    #[test]
    fn square_mod_composite_matches_brute_force() {
        for m in [8u64, 12, 15, 16, 21, 45] {
            for n in 1..m as i64 {
                if (n as u64).gcd(&m) != 1 {
                    continue;
                }
                let brute = (0..m).any(|x| (x * x) % m == n as u64);
                assert_eq!(is_square_mod(n, m).unwrap(), brute, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn primality_and_ladder() {
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(3_215_031_751));
        assert_eq!(level_ladder(100), vec![13, 37, 61, 73, 97]);
        assert_eq!(divisors(36), vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
    }
}
