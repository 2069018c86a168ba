//! Exact characteristic polynomials of integer matrices from modular images.
//!
//! Each image is computed by Hessenberg reduction over `F_q` for a word-sized
//! prime `q`; images are combined by the Chinese remainder theorem until the
//! modulus exceeds twice a Hadamard-type bound on the coefficients.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::intpoly::IntPoly;
use super::nt::{inv_mod, is_prime};
use crate::error::{arg_err, Error, Result};

/// Largest dimension accepted by [`charpoly_exact`].
pub const DEFAULT_DIM_CAP: usize = 2048;

/// Primes below `2^31`, descending. Products of two residues fit in `u64`.
pub fn reconstruction_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut q = (1u64 << 31) - 1;
    while out.len() < count {
        if is_prime(q) {
            out.push(q);
        }
        q -= 2;
    }
    out
}

/// Characteristic polynomial `det(xI - M)` over `F_q`, lowest degree first.
pub fn charpoly_mod(m: &[Vec<i64>], q: u64) -> Vec<u64> {
    let n = m.len();
    let mut h: Vec<Vec<u64>> =
        m.iter().map(|row| row.iter().map(|&v| v.rem_euclid(q as i64) as u64).collect()).collect();
    // Similarity reduction to upper Hessenberg form.
    for col in 0..n.saturating_sub(2) {
        let Some(piv) = (col + 1..n).find(|&r| h[r][col] != 0) else {
            continue;
        };
        if piv != col + 1 {
            h.swap(piv, col + 1);
            for row in h.iter_mut() {
                row.swap(piv, col + 1);
            }
        }
        let inv = inv_mod(h[col + 1][col], q).unwrap();
        for r in col + 2..n {
            if h[r][col] == 0 {
                continue;
            }
            let f = h[r][col] * inv % q;
            // row_r -= f * row_{col+1}
            for c in 0..n {
                let sub = f * h[col + 1][c] % q;
                h[r][c] = (h[r][c] + q - sub) % q;
            }
            // col_{col+1} += f * col_r
            for row in h.iter_mut() {
                row[col + 1] = (row[col + 1] + f * row[r] % q) % q;
            }
        }
    }
    // p_k(x) = (x - h_kk) p_{k-1} - sum_{i<k} h_ik (prod_{j=i+1..k} h_{j,j-1}) p_{i-1}
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for k in 0..n {
        let prev = &polys[k];
        let mut next = vec![0u64; k + 2];
        for (i, &c) in prev.iter().enumerate() {
            next[i + 1] = (next[i + 1] + c) % q;
            next[i] = (next[i] + q - c * h[k][k] % q) % q;
        }
        let mut prod = 1u64;
        for i in (0..k).rev() {
            prod = prod * h[i + 1][i] % q;
            if prod == 0 {
                break;
            }
            let coef = h[i][k] * prod % q;
            if coef == 0 {
                continue;
            }
            for (j, &c) in polys[i].iter().enumerate() {
                next[j] = (next[j] + q - coef * c % q) % q;
            }
        }
        polys.push(next);
    }
    polys.pop().unwrap()
}

/// `log2` of a bound on every coefficient of the characteristic polynomial:
/// each coefficient is a signed sum of principal minors, bounded by
/// `prod_i (1 + |row_i|_2)`.
pub fn coefficient_bound_bits(m: &[Vec<i64>]) -> f64 {
    m.iter()
        .map(|row| {
            let norm = row.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
            (1.0 + norm).log2()
        })
        .sum()
}

pub fn charpoly_exact(m: &[Vec<i64>]) -> Result<IntPoly> {
    charpoly_exact_capped(m, DEFAULT_DIM_CAP)
}

pub fn charpoly_exact_capped(m: &[Vec<i64>], cap: usize) -> Result<IntPoly> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return arg_err("matrix is not square");
    }
    if n > cap {
        return Err(Error::Resource(format!("dimension {n} exceeds cap {cap}")));
    }
    if n == 0 {
        return Ok(IntPoly::one());
    }
    let needed_bits = coefficient_bound_bits(m) + 2.0;
    let count = (needed_bits / 30.0).ceil() as usize + 1;
    let primes = reconstruction_primes(count);

    let mut modulus = BigInt::one();
    let mut residues: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    for &q in &primes {
        let image = charpoly_mod(m, q);
        let qb = BigInt::from(q);
        // Garner-style update: r <- r + M * ((a - r) * M^{-1} mod q)
        let m_mod_q = (&modulus % &qb).to_u64_digits().1.first().copied().unwrap_or(0);
        let m_inv = inv_mod(m_mod_q, q).unwrap();
        for (r, &a) in residues.iter_mut().zip(&image) {
            let r_mod = r.mod_floor(&qb).to_u64_digits().1.first().copied().unwrap_or(0);
            let t = ((a + q - r_mod) % q) * m_inv % q;
            *r += &modulus * BigInt::from(t);
        }
        modulus *= &qb;
    }
    let half = &modulus >> 1;
    let coeffs = residues.into_iter().map(|r| if r > half { r - &modulus } else { r }).collect();
    Ok(IntPoly::new(coeffs))
}
