//! Local spectral measures on `[0, pi]` and the Chebyshev inner products
//! against them.
//!
//! Exact quantities (inner products of `U_m, U_n`, the Hecke main term) are
//! computed as rationals; integrals are also available by Gauss-Legendre
//! quadrature as an independent cross-check.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{arg_err, Result};
use crate::ff::nt::{divisors, integer_sqrt, is_prime};

pub const DEFAULT_NODES: usize = 256;
const MIN_NODES: usize = 64;

/// `U_n(x)` by the three-term recurrence.
pub fn chebyshev_u(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return 1.0;
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// Plancherel measure of the prime `p`.
    Plancherel(u64),
    /// The limit `p -> infinity`: `(2/pi) sin^2`.
    SatoTate,
}

impl Measure {
    pub fn plancherel(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return arg_err(format!("Plancherel measure needs a prime, got {p}"));
        }
        Ok(Measure::Plancherel(p))
    }

    pub fn density(&self, theta: f64) -> f64 {
        let s2 = theta.sin().powi(2);
        match *self {
            Measure::SatoTate => 2.0 / PI * s2,
            Measure::Plancherel(p) => {
                let p = p as f64;
                let a = p.sqrt() + 1.0 / p.sqrt();
                2.0 / PI * (p + 1.0) * s2 / (a * a - 4.0 * theta.cos().powi(2))
            }
        }
    }

    pub fn integrate(&self, nodes: usize, f: impl Fn(f64) -> f64) -> f64 {
        let (xs, ws) = gauss_legendre(nodes);
        xs.iter().zip(&ws).map(|(&t, &w)| w * f(t) * self.density(t)).sum()
    }

    pub fn mass(&self, nodes: usize) -> f64 {
        self.integrate(nodes, |_| 1.0)
    }
}

/// Gauss-Legendre nodes and weights mapped to `[0, pi]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let half = PI / 2.0;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = half * (1.0 - x);
        xs[n - 1 - i] = half * (1.0 + x);
        ws[i] = half * w;
        ws[n - 1 - i] = half * w;
    }
    (xs, ws)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow_rat(p: u64, e: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(p).pow(e))
}

/// `int U_m U_n dmu_p` in closed form.
pub fn inner_uu_closed(m: u32, n: u32, p: u64) -> BigRational {
    if (m + n) % 2 == 1 {
        return BigRational::zero();
    }
    let near = (m.abs_diff(n)) / 2;
    let far = (m + n) / 2 + 1;
    let pp = BigRational::from_integer(BigInt::from(p));
    let factor = &pp / (&pp - BigRational::one());
    factor * (pow_rat(p, near).recip() - pow_rat(p, far).recip())
}

/// Exact inner product for either kind of measure.
pub fn inner_uu_exact(m: u32, n: u32, measure: Measure) -> BigRational {
    match measure {
        Measure::Plancherel(p) => inner_uu_closed(m, n, p),
        Measure::SatoTate => {
            if m == n {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        }
    }
}

pub fn inner_uu_quad(m: u32, n: u32, measure: Measure, nodes: usize) -> Result<f64> {
    if nodes < MIN_NODES {
        return arg_err(format!("at least {MIN_NODES} quadrature nodes required, got {nodes}"));
    }
    Ok(measure.integrate(nodes, |t| {
        let c = t.cos();
        chebyshev_u(m as usize, c) * chebyshev_u(n as usize, c)
    }))
}

/// `(p+1)/(4 pi) int_0^pi cos(k t) / ((p-1)^2/(4p) + sin^2 t) dt` by quadrature.
pub fn residue_integral_quad(k: u32, p: u64, nodes: usize) -> f64 {
    let pf = p as f64;
    let c = (pf - 1.0).powi(2) / (4.0 * pf);
    let (xs, ws) = gauss_legendre(nodes);
    let s: f64 = xs.iter().zip(&ws).map(|(&t, &w)| w * (k as f64 * t).cos() / (c + t.sin().powi(2))).sum();
    (pf + 1.0) / (4.0 * PI) * s
}

/// The same integral at `k = 2T`, exactly: `p / ((p - 1) p^T)`.
pub fn residue_integral_closed(t: u32, p: u64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(p - 1)) / pow_rat(p, t)
}

/// `sum 1/k` over `d | gcd(m, n)` with `m n = d^2 k^2`.
pub fn main_term(m: u64, n: u64) -> Result<BigRational> {
    if m == 0 || n == 0 {
        return arg_err("main term needs positive arguments");
    }
    let mut acc = BigRational::zero();
    let g = m.gcd(&n);
    for d in divisors(g) {
        let q = (m / d) as u128 * (n / d) as u128;
        let Ok(q) = u64::try_from(q) else {
            return arg_err("m n too large");
        };
        let k = integer_sqrt(q);
        if k * k == q {
            acc += rat(1, k as i64);
        }
    }
    Ok(acc)
}

/// A polynomial in the product basis `U_{t_1}(x_1) ... U_{t_r}(x_r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UPoly {
    caps: Vec<u32>,
    coeffs: BTreeMap<Vec<u32>, f64>,
}

impl UPoly {
    pub fn new(caps: Vec<u32>) -> Self {
        UPoly { caps, coeffs: BTreeMap::new() }
    }

    /// The constant polynomial 1 in `r` variables.
    pub fn one(r: usize) -> Self {
        let mut p = Self::new(vec![0; r]);
        p.coeffs.insert(vec![0; r], 1.0);
        p
    }

    /// A single basis term.
    pub fn monomial(exps: Vec<u32>, coeff: f64) -> Self {
        let mut p = Self::new(exps.clone());
        p.coeffs.insert(exps, coeff);
        p
    }

    pub fn arity(&self) -> usize {
        self.caps.len()
    }

    pub fn caps(&self) -> &[u32] {
        &self.caps
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.coeffs.iter()
    }

    pub fn set(&mut self, exps: Vec<u32>, coeff: f64) -> Result<()> {
        if exps.len() != self.caps.len() || exps.iter().zip(&self.caps).any(|(e, c)| e > c) {
            return arg_err(format!("term {exps:?} outside degree caps {:?}", self.caps));
        }
        if coeff == 0.0 {
            self.coeffs.remove(&exps);
        } else {
            self.coeffs.insert(exps, coeff);
        }
        Ok(())
    }

    pub fn eval(&self, xs: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(e, a)| a * e.iter().zip(xs).map(|(&t, &x)| chebyshev_u(t as usize, x)).product::<f64>())
            .sum()
    }
}

/// `int |P|^2` against a product of measures, expanded into one-dimensional
/// inner products.
pub fn product_norm(poly: &UPoly, measures: &[Measure]) -> Result<f64> {
    if poly.arity() != measures.len() {
        return arg_err(format!("polynomial has {} variables but {} measures given", poly.arity(), measures.len()));
    }
    let mut total = 0.0;
    for (t, at) in poly.terms() {
        for (s, as_) in poly.terms() {
            let mut prod = BigRational::one();
            for ((&ti, &si), &mu) in t.iter().zip(s).zip(measures) {
                prod *= inner_uu_exact(ti, si, mu);
                if prod.is_zero() {
                    break;
                }
            }
            total += at * as_ * prod.to_f64().unwrap_or(f64::NAN);
        }
    }
    Ok(total)
}

/// `max(|sin kx / sin x|, |sin (k+1)x / sin x|)`, extended continuously at `sin x = 0`.
pub fn sin_ratio_max(k: f64, x: f64) -> f64 {
    let s = x.sin();
    if s == 0.0 {
        return k.abs().max((k + 1.0).abs());
    }
    ((k * x).sin() / s).abs().max((((k + 1.0) * x).sin() / s).abs())
}

/// One row of the closed-form versus quadrature table.
#[derive(Clone, Debug)]
pub struct InnerRow {
    pub m: u32,
    pub n: u32,
    pub p: u64,
    pub closed: BigRational,
    pub quad: f64,
    pub abs_err: f64,
}

pub fn inner_table(primes: &[u64], max_index: u32, nodes: usize) -> Result<Vec<InnerRow>> {
    let mut rows = Vec::new();
    for &p in primes {
        let mu = Measure::plancherel(p)?;
        for m in 0..=max_index {
            for n in 0..=max_index {
                let closed = inner_uu_closed(m, n, p);
                let quad = inner_uu_quad(m, n, mu, nodes)?;
                let abs_err = (quad - closed.to_f64().unwrap()).abs();
                rows.push(InnerRow { m, n, p, closed, quad, abs_err });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chebyshev_values() {
        assert_eq!(chebyshev_u(0, 0.3), 1.0);
        assert_eq!(chebyshev_u(1, 0.3), 0.6);
        assert!(chebyshev_u(2, 0.5).abs() < 1e-15);
        let t: f64 = 0.3;
        assert!((chebyshev_u(3, t.cos()) * t.sin() - (4.0 * t).sin()).abs() < 1e-14);
    }

    #[test]
    fn closed_form_examples() {
        for p in [2u64, 3, 5, 7, 11, 101] {
            assert_eq!(inner_uu_closed(0, 0, p), BigRational::one());
            assert!(inner_uu_closed(0, 1, p).is_zero());
            assert_eq!(inner_uu_closed(1, 1, p), rat(p as i64 + 1, p as i64));
            assert_eq!(inner_uu_closed(0, 2, p), rat(1, p as i64));
            assert_eq!(residue_integral_closed(0, p), rat(p as i64, p as i64 - 1));
            assert_eq!(residue_integral_closed(1, p), rat(1, p as i64 - 1));
        }
    }

    #[test]
    fn residue_integrals_by_quadrature() {
        for p in [2u64, 3, 5, 7] {
            for t in 0..6 {
                let q = residue_integral_quad(2 * t, p, DEFAULT_NODES);
                assert!((q - residue_integral_closed(t, p).to_f64().unwrap()).abs() < 1e-10);
                assert!(residue_integral_quad(2 * t + 1, p, DEFAULT_NODES).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn masses_and_moments() {
        for p in crate::ff::nt::primes_up_to(97) {
            let mu = Measure::plancherel(p).unwrap();
            assert!((mu.mass(DEFAULT_NODES) - 1.0).abs() < 1e-10, "p={p}");
            for j in 0..8u32 {
                let want = if j % 2 == 0 { (p as f64).powf(-(j as f64) / 2.0) } else { 0.0 };
                assert!((inner_uu_quad(j, 0, mu, DEFAULT_NODES).unwrap() - want).abs() < 1e-10);
            }
        }
        assert!((Measure::SatoTate.mass(DEFAULT_NODES) - 1.0).abs() < 1e-12);
        for m in 0..10 {
            for n in 0..10 {
                let v = inner_uu_quad(m, n, Measure::SatoTate, DEFAULT_NODES).unwrap();
                assert!((v - if m == n { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
        assert!(inner_uu_quad(0, 0, Measure::SatoTate, 10).unwrap_err().is_argument());
    }

    /// Divisor enumeration against the identity with the local inner product.
    #[test]
    fn main_term_matches_inner_products() {
        assert_eq!(main_term(1, 1).unwrap(), BigRational::one());
        assert!(main_term(2, 3).unwrap().is_zero());
        for q in [2u64, 3, 5] {
            assert_eq!(main_term(q, q).unwrap(), rat(q as i64 + 1, q as i64));
            for a in 0..=6u32 {
                for b in 0..=6u32 {
                    assert_eq!(main_term(q.pow(a), q.pow(b)).unwrap(), inner_uu_closed(a, b, q));
                }
            }
        }
    }

    #[test]
    fn product_norms() {
        let mu2 = Measure::Plancherel(2);
        let mu3 = Measure::Plancherel(3);
        let p = UPoly::monomial(vec![1], 1.0);
        assert!((product_norm(&p, &[mu2]).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(product_norm(&UPoly::one(2), &[mu2, mu3]).unwrap(), 1.0);
        let p = UPoly::monomial(vec![1, 1], 1.0);
        assert!((product_norm(&p, &[mu2, mu3]).unwrap() - 2.0).abs() < 1e-15);
        assert!(product_norm(&p, &[mu2]).unwrap_err().is_argument());
        let mut q = UPoly::new(vec![2]);
        assert!(q.set(vec![3], 1.0).is_err());
        q.set(vec![2], 1.0).unwrap();
        q.set(vec![0], -0.5).unwrap();
        // quadrature of |P|^2 agrees with the expansion
        let quad = mu2.integrate(DEFAULT_NODES, |t| q.eval(&[t.cos()]).powi(2));
        assert!((product_norm(&q, &[mu2]).unwrap() - quad).abs() < 1e-12);
    }

    #[test]
    fn sin_ratio_examples() {
        assert!(sin_ratio_max(1.0, 0.7) >= 1.0 - 1e-15);
        assert_eq!(sin_ratio_max(2.5, 0.0), 3.5);
        assert!(sin_ratio_max(2.7, 1.3) >= 0.5);
    }

    proptest! {
        #[test]
        fn sin_ratio_at_least_half(k in 0.0f64..50.0, x in 0.0f64..PI) {
            prop_assert!(sin_ratio_max(k, x) >= 0.5 - 1e-12);
        }

        #[test]
        fn closed_form_symmetric(m in 0u32..20, n in 0u32..20, idx in 0usize..5) {
            let p = [2u64, 3, 5, 7, 11][idx];
            prop_assert_eq!(inner_uu_closed(m, n, p), inner_uu_closed(n, m, p));
        }
    }
}
