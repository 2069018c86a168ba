//! Dense univariate polynomials over `F_{p^2}` and root extraction by
//! distinct-root isolation followed by seeded equal-degree splitting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::field::{Fp2, Fq2};
use crate::error::{arg_err, Result};

/// Coefficients lowest degree first; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DensePoly {
    coeffs: Vec<Fq2>,
}

impl DensePoly {
    pub fn new(mut coeffs: Vec<Fq2>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        DensePoly { coeffs }
    }

    pub fn zero() -> Self {
        DensePoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        DensePoly { coeffs: vec![Fq2::ONE] }
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        DensePoly { coeffs: vec![Fq2::ZERO, Fq2::ONE] }
    }

    pub fn from_u64s(field: &Fp2, coeffs: &[u64]) -> Self {
        Self::new(coeffs.iter().map(|&c| field.from_u64(c)).collect())
    }

    pub fn from_i64s(field: &Fp2, coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    /// `prod (x - r)` over the given roots.
    pub fn from_roots(field: &Fp2, roots: &[Fq2]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| acc.mul(field, &DensePoly::new(vec![field.neg(r), Fq2::ONE])))
    }

    pub fn coeffs(&self) -> &[Fq2] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<Fq2> {
        self.coeffs.last().copied()
    }

    fn in_base_field(&self) -> bool {
        self.coeffs.iter().all(|c| c.in_base_field())
    }

    pub fn eval(&self, field: &Fp2, x: Fq2) -> Fq2 {
        self.coeffs.iter().rev().fold(Fq2::ZERO, |acc, &c| field.add(field.mul(acc, x), c))
    }

    pub fn add(&self, field: &Fp2, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Fq2], i: usize| v.get(i).copied().unwrap_or(Fq2::ZERO);
        Self::new((0..n).map(|i| field.add(get(&self.coeffs, i), get(&other.coeffs, i))).collect())
    }

    pub fn sub(&self, field: &Fp2, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Fq2], i: usize| v.get(i).copied().unwrap_or(Fq2::ZERO);
        Self::new((0..n).map(|i| field.sub(get(&self.coeffs, i), get(&other.coeffs, i))).collect())
    }

    pub fn scale(&self, field: &Fp2, k: Fq2) -> Self {
        Self::new(self.coeffs.iter().map(|&c| field.mul(c, k)).collect())
    }

    /// Schoolbook product with delayed reduction: raw products are summed in
    /// `u128` and reduced once per output coefficient.
    pub fn mul(&self, field: &Fp2, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let p = field.p() as u128;
        let (a, b) = (&self.coeffs, &other.coeffs);
        let n = a.len() + b.len() - 1;
        if self.in_base_field() && other.in_base_field() {
            let mut acc = vec![0u128; n];
            for (i, x) in a.iter().enumerate() {
                if x.re == 0 {
                    continue;
                }
                for (j, y) in b.iter().enumerate() {
                    acc[i + j] += (x.re * y.re) as u128;
                }
            }
            return Self::new(acc.into_iter().map(|v| Fq2 { re: (v % p) as u64, im: 0 }).collect());
        }
        let mut rr = vec![0u128; n];
        let mut ii = vec![0u128; n];
        let mut ri = vec![0u128; n];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                rr[i + j] += (x.re * y.re) as u128;
                ii[i + j] += (x.im * y.im) as u128;
                ri[i + j] += (x.re * y.im) as u128 + (x.im * y.re) as u128;
            }
        }
        let c = field.nonresidue() as u128;
        Self::new(
            (0..n).map(|k| Fq2 { re: ((rr[k] % p + (ii[k] % p) * c) % p) as u64, im: (ri[k] % p) as u64 }).collect(),
        )
    }

    /// Quotient and remainder; `divisor` must be nonzero.
    pub fn div_rem(&self, field: &Fp2, divisor: &Self) -> Result<(Self, Self)> {
        let Some(dd) = divisor.degree() else {
            return arg_err("polynomial division by zero");
        };
        let Some(nd) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if nd < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let lead_inv = field.inv(divisor.leading().unwrap())?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Fq2::ZERO; nd - dd + 1];
        let base = divisor.in_base_field() && self.in_base_field() && lead_inv.in_base_field();
        let p = field.p();
        for i in (dd..=nd).rev() {
            let c = field.mul(rem[i], lead_inv);
            if c.is_zero() {
                continue;
            }
            quot[i - dd] = c;
            let neg = field.neg(c);
            if base {
                for (j, g) in divisor.coeffs.iter().enumerate() {
                    let t = &mut rem[i - dd + j].re;
                    *t = (*t + neg.re * g.re) % p;
                }
            } else {
                for (j, &g) in divisor.coeffs.iter().enumerate() {
                    rem[i - dd + j] = field.add(rem[i - dd + j], field.mul(neg, g));
                }
            }
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    pub fn rem(&self, field: &Fp2, divisor: &Self) -> Result<Self> {
        Ok(self.div_rem(field, divisor)?.1)
    }

    pub fn monic(&self, field: &Fp2) -> Result<Self> {
        match self.leading() {
            None => Ok(Self::zero()),
            Some(l) => Ok(self.scale(field, field.inv(l)?)),
        }
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, field: &Fp2, other: &Self) -> Result<Self> {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(field, &b)?;
            a = b;
            b = r;
        }
        a.monic(field)
    }

    /// `self^exp mod modulus` by square and multiply.
    pub fn pow_mod(&self, field: &Fp2, mut exp: u128, modulus: &Self) -> Result<Self> {
        let mut base = self.rem(field, modulus)?;
        let mut acc = Self::one().rem(field, modulus)?;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(field, &base).rem(field, modulus)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(field, &base).rem(field, modulus)?;
            }
        }
        Ok(acc)
    }

    pub fn derivative(&self, field: &Fp2) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| field.scale(c, i as u64)).collect())
    }

    /// Divides by `x - r` if it is a factor.
    pub fn div_linear_exact(&self, field: &Fp2, r: Fq2) -> Option<Self> {
        let n = self.coeffs.len();
        if n < 2 {
            return None;
        }
        let mut q = vec![Fq2::ZERO; n - 1];
        let mut carry = Fq2::ZERO;
        for i in (1..n).rev() {
            carry = field.add(self.coeffs[i], field.mul(carry, r));
            q[i - 1] = carry;
        }
        let remainder = field.add(self.coeffs[0], field.mul(carry, r));
        remainder.is_zero().then(|| Self::new(q))
    }

    /// Multiplicity of `r` as a root, by repeated exact division.
    pub fn root_multiplicity(&self, field: &Fp2, r: Fq2) -> usize {
        let mut cur = self.clone();
        let mut m = 0;
        while let Some(q) = cur.div_linear_exact(field, r) {
            cur = q;
            m += 1;
        }
        m
    }
}

/// Roots of `f` in `F_{p^2}` with multiplicities, sorted by root.
///
/// Distinct roots are isolated as `gcd(f, x^{p^2} - x)` and split into linear
/// factors with `gcd(g, (x + a)^{(q-1)/2} - 1)` for seeded random `a`.
pub fn roots_in_fq2(field: &Fp2, f: &DensePoly, seed: u64) -> Result<Vec<(Fq2, usize)>> {
    if f.is_zero() {
        return arg_err("roots of the zero polynomial are undefined");
    }
    let f = f.monic(field)?;
    if f.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let q = field.order();
    let x = DensePoly::x();
    let frob = x.pow_mod(field, q, &f)?;
    let split = f.gcd(field, &frob.sub(field, &x))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut linear = Vec::new();
    equal_degree_split(field, split, q, &mut rng, &mut linear)?;
    let mut out: Vec<(Fq2, usize)> = linear.into_iter().map(|r| (r, f.root_multiplicity(field, r))).collect();
    out.sort();
    Ok(out)
}

fn equal_degree_split(field: &Fp2, g: DensePoly, q: u128, rng: &mut ChaCha8Rng, out: &mut Vec<Fq2>) -> Result<()> {
    match g.degree() {
        None | Some(0) => return Ok(()),
        Some(1) => {
            let g = g.monic(field)?;
            out.push(field.neg(g.coeffs()[0]));
            return Ok(());
        }
        _ => {}
    }
    loop {
        let a = field.random(rng);
        let shifted = DensePoly::new(vec![a, Fq2::ONE]);
        let w = shifted.pow_mod(field, (q - 1) / 2, &g)?;
        let d = g.gcd(field, &w.sub(field, &DensePoly::one()))?;
        let dd = d.degree().unwrap_or(0);
        if dd > 0 && Some(dd) < g.degree() {
            let (rest, _) = g.div_rem(field, &d)?;
            equal_degree_split(field, d, q, rng, out)?;
            return equal_degree_split(field, rest, q, rng, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn roots_examples() {
        let f5 = Fp2::new(5).unwrap();
        let r = roots_in_fq2(&f5, &DensePoly::from_i64s(&f5, &[-1, 0, 1]), 1).unwrap();
        assert_eq!(r, vec![(f5.from_u64(1), 1), (f5.from_u64(4), 1)]);

        let f11 = Fp2::new(11).unwrap();
        let sq = DensePoly::from_i64s(&f11, &[4, -4, 1]);
        assert_eq!(roots_in_fq2(&f11, &sq, 9).unwrap(), vec![(f11.from_u64(2), 2)]);

        assert!(roots_in_fq2(&f11, &DensePoly::zero(), 0).is_err());
    }

    #[test]
    fn x2_plus_1_over_f7_matches_brute_force() {
        let f = Fp2::new(7).unwrap();
        let poly = DensePoly::from_i64s(&f, &[1, 0, 1]);
        let mut brute = Vec::new();
        for re in 0..7 {
            for im in 0..7 {
                let a = Fq2 { re, im };
                if poly.eval(&f, a).is_zero() {
                    brute.push(a);
                }
            }
        }
        assert_eq!(brute.len(), 2);
        let roots = roots_in_fq2(&f, &poly, 3).unwrap();
        let found: Vec<Fq2> = roots
            .iter()
            .map(|&(r, m)| {
                assert_eq!(m, 1);
                r
            })
            .collect();
        assert_eq!(found, brute);
        assert_eq!(f.mul(found[0], found[1]), Fq2::ONE);
        assert_eq!(f.frobenius(found[0]), found[1]);
    }

    #[test]
    fn roots_independent_of_seed() {
        let f = Fp2::new(101).unwrap();
        let poly = DensePoly::from_i64s(&f, &[3, 0, 7, 1, 0, 0, 5, 1]);
        let base = roots_in_fq2(&f, &poly, 0).unwrap();
        for seed in 1..5 {
            assert_eq!(roots_in_fq2(&f, &poly, seed).unwrap(), base);
        }
    }

    proptest! {
        #[test]
        fn roots_resubstitute(p_idx in 0usize..4, coeffs in prop::collection::vec(0u64..1000, 2..9), seed in 0u64..100) {
            let p = [3u64, 13, 37, 97][p_idx];
            let f = Fp2::new(p).unwrap();
            let poly = DensePoly::from_u64s(&f, &coeffs);
            prop_assume!(poly.degree().unwrap_or(0) >= 1);
            let roots = roots_in_fq2(&f, &poly, seed).unwrap();
            let total: usize = roots.iter().map(|r| r.1).sum();
            prop_assert!(total <= poly.degree().unwrap());
            for (r, m) in roots {
                prop_assert!(poly.eval(&f, r).is_zero());
                prop_assert!(m >= 1);
            }
        }

        #[test]
        fn product_of_linears_recovered(roots in prop::collection::vec((0u64..37, 0u64..37), 1..7)) {
            let f = Fp2::new(37).unwrap();
            let rs: Vec<Fq2> = roots.iter().map(|&(a, b)| Fq2 { re: a, im: b }).collect();
            let poly = DensePoly::from_roots(&f, &rs);
            let got = roots_in_fq2(&f, &poly, 5).unwrap();
            let mut expect: Vec<Fq2> = rs.clone();
            expect.sort();
            let flat: Vec<Fq2> = got.iter().flat_map(|&(r, m)| std::iter::repeat_n(r, m)).collect();
            prop_assert_eq!(flat, expect);
        }
    }
}
