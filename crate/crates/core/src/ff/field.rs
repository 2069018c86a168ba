//! Arithmetic in `F_p` and `F_{p^2} = F_p[g]/(g^2 - c)`, where `c` is the
//! smallest positive quadratic non-residue modulo `p`.
//!
//! Elements are plain `(re, im)` pairs; all operations go through the
//! [`Fp2`] context so that the modulus is never stored per element.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nt::{is_prime, legendre};
use crate::error::{arg_err, Error, Result};

/// An element `re + im*g` of `F_{p^2}`. Elements of `F_p` have `im == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Fq2 {
    pub re: u64,
    pub im: u64,
}

impl Fq2 {
    pub const ZERO: Fq2 = Fq2 { re: 0, im: 0 };
    pub const ONE: Fq2 = Fq2 { re: 1, im: 0 };

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn in_base_field(self) -> bool {
        self.im == 0
    }
}

impl fmt::Display for Fq2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}*g", self.re, self.im)
    }
}

impl From<Fq2> for String {
    fn from(a: Fq2) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Fq2 {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl std::str::FromStr for Fq2 {
    type Err = Error;

    /// Parses the `"a+b*g"` form produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Data(format!("malformed field element {s:?}"));
        let (a, rest) = s.split_once('+').ok_or_else(bad)?;
        let b = rest.strip_suffix("*g").ok_or_else(bad)?;
        Ok(Fq2 { re: a.trim().parse().map_err(|_| bad())?, im: b.trim().parse().map_err(|_| bad())? })
    }
}

/// Field context for `F_{p^2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fp2 {
    p: u64,
    nonres: u64,
}

impl Fp2 {
    /// Odd primes below `2^32`, so that products of reduced values fit in `u64`.
    pub fn new(p: u64) -> Result<Self> {
        if !(3..1 << 32).contains(&p) || !is_prime(p) {
            return arg_err(format!("field characteristic must be an odd prime below 2^32, got {p}"));
        }
        let nonres = (2..p).find(|&c| matches!(legendre(c as i64, p), Ok(-1))).expect("odd prime has a non-residue");
        Ok(Fp2 { p, nonres })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The constant `c = g^2`.
    pub fn nonresidue(&self) -> u64 {
        self.nonres
    }

    pub fn generator(&self) -> Fq2 {
        Fq2 { re: 0, im: 1 }
    }

    pub fn from_u64(&self, v: u64) -> Fq2 {
        Fq2 { re: v % self.p, im: 0 }
    }

    pub fn from_i64(&self, v: i64) -> Fq2 {
        Fq2 { re: v.rem_euclid(self.p as i64) as u64, im: 0 }
    }

    pub fn from_bigint(&self, v: &num_bigint::BigInt) -> Fq2 {
        use num_integer::Integer;
        use num_traits::ToPrimitive;
        let r = v.mod_floor(&num_bigint::BigInt::from(self.p));
        Fq2 { re: r.to_u64().expect("reduced residue fits u64"), im: 0 }
    }

    pub fn new_elem(&self, re: u64, im: u64) -> Result<Fq2> {
        if re >= self.p || im >= self.p {
            return arg_err(format!("coordinates ({re}, {im}) not reduced mod {}", self.p));
        }
        Ok(Fq2 { re, im })
    }

    #[inline]
    pub fn add(&self, a: Fq2, b: Fq2) -> Fq2 {
        let p = self.p;
        let mut re = a.re + b.re;
        if re >= p {
            re -= p;
        }
        let mut im = a.im + b.im;
        if im >= p {
            im -= p;
        }
        Fq2 { re, im }
    }

    #[inline]
    pub fn neg(&self, a: Fq2) -> Fq2 {
        let p = self.p;
        Fq2 { re: if a.re == 0 { 0 } else { p - a.re }, im: if a.im == 0 { 0 } else { p - a.im } }
    }

    #[inline]
    pub fn sub(&self, a: Fq2, b: Fq2) -> Fq2 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq2, b: Fq2) -> Fq2 {
        let p = self.p;
        if a.im == 0 && b.im == 0 {
            return Fq2 { re: a.re * b.re % p, im: 0 };
        }
        let re = (a.re * b.re % p + (a.im * b.im % p) * self.nonres % p) % p;
        let im = (a.re * b.im % p + a.im * b.re % p) % p;
        Fq2 { re, im }
    }

    pub fn scale(&self, a: Fq2, k: u64) -> Fq2 {
        self.mul(a, self.from_u64(k))
    }

    pub fn square(&self, a: Fq2) -> Fq2 {
        self.mul(a, a)
    }

    pub fn pow(&self, mut base: Fq2, mut exp: u128) -> Fq2 {
        let mut acc = Fq2::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Field norm `a * a^p` into `F_p`.
    pub fn norm(&self, a: Fq2) -> u64 {
        let p = self.p;
        (a.re * a.re % p + p - (a.im * a.im % p) * self.nonres % p) % p
    }

    /// Frobenius `x -> x^p`, i.e. conjugation `g -> -g`.
    pub fn frobenius(&self, a: Fq2) -> Fq2 {
        Fq2 { re: a.re, im: if a.im == 0 { 0 } else { self.p - a.im } }
    }

    pub fn inv(&self, a: Fq2) -> Result<Fq2> {
        if a.is_zero() {
            return Err(Error::Argument("inverse of zero".into()));
        }
        let n = self.norm(a);
        let n_inv = super::nt::pow_mod(n, self.p - 2, self.p);
        Ok(self.scale(self.frobenius(a), n_inv))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fq2 {
        Fq2 { re: rng.gen_range(0..self.p), im: rng.gen_range(0..self.p) }
    }

    /// Number of elements of `F_{p^2}`.
    pub fn order(&self) -> u128 {
        self.p as u128 * self.p as u128
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nonresidue_is_smallest() {
        assert_eq!(Fp2::new(7).unwrap().nonresidue(), 3);
        assert_eq!(Fp2::new(13).unwrap().nonresidue(), 2);
        assert_eq!(Fp2::new(37).unwrap().nonresidue(), 2);
        assert!(Fp2::new(2).is_err());
        assert!(Fp2::new(21).is_err());
    }

    #[test]
    fn frobenius_fixes_exactly_base_field() {
        let f = Fp2::new(11).unwrap();
        let mut fixed = 0;
        for re in 0..11 {
            for im in 0..11 {
                let a = Fq2 { re, im };
                let ap = f.pow(a, 11);
                assert_eq!(ap, f.frobenius(a));
                if ap == a {
                    assert!(a.in_base_field());
                    fixed += 1;
                }
            }
        }
        assert_eq!(fixed, 11);
    }

    #[test]
    fn display_roundtrip() {
        let a = Fq2 { re: 5, im: 12 };
        assert_eq!(a.to_string(), "5+12*g");
        assert_eq!("5+12*g".parse::<Fq2>().unwrap(), a);
        assert!("5*g".parse::<Fq2>().is_err());
    }

    proptest! {
        #[test]
        fn field_axioms(p_idx in 0usize..5, a in any::<(u64, u64)>(), b in any::<(u64, u64)>(), c in any::<(u64, u64)>()) {
            let p = [5u64, 13, 37, 1009, 4_294_967_291][p_idx];
            let f = Fp2::new(p).unwrap();
            let e = |(x, y): (u64, u64)| Fq2 { re: x % p, im: y % p };
            let (a, b, c) = (e(a), e(b), e(c));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            if !a.is_zero() {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Fq2::ONE);
            }
            prop_assert_eq!(f.sub(f.add(a, b), b), a);
        }
    }
}
