//! Classical modular polynomials `Phi_l(X, Y)` for `l <= 13`.
//!
//! The coefficients ship as a text data file (`l i j coefficient` per line)
//! and are validated on load. [`derive_modular_poly`] recomputes them from
//! the integer q-expansion of `j`, which is how the data file is produced.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{arg_err, Error, Result};
use crate::ff::{DensePoly, Fp2, Fq2};

pub const SUPPORTED_LEVELS: [u64; 6] = [2, 3, 5, 7, 11, 13];

const BUNDLED: &str = include_str!("../../data/modpoly.txt");

/// `Phi_l(X, Y) = sum c[i][j] X^i Y^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularPolynomial {
    ell: u64,
    coeffs: Vec<Vec<BigInt>>,
}

impl ModularPolynomial {
    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn coeff(&self, i: usize, j: usize) -> &BigInt {
        &self.coeffs[i][j]
    }

    pub fn coeffs(&self) -> &[Vec<BigInt>] {
        &self.coeffs
    }

    fn from_coeffs(ell: u64, coeffs: Vec<Vec<BigInt>>) -> Result<Self> {
        let poly = ModularPolynomial { ell, coeffs };
        poly.validate()?;
        Ok(poly)
    }

    /// Symmetry, exact degree `l + 1` and Kronecker's congruence
    /// `Phi_l = (X^l - Y)(X - Y^l) mod l`.
    pub fn validate(&self) -> Result<()> {
        let l = self.ell as usize;
        let n = l + 2;
        if self.coeffs.len() != n || self.coeffs.iter().any(|r| r.len() != n) {
            return Err(Error::Data(format!("Phi_{l}: coefficient table is not {n}x{n}")));
        }
        for i in 0..n {
            for j in 0..i {
                if self.coeffs[i][j] != self.coeffs[j][i] {
                    return Err(Error::Data(format!("Phi_{l}: asymmetric at ({i}, {j})")));
                }
            }
        }
        if !self.coeffs[l + 1][0].is_one() || (1..n).any(|j| !self.coeffs[l + 1][j].is_zero()) {
            return Err(Error::Data(format!("Phi_{l}: X^{} must appear alone with coefficient 1", l + 1)));
        }
        let lb = BigInt::from(self.ell);
        for i in 0..n {
            for j in 0..n {
                let expect: i64 = match (i, j) {
                    (a, 0) | (0, a) if a == l + 1 => 1,
                    (1, 1) => -1,
                    (a, b) if a == l && b == l => -1,
                    _ => 0,
                };
                if (&self.coeffs[i][j] - expect).mod_floor(&lb) != BigInt::zero() {
                    return Err(Error::Data(format!("Phi_{l}: Kronecker congruence fails at ({i}, {j})")));
                }
            }
        }
        Ok(())
    }

    /// Coefficients reduced modulo `p`.
    pub fn reduce(&self, field: &Fp2) -> Vec<Vec<Fq2>> {
        self.coeffs.iter().map(|row| row.iter().map(|c| field.from_bigint(c)).collect()).collect()
    }

    /// Evaluates `Phi(X, Y) - Phi(Y, X)` coefficientwise; zero for valid data.
    pub fn antisymmetric_part(&self) -> Vec<Vec<BigInt>> {
        let n = self.coeffs.len();
        (0..n).map(|i| (0..n).map(|j| &self.coeffs[i][j] - &self.coeffs[j][i]).collect()).collect()
    }

    /// Serializes in the bundled data format.
    pub fn to_data_lines(&self) -> String {
        let mut out = String::new();
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    writeln!(out, "{} {} {} {}", self.ell, i, j, c).unwrap();
                }
            }
        }
        out
    }
}

/// `Phi_l(x, Y)` over `F_{p^2}` for a reduced coefficient table.
pub fn specialize_x(field: &Fp2, reduced: &[Vec<Fq2>], x: Fq2) -> DensePoly {
    let n = reduced.len();
    let mut powers = Vec::with_capacity(n);
    let mut acc = Fq2::ONE;
    for _ in 0..n {
        powers.push(acc);
        acc = field.mul(acc, x);
    }
    let coeffs =
        (0..n).map(|j| (0..n).fold(Fq2::ZERO, |s, i| field.add(s, field.mul(reduced[i][j], powers[i])))).collect();
    DensePoly::new(coeffs)
}

/// Parses data-file text into per-level coefficient tables.
pub fn parse_data(text: &str) -> Result<BTreeMap<u64, ModularPolynomial>> {
    let mut tables: BTreeMap<u64, Vec<Vec<BigInt>>> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Data(format!("modular polynomial data line {}: {raw:?}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(bad());
        }
        let ell: u64 = fields[0].parse().map_err(|_| bad())?;
        let i: usize = fields[1].parse().map_err(|_| bad())?;
        let j: usize = fields[2].parse().map_err(|_| bad())?;
        let c: BigInt = fields[3].parse().map_err(|_| bad())?;
        if !SUPPORTED_LEVELS.contains(&ell) || i > ell as usize + 1 || j > ell as usize + 1 {
            return Err(bad());
        }
        let n = ell as usize + 2;
        let table = tables.entry(ell).or_insert_with(|| vec![vec![BigInt::zero(); n]; n]);
        table[i][j] = c;
    }
    tables.into_iter().map(|(ell, coeffs)| Ok((ell, ModularPolynomial::from_coeffs(ell, coeffs)?))).collect()
}

fn bundled() -> &'static Result<BTreeMap<u64, ModularPolynomial>> {
    static CELL: OnceLock<Result<BTreeMap<u64, ModularPolynomial>>> = OnceLock::new();
    CELL.get_or_init(|| parse_data(BUNDLED))
}

/// Loads `Phi_l` from the bundled data.
pub fn modular_poly(ell: u64) -> Result<ModularPolynomial> {
    if !SUPPORTED_LEVELS.contains(&ell) {
        return arg_err(format!("modular polynomial level {ell} unsupported; use one of {SUPPORTED_LEVELS:?}"));
    }
    match bundled() {
        Ok(map) => map.get(&ell).cloned().ok_or_else(|| Error::Data(format!("bundled data lacks Phi_{ell}"))),
        Err(e) => Err(Error::Data(e.to_string())),
    }
}

/// Renders the complete data file for every supported level.
pub fn render_data_file(polys: &[ModularPolynomial]) -> String {
    let mut out = String::from("# Classical modular polynomials Phi_l(X, Y) = sum c X^i Y^j\n# columns: l i j c\n");
    for p in polys {
        out.push_str(&p.to_data_lines());
    }
    out
}

/// Truncated Laurent series `sum_{k >= val} c_k q^k`, known for `k < val + len`.
#[derive(Clone, Debug)]
pub(crate) struct Laurent {
    val: i64,
    coeffs: Vec<BigInt>,
}

impl Laurent {
    fn prec(&self) -> i64 {
        self.val + self.coeffs.len() as i64
    }

    fn coeff(&self, k: i64) -> BigInt {
        if k < self.val || k >= self.prec() {
            BigInt::zero()
        } else {
            self.coeffs[(k - self.val) as usize].clone()
        }
    }

    fn one(prec: i64) -> Self {
        let mut coeffs = vec![BigInt::zero(); prec.max(1) as usize];
        coeffs[0] = BigInt::one();
        Laurent { val: 0, coeffs }
    }

    fn mul(&self, other: &Self) -> Self {
        let val = self.val + other.val;
        let prec = (self.prec() + other.val).min(other.prec() + self.val);
        let len = (prec - val).max(0) as usize;
        let mut coeffs = vec![BigInt::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] += a * b;
            }
        }
        Laurent { val, coeffs }
    }

    fn truncate(&self, prec: i64) -> Self {
        let len = (prec - self.val).clamp(0, self.coeffs.len() as i64) as usize;
        Laurent { val: self.val, coeffs: self.coeffs[..len].to_vec() }
    }

    fn add_scaled(&self, other: &Self, k: &BigInt) -> Self {
        let val = self.val.min(other.val);
        let prec = self.prec().min(other.prec());
        Laurent { val, coeffs: (val..prec).map(|e| self.coeff(e) + k * other.coeff(e)).collect() }
    }

    /// `f(q) -> f(q^m)`.
    fn dilate(&self, m: i64) -> Self {
        let val = self.val * m;
        let prec = self.prec() * m - (m - 1);
        let mut coeffs = vec![BigInt::zero(); (prec - val) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * m as usize] = c.clone();
        }
        Laurent { val, coeffs }
    }

    /// `sum_k f((tau + k)/m)` expressed in `q`: `m * sum_{m | n} c_n q^{n/m}`.
    fn trace_contract(&self, m: i64) -> Self {
        let val = Integer::div_ceil(&self.val, &m);
        let prec = Integer::div_floor(&(self.prec() - 1), &m) + 1;
        let coeffs = (val..prec).map(|e| self.coeff(e * m) * m).collect();
        Laurent { val, coeffs }
    }

    fn is_zero_below(&self, bound: i64) -> bool {
        (self.val..bound.min(self.prec())).all(|e| self.coeff(e).is_zero())
    }
}

fn sigma3(n: u64) -> u64 {
    crate::ff::nt::divisors(n).iter().map(|d| d * d * d).sum()
}

/// `j(q)` known for exponents `< prec`.
pub(crate) fn j_series(prec: i64) -> Laurent {
    let m = (prec + 1).max(1) as usize; // power series terms needed for q*j
    let mut e4 = vec![BigInt::zero(); m];
    e4[0] = BigInt::one();
    for (n, c) in e4.iter_mut().enumerate().skip(1) {
        *c = BigInt::from(240u64 * sigma3(n as u64));
    }
    let e4 = Laurent { val: 0, coeffs: e4 };
    let e4_cubed = e4.mul(&e4).mul(&e4);
    // prod (1 - q^n)^24
    let mut eta24 = Laurent::one(m as i64);
    for n in 1..m {
        for _ in 0..24 {
            for k in (n..m).rev() {
                let t = eta24.coeffs[k - n].clone();
                eta24.coeffs[k] -= t;
            }
        }
    }
    // inverse of a power series with constant term 1
    let mut inv = vec![BigInt::zero(); m];
    inv[0] = BigInt::one();
    for k in 1..m {
        let mut s = BigInt::zero();
        for i in 1..=k {
            s += &eta24.coeffs[i] * &inv[k - i];
        }
        inv[k] = -s;
    }
    let qj = e4_cubed.mul(&Laurent { val: 0, coeffs: inv });
    Laurent { val: -1, coeffs: qj.coeffs }.truncate(prec)
}

/// Recomputes `Phi_l` from the q-expansion of `j`.
///
/// The `l + 1` roots of `Phi_l(X, j(tau))` are `j(l tau)` and
/// `j((tau + k)/l)`; power sums of the latter are read off the expansion of
/// `j^r` without roots of unity, converted to elementary symmetric functions
/// by Newton's identities, and each resulting series is rewritten as a
/// polynomial in `j`.
pub fn derive_modular_poly(ell: u64) -> Result<ModularPolynomial> {
    if !SUPPORTED_LEVELS.contains(&ell) {
        return arg_err(format!("modular polynomial level {ell} unsupported"));
    }
    let l = ell as i64;
    let work_prec = 2 * l + 6; // precision kept for the symmetric functions
    let j_prec = l * work_prec + 1;
    let j = j_series(j_prec);

    let mut j_pows: Vec<Laurent> = vec![Laurent::one(j_prec)];
    for r in 1..=(l + 1) as usize {
        let next = j_pows[r - 1].mul(&j).truncate(j_prec);
        j_pows.push(next);
    }

    // power sums p_r of the l conjugates j((tau+k)/l)
    let power_sums: Vec<Laurent> = (0..=l as usize).map(|r| j_pows[r].trace_contract(l).truncate(work_prec)).collect();
    // Newton: k e_k = sum_{i=1}^k (-1)^{i-1} e_{k-i} p_i
    let mut elem: Vec<Laurent> = vec![Laurent::one(work_prec)];
    for k in 1..=l as usize {
        let mut acc = Laurent { val: 0, coeffs: vec![BigInt::zero(); work_prec as usize] };
        for i in 1..=k {
            let sign = if i % 2 == 1 { BigInt::one() } else { -BigInt::one() };
            acc = acc.add_scaled(&elem[k - i].mul(&power_sums[i]), &sign);
        }
        let kb = BigInt::from(k);
        for c in acc.coeffs.iter_mut() {
            let (q, r) = c.div_rem(&kb);
            if !r.is_zero() {
                return Err(Error::Numeric(format!("Newton identity not integral for Phi_{ell}")));
            }
            *c = q;
        }
        elem.push(acc);
    }

    let j_l = j.dilate(l);
    let n = l as usize + 2;
    let mut coeffs = vec![vec![BigInt::zero(); n]; n];
    coeffs[l as usize + 1][0] = BigInt::one();
    for k in 1..=(l + 1) as usize {
        // S_k = E_k + j(l tau) E_{k-1}
        let mut s = j_l.mul(&elem[k - 1]);
        if k <= l as usize {
            s = s.add_scaled(&elem[k], &BigInt::one());
        }
        let sign: i64 = if k % 2 == 1 { -1 } else { 1 };
        for d in (0..=(l + 1)).rev() {
            let a = s.coeff(-d);
            if a.is_zero() {
                continue;
            }
            coeffs[l as usize + 1 - k][d as usize] = &a * sign;
            s = s.add_scaled(&j_pows[d as usize], &(-a));
        }
        if !s.is_zero_below(l.min(s.prec())) {
            return Err(Error::Numeric(format!(
                "symmetric function {k} of Phi_{ell} is not a polynomial in j to the working precision"
            )));
        }
    }
    ModularPolynomial::from_coeffs(ell, coeffs)
}

/// Largest absolute coefficient, in decimal digits.
pub fn max_coeff_digits(poly: &ModularPolynomial) -> usize {
    poly.coeffs.iter().flatten().map(|c| c.abs().to_string().len()).max().unwrap_or(0)
}
