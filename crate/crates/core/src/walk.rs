//! Non-backtracking walks on `G(p, l)`: exact walk-count matrices, the
//! orthogonal family `R_t`, and the variance of the walk distribution
//! computed both spectrally and combinatorially.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{arg_err, Error, Result};
use crate::output::fmt_f64;
use crate::plancherel::{chebyshev_u, inner_uu_exact, Measure};
use crate::spectra::EigenSystem;
use crate::ssgraph::IsogenyGraph;

/// `R_t` in the `U` basis: `U_t - U_{t-2}/l` for `t >= 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RPoly {
    pub t: u32,
    pub coeffs: BTreeMap<u32, BigRational>,
}

pub fn r_poly(t: u32, ell: u64) -> RPoly {
    let mut coeffs = BTreeMap::new();
    coeffs.insert(t, BigRational::one());
    if t >= 2 {
        coeffs.insert(t - 2, -BigRational::new(BigInt::one(), BigInt::from(ell)));
    }
    RPoly { t, coeffs }
}

impl RPoly {
    /// Value at `x = cos(theta)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().map(|(&k, c)| c.to_f64().unwrap() * chebyshev_u(k as usize, x)).sum()
    }

    /// `int R_s R_t dmu`, exactly.
    pub fn inner(&self, other: &RPoly, measure: Measure) -> BigRational {
        let mut acc = BigRational::zero();
        for (&i, a) in &self.coeffs {
            for (&j, b) in &other.coeffs {
                acc += a * b * inner_uu_exact(i, j, measure);
            }
        }
        acc
    }
}

/// Number of non-backtracking walks of length `t` from a vertex.
pub fn walk_total(ell: u64, t: u32) -> BigInt {
    if t == 0 {
        BigInt::one()
    } else {
        BigInt::from(ell + 1) * BigInt::from(ell).pow(t - 1)
    }
}

type BigMatrix = Vec<Vec<BigInt>>;

/// Exact non-backtracking walk counts `A_0 .. A_tmax`.
#[derive(Clone, Debug)]
pub struct NbWalkSet {
    pub ell: u64,
    pub mats: Vec<BigMatrix>,
}

fn max_bits(m: &BigMatrix) -> u64 {
    m.iter().flatten().map(|v| v.bits()).max().unwrap_or(0)
}

/// `a * b`, in `i128` when the result provably fits.
fn mat_mul(a: &BigMatrix, b: &BigMatrix) -> BigMatrix {
    let n = a.len();
    let log_n = 64 - (n as u64).leading_zeros() as u64;
    if max_bits(a) + max_bits(b) + log_n < 126 {
        let small = |m: &BigMatrix| -> Vec<Vec<i128>> {
            m.iter().map(|r| r.iter().map(|v| v.to_i128().unwrap()).collect()).collect()
        };
        let (sa, sb) = (small(a), small(b));
        (0..n)
            .map(|i| (0..n).map(|j| BigInt::from((0..n).map(|k| sa[i][k] * sb[k][j]).sum::<i128>())).collect())
            .collect()
    } else {
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
    }
}

pub fn nb_counts(graph: &IsogenyGraph, tmax: u32) -> Result<NbWalkSet> {
    if tmax < 1 {
        return arg_err("tmax must be at least 1");
    }
    let n = graph.n();
    let ell = graph.ell;
    let a: BigMatrix = graph.adjacency.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let ident: BigMatrix =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let mut mats = vec![ident, a.clone()];
    for t in 1..tmax as usize {
        let prod = mat_mul(&a, &mats[t]);
        // the first step back is forbidden once; afterwards each backtrack
        // removes l continuations
        let back = if t == 1 { BigInt::from(ell + 1) } else { BigInt::from(ell) };
        let next: BigMatrix = prod
            .into_iter()
            .zip(&mats[t - 1])
            .map(|(row, prev)| row.into_iter().zip(prev).map(|(x, y)| x - &back * y).collect())
            .collect();
        mats.push(next);
    }
    let set = NbWalkSet { ell, mats };
    for t in 1..=tmax {
        let want = walk_total(ell, t);
        for row in &set.mats[t as usize] {
            if row.iter().any(|v| v.sign() == num_bigint::Sign::Minus) || row.iter().sum::<BigInt>() != want {
                return Err(Error::Construction(format!("walk counts at t = {t} fail the row-sum check")));
            }
        }
    }
    Ok(set)
}

impl NbWalkSet {
    pub fn tmax(&self) -> u32 {
        (self.mats.len() - 1) as u32
    }

    pub fn n(&self) -> usize {
        self.mats[0].len()
    }

    /// `(sum A_t^2 - N(t)^2) / n`, exact.
    pub fn variance_exact(&self, t: u32) -> Result<BigRational> {
        let m = self
            .mats
            .get(t as usize)
            .ok_or_else(|| Error::Argument(format!("t = {t} beyond computed range {}", self.tmax())))?;
        let sq: BigInt = m.iter().flatten().map(|v| v * v).sum();
        let nt = walk_total(self.ell, t);
        Ok(BigRational::new(sq - &nt * &nt, BigInt::from(self.n())))
    }

    pub fn variance_combinatorial(&self, t: u32) -> Result<f64> {
        Ok(self.variance_exact(t)?.to_f64().unwrap_or(f64::NAN))
    }
}

/// `l^{t/2} R_t(A / (2 sqrt l))` in floating point.
pub fn spectral_walk_matrix(graph: &IsogenyGraph, t: u32) -> Vec<Vec<f64>> {
    let n = graph.n();
    let ell = graph.ell as f64;
    let x: Vec<Vec<f64>> = graph.adjacency.iter().map(|r| r.iter().map(|&v| v as f64 / ell.sqrt()).collect()).collect();
    let ident: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
    // U_k at the matrix argument A/(2 sqrt l), so 2 * argument = x
    let mut us = vec![ident.clone(), x.clone()];
    for k in 1..t.max(1) as usize {
        let next: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|m| x[i][m] * us[k][m][j]).sum::<f64>() - us[k - 1][i][j]).collect())
            .collect();
        us.push(next);
    }
    let scale = ell.powf(t as f64 / 2.0);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut v = us[t as usize][i][j];
                    if t >= 2 {
                        v -= us[t as usize - 2][i][j] / ell;
                    }
                    scale * v
                })
                .collect()
        })
        .collect()
}

/// `(l^t / n) sum_f R_t(cos theta_f)^2` with `n` the number of vertices.
pub fn variance_spectral(system: &EigenSystem, ell: u64, t: u32) -> Result<f64> {
    if !system.primes.contains(&ell) {
        return Err(Error::Coverage(format!("eigensystem at level {} lacks l = {ell}", system.level)));
    }
    let r = r_poly(t, ell);
    let n = (system.s() + 1) as f64;
    let sum: f64 = system.forms.iter().map(|f| r.eval(f.theta[&ell].cos()).powi(2)).sum();
    Ok((ell as f64).powi(t as i32) / n * sum)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutoffRow {
    pub p: u64,
    pub ell: u64,
    pub t: u32,
    pub w2_spectral: f64,
    pub w2_combinatorial: f64,
    pub n_t: BigInt,
    pub ratio: f64,
    /// Whether `t` is beyond `(2 - eta) log_l n`.
    pub beyond_threshold: bool,
}

pub fn cutoff_threshold(n: usize, ell: u64, eta: f64) -> f64 {
    (2.0 - eta) * (n as f64).ln() / (ell as f64).ln()
}

pub fn cutoff_profile(
    graph: &IsogenyGraph,
    system: &EigenSystem,
    trange: std::ops::RangeInclusive<u32>,
    eta: f64,
) -> Result<Vec<CutoffRow>> {
    let tmax = (*trange.end()).max(1);
    let walks = nb_counts(graph, tmax)?;
    let threshold = cutoff_threshold(graph.n(), graph.ell, eta);
    trange
        .map(|t| {
            let w2_spectral = variance_spectral(system, graph.ell, t)?;
            let w2_combinatorial = walks.variance_combinatorial(t)?;
            let n_t = walk_total(graph.ell, t);
            Ok(CutoffRow {
                p: graph.p,
                ell: graph.ell,
                t,
                w2_spectral,
                w2_combinatorial,
                ratio: w2_spectral / n_t.to_f64().unwrap(),
                n_t,
                beyond_threshold: t as f64 > threshold,
            })
        })
        .collect()
}

pub fn cutoff_csv(rows: &[CutoffRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "ell", "t", "W2_spectral", "W2_combinatorial", "N_t", "ratio"])?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.ell.to_string(),
            r.t.to_string(),
            fmt_f64(r.w2_spectral),
            fmt_f64(r.w2_combinatorial),
            r.n_t.to_string(),
            fmt_f64(r.ratio),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
