//! Dense symmetric eigensolver by cyclic Jacobi rotations.

use crate::error::{arg_err, Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const SWEEP_CAP: usize = 100;

/// Eigenvalues ascending; `vectors[k]` is the unit eigenvector for `values[k]`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

fn max_abs(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

fn off_diag_max(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max(a[i][j].abs());
        }
    }
    worst
}

/// Full decomposition of a symmetric matrix with `|MV - VD|_max <= tol |M|_max`.
pub fn eig_sym(m: &[Vec<f64>], tol: f64) -> Result<SymEigen> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return arg_err("matrix is not square");
    }
    for i in 0..n {
        for j in 0..i {
            if (m[i][j] - m[j][i]).abs() > 1e-12 {
                return arg_err(format!("matrix is not symmetric at ({i}, {j})"));
            }
        }
    }
    let scale = max_abs(m);
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();

    let mut converged = n <= 1 || scale == 0.0;
    let mut polish = false;
    for _ in 0..SWEEP_CAP {
        if converged {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
        // one extra sweep after the threshold drives the off-diagonal to roundoff
        if polish {
            converged = true;
        } else if off_diag_max(&a) <= tol * scale {
            polish = true;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!("Jacobi did not converge in {SWEEP_CAP} sweeps")));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values: Vec<f64> = order.iter().map(|&k| a[k][k]).collect();
    let vectors: Vec<Vec<f64>> = order.iter().map(|&k| (0..n).map(|i| v[i][k]).collect()).collect();

    let mut residual = 0.0f64;
    for (lam, vec) in values.iter().zip(&vectors) {
        for i in 0..n {
            let mv: f64 = (0..n).map(|j| m[i][j] * vec[j]).sum();
            residual = residual.max((mv - lam * vec[i]).abs());
        }
    }
    if residual > tol * scale.max(f64::MIN_POSITIVE) && scale > 0.0 {
        return Err(Error::Numeric(format!("eigen-decomposition residual {residual:e} exceeds {:e}", tol * scale)));
    }
    Ok(SymEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let e = eig_sym(&[vec![2.0, 1.0], vec![1.0, 2.0]], DEFAULT_TOL).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12 && (e.values[1] - 3.0).abs() < 1e-12);
        assert_eq!(eig_sym(&[vec![3.0]], DEFAULT_TOL).unwrap().values, vec![3.0]);
        let ones = vec![vec![1.0; 3]; 3];
        let e = eig_sym(&ones, DEFAULT_TOL).unwrap();
        for (got, want) in e.values.iter().zip([0.0, 0.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(eig_sym(&[vec![1.0, 2.0], vec![0.0, 1.0]], DEFAULT_TOL).unwrap_err().is_argument());
    }

    proptest! {
        /// Integer eigenvalues from the exact characteristic polynomial agree
        /// with the numeric spectrum.
        #[test]
        fn matches_exact_charpoly(entries in proptest::collection::vec(-5i64..=5, 36), n in 1usize..=6) {
            let mut m = vec![vec![0i64; n]; n];
            for i in 0..n {
                for j in 0..=i {
                    m[i][j] = entries[i * 6 + j];
                    m[j][i] = m[i][j];
                }
            }
            let cp = crate::ff::charpoly_exact(&m).unwrap();
            let mf: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
            let e = eig_sym(&mf, DEFAULT_TOL).unwrap();
            // every integer root r of the charpoly appears in the numeric spectrum
            for r in -40i64..=40 {
                if cp.eval_dyadic(r as f64).0 == num_bigint::BigInt::from(0) {
                    prop_assert!(e.values.iter().any(|&v| (v - r as f64).abs() < 1e-8), "root {}", r);
                }
            }
            // and the vectors are orthonormal
            for a in 0..n {
                for b in 0..n {
                    let dot: f64 = (0..n).map(|i| e.vectors[a][i] * e.vectors[b][i]).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-10);
                }
            }
        }
    }
}
