//! Simultaneous eigenvectors of the graph family at one level, and the
//! normalized Hecke eigenvalues they carry.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eig::{eig_sym, DEFAULT_TOL};
use crate::error::{arg_err, Error, Result};
use crate::ff::nt::{cusp_dim_prime, factorize};
use crate::output::fmt_f64;
use crate::ssgraph::graph::{build_graph_on, check_graph_params};
use crate::ssgraph::{supersingular_j, IsogenyGraph};

pub const RESIDUAL_TOL: f64 = 1e-8;
pub const CLAMP_TOL: f64 = 1e-9;
const MAX_ATTEMPTS: u64 = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    pub id: usize,
    pub level: u64,
    /// Unnormalized eigenvalue of the adjacency matrix at each prime.
    pub a: BTreeMap<u64, f64>,
    /// `a / sqrt(l)`.
    pub lambda: BTreeMap<u64, f64>,
    /// `arccos(lambda / 2)` in `[0, pi]`.
    pub theta: BTreeMap<u64, f64>,
}

impl Form {
    /// Normalized eigenvalue at any `n` coprime to the level whose prime
    /// factors are all covered.
    pub fn lambda_at(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return arg_err("index must be positive");
        }
        if n.is_multiple_of(self.level) {
            return arg_err(format!("{n} is not coprime to the level {}", self.level));
        }
        let mut acc = 1.0;
        for (q, e) in factorize(n) {
            let lq = *self.lambda.get(&q).ok_or_else(|| {
                Error::Coverage(format!(
                    "prime {q} of {n} is outside the computed primes {:?}",
                    self.lambda.keys().collect::<Vec<_>>()
                ))
            })?;
            acc *= prime_power_lambda(lq, e);
        }
        Ok(acc)
    }
}

/// `lambda(q^k)` from `lambda(q)` by `x_{k+1} = lambda x_k - x_{k-1}`.
pub fn prime_power_lambda(lq: f64, k: u32) -> f64 {
    let (mut prev, mut cur) = (1.0, lq);
    if k == 0 {
        return 1.0;
    }
    for _ in 1..k {
        let next = lq * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    pub level: u64,
    pub primes: Vec<u64>,
    pub forms: Vec<Form>,
    /// Per form, the largest `|B v - a v|` across the primes.
    pub residuals: Vec<f64>,
}

impl EigenSystem {
    pub fn s(&self) -> usize {
        self.forms.len()
    }

    /// Rows `form_id,prime,a,lambda,theta`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["form_id", "prime", "a", "lambda", "theta"])?;
        for f in &self.forms {
            for &q in &self.primes {
                w.write_record([
                    f.id.to_string(),
                    q.to_string(),
                    fmt_f64(f.a[&q]),
                    fmt_f64(f.lambda[&q]),
                    fmt_f64(f.theta[&q]),
                ])?;
            }
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
            .map_err(|e| Error::Data(e.to_string()))
    }

    /// Inverse of [`EigenSystem::to_csv`]; residuals are not stored and come back as zero.
    pub fn from_csv(level: u64, text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != ["form_id", "prime", "a", "lambda", "theta"] {
            return Err(Error::Data(format!("unexpected spectra header {header:?}")));
        }
        let mut forms: BTreeMap<usize, Form> = BTreeMap::new();
        let mut primes: Vec<u64> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let bad = || Error::Data(format!("malformed spectra row {rec:?}"));
            let id: usize = rec[0].parse().map_err(|_| bad())?;
            let q: u64 = rec[1].parse().map_err(|_| bad())?;
            let vals: Vec<f64> = (2..5).map(|i| rec[i].parse().map_err(|_| bad())).collect::<Result<_>>()?;
            if !primes.contains(&q) {
                primes.push(q);
            }
            let f = forms.entry(id).or_insert_with(|| Form {
                id,
                level,
                a: BTreeMap::new(),
                lambda: BTreeMap::new(),
                theta: BTreeMap::new(),
            });
            f.a.insert(q, vals[0]);
            f.lambda.insert(q, vals[1]);
            f.theta.insert(q, vals[2]);
        }
        let forms: Vec<Form> = forms.into_values().collect();
        if forms.iter().enumerate().any(|(i, f)| f.id != i || f.a.len() != primes.len()) {
            return Err(Error::Data("spectra table is not a complete form x prime grid".into()));
        }
        let residuals = vec![0.0; forms.len()];
        Ok(EigenSystem { level, primes, forms, residuals })
    }
}

/// Builds the graphs for every prime and extracts the eigensystem.
pub fn eigensystem(p: u64, primes: &[u64], seed: u64) -> Result<EigenSystem> {
    let graphs = level_graphs(p, primes, seed)?;
    eigensystem_from_graphs(&graphs, seed)
}

/// `G(p, l)` for each `l`, sharing one vertex enumeration.
pub fn level_graphs(p: u64, primes: &[u64], seed: u64) -> Result<Vec<IsogenyGraph>> {
    if primes.is_empty() {
        return arg_err("at least one prime is required");
    }
    for (i, &q) in primes.iter().enumerate() {
        check_graph_params(p, q)?;
        if primes[..i].contains(&q) {
            return arg_err(format!("prime {q} listed twice"));
        }
    }
    let vertices = supersingular_j(p, seed)?;
    primes.iter().map(|&q| build_graph_on(p, q, vertices.clone(), seed)).collect()
}

fn to_f64(m: &[Vec<u64>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect()
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Common eigenbasis from one seeded random combination of the adjacency
/// matrices, retried with fresh coefficients if any residual is too large.
pub fn eigensystem_from_graphs(graphs: &[IsogenyGraph], seed: u64) -> Result<EigenSystem> {
    let first = graphs.first().ok_or_else(|| Error::Argument("no graphs supplied".into()))?;
    let level = first.p;
    for g in graphs {
        if !first.commutes_with(g)? {
            return Err(Error::Construction(format!(
                "adjacency matrices for l = {} and l = {} do not commute",
                first.ell, g.ell
            )));
        }
    }
    let n = first.n();
    let primes: Vec<u64> = graphs.iter().map(|g| g.ell).collect();
    let mats: Vec<Vec<Vec<f64>>> = graphs.iter().map(|g| to_f64(&g.adjacency)).collect();

    let mut last_failure = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let coeffs: Vec<f64> = (0..mats.len()).map(|_| rng.gen_range(512..1536) as f64 / 1024.0).collect();
        let combo: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| mats.iter().zip(&coeffs).map(|(m, c)| c * m[i][j]).sum()).collect())
            .collect();
        let eig = eig_sym(&combo, DEFAULT_TOL)?;

        let inv_sqrt_n = 1.0 / (n as f64).sqrt();
        let trivial = (0..n)
            .max_by(|&a, &b| {
                let da = eig.vectors[a].iter().sum::<f64>().abs();
                let db = eig.vectors[b].iter().sum::<f64>().abs();
                da.total_cmp(&db)
            })
            .expect("at least one vertex");
        let alignment = eig.vectors[trivial].iter().sum::<f64>().abs() * inv_sqrt_n;
        if (alignment - 1.0).abs() > 1e-8 {
            return Err(Error::Numeric(format!("constant vector not isolated (alignment {alignment})")));
        }

        let mut raw = Vec::new();
        let mut worst: Option<(usize, f64)> = None;
        for k in (0..n).filter(|&k| k != trivial) {
            let v = &eig.vectors[k];
            let mut a = BTreeMap::new();
            let mut res = 0.0f64;
            for (m, &q) in mats.iter().zip(&primes) {
                let mv = matvec(m, v);
                let rq = dot(v, &mv);
                let r = mv.iter().zip(v).map(|(x, y)| (x - rq * y).powi(2)).sum::<f64>().sqrt();
                res = res.max(r);
                a.insert(q, rq);
            }
            if res > RESIDUAL_TOL && worst.is_none_or(|(_, w)| res > w) {
                worst = Some((k, res));
            }
            raw.push((a, res));
        }
        if let Some((k, res)) = worst {
            let lo = k.saturating_sub(1);
            let hi = (k + 1).min(n - 1);
            last_failure = format!(
                "residual {res:e} at combined eigenvalue {:.12} (cluster {:?})",
                eig.values[k],
                &eig.values[lo..=hi]
            );
            continue;
        }
        return finish(level, primes, raw);
    }
    Err(Error::Degeneracy(format!("after {MAX_ATTEMPTS} attempts: {last_failure}")))
}

fn finish(level: u64, primes: Vec<u64>, raw: Vec<(BTreeMap<u64, f64>, f64)>) -> Result<EigenSystem> {
    let mut rows = Vec::with_capacity(raw.len());
    for (a, res) in raw {
        let mut lambda = BTreeMap::new();
        let mut theta = BTreeMap::new();
        for (&q, &aq) in &a {
            let l = aq / (q as f64).sqrt();
            let half = l / 2.0;
            if half.abs() > 1.0 + CLAMP_TOL {
                return Err(Error::Numeric(format!("eigenvalue {aq} at l = {q} violates the Ramanujan bound")));
            }
            lambda.insert(q, l);
            theta.insert(q, half.clamp(-1.0, 1.0).acos());
        }
        rows.push((a, lambda, theta, res));
    }
    rows.sort_by(|x, y| {
        primes.iter().map(|q| x.0[q].total_cmp(&y.0[q])).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let expected = cusp_dim_prime(level).unwrap_or(0) as usize;
    if rows.len() != expected {
        return Err(Error::Construction(format!("{} forms found, expected {expected}", rows.len())));
    }
    let mut forms = Vec::with_capacity(rows.len());
    let mut residuals = Vec::with_capacity(rows.len());
    for (id, (a, lambda, theta, res)) in rows.into_iter().enumerate() {
        forms.push(Form { id, level, a, lambda, theta });
        residuals.push(res);
    }
    Ok(EigenSystem { level, primes, forms, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_37_two_rational_forms() {
        let es = eigensystem(37, &[2], 0).unwrap();
        assert_eq!(es.s(), 2);
        assert!((es.forms[0].a[&2] + 2.0).abs() < 1e-10);
        assert!(es.forms[1].a[&2].abs() < 1e-10);
        let f = &es.forms[0];
        assert!((f.lambda_at(4).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(f.lambda_at(1).unwrap(), 1.0);
        assert!(matches!(f.lambda_at(3), Err(Error::Coverage(_))));
        assert!(f.lambda_at(74).unwrap_err().is_argument());
    }

    #[test]
    fn level_13_is_empty() {
        let es = eigensystem(13, &[2, 3], 0).unwrap();
        assert_eq!(es.s(), 0);
    }

    #[test]
    fn trace_sum_rule_and_bounds() {
        let primes = [2, 3, 5, 7];
        let graphs = level_graphs(181, &primes, 4).unwrap();
        let es = eigensystem_from_graphs(&graphs, 4).unwrap();
        assert_eq!(es.s(), 14);
        for g in &graphs {
            let sum: f64 = es.forms.iter().map(|f| f.a[&g.ell]).sum();
            assert!((sum + (g.ell + 1) as f64 - g.trace() as f64).abs() < 1e-6);
        }
        for (f, r) in es.forms.iter().zip(&es.residuals) {
            assert!(*r <= RESIDUAL_TOL);
            for &q in &primes {
                assert!(f.a[&q].abs() <= 2.0 * (q as f64).sqrt() + 1e-9);
                assert!((f.lambda[&q] - 2.0 * f.theta[&q].cos()).abs() < 1e-9);
                for k in 0..8u32 {
                    let th = f.theta[&q];
                    let u = if th.sin().abs() < 1e-7 {
                        // continuous extension at the endpoints
                        let sign = if th < 1.0 { 1.0 } else { (-1.0f64).powi(k as i32) };
                        sign * (k + 1) as f64
                    } else {
                        ((k + 1) as f64 * th).sin() / th.sin()
                    };
                    assert!((prime_power_lambda(f.lambda[&q], k) - u).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn seeds_agree_and_csv_roundtrips() {
        let a = eigensystem(109, &[2, 3], 1).unwrap();
        let b = eigensystem(109, &[2, 3], 2).unwrap();
        for (x, y) in a.forms.iter().zip(&b.forms) {
            for q in [2, 3] {
                assert!((x.a[&q] - y.a[&q]).abs() < 1e-9);
            }
        }
        let text = a.to_csv().unwrap();
        assert!(text.starts_with("form_id,prime,a,lambda,theta\n"));
        let back = EigenSystem::from_csv(109, &text).unwrap();
        assert_eq!(back.forms, a.forms);
    }

    #[test]
    fn rejects_bad_prime_lists() {
        assert!(eigensystem(37, &[], 0).unwrap_err().is_argument());
        assert!(eigensystem(37, &[2, 2], 0).unwrap_err().is_argument());
        assert!(eigensystem(37, &[17], 0).unwrap_err().is_argument());
    }
}
