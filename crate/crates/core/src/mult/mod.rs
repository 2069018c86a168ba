//! Multiplicities of eigenvalue tuples, Hecke-field degrees read off exact
//! characteristic polynomials, and the closed-form multiplicity bounds.

pub mod factor;

use std::collections::BTreeMap;
use std::str::FromStr;

use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{arg_err, Error, Result};
use crate::ff::charpoly::charpoly_exact;
use crate::ff::intpoly::IntPoly;
use crate::spectra::{EigenSystem, Level};
use factor::{certify_squarefree, degree_patterns, factor_squarefree, squarefree_decomposition, FactorConfig};

/// Eigenvalue coordinates closer than this are treated as equal.
pub const CLUSTER_TOL: f64 = 2e-6;
/// Resolution of the printed tuple keys.
pub const GRID: f64 = 1e-6;
/// Largest Newton correction accepted when matching an eigenvalue to a factor.
pub const MATCH_TOL: f64 = 1e-6;
/// Largest prime with a bundled modular polynomial.
pub const PRIME_CAP: u64 = 13;

/// Eigenvalues `lambda_f(q)` at the primes `q <= y`, rounded to [`GRID`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TupleKey {
    pub entries: Vec<(u64, f64)>,
}

impl TupleKey {
    fn of(es: &EigenSystem, form: usize, primes: &[u64]) -> Self {
        let f = &es.forms[form];
        let entries = primes
            .iter()
            .map(|q| {
                let v = (f.lambda[q] / GRID).round() * GRID;
                (*q, if v == 0.0 { 0.0 } else { v })
            })
            .collect();
        TupleKey { entries }
    }

    pub fn label(&self) -> String {
        self.entries.iter().map(|(q, v)| format!("{q}:{v:.6}")).collect::<Vec<_>>().join(";")
    }

    /// FNV-1a of the label; stable across runs and platforms.
    pub fn hash64(&self) -> u64 {
        self.label().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
    }
}

/// Partition of the forms of one level by their eigenvalues at `q <= y`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Multiplicities {
    pub level: u64,
    pub y: u64,
    pub primes: Vec<u64>,
    pub keys: Vec<TupleKey>,
    /// Form indices in each class, ascending.
    pub members: Vec<Vec<usize>>,
    /// Class of each form.
    pub form_key: Vec<usize>,
}

impl Multiplicities {
    pub fn counts(&self) -> Vec<(&TupleKey, usize)> {
        self.keys.iter().zip(&self.members).map(|(k, m)| (k, m.len())).collect()
    }

    /// Number of forms sharing the tuple of `form`, itself included.
    pub fn multiplicity_of(&self, form: usize) -> usize {
        self.members[self.form_key[form]].len()
    }

    pub fn total(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }

    pub fn max_multiplicity(&self) -> usize {
        self.members.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Primes `q <= y` coprime to the level, all of which must be in the eigensystem.
pub fn usable_primes(es: &EigenSystem, y: u64) -> Result<Vec<u64>> {
    let available: Vec<u64> = es.primes.iter().copied().filter(|&q| q <= PRIME_CAP).collect();
    if y > PRIME_CAP {
        return Err(Error::Coverage(format!(
            "y = {y} exceeds the prime cap {PRIME_CAP}; usable primes: {available:?}"
        )));
    }
    let needed: Vec<u64> = crate::ff::nt::primes_up_to(y).into_iter().filter(|&q| q != es.level).collect();
    if let Some(q) = needed.iter().find(|q| !es.primes.contains(q)) {
        return Err(Error::Coverage(format!("prime {q} <= y = {y} is not computed; usable primes: {available:?}")));
    }
    Ok(needed)
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let next = parent[j];
        parent[j] = r;
        j = next;
    }
    r
}

pub fn multiplicities(es: &EigenSystem, y: u64) -> Result<Multiplicities> {
    if y < 1 {
        return arg_err("y must be positive");
    }
    let primes = usable_primes(es, y)?;
    let s = es.s();
    let mut parent: Vec<usize> = (0..s).collect();
    for i in 0..s {
        for j in i + 1..s {
            let close = primes.iter().all(|q| (es.forms[i].lambda[q] - es.forms[j].lambda[q]).abs() <= CLUSTER_TOL);
            if close {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut root_class = BTreeMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut form_key = vec![0; s];
    for i in 0..s {
        let r = find(&mut parent, i);
        let k = *root_class.entry(r).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[k].push(i);
        form_key[i] = k;
    }
    let keys = members.iter().map(|m| TupleKey::of(es, m[0], &primes)).collect();
    Ok(Multiplicities { level: es.level, y, primes, keys, members, form_key })
}

/// Integer combination `sum c B(ell)` of adjacency matrices.
pub type Operator = Vec<(u64, i64)>;

fn describe(op: &[(u64, i64)]) -> String {
    op.iter().map(|(l, c)| format!("{c}*B({l})")).collect::<Vec<_>>().join(" + ")
}

/// Matrix, eigenvalue on constants and a bound on every eigenvalue.
fn operator_matrix(level: &Level, op: &[(u64, i64)]) -> Result<(Vec<Vec<i64>>, i64, u64)> {
    let n = level.n();
    let mut m = vec![vec![0i64; n]; n];
    let mut trivial = 0i64;
    for &(ell, c) in op {
        let a = level.graph(ell)?.adjacency_i64();
        for (row, arow) in m.iter_mut().zip(&a) {
            for (x, y) in row.iter_mut().zip(arow) {
                *x += c * y;
            }
        }
        trivial += c * (ell as i64 + 1);
    }
    let bound = m.iter().map(|row| row.iter().map(|v| v.unsigned_abs()).sum::<u64>()).max().unwrap_or(0);
    Ok((m, trivial, bound))
}

/// Degrees of the irreducible factors of the characteristic polynomial of a
/// Hecke operator on the cusp forms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreePartition {
    pub level: u64,
    pub operator: Operator,
    /// Ascending.
    pub degrees: Vec<usize>,
    /// True when the charpoly is square-free and every factor is proven irreducible.
    pub conclusive: bool,
    #[serde(skip)]
    pub factors: Vec<IntPoly>,
    pub factor_proven: Vec<bool>,
    pub patterns: Vec<(u64, Vec<usize>)>,
    pub notes: Vec<String>,
}

impl DegreePartition {
    /// Number of forms whose factor has degree `d`.
    pub fn count_of_degree(&self, d: usize) -> usize {
        self.degrees.iter().filter(|&&x| x == d).copied().sum()
    }
}

/// Cusp part of the characteristic polynomial of `sum c B(ell)`.
pub fn cusp_charpoly(level: &Level, op: &[(u64, i64)]) -> Result<(IntPoly, u64)> {
    let (m, trivial, bound) = operator_matrix(level, op)?;
    let full = charpoly_exact(&m)?;
    let cusp = full.div_exact_monic(&IntPoly::linear(trivial)).ok_or_else(|| {
        Error::Construction(format!("{} does not have eigenvalue {trivial} at level {}", describe(op), level.p))
    })?;
    Ok((cusp, bound))
}

/// Vertex permutation `j -> j^p`. It commutes with every adjacency matrix
/// because the modular polynomials have integer coefficients.
fn frobenius_perm(level: &Level, op: &[(u64, i64)]) -> Result<Vec<usize>> {
    let g = level.graph(op[0].0)?;
    for &(ell, _) in op {
        if level.graph(ell)?.vertices != g.vertices {
            return Err(Error::Construction(format!("vertex labels differ between graphs at level {}", level.p)));
        }
    }
    let field = crate::ff::Fp2::new(level.p)?;
    g.vertices
        .iter()
        .map(|&v| {
            g.vertices
                .binary_search(&field.frobenius(v))
                .map_err(|_| Error::Construction(format!("vertex set at level {} is not Frobenius-stable", level.p)))
        })
        .collect()
}

/// Matrices of `m` on the span of Frobenius orbit sums and on the span of
/// the differences `e_i - e_{pi(i)}`, both in integral bases.
fn frobenius_blocks(m: &[Vec<i64>], perm: &[usize]) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let orbits: Vec<Vec<usize>> = (0..perm.len())
        .filter(|&i| perm[i] >= i)
        .map(|i| if perm[i] == i { vec![i] } else { vec![i, perm[i]] })
        .collect();
    let pairs: Vec<usize> = (0..perm.len()).filter(|&i| perm[i] > i).collect();
    let plus =
        orbits.iter().map(|row| orbits.iter().map(|col| col.iter().map(|&k| m[row[0]][k]).sum()).collect()).collect();
    let minus = pairs.iter().map(|&r| pairs.iter().map(|&c| m[r][c] - m[r][perm[c]]).collect()).collect();
    (plus, minus)
}

/// Factors the cusp charpoly of one operator; `None` when it has a repeated
/// root, which leaves the Galois orbits undetermined.
pub fn degree_partition_for(level: &Level, op: &[(u64, i64)], seed: u64) -> Result<Option<DegreePartition>> {
    if op.is_empty() {
        return arg_err("empty operator");
    }
    let (cusp, bound) = cusp_charpoly(level, op)?;
    if !certify_squarefree(&cusp) {
        return Ok(None);
    }
    let (m, trivial, _) = operator_matrix(level, op)?;
    let perm = frobenius_perm(level, op)?;
    let (plus, minus) = frobenius_blocks(&m, &perm);
    let plus_cusp = charpoly_exact(&plus)?
        .div_exact_monic(&IntPoly::linear(trivial))
        .ok_or_else(|| Error::Construction("constants are not in the symmetric block".into()))?;
    let minus_cp = charpoly_exact(&minus)?;
    if plus_cusp.mul(&minus_cp) != cusp {
        return Err(Error::Construction(format!("Frobenius blocks do not recombine at level {}", level.p)));
    }
    let mut cfg = FactorConfig::new(bound);
    cfg.seed = seed;
    let mut pieces = Vec::new();
    for block in [&plus_cusp, &minus_cp] {
        let fz = factor_squarefree(block, &cfg).expect("a divisor of a square-free polynomial is square-free");
        pieces.extend(fz.factors.into_iter().zip(fz.irreducible));
    }
    pieces.sort_by(|a, b| (a.0.degree(), a.0.coeffs()).cmp(&(b.0.degree(), b.0.coeffs())));
    let conclusive = pieces.iter().all(|(_, ok)| *ok);
    let mut notes = vec![format!(
        "Frobenius blocks of degree {} and {}",
        plus_cusp.degree().unwrap_or(0),
        minus_cp.degree().unwrap_or(0)
    )];
    if !conclusive {
        notes.push("a factor above the reconstruction cap could not be proven irreducible".to_string());
    }
    Ok(Some(DegreePartition {
        level: level.p,
        operator: op.to_vec(),
        degrees: pieces.iter().map(|(g, _)| g.degree().unwrap()).collect(),
        conclusive,
        factor_proven: pieces.iter().map(|(_, ok)| *ok).collect(),
        factors: pieces.into_iter().map(|(g, _)| g).collect(),
        patterns: degree_patterns(&cusp, cfg.aux_primes),
        notes,
    }))
}

/// Degree partition from `B(ell0)`, falling back to combinations with the
/// other computed operators when `B(ell0)` has repeated eigenvalues on the
/// cusp forms.
pub fn degree_partition(level: &Level, ell0: u64, seed: u64) -> Result<DegreePartition> {
    level.graph(ell0)?;
    let others: Vec<u64> = level.graphs.keys().copied().filter(|&l| l != ell0).collect();
    let mut ops: Vec<Operator> = vec![vec![(ell0, 1)]];
    for &ell1 in &others {
        for k in 1..=3 {
            ops.push(vec![(ell0, 1), (ell1, k)]);
        }
    }
    if others.len() > 1 {
        let mut all = vec![(ell0, 1)];
        all.extend(others.iter().enumerate().map(|(i, &l)| (l, i as i64 + 2)));
        ops.push(all);
    }
    let mut notes = Vec::new();
    for op in &ops {
        if let Some(mut dp) = degree_partition_for(level, op, seed)? {
            notes.append(&mut dp.notes);
            dp.notes = notes;
            return Ok(dp);
        }
        notes.push(format!("{} has a repeated eigenvalue on the cusp forms", describe(op)));
    }
    // every operator tried has repeated roots; report the square-free parts of the first
    let (cusp, _) = cusp_charpoly(level, &ops[0])?;
    let mut degrees = Vec::new();
    let mut factors = Vec::new();
    for (g, i) in squarefree_decomposition(&cusp) {
        notes.push(format!("square-free part of degree {} has multiplicity {i}", g.degree().unwrap()));
        for _ in 0..i {
            degrees.push(g.degree().unwrap());
            factors.push(g.clone());
        }
    }
    degrees.sort_unstable();
    let k = factors.len();
    Ok(DegreePartition {
        level: level.p,
        operator: ops[0].clone(),
        degrees,
        conclusive: false,
        factors,
        factor_proven: vec![false; k],
        patterns: Vec::new(),
        notes,
    })
}

/// `|g(x) / g'(x)|` with both values computed exactly at the dyadic `x`.
fn newton_step(g: &IntPoly, x: f64) -> f64 {
    let (n1, e1) = g.eval_dyadic(x);
    let (n2, e2) = g.derivative().eval_dyadic(x);
    if n1.is_zero() {
        return 0.0;
    }
    if n2.is_zero() {
        return f64::INFINITY;
    }
    let r = BigRational::new(n1 << e2 as usize, n2 << e1 as usize);
    r.to_f64().map_or(f64::INFINITY, f64::abs)
}

/// Factor degree of each form, matched through its eigenvalue of the
/// partition's operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormDegrees {
    pub degrees: Vec<Option<usize>>,
    /// Forms matching no factor, several factors, or an over-full factor.
    pub ambiguous: Vec<usize>,
}

pub fn form_degrees(es: &EigenSystem, dp: &DegreePartition) -> Result<FormDegrees> {
    let s = es.s();
    let mut assigned: Vec<Option<usize>> = vec![None; s];
    let mut ambiguous = Vec::new();
    for (i, f) in es.forms.iter().enumerate() {
        let mut x = 0.0;
        for &(ell, c) in &dp.operator {
            let a = f.a.get(&ell).ok_or_else(|| Error::Coverage(format!("form {i} has no eigenvalue at {ell}")))?;
            x += c as f64 * a;
        }
        let hits: Vec<usize> = (0..dp.factors.len()).filter(|&k| newton_step(&dp.factors[k], x) <= MATCH_TOL).collect();
        match hits.as_slice() {
            [k] => assigned[i] = Some(*k),
            _ => ambiguous.push(i),
        }
    }
    let mut load = vec![0usize; dp.factors.len()];
    for k in assigned.iter().flatten() {
        load[*k] += 1;
    }
    let mut degrees = vec![None; s];
    for i in 0..s {
        if let Some(k) = assigned[i] {
            if load[k] <= dp.degrees_of_factor(k) {
                degrees[i] = Some(dp.degrees_of_factor(k));
            } else {
                ambiguous.push(i);
            }
        }
    }
    ambiguous.sort_unstable();
    Ok(FormDegrees { degrees, ambiguous })
}

impl DegreePartition {
    fn degrees_of_factor(&self, k: usize) -> usize {
        self.factors[k].degree().unwrap_or(0)
    }
}

/// `T(y)_d`: number of distinct tuple keys among forms of factor degree `d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TupleDegreeCounts {
    pub counts: BTreeMap<usize, usize>,
    pub ambiguous: Vec<usize>,
}

pub fn tuple_count_by_degree(mult: &Multiplicities, degrees: &FormDegrees) -> TupleDegreeCounts {
    let mut keys: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, d) in degrees.degrees.iter().enumerate() {
        if let Some(d) = d {
            let ks = keys.entry(*d).or_default();
            if !ks.contains(&mult.form_key[i]) {
                ks.push(mult.form_key[i]);
            }
        }
    }
    TupleDegreeCounts {
        counts: keys.into_iter().map(|(d, ks)| (d, ks.len())).collect(),
        ambiguous: degrees.ambiguous.clone(),
    }
}

/// One CSV row per tuple key.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultRow {
    pub level: u64,
    pub y: u64,
    pub tuple_key_hash: String,
    pub count: usize,
    /// Common factor degree of the members, if known and shared.
    pub degree: Option<usize>,
}

pub fn mult_rows(mult: &Multiplicities, degrees: Option<&FormDegrees>) -> Vec<MultRow> {
    mult.keys
        .iter()
        .zip(&mult.members)
        .map(|(key, members)| {
            let degree = degrees.and_then(|fd| {
                let first = fd.degrees[members[0]]?;
                members.iter().all(|&i| fd.degrees[i] == Some(first)).then_some(first)
            });
            MultRow {
                level: mult.level,
                y: mult.y,
                tuple_key_hash: format!("{:016x}", key.hash64()),
                count: members.len(),
                degree,
            }
        })
        .collect()
}

pub fn mult_csv(rows: &[MultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["level", "y", "tuple_key_hash", "count", "degree"])?;
    for r in rows {
        w.write_record([
            r.level.to_string(),
            r.y.to_string(),
            r.tuple_key_hash.clone(),
            r.count.to_string(),
            r.degree.map_or_else(|| "NA".to_string(), |d| d.to_string()),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// Multiplicity of a tuple at the primes up to `(log N)^beta`.
    Thm3,
    /// Number of forms with Hecke field of degree `d`.
    Thm4,
    /// As `Thm4`, for levels that are not `T`-super-smooth.
    Thm5,
}

impl FromStr for BoundKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm3" => Ok(BoundKind::Thm3),
            "thm4" => Ok(BoundKind::Thm4),
            "thm5" => Ok(BoundKind::Thm5),
            _ => arg_err(format!("unknown bound kind {s:?}; expected thm3, thm4 or thm5")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundParams {
    pub kind: BoundKind,
    pub log_n: f64,
    pub beta: Rational64,
    pub d: u32,
    pub t: u32,
    /// Family size the bound is relative to.
    pub s: Option<f64>,
    pub empirical: Option<u64>,
}

/// Bound `exp(-c (log N)^beta) s` with every lower-order term set to zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub log_n: f64,
    pub y: f64,
    pub beta: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    /// Exact coefficient `c` as "a/b".
    pub coefficient: String,
    pub coefficient_f64: f64,
    /// `exp(-c y)`.
    pub bound_factor: f64,
    pub log_bound_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_bound_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<u64>,
    /// `c <= 0`: the statement gives nothing.
    pub vacuous: bool,
    pub lower_order_terms_dropped: bool,
    pub notes: Vec<String>,
}

pub fn bound_coefficient(kind: BoundKind, beta: Rational64, d: u32, t: u32) -> Rational64 {
    let base = (Rational64::from_integer(1) - beta) / beta;
    match kind {
        BoundKind::Thm3 => base,
        BoundKind::Thm4 => base - Rational64::new(d as i64, 2),
        BoundKind::Thm5 => base - Rational64::new(d as i64 * t as i64, 2),
    }
}

pub fn bound_eval(params: &BoundParams) -> Result<BoundReport> {
    let beta = params.beta;
    if beta <= Rational64::zero() || beta >= Rational64::from_integer(1) {
        return arg_err(format!("beta = {beta} must lie in (0, 1)"));
    }
    if !(params.log_n > 0.0) {
        return arg_err("log N must be positive");
    }
    let c = bound_coefficient(params.kind, beta, params.d, params.t);
    let cf = *c.numer() as f64 / *c.denom() as f64;
    let bf = *beta.numer() as f64 / *beta.denom() as f64;
    let y = params.log_n.powf(bf);
    let log_factor = -cf * y;
    let vacuous = c <= Rational64::zero();
    let mut notes = Vec::new();
    if vacuous {
        notes.push(format!("coefficient {c} is not positive; the bound is vacuous"));
    }
    if params.kind == BoundKind::Thm5 {
        notes.push("assumes the level is not T-super-smooth".to_string());
    }
    let (d, t) = match params.kind {
        BoundKind::Thm3 => (None, None),
        BoundKind::Thm4 => (Some(params.d), None),
        BoundKind::Thm5 => (Some(params.d), Some(params.t)),
    };
    Ok(BoundReport {
        kind: params.kind,
        log_n: params.log_n,
        y,
        beta: format!("{}/{}", beta.numer(), beta.denom()),
        d,
        t,
        coefficient: format!("{}/{}", c.numer(), c.denom()),
        coefficient_f64: cf,
        bound_factor: log_factor.exp(),
        log_bound_factor: log_factor,
        bound_value: params.s.map(|s| s * log_factor.exp()),
        log_bound_value: params.s.map(|s| s.ln() + log_factor),
        empirical: params.empirical,
        vacuous,
        lower_order_terms_dropped: true,
        notes,
    })
}

/// [`bound_eval`] at a computed level, with its empirical counterpart.
pub fn bound_at_level(
    level: &Level,
    kind: BoundKind,
    beta: Rational64,
    d: u32,
    t: u32,
    seed: u64,
) -> Result<BoundReport> {
    let es = &level.system;
    let log_n = (level.p as f64).ln();
    let bf = *beta.numer() as f64 / *beta.denom() as f64;
    let empirical = match kind {
        BoundKind::Thm3 => {
            let y = log_n.powf(bf).floor() as u64;
            multiplicities(es, y.max(1))?.max_multiplicity() as u64
        }
        BoundKind::Thm4 | BoundKind::Thm5 => {
            let dp = degree_partition(
                level,
                *level
                    .graphs
                    .keys()
                    .next()
                    .ok_or_else(|| Error::Coverage(format!("no graphs at level {}", level.p)))?,
                seed,
            )?;
            dp.count_of_degree(d as usize) as u64
        }
    };
    let mut report =
        bound_eval(&BoundParams { kind, log_n, beta, d, t, s: Some(es.s() as f64), empirical: Some(empirical) })?;
    report.notes.push(format!("level {}", level.p));
    Ok(report)
}
