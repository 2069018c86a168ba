//! Smoothed truncations of `L(sym^2 f, 1)` and the harmonic weights they
//! induce.

use std::f64::consts::PI;

use crate::error::{arg_err, Result};
use crate::ff::nt::factorize;
use crate::output::fmt_f64;
use crate::spectra::{EigenSystem, Form};
use crate::verify::ReportRow;

pub const ZETA2: f64 = PI * PI / 6.0;
pub const DEFAULT_X: u64 = 169;

/// `exp(1 - 1/(1 - x^2))` on `(-1, 1)`, zero elsewhere.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

fn lambda_covered(f: &Form, n: u64) -> Option<f64> {
    factorize(n).iter().all(|(q, _)| f.lambda.contains_key(q)).then(|| f.lambda_at(n).ok()).flatten()
}

/// `sum_{t^2 k = nu, (t, N) = 1} lambda_f(k^2)`, with the number of terms
/// skipped because `k` has a prime factor outside the computed primes.
pub fn sym2_coeff(f: &Form, nu: u64) -> Result<(f64, usize)> {
    if nu == 0 {
        return arg_err("index must be positive");
    }
    let mut total = 0.0;
    let mut skipped = 0;
    let mut t = 1u64;
    while t * t <= nu {
        if nu.is_multiple_of(t * t) && !t.is_multiple_of(f.level) {
            let k = nu / (t * t);
            if k.is_multiple_of(f.level) {
                // lambda_f at multiples of the level is not part of the family
                skipped += 1;
            } else {
                match lambda_covered(f, k * k) {
                    Some(v) => total += v,
                    None => skipped += 1,
                }
            }
        }
        t += 1;
    }
    Ok((total, skipped))
}

/// `sum_{nu <= x} lambda_sym2(nu)/nu * bump(nu/x)` plus the count of skipped terms.
pub fn l_sym2_smoothed(f: &Form, x: u64) -> Result<(f64, usize)> {
    if x < 2 {
        return arg_err(format!("truncation must be at least 2, got {x}"));
    }
    let mut total = 0.0;
    let mut skipped = 0;
    for nu in 1..x {
        let (c, s) = sym2_coeff(f, nu)?;
        total += c / nu as f64 * bump(nu as f64 / x as f64);
        skipped += s;
    }
    Ok((total, skipped))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicWeights {
    pub level: u64,
    pub x: u64,
    pub norm: WeightNorm,
    pub l_values: Vec<f64>,
    pub weights: Vec<f64>,
    /// Terms dropped per form for lack of coverage.
    pub skipped_terms: usize,
    /// Forms whose truncated L-value is not positive.
    pub nonpositive: Vec<usize>,
}

impl HarmonicWeights {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["level", "form_id", "x", "L_sym2", "weight"])?;
        for (i, (l, wt)) in self.l_values.iter().zip(&self.weights).enumerate() {
            w.write_record([self.level.to_string(), i.to_string(), self.x.to_string(), fmt_f64(*l), fmt_f64(*wt)])?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Denominator used in place of the family size in the weights.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WeightNorm {
    /// `s(p)`, the number of forms.
    #[default]
    Dimension,
    /// `psi(p) / 12`, the volume normalization; equal to `s(p)` up to `O(1)`.
    Index,
}

/// `w_f = zeta(2) / (s L_f)` from the truncated L-values.
pub fn harmonic_weights(es: &EigenSystem, x: u64) -> Result<HarmonicWeights> {
    harmonic_weights_with(es, x, WeightNorm::Dimension)
}

pub fn harmonic_weights_with(es: &EigenSystem, x: u64, norm: WeightNorm) -> Result<HarmonicWeights> {
    if es.s() == 0 {
        return arg_err(format!("level {} has no cusp forms", es.level));
    }
    let s = match norm {
        WeightNorm::Dimension => es.s() as f64,
        WeightNorm::Index => crate::ff::nt::dedekind_psi(es.level) as f64 / 12.0,
    };
    let mut l_values = Vec::with_capacity(es.s());
    let mut skipped_terms = 0;
    for f in &es.forms {
        let (l, skipped) = l_sym2_smoothed(f, x)?;
        l_values.push(l);
        skipped_terms = skipped;
    }
    let nonpositive = (0..l_values.len()).filter(|&i| l_values[i] <= 0.0).collect();
    let weights = l_values.iter().map(|l| ZETA2 / (s * l)).collect();
    Ok(HarmonicWeights { level: es.level, x, norm, l_values, weights, skipped_terms, nonpositive })
}

/// Weighted `sum^h lambda_f(m) lambda_f(n)` against `delta(m, n)`.
pub fn harmonic_check(es: &EigenSystem, weights: &HarmonicWeights, m: u64, n: u64) -> Result<ReportRow> {
    let mut lhs = 0.0;
    for (f, w) in es.forms.iter().zip(&weights.weights) {
        lhs += w * f.lambda_at(m)? * f.lambda_at(n)?;
    }
    let main = if m == n { 1.0 } else { 0.0 };
    let residual = lhs - main;
    let scale = ((m as f64) * (n as f64)).powf(0.25) / es.level as f64;
    let flag = (!weights.nonpositive.is_empty())
        .then(|| format!("{} forms with non-positive truncated L-value", weights.nonpositive.len()));
    Ok(ReportRow {
        p: es.level,
        m: m.to_string(),
        n: n.to_string(),
        lhs,
        main,
        residual,
        scale,
        ratio: residual.abs() / scale,
        flag,
    })
}

/// Undoes the weights inside the harmonic sum: `sum_f (w_f a_f) / (s w_f)`.
pub fn unweighted_from_harmonic(es: &EigenSystem, weights: &HarmonicWeights, m: u64, n: u64) -> Result<f64> {
    if es.s() == 0 {
        return arg_err(format!("level {} has no cusp forms", es.level));
    }
    let s = es.s() as f64;
    let mut acc = 0.0;
    for (f, w) in es.forms.iter().zip(&weights.weights) {
        let term = w * f.lambda_at(m)? * f.lambda_at(n)?;
        acc += term / (s * w);
    }
    Ok(acc)
}
