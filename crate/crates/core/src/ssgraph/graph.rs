//! Vertex enumeration and adjacency of the supersingular l-isogeny graph.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::modpoly::{modular_poly, specialize_x, SUPPORTED_LEVELS};
use crate::error::{arg_err, Error, Result};
use crate::ff::nt::{inv_mod, is_prime};
use crate::ff::{roots_in_fq2, DensePoly, Fp2, Fq2};

/// `H(t) = sum_i C(m, i)^2 t^i` with `m = (p - 1)/2`, reduced mod `p`.
pub fn hasse_polynomial(field: &Fp2) -> DensePoly {
    let p = field.p();
    let m = (p - 1) / 2;
    let mut binom = 1u64;
    let mut coeffs = Vec::with_capacity(m as usize + 1);
    for i in 0..=m {
        if i > 0 {
            binom = binom * ((m - i + 1) % p) % p * inv_mod(i, p).unwrap() % p;
        }
        coeffs.push(binom * binom % p);
    }
    DensePoly::from_u64s(field, &coeffs)
}

/// `j = 256 (t^2 - t + 1)^3 / (t^2 (t - 1)^2)`.
fn legendre_to_j(field: &Fp2, t: Fq2) -> Result<Fq2> {
    let t2 = field.square(t);
    let num = field.sub(field.add(t2, Fq2::ONE), t);
    let num = field.scale(field.mul(field.square(num), num), 256);
    let tm1 = field.sub(t, Fq2::ONE);
    let den = field.mul(t2, field.square(tm1));
    Ok(field.mul(num, field.inv(den)?))
}

/// All supersingular j-invariants in characteristic `p`, sorted.
pub fn supersingular_j(p: u64, seed: u64) -> Result<Vec<Fq2>> {
    if p <= 3 || !is_prime(p) {
        return arg_err(format!("characteristic must be a prime above 3, got {p}"));
    }
    let field = Fp2::new(p)?;
    let hasse = hasse_polynomial(&field);
    let mut js: Vec<Fq2> = roots_in_fq2(&field, &hasse, seed)?
        .into_iter()
        .map(|(t, _)| legendre_to_j(&field, t))
        .collect::<Result<_>>()?;
    js.sort();
    js.dedup();
    Ok(js)
}

/// The `(l + 1)`-regular multigraph on supersingular j-invariants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsogenyGraph {
    pub p: u64,
    pub ell: u64,
    pub vertices: Vec<Fq2>,
    pub adjacency: Vec<Vec<u64>>,
}

impl IsogenyGraph {
    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn adjacency_i64(&self) -> Vec<Vec<i64>> {
        self.adjacency.iter().map(|row| row.iter().map(|&v| v as i64).collect()).collect()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n()).map(|i| self.adjacency[i][i]).sum()
    }

    /// Regularity, symmetry and shape; used after construction and on load.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let d = self.ell + 1;
        if self.adjacency.len() != n || self.adjacency.iter().any(|r| r.len() != n) {
            return Err(Error::Construction(format!("adjacency is not {n}x{n}")));
        }
        for (u, row) in self.adjacency.iter().enumerate() {
            let sum: u64 = row.iter().sum();
            if sum != d {
                return Err(Error::Construction(format!("vertex {} has degree {sum}, expected {d}", self.vertices[u])));
            }
            for v in 0..u {
                if row[v] != self.adjacency[v][u] {
                    return Err(Error::Construction(format!(
                        "adjacency asymmetric between {} and {}",
                        self.vertices[u], self.vertices[v]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if self.adjacency[u][v] > 0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Exact integer commutator `AB - BA == 0`.
    pub fn commutes_with(&self, other: &IsogenyGraph) -> Result<bool> {
        if self.p != other.p || self.vertices != other.vertices {
            return arg_err("graphs are on different vertex sets");
        }
        let a = &self.adjacency;
        let b = &other.adjacency;
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                let ab: u64 = (0..n).map(|k| a[i][k] * b[k][j]).sum();
                let ba: u64 = (0..n).map(|k| b[i][k] * a[k][j]).sum();
                if ab != ba {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: IsogenyGraph = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }
}

/// Checks `p ≡ 1 (mod 12)` prime and a supported `l != p`.
pub fn check_graph_params(p: u64, ell: u64) -> Result<()> {
    if !is_prime(p) || p % 12 != 1 {
        return arg_err(format!("level must be a prime congruent to 1 mod 12, got {p}"));
    }
    if !SUPPORTED_LEVELS.contains(&ell) || ell == p {
        return arg_err(format!("walk prime must be one of {SUPPORTED_LEVELS:?} and differ from the level, got {ell}"));
    }
    Ok(())
}

/// Builds `G(p, l)`: entry `(u, v)` counts `j_v` among the roots of
/// `Phi_l(j_u, Y)` with multiplicity.
pub fn build_graph(p: u64, ell: u64, seed: u64) -> Result<IsogenyGraph> {
    check_graph_params(p, ell)?;
    let vertices = supersingular_j(p, seed)?;
    build_graph_on(p, ell, vertices, seed)
}

/// As [`build_graph`] with a precomputed vertex list.
pub fn build_graph_on(p: u64, ell: u64, vertices: Vec<Fq2>, seed: u64) -> Result<IsogenyGraph> {
    check_graph_params(p, ell)?;
    let expected = ((p - 1) / 12) as usize;
    if vertices.len() != expected {
        return Err(Error::Construction(format!(
            "found {} supersingular j-invariants, expected {expected}",
            vertices.len()
        )));
    }
    let field = Fp2::new(p)?;
    let reduced = modular_poly(ell)?.reduce(&field);
    let index: BTreeMap<Fq2, usize> = vertices.iter().enumerate().map(|(i, &j)| (j, i)).collect();
    let n = vertices.len();
    let mut adjacency = vec![vec![0u64; n]; n];
    for (u, &j) in vertices.iter().enumerate() {
        let fiber = specialize_x(&field, &reduced, j);
        for (root, mult) in roots_in_fq2(&field, &fiber, seed)? {
            let v = *index
                .get(&root)
                .ok_or_else(|| Error::Construction(format!("neighbour {root} of {j} is not supersingular")))?;
            adjacency[u][v] += mult as u64;
        }
    }
    let graph = IsogenyGraph { p, ell, vertices, adjacency };
    graph.validate()?;
    Ok(graph)
}
