//! On-disk cache for isogeny graphs (JSON) and eigensystems (CSV).
//!
//! Entries are keyed by `(format version, p, l, seed)`; the version is part of
//! the file name, so bumping it leaves old entries unread. An entry that fails
//! to parse or validate is recomputed and overwritten with a warning.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};
use crate::ff::nt::cusp_dim_prime;
use crate::output::{fmt_f64, parse_f64};
use crate::spectra::{eigensystem_from_graphs, EigenSystem, Level};
use crate::ssgraph::{build_graph, IsogenyGraph};

pub const CACHE_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "HECKELAB_CACHE_DIR";

const RESIDUAL_PREFIX: &str = "# residuals:";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lookup {
    Disabled,
    Hit,
    Miss,
    Corrupt(String),
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
    version: u32,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self::with_version(dir, CACHE_VERSION)
    }

    pub fn with_version(dir: Option<PathBuf>, version: u32) -> Self {
        Cache { dir, version }
    }

    /// Directory from the argument, else from the environment.
    pub fn from_env(dir: Option<PathBuf>) -> Self {
        Self::new(dir.or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from)))
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn graph_path(&self, p: u64, ell: u64, seed: u64) -> Option<PathBuf> {
        let v = self.version;
        self.dir.as_ref().map(|d| d.join(format!("graph-v{v}-p{p}-l{ell}-s{seed}.json")))
    }

    pub fn spectra_path(&self, p: u64, primes: &[u64], seed: u64) -> Option<PathBuf> {
        let v = self.version;
        let ls: Vec<String> = primes.iter().map(u64::to_string).collect();
        self.dir.as_ref().map(|d| d.join(format!("spectra-v{v}-p{p}-l{}-s{seed}.csv", ls.join("_"))))
    }

    /// Loads `G(p, l)` or builds and stores it.
    pub fn graph(&self, p: u64, ell: u64, seed: u64) -> Result<IsogenyGraph> {
        Ok(self.graph_traced(p, ell, seed)?.0)
    }

    pub fn graph_traced(&self, p: u64, ell: u64, seed: u64) -> Result<(IsogenyGraph, Lookup)> {
        let Some(path) = self.graph_path(p, ell, seed) else {
            return Ok((build_graph(p, ell, seed)?, Lookup::Disabled));
        };
        let status = match fs::read_to_string(&path) {
            Ok(text) => match IsogenyGraph::from_json(&text) {
                Ok(g) if g.p == p && g.ell == ell => return Ok((g, Lookup::Hit)),
                Ok(_) => Lookup::Corrupt("key mismatch".into()),
                Err(e) => Lookup::Corrupt(e.to_string()),
            },
            Err(_) => Lookup::Miss,
        };
        if let Lookup::Corrupt(why) = &status {
            warn!("corrupted cache entry {}: {why}; recomputing", path.display());
        }
        let g = build_graph(p, ell, seed)?;
        store(&path, g.to_json()?.as_bytes())?;
        Ok((g, status))
    }

    /// Eigensystem of a graph family, read from or written to the cache.
    pub fn eigensystem(&self, graphs: &[IsogenyGraph], seed: u64) -> Result<EigenSystem> {
        Ok(self.eigensystem_traced(graphs, seed)?.0)
    }

    pub fn eigensystem_traced(&self, graphs: &[IsogenyGraph], seed: u64) -> Result<(EigenSystem, Lookup)> {
        let (p, primes) = match graphs.first() {
            Some(g) => (g.p, graphs.iter().map(|g| g.ell).collect::<Vec<_>>()),
            None => return Err(Error::Argument("no graphs given".into())),
        };
        let Some(path) = self.spectra_path(p, &primes, seed) else {
            return Ok((eigensystem_from_graphs(graphs, seed)?, Lookup::Disabled));
        };
        let status = match fs::read_to_string(&path) {
            Ok(text) => match read_spectra(p, &primes, &text) {
                Ok(es) => return Ok((es, Lookup::Hit)),
                Err(e) => Lookup::Corrupt(e.to_string()),
            },
            Err(_) => Lookup::Miss,
        };
        if let Lookup::Corrupt(why) = &status {
            warn!("corrupted cache entry {}: {why}; recomputing", path.display());
        }
        let es = eigensystem_from_graphs(graphs, seed)?;
        store(&path, write_spectra(&es)?.as_bytes())?;
        Ok((es, status))
    }

    /// Graphs for every prime plus their eigensystem.
    pub fn level(&self, p: u64, primes: &[u64], seed: u64) -> Result<Level> {
        let graphs = primes.iter().map(|&ell| self.graph(p, ell, seed)).collect::<Result<Vec<_>>>()?;
        let system = self.eigensystem(&graphs, seed)?;
        Ok(Level { p, graphs: graphs.into_iter().map(|g| (g.ell, g)).collect(), system })
    }
}

/// Spectra table preceded by one comment line holding the residuals.
pub fn write_spectra(es: &EigenSystem) -> Result<String> {
    let res: Vec<String> = es.residuals.iter().map(|&r| fmt_f64(r)).collect();
    Ok(format!("{RESIDUAL_PREFIX}{}\n{}", res.join(";"), es.to_csv()?))
}

pub fn read_spectra(p: u64, primes: &[u64], text: &str) -> Result<EigenSystem> {
    let (first, body) = text.split_once('\n').ok_or_else(|| Error::Data("truncated spectra file".into()))?;
    let list = first.strip_prefix(RESIDUAL_PREFIX).ok_or_else(|| Error::Data("missing residual line".into()))?;
    let mut es = EigenSystem::from_csv(p, body)?;
    let residuals: Vec<f64> = if list.is_empty() {
        Vec::new()
    } else {
        list.split(';')
            .map(|s| parse_f64(s).ok_or_else(|| Error::Data(format!("bad residual {s:?}"))))
            .collect::<Result<_>>()?
    };
    let expected = cusp_dim_prime(p).unwrap_or(0) as usize;
    if residuals.len() != expected || es.s() != expected {
        return Err(Error::Data(format!("expected {expected} forms, found {}", es.s())));
    }
    if es.s() > 0 && es.primes != primes {
        return Err(Error::Data(format!("primes {:?} differ from key {primes:?}", es.primes)));
    }
    es.primes = primes.to_vec();
    es.residuals = residuals;
    Ok(es)
}

fn store(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
