//! Ground-truth graph generators: Erdős–Rényi random DAGs with a parent
//! cap, and fixed/random-bandwidth band graphs.

use rand::prelude::*;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::graphs::LabeledGraph;

/// Specification for the random-DAG generator.
#[derive(Debug, Clone, PartialEq)]
pub struct RandDagSpec {
    pub n: usize,
    /// Expected neighbors per node; edge probability is d/(n−1).
    pub d: f64,
    /// Per-node parent cap; `None` means unbounded.
    pub max_parents: Option<usize>,
    /// Generation method tag; only "er" is supported.
    pub method: String,
    pub seed: u64,
}

impl RandDagSpec {
    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidSpec("rand_dag: n must be >= 1".to_string()));
        }
        if self.d < 0.0 || self.d > (self.n as f64 - 1.0).max(0.0) {
            return Err(Error::InvalidSpec(format!(
                "rand_dag: d = {} outside [0, n-1]",
                self.d
            )));
        }
        if self.method != "er" {
            return Err(Error::InvalidSpec(format!(
                "rand_dag: unsupported method {:?} (only \"er\")",
                self.method
            )));
        }
        Ok(())
    }
}

/// Band-graph specification (fixed or random width).
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    pub p: usize,
    /// Fixed bandwidth, or the maximum width for the random variant.
    pub bandwidth: usize,
    pub seed: u64,
}

impl BandSpec {
    fn validate(&self) -> Result<()> {
        if self.p >= 1 && self.bandwidth >= self.p {
            return Err(Error::InvalidSpec(format!(
                "band: bandwidth {} must be <= p-1 = {}",
                self.bandwidth,
                self.p - 1
            )));
        }
        Ok(())
    }
}

/// Random DAG: ER skeleton with edge probability d/(n−1), oriented along a
/// uniformly random node permutation, then excess in-edges beyond
/// `max_parents` deleted uniformly at random. Labels "1".."n".
pub fn gen_rand_dag(spec: &RandDagSpec) -> Result<LabeledGraph> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let prob = if n > 1 { spec.d / (n as f64 - 1.0) } else { 0.0 };

    // skeleton draws in fixed (i, j) order
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(prob) {
                pairs.push((i, j));
            }
        }
    }
    // random topological position per node
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut rank = vec![0usize; n];
    for (pos, &v) in perm.iter().enumerate() {
        rank[v] = pos;
    }

    let mut g = LabeledGraph::with_numeric_labels(n);
    for (i, j) in pairs {
        if rank[i] < rank[j] {
            g.set_directed(i, j);
        } else {
            g.set_directed(j, i);
        }
    }

    if let Some(cap) = spec.max_parents {
        for node in 0..n {
            let mut parents = g.parents(node);
            while parents.len() > cap {
                let k = rng.random_range(0..parents.len());
                g.remove_edge(parents[k], node);
                parents.remove(k);
            }
        }
    }
    Ok(g)
}

/// Fixed-bandwidth band graph: undirected edge (i,j) iff 0 < |i−j| <= w.
pub fn gen_bandmat(spec: &BandSpec) -> Result<LabeledGraph> {
    spec.validate()?;
    let p = spec.p;
    let mut g = LabeledGraph::with_numeric_labels(p);
    for i in 0..p {
        for j in (i + 1)..p.min(i + spec.bandwidth + 1) {
            g.set_undirected(i, j);
        }
    }
    Ok(g)
}

/// Random band graph: per-node widths b_i drawn uniformly on
/// {0..max_bandwidth}; edge (i,j), i<j, iff j−i <= b_i. Chordal by
/// construction.
pub fn gen_rand_bandmat(spec: &BandSpec) -> Result<LabeledGraph> {
    spec.validate()?;
    let p = spec.p;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut g = LabeledGraph::with_numeric_labels(p);
    for i in 0..p {
        let w = rng.random_range(0..=spec.bandwidth);
        for j in (i + 1)..p.min(i + w + 1) {
            g.set_undirected(i, j);
        }
    }
    Ok(g)
}
