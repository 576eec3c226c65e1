//! Decomposable network scores: BDeu for categorical data and BGe for
//! continuous data, plus a shareable score cache.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::graphs::LabeledGraph;
use crate::linalg::{ln_det_spd, SymMatrix};
use crate::modelgen::{DataMatrix, DataValues};
use crate::special::ln_gamma;

/// A decomposable local score: log marginal likelihood of one node given
/// a parent set.
pub trait LocalScorer: Send + Sync {
    fn local_score(&self, node: usize, parents: &[usize]) -> Result<f64>;
    fn p(&self) -> usize;
    /// Stable identifier of (dataset, score parameters) for cache keying.
    fn fingerprint(&self) -> &str;
}

/// Total score of a DAG: sum of local scores over nodes.
pub fn total_score(scorer: &dyn LocalScorer, g: &LabeledGraph) -> Result<f64> {
    let mut acc = 0.0;
    for node in 0..g.p() {
        acc += scorer.local_score(node, &g.parents(node))?;
    }
    Ok(acc)
}

/// Score configuration, as it appears in learner configs.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreSpec {
    Bdeu { ess: f64 },
    /// `aw = None` means the default aw = p + 2.
    Bge { am: f64, aw: Option<f64> },
}

impl ScoreSpec {
    pub fn build(&self, data: &DataMatrix) -> Result<Box<dyn LocalScorer>> {
        match self {
            ScoreSpec::Bdeu { ess } => Ok(Box::new(BdeuScorer::new(data, *ess)?)),
            ScoreSpec::Bge { am, aw } => Ok(Box::new(BgeScorer::new(data, *am, *aw)?)),
        }
    }
}

fn data_fingerprint(data: &DataMatrix, params: &str) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(data.labels.join(",").as_bytes());
    h.update([0u8]);
    match &data.values {
        DataValues::Continuous(v) => {
            h.update(b"cont");
            for x in v {
                h.update(x.to_le_bytes());
            }
        }
        DataValues::Categorical { codes, cards } => {
            h.update(b"cat");
            for c in cards {
                h.update((*c as u64).to_le_bytes());
            }
            for x in codes {
                h.update(x.to_le_bytes());
            }
        }
    }
    h.update([0u8]);
    h.update(params.as_bytes());
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// BDeu local marginal log-likelihood for categorical data.
pub struct BdeuScorer {
    codes: Vec<u32>,
    cards: Vec<usize>,
    n: usize,
    p: usize,
    ess: f64,
    fingerprint: String,
}

impl BdeuScorer {
    pub fn new(data: &DataMatrix, ess: f64) -> Result<Self> {
        if ess <= 0.0 {
            return Err(Error::Score(format!("bdeu: ess must be > 0, got {ess}")));
        }
        let (codes, cards) = match &data.values {
            DataValues::Categorical { codes, cards } => (codes.clone(), cards.clone()),
            DataValues::Continuous(_) => {
                return Err(Error::Score("bdeu requires categorical data".to_string()))
            }
        };
        let fingerprint = data_fingerprint(data, &format!("bdeu:ess={ess}"));
        Ok(BdeuScorer {
            codes,
            cards,
            n: data.n,
            p: data.p(),
            ess,
            fingerprint,
        })
    }
}

impl LocalScorer for BdeuScorer {
    fn local_score(&self, node: usize, parents: &[usize]) -> Result<f64> {
        if parents.contains(&node) {
            return Err(Error::Score(format!("node {node} in its own parent set")));
        }
        let r = self.cards[node];
        let q: usize = parents.iter().map(|&pa| self.cards[pa]).product();
        let alpha_jk = self.ess / (q as f64 * r as f64);
        let alpha_j = self.ess / q as f64;

        let mut counts = vec![0u64; q * r];
        for row in 0..self.n {
            let mut cfg = 0usize;
            for &pa in parents {
                cfg = cfg * self.cards[pa] + self.codes[row * self.p + pa] as usize;
            }
            let k = self.codes[row * self.p + node] as usize;
            counts[cfg * r + k] += 1;
        }

        let mut score = 0.0;
        for j in 0..q {
            let nj: u64 = counts[j * r..(j + 1) * r].iter().sum();
            if nj == 0 {
                continue;
            }
            score += ln_gamma(alpha_j) - ln_gamma(alpha_j + nj as f64);
            for k in 0..r {
                let njk = counts[j * r + k];
                if njk > 0 {
                    score += ln_gamma(alpha_jk + njk as f64) - ln_gamma(alpha_jk);
                }
            }
        }
        Ok(score)
    }

    fn p(&self) -> usize {
        self.p
    }

    fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}

/// BGe local marginal log-likelihood for continuous data.
///
/// Prior mean zero, prior scale T = am·(aw−p−1)/(am+1)·I; defaults
/// am = 1, aw = p + 2. The posterior scale matrix R = T + S +
/// n·am/(n+am)·x̄x̄ᵀ is computed once; a local score only needs the log
/// determinants of its submatrices.
pub struct BgeScorer {
    p: usize,
    n: usize,
    am: f64,
    aw: f64,
    t: f64,
    r_post: SymMatrix,
    fingerprint: String,
}

impl BgeScorer {
    pub fn new(data: &DataMatrix, am: f64, aw: Option<f64>) -> Result<Self> {
        let values = match &data.values {
            DataValues::Continuous(v) => v,
            DataValues::Categorical { .. } => {
                return Err(Error::Score("bge requires continuous data".to_string()))
            }
        };
        let p = data.p();
        let n = data.n;
        if n < 1 {
            return Err(Error::Score("bge: need n >= 1".to_string()));
        }
        let aw = aw.unwrap_or(p as f64 + 2.0);
        if am <= 0.0 {
            return Err(Error::Score(format!("bge: am must be > 0, got {am}")));
        }
        if aw <= p as f64 - 1.0 {
            return Err(Error::Score(format!(
                "bge: aw must exceed p-1 = {}, got {aw}",
                p - 1
            )));
        }
        let t = am * (aw - p as f64 - 1.0) / (am + 1.0);
        if t <= 0.0 {
            return Err(Error::Score(format!(
                "bge: degenerate prior scale t = {t} (need aw > p+1)"
            )));
        }
        let mut mean = vec![0.0f64; p];
        for row in 0..n {
            for col in 0..p {
                mean[col] += values[row * p + col];
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut r_post = SymMatrix::zeros(p);
        for a in 0..p {
            for b in a..p {
                let mut s = 0.0;
                for row in 0..n {
                    s += (values[row * p + a] - mean[a]) * (values[row * p + b] - mean[b]);
                }
                // prior-mean term: ν = 0, so (ν−x̄)(ν−x̄)ᵀ = x̄x̄ᵀ
                let v = s + (n as f64 * am / (n as f64 + am)) * mean[a] * mean[b]
                    + if a == b { t } else { 0.0 };
                r_post.set(a, b, v);
                r_post.set(b, a, v);
            }
        }
        let fingerprint = data_fingerprint(data, &format!("bge:am={am},aw={aw}"));
        Ok(BgeScorer {
            p,
            n,
            am,
            aw,
            t,
            r_post,
            fingerprint,
        })
    }

    fn ln_det_sub(&self, idx: &[usize]) -> Result<f64> {
        let sub = self.r_post.submatrix(idx);
        ln_det_spd(&sub).ok_or_else(|| {
            Error::Score(format!(
                "bge: singular posterior scale submatrix over {idx:?}"
            ))
        })
    }
}

impl LocalScorer for BgeScorer {
    fn local_score(&self, node: usize, parents: &[usize]) -> Result<f64> {
        if parents.contains(&node) {
            return Err(Error::Score(format!("node {node} in its own parent set")));
        }
        let n = self.n as f64;
        let p = self.p as f64;
        let l = parents.len() as f64;
        let a_l = self.aw - p + l;

        let mut fam: Vec<usize> = parents.to_vec();
        fam.push(node);
        let ld_fam = self.ln_det_sub(&fam)?;
        let ld_pa = if parents.is_empty() {
            0.0
        } else {
            self.ln_det_sub(parents)?
        };

        let score = -(n / 2.0) * std::f64::consts::PI.ln()
            + 0.5 * (self.am.ln() - (n + self.am).ln())
            + ln_gamma((n + a_l + 1.0) / 2.0)
            - ln_gamma((a_l + 1.0) / 2.0)
            + ((a_l + l + 1.0) / 2.0) * self.t.ln()
            + ((n + a_l) / 2.0) * ld_pa
            - ((n + a_l + 1.0) / 2.0) * ld_fam;
        Ok(score)
    }

    fn p(&self) -> usize {
        self.p
    }

    fn fingerprint(&self) -> &str {
        &self.fingerprint
    }
}

/// Insert-only memo over a local scorer. Concurrent lookups are safe;
/// racing computations of the same key are allowed and harmless (both
/// compute the same value).
pub struct ScoreCache {
    inner: Box<dyn LocalScorer>,
    map: RwLock<HashMap<(usize, Vec<usize>), f64>>,
}

impl ScoreCache {
    pub fn new(inner: Box<dyn LocalScorer>) -> Self {
        ScoreCache {
            inner,
            map: RwLock::new(HashMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl LocalScorer for ScoreCache {
    fn local_score(&self, node: usize, parents: &[usize]) -> Result<f64> {
        let mut key_parents = parents.to_vec();
        key_parents.sort_unstable();
        let key = (node, key_parents);
        if let Some(&v) = self.map.read().unwrap().get(&key) {
            return Ok(v);
        }
        let v = self.inner.local_score(node, parents)?;
        self.map.write().unwrap().insert(key, v);
        Ok(v)
    }

    fn p(&self) -> usize {
        self.inner.p()
    }

    fn fingerprint(&self) -> &str {
        self.inner.fingerprint()
    }
}
