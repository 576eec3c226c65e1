//! The PC algorithm with the order-independent ("stable") skeleton phase
//! and relaxed v-structure orientation followed by the Meek rules.

use std::collections::HashMap;

use super::CancelToken;
use crate::citests::{CiTestKind, CiTestResult, FisherZContext, G2Context};
use crate::error::{Error, Result};
use crate::graphs::{meek_closure, LabeledGraph};
use crate::modelgen::DataMatrix;

/// PC output: a CPDAG-like partially directed graph plus counters.
#[derive(Debug, Clone)]
pub struct PcOutcome {
    pub graph: LabeledGraph,
    pub ntests: u64,
    /// v-structure orientations that overwrote an opposite arrow.
    pub conflicts: u64,
}

enum TestCtx {
    FisherZ(FisherZContext),
    G2(G2Context),
}

impl TestCtx {
    fn run(&self, i: usize, j: usize, cond: &[usize], alpha: f64) -> Result<CiTestResult> {
        match self {
            TestCtx::FisherZ(ctx) => ctx.test(i, j, cond, alpha),
            TestCtx::G2(ctx) => ctx.test(i, j, cond, alpha),
        }
    }
}

/// Visit all size-`size` subsets of `pool` in lexicographic order until
/// the callback returns true; reports whether any callback did.
fn for_each_subset<F>(pool: &[usize], size: usize, mut f: F) -> Result<bool>
where
    F: FnMut(&[usize]) -> Result<bool>,
{
    let n = pool.len();
    if size > n {
        return Ok(false);
    }
    if size == 0 {
        return f(&[]);
    }
    let mut idx: Vec<usize> = (0..size).collect();
    let mut subset = vec![0usize; size];
    loop {
        for (slot, &k) in idx.iter().enumerate() {
            subset[slot] = pool[k];
        }
        if f(&subset)? {
            return Ok(true);
        }
        // rightmost position that can still advance
        let mut pos = size;
        let advanced = loop {
            if pos == 0 {
                break false;
            }
            pos -= 1;
            if idx[pos] < pos + n - size {
                idx[pos] += 1;
                for k in (pos + 1)..size {
                    idx[k] = idx[k - 1] + 1;
                }
                break true;
            }
        };
        if !advanced {
            return Ok(false);
        }
    }
}

/// PC: stable adjacency search, v-structure orientation against the
/// recorded separating sets, Meek rules to fixpoint.
pub fn pc(
    data: &DataMatrix,
    test: CiTestKind,
    alpha: f64,
    max_cond: Option<usize>,
    cancel: &CancelToken,
) -> Result<PcOutcome> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::CiTest(format!("alpha {alpha} outside [0,1]")));
    }
    let ctx = match (test, data.is_categorical()) {
        (CiTestKind::FisherZ, false) => TestCtx::FisherZ(FisherZContext::new(data)?),
        (CiTestKind::G2, true) => TestCtx::G2(G2Context::new(data)?),
        (CiTestKind::FisherZ, true) => {
            return Err(Error::CiTest(
                "fisher-z selected for categorical data".to_string(),
            ))
        }
        (CiTestKind::G2, false) => {
            return Err(Error::CiTest("g2 selected for continuous data".to_string()))
        }
    };
    let p = data.p();
    // Fisher-z needs n > |S| + 3; cap the level so tests stay valid.
    let data_cap = match test {
        CiTestKind::FisherZ => Some(data.n.saturating_sub(4)),
        CiTestKind::G2 => None,
    };
    let level_cap = match (max_cond, data_cap) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (Some(a), None) => Some(a),
        (None, b) => b,
    };

    let mut adjacent = vec![vec![true; p]; p];
    for (i, row) in adjacent.iter_mut().enumerate() {
        row[i] = false;
    }
    let mut sepsets: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut ntests = 0u64;

    let mut level = 0usize;
    loop {
        if level_cap.is_some_and(|cap| level > cap) {
            break;
        }
        // neighborhoods frozen at level start (order independence)
        let snapshot: Vec<Vec<usize>> = (0..p)
            .map(|i| (0..p).filter(|&j| adjacent[i][j]).collect())
            .collect();
        let mut larger_possible = false;
        for i in 0..p {
            for j in (i + 1)..p {
                if !adjacent[i][j] {
                    continue;
                }
                cancel.check()?;
                // subsets from both endpoints' snapshot neighborhoods
                for (anchor, other) in [(i, j), (j, i)] {
                    let pool: Vec<usize> = snapshot[anchor]
                        .iter()
                        .copied()
                        .filter(|&k| k != other)
                        .collect();
                    if pool.len() > level {
                        larger_possible = true;
                    }
                    if pool.len() < level {
                        continue;
                    }
                    let found = for_each_subset(&pool, level, |cond| {
                        cancel.check()?;
                        ntests += 1;
                        let res = ctx.run(i, j, cond, alpha)?;
                        if res.independent {
                            sepsets.insert((i, j), cond.to_vec());
                            Ok(true)
                        } else {
                            Ok(false)
                        }
                    })?;
                    if found {
                        adjacent[i][j] = false;
                        adjacent[j][i] = false;
                        break;
                    }
                }
            }
        }
        if !larger_possible {
            break;
        }
        level += 1;
    }

    // skeleton into a graph
    let mut g = LabeledGraph::new(data.labels.to_vec())?;
    for i in 0..p {
        for j in (i + 1)..p {
            if adjacent[i][j] {
                g.set_undirected(i, j);
            }
        }
    }

    // v-structure orientation: unshielded i−k−j becomes i→k←j iff
    // k is not in sepset(i, j); later triples win conflicts.
    let mut conflicts = 0u64;
    let mut triples = Vec::new();
    for k in 0..p {
        for i in 0..p {
            for j in (i + 1)..p {
                if i == k || j == k {
                    continue;
                }
                if adjacent[i][k] && adjacent[j][k] && !adjacent[i][j] {
                    triples.push((i, k, j));
                }
            }
        }
    }
    triples.sort_unstable();
    for (i, k, j) in triples {
        let sep = sepsets.get(&(i, j));
        let collider = sep.is_none_or(|s| !s.contains(&k));
        if collider {
            if g.has_directed(k, i) {
                conflicts += 1;
            }
            if g.has_directed(k, j) {
                conflicts += 1;
            }
            g.set_directed(i, k);
            g.set_directed(j, k);
        }
    }

    meek_closure(&mut g);
    Ok(PcOutcome {
        graph: g,
        ntests,
        conflicts,
    })
}
