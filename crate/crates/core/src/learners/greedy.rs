//! Greedy score-based search: hill climbing and its tabu variant.

use std::collections::VecDeque;

use super::moves::{apply_move, legal_moves, move_delta, Move};
use super::CancelToken;
use crate::error::Result;
use crate::graphs::LabeledGraph;
use crate::modelgen::DataMatrix;
use crate::scores::{LocalScorer, ScoreCache, ScoreSpec};

/// Result of a greedy search: the graph and its total score.
#[derive(Debug, Clone)]
pub struct GreedyOutcome {
    pub graph: LabeledGraph,
    pub score: f64,
}

fn initial_state(
    data: &DataMatrix,
    scorer: &dyn LocalScorer,
) -> Result<(LabeledGraph, Vec<f64>, f64)> {
    let g = LabeledGraph::new(data.labels.to_vec())?;
    let mut locals = Vec::with_capacity(g.p());
    for node in 0..g.p() {
        locals.push(scorer.local_score(node, &[])?);
    }
    let total = locals.iter().sum();
    Ok((g, locals, total))
}

/// Best move by score delta, ties broken by the smallest (kind, from, to).
fn best_move(
    g: &LabeledGraph,
    scorer: &dyn LocalScorer,
    locals: &[f64],
    exclude: impl Fn(&Move) -> bool,
) -> Result<Option<(Move, f64)>> {
    let mut best: Option<(Move, f64)> = None;
    for mv in legal_moves(g) {
        if exclude(&mv) {
            continue;
        }
        let delta = move_delta(g, scorer, locals, &mv)?;
        let better = match &best {
            None => true,
            Some((bmv, bdelta)) => delta > *bdelta || (delta == *bdelta && mv < *bmv),
        };
        if better {
            best = Some((mv, delta));
        }
    }
    Ok(best)
}

/// Hill climbing from the empty DAG: apply the best strictly improving
/// add/delete/reverse move until a local optimum.
pub fn hill_climb(
    data: &DataMatrix,
    score: &ScoreSpec,
    cancel: &CancelToken,
) -> Result<GreedyOutcome> {
    let scorer = ScoreCache::new(score.build(data)?);
    hill_climb_with(data, &scorer, cancel)
}

/// Hill climbing against a caller-provided scorer (shared caches).
pub fn hill_climb_with(
    data: &DataMatrix,
    scorer: &dyn LocalScorer,
    cancel: &CancelToken,
) -> Result<GreedyOutcome> {
    let (mut g, mut locals, mut total) = initial_state(data, scorer)?;
    loop {
        cancel.check()?;
        match best_move(&g, scorer, &locals, |_| false)? {
            Some((mv, delta)) if delta > 0.0 => {
                apply_move(&mut g, scorer, &mut locals, &mv)?;
                total += delta;
            }
            _ => break,
        }
    }
    Ok(GreedyOutcome { graph: g, score: total })
}

/// Tabu search: hill climbing that, at a local optimum, keeps taking the
/// best move not leading into one of the last `tabu_len` visited graphs.
/// Stops after `stagnation_max` consecutive moves that fail to improve on
/// the best score seen; returns the best-scoring DAG visited.
pub fn tabu(
    data: &DataMatrix,
    score: &ScoreSpec,
    tabu_len: usize,
    stagnation_max: usize,
    cancel: &CancelToken,
) -> Result<GreedyOutcome> {
    let scorer = ScoreCache::new(score.build(data)?);
    tabu_with(data, &scorer, tabu_len, stagnation_max, cancel)
}

pub fn tabu_with(
    data: &DataMatrix,
    scorer: &dyn LocalScorer,
    tabu_len: usize,
    stagnation_max: usize,
    cancel: &CancelToken,
) -> Result<GreedyOutcome> {
    let (mut g, mut locals, mut total) = initial_state(data, scorer)?;
    let mut best_graph = g.clone();
    let mut best_score = total;
    let mut recent: VecDeque<LabeledGraph> = VecDeque::new();
    let mut stagnation = 0usize;
    loop {
        cancel.check()?;
        let candidate = best_move(&g, scorer, &locals, |mv| {
            if recent.is_empty() {
                return false;
            }
            let mut next = g.clone();
            apply_move_structural(&mut next, mv);
            recent.contains(&next)
        })?;
        let Some((mv, delta)) = candidate else {
            break;
        };
        if total + delta <= best_score {
            if stagnation >= stagnation_max {
                break;
            }
            stagnation += 1;
        } else {
            stagnation = 0;
        }
        if tabu_len > 0 {
            if recent.len() == tabu_len {
                recent.pop_front();
            }
            recent.push_back(g.clone());
        }
        apply_move(&mut g, scorer, &mut locals, &mv)?;
        total += delta;
        if total > best_score {
            best_score = total;
            best_graph = g.clone();
        }
    }
    Ok(GreedyOutcome {
        graph: best_graph,
        score: best_score,
    })
}

/// Move application without score bookkeeping.
fn apply_move_structural(g: &mut LabeledGraph, mv: &Move) {
    use super::moves::MoveKind;
    match mv.kind {
        MoveKind::Add => g.set_directed(mv.from, mv.to),
        MoveKind::Delete => g.remove_edge(mv.from, mv.to),
        MoveKind::Reverse => {
            g.remove_edge(mv.from, mv.to);
            g.set_directed(mv.to, mv.from);
        }
    }
}
