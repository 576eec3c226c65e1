//! Shared single-edge move machinery for the score-based searchers.

use crate::error::Result;
use crate::graphs::LabeledGraph;
use crate::scores::LocalScorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MoveKind {
    Add,
    Delete,
    Reverse,
}

/// One candidate move; ordering is (kind, from, to), the deterministic
/// tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Move {
    pub kind: MoveKind,
    pub from: usize,
    pub to: usize,
}

impl Move {
    pub fn inverse(&self) -> Move {
        match self.kind {
            MoveKind::Add => Move {
                kind: MoveKind::Delete,
                ..*self
            },
            MoveKind::Delete => Move {
                kind: MoveKind::Add,
                ..*self
            },
            MoveKind::Reverse => Move {
                kind: MoveKind::Reverse,
                from: self.to,
                to: self.from,
            },
        }
    }
}

/// Directed path src ⇒ dst that never traverses the edge skip_from→skip_to.
fn has_path_excluding(
    g: &LabeledGraph,
    src: usize,
    dst: usize,
    skip_from: usize,
    skip_to: usize,
) -> bool {
    if src == dst {
        return true;
    }
    let p = g.p();
    let mut seen = vec![false; p];
    let mut stack = vec![src];
    while let Some(u) = stack.pop() {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        for v in 0..p {
            if g.has_directed(u, v) && !(u == skip_from && v == skip_to) {
                if v == dst {
                    return true;
                }
                stack.push(v);
            }
        }
    }
    false
}

/// Whether the move keeps the graph a DAG.
pub fn is_legal(g: &LabeledGraph, mv: &Move) -> bool {
    let (i, j) = (mv.from, mv.to);
    if i == j {
        return false;
    }
    match mv.kind {
        MoveKind::Add => !g.adjacent(i, j) && !g.has_directed_path(j, i),
        MoveKind::Delete => g.has_directed(i, j),
        MoveKind::Reverse => {
            g.has_directed(i, j) && !has_path_excluding(g, i, j, i, j)
        }
    }
}

/// All legal moves in deterministic (kind, from, to) order.
pub fn legal_moves(g: &LabeledGraph) -> Vec<Move> {
    let p = g.p();
    let mut out = Vec::new();
    for kind in [MoveKind::Add, MoveKind::Delete, MoveKind::Reverse] {
        for from in 0..p {
            for to in 0..p {
                let mv = Move { kind, from, to };
                if from != to && is_legal(g, &mv) {
                    out.push(mv);
                }
            }
        }
    }
    out
}

/// Score change of a legal move, given per-node current local scores.
pub fn move_delta(
    g: &LabeledGraph,
    scorer: &dyn LocalScorer,
    locals: &[f64],
    mv: &Move,
) -> Result<f64> {
    let (i, j) = (mv.from, mv.to);
    match mv.kind {
        MoveKind::Add => {
            let mut pa = g.parents(j);
            pa.push(i);
            Ok(scorer.local_score(j, &pa)? - locals[j])
        }
        MoveKind::Delete => {
            let pa: Vec<usize> = g.parents(j).into_iter().filter(|&x| x != i).collect();
            Ok(scorer.local_score(j, &pa)? - locals[j])
        }
        MoveKind::Reverse => {
            let mut pa_i = g.parents(i);
            pa_i.push(j);
            let pa_j: Vec<usize> = g.parents(j).into_iter().filter(|&x| x != i).collect();
            Ok(scorer.local_score(i, &pa_i)? - locals[i] + scorer.local_score(j, &pa_j)?
                - locals[j])
        }
    }
}

/// Apply a move and refresh the affected local scores.
pub fn apply_move(
    g: &mut LabeledGraph,
    scorer: &dyn LocalScorer,
    locals: &mut [f64],
    mv: &Move,
) -> Result<()> {
    let (i, j) = (mv.from, mv.to);
    match mv.kind {
        MoveKind::Add => {
            g.set_directed(i, j);
            locals[j] = scorer.local_score(j, &g.parents(j))?;
        }
        MoveKind::Delete => {
            g.remove_edge(i, j);
            locals[j] = scorer.local_score(j, &g.parents(j))?;
        }
        MoveKind::Reverse => {
            g.remove_edge(i, j);
            g.set_directed(j, i);
            locals[i] = scorer.local_score(i, &g.parents(i))?;
            locals[j] = scorer.local_score(j, &g.parents(j))?;
        }
    }
    Ok(())
}
