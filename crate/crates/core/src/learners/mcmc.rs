//! Structure MCMC over DAGs: Metropolis–Hastings with a uniform proposal
//! over single-edge moves, recorded in the compact trajectory format.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use super::moves::{apply_move, legal_moves, move_delta, MoveKind};
use super::CancelToken;
use crate::error::Result;
use crate::graphs::LabeledGraph;
use crate::io::{GraphTrajectory, TrajEdge, TrajRecord};
use crate::modelgen::DataMatrix;
use crate::scores::{LocalScorer, ScoreCache, ScoreSpec};

/// Metropolis–Hastings on DAG space starting from the empty DAG.
///
/// Proposals are uniform over the legal add/delete/reverse moves of the
/// current graph; a proposed move is accepted with probability
/// min(1, exp(Δscore)·|moves(current)|/|moves(proposed)|). Only accepted
/// moves are recorded, with the iteration index and the absolute
/// post-move score; a final empty-delta record pins the chain length when
/// the last iterations were rejections.
pub fn structure_mcmc(
    data: &DataMatrix,
    score: &ScoreSpec,
    iterations: u64,
    seed: u64,
    cancel: &CancelToken,
) -> Result<GraphTrajectory> {
    let scorer = ScoreCache::new(score.build(data)?);
    structure_mcmc_with(data, &scorer, iterations, seed, cancel)
}

pub fn structure_mcmc_with(
    data: &DataMatrix,
    scorer: &dyn LocalScorer,
    iterations: u64,
    seed: u64,
    cancel: &CancelToken,
) -> Result<GraphTrajectory> {
    let mut g = LabeledGraph::new(data.labels.to_vec())?;
    let p = g.p();
    let mut locals = Vec::with_capacity(p);
    for node in 0..p {
        locals.push(scorer.local_score(node, &[])?);
    }
    let mut total: f64 = locals.iter().sum();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut records = vec![TrajRecord {
        index: 0,
        score: total,
        added: Vec::new(),
        removed: Vec::new(),
    }];

    for l in 1..=iterations {
        cancel.check()?;
        let moves = legal_moves(&g);
        if moves.is_empty() {
            break;
        }
        let mv = moves[rng.random_range(0..moves.len())];
        let delta = move_delta(&g, scorer, &locals, &mv)?;
        let n_current = moves.len() as f64;
        // count moves of the proposed graph, then maybe revert
        apply_move(&mut g, scorer, &mut locals, &mv)?;
        let n_proposed = legal_moves(&g).len() as f64;
        let log_accept = delta + (n_current / n_proposed).ln();
        let accept = log_accept >= 0.0 || rng.random::<f64>() < log_accept.exp();
        if accept {
            total += delta;
            let (added, removed) = move_deltas_as_edges(&mv);
            records.push(TrajRecord {
                index: l as i64,
                score: total,
                added,
                removed,
            });
        } else {
            apply_move(&mut g, scorer, &mut locals, &mv.inverse())?;
        }
    }

    // pin the chain length when the tail was all rejections
    if iterations > 0 && records.last().map(|r| r.index) != Some(iterations as i64) {
        records.push(TrajRecord {
            index: iterations as i64,
            score: total,
            added: Vec::new(),
            removed: Vec::new(),
        });
    }

    Ok(GraphTrajectory {
        labels: data.labels.to_vec(),
        records,
    })
}

fn move_deltas_as_edges(mv: &super::moves::Move) -> (Vec<TrajEdge>, Vec<TrajEdge>) {
    let fwd = TrajEdge {
        a: mv.from,
        b: mv.to,
        directed: true,
    };
    let rev = TrajEdge {
        a: mv.to,
        b: mv.from,
        directed: true,
    };
    match mv.kind {
        MoveKind::Add => (vec![fwd], vec![]),
        MoveKind::Delete => (vec![], vec![fwd]),
        MoveKind::Reverse => (vec![rev], vec![fwd]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scores::total_score;

    fn binary_pair(n: usize, flip: f64, seed: u64) -> DataMatrix {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut codes = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let x: u32 = rng.random_range(0..2);
            let y = if rng.random_bool(flip) { 1 - x } else { x };
            codes.extend_from_slice(&[x, y]);
        }
        DataMatrix::categorical(vec!["x".into(), "y".into()], n, codes, vec![2, 2]).unwrap()
    }

    #[test]
    fn zero_iterations_only_start_record() {
        let data = binary_pair(100, 0.2, 1);
        let traj = structure_mcmc(
            &data,
            &ScoreSpec::Bdeu { ess: 1.0 },
            0,
            7,
            &CancelToken::none(),
        )
        .unwrap();
        assert_eq!(traj.records.len(), 1);
        assert_eq!(traj.records[0].index, 0);
        assert!(traj.records[0].added.is_empty());
    }

    #[test]
    fn recorded_scores_match_recomputation() {
        let data = binary_pair(500, 0.1, 2);
        let spec = ScoreSpec::Bdeu { ess: 1.0 };
        let traj =
            structure_mcmc(&data, &spec, 2_000, 11, &CancelToken::none()).unwrap();
        let scorer = spec.build(&data).unwrap();
        for (idx, g) in traj.states().unwrap() {
            let rec = traj.records.iter().find(|r| r.index == idx).unwrap();
            let fresh = total_score(scorer.as_ref(), &g).unwrap();
            assert!(
                (rec.score - fresh).abs() < 1e-9,
                "index {idx}: {} vs {fresh}",
                rec.score
            );
        }
    }

    #[test]
    fn chain_length_pinned_to_m() {
        let data = binary_pair(200, 0.1, 3);
        let traj = structure_mcmc(
            &data,
            &ScoreSpec::Bdeu { ess: 1.0 },
            500,
            13,
            &CancelToken::none(),
        )
        .unwrap();
        assert_eq!(traj.last_index(), 500);
    }

    #[test]
    fn empirical_posterior_matches_enumeration() {
        // 2 nodes: DAG space is {empty, x->y, y->x}; stationary law is
        // exp(score) normalized.
        let data = binary_pair(40, 0.25, 4);
        let spec = ScoreSpec::Bdeu { ess: 1.0 };
        let scorer = spec.build(&data).unwrap();
        let mut graphs = Vec::new();
        let empty = LabeledGraph::new(data.labels.clone()).unwrap();
        let mut xy = empty.clone();
        xy.set_directed(0, 1);
        let mut yx = empty.clone();
        yx.set_directed(1, 0);
        graphs.extend_from_slice(&[empty, xy, yx]);
        let scores: Vec<f64> = graphs
            .iter()
            .map(|g| total_score(scorer.as_ref(), g).unwrap())
            .collect();
        let max = scores.iter().cloned().fold(f64::MIN, f64::max);
        let weights: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = weights.iter().sum();

        let m = 200_000u64;
        let burn = (m / 10) as i64;
        let traj = structure_mcmc(&data, &spec, m, 5, &CancelToken::none()).unwrap();
        // visit counts per state over iterations burn..=m
        let states = traj.states().unwrap();
        let mut counts = [0u64; 3];
        for (k, (idx, g)) in states.iter().enumerate() {
            let next_idx = states
                .get(k + 1)
                .map(|(i, _)| *i)
                .unwrap_or(traj.last_index() + 1);
            let lo = (*idx).max(burn);
            let hi = next_idx;
            if hi <= lo {
                continue;
            }
            let which = graphs.iter().position(|cand| cand == g).unwrap();
            counts[which] += (hi - lo) as u64;
        }
        let total_n: u64 = counts.iter().sum();
        for (k, &c) in counts.iter().enumerate() {
            let emp = c as f64 / total_n as f64;
            let exact = weights[k] / z;
            assert!(
                (emp - exact).abs() < 0.02,
                "state {k}: empirical {emp} vs exact {exact}"
            );
        }
    }
}
