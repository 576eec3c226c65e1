//! Mixed-graph comparison metrics: TP/FP with half credit for wrong
//! orientation, TPR/FPRp, SHD, precision/recall and F_β.
//!
//! TP/FP/FN are half-integers; they are carried as doubled integer counts
//! so the SHD identity SHD/P = 1 − TPR + FPRp can be checked exactly.

use crate::error::{Error, Result};
use crate::graphs::{EdgeKind, LabeledGraph};

/// Edge-confusion counts between a truth and an estimate.
///
/// `tp2`, `fp2`, `fn2` are twice the usual TP/FP/FN so that half credits
/// stay integral. `p_true` is the number of edges in the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeScores {
    pub tp2: u64,
    pub fp2: u64,
    pub fn2: u64,
    pub p_true: u64,
}

impl EdgeScores {
    pub fn tp(&self) -> f64 {
        self.tp2 as f64 / 2.0
    }
    pub fn fp(&self) -> f64 {
        self.fp2 as f64 / 2.0
    }
    pub fn fn_(&self) -> f64 {
        self.fn2 as f64 / 2.0
    }
}

/// Full comparison record produced by [`compare_graphs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonScores {
    pub scores: EdgeScores,
    pub shd: u64,
    /// None when P = 0 (rates undefined).
    pub tpr: Option<f64>,
    pub fprp: Option<f64>,
    pub fnr: Option<f64>,
    /// None when TP = FP = FN = 0.
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn check_labels(truth: &LabeledGraph, est: &LabeledGraph) -> Result<()> {
    if truth.labels() != est.labels() {
        return Err(Error::LabelMismatch(format!(
            "truth {:?} vs estimate {:?}",
            truth.labels(),
            est.labels()
        )));
    }
    Ok(())
}

/// Per-edge true/false positive scoring.
///
/// For each estimated edge: full credit when the pair is in the truth
/// with the same orientation, half TP + half FP when the pair is adjacent
/// in the truth with a different orientation (wrong direction, or
/// directed vs undirected), full FP when the pair is not adjacent in the
/// truth. FN counts true edges whose pair is absent from the estimate.
pub fn edge_scores(truth: &LabeledGraph, est: &LabeledGraph) -> Result<EdgeScores> {
    check_labels(truth, est)?;
    let p = truth.p();
    let mut tp2 = 0u64;
    let mut fp2 = 0u64;
    let mut fn2 = 0u64;
    let mut p_true = 0u64;
    for i in 0..p {
        for j in (i + 1)..p {
            let tk = truth.edge_kind(i, j);
            let ek = est.edge_kind(i, j);
            if tk != EdgeKind::Absent {
                p_true += 1;
            }
            match (tk, ek) {
                (_, EdgeKind::Absent) => {
                    if tk != EdgeKind::Absent {
                        fn2 += 2;
                    }
                }
                (EdgeKind::Absent, _) => fp2 += 2,
                _ => {
                    let same = match (tk, ek) {
                        (EdgeKind::Undirected, EdgeKind::Undirected) => true,
                        (EdgeKind::Directed, EdgeKind::Directed) => {
                            truth.has_directed(i, j) == est.has_directed(i, j)
                        }
                        _ => false,
                    };
                    if same {
                        tp2 += 2;
                    } else {
                        tp2 += 1;
                        fp2 += 1;
                    }
                }
            }
        }
    }
    Ok(EdgeScores {
        tp2,
        fp2,
        fn2,
        p_true,
    })
}

/// TPR = TP/P and FPRp = FP/P. Errors when P = 0.
pub fn tpr_fprp(scores: &EdgeScores) -> Result<(f64, f64)> {
    if scores.p_true == 0 {
        return Err(Error::UndefinedMetric(
            "TPR/FPRp undefined for an empty true graph".to_string(),
        ));
    }
    let p = scores.p_true as f64;
    Ok((scores.tp() / p, scores.fp() / p))
}

/// Structural Hamming distance: per unordered pair, one unit when the
/// adjacency status differs and one unit when both are adjacent with
/// different orientation.
pub fn shd(truth: &LabeledGraph, est: &LabeledGraph) -> Result<u64> {
    check_labels(truth, est)?;
    let p = truth.p();
    let mut dist = 0u64;
    for i in 0..p {
        for j in (i + 1)..p {
            let tk = truth.edge_kind(i, j);
            let ek = est.edge_kind(i, j);
            match (tk, ek) {
                (EdgeKind::Absent, EdgeKind::Absent) => {}
                (EdgeKind::Absent, _) | (_, EdgeKind::Absent) => dist += 1,
                _ => {
                    let same = match (tk, ek) {
                        (EdgeKind::Undirected, EdgeKind::Undirected) => true,
                        (EdgeKind::Directed, EdgeKind::Directed) => {
                            truth.has_directed(i, j) == est.has_directed(i, j)
                        }
                        _ => false,
                    };
                    if !same {
                        dist += 1;
                    }
                }
            }
        }
    }
    Ok(dist)
}

/// F_β from TP/FP/FN. Returns Ok(None) when all three are zero
/// (undefined), Ok(Some(0)) when TP = 0 with FP+FN > 0.
pub fn f_beta(tp: f64, fp: f64, fn_: f64, beta: f64) -> Result<Option<f64>> {
    if beta < 0.0 {
        return Err(Error::UndefinedMetric(format!("beta must be >= 0: {beta}")));
    }
    if tp == 0.0 && fp == 0.0 && fn_ == 0.0 {
        return Ok(None);
    }
    if tp == 0.0 {
        return Ok(Some(0.0));
    }
    let pr = tp / (tp + fp);
    let re = tp / (tp + fn_);
    Ok(Some((1.0 + beta * beta) * pr * re / (beta * beta * pr + re)))
}

/// All metrics of one (truth, estimate) pair in one pass.
pub fn compare_graphs(truth: &LabeledGraph, est: &LabeledGraph) -> Result<ComparisonScores> {
    let scores = edge_scores(truth, est)?;
    let shd_v = shd(truth, est)?;
    let (tpr, fprp, fnr) = if scores.p_true > 0 {
        let p = scores.p_true as f64;
        (
            Some(scores.tp() / p),
            Some(scores.fp() / p),
            Some(scores.fn_() / p),
        )
    } else {
        (None, None, None)
    };
    let (tp, fp, fn_) = (scores.tp(), scores.fp(), scores.fn_());
    let precision = if tp + fp > 0.0 { Some(tp / (tp + fp)) } else { None };
    let recall = if tp + fn_ > 0.0 { Some(tp / (tp + fn_)) } else { None };
    let f1 = f_beta(tp, fp, fn_, 1.0)?;
    Ok(ComparisonScores {
        scores,
        shd: shd_v,
        tpr,
        fprp,
        fnr,
        precision,
        recall,
        f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(p: usize, directed: &[(usize, usize)], undirected: &[(usize, usize)]) -> LabeledGraph {
        let mut g = LabeledGraph::with_numeric_labels(p);
        for &(i, j) in directed {
            g.set_directed(i, j);
        }
        for &(i, j) in undirected {
            g.set_undirected(i, j);
        }
        g
    }

    #[test]
    fn identical_graph_scores() {
        let t = g(3, &[(0, 1)], &[(1, 2)]);
        let s = edge_scores(&t, &t).unwrap();
        assert_eq!((s.tp2, s.fp2, s.fn2, s.p_true), (4, 0, 0, 2));
        assert_eq!(shd(&t, &t).unwrap(), 0);
    }

    #[test]
    fn reversed_edge_half_credit() {
        let t = g(2, &[(0, 1)], &[]);
        let e = g(2, &[(1, 0)], &[]);
        let s = edge_scores(&t, &e).unwrap();
        assert_eq!((s.tp2, s.fp2, s.fn2), (1, 1, 0));
        assert_eq!(shd(&t, &e).unwrap(), 1);
        let (tpr, fprp) = tpr_fprp(&s).unwrap();
        assert_eq!((tpr, fprp), (0.5, 0.5));
    }

    #[test]
    fn undirected_vs_directed_half_credit() {
        let t = g(2, &[(0, 1)], &[]);
        let e = g(2, &[], &[(0, 1)]);
        let s = edge_scores(&t, &e).unwrap();
        assert_eq!((s.tp2, s.fp2, s.fn2), (1, 1, 0));
    }

    #[test]
    fn spurious_and_missing_edges() {
        // truth: 0→1, 1→2; estimate: 0→1 only
        let t = g(3, &[(0, 1), (1, 2)], &[]);
        let e = g(3, &[(0, 1)], &[]);
        let s = edge_scores(&t, &e).unwrap();
        assert_eq!((s.tp2, s.fp2, s.fn2), (2, 0, 2));
        assert_eq!(shd(&t, &e).unwrap(), 1);
        // estimate with a non-adjacent extra edge
        let e2 = g(3, &[(0, 1), (1, 2), (0, 2)], &[]);
        let s2 = edge_scores(&t, &e2).unwrap();
        assert_eq!((s2.tp2, s2.fp2, s2.fn2), (4, 2, 0));
    }

    #[test]
    fn empty_estimate_rates() {
        let t = g(3, &[(0, 1)], &[]);
        let e = g(3, &[], &[]);
        let s = edge_scores(&t, &e).unwrap();
        let (tpr, fprp) = tpr_fprp(&s).unwrap();
        assert_eq!((tpr, fprp), (0.0, 0.0));
    }

    #[test]
    fn empty_truth_rates_undefined() {
        let t = g(2, &[], &[]);
        let e = g(2, &[(0, 1)], &[]);
        let s = edge_scores(&t, &e).unwrap();
        assert!(tpr_fprp(&s).is_err());
    }

    #[test]
    fn shd_symmetry_and_label_check() {
        let a = g(3, &[(0, 1)], &[(1, 2)]);
        let b = g(3, &[(2, 1)], &[(0, 1)]);
        assert_eq!(shd(&a, &b).unwrap(), shd(&b, &a).unwrap());
        let other = LabeledGraph::new(vec!["x".into(), "y".into(), "z".into()]).unwrap();
        assert!(shd(&a, &other).is_err());
    }

    #[test]
    fn f_beta_values() {
        assert_eq!(f_beta(2.0, 1.0, 1.0, 1.0).unwrap(), Some(2.0 * 2.0 / 6.0));
        assert_eq!(f_beta(3.0, 0.0, 0.0, 1.0).unwrap(), Some(1.0));
        assert_eq!(f_beta(0.0, 2.0, 0.0, 1.0).unwrap(), Some(0.0));
        assert_eq!(f_beta(0.0, 0.0, 0.0, 1.0).unwrap(), None);
        assert!(f_beta(1.0, 1.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn f1_equals_closed_form_on_half_integers() {
        for tp2 in 0..6u64 {
            for fp2 in 0..6u64 {
                for fn2 in 0..6u64 {
                    let (tp, fp, fn_) = (tp2 as f64 / 2.0, fp2 as f64 / 2.0, fn2 as f64 / 2.0);
                    if let Some(f1) = f_beta(tp, fp, fn_, 1.0).unwrap() {
                        let direct = 2.0 * tp / (2.0 * tp + fp + fn_);
                        assert!((f1 - direct).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn shd_identity_exact_on_random_pairs() {
        use crate::testutil::random_mixed;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let p = rng.random_range(2..=8);
            let t = random_mixed(p, &mut rng);
            let e = random_mixed(p, &mut rng);
            let s = edge_scores(&t, &e).unwrap();
            if s.p_true == 0 {
                continue;
            }
            let d = shd(&t, &e).unwrap();
            // 2·SHD = 2·P − tp2 + fp2, exactly in integers
            assert_eq!(2 * d, 2 * s.p_true - s.tp2 + s.fp2);
        }
    }
}
