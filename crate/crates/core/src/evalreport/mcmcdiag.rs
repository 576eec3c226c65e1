//! MCMC diagnostics over compact graph trajectories: posterior edge
//! probabilities, trajectory functionals, autocorrelation.

use crate::error::{Error, Result};
use crate::io::GraphTrajectory;

/// Functional of the graph at each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    /// number of edges
    Size,
    /// recorded score
    Score,
}

impl Functional {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "size" => Ok(Functional::Size),
            "score" => Ok(Functional::Score),
            other => Err(Error::InvalidSpec(format!(
                "unknown functional {other:?} (expected size|score)"
            ))),
        }
    }
}

/// Posterior edge probabilities: mean of the (i,j) edge indicator over
/// iterations burn_in..=M, reconstructing the graph by replay. Undirected
/// edges set both (i,j) and (j,i).
pub fn edge_posterior(traj: &GraphTrajectory, burn_in: i64) -> Result<Vec<f64>> {
    let m = traj.last_index();
    if burn_in < 0 || burn_in > m {
        return Err(Error::Trajectory(format!(
            "burn_in {burn_in} outside [0, {m}]"
        )));
    }
    let states = traj.states()?;
    let p = traj.labels.len();
    let mut acc = vec![0.0f64; p * p];
    for (k, (idx, g)) in states.iter().enumerate() {
        let next_idx = states.get(k + 1).map(|(i, _)| *i).unwrap_or(m + 1);
        let lo = (*idx).max(burn_in);
        let hi = next_idx; // exclusive
        if hi <= lo {
            continue;
        }
        let weight = (hi - lo) as f64;
        for i in 0..p {
            for j in 0..p {
                if i != j && g.entry(i, j) {
                    acc[i * p + j] += weight;
                }
            }
        }
    }
    let denom = (m + 1 - burn_in) as f64;
    for v in &mut acc {
        *v /= denom;
    }
    Ok(acc)
}

/// Functional series at every `thinning`-th iteration index from
/// `burn_in` to M.
pub fn traj_functional(
    traj: &GraphTrajectory,
    functional: Functional,
    burn_in: i64,
    thinning: i64,
) -> Result<Vec<(i64, f64)>> {
    if thinning < 1 {
        return Err(Error::InvalidSpec(format!(
            "thinning must be >= 1, got {thinning}"
        )));
    }
    let m = traj.last_index();
    if burn_in < 0 || burn_in > m {
        return Err(Error::Trajectory(format!(
            "burn_in {burn_in} outside [0, {m}]"
        )));
    }
    let states = traj.states()?;
    let mut out = Vec::new();
    let mut cursor = 0usize; // last state with index <= t
    let mut t = burn_in;
    while t <= m {
        while cursor + 1 < states.len() && states[cursor + 1].0 <= t {
            cursor += 1;
        }
        let value = match functional {
            Functional::Size => states[cursor].1.edge_count() as f64,
            Functional::Score => traj.records[cursor].score,
        };
        out.push((t, value));
        t += thinning;
    }
    Ok(out)
}

/// Sample autocorrelation r_0..r_lags with the (n−k)-normalized lag sums
/// over the n-normalized variance; r_0 = 1. Errors on a constant series.
pub fn autocorr(series: &[f64], lags: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= lags {
        return Err(Error::InvalidSpec(format!(
            "series length {n} must exceed lags {lags}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return Err(Error::UndefinedMetric(
            "autocorrelation of a constant series".to_string(),
        ));
    }
    let mut out = Vec::with_capacity(lags + 1);
    for k in 0..=lags {
        let mut s = 0.0;
        for t in 0..(n - k) {
            s += (series[t] - mean) * (series[t + k] - mean);
        }
        out.push(s / (n - k) as f64 / var);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{read_trajectory, TrajEdge, TrajRecord};
    use std::io::Write;

    fn a23_example() -> GraphTrajectory {
        let content = "index,score,added,removed\n-2,0.0,[a-b;a-c;a-d],[]\n-1,0.0,[],[a-b;a-c;a-d]\n0,-2325.52,[b-c;a-d],[]\n34,-2311.94,[],[b-c]\n89,-2310.81,[c-d],[]\n";
        let mut tmp = tempfile::NamedTempFile::new().unwrap();
        tmp.write_all(content.as_bytes()).unwrap();
        read_trajectory(tmp.path()).unwrap()
    }

    #[test]
    fn posterior_matches_hand_counts() {
        let traj = a23_example();
        let probs = edge_posterior(&traj, 0).unwrap();
        let p = 4;
        // a-d present all 90 iterations
        assert!((probs[3] - 1.0).abs() < 1e-12); // (a,d) = (0,3)
        assert!((probs[3 * p] - 1.0).abs() < 1e-12); // symmetric
        // b-c present iterations 0..=33 -> 34/90
        assert!((probs[p + 2] - 34.0 / 90.0).abs() < 1e-12);
        // c-d present only at 89 -> 1/90
        assert!((probs[2 * p + 3] - 1.0 / 90.0).abs() < 1e-12);
        // diagonal zero, all entries in [0,1]
        for i in 0..p {
            assert_eq!(probs[i * p + i], 0.0);
        }
        assert!(probs.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn posterior_at_full_burn_in_is_final_indicator() {
        let traj = a23_example();
        let probs = edge_posterior(&traj, 89).unwrap();
        for &v in &probs {
            assert!(v == 0.0 || v == 1.0);
        }
        let p = 4;
        assert_eq!(probs[2 * p + 3], 1.0); // c-d
        assert_eq!(probs[p + 2], 0.0); // b-c gone
    }

    #[test]
    fn posterior_burn_in_bounds_checked() {
        let traj = a23_example();
        assert!(edge_posterior(&traj, 90).is_err());
        assert!(edge_posterior(&traj, -1).is_err());
    }

    #[test]
    fn size_series_replays_deltas() {
        let traj = a23_example();
        let series = traj_functional(&traj, Functional::Size, 0, 1).unwrap();
        assert_eq!(series.len(), 90);
        for (t, v) in &series {
            let expect = if *t <= 33 {
                2.0
            } else if *t <= 88 {
                1.0
            } else {
                2.0
            };
            assert_eq!(*v, expect, "t={t}");
        }
    }

    #[test]
    fn score_series_piecewise_constant() {
        let traj = a23_example();
        let series = traj_functional(&traj, Functional::Score, 0, 1).unwrap();
        assert_eq!(series[0].1, -2325.52);
        assert_eq!(series[33].1, -2325.52);
        assert_eq!(series[34].1, -2311.94);
        assert_eq!(series[88].1, -2311.94);
        assert_eq!(series[89].1, -2310.81);
    }

    #[test]
    fn heavy_thinning_keeps_two_points() {
        let traj = a23_example();
        let series = traj_functional(&traj, Functional::Size, 0, 89).unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(series[0].0, 0);
        assert_eq!(series[1].0, 89);
    }

    #[test]
    fn score_at_index_zero_matches_record() {
        let traj = a23_example();
        let series = traj_functional(&traj, Functional::Score, 0, 1).unwrap();
        assert_eq!(series[0].1, traj.records[0].score);
    }

    #[test]
    fn no_moves_after_start_gives_start_indicator() {
        let traj = GraphTrajectory {
            labels: vec!["a".into(), "b".into(), "c".into()],
            records: vec![
                TrajRecord {
                    index: 0,
                    score: -1.0,
                    added: vec![TrajEdge {
                        a: 0,
                        b: 1,
                        directed: false,
                    }],
                    removed: vec![],
                },
                TrajRecord {
                    index: 50,
                    score: -1.0,
                    added: vec![],
                    removed: vec![],
                },
            ],
        };
        for burn in [0, 10, 50] {
            let probs = edge_posterior(&traj, burn).unwrap();
            assert_eq!(probs[1], 1.0);
            assert_eq!(probs[3], 1.0);
            assert_eq!(probs[2], 0.0);
        }
    }

    #[test]
    fn autocorr_basics() {
        // r_0 = 1 always
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.7).sin()).collect();
        let r = autocorr(&xs, 10).unwrap();
        assert_eq!(r[0], 1.0);
        // alternating series: r_1 = -1 exactly under this estimator
        let alt: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = autocorr(&alt, 3).unwrap();
        assert!((r[1] + 1.0).abs() < 1e-12, "{}", r[1]);
        // constant series flagged
        assert!(autocorr(&[2.0; 50], 3).is_err());
        // length guard
        assert!(autocorr(&[1.0, 2.0], 5).is_err());
    }

    #[test]
    fn autocorr_iid_noise_is_small() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(77);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>() - 0.5).collect();
        let r = autocorr(&xs, 20).unwrap();
        for k in 1..=20 {
            assert!(r[k].abs() < 0.05, "lag {k}: {}", r[k]);
        }
    }
}
