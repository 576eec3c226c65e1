//! Result aggregation and emission: the benchmarks CSV, ROC aggregation,
//! true-graph statistics, MCMC diagnostics and SVG plots.

pub mod mcmcdiag;
pub mod svg;

use crate::error::{Error, Result};
use crate::graphs::{cpdag, pattern_graph, skeleton, LabeledGraph};
use crate::io::fmt_real;
use crate::learners::{Estimate, LearnerResult, LearnerStatus};
use crate::metrics::compare_graphs;

/// Which transform both graphs pass through before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMode {
    Cpdag,
    Pattern,
    Skeleton,
    Raw,
}

impl CompareMode {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "cpdag" => Ok(CompareMode::Cpdag),
            "pattern" => Ok(CompareMode::Pattern),
            "skeleton" => Ok(CompareMode::Skeleton),
            "raw" => Ok(CompareMode::Raw),
            other => Err(Error::InvalidSpec(format!(
                "unknown comparison mode {other:?} (expected cpdag|pattern|skeleton|raw)"
            ))),
        }
    }

    /// DAG inputs are transformed; partially directed inputs (already
    /// equivalence-class representatives) pass through unchanged for the
    /// cpdag/pattern modes.
    pub fn apply(&self, g: &LabeledGraph) -> Result<LabeledGraph> {
        match self {
            CompareMode::Raw => Ok(g.clone()),
            CompareMode::Skeleton => Ok(skeleton(g)),
            CompareMode::Pattern => {
                if g.is_dag() {
                    pattern_graph(g)
                } else {
                    Ok(g.clone())
                }
            }
            CompareMode::Cpdag => {
                if g.is_dag() {
                    cpdag(g)
                } else {
                    Ok(g.clone())
                }
            }
        }
    }
}

/// One learner invocation feeding the benchmarks table.
#[derive(Debug, Clone)]
pub struct ResultEntry {
    pub algorithm_id: String,
    pub params_hash: String,
    /// Name and value of the algorithm's varied parameter, when any.
    pub varied: Option<(String, serde_json::Value)>,
    pub seed: u64,
    pub result: LearnerResult,
}

/// Metric fields of an ok row; `None` components are undefined and print
/// as empty CSV cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMetrics {
    pub tp: f64,
    pub fp: f64,
    pub fn_: f64,
    pub tpr: Option<f64>,
    pub fprp: Option<f64>,
    pub fnr: Option<f64>,
    pub shd: u64,
    pub f1: Option<f64>,
}

/// One row of the benchmarks CSV.
#[derive(Debug, Clone)]
pub struct BenchmarkRow {
    pub algorithm_id: String,
    pub params_hash: String,
    pub varied: Option<(String, serde_json::Value)>,
    pub seed: u64,
    pub status: String,
    pub time_s: Option<f64>,
    pub ntests: Option<u64>,
    pub metrics: Option<RowMetrics>,
}

/// Graph an estimate contributes to the metrics: the graph itself, or the
/// final state of a trajectory.
pub fn estimate_graph(estimate: &Estimate) -> Result<LabeledGraph> {
    match estimate {
        Estimate::Graph(g) => Ok(g.clone()),
        Estimate::Trajectory(traj) => {
            let states = traj.states()?;
            Ok(states
                .last()
                .map(|(_, g)| g.clone())
                .expect("validated trajectory has records"))
        }
    }
}

/// Build one benchmarks row; ok results need the truth graph.
pub fn benchmark_row(
    entry: &ResultEntry,
    truth: Option<&LabeledGraph>,
    mode: CompareMode,
) -> Result<BenchmarkRow> {
    let result: &LearnerResult = &entry.result;
    let metrics = match (&result.status, &result.estimate) {
        (LearnerStatus::Ok, Some(est)) => {
            let truth = truth.ok_or_else(|| {
                Error::Plan(format!(
                    "benchmarks for {:?} seed {} need a true graph",
                    entry.algorithm_id, entry.seed
                ))
            })?;
            let est_graph = mode.apply(&estimate_graph(est)?)?;
            let truth_graph = mode.apply(truth)?;
            let cmp = compare_graphs(&truth_graph, &est_graph)?;
            Some(RowMetrics {
                tp: cmp.scores.tp(),
                fp: cmp.scores.fp(),
                fn_: cmp.scores.fn_(),
                tpr: cmp.tpr,
                fprp: cmp.fprp,
                fnr: cmp.fnr,
                shd: cmp.shd,
                f1: cmp.f1,
            })
        }
        _ => None,
    };
    Ok(BenchmarkRow {
        algorithm_id: entry.algorithm_id.clone(),
        params_hash: entry.params_hash.clone(),
        varied: entry.varied.clone(),
        seed: entry.seed,
        status: result.status.tag().to_string(),
        time_s: matches!(result.status, LearnerStatus::Ok).then_some(result.wall_time),
        ntests: result.ntests,
        metrics,
    })
}

/// One row per (algorithm object, seed), sorted for stable output.
pub fn benchmarks_table(
    items: &[(ResultEntry, Option<LabeledGraph>)],
    mode: CompareMode,
) -> Result<Vec<BenchmarkRow>> {
    let mut rows = Vec::with_capacity(items.len());
    for (entry, truth) in items {
        rows.push(benchmark_row(entry, truth.as_ref(), mode)?);
    }
    rows.sort_by(|a, b| {
        (&a.algorithm_id, &a.params_hash, a.seed).cmp(&(&b.algorithm_id, &b.params_hash, b.seed))
    });
    Ok(rows)
}

pub const BENCHMARKS_CSV_HEADER: &str =
    "id,params_hash,seed,status,time_s,ntests,tp,fp,fn,tpr,fprp,fnr,shd,f1";

fn opt_real(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

/// Render rows as the benchmarks CSV (comma-separated, header row, dot
/// decimal, LF line ends).
pub fn benchmarks_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from(BENCHMARKS_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let (tp, fp, fn_, tpr, fprp, fnr, shd, f1) = match &r.metrics {
            Some(m) => (
                fmt_real(m.tp),
                fmt_real(m.fp),
                fmt_real(m.fn_),
                opt_real(m.tpr),
                opt_real(m.fprp),
                opt_real(m.fnr),
                m.shd.to_string(),
                opt_real(m.f1),
            ),
            None => Default::default(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.algorithm_id,
            r.params_hash,
            r.seed,
            r.status,
            opt_real(r.time_s),
            r.ntests.map(|v| v.to_string()).unwrap_or_default(),
            tp,
            fp,
            fn_,
            tpr,
            fprp,
            fnr,
            shd,
            f1,
        ));
    }
    out
}

/// One aggregated ROC point.
#[derive(Debug, Clone, PartialEq)]
pub struct RocPoint {
    pub algorithm_id: String,
    pub param: serde_json::Value,
    pub median_fprp: f64,
    pub median_tpr: f64,
    pub tpr_q05: f64,
    pub tpr_q95: f64,
    /// ok rows entering the aggregate
    pub n_ok: usize,
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Group ok rows by (algorithm id, varied-parameter value); medians and
/// TPR 5/95% quantiles across seeds; failed rows counted out but visible
/// through `n_ok`.
pub fn roc_aggregate(rows: &[BenchmarkRow]) -> Vec<RocPoint> {
    use std::collections::BTreeMap;
    // (id, canonical param) -> (param value, (fprp, tpr) pairs)
    type Groups = BTreeMap<(String, String), (serde_json::Value, Vec<(f64, f64)>)>;
    let mut groups: Groups = BTreeMap::new();
    for row in rows {
        let (param_key, param_value) = match &row.varied {
            Some((_, v)) => (crate::seeding::canonical_json(v), v.clone()),
            None => ("null".to_string(), serde_json::Value::Null),
        };
        let entry = groups
            .entry((row.algorithm_id.clone(), param_key))
            .or_insert_with(|| (param_value, Vec::new()));
        if row.status == "ok" {
            if let Some(m) = &row.metrics {
                if let (Some(tpr), Some(fprp)) = (m.tpr, m.fprp) {
                    entry.1.push((fprp, tpr));
                }
            }
        }
    }
    let mut points = Vec::new();
    for ((id, _), (param, pairs)) in groups {
        if pairs.is_empty() {
            continue;
        }
        let mut fprps: Vec<f64> = pairs.iter().map(|&(f, _)| f).collect();
        let mut tprs: Vec<f64> = pairs.iter().map(|&(_, t)| t).collect();
        fprps.sort_by(f64::total_cmp);
        tprs.sort_by(f64::total_cmp);
        points.push(RocPoint {
            algorithm_id: id,
            param,
            median_fprp: quantile(&fprps, 0.5),
            median_tpr: quantile(&tprs, 0.5),
            tpr_q05: quantile(&tprs, 0.05),
            tpr_q95: quantile(&tprs, 0.95),
            n_ok: pairs.len(),
        });
    }
    // curve order: by id, then numeric parameter where possible
    points.sort_by(|a, b| {
        let pa = a.param.as_f64();
        let pb = b.param.as_f64();
        (&a.algorithm_id, pa.map(ordered_float::OrderedF64::from))
            .partial_cmp(&(&b.algorithm_id, pb.map(ordered_float::OrderedF64::from)))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points
}

mod ordered_float {
    /// Total-ordered f64 wrapper for sort keys.
    #[derive(PartialEq, PartialOrd)]
    pub struct OrderedF64(f64);
    impl From<f64> for OrderedF64 {
        fn from(v: f64) -> Self {
            OrderedF64(v)
        }
    }
}

pub const ROC_CSV_HEADER: &str = "id,param,median_fprp,median_tpr,tpr_q05,tpr_q95,n_ok";

pub fn roc_csv(points: &[RocPoint]) -> String {
    let mut out = String::from(ROC_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.algorithm_id,
            crate::seeding::canonical_json(&p.param),
            fmt_real(p.median_fprp),
            fmt_real(p.median_tpr),
            fmt_real(p.tpr_q05),
            fmt_real(p.tpr_q95),
            p.n_ok
        ));
    }
    out
}

/// Properties of one true graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStatsRow {
    pub graph_id: String,
    pub seed: u64,
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
    pub max_in_degree: usize,
}

/// Per (graph id, seed): node count, edge count, density |E|/|V|, max
/// in-degree.
pub fn graph_stats(truths: &[(String, u64, LabeledGraph)]) -> Vec<GraphStatsRow> {
    let mut rows: Vec<GraphStatsRow> = truths
        .iter()
        .map(|(id, seed, g)| {
            let nodes = g.p();
            let edges = g.edge_count();
            let max_in = (0..g.p()).map(|v| g.parents(v).len()).max().unwrap_or(0);
            GraphStatsRow {
                graph_id: id.clone(),
                seed: *seed,
                nodes,
                edges,
                density: if nodes > 0 {
                    edges as f64 / nodes as f64
                } else {
                    0.0
                },
                max_in_degree: max_in,
            }
        })
        .collect();
    rows.sort_by(|a, b| (&a.graph_id, a.seed).cmp(&(&b.graph_id, b.seed)));
    rows
}

pub const GRAPH_STATS_CSV_HEADER: &str = "id,seed,nodes,edges,density,max_in_degree";

pub fn graph_stats_csv(rows: &[GraphStatsRow]) -> String {
    let mut out = String::from(GRAPH_STATS_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.graph_id,
            r.seed,
            r.nodes,
            r.edges,
            fmt_real(r.density),
            r.max_in_degree
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::LearnerResult;

    fn ok_entry(id: &str, seed: u64, est: LabeledGraph, varied: Option<f64>) -> ResultEntry {
        ResultEntry {
            algorithm_id: id.to_string(),
            params_hash: "abc".to_string(),
            varied: varied.map(|v| ("alpha".to_string(), serde_json::json!(v))),
            seed,
            result: LearnerResult {
                estimate: Some(Estimate::Graph(est)),
                wall_time: 0.25,
                ntests: Some(7),
                status: LearnerStatus::Ok,
            },
        }
    }

    fn timed_out_entry(id: &str, seed: u64) -> ResultEntry {
        ResultEntry {
            algorithm_id: id.to_string(),
            params_hash: "abc".to_string(),
            varied: None,
            seed,
            result: LearnerResult {
                estimate: None,
                wall_time: 1.0,
                ntests: None,
                status: LearnerStatus::TimedOut,
            },
        }
    }

    fn dag(p: usize, edges: &[(usize, usize)]) -> LabeledGraph {
        let mut g = LabeledGraph::with_numeric_labels(p);
        for &(i, j) in edges {
            g.set_directed(i, j);
        }
        g
    }

    #[test]
    fn perfect_estimate_row() {
        let truth = dag(3, &[(0, 1), (1, 2)]);
        let entry = ok_entry("alg", 1, truth.clone(), None);
        let row = benchmark_row(&entry, Some(&truth), CompareMode::Raw).unwrap();
        let m = row.metrics.unwrap();
        assert_eq!(m.tpr, Some(1.0));
        assert_eq!(m.fprp, Some(0.0));
        assert_eq!(m.shd, 0);
    }

    #[test]
    fn timed_out_row_has_empty_metrics() {
        let entry = timed_out_entry("alg", 2);
        let row = benchmark_row(&entry, None, CompareMode::Raw).unwrap();
        assert_eq!(row.status, "timed_out");
        assert!(row.metrics.is_none());
        assert!(row.time_s.is_none());
        let csv = benchmarks_csv(&[row]);
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line, "alg,abc,2,timed_out,,,,,,,,,,");
    }

    #[test]
    fn ok_row_requires_truth() {
        let entry = ok_entry("alg", 1, dag(2, &[]), None);
        assert!(benchmark_row(&entry, None, CompareMode::Raw).is_err());
    }

    #[test]
    fn cpdag_mode_compares_equivalence_classes() {
        // truth 0→1, estimate 1→0: same class, SHD 0 under cpdag mode
        let truth = dag(2, &[(0, 1)]);
        let est = dag(2, &[(1, 0)]);
        let entry = ok_entry("alg", 1, est, None);
        let row = benchmark_row(&entry, Some(&truth), CompareMode::Cpdag).unwrap();
        assert_eq!(row.metrics.unwrap().shd, 0);
    }

    #[test]
    fn quantile_interpolates() {
        let xs = [1.0, 2.0, 3.0];
        assert_eq!(quantile(&xs, 0.5), 2.0);
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 3.0);
        assert!((quantile(&xs, 0.25) - 1.5).abs() < 1e-12);
        assert_eq!(quantile(&[5.0], 0.3), 5.0);
    }

    #[test]
    fn roc_aggregation_groups_and_counts() {
        let truth = dag(2, &[(0, 1)]);
        let mut items = Vec::new();
        for seed in 0..3u64 {
            let est = if seed == 0 {
                dag(2, &[(0, 1)])
            } else {
                dag(2, &[])
            };
            items.push((ok_entry("alg", seed, est, Some(0.05)), Some(truth.clone())));
        }
        // one failed run in the same group
        let mut failed = timed_out_entry("alg", 3);
        failed.varied = Some(("alpha".to_string(), serde_json::json!(0.05)));
        items.push((failed, None));
        let rows = benchmarks_table(&items, CompareMode::Raw).unwrap();
        let points = roc_aggregate(&rows);
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].n_ok, 3);
        // tprs are 1, 0, 0 -> median 0
        assert_eq!(points[0].median_tpr, 0.0);
        assert!(points[0].tpr_q05 <= points[0].median_tpr);
        assert!(points[0].median_tpr <= points[0].tpr_q95);
    }

    #[test]
    fn roc_single_seed_collapses_quantiles() {
        let truth = dag(2, &[(0, 1)]);
        let items = vec![(
            ok_entry("alg", 1, dag(2, &[(0, 1)]), Some(0.01)),
            Some(truth),
        )];
        let rows = benchmarks_table(&items, CompareMode::Raw).unwrap();
        let pts = roc_aggregate(&rows);
        assert_eq!(pts[0].tpr_q05, pts[0].median_tpr);
        assert_eq!(pts[0].tpr_q95, pts[0].median_tpr);
    }

    #[test]
    fn roc_points_ordered_by_parameter() {
        let truth = dag(2, &[(0, 1)]);
        let mut items = Vec::new();
        for alpha in [0.1, 0.001, 0.05] {
            items.push((
                ok_entry("alg", 1, dag(2, &[(0, 1)]), Some(alpha)),
                Some(truth.clone()),
            ));
        }
        let rows = benchmarks_table(&items, CompareMode::Raw).unwrap();
        let pts = roc_aggregate(&rows);
        let params: Vec<f64> = pts.iter().map(|p| p.param.as_f64().unwrap()).collect();
        assert_eq!(params, vec![0.001, 0.05, 0.1]);
    }

    #[test]
    fn graph_stats_basics() {
        let path = dag(4, &[(0, 1), (1, 2), (2, 3)]);
        let rows = graph_stats(&[("g".to_string(), 1, path)]);
        assert_eq!(rows[0].nodes, 4);
        assert_eq!(rows[0].edges, 3);
        assert!((rows[0].density - 0.75).abs() < 1e-12);
        assert_eq!(rows[0].max_in_degree, 1);
        let empty = LabeledGraph::with_numeric_labels(3);
        let rows = graph_stats(&[("e".to_string(), 0, empty)]);
        assert_eq!(rows[0].density, 0.0);
    }

    #[test]
    fn seed_order_invariance_of_medians() {
        let truth = dag(2, &[(0, 1)]);
        let estimates = [dag(2, &[(0, 1)]), dag(2, &[]), dag(2, &[(1, 0)])];
        let forward: Vec<_> = (0..3)
            .map(|s| {
                (
                    ok_entry("a", s as u64, estimates[s].clone(), Some(0.5)),
                    Some(truth.clone()),
                )
            })
            .collect();
        let backward: Vec<_> = (0..3)
            .rev()
            .map(|s| {
                (
                    ok_entry("a", s as u64, estimates[s].clone(), Some(0.5)),
                    Some(truth.clone()),
                )
            })
            .collect();
        let a = roc_aggregate(&benchmarks_table(&forward, CompareMode::Raw).unwrap());
        let b = roc_aggregate(&benchmarks_table(&backward, CompareMode::Raw).unwrap());
        assert_eq!(a, b);
    }
}
