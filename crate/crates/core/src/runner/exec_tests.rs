//! In-crate tests for the executor: small configs run end to end against
//! temp directories.

use std::fs;
use std::path::Path;

use super::config::parse_config;
use super::exec::{execute, ExecMode, ExecOptions, RunContext};
use super::plan::plan;

fn run_config(dir: &Path, config: &str, cores: usize) -> (super::exec::RunReport, std::path::PathBuf) {
    let cfg_path = dir.join("config.json");
    fs::write(&cfg_path, config).unwrap();
    let cfg = parse_config(&cfg_path).unwrap();
    let the_plan = plan(&cfg).unwrap();
    let results = dir.join("results");
    let ctx = RunContext {
        results_root: results.clone(),
    };
    let report = execute(
        &the_plan,
        &ctx,
        &ExecOptions {
            cores,
            mode: ExecMode::Run,
        },
    )
    .unwrap();
    (report, results)
}

const SMALL_V_CONFIG: &str = r#"{
    "benchmark_setup": {
        "data": [
            {"graph_id": "g", "parameters_id": "p", "data_id": "d", "seed_range": [1, 3]}
        ],
        "evaluation": {
            "benchmarks": {"filename_prefix": "demo/", "ids": ["hc-bge"], "compare": "cpdag"},
            "graph_true_stats": true
        }
    },
    "resources": {
        "graph": {"pcalg_randdag": [{"id": "g", "n": 5, "d": 2, "method": "er"}]},
        "parameters": {"sem_params": [{"id": "p", "min": 0.5, "max": 1}]},
        "data": {"iid": [{"id": "d", "standardized": false, "sample_sizes": 200}]},
        "structure_learning_algorithms": {
            "bnlearn_hc": [{"id": "hc-bge", "score": "bge", "am": 1}]
        }
    }
}"#;

#[test]
fn scenario_v_runs_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (report, results) = run_config(dir.path(), SMALL_V_CONFIG, 2);
    assert!(report.failed_jobs.is_empty(), "{:?}", report.failed_jobs);
    assert_eq!(report.learner_ok, 3);
    // evaluation outputs exist, including the convenience copies
    let bench = results.join("output/demo");
    let files: Vec<String> = fs::read_dir(&bench)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
        .collect();
    assert!(files.iter().any(|f| f.starts_with("benchmarks_")), "{files:?}");
    assert!(files.iter().any(|f| f.starts_with("roc_") && f.ends_with(".csv")));
    assert!(files.iter().any(|f| f.starts_with("roc_") && f.ends_with(".svg")));
    assert!(files.iter().any(|f| f.starts_with("graph_true_stats_")));
    // benchmarks csv has one row per seed
    let bench_csv = files.iter().find(|f| f.starts_with("benchmarks_")).unwrap();
    let content = fs::read_to_string(bench.join(bench_csv)).unwrap();
    assert_eq!(content.lines().count(), 1 + 3, "{content}");
    assert!(content.lines().nth(1).unwrap().contains("ok"));
}

#[test]
fn rerun_is_all_cache_hits() {
    let dir = tempfile::tempdir().unwrap();
    let (first, _) = run_config(dir.path(), SMALL_V_CONFIG, 2);
    assert!(first.executed > 0);
    let (second, _) = run_config(dir.path(), SMALL_V_CONFIG, 2);
    assert_eq!(second.executed, 0, "{}", second.summary());
    assert_eq!(second.cached, first.executed + first.cached);
}

#[test]
fn changing_one_learner_param_reruns_only_that_learner_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let (_first, _) = run_config(dir.path(), SMALL_V_CONFIG, 2);
    let changed = SMALL_V_CONFIG.replace("\"am\": 1", "\"am\": 2");
    let (second, _) = run_config(dir.path(), &changed, 2);
    // 3 learner jobs + 1 evaluation job rerun; graph/parameters/data cached
    assert_eq!(second.executed, 4, "{}", second.summary());
}

#[test]
fn report_mode_requires_cache_then_reemits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("config.json");
    fs::write(&cfg_path, SMALL_V_CONFIG).unwrap();
    let cfg = parse_config(&cfg_path).unwrap();
    let the_plan = plan(&cfg).unwrap();
    let ctx = RunContext {
        results_root: dir.path().join("results"),
    };
    // without a prior run, report mode fails on missing inputs
    let report = execute(
        &the_plan,
        &ctx,
        &ExecOptions {
            cores: 1,
            mode: ExecMode::ReportOnly,
        },
    )
    .unwrap();
    assert!(!report.failed_jobs.is_empty());
    // after a run, report mode re-executes only evaluation jobs
    execute(
        &the_plan,
        &ctx,
        &ExecOptions {
            cores: 2,
            mode: ExecMode::Run,
        },
    )
    .unwrap();
    let report = execute(
        &the_plan,
        &ctx,
        &ExecOptions {
            cores: 1,
            mode: ExecMode::ReportOnly,
        },
    )
    .unwrap();
    assert!(report.failed_jobs.is_empty(), "{:?}", report.failed_jobs);
    assert_eq!(report.executed, 1); // the single evaluation job
}

#[test]
fn scenario_ii_fixed_data_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("resources/data/mydatasets")).unwrap();
    fs::create_dir_all(dir.path().join("resources/adjmat/myadjmats")).unwrap();
    // strongly coupled pair so hc finds the edge
    let mut data = String::from("x,y\n");
    for i in 0..200 {
        let x = if i % 2 == 0 { 1.0 } else { -1.0 };
        let y: f64 = x * 2.0 + (i as f64 * 0.017).sin() * 0.1;
        data.push_str(&format!("{x:?},{y:?}\n"));
    }
    fs::write(dir.path().join("resources/data/mydatasets/obs.csv"), data).unwrap();
    fs::write(
        dir.path().join("resources/adjmat/myadjmats/truth.csv"),
        "x,y\n0,1\n0,0\n",
    )
    .unwrap();
    let config = r#"{
        "benchmark_setup": {
            "data": [{"graph_id": "truth.csv", "parameters_id": null, "data_id": "obs.csv", "seed_range": null}],
            "evaluation": {"benchmarks": {"ids": ["hc"], "compare": "skeleton"}}
        },
        "resources": {
            "structure_learning_algorithms": {"bnlearn_hc": [{"id": "hc", "score": "bge"}]}
        }
    }"#;
    let (report, results) = run_config(dir.path(), config, 1);
    assert!(report.failed_jobs.is_empty(), "{:?}", report.failed_jobs);
    let out = results.join("output");
    let bench_file = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| {
            p.file_name()
                .unwrap()
                .to_string_lossy()
                .starts_with("benchmarks_")
        })
        .unwrap();
    let content = fs::read_to_string(bench_file).unwrap();
    // skeleton comparison of a perfect single-edge recovery: shd 0, f1 1
    let row = content.lines().nth(1).unwrap();
    assert!(row.contains(",ok,"), "{row}");
    let cols: Vec<&str> = row.split(',').collect();
    // ...,tp,fp,fn,tpr,fprp,fnr,shd,f1
    assert_eq!(cols[12], "0", "shd: {row}");
    assert_eq!(cols[13], "1.0", "f1: {row}");
}

#[test]
fn scenario_i_directory_data_runs_learners_without_truth() {
    let dir = tempfile::tempdir().unwrap();
    let datasets = dir.path().join("resources/data/mydatasets/batch");
    fs::create_dir_all(&datasets).unwrap();
    for k in 0..2 {
        let mut content = String::from("a,b,c\n");
        for i in 0..60 {
            let v = (i as f64 + k as f64) * 0.1;
            content.push_str(&format!("{:?},{:?},{:?}\n", v.sin(), v.cos(), (v * 1.7).sin()));
        }
        fs::write(datasets.join(format!("d{k}.csv")), content).unwrap();
    }
    let config = r#"{
        "benchmark_setup": {
            "data": [{"graph_id": null, "parameters_id": null, "data_id": "batch", "seed_range": null}],
            "evaluation": {}
        },
        "resources": {
            "structure_learning_algorithms": {"bnlearn_hc": [{"id": "hc", "score": "bge"}]}
        }
    }"#;
    let (report, results) = run_config(dir.path(), config, 2);
    assert!(report.failed_jobs.is_empty(), "{:?}", report.failed_jobs);
    assert_eq!(report.learner_ok, 2); // one per file
    assert!(!results.join("output").exists()); // no evaluation requested
}

#[test]
fn timed_out_external_plugin_yields_empty_metrics_row() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("resources/data/mydatasets")).unwrap();
    fs::create_dir_all(dir.path().join("resources/adjmat/myadjmats")).unwrap();
    fs::write(
        dir.path().join("resources/data/mydatasets/obs.csv"),
        "a,b\n0.1,0.2\n0.3,0.1\n0.5,0.9\n0.2,0.4\n0.8,0.6\n",
    )
    .unwrap();
    fs::write(
        dir.path().join("resources/adjmat/myadjmats/truth.csv"),
        "a,b\n0,1\n0,0\n",
    )
    .unwrap();
    let config = r#"{
        "benchmark_setup": {
            "data": [{"graph_id": "truth.csv", "parameters_id": null, "data_id": "obs.csv", "seed_range": null}],
            "evaluation": {"benchmarks": {"ids": ["sleeper"]}}
        },
        "resources": {
            "structure_learning_algorithms": {
                "external": [{"id": "sleeper", "command": "sleep 10", "timeout": 1.0}]
            }
        }
    }"#;
    let start = std::time::Instant::now();
    let (report, results) = run_config(dir.path(), config, 1);
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!(report.learner_timed_out, 1);
    assert!(!report.hard_failure()); // timeouts are not hard failures
    let out = results.join("output");
    let bench_file = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| {
            p.file_name()
                .unwrap()
                .to_string_lossy()
                .starts_with("benchmarks_")
        })
        .unwrap();
    let content = fs::read_to_string(bench_file).unwrap();
    let row = content.lines().nth(1).unwrap();
    assert!(row.contains("timed_out"), "{row}");
    // all metric cells empty
    assert!(row.ends_with(",,,,,,,,,"), "{row}");
}

#[test]
fn mcmc_diagnostics_emit_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "benchmark_setup": {
            "data": [{"graph_id": "g", "parameters_id": "p", "data_id": "d", "seed_range": [1, 1]}],
            "evaluation": {
                "mcmc_heatmaps": [{"id": "mc", "burn_in": 50}],
                "mcmc_traj_plots": [{"id": "mc", "burn_in": 0, "functional": "score", "thinning": 2}],
                "mcmc_autocorr_plots": [{"id": "mc", "burn_in": 50, "thinning": 1, "functional": "size", "lags": 10}]
            }
        },
        "resources": {
            "graph": {"pcalg_randdag": [{"id": "g", "n": 3, "d": 1, "method": "er"}]},
            "parameters": {"bin_bn": [{"id": "p", "min": 0.1, "max": 0.9}]},
            "data": {"iid": [{"id": "d", "sample_sizes": 100}]},
            "structure_learning_algorithms": {
                "structure_mcmc": [{"id": "mc", "score": "bdeu", "ess": 1, "iterations": 500}]
            }
        }
    }"#;
    let (report, results) = run_config(dir.path(), config, 2);
    assert!(report.failed_jobs.is_empty(), "{:?}", report.failed_jobs);
    let out = results.join("output");
    let names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
        .collect();
    for prefix in ["heatmap_", "traj_", "autocorr_"] {
        assert!(
            names.iter().any(|n| n.starts_with(prefix) && n.ends_with(".csv")),
            "{prefix} csv missing: {names:?}"
        );
        assert!(
            names.iter().any(|n| n.starts_with(prefix) && n.ends_with(".svg")),
            "{prefix} svg missing: {names:?}"
        );
    }
}

/// All files under a root, relative path -> bytes, with timing outputs
/// masked (wall-clock measurements are not reproducible).
pub(crate) fn tree_fingerprint(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().to_string();
                let name = path.file_name().unwrap().to_string_lossy().to_string();
                let bytes = if name == "time" {
                    b"<time>".to_vec()
                } else if name.starts_with("benchmarks_") && name.ends_with(".csv") {
                    // blank the time_s column (5th)
                    let text = fs::read_to_string(&path).unwrap();
                    let mut masked = String::new();
                    for (k, line) in text.lines().enumerate() {
                        if k == 0 {
                            masked.push_str(line);
                        } else {
                            let mut cols: Vec<&str> = line.split(',').collect();
                            if cols.len() > 4 {
                                cols[4] = "<time>";
                            }
                            masked.push_str(&cols.join(","));
                        }
                        masked.push('\n');
                    }
                    masked.into_bytes()
                } else {
                    fs::read(&path).unwrap()
                };
                out.push((rel, bytes));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn forced_reexecution_reproduces_cached_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, results) = run_config(dir.path(), SMALL_V_CONFIG, 2);
    let before = tree_fingerprint(&results);
    // wipe one graph job and one learner job to force recomputation
    let mut wiped = 0;
    for stage in ["graph", "learner"] {
        let stage_dir = results.join(stage);
        let victim = fs::read_dir(&stage_dir).unwrap().next().unwrap().unwrap().path();
        fs::remove_dir_all(&victim).unwrap();
        wiped += 1;
    }
    assert_eq!(wiped, 2);
    let (report, _) = run_config(dir.path(), SMALL_V_CONFIG, 2);
    assert!(report.executed >= 2);
    let after = tree_fingerprint(&results);
    assert_eq!(before.len(), after.len());
    for ((p1, b1), (p2, b2)) in before.iter().zip(after.iter()) {
        assert_eq!(p1, p2);
        assert_eq!(b1, b2, "recomputed {p1} differs from cached bytes");
    }
}

#[test]
fn adding_learners_never_changes_generated_data_bytes() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let (_, results1) = run_config(dir1.path(), SMALL_V_CONFIG, 2);
    let more_learners = SMALL_V_CONFIG.replace(
        r#""bnlearn_hc": [{"id": "hc-bge", "score": "bge", "am": 1}]"#,
        r#""bnlearn_hc": [{"id": "hc-bge", "score": "bge", "am": 1}],
           "bnlearn_tabu": [{"id": "tb", "score": "bge", "am": 1}]"#,
    );
    let (_, results2) = run_config(dir2.path(), &more_learners, 2);
    for stage in ["graph", "parameters", "data"] {
        let a = tree_fingerprint(&results1.join(stage));
        let b = tree_fingerprint(&results2.join(stage));
        assert_eq!(a, b, "{stage} bytes changed when a learner was added");
    }
}

#[test]
fn cores_do_not_change_result_bytes() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let (r1, results1) = run_config(dir1.path(), SMALL_V_CONFIG, 1);
    let (r2, results2) = run_config(dir2.path(), SMALL_V_CONFIG, 4);
    assert!(r1.failed_jobs.is_empty() && r2.failed_jobs.is_empty());
    let f1 = tree_fingerprint(&results1);
    let f2 = tree_fingerprint(&results2);
    assert_eq!(f1.len(), f2.len());
    for ((p1, b1), (p2, b2)) in f1.iter().zip(f2.iter()) {
        assert_eq!(p1, p2);
        assert_eq!(b1, b2, "file {p1} differs between core counts");
    }
}
