//! Job-graph construction: every output is a job keyed by the canonical
//! serialization of everything that determines its bytes.

use std::collections::HashMap;
use std::path::PathBuf;

use serde_json::json;

use super::config::{
    AlgSetting, BenchmarkConfig, BenchmarksEval, DataRef, GraphRef, GraphResource, IidResource,
    McmcEval, ParamResource,
};
use crate::error::{Error, Result};
use crate::seeding::{canonical_json, seed_from_identity, sha256_hex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Graph,
    Parameters,
    Data,
    Learner,
    Evaluation,
}

impl Stage {
    pub fn dir(&self) -> &'static str {
        match self {
            Stage::Graph => "graph",
            Stage::Parameters => "parameters",
            Stage::Data => "data",
            Stage::Learner => "learner",
            Stage::Evaluation => "evaluation",
        }
    }
}

/// What a job does when executed.
#[derive(Debug, Clone)]
pub enum Action {
    GenGraph {
        resource: GraphResource,
        seed: u64,
    },
    FixedGraph {
        path: PathBuf,
    },
    GenParameters {
        resource: ParamResource,
        graph_job: usize,
        seed: u64,
    },
    GenData {
        standardized: bool,
        n: u64,
        discrete: bool,
        param_job: usize,
        seed: u64,
    },
    FixedData {
        path: PathBuf,
    },
    Learner {
        setting: AlgSetting,
        data_job: usize,
        replicate: u64,
        /// derived RNG seed for stochastic native learners
        seed: u64,
    },
    Report(ReportPayload),
    McmcDiag(McmcDiagPayload),
}

/// Per-seed input jobs feeding a report.
#[derive(Debug, Clone)]
pub struct SeedJobs {
    pub seed: u64,
    pub graph_job: Option<usize>,
    pub data_job: usize,
    pub learners: Vec<(AlgSetting, usize)>,
}

#[derive(Debug, Clone)]
pub struct ReportPayload {
    pub benchmarks: Option<BenchmarksEval>,
    pub graph_true_stats: bool,
    pub graph_true_plots: bool,
    pub ggally_ggpairs: bool,
    pub graph_plots: Vec<String>,
    /// filesystem-safe tag naming this data expansion in output files
    pub tag: String,
    pub seeds: Vec<SeedJobs>,
    /// display name of the truth graph (graph_id or filename)
    pub graph_name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McmcDiagKind {
    Heatmap,
    Traj,
    Autocorr,
}

impl McmcDiagKind {
    pub fn tag(&self) -> &'static str {
        match self {
            McmcDiagKind::Heatmap => "heatmap",
            McmcDiagKind::Traj => "traj",
            McmcDiagKind::Autocorr => "autocorr",
        }
    }
}

#[derive(Debug, Clone)]
pub struct McmcDiagPayload {
    pub kind: McmcDiagKind,
    pub eval: McmcEval,
    pub setting: AlgSetting,
    pub seed: u64,
    pub learner_job: usize,
    pub tag: String,
}

#[derive(Debug, Clone)]
pub struct Job {
    pub stage: Stage,
    /// canonical identity; equal keys mean byte-identical outputs
    pub key: String,
    pub key_hash: String,
    pub deps: Vec<usize>,
    pub action: Action,
}

#[derive(Debug, Clone, Default)]
pub struct Plan {
    pub jobs: Vec<Job>,
}

impl Plan {
    pub fn count(&self, stage: Stage) -> usize {
        self.jobs.iter().filter(|j| j.stage == stage).count()
    }

    fn add(&mut self, index: &mut HashMap<String, usize>, job: Job) -> usize {
        if let Some(&id) = index.get(&job.key) {
            return id;
        }
        // dependencies always come first; execution can scan in order
        debug_assert!(job.deps.iter().all(|&d| d < self.jobs.len()));
        let id = self.jobs.len();
        index.insert(job.key.clone(), id);
        self.jobs.push(job);
        id
    }
}

fn file_identity(path: &PathBuf, name: &str) -> Result<serde_json::Value> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(json!({"file": name, "sha256": sha256_hex(&bytes)}))
}

fn sanitize(tag: &str) -> String {
    tag.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// One data expansion: a concrete dataset source for a set of seeds.
struct Expansion {
    tag: String,
    graph_name: String,
    data_identity_base: serde_json::Value,
    kind: ExpansionKind,
}

enum ExpansionKind {
    Generated { n: u64, iid: IidResource },
    FixedFile { path: PathBuf },
}

/// Build the full job DAG for a configuration.
pub fn plan(config: &BenchmarkConfig) -> Result<Plan> {
    let mut plan = Plan::default();
    let mut index: HashMap<String, usize> = HashMap::new();

    for tuple in &config.data_tuples {
        // resolve the graph side once per tuple
        let (graph_identity, graph_name): (Option<serde_json::Value>, String) = match &tuple.graph
        {
            GraphRef::None => (None, "none".to_string()),
            GraphRef::Resource(id, res) => (Some(res.identity()), id.clone()),
            GraphRef::File(name, path) => (Some(file_identity(path, name)?), name.clone()),
        };

        // expansions of the data reference
        let mut expansions: Vec<Expansion> = Vec::new();
        match &tuple.data {
            DataRef::Resource(data_id, iid) => {
                let (pid, _) = tuple.parameters.as_ref().expect("validated");
                for &n in &iid.sample_sizes {
                    expansions.push(Expansion {
                        tag: sanitize(&format!("{}_{}_{}_n{}", graph_name, pid, data_id, n)),
                        graph_name: graph_name.clone(),
                        data_identity_base: json!({
                            "model": "iid", "standardized": iid.standardized, "n": n,
                        }),
                        kind: ExpansionKind::Generated {
                            n,
                            iid: iid.clone(),
                        },
                    });
                }
            }
            DataRef::File(name, path) => {
                expansions.push(Expansion {
                    tag: sanitize(name.trim_end_matches(".csv")),
                    graph_name: graph_name.clone(),
                    data_identity_base: file_identity(path, name)?,
                    kind: ExpansionKind::FixedFile { path: path.clone() },
                });
            }
            DataRef::Directory(name, dir) => {
                let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
                    .map_err(|e| Error::io(dir, e))?
                    .filter_map(|e| e.ok())
                    .map(|e| e.path())
                    .filter(|p| p.is_file())
                    .collect();
                files.sort();
                if files.is_empty() {
                    return Err(Error::Plan(format!(
                        "data directory {name:?} contains no files"
                    )));
                }
                for f in files {
                    let fname = f.file_name().unwrap().to_string_lossy().to_string();
                    expansions.push(Expansion {
                        tag: sanitize(&format!("{}_{}", name, fname.trim_end_matches(".csv"))),
                        graph_name: graph_name.clone(),
                        data_identity_base: file_identity(&f, &fname)?,
                        kind: ExpansionKind::FixedFile { path: f.clone() },
                    });
                }
            }
        }

        let needs_truth = config.evaluation.benchmarks.is_some()
            || config.evaluation.graph_true_stats
            || config.evaluation.graph_true_plots;
        if needs_truth && graph_identity.is_none() {
            return Err(Error::Plan(
                "the benchmarks module requires that graph_id is set to a proper id \
                 (or truth adjacency file); this data tuple has graph_id null"
                    .to_string(),
            ));
        }

        for expansion in &expansions {
            let mut seed_jobs: Vec<SeedJobs> = Vec::new();
            for &seed in &tuple.seeds() {
                // graph job
                let graph_job = match &tuple.graph {
                    GraphRef::None => None,
                    GraphRef::Resource(_, res) => {
                        let identity = json!({
                            "stage": "graph", "spec": res.identity(), "replicate": seed,
                        });
                        let key = canonical_json(&identity);
                        let seed_value = seed_from_identity(&key);
                        Some(plan.add(
                            &mut index,
                            Job {
                                stage: Stage::Graph,
                                key_hash: sha256_hex(key.as_bytes()),
                                key,
                                deps: vec![],
                                action: Action::GenGraph {
                                    resource: res.clone(),
                                    seed: seed_value,
                                },
                            },
                        ))
                    }
                    GraphRef::File(name, path) => {
                        let identity = json!({
                            "stage": "graph", "spec": file_identity(path, name)?,
                        });
                        let key = canonical_json(&identity);
                        Some(plan.add(
                            &mut index,
                            Job {
                                stage: Stage::Graph,
                                key_hash: sha256_hex(key.as_bytes()),
                                key,
                                deps: vec![],
                                action: Action::FixedGraph { path: path.clone() },
                            },
                        ))
                    }
                };

                // parameters + data jobs
                let data_job = match &expansion.kind {
                    ExpansionKind::Generated { n, iid } => {
                        let (_, param_res) = tuple.parameters.as_ref().expect("validated");
                        let graph_job = graph_job.expect("validated: generated data has a graph");
                        let graph_key = plan.jobs[graph_job].key.clone();
                        let param_identity = json!({
                            "stage": "parameters", "spec": param_res.identity(),
                            "graph": graph_key, "replicate": seed,
                        });
                        let param_key = canonical_json(&param_identity);
                        let param_seed = seed_from_identity(&param_key);
                        let param_job = plan.add(
                            &mut index,
                            Job {
                                stage: Stage::Parameters,
                                key_hash: sha256_hex(param_key.as_bytes()),
                                key: param_key.clone(),
                                deps: vec![graph_job],
                                action: Action::GenParameters {
                                    resource: param_res.clone(),
                                    graph_job,
                                    seed: param_seed,
                                },
                            },
                        );
                        let discrete = matches!(param_res, ParamResource::BinBn { .. });
                        let data_identity = json!({
                            "stage": "data", "spec": expansion.data_identity_base,
                            "parameters": param_key, "replicate": seed,
                        });
                        let data_key = canonical_json(&data_identity);
                        let data_seed = seed_from_identity(&data_key);
                        plan.add(
                            &mut index,
                            Job {
                                stage: Stage::Data,
                                key_hash: sha256_hex(data_key.as_bytes()),
                                key: data_key,
                                deps: vec![param_job],
                                action: Action::GenData {
                                    standardized: iid.standardized,
                                    n: *n,
                                    discrete,
                                    param_job,
                                    seed: data_seed,
                                },
                            },
                        )
                    }
                    ExpansionKind::FixedFile { path } => {
                        let identity = json!({
                            "stage": "data", "spec": expansion.data_identity_base,
                        });
                        let key = canonical_json(&identity);
                        plan.add(
                            &mut index,
                            Job {
                                stage: Stage::Data,
                                key_hash: sha256_hex(key.as_bytes()),
                                key,
                                deps: vec![],
                                action: Action::FixedData { path: path.clone() },
                            },
                        )
                    }
                };

                // learner jobs: every defined algorithm setting runs
                let mut learners = Vec::new();
                for setting in &config.algorithms {
                    let data_key = plan.jobs[data_job].key.clone();
                    let identity = json!({
                        "stage": "learner", "algorithm": setting.identity,
                        "data": data_key, "replicate": seed,
                    });
                    let key = canonical_json(&identity);
                    let learner_seed = seed_from_identity(&key);
                    let job = plan.add(
                        &mut index,
                        Job {
                            stage: Stage::Learner,
                            key_hash: sha256_hex(key.as_bytes()),
                            key,
                            deps: vec![data_job],
                            action: Action::Learner {
                                setting: setting.clone(),
                                data_job,
                                replicate: seed,
                                seed: learner_seed,
                            },
                        },
                    );
                    learners.push((setting.clone(), job));
                }
                seed_jobs.push(SeedJobs {
                    seed,
                    graph_job,
                    data_job,
                    learners,
                });
            }

            // one report job per expansion when any summary is requested
            let ev = &config.evaluation;
            if ev.benchmarks.is_some()
                || ev.graph_true_stats
                || ev.graph_true_plots
                || ev.ggally_ggpairs
                || !ev.graph_plots.is_empty()
            {
                let mut deps = Vec::new();
                let mut input_keys: Vec<String> = Vec::new();
                for sj in &seed_jobs {
                    if let Some(g) = sj.graph_job {
                        deps.push(g);
                        input_keys.push(plan.jobs[g].key_hash.clone());
                    }
                    if ev.ggally_ggpairs {
                        deps.push(sj.data_job);
                        input_keys.push(plan.jobs[sj.data_job].key_hash.clone());
                    }
                    for (setting, job) in &sj.learners {
                        let wanted = ev
                            .benchmarks
                            .as_ref()
                            .is_some_and(|b| b.ids.contains(&setting.id))
                            || ev.graph_plots.contains(&setting.id);
                        if wanted {
                            deps.push(*job);
                            input_keys.push(plan.jobs[*job].key_hash.clone());
                        }
                    }
                }
                deps.sort_unstable();
                deps.dedup();
                input_keys.sort();
                input_keys.dedup();
                let eval_identity = json!({
                    "stage": "evaluation", "kind": "report",
                    "benchmarks": ev.benchmarks.as_ref().map(|b| json!({
                        "ids": b.ids, "errorbar": b.errorbar, "scatter": b.scatter,
                        "path": b.path, "compare": format!("{:?}", b.compare),
                        "filename_prefix": b.filename_prefix,
                    })),
                    "graph_true_stats": ev.graph_true_stats,
                    "graph_true_plots": ev.graph_true_plots,
                    "ggally_ggpairs": ev.ggally_ggpairs,
                    "graph_plots": ev.graph_plots,
                    "tag": expansion.tag,
                    "inputs": input_keys,
                });
                let key = canonical_json(&eval_identity);
                plan.add(
                    &mut index,
                    Job {
                        stage: Stage::Evaluation,
                        key_hash: sha256_hex(key.as_bytes()),
                        key,
                        deps,
                        action: Action::Report(ReportPayload {
                            benchmarks: ev.benchmarks.clone(),
                            graph_true_stats: ev.graph_true_stats,
                            graph_true_plots: ev.graph_true_plots,
                            ggally_ggpairs: ev.ggally_ggpairs,
                            graph_plots: ev.graph_plots.clone(),
                            tag: expansion.tag.clone(),
                            seeds: seed_jobs.clone(),
                            graph_name: expansion.graph_name.clone(),
                        }),
                    },
                );
            }

            // per-seed MCMC diagnostic jobs
            let diag_sets: [(&[McmcEval], McmcDiagKind); 3] = [
                (&ev.mcmc_heatmaps, McmcDiagKind::Heatmap),
                (&ev.mcmc_traj_plots, McmcDiagKind::Traj),
                (&ev.mcmc_autocorr_plots, McmcDiagKind::Autocorr),
            ];
            for (evals, kind) in diag_sets {
                for eval in evals {
                    for sj in &seed_jobs {
                        for (setting, learner_job) in &sj.learners {
                            if setting.id != eval.id {
                                continue;
                            }
                            let identity = json!({
                                "stage": "evaluation", "kind": kind.tag(),
                                "burn_in": eval.burn_in, "thinning": eval.thinning,
                                "functional": eval.functional.map(|f| format!("{f:?}")),
                                "lags": eval.lags,
                                "learner": plan.jobs[*learner_job].key_hash,
                                "tag": expansion.tag,
                            });
                            let key = canonical_json(&identity);
                            plan.add(
                                &mut index,
                                Job {
                                    stage: Stage::Evaluation,
                                    key_hash: sha256_hex(key.as_bytes()),
                                    key,
                                    deps: vec![*learner_job],
                                    action: Action::McmcDiag(McmcDiagPayload {
                                        kind,
                                        eval: eval.clone(),
                                        setting: setting.clone(),
                                        seed: sj.seed,
                                        learner_job: *learner_job,
                                        tag: expansion.tag.clone(),
                                    }),
                                },
                            );
                        }
                    }
                }
            }
        }
    }

    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::super::config::tests::{write_config, LISTING_STYLE_CONFIG};
    use super::super::config::parse_config;
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn listing_style_plan_shape() {
        let dir = tempdir().unwrap();
        let path = write_config(dir.path(), LISTING_STYLE_CONFIG);
        let cfg = parse_config(&path).unwrap();
        let plan = plan(&cfg).unwrap();
        // 10 seeds: 10 graph + 10 parameters + 10 data jobs
        assert_eq!(plan.count(Stage::Graph), 10);
        assert_eq!(plan.count(Stage::Parameters), 10);
        assert_eq!(plan.count(Stage::Data), 10);
        // 4 settings (3 pc alphas + 1 tabu) x 10 seeds
        assert_eq!(plan.count(Stage::Learner), 40);
        // single bundled report job
        assert_eq!(plan.count(Stage::Evaluation), 1);
        // dependencies precede dependents
        for (i, job) in plan.jobs.iter().enumerate() {
            for &d in &job.deps {
                assert!(d < i);
            }
        }
    }

    #[test]
    fn scenario_i_with_benchmarks_is_planning_error() {
        let dir = tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("resources/data/mydatasets")).unwrap();
        std::fs::write(
            dir.path().join("resources/data/mydatasets/obs.csv"),
            "a,b\n0.5,0.25\n0.75,1.0\n0.1,0.2\n0.9,0.4\n0.3,0.6\n",
        )
        .unwrap();
        let config = r#"{
            "benchmark_setup": {
                "data": [{"graph_id": null, "parameters_id": null, "data_id": "obs.csv", "seed_range": null}],
                "evaluation": {"benchmarks": {"ids": ["hc"]}}
            },
            "resources": {
                "structure_learning_algorithms": {"bnlearn_hc": [{"id": "hc", "score": "bge"}]}
            }
        }"#;
        let path = write_config(dir.path(), config);
        let cfg = parse_config(&path).unwrap();
        let err = plan(&cfg).unwrap_err().to_string();
        assert!(err.contains("graph_id"), "{err}");
    }

    #[test]
    fn empty_evaluation_still_plans_learners() {
        let dir = tempdir().unwrap();
        let config = r#"{
            "benchmark_setup": {
                "data": [{"graph_id": "g", "parameters_id": "p", "data_id": "d", "seed_range": [1, 3]}],
                "evaluation": {}
            },
            "resources": {
                "graph": {"pcalg_randdag": [{"id": "g", "n": 4, "d": 1, "method": "er"}]},
                "parameters": {"sem_params": [{"id": "p", "min": 0.25, "max": 1}]},
                "data": {"iid": [{"id": "d", "sample_sizes": 30}]},
                "structure_learning_algorithms": {"bnlearn_hc": [{"id": "hc", "score": "bge"}]}
            }
        }"#;
        let path = write_config(dir.path(), config);
        let cfg = parse_config(&path).unwrap();
        let plan = plan(&cfg).unwrap();
        assert_eq!(plan.count(Stage::Learner), 3);
        assert_eq!(plan.count(Stage::Evaluation), 0);
    }

    #[test]
    fn sample_size_list_expands_data_jobs() {
        let dir = tempdir().unwrap();
        let config = r#"{
            "benchmark_setup": {
                "data": [{"graph_id": "g", "parameters_id": "p", "data_id": "d", "seed_range": [1, 2]}],
                "evaluation": {"benchmarks": {"ids": ["hc"]}}
            },
            "resources": {
                "graph": {"pcalg_randdag": [{"id": "g", "n": 4, "d": 1, "method": "er"}]},
                "parameters": {"bin_bn": [{"id": "p", "min": 0.1, "max": 0.9}]},
                "data": {"iid": [{"id": "d", "sample_sizes": [320, 640]}]},
                "structure_learning_algorithms": {"bnlearn_hc": [{"id": "hc"}]}
            }
        }"#;
        let path = write_config(dir.path(), config);
        let cfg = parse_config(&path).unwrap();
        let plan = plan(&cfg).unwrap();
        // graph/parameters shared across the two sample sizes
        assert_eq!(plan.count(Stage::Graph), 2);
        assert_eq!(plan.count(Stage::Parameters), 2);
        assert_eq!(plan.count(Stage::Data), 4);
        assert_eq!(plan.count(Stage::Learner), 4);
        assert_eq!(plan.count(Stage::Evaluation), 2);
    }

    #[test]
    fn fixed_graph_job_shared_across_seeds() {
        let dir = tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("resources/adjmat/myadjmats")).unwrap();
        std::fs::write(
            dir.path().join("resources/adjmat/myadjmats/truth.csv"),
            "a,b,c\n0,1,0\n0,0,1\n0,0,0\n",
        )
        .unwrap();
        let config = r#"{
            "benchmark_setup": {
                "data": [{"graph_id": "truth.csv", "parameters_id": "p", "data_id": "d", "seed_range": [1, 5]}],
                "evaluation": {"benchmarks": {"ids": ["hc"]}}
            },
            "resources": {
                "parameters": {"bin_bn": [{"id": "p", "min": 0.1, "max": 0.9}]},
                "data": {"iid": [{"id": "d", "sample_sizes": 50}]},
                "structure_learning_algorithms": {"bnlearn_hc": [{"id": "hc"}]}
            }
        }"#;
        let path = write_config(dir.path(), config);
        let cfg = parse_config(&path).unwrap();
        let plan = plan(&cfg).unwrap();
        // scenario IV: one shared fixed-graph job, per-seed parameters
        assert_eq!(plan.count(Stage::Graph), 1);
        assert_eq!(plan.count(Stage::Parameters), 5);
        assert_eq!(plan.count(Stage::Data), 5);
    }
}
