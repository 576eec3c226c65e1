//! Parallel execution of a job plan with content-addressed caching.
//!
//! Each job owns one directory under `<results>/<stage>/<hash16>/`. A
//! directory containing a matching `key.json` and the `.ok` marker is a
//! cache hit and is never recomputed. Jobs write into a temp directory
//! first and publish with a single rename, so interrupted runs never
//! leave half-written outputs behind.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Arc;

use super::config::{AlgKind, ParamResource};
use super::plan::{Action, Job, McmcDiagKind, McmcDiagPayload, Plan, ReportPayload, Stage};
use crate::error::{Error, Result};
use crate::evalreport::{
    self, benchmarks_csv, benchmarks_table, graph_stats, graph_stats_csv, mcmcdiag, roc_aggregate,
    roc_csv, svg, ResultEntry,
};
use crate::graphs::LabeledGraph;
use crate::io::{self, fmt_real, read_adjmat, read_data, read_trajectory, write_adjmat};
use crate::learners::{
    hill_climb_with, pc, run_external, structure_mcmc_with, tabu_with, with_timeout, Estimate,
    ExternalSpec, LearnerResult, LearnerStatus,
};
use crate::modelgen::{
    sample_bin_bn, sample_iid_discrete, sample_iid_gaussian, sample_sem_params, Cpt, DiscreteBN,
    GaussianSEM,
};
use crate::scores::ScoreCache;

/// How `execute` treats the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// run everything not cached
    Run,
    /// inputs must be cached; evaluation jobs are re-emitted
    ReportOnly,
}

#[derive(Debug, Clone)]
pub struct ExecOptions {
    pub cores: usize,
    pub mode: ExecMode,
}

/// Outcome summary of one run.
#[derive(Debug, Default)]
pub struct RunReport {
    pub executed: usize,
    pub cached: usize,
    /// job key hash -> error
    pub failed_jobs: Vec<(String, String)>,
    pub skipped: usize,
    pub learner_ok: usize,
    pub learner_timed_out: usize,
    pub learner_failed: usize,
}

impl RunReport {
    /// Nonzero process exit when anything other than a timeout failed.
    pub fn hard_failure(&self) -> bool {
        !self.failed_jobs.is_empty() || self.learner_failed > 0
    }

    pub fn summary(&self) -> String {
        format!(
            "executed {} cached {} skipped {} failed {} | learner ok {} timed_out {} failed {}",
            self.executed,
            self.cached,
            self.skipped,
            self.failed_jobs.len(),
            self.learner_ok,
            self.learner_timed_out,
            self.learner_failed
        )
    }
}

/// Paths and shared context for one run.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub results_root: PathBuf,
}

impl RunContext {
    pub fn job_dir(&self, job: &Job) -> PathBuf {
        self.results_root
            .join(job.stage.dir())
            .join(&job.key_hash[..16])
    }

    fn output_dir(&self) -> PathBuf {
        self.results_root.join("output")
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn is_cached(ctx: &RunContext, job: &Job) -> bool {
    let dir = ctx.job_dir(job);
    let key_ok = std::fs::read_to_string(dir.join("key.json"))
        .map(|k| k == job.key)
        .unwrap_or(false);
    key_ok && dir.join(".ok").exists()
}

#[derive(Debug, Clone, Copy, Default)]
struct JobNote {
    learner_status: Option<LearnerStat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LearnerStat {
    Ok,
    TimedOut,
    Failed,
}

/// Execute the plan with up to `cores` jobs in flight.
pub fn execute(plan: &Plan, ctx: &RunContext, opts: &ExecOptions) -> Result<RunReport> {
    if opts.cores == 0 {
        return Err(Error::InvalidSpec("cores must be >= 1".to_string()));
    }
    std::fs::create_dir_all(&ctx.results_root)
        .map_err(|e| Error::io(&ctx.results_root, e))?;

    let n = plan.jobs.len();
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg: Vec<usize> = vec![0; n];
    for (i, job) in plan.jobs.iter().enumerate() {
        indeg[i] = job.deps.len();
        for &d in &job.deps {
            dependents[d].push(i);
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Pending,
        Done,
        Failed,
        Skipped,
    }
    let mut state = vec![State::Pending; n];
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    ready.reverse(); // pop from the front by index order
    let mut report = RunReport::default();

    let plan_arc = Arc::new(plan.clone());
    let ctx_arc = Arc::new(ctx.clone());
    let (tx, rx) = mpsc::channel::<(usize, Result<JobNote>)>();
    let mut in_flight = 0usize;

    let mut complete =
        |i: usize,
         outcome: Result<JobNote>,
         state: &mut Vec<State>,
         ready: &mut Vec<usize>,
         report: &mut RunReport| {
            match outcome {
                Ok(note) => {
                    state[i] = State::Done;
                    if let Some(ls) = note.learner_status {
                        match ls {
                            LearnerStat::Ok => report.learner_ok += 1,
                            LearnerStat::TimedOut => report.learner_timed_out += 1,
                            LearnerStat::Failed => report.learner_failed += 1,
                        }
                    }
                    for &dep in &dependents[i] {
                        indeg[dep] -= 1;
                        if indeg[dep] == 0 && state[dep] == State::Pending {
                            // insert keeping ascending order at the tail
                            let pos = ready
                                .iter()
                                .rposition(|&r| r > dep)
                                .unwrap_or(ready.len());
                            ready.insert(pos, dep);
                        }
                    }
                }
                Err(e) => {
                    state[i] = State::Failed;
                    report
                        .failed_jobs
                        .push((plan.jobs[i].key_hash[..16].to_string(), e.to_string()));
                    // skip the whole downstream cone
                    let mut stack = dependents[i].clone();
                    while let Some(d) = stack.pop() {
                        if state[d] == State::Pending {
                            state[d] = State::Skipped;
                            report.skipped += 1;
                            stack.extend(dependents[d].iter().copied());
                        }
                    }
                }
            }
        };

    loop {
        while in_flight < opts.cores {
            let Some(i) = ready.pop() else { break };
            if state[i] != State::Pending {
                continue;
            }
            let job = &plan.jobs[i];
            debug_assert!(
                job.deps.iter().all(|&d| state[d] == State::Done),
                "dispatch before dependencies completed"
            );
            let evaluation = job.stage == Stage::Evaluation;
            let cached = is_cached(ctx, job);
            match opts.mode {
                ExecMode::Run => {
                    if cached {
                        report.cached += 1;
                        // learner notes come from the cached status file
                        let note = cached_note(ctx, job);
                        complete(i, Ok(note), &mut state, &mut ready, &mut report);
                        continue;
                    }
                }
                ExecMode::ReportOnly => {
                    if !evaluation {
                        if cached {
                            report.cached += 1;
                            let note = cached_note(ctx, job);
                            complete(i, Ok(note), &mut state, &mut ready, &mut report);
                            continue;
                        }
                        complete(
                            i,
                            Err(Error::Plan(format!(
                                "report mode needs cached results for {} job {}",
                                job.stage.dir(),
                                &job.key_hash[..16]
                            ))),
                            &mut state,
                            &mut ready,
                            &mut report,
                        );
                        continue;
                    }
                }
            }
            report.executed += 1;
            let plan = Arc::clone(&plan_arc);
            let ctx = Arc::clone(&ctx_arc);
            let tx = tx.clone();
            std::thread::spawn(move || {
                let result = run_job(&plan, &ctx, i);
                let _ = tx.send((i, result));
            });
            in_flight += 1;
        }
        if in_flight == 0 {
            break;
        }
        let (i, outcome) = rx.recv().expect("worker channel closed");
        in_flight -= 1;
        complete(i, outcome, &mut state, &mut ready, &mut report);
    }
    Ok(report)
}

fn cached_note(ctx: &RunContext, job: &Job) -> JobNote {
    let mut note = JobNote::default();
    if matches!(job.action, Action::Learner { .. }) {
        let status = std::fs::read_to_string(ctx.job_dir(job).join("status")).unwrap_or_default();
        note.learner_status = Some(match status.lines().next().unwrap_or("") {
            "ok" => LearnerStat::Ok,
            "timed_out" => LearnerStat::TimedOut,
            _ => LearnerStat::Failed,
        });
    }
    note
}

/// Run one job into a temp dir and publish it atomically.
fn run_job(plan: &Plan, ctx: &RunContext, index: usize) -> Result<JobNote> {
    let job = &plan.jobs[index];
    let final_dir = ctx.job_dir(job);
    let tmp_root = ctx.results_root.join(".tmp");
    std::fs::create_dir_all(&tmp_root).map_err(|e| Error::io(&tmp_root, e))?;
    let nonce: u64 = std::process::id() as u64 ^ (index as u64) << 32
        ^ std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .subsec_nanos() as u64;
    let tmp_dir = tmp_root.join(format!("{}-{nonce:x}", &job.key_hash[..16]));
    std::fs::create_dir_all(&tmp_dir).map_err(|e| Error::io(&tmp_dir, e))?;

    let note = run_action(plan, ctx, job, &tmp_dir);
    let note = match note {
        Ok(n) => n,
        Err(e) => {
            let _ = std::fs::remove_dir_all(&tmp_dir);
            return Err(e);
        }
    };
    write_file(&tmp_dir.join("key.json"), &job.key)?;
    write_file(&tmp_dir.join(".ok"), "")?;
    if let Some(parent) = final_dir.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    if final_dir.exists() {
        std::fs::remove_dir_all(&final_dir).map_err(|e| Error::io(&final_dir, e))?;
    }
    std::fs::rename(&tmp_dir, &final_dir).map_err(|e| Error::io(&final_dir, e))?;
    Ok(note)
}

fn run_action(plan: &Plan, ctx: &RunContext, job: &Job, dir: &Path) -> Result<JobNote> {
    match &job.action {
        Action::GenGraph { resource, seed } => {
            let g = generate_graph(resource, *seed)?;
            write_adjmat(&g, &dir.join("adjmat.csv"))?;
            Ok(JobNote::default())
        }
        Action::FixedGraph { path } => {
            let g = read_adjmat(path)?;
            write_adjmat(&g, &dir.join("adjmat.csv"))?;
            Ok(JobNote::default())
        }
        Action::GenParameters {
            resource,
            graph_job,
            seed,
        } => {
            let graph_dir = ctx.job_dir(&plan.jobs[*graph_job]);
            let g = read_adjmat(&graph_dir.join("adjmat.csv"))?;
            match resource {
                ParamResource::BinBn { min, max } => {
                    let bn = sample_bin_bn(&g, *min, *max, *seed)?;
                    write_adjmat(&bn.graph, &dir.join("adjmat.csv"))?;
                    write_file(&dir.join("cpts.json"), &cpts_to_json(&bn))?;
                }
                ParamResource::Sem { min, max } => {
                    let sem = sample_sem_params(&g, *min, *max, *seed)?;
                    write_adjmat(&sem.graph, &dir.join("adjmat.csv"))?;
                    write_file(&dir.join("weights.csv"), &weights_to_csv(&sem))?;
                }
            }
            Ok(JobNote::default())
        }
        Action::GenData {
            standardized,
            n,
            discrete,
            param_job,
            seed,
        } => {
            let param_dir = ctx.job_dir(&plan.jobs[*param_job]);
            let g = read_adjmat(&param_dir.join("adjmat.csv"))?;
            let data = if *discrete {
                let bn = cpts_from_json(
                    &std::fs::read_to_string(param_dir.join("cpts.json"))
                        .map_err(|e| Error::io(param_dir.join("cpts.json"), e))?,
                    g,
                )?;
                sample_iid_discrete(&bn, *n as usize, *seed)?
            } else {
                let sem = weights_from_csv(
                    &std::fs::read_to_string(param_dir.join("weights.csv"))
                        .map_err(|e| Error::io(param_dir.join("weights.csv"), e))?,
                    g,
                )?;
                sample_iid_gaussian(&sem, *n as usize, *standardized, *seed)?
            };
            io::write_data(&data, &dir.join("data.csv"))?;
            Ok(JobNote::default())
        }
        Action::FixedData { path } => {
            read_data(path)?; // validate before accepting
            std::fs::copy(path, dir.join("data.csv")).map_err(|e| Error::io(path, e))?;
            Ok(JobNote::default())
        }
        Action::Learner {
            setting,
            data_job,
            replicate,
            seed,
        } => {
            let data_path = ctx.job_dir(&plan.jobs[*data_job]).join("data.csv");
            let result = run_learner(setting, &data_path, dir, *replicate, *seed)?;
            let stat = write_learner_outputs(&result, dir)?;
            Ok(JobNote {
                learner_status: Some(stat),
            })
        }
        Action::Report(payload) => {
            run_report(plan, ctx, payload, dir)?;
            Ok(JobNote::default())
        }
        Action::McmcDiag(payload) => {
            run_mcmc_diag(plan, ctx, payload, dir)?;
            Ok(JobNote::default())
        }
    }
}

fn generate_graph(
    resource: &super::config::GraphResource,
    seed: u64,
) -> Result<LabeledGraph> {
    use super::config::GraphResource::*;
    match resource {
        RandDag { n, d, max_parents } => crate::netgen::gen_rand_dag(&crate::netgen::RandDagSpec {
            n: *n,
            d: *d,
            max_parents: *max_parents,
            method: "er".to_string(),
            seed,
        }),
        Band { p, bandwidth } => crate::netgen::gen_bandmat(&crate::netgen::BandSpec {
            p: *p,
            bandwidth: *bandwidth,
            seed,
        }),
        RandBand { p, max_bandwidth } => {
            crate::netgen::gen_rand_bandmat(&crate::netgen::BandSpec {
                p: *p,
                bandwidth: *max_bandwidth,
                seed,
            })
        }
    }
}

// internal parameter serializations -----------------------------------

#[derive(serde::Serialize, serde::Deserialize)]
struct CptsFile {
    cards: Vec<usize>,
    parents: Vec<Vec<usize>>,
    rows: Vec<Vec<Vec<f64>>>,
}

fn cpts_to_json(bn: &DiscreteBN) -> String {
    let file = CptsFile {
        cards: bn.cardinalities.clone(),
        parents: bn.cpts.iter().map(|c| c.parents.clone()).collect(),
        rows: bn.cpts.iter().map(|c| c.rows.clone()).collect(),
    };
    serde_json::to_string(&file).expect("serializable")
}

fn cpts_from_json(text: &str, graph: LabeledGraph) -> Result<DiscreteBN> {
    let file: CptsFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidData(format!("cpts.json: {e}")))?;
    Ok(DiscreteBN {
        cardinalities: file.cards,
        cpts: file
            .parents
            .into_iter()
            .zip(file.rows)
            .map(|(parents, rows)| Cpt { parents, rows })
            .collect(),
        graph,
    })
}

fn weights_to_csv(sem: &GaussianSEM) -> String {
    let p = sem.graph.p();
    let mut out = String::new();
    out.push_str(&sem.graph.labels().join(","));
    out.push('\n');
    for i in 0..p {
        let cells: Vec<String> = (0..p).map(|j| fmt_real(sem.w[i * p + j])).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn weights_from_csv(text: &str, graph: LabeledGraph) -> Result<GaussianSEM> {
    let p = graph.p();
    let mut w = vec![0.0; p * p];
    for (i, line) in text.lines().skip(1).enumerate() {
        for (j, cell) in line.split(',').enumerate() {
            w[i * p + j] = cell
                .parse()
                .map_err(|_| Error::InvalidData(format!("weights.csv cell {cell:?}")))?;
        }
    }
    Ok(GaussianSEM {
        graph,
        w,
        noise_mean: 0.0,
        noise_sd: 1.0,
    })
}

// learner dispatch ------------------------------------------------------

fn run_learner(
    setting: &super::config::AlgSetting,
    data_path: &Path,
    workdir: &Path,
    replicate: u64,
    seed: u64,
) -> Result<LearnerResult> {
    match &setting.kind {
        AlgKind::External { command, params } => {
            let spec = ExternalSpec {
                command: command.clone(),
                params: params.clone(),
                timeout: setting.timeout,
            };
            Ok(run_external(
                &spec,
                data_path,
                &workdir.join("plugin"),
                replicate,
            ))
        }
        native => {
            let data = read_data(data_path)?;
            let result = match native {
                AlgKind::Pc {
                    test,
                    alpha,
                    max_cond,
                } => with_timeout(setting.timeout, |token| {
                    let out = pc(&data, *test, *alpha, *max_cond, token)?;
                    Ok((Estimate::Graph(out.graph), Some(out.ntests)))
                }),
                AlgKind::Hc { score } => with_timeout(setting.timeout, |token| {
                    let scorer = ScoreCache::new(score.build(&data)?);
                    let out = hill_climb_with(&data, &scorer, token)?;
                    Ok((Estimate::Graph(out.graph), None))
                }),
                AlgKind::Tabu {
                    score,
                    tabu_len,
                    stagnation,
                } => with_timeout(setting.timeout, |token| {
                    let scorer = ScoreCache::new(score.build(&data)?);
                    let out = tabu_with(&data, &scorer, *tabu_len, *stagnation, token)?;
                    Ok((Estimate::Graph(out.graph), None))
                }),
                AlgKind::Mcmc { score, iterations } => with_timeout(setting.timeout, |token| {
                    let scorer = ScoreCache::new(score.build(&data)?);
                    let traj = structure_mcmc_with(&data, &scorer, *iterations, seed, token)?;
                    Ok((Estimate::Trajectory(traj), None))
                }),
                AlgKind::External { .. } => unreachable!(),
            };
            Ok(result)
        }
    }
}

fn write_learner_outputs(result: &LearnerResult, dir: &Path) -> Result<LearnerStat> {
    let stat = match &result.status {
        LearnerStatus::Ok => {
            match result.estimate.as_ref().expect("ok result has estimate") {
                Estimate::Graph(g) => write_adjmat(g, &dir.join("adjmat.csv"))?,
                Estimate::Trajectory(t) => io::write_trajectory(t, &dir.join("trajectory.csv"))?,
            }
            write_file(&dir.join("status"), "ok\n")?;
            LearnerStat::Ok
        }
        LearnerStatus::TimedOut => {
            write_file(&dir.join("status"), "timed_out\n")?;
            LearnerStat::TimedOut
        }
        LearnerStatus::Failed(diag) => {
            write_file(&dir.join("status"), &format!("failed\n{diag}\n"))?;
            LearnerStat::Failed
        }
    };
    write_file(&dir.join("time"), &format!("{}\n", fmt_real(result.wall_time)))?;
    write_file(
        &dir.join("ntests"),
        &format!(
            "{}\n",
            result
                .ntests
                .map(|v| v.to_string())
                .unwrap_or_else(|| "None".to_string())
        ),
    )?;
    Ok(stat)
}

/// Reconstruct a learner result from its job directory.
fn read_learner_result(dir: &Path) -> Result<LearnerResult> {
    let status_text = std::fs::read_to_string(dir.join("status"))
        .map_err(|e| Error::io(dir.join("status"), e))?;
    let mut lines = status_text.lines();
    let status = match lines.next().unwrap_or("") {
        "ok" => LearnerStatus::Ok,
        "timed_out" => LearnerStatus::TimedOut,
        _ => LearnerStatus::Failed(lines.collect::<Vec<_>>().join("\n")),
    };
    let wall_time: f64 = std::fs::read_to_string(dir.join("time"))
        .ok()
        .and_then(|t| t.trim().parse().ok())
        .unwrap_or(f64::NAN);
    let ntests = std::fs::read_to_string(dir.join("ntests"))
        .ok()
        .and_then(|t| match t.trim() {
            "None" => None,
            other => other.parse::<u64>().ok(),
        });
    let estimate = if matches!(status, LearnerStatus::Ok) {
        if dir.join("adjmat.csv").exists() {
            Some(Estimate::Graph(read_adjmat(&dir.join("adjmat.csv"))?))
        } else {
            Some(Estimate::Trajectory(read_trajectory(
                &dir.join("trajectory.csv"),
            )?))
        }
    } else {
        None
    };
    Ok(LearnerResult {
        estimate,
        wall_time,
        ntests,
        status,
    })
}

// evaluation ------------------------------------------------------------

fn copy_to_output(ctx: &RunContext, prefix: &str, name: &str, content_path: &Path) -> Result<()> {
    let out = ctx.output_dir().join(prefix).join(name);
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::copy(content_path, &out).map_err(|e| Error::io(&out, e))?;
    Ok(())
}

fn run_report(plan: &Plan, ctx: &RunContext, payload: &ReportPayload, dir: &Path) -> Result<()> {
    let mut outputs: Vec<String> = Vec::new();

    // truth graphs per seed
    let mut truths: Vec<(u64, Option<LabeledGraph>)> = Vec::new();
    for sj in &payload.seeds {
        let truth = match sj.graph_job {
            Some(g) => Some(read_adjmat(
                &ctx.job_dir(&plan.jobs[g]).join("adjmat.csv"),
            )?),
            None => None,
        };
        truths.push((sj.seed, truth));
    }

    if let Some(bench) = &payload.benchmarks {
        let mut items = Vec::new();
        for (sj, (_, truth)) in payload.seeds.iter().zip(&truths) {
            for (setting, job) in &sj.learners {
                if !bench.ids.contains(&setting.id) {
                    continue;
                }
                let result = read_learner_result(&ctx.job_dir(&plan.jobs[*job]))?;
                items.push((
                    ResultEntry {
                        algorithm_id: setting.id.clone(),
                        params_hash: setting.params_hash(),
                        varied: setting.varied.clone(),
                        seed: sj.seed,
                        result,
                    },
                    truth.clone(),
                ));
            }
        }
        let rows = benchmarks_table(&items, bench.compare)?;
        let bench_name = format!("benchmarks_{}.csv", payload.tag);
        write_file(&dir.join(&bench_name), &benchmarks_csv(&rows))?;
        outputs.push(bench_name);
        let points = roc_aggregate(&rows);
        let roc_name = format!("roc_{}.csv", payload.tag);
        write_file(&dir.join(&roc_name), &roc_csv(&points))?;
        outputs.push(roc_name);
        let svg_name = format!("roc_{}.svg", payload.tag);
        write_file(
            &dir.join(&svg_name),
            &svg::roc_svg(
                &points,
                bench.errorbar,
                bench.path,
                bench.scatter,
                &payload.tag,
            ),
        )?;
        outputs.push(svg_name);
    }

    if payload.graph_true_stats {
        let rows: Vec<(String, u64, LabeledGraph)> = truths
            .iter()
            .filter_map(|(seed, t)| {
                t.as_ref()
                    .map(|g| (payload.graph_name.clone(), *seed, g.clone()))
            })
            .collect();
        let stats = graph_stats(&rows);
        let name = format!("graph_true_stats_{}.csv", payload.tag);
        write_file(&dir.join(&name), &graph_stats_csv(&stats))?;
        outputs.push(name);
    }

    if payload.graph_true_plots {
        for (seed, truth) in &truths {
            if let Some(g) = truth {
                let matrix: Vec<f64> = (0..g.p())
                    .flat_map(|i| g.row(i).iter().map(|&v| v as f64).collect::<Vec<_>>())
                    .collect();
                let name = format!("graph_true_{}_s{}.svg", payload.tag, seed);
                write_file(
                    &dir.join(&name),
                    &svg::heatmap_svg(&matrix, g.labels(), &format!("true graph seed {seed}")),
                )?;
                outputs.push(name);
            }
        }
    }

    if payload.ggally_ggpairs {
        for sj in &payload.seeds {
            let data = read_data(&ctx.job_dir(&plan.jobs[sj.data_job]).join("data.csv"))?;
            let name = format!("pairs_{}_s{}.svg", payload.tag, sj.seed);
            write_file(
                &dir.join(&name),
                &svg::scatter_matrix_svg(&data, 500, &format!("pairwise data seed {}", sj.seed)),
            )?;
            outputs.push(name);
        }
    }

    for id in &payload.graph_plots {
        for sj in &payload.seeds {
            for (setting, job) in &sj.learners {
                if &setting.id != id {
                    continue;
                }
                let result = read_learner_result(&ctx.job_dir(&plan.jobs[*job]))?;
                if let Some(est) = &result.estimate {
                    let g = evalreport::estimate_graph(est)?;
                    let matrix: Vec<f64> = (0..g.p())
                        .flat_map(|i| g.row(i).iter().map(|&v| v as f64).collect::<Vec<_>>())
                        .collect();
                    let name = format!(
                        "graph_est_{}_{}_{}_s{}.svg",
                        payload.tag,
                        setting.id,
                        setting.params_hash(),
                        sj.seed
                    );
                    write_file(
                        &dir.join(&name),
                        &svg::heatmap_svg(
                            &matrix,
                            g.labels(),
                            &format!("{} seed {}", setting.id, sj.seed),
                        ),
                    )?;
                    outputs.push(name);
                }
            }
        }
    }

    // convenience copies under results/output/
    let prefix = payload
        .benchmarks
        .as_ref()
        .map(|b| b.filename_prefix.clone())
        .unwrap_or_default();
    for name in &outputs {
        copy_to_output(ctx, &prefix, name, &dir.join(name))?;
    }
    Ok(())
}

fn run_mcmc_diag(
    plan: &Plan,
    ctx: &RunContext,
    payload: &McmcDiagPayload,
    dir: &Path,
) -> Result<()> {
    let learner_dir = ctx.job_dir(&plan.jobs[payload.learner_job]);
    let result = read_learner_result(&learner_dir)?;
    let base = format!(
        "{}_{}_{}_{}_s{}",
        payload.kind.tag(),
        payload.tag,
        payload.setting.id,
        payload.setting.params_hash(),
        payload.seed
    );
    let traj = match &result.estimate {
        Some(Estimate::Trajectory(t)) => t.clone(),
        _ => {
            // learner timed out or failed; leave a note instead of plots
            write_file(
                &dir.join("status"),
                &format!("unavailable\nlearner status: {}\n", result.status.tag()),
            )?;
            return Ok(());
        }
    };
    write_file(&dir.join("status"), "ok\n")?;
    let mut outputs = Vec::new();
    match payload.kind {
        McmcDiagKind::Heatmap => {
            let probs = mcmcdiag::edge_posterior(&traj, payload.eval.burn_in)?;
            let p = traj.labels.len();
            let mut csv = traj.labels.join(",");
            csv.push('\n');
            for i in 0..p {
                let cells: Vec<String> =
                    (0..p).map(|j| fmt_real(probs[i * p + j])).collect();
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            let csv_name = format!("{base}.csv");
            write_file(&dir.join(&csv_name), &csv)?;
            outputs.push(csv_name);
            let svg_name = format!("{base}.svg");
            write_file(
                &dir.join(&svg_name),
                &svg::heatmap_svg(&probs, &traj.labels, &base),
            )?;
            outputs.push(svg_name);
        }
        McmcDiagKind::Traj => {
            let series = mcmcdiag::traj_functional(
                &traj,
                payload.eval.functional.expect("validated"),
                payload.eval.burn_in,
                payload.eval.thinning,
            )?;
            let mut csv = String::from("index,value\n");
            for (t, v) in &series {
                csv.push_str(&format!("{t},{}\n", fmt_real(*v)));
            }
            let csv_name = format!("{base}.csv");
            write_file(&dir.join(&csv_name), &csv)?;
            outputs.push(csv_name);
            let svg_name = format!("{base}.svg");
            write_file(&dir.join(&svg_name), &svg::series_svg(&series, &base, "value"))?;
            outputs.push(svg_name);
        }
        McmcDiagKind::Autocorr => {
            let series = mcmcdiag::traj_functional(
                &traj,
                payload.eval.functional.expect("validated"),
                payload.eval.burn_in,
                payload.eval.thinning,
            )?;
            let values: Vec<f64> = series.iter().map(|&(_, v)| v).collect();
            let lags = payload.eval.lags.expect("validated");
            let acf = mcmcdiag::autocorr(&values, lags)?;
            let mut csv = String::from("lag,autocorrelation\n");
            for (k, r) in acf.iter().enumerate() {
                csv.push_str(&format!("{k},{}\n", fmt_real(*r)));
            }
            let csv_name = format!("{base}.csv");
            write_file(&dir.join(&csv_name), &csv)?;
            outputs.push(csv_name);
            let svg_name = format!("{base}.svg");
            write_file(&dir.join(&svg_name), &svg::stems_svg(&acf, &base))?;
            outputs.push(svg_name);
        }
    }
    for name in &outputs {
        copy_to_output(ctx, "", name, &dir.join(name))?;
    }
    Ok(())
}

// validation summary used by the CLI ------------------------------------

/// Human-readable plan summary.
pub fn plan_summary(plan: &Plan) -> String {
    let mut by_stage: BTreeMap<&'static str, usize> = BTreeMap::new();
    for job in &plan.jobs {
        *by_stage.entry(job.stage.dir()).or_insert(0) += 1;
    }
    let parts: Vec<String> = ["graph", "parameters", "data", "learner", "evaluation"]
        .iter()
        .map(|s| format!("{s} {}", by_stage.get(s).copied().unwrap_or(0)))
        .collect();
    format!("{} jobs ({})", plan.jobs.len(), parts.join(", "))
}
