//! Benchmark configuration: JSON surface, normalization and validation.
//!
//! The file has two top-level sections. `resources` holds module objects
//! keyed by a unique `id`; `benchmark_setup` holds the data tuples
//! (graph/parameters/data references plus a seed range) and the
//! evaluation selections. Fixed graphs and datasets are referenced by
//! filename and resolved against `resources/adjmat/myadjmats/` and
//! `resources/data/mydatasets/` next to the config file.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::citests::CiTestKind;
use crate::error::{Error, Result};
use crate::evalreport::CompareMode;
use crate::scores::ScoreSpec;
use crate::seeding::{canonical_json, sha256_hex};

// ---------------------------------------------------------------------
// raw serde surface
// ---------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    benchmark_setup: RawSetup,
    resources: RawResources,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSetup {
    data: Vec<RawDataTuple>,
    evaluation: RawEvaluation,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataTuple {
    #[serde(default)]
    graph_id: Option<String>,
    #[serde(default)]
    parameters_id: Option<String>,
    data_id: String,
    #[serde(default)]
    seed_range: Option<(u64, u64)>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawEvaluation {
    #[serde(default)]
    benchmarks: Option<RawBenchmarksEval>,
    #[serde(default)]
    graph_true_stats: bool,
    #[serde(default)]
    graph_true_plots: bool,
    #[serde(default)]
    ggally_ggpairs: bool,
    #[serde(default)]
    graph_plots: Vec<String>,
    #[serde(default)]
    mcmc_heatmaps: Vec<RawHeatmapEval>,
    #[serde(default)]
    mcmc_traj_plots: Vec<RawTrajEval>,
    #[serde(default)]
    mcmc_autocorr_plots: Vec<RawAutocorrEval>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBenchmarksEval {
    #[serde(default)]
    filename_prefix: String,
    ids: Vec<String>,
    #[serde(default = "default_true")]
    errorbar: bool,
    #[serde(default)]
    errorbarh: bool,
    #[serde(default)]
    scatter: bool,
    #[serde(default = "default_true")]
    path: bool,
    #[serde(default)]
    text: bool,
    #[serde(default)]
    show_seed: bool,
    #[serde(default = "default_compare")]
    compare: String,
}

fn default_true() -> bool {
    true
}

fn default_compare() -> String {
    "cpdag".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeatmapEval {
    id: String,
    burn_in: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrajEval {
    id: String,
    burn_in: i64,
    functional: String,
    #[serde(default = "default_thinning")]
    thinning: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAutocorrEval {
    id: String,
    burn_in: i64,
    #[serde(default = "default_thinning")]
    thinning: i64,
    functional: String,
    lags: usize,
}

fn default_thinning() -> i64 {
    1
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawResources {
    #[serde(default)]
    graph: RawGraphRes,
    #[serde(default)]
    parameters: RawParamRes,
    #[serde(default)]
    data: RawDataRes,
    #[serde(default)]
    structure_learning_algorithms: RawAlgRes,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGraphRes {
    #[serde(default)]
    pcalg_randdag: Vec<RawRandDag>,
    #[serde(default)]
    bandmat: Vec<RawBand>,
    #[serde(default)]
    rand_bandmat: Vec<RawRandBand>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRandDag {
    id: String,
    n: usize,
    d: f64,
    #[serde(default)]
    max_parents: Option<u64>,
    #[serde(default)]
    par1: serde_json::Value,
    #[serde(default)]
    par2: serde_json::Value,
    method: String,
    #[serde(rename = "DAG", default = "default_true")]
    dag: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBand {
    id: String,
    p: usize,
    bandwidth: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRandBand {
    id: String,
    p: usize,
    max_bandwidth: usize,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawParamRes {
    #[serde(default)]
    bin_bn: Vec<RawInterval>,
    #[serde(default)]
    sem_params: Vec<RawInterval>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInterval {
    id: String,
    min: f64,
    max: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDataRes {
    #[serde(default)]
    iid: Vec<RawIid>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIid {
    id: String,
    #[serde(default)]
    standardized: bool,
    sample_sizes: OneOrMany<u64>,
}

/// A scalar or a list of scalars.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(vs) => vs.clone(),
        }
    }

    fn is_list(&self) -> bool {
        matches!(self, OneOrMany::Many(_))
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawAlgRes {
    #[serde(default)]
    pcalg_pc: Vec<RawPc>,
    #[serde(default)]
    bnlearn_hc: Vec<RawHc>,
    #[serde(default)]
    bnlearn_tabu: Vec<RawTabu>,
    #[serde(default)]
    structure_mcmc: Vec<RawMcmc>,
    #[serde(default)]
    external: Vec<RawExternal>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPc {
    id: String,
    alpha: OneOrMany<f64>,
    #[serde(rename = "NAdelete", default = "default_true")]
    _nadelete: bool,
    #[serde(default = "default_mmax")]
    mmax: MmaxField,
    #[serde(default = "default_u2pd")]
    u2pd: String,
    #[serde(default = "default_skelmethod")]
    skelmethod: String,
    #[serde(default)]
    conservative: bool,
    #[serde(default)]
    majrule: bool,
    #[serde(default)]
    solveconfl: bool,
    #[serde(rename = "numCores", default = "default_one")]
    _num_cores: u64,
    #[serde(default)]
    verbose: bool,
    #[serde(rename = "indepTest", default = "default_indep_test")]
    indep_test: String,
    #[serde(default)]
    timeout: Option<f64>,
}

fn default_u2pd() -> String {
    "relaxed".to_string()
}

fn default_skelmethod() -> String {
    "stable".to_string()
}

fn default_indep_test() -> String {
    "gaussCItest".to_string()
}

fn default_one() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MmaxField {
    Text(String),
    Count(u64),
}

fn default_mmax() -> MmaxField {
    MmaxField::Text("Inf".to_string())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHc {
    id: String,
    #[serde(default = "default_score")]
    score: String,
    #[serde(default = "default_ess")]
    ess: OneOrMany<f64>,
    #[serde(default = "default_am")]
    am: OneOrMany<f64>,
    #[serde(default)]
    aw: Option<OneOrMany<f64>>,
    #[serde(default)]
    timeout: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTabu {
    id: String,
    #[serde(default = "default_score")]
    score: String,
    #[serde(default = "default_ess")]
    ess: OneOrMany<f64>,
    #[serde(default = "default_am")]
    am: OneOrMany<f64>,
    #[serde(default)]
    aw: Option<OneOrMany<f64>>,
    #[serde(default = "default_tabu_len")]
    tabu: usize,
    #[serde(default = "default_stagnation")]
    stagnation: usize,
    #[serde(default)]
    timeout: Option<f64>,
}

fn default_score() -> String {
    "bdeu".to_string()
}

fn default_ess() -> OneOrMany<f64> {
    OneOrMany::One(1.0)
}

fn default_am() -> OneOrMany<f64> {
    OneOrMany::One(1.0)
}

fn default_tabu_len() -> usize {
    10
}

fn default_stagnation() -> usize {
    10
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMcmc {
    id: String,
    #[serde(default = "default_score")]
    score: String,
    #[serde(default = "default_ess")]
    ess: OneOrMany<f64>,
    #[serde(default = "default_am")]
    am: OneOrMany<f64>,
    #[serde(default)]
    aw: Option<OneOrMany<f64>>,
    iterations: u64,
    #[serde(default)]
    timeout: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct RawExternal {
    id: String,
    command: String,
    #[serde(default)]
    timeout: Option<f64>,
    #[serde(flatten)]
    extra: BTreeMap<String, serde_json::Value>,
}

// ---------------------------------------------------------------------
// normalized model
// ---------------------------------------------------------------------

/// Graph generator resource.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphResource {
    RandDag {
        n: usize,
        d: f64,
        max_parents: Option<usize>,
    },
    Band {
        p: usize,
        bandwidth: usize,
    },
    RandBand {
        p: usize,
        max_bandwidth: usize,
    },
}

impl GraphResource {
    pub fn identity(&self) -> serde_json::Value {
        match self {
            GraphResource::RandDag { n, d, max_parents } => serde_json::json!({
                "generator": "pcalg_randdag", "method": "er",
                "n": n, "d": d, "max_parents": max_parents,
            }),
            GraphResource::Band { p, bandwidth } => serde_json::json!({
                "generator": "bandmat", "p": p, "bandwidth": bandwidth,
            }),
            GraphResource::RandBand { p, max_bandwidth } => serde_json::json!({
                "generator": "rand_bandmat", "p": p, "max_bandwidth": max_bandwidth,
            }),
        }
    }
}

/// Parameter sampler resource.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamResource {
    BinBn { min: f64, max: f64 },
    Sem { min: f64, max: f64 },
}

impl ParamResource {
    pub fn identity(&self) -> serde_json::Value {
        match self {
            ParamResource::BinBn { min, max } => {
                serde_json::json!({"sampler": "bin_bn", "min": min, "max": max})
            }
            ParamResource::Sem { min, max } => {
                serde_json::json!({"sampler": "sem_params", "min": min, "max": max})
            }
        }
    }
}

/// The iid data model resource.
#[derive(Debug, Clone, PartialEq)]
pub struct IidResource {
    pub standardized: bool,
    pub sample_sizes: Vec<u64>,
}

/// One expanded algorithm parameter setting.
#[derive(Debug, Clone)]
pub struct AlgSetting {
    pub id: String,
    pub kind: AlgKind,
    /// Varied parameter (name, value) when the object listed several.
    pub varied: Option<(String, serde_json::Value)>,
    /// Canonical identity of this setting (excludes data and replicate).
    pub identity: serde_json::Value,
    pub timeout: Option<f64>,
}

impl AlgSetting {
    pub fn params_hash(&self) -> String {
        sha256_hex(canonical_json(&self.identity).as_bytes())[..12].to_string()
    }
}

#[derive(Debug, Clone)]
pub enum AlgKind {
    Pc {
        test: CiTestKind,
        alpha: f64,
        max_cond: Option<usize>,
    },
    Hc {
        score: ScoreSpec,
    },
    Tabu {
        score: ScoreSpec,
        tabu_len: usize,
        stagnation: usize,
    },
    Mcmc {
        score: ScoreSpec,
        iterations: u64,
    },
    External {
        command: String,
        params: BTreeMap<String, String>,
    },
}

impl AlgKind {
    pub fn produces_trajectory(&self) -> bool {
        matches!(self, AlgKind::Mcmc { .. })
    }
}

/// Data tuple after reference resolution.
#[derive(Debug, Clone)]
pub struct DataTuple {
    pub graph: GraphRef,
    pub parameters: Option<(String, ParamResource)>,
    pub data: DataRef,
    pub seed_range: Option<(u64, u64)>,
}

impl DataTuple {
    pub fn seeds(&self) -> Vec<u64> {
        match self.seed_range {
            Some((lo, hi)) => (lo..=hi).collect(),
            None => vec![0],
        }
    }
}

#[derive(Debug, Clone)]
pub enum GraphRef {
    None,
    Resource(String, GraphResource),
    /// Fixed adjacency matrix: display name and resolved path.
    File(String, PathBuf),
}

#[derive(Debug, Clone)]
pub enum DataRef {
    Resource(String, IidResource),
    File(String, PathBuf),
    /// Every file inside the directory becomes a dataset.
    Directory(String, PathBuf),
}

#[derive(Debug, Clone)]
pub struct BenchmarksEval {
    pub filename_prefix: String,
    pub ids: Vec<String>,
    pub errorbar: bool,
    pub scatter: bool,
    pub path: bool,
    pub compare: CompareMode,
}

#[derive(Debug, Clone)]
pub struct McmcEval {
    pub id: String,
    pub burn_in: i64,
    pub thinning: i64,
    pub functional: Option<crate::evalreport::mcmcdiag::Functional>,
    pub lags: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct Evaluation {
    pub benchmarks: Option<BenchmarksEval>,
    pub graph_true_stats: bool,
    pub graph_true_plots: bool,
    pub ggally_ggpairs: bool,
    pub graph_plots: Vec<String>,
    pub mcmc_heatmaps: Vec<McmcEval>,
    pub mcmc_traj_plots: Vec<McmcEval>,
    pub mcmc_autocorr_plots: Vec<McmcEval>,
}

/// Parsed, validated configuration.
#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub base_dir: PathBuf,
    pub data_tuples: Vec<DataTuple>,
    pub evaluation: Evaluation,
    /// All algorithm settings, expansion included, in config order.
    pub algorithms: Vec<AlgSetting>,
}

impl BenchmarkConfig {
    pub fn settings_for_id(&self, id: &str) -> Vec<&AlgSetting> {
        self.algorithms.iter().filter(|s| s.id == id).collect()
    }
}

// ---------------------------------------------------------------------
// parsing and validation
// ---------------------------------------------------------------------

fn cfg_err(path: &str, msg: impl Into<String>) -> Error {
    Error::config(path, msg.into())
}

/// Parse and validate a configuration file.
pub fn parse_config(path: &Path) -> Result<BenchmarkConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| cfg_err(&e.path().to_string(), e.inner().to_string()))?;
    let base_dir = path
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    normalize(raw, base_dir)
}

fn check_unique_ids<'a>(
    ids: impl Iterator<Item = (&'a str, String)>,
    section: &str,
) -> Result<()> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for (id, at) in ids {
        if !seen.insert(id) {
            return Err(cfg_err(&at, format!("duplicate id {id:?} in {section}")));
        }
    }
    Ok(())
}

/// (field name, expanded values) pairs plus the varied field, if any.
type ExpandedFields = (Vec<(String, Vec<f64>)>, Option<String>);

fn varied_f64(fields: &[(&str, &OneOrMany<f64>)], at: &str) -> Result<ExpandedFields> {
    let mut expanded = Vec::new();
    let mut varied: Option<String> = None;
    for (name, v) in fields {
        if v.is_list() {
            if let Some(prev) = &varied {
                return Err(cfg_err(
                    at,
                    format!("both {prev:?} and {name:?} are lists; only one parameter may vary"),
                ));
            }
            let vs = v.to_vec();
            if vs.is_empty() {
                return Err(cfg_err(at, format!("varied parameter {name:?} is empty")));
            }
            varied = Some(name.to_string());
        }
        expanded.push((name.to_string(), v.to_vec()));
    }
    Ok((expanded, varied))
}

/// Cartesian expansion when exactly one field is a list.
fn expand_settings(
    fields: Vec<(String, Vec<f64>)>,
    varied: &Option<String>,
) -> Vec<BTreeMap<String, f64>> {
    let mut base: BTreeMap<String, f64> = BTreeMap::new();
    let mut variants: Vec<(String, Vec<f64>)> = Vec::new();
    for (name, values) in fields {
        if Some(&name) == varied.as_ref() {
            variants.push((name, values));
        } else {
            base.insert(name, values[0]);
        }
    }
    match variants.pop() {
        None => vec![base],
        Some((name, values)) => values
            .into_iter()
            .map(|v| {
                let mut m = base.clone();
                m.insert(name.clone(), v);
                m
            })
            .collect(),
    }
}

fn score_spec(
    score: &str,
    vals: &BTreeMap<String, f64>,
    aw_given: bool,
    at: &str,
) -> Result<ScoreSpec> {
    match score {
        "bdeu" => Ok(ScoreSpec::Bdeu { ess: vals["ess"] }),
        "bge" => Ok(ScoreSpec::Bge {
            am: vals["am"],
            aw: aw_given.then(|| vals["aw"]),
        }),
        other => Err(cfg_err(
            at,
            format!("unknown score {other:?} (expected bdeu|bge)"),
        )),
    }
}

fn score_identity(score: &str, spec: &ScoreSpec) -> serde_json::Value {
    match spec {
        ScoreSpec::Bdeu { ess } => serde_json::json!({"score": score, "ess": ess}),
        ScoreSpec::Bge { am, aw } => serde_json::json!({"score": score, "am": am, "aw": aw}),
    }
}

#[allow(clippy::too_many_arguments)]
fn expand_score_based(
    id: &str,
    score: &str,
    ess: &OneOrMany<f64>,
    am: &OneOrMany<f64>,
    aw: &Option<OneOrMany<f64>>,
    timeout: Option<f64>,
    at: &str,
    build: impl Fn(ScoreSpec) -> (AlgKind, serde_json::Value),
) -> Result<Vec<AlgSetting>> {
    let aw_given = aw.is_some();
    let aw_field = aw.clone().unwrap_or(OneOrMany::One(f64::NAN));
    let mut fields: Vec<(&str, &OneOrMany<f64>)> = vec![("ess", ess), ("am", am)];
    if aw_given {
        fields.push(("aw", &aw_field));
    }
    let (expanded, varied) = varied_f64(&fields, at)?;
    if let Some(v) = &varied {
        // only parameters of the selected score may vary
        let relevant = match score {
            "bdeu" => v == "ess",
            _ => v == "am" || v == "aw",
        };
        if !relevant {
            return Err(cfg_err(
                at,
                format!("varied parameter {v:?} does not belong to score {score:?}"),
            ));
        }
    }
    let mut out = Vec::new();
    for vals in expand_settings(expanded, &varied) {
        let spec = score_spec(score, &vals, aw_given, at)?;
        let (kind, identity) = build(spec);
        out.push(AlgSetting {
            id: id.to_string(),
            kind,
            varied: varied
                .as_ref()
                .map(|name| (name.clone(), serde_json::json!(vals[name.as_str()]))),
            identity,
            timeout,
        });
    }
    Ok(out)
}

fn normalize(raw: RawConfig, base_dir: PathBuf) -> Result<BenchmarkConfig> {
    // resources: graphs
    let mut graphs: BTreeMap<String, GraphResource> = BTreeMap::new();
    {
        let g = &raw.resources.graph;
        check_unique_ids(
            g.pcalg_randdag
                .iter()
                .map(|o| (o.id.as_str(), "resources.graph.pcalg_randdag".to_string()))
                .chain(
                    g.bandmat
                        .iter()
                        .map(|o| (o.id.as_str(), "resources.graph.bandmat".to_string())),
                )
                .chain(
                    g.rand_bandmat
                        .iter()
                        .map(|o| (o.id.as_str(), "resources.graph.rand_bandmat".to_string())),
                ),
            "resources.graph",
        )?;
        for (k, o) in g.pcalg_randdag.iter().enumerate() {
            let at = format!("resources.graph.pcalg_randdag[{k}]");
            if o.method != "er" {
                return Err(cfg_err(
                    &format!("{at}.method"),
                    format!("unsupported method {:?} (only \"er\")", o.method),
                ));
            }
            if !o.par1.is_null() || !o.par2.is_null() {
                return Err(cfg_err(
                    &format!("{at}.par1"),
                    "par1/par2 must be null for method \"er\"",
                ));
            }
            if !o.dag {
                return Err(cfg_err(
                    &format!("{at}.DAG"),
                    "only DAG output is supported (\"DAG\": true)",
                ));
            }
            graphs.insert(
                o.id.clone(),
                GraphResource::RandDag {
                    n: o.n,
                    d: o.d,
                    max_parents: o.max_parents.map(|v| v as usize),
                },
            );
        }
        for o in &g.bandmat {
            graphs.insert(
                o.id.clone(),
                GraphResource::Band {
                    p: o.p,
                    bandwidth: o.bandwidth,
                },
            );
        }
        for o in &g.rand_bandmat {
            graphs.insert(
                o.id.clone(),
                GraphResource::RandBand {
                    p: o.p,
                    max_bandwidth: o.max_bandwidth,
                },
            );
        }
    }

    // resources: parameters
    let mut params: BTreeMap<String, ParamResource> = BTreeMap::new();
    {
        let p = &raw.resources.parameters;
        check_unique_ids(
            p.bin_bn
                .iter()
                .map(|o| (o.id.as_str(), "resources.parameters.bin_bn".to_string()))
                .chain(
                    p.sem_params
                        .iter()
                        .map(|o| (o.id.as_str(), "resources.parameters.sem_params".to_string())),
                ),
            "resources.parameters",
        )?;
        for o in &p.bin_bn {
            params.insert(
                o.id.clone(),
                ParamResource::BinBn {
                    min: o.min,
                    max: o.max,
                },
            );
        }
        for o in &p.sem_params {
            params.insert(
                o.id.clone(),
                ParamResource::Sem {
                    min: o.min,
                    max: o.max,
                },
            );
        }
    }

    // resources: data
    let mut iids: BTreeMap<String, IidResource> = BTreeMap::new();
    check_unique_ids(
        raw.resources
            .data
            .iid
            .iter()
            .map(|o| (o.id.as_str(), "resources.data.iid".to_string())),
        "resources.data",
    )?;
    for (k, o) in raw.resources.data.iid.iter().enumerate() {
        let sizes = o.sample_sizes.to_vec();
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(cfg_err(
                &format!("resources.data.iid[{k}].sample_sizes"),
                "sample sizes must be positive",
            ));
        }
        iids.insert(
            o.id.clone(),
            IidResource {
                standardized: o.standardized,
                sample_sizes: sizes,
            },
        );
    }

    // resources: algorithms
    let mut algorithms: Vec<AlgSetting> = Vec::new();
    let a = &raw.resources.structure_learning_algorithms;
    check_unique_ids(
        a.pcalg_pc
            .iter()
            .map(|o| {
                (
                    o.id.as_str(),
                    "resources.structure_learning_algorithms.pcalg_pc".to_string(),
                )
            })
            .chain(a.bnlearn_hc.iter().map(|o| {
                (
                    o.id.as_str(),
                    "resources.structure_learning_algorithms.bnlearn_hc".to_string(),
                )
            }))
            .chain(a.bnlearn_tabu.iter().map(|o| {
                (
                    o.id.as_str(),
                    "resources.structure_learning_algorithms.bnlearn_tabu".to_string(),
                )
            }))
            .chain(a.structure_mcmc.iter().map(|o| {
                (
                    o.id.as_str(),
                    "resources.structure_learning_algorithms.structure_mcmc".to_string(),
                )
            }))
            .chain(a.external.iter().map(|o| {
                (
                    o.id.as_str(),
                    "resources.structure_learning_algorithms.external".to_string(),
                )
            })),
        "resources.structure_learning_algorithms",
    )?;

    for (k, o) in a.pcalg_pc.iter().enumerate() {
        let at = format!("resources.structure_learning_algorithms.pcalg_pc[{k}]");
        if o.skelmethod != "stable" {
            return Err(cfg_err(
                &format!("{at}.skelmethod"),
                format!(
                    "only the \"stable\" skeleton is implemented, got {:?}",
                    o.skelmethod
                ),
            ));
        }
        if o.u2pd != "relaxed" {
            return Err(cfg_err(
                &format!("{at}.u2pd"),
                format!(
                    "only the \"relaxed\" orientation is implemented, got {:?}",
                    o.u2pd
                ),
            ));
        }
        if o.conservative || o.majrule || o.solveconfl {
            return Err(cfg_err(
                &format!("{at}.conservative"),
                "conservative/majrule/solveconfl variants are not implemented; set them to false",
            ));
        }
        if o.verbose {
            return Err(cfg_err(
                &format!("{at}.verbose"),
                "verbose output is not supported",
            ));
        }
        let test = match o.indep_test.as_str() {
            "gaussCItest" => CiTestKind::FisherZ,
            "binCItest" | "disCItest" => CiTestKind::G2,
            other => {
                return Err(cfg_err(
                    &format!("{at}.indepTest"),
                    format!("unknown test {other:?} (gaussCItest|binCItest|disCItest)"),
                ))
            }
        };
        let max_cond = match &o.mmax {
            MmaxField::Text(s) if s == "Inf" => None,
            MmaxField::Text(s) => {
                return Err(cfg_err(
                    &format!("{at}.mmax"),
                    format!("mmax must be \"Inf\" or a count, got {s:?}"),
                ))
            }
            MmaxField::Count(v) => Some(*v as usize),
        };
        for alpha in o.alpha.to_vec() {
            let identity = serde_json::json!({
                "kind": "pcalg_pc", "alpha": alpha,
                "indepTest": o.indep_test, "mmax": max_cond,
            });
            algorithms.push(AlgSetting {
                id: o.id.clone(),
                kind: AlgKind::Pc {
                    test,
                    alpha,
                    max_cond,
                },
                varied: o
                    .alpha
                    .is_list()
                    .then(|| ("alpha".to_string(), serde_json::json!(alpha))),
                identity,
                timeout: o.timeout,
            });
        }
    }

    for (k, o) in a.bnlearn_hc.iter().enumerate() {
        let at = format!("resources.structure_learning_algorithms.bnlearn_hc[{k}]");
        algorithms.extend(expand_score_based(
            &o.id,
            &o.score,
            &o.ess,
            &o.am,
            &o.aw,
            o.timeout,
            &at,
            |spec| {
                let identity = serde_json::json!({
                    "kind": "bnlearn_hc", "score": score_identity(&o.score, &spec),
                });
                (AlgKind::Hc { score: spec }, identity)
            },
        )?);
    }

    for (k, o) in a.bnlearn_tabu.iter().enumerate() {
        let at = format!("resources.structure_learning_algorithms.bnlearn_tabu[{k}]");
        algorithms.extend(expand_score_based(
            &o.id,
            &o.score,
            &o.ess,
            &o.am,
            &o.aw,
            o.timeout,
            &at,
            |spec| {
                let identity = serde_json::json!({
                    "kind": "bnlearn_tabu", "score": score_identity(&o.score, &spec),
                    "tabu": o.tabu, "stagnation": o.stagnation,
                });
                (
                    AlgKind::Tabu {
                        score: spec,
                        tabu_len: o.tabu,
                        stagnation: o.stagnation,
                    },
                    identity,
                )
            },
        )?);
    }

    for (k, o) in a.structure_mcmc.iter().enumerate() {
        let at = format!("resources.structure_learning_algorithms.structure_mcmc[{k}]");
        if o.iterations == 0 {
            return Err(cfg_err(
                &format!("{at}.iterations"),
                "iterations must be >= 1",
            ));
        }
        algorithms.extend(expand_score_based(
            &o.id,
            &o.score,
            &o.ess,
            &o.am,
            &o.aw,
            o.timeout,
            &at,
            |spec| {
                let identity = serde_json::json!({
                    "kind": "structure_mcmc", "score": score_identity(&o.score, &spec),
                    "iterations": o.iterations,
                });
                (
                    AlgKind::Mcmc {
                        score: spec,
                        iterations: o.iterations,
                    },
                    identity,
                )
            },
        )?);
    }

    for (k, o) in a.external.iter().enumerate() {
        let at = format!("resources.structure_learning_algorithms.external[{k}]");
        // one extra key may hold a list: the varied parameter
        let mut varied_key: Option<String> = None;
        for (key, value) in &o.extra {
            if value.is_array() {
                if let Some(prev) = &varied_key {
                    return Err(cfg_err(
                        &format!("{at}.{key}"),
                        format!(
                            "both {prev:?} and {key:?} are lists; only one parameter may vary"
                        ),
                    ));
                }
                if value.as_array().unwrap().is_empty() {
                    return Err(cfg_err(&format!("{at}.{key}"), "varied parameter is empty"));
                }
                varied_key = Some(key.clone());
            } else if !(value.is_number() || value.is_string() || value.is_boolean()) {
                return Err(cfg_err(
                    &format!("{at}.{key}"),
                    "external parameters must be scalars or one list",
                ));
            }
        }
        let variants: Vec<Option<serde_json::Value>> = match &varied_key {
            Some(key) => o.extra[key]
                .as_array()
                .unwrap()
                .iter()
                .cloned()
                .map(Some)
                .collect(),
            None => vec![None],
        };
        for variant in variants {
            let mut rendered: BTreeMap<String, String> = BTreeMap::new();
            let mut identity_params = serde_json::Map::new();
            for (key, value) in &o.extra {
                let effective = match (&varied_key, &variant) {
                    (Some(vk), Some(v)) if vk == key => v.clone(),
                    _ => value.clone(),
                };
                rendered.insert(key.clone(), scalar_to_string(&effective));
                identity_params.insert(key.clone(), effective);
            }
            let identity = serde_json::json!({
                "kind": "external", "command": o.command,
                "params": serde_json::Value::Object(identity_params),
            });
            algorithms.push(AlgSetting {
                id: o.id.clone(),
                kind: AlgKind::External {
                    command: o.command.clone(),
                    params: rendered,
                },
                varied: varied_key
                    .as_ref()
                    .map(|vk| (vk.clone(), variant.clone().unwrap())),
                identity,
                timeout: o.timeout,
            });
        }
    }

    // data tuples
    let mut data_tuples = Vec::new();
    for (k, t) in raw.benchmark_setup.data.iter().enumerate() {
        let at = format!("benchmark_setup.data[{k}]");
        let data = resolve_data_ref(&t.data_id, &iids, &base_dir, &format!("{at}.data_id"))?;
        let graph = match &t.graph_id {
            None => GraphRef::None,
            Some(id) => resolve_graph_ref(id, &graphs, &base_dir, &format!("{at}.graph_id"))?,
        };
        let parameters = match &t.parameters_id {
            None => None,
            Some(id) => Some((
                id.clone(),
                resolve_param_ref(id, &params, &base_dir, &format!("{at}.parameters_id"))?,
            )),
        };
        match &data {
            DataRef::Resource(_, _) => {
                if t.seed_range.is_none() {
                    return Err(cfg_err(
                        &format!("{at}.seed_range"),
                        "generated data needs a seed_range",
                    ));
                }
                if let Some((lo, hi)) = t.seed_range {
                    if lo > hi {
                        return Err(cfg_err(
                            &format!("{at}.seed_range"),
                            format!("empty seed range [{lo}, {hi}]"),
                        ));
                    }
                }
                if matches!(graph, GraphRef::None) {
                    return Err(cfg_err(
                        &format!("{at}.graph_id"),
                        "generated data needs a graph_id",
                    ));
                }
                if parameters.is_none() {
                    return Err(cfg_err(
                        &format!("{at}.parameters_id"),
                        "generated data needs a parameters_id",
                    ));
                }
                if let (DataRef::Resource(_, iid), Some((_, ParamResource::BinBn { .. }))) =
                    (&data, &parameters)
                {
                    if iid.standardized {
                        return Err(cfg_err(
                            &format!("{at}.data_id"),
                            "standardized sampling applies to continuous models only",
                        ));
                    }
                }
            }
            DataRef::File(_, _) => {
                if t.seed_range.is_some() {
                    return Err(cfg_err(
                        &format!("{at}.seed_range"),
                        "fixed data requires seed_range null",
                    ));
                }
                if parameters.is_some() {
                    return Err(cfg_err(
                        &format!("{at}.parameters_id"),
                        "fixed data takes no parameters_id",
                    ));
                }
            }
            DataRef::Directory(_, _) => {
                if t.seed_range.is_some()
                    || parameters.is_some()
                    || !matches!(graph, GraphRef::None)
                {
                    return Err(cfg_err(
                        &at,
                        "a directory data_id requires graph_id, parameters_id and seed_range to be null",
                    ));
                }
            }
        }
        data_tuples.push(DataTuple {
            graph,
            parameters,
            data,
            seed_range: t.seed_range,
        });
    }
    if data_tuples.is_empty() {
        return Err(cfg_err("benchmark_setup.data", "no data tuples defined"));
    }

    // evaluation
    let ev = &raw.benchmark_setup.evaluation;
    let defined_ids: BTreeSet<&str> = algorithms.iter().map(|s| s.id.as_str()).collect();
    let check_alg_ref = |id: &str, at: &str| -> Result<()> {
        if !defined_ids.contains(id) {
            return Err(cfg_err(at, format!("undefined algorithm id {id:?}")));
        }
        Ok(())
    };
    let benchmarks = match &ev.benchmarks {
        None => None,
        Some(b) => {
            if b.ids.is_empty() {
                return Err(cfg_err(
                    "benchmark_setup.evaluation.benchmarks.ids",
                    "benchmarks needs at least one algorithm id",
                ));
            }
            for (k, id) in b.ids.iter().enumerate() {
                check_alg_ref(id, &format!("benchmark_setup.evaluation.benchmarks.ids[{k}]"))?;
            }
            // errorbarh/text/show_seed are accepted for config compatibility
            let _ = (b.errorbarh, b.text, b.show_seed);
            Some(BenchmarksEval {
                filename_prefix: b.filename_prefix.clone(),
                ids: b.ids.clone(),
                errorbar: b.errorbar,
                scatter: b.scatter,
                path: b.path,
                compare: CompareMode::parse(&b.compare).map_err(|e| {
                    cfg_err(
                        "benchmark_setup.evaluation.benchmarks.compare",
                        e.to_string(),
                    )
                })?,
            })
        }
    };
    for (k, id) in ev.graph_plots.iter().enumerate() {
        check_alg_ref(id, &format!("benchmark_setup.evaluation.graph_plots[{k}]"))?;
    }
    let mcmc_ids: BTreeSet<&str> = algorithms
        .iter()
        .filter(|s| s.kind.produces_trajectory())
        .map(|s| s.id.as_str())
        .collect();
    let check_mcmc_ref = |id: &str, at: &str| -> Result<()> {
        check_alg_ref(id, at)?;
        if !mcmc_ids.contains(id) {
            return Err(cfg_err(at, format!("id {id:?} does not produce a trajectory")));
        }
        Ok(())
    };
    let mut mcmc_heatmaps = Vec::new();
    for (k, o) in ev.mcmc_heatmaps.iter().enumerate() {
        let at = format!("benchmark_setup.evaluation.mcmc_heatmaps[{k}]");
        check_mcmc_ref(&o.id, &at)?;
        if o.burn_in < 0 {
            return Err(cfg_err(&format!("{at}.burn_in"), "burn_in must be >= 0"));
        }
        mcmc_heatmaps.push(McmcEval {
            id: o.id.clone(),
            burn_in: o.burn_in,
            thinning: 1,
            functional: None,
            lags: None,
        });
    }
    let mut mcmc_traj_plots = Vec::new();
    for (k, o) in ev.mcmc_traj_plots.iter().enumerate() {
        let at = format!("benchmark_setup.evaluation.mcmc_traj_plots[{k}]");
        check_mcmc_ref(&o.id, &at)?;
        let functional = crate::evalreport::mcmcdiag::Functional::parse(&o.functional)
            .map_err(|e| cfg_err(&format!("{at}.functional"), e.to_string()))?;
        if o.thinning < 1 {
            return Err(cfg_err(&format!("{at}.thinning"), "thinning must be >= 1"));
        }
        mcmc_traj_plots.push(McmcEval {
            id: o.id.clone(),
            burn_in: o.burn_in,
            thinning: o.thinning,
            functional: Some(functional),
            lags: None,
        });
    }
    let mut mcmc_autocorr_plots = Vec::new();
    for (k, o) in ev.mcmc_autocorr_plots.iter().enumerate() {
        let at = format!("benchmark_setup.evaluation.mcmc_autocorr_plots[{k}]");
        check_mcmc_ref(&o.id, &at)?;
        let functional = crate::evalreport::mcmcdiag::Functional::parse(&o.functional)
            .map_err(|e| cfg_err(&format!("{at}.functional"), e.to_string()))?;
        if o.thinning < 1 {
            return Err(cfg_err(&format!("{at}.thinning"), "thinning must be >= 1"));
        }
        mcmc_autocorr_plots.push(McmcEval {
            id: o.id.clone(),
            burn_in: o.burn_in,
            thinning: o.thinning,
            functional: Some(functional),
            lags: Some(o.lags),
        });
    }

    let evaluation = Evaluation {
        benchmarks,
        graph_true_stats: ev.graph_true_stats,
        graph_true_plots: ev.graph_true_plots,
        ggally_ggpairs: ev.ggally_ggpairs,
        graph_plots: ev.graph_plots.clone(),
        mcmc_heatmaps,
        mcmc_traj_plots,
        mcmc_autocorr_plots,
    };

    Ok(BenchmarkConfig {
        base_dir,
        data_tuples,
        evaluation,
        algorithms,
    })
}

fn scalar_to_string(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => canonical_json(other),
    }
}

fn resolve_data_ref(
    id: &str,
    iids: &BTreeMap<String, IidResource>,
    base_dir: &Path,
    at: &str,
) -> Result<DataRef> {
    if let Some(res) = iids.get(id) {
        return Ok(DataRef::Resource(id.to_string(), res.clone()));
    }
    let candidates = [
        base_dir.join("resources/data/mydatasets").join(id),
        base_dir.join(id),
        PathBuf::from(id),
    ];
    for c in &candidates {
        if c.is_file() {
            return Ok(DataRef::File(id.to_string(), c.clone()));
        }
        if c.is_dir() {
            return Ok(DataRef::Directory(id.to_string(), c.clone()));
        }
    }
    Err(cfg_err(
        at,
        format!(
            "data_id {id:?} is neither an iid module id nor an existing file/directory under {}",
            base_dir.join("resources/data/mydatasets").display()
        ),
    ))
}

fn resolve_graph_ref(
    id: &str,
    graphs: &BTreeMap<String, GraphResource>,
    base_dir: &Path,
    at: &str,
) -> Result<GraphRef> {
    if let Some(res) = graphs.get(id) {
        return Ok(GraphRef::Resource(id.to_string(), res.clone()));
    }
    let candidates = [
        base_dir.join("resources/adjmat/myadjmats").join(id),
        base_dir.join(id),
        PathBuf::from(id),
    ];
    for c in &candidates {
        if c.is_file() {
            return Ok(GraphRef::File(id.to_string(), c.clone()));
        }
    }
    Err(cfg_err(
        at,
        format!(
            "graph_id {id:?} is neither a graph module id nor an adjacency file under {}",
            base_dir.join("resources/adjmat/myadjmats").display()
        ),
    ))
}

fn resolve_param_ref(
    id: &str,
    params: &BTreeMap<String, ParamResource>,
    base_dir: &Path,
    at: &str,
) -> Result<ParamResource> {
    if let Some(res) = params.get(id) {
        return Ok(res.clone());
    }
    let file_candidates = [
        base_dir.join("resources/parameters/myparams").join(id),
        base_dir
            .join("resources/parameters/myparams/sem_params")
            .join(id),
        base_dir
            .join("resources/parameters/myparams/bn.fit_networks")
            .join(id),
    ];
    if file_candidates.iter().any(|c| c.is_file()) {
        return Err(cfg_err(
            at,
            format!(
                "fixed parameter files are not supported; {id:?} must be a parameters module id"
            ),
        ));
    }
    Err(cfg_err(
        at,
        format!("parameters_id {id:?} does not name a parameters module"),
    ))
}
