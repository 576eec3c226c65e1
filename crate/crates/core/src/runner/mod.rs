//! Config-driven benchmark runner: parse a JSON configuration, build the
//! job DAG over (graph, parameters, data, learner, evaluation) stages and
//! execute it in parallel with content-addressed caching.

pub mod config;
pub mod exec;
#[cfg(test)]
mod exec_tests;
pub mod plan;

pub use config::{parse_config, AlgKind, AlgSetting, BenchmarkConfig};
pub use exec::{execute, plan_summary, ExecMode, ExecOptions, RunContext, RunReport};
pub use plan::{plan, Plan, Stage};

use std::path::PathBuf;

/// Results root resolution: explicit flag, then the BENCHPRESS_RESULTS
/// environment variable, then ./results.
pub fn resolve_results_root(flag: Option<PathBuf>) -> PathBuf {
    if let Some(p) = flag {
        return p;
    }
    if let Ok(env) = std::env::var("BENCHPRESS_RESULTS") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from("results")
}
