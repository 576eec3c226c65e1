//! Python bindings: graphs, generators, model/data sampling, scores,
//! independence tests, learners, metrics, file formats and the runner.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use bnbench::citests::{self, CiTestKind};
use bnbench::evalreport::mcmcdiag;
use bnbench::graphs;
use bnbench::io;
use bnbench::learners::{self, CancelToken};
use bnbench::metrics;
use bnbench::modelgen;
use bnbench::netgen;
use bnbench::runner;
use bnbench::scores::{self, ScoreSpec};
use bnbench::{DataMatrix, LabeledGraph};

fn err(e: bnbench::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Labeled mixed graph backed by an adjacency matrix.
#[pyclass(name = "Graph", skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: LabeledGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (labels, directed=vec![], undirected=vec![]))]
    fn new(
        labels: Vec<String>,
        directed: Vec<(usize, usize)>,
        undirected: Vec<(usize, usize)>,
    ) -> PyResult<Self> {
        let mut g = LabeledGraph::new(labels).map_err(err)?;
        for (i, j) in directed {
            g.set_directed(i, j);
        }
        for (i, j) in undirected {
            g.set_undirected(i, j);
        }
        Ok(PyGraph { inner: g })
    }

    #[staticmethod]
    fn from_adjacency(labels: Vec<String>, rows: Vec<Vec<u8>>) -> PyResult<Self> {
        Ok(PyGraph {
            inner: LabeledGraph::from_adjacency(labels, &rows).map_err(err)?,
        })
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn adjacency(&self) -> Vec<Vec<u8>> {
        (0..self.inner.p())
            .map(|i| self.inner.row(i).to_vec())
            .collect()
    }

    /// Edges as (i, j, kind) with kind in {"->", "--"}; directed edges
    /// point i -> j.
    fn edges(&self) -> Vec<(usize, usize, String)> {
        self.inner
            .edges()
            .into_iter()
            .map(|(i, j, kind)| match kind {
                graphs::EdgeKind::Undirected => (i, j, "--".to_string()),
                _ => {
                    if self.inner.has_directed(i, j) {
                        (i, j, "->".to_string())
                    } else {
                        (j, i, "->".to_string())
                    }
                }
            })
            .collect()
    }

    fn is_dag(&self) -> bool {
        self.inner.is_dag()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(p={}, edges={})",
            self.inner.p(),
            self.inner.edge_count()
        )
    }

    fn __eq__(&self, other: &PyGraph) -> bool {
        self.inner == other.inner
    }
}

/// Observation matrix, continuous or categorical.
#[pyclass(name = "Data", skip_from_py_object)]
#[derive(Clone)]
struct PyData {
    inner: DataMatrix,
}

#[pymethods]
impl PyData {
    #[staticmethod]
    fn continuous(labels: Vec<String>, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let n = rows.len();
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        Ok(PyData {
            inner: DataMatrix::continuous(labels, n, values).map_err(err)?,
        })
    }

    #[staticmethod]
    fn categorical(labels: Vec<String>, rows: Vec<Vec<u32>>, cards: Vec<usize>) -> PyResult<Self> {
        let n = rows.len();
        let codes: Vec<u32> = rows.into_iter().flatten().collect();
        Ok(PyData {
            inner: DataMatrix::categorical(labels, n, codes, cards).map_err(err)?,
        })
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels.clone()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    fn is_categorical(&self) -> bool {
        self.inner.is_categorical()
    }

    fn cardinalities(&self) -> Option<Vec<usize>> {
        self.inner.cardinalities().map(|c| c.to_vec())
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n)
            .map(|r| {
                (0..self.inner.p())
                    .map(|c| self.inner.continuous_cell(r, c))
                    .collect()
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Data(n={}, p={}, {})",
            self.inner.n,
            self.inner.p(),
            if self.inner.is_categorical() {
                "categorical"
            } else {
                "continuous"
            }
        )
    }
}

/// Compact MCMC trajectory.
#[pyclass(name = "Trajectory", skip_from_py_object)]
#[derive(Clone)]
struct PyTrajectory {
    inner: io::GraphTrajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels.clone()
    }

    fn last_index(&self) -> i64 {
        self.inner.last_index()
    }

    fn records(&self) -> usize {
        self.inner.records.len()
    }

    /// Posterior edge probability matrix after the burn-in.
    fn edge_posterior(&self, burn_in: i64) -> PyResult<Vec<Vec<f64>>> {
        let p = self.inner.labels.len();
        let flat = mcmcdiag::edge_posterior(&self.inner, burn_in).map_err(err)?;
        Ok((0..p).map(|i| flat[i * p..(i + 1) * p].to_vec()).collect())
    }

    /// (index, value) series of "size" or "score".
    fn functional(&self, name: &str, burn_in: i64, thinning: i64) -> PyResult<Vec<(i64, f64)>> {
        let f = mcmcdiag::Functional::parse(name).map_err(err)?;
        mcmcdiag::traj_functional(&self.inner, f, burn_in, thinning).map_err(err)
    }

    fn final_graph(&self) -> PyResult<PyGraph> {
        let states = self.inner.states().map_err(err)?;
        Ok(PyGraph {
            inner: states.last().unwrap().1.clone(),
        })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        io::write_trajectory(&self.inner, &path).map_err(err)
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        Ok(PyTrajectory {
            inner: io::read_trajectory(&path).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory(p={}, records={}, last_index={})",
            self.inner.labels.len(),
            self.inner.records.len(),
            self.inner.last_index()
        )
    }
}

// graph transforms ------------------------------------------------------

#[pyfunction]
fn skeleton(g: &PyGraph) -> PyGraph {
    PyGraph {
        inner: graphs::skeleton(&g.inner),
    }
}

#[pyfunction]
fn v_structures(g: &PyGraph) -> Vec<(usize, usize, usize)> {
    graphs::v_structures(&g.inner)
}

#[pyfunction]
fn pattern_graph(g: &PyGraph) -> PyResult<PyGraph> {
    Ok(PyGraph {
        inner: graphs::pattern_graph(&g.inner).map_err(err)?,
    })
}

#[pyfunction]
fn cpdag(g: &PyGraph) -> PyResult<PyGraph> {
    Ok(PyGraph {
        inner: graphs::cpdag(&g.inner).map_err(err)?,
    })
}

#[pyfunction]
fn is_chordal(g: &PyGraph) -> PyResult<bool> {
    graphs::is_chordal(&g.inner).map_err(err)
}

// generators -------------------------------------------------------------

#[pyfunction]
#[pyo3(signature = (n, d, max_parents=None, seed=0))]
fn rand_dag(n: usize, d: f64, max_parents: Option<usize>, seed: u64) -> PyResult<PyGraph> {
    let spec = netgen::RandDagSpec {
        n,
        d,
        max_parents,
        method: "er".to_string(),
        seed,
    };
    Ok(PyGraph {
        inner: netgen::gen_rand_dag(&spec).map_err(err)?,
    })
}

#[pyfunction]
fn bandmat(p: usize, bandwidth: usize) -> PyResult<PyGraph> {
    Ok(PyGraph {
        inner: netgen::gen_bandmat(&netgen::BandSpec {
            p,
            bandwidth,
            seed: 0,
        })
        .map_err(err)?,
    })
}

#[pyfunction]
fn rand_bandmat(p: usize, max_bandwidth: usize, seed: u64) -> PyResult<PyGraph> {
    Ok(PyGraph {
        inner: netgen::gen_rand_bandmat(&netgen::BandSpec {
            p,
            bandwidth: max_bandwidth,
            seed,
        })
        .map_err(err)?,
    })
}

// models and sampling ------------------------------------------------------

/// Binary Bayesian network with sampled conditional probability tables.
#[pyclass(name = "DiscreteModel")]
struct PyDiscreteModel {
    inner: modelgen::DiscreteBN,
}

#[pymethods]
impl PyDiscreteModel {
    fn sample_iid(&self, n: usize, seed: u64) -> PyResult<PyData> {
        Ok(PyData {
            inner: modelgen::sample_iid_discrete(&self.inner, n, seed).map_err(err)?,
        })
    }

    /// CPT of one node: (parents, probability rows).
    fn cpt(&self, node: usize) -> (Vec<usize>, Vec<Vec<f64>>) {
        let c = &self.inner.cpts[node];
        (c.parents.clone(), c.rows.clone())
    }

    #[getter]
    fn cardinalities(&self) -> Vec<usize> {
        self.inner.cardinalities.clone()
    }
}

/// Linear Gaussian structural equation model.
#[pyclass(name = "SemModel")]
struct PySemModel {
    inner: modelgen::GaussianSEM,
}

#[pymethods]
impl PySemModel {
    #[pyo3(signature = (n, standardized=false, seed=0))]
    fn sample_iid(&self, n: usize, standardized: bool, seed: u64) -> PyResult<PyData> {
        Ok(PyData {
            inner: modelgen::sample_iid_gaussian(&self.inner, n, standardized, seed)
                .map_err(err)?,
        })
    }

    /// Weight matrix: entry [child][parent].
    fn weights(&self) -> Vec<Vec<f64>> {
        let p = self.inner.graph.p();
        (0..p)
            .map(|i| self.inner.w[i * p..(i + 1) * p].to_vec())
            .collect()
    }
}

#[pyfunction]
fn bin_bn(g: &PyGraph, a: f64, b: f64, seed: u64) -> PyResult<PyDiscreteModel> {
    Ok(PyDiscreteModel {
        inner: modelgen::sample_bin_bn(&g.inner, a, b, seed).map_err(err)?,
    })
}

#[pyfunction]
fn sem_params(g: &PyGraph, a: f64, b: f64, seed: u64) -> PyResult<PySemModel> {
    Ok(PySemModel {
        inner: modelgen::sample_sem_params(&g.inner, a, b, seed).map_err(err)?,
    })
}

// scores and tests ---------------------------------------------------------

fn score_spec(score: &str, ess: f64, am: f64, aw: Option<f64>) -> PyResult<ScoreSpec> {
    match score {
        "bdeu" => Ok(ScoreSpec::Bdeu { ess }),
        "bge" => Ok(ScoreSpec::Bge { am, aw }),
        other => Err(PyValueError::new_err(format!(
            "unknown score {other:?} (bdeu|bge)"
        ))),
    }
}

#[pyfunction]
fn bdeu_local(data: &PyData, node: usize, parents: Vec<usize>, ess: f64) -> PyResult<f64> {
    let scorer = ScoreSpec::Bdeu { ess }.build(&data.inner).map_err(err)?;
    scorer.local_score(node, &parents).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (data, node, parents, am=1.0, aw=None))]
fn bge_local(
    data: &PyData,
    node: usize,
    parents: Vec<usize>,
    am: f64,
    aw: Option<f64>,
) -> PyResult<f64> {
    let scorer = ScoreSpec::Bge { am, aw }.build(&data.inner).map_err(err)?;
    scorer.local_score(node, &parents).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (data, g, score="bdeu", ess=1.0, am=1.0, aw=None))]
fn graph_score(
    data: &PyData,
    g: &PyGraph,
    score: &str,
    ess: f64,
    am: f64,
    aw: Option<f64>,
) -> PyResult<f64> {
    let scorer = score_spec(score, ess, am, aw)?
        .build(&data.inner)
        .map_err(err)?;
    scores::total_score(scorer.as_ref(), &g.inner).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (data, i, j, cond=vec![], alpha=0.05))]
fn fisher_z_test(
    data: &PyData,
    i: usize,
    j: usize,
    cond: Vec<usize>,
    alpha: f64,
) -> PyResult<(f64, f64, bool, usize, bool)> {
    let r = citests::fisher_z_test(&data.inner, i, j, &cond, alpha).map_err(err)?;
    Ok((r.statistic, r.p_value, r.independent, r.df, r.degenerate))
}

#[pyfunction]
#[pyo3(signature = (data, i, j, cond=vec![], alpha=0.05))]
fn g2_test(
    data: &PyData,
    i: usize,
    j: usize,
    cond: Vec<usize>,
    alpha: f64,
) -> PyResult<(f64, f64, bool, usize, bool)> {
    let r = citests::g2_test(&data.inner, i, j, &cond, alpha).map_err(err)?;
    Ok((r.statistic, r.p_value, r.independent, r.df, r.degenerate))
}

// learners -------------------------------------------------------------

#[pyfunction]
#[pyo3(signature = (data, test="fisher_z", alpha=0.05, max_cond=None))]
fn pc_learn(
    data: &PyData,
    test: &str,
    alpha: f64,
    max_cond: Option<usize>,
) -> PyResult<(PyGraph, u64, u64)> {
    let kind = match test {
        "fisher_z" | "gaussCItest" => CiTestKind::FisherZ,
        "g2" | "binCItest" | "disCItest" => CiTestKind::G2,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown test {other:?} (fisher_z|g2)"
            )))
        }
    };
    let out = learners::pc(&data.inner, kind, alpha, max_cond, &CancelToken::none())
        .map_err(err)?;
    Ok((PyGraph { inner: out.graph }, out.ntests, out.conflicts))
}

#[pyfunction]
#[pyo3(signature = (data, score="bdeu", ess=1.0, am=1.0, aw=None))]
fn hc_learn(
    data: &PyData,
    score: &str,
    ess: f64,
    am: f64,
    aw: Option<f64>,
) -> PyResult<(PyGraph, f64)> {
    let spec = score_spec(score, ess, am, aw)?;
    let out = learners::hill_climb(&data.inner, &spec, &CancelToken::none()).map_err(err)?;
    Ok((PyGraph { inner: out.graph }, out.score))
}

#[pyfunction]
#[pyo3(signature = (data, score="bdeu", ess=1.0, am=1.0, aw=None, tabu_len=10, stagnation=10))]
fn tabu_learn(
    data: &PyData,
    score: &str,
    ess: f64,
    am: f64,
    aw: Option<f64>,
    tabu_len: usize,
    stagnation: usize,
) -> PyResult<(PyGraph, f64)> {
    let spec = score_spec(score, ess, am, aw)?;
    let out = learners::tabu(&data.inner, &spec, tabu_len, stagnation, &CancelToken::none())
        .map_err(err)?;
    Ok((PyGraph { inner: out.graph }, out.score))
}

#[pyfunction]
#[pyo3(signature = (data, iterations, seed, score="bdeu", ess=1.0, am=1.0, aw=None))]
fn mcmc_learn(
    data: &PyData,
    iterations: u64,
    seed: u64,
    score: &str,
    ess: f64,
    am: f64,
    aw: Option<f64>,
) -> PyResult<PyTrajectory> {
    let spec = score_spec(score, ess, am, aw)?;
    let traj = learners::structure_mcmc(&data.inner, &spec, iterations, seed, &CancelToken::none())
        .map_err(err)?;
    Ok(PyTrajectory { inner: traj })
}

#[pyfunction]
#[pyo3(signature = (command, data_path, workdir, replicate=0, params=None, timeout=None))]
fn run_external(
    command: String,
    data_path: PathBuf,
    workdir: PathBuf,
    replicate: u64,
    params: Option<BTreeMap<String, String>>,
    timeout: Option<f64>,
) -> PyResult<(String, Option<PyGraph>, f64, Option<u64>)> {
    let spec = learners::ExternalSpec {
        command,
        params: params.unwrap_or_default(),
        timeout,
    };
    let res = learners::run_external(&spec, &data_path, &workdir, replicate);
    let graph = match res.estimate {
        Some(learners::Estimate::Graph(g)) => Some(PyGraph { inner: g }),
        _ => None,
    };
    Ok((res.status.tag().to_string(), graph, res.wall_time, res.ntests))
}

// metrics ---------------------------------------------------------------

#[pyfunction]
fn shd(truth: &PyGraph, est: &PyGraph) -> PyResult<u64> {
    metrics::shd(&truth.inner, &est.inner).map_err(err)
}

#[pyfunction]
fn compare(py: Python<'_>, truth: &PyGraph, est: &PyGraph) -> PyResult<Py<pyo3::types::PyDict>> {
    let c = metrics::compare_graphs(&truth.inner, &est.inner).map_err(err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("tp", c.scores.tp())?;
    dict.set_item("fp", c.scores.fp())?;
    dict.set_item("fn", c.scores.fn_())?;
    dict.set_item("p", c.scores.p_true)?;
    dict.set_item("shd", c.shd)?;
    dict.set_item("tpr", c.tpr)?;
    dict.set_item("fprp", c.fprp)?;
    dict.set_item("fnr", c.fnr)?;
    dict.set_item("precision", c.precision)?;
    dict.set_item("recall", c.recall)?;
    dict.set_item("f1", c.f1)?;
    Ok(dict.unbind())
}

// io ----------------------------------------------------------------------

#[pyfunction]
fn read_data(path: PathBuf) -> PyResult<PyData> {
    Ok(PyData {
        inner: io::read_data(&path).map_err(err)?,
    })
}

#[pyfunction]
fn write_data(data: &PyData, path: PathBuf) -> PyResult<()> {
    io::write_data(&data.inner, &path).map_err(err)
}

#[pyfunction]
fn read_adjmat(path: PathBuf) -> PyResult<PyGraph> {
    Ok(PyGraph {
        inner: io::read_adjmat(&path).map_err(err)?,
    })
}

#[pyfunction]
fn write_adjmat(g: &PyGraph, path: PathBuf) -> PyResult<()> {
    io::write_adjmat(&g.inner, &path).map_err(err)
}

// runner --------------------------------------------------------------------

#[pyfunction]
fn validate_config(path: PathBuf) -> PyResult<String> {
    let cfg = runner::parse_config(&path).map_err(err)?;
    let plan = runner::plan(&cfg).map_err(err)?;
    Ok(runner::plan_summary(&plan))
}

#[pyfunction]
#[pyo3(signature = (path, cores=1, results_dir=None))]
fn run_config(py: Python<'_>, path: PathBuf, cores: usize, results_dir: Option<PathBuf>) -> PyResult<Py<pyo3::types::PyDict>> {
    let cfg = runner::parse_config(&path).map_err(err)?;
    let plan = runner::plan(&cfg).map_err(err)?;
    let ctx = runner::RunContext {
        results_root: runner::resolve_results_root(results_dir),
    };
    let report = runner::execute(
        &plan,
        &ctx,
        &runner::ExecOptions {
            cores,
            mode: runner::ExecMode::Run,
        },
    )
    .map_err(err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("executed", report.executed)?;
    dict.set_item("cached", report.cached)?;
    dict.set_item("skipped", report.skipped)?;
    dict.set_item("failed", report.failed_jobs.len())?;
    dict.set_item("learner_ok", report.learner_ok)?;
    dict.set_item("learner_timed_out", report.learner_timed_out)?;
    dict.set_item("learner_failed", report.learner_failed)?;
    dict.set_item("hard_failure", report.hard_failure())?;
    Ok(dict.unbind())
}

#[pymodule]
fn bnbench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyData>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyDiscreteModel>()?;
    m.add_class::<PySemModel>()?;
    m.add_function(wrap_pyfunction!(skeleton, m)?)?;
    m.add_function(wrap_pyfunction!(v_structures, m)?)?;
    m.add_function(wrap_pyfunction!(pattern_graph, m)?)?;
    m.add_function(wrap_pyfunction!(cpdag, m)?)?;
    m.add_function(wrap_pyfunction!(is_chordal, m)?)?;
    m.add_function(wrap_pyfunction!(rand_dag, m)?)?;
    m.add_function(wrap_pyfunction!(bandmat, m)?)?;
    m.add_function(wrap_pyfunction!(rand_bandmat, m)?)?;
    m.add_function(wrap_pyfunction!(bin_bn, m)?)?;
    m.add_function(wrap_pyfunction!(sem_params, m)?)?;
    m.add_function(wrap_pyfunction!(bdeu_local, m)?)?;
    m.add_function(wrap_pyfunction!(bge_local, m)?)?;
    m.add_function(wrap_pyfunction!(graph_score, m)?)?;
    m.add_function(wrap_pyfunction!(fisher_z_test, m)?)?;
    m.add_function(wrap_pyfunction!(g2_test, m)?)?;
    m.add_function(wrap_pyfunction!(pc_learn, m)?)?;
    m.add_function(wrap_pyfunction!(hc_learn, m)?)?;
    m.add_function(wrap_pyfunction!(tabu_learn, m)?)?;
    m.add_function(wrap_pyfunction!(mcmc_learn, m)?)?;
    m.add_function(wrap_pyfunction!(run_external, m)?)?;
    m.add_function(wrap_pyfunction!(shd, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(read_data, m)?)?;
    m.add_function(wrap_pyfunction!(write_data, m)?)?;
    m.add_function(wrap_pyfunction!(read_adjmat, m)?)?;
    m.add_function(wrap_pyfunction!(write_adjmat, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
