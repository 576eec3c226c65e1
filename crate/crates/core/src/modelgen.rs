//! Parameter samplers conditioned on a graph and i.i.d. data simulation.
//!
//! Two model families: binary Bayesian networks with uniformly drawn
//! conditional probability tables, and linear Gaussian structural
//! equation models with uniformly drawn signed weights.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graphs::LabeledGraph;

/// Column values of a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum DataValues {
    /// Row-major n×p reals.
    Continuous(Vec<f64>),
    /// Row-major n×p codes in [0, cardinality−1], plus per-column
    /// cardinalities.
    Categorical { codes: Vec<u32>, cards: Vec<usize> },
}

/// n×p observation matrix with column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    pub labels: Vec<String>,
    pub n: usize,
    pub values: DataValues,
}

impl DataMatrix {
    pub fn continuous(labels: Vec<String>, n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * labels.len() {
            return Err(Error::InvalidData(format!(
                "value count {} != n*p = {}",
                values.len(),
                n * labels.len()
            )));
        }
        Ok(DataMatrix {
            labels,
            n,
            values: DataValues::Continuous(values),
        })
    }

    pub fn categorical(
        labels: Vec<String>,
        n: usize,
        codes: Vec<u32>,
        cards: Vec<usize>,
    ) -> Result<Self> {
        if codes.len() != n * labels.len() {
            return Err(Error::InvalidData(format!(
                "value count {} != n*p = {}",
                codes.len(),
                n * labels.len()
            )));
        }
        if cards.len() != labels.len() {
            return Err(Error::InvalidData(
                "cardinality row length != column count".to_string(),
            ));
        }
        for (j, &c) in cards.iter().enumerate() {
            if c < 1 {
                return Err(Error::InvalidData(format!("column {j}: cardinality 0")));
            }
            for row in 0..n {
                let v = codes[row * labels.len() + j];
                if v as usize >= c {
                    return Err(Error::InvalidData(format!(
                        "column {j} row {row}: value {v} >= cardinality {c}"
                    )));
                }
            }
        }
        Ok(DataMatrix {
            labels,
            n,
            values: DataValues::Categorical { codes, cards },
        })
    }

    pub fn p(&self) -> usize {
        self.labels.len()
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.values, DataValues::Categorical { .. })
    }

    pub fn continuous_cell(&self, row: usize, col: usize) -> f64 {
        match &self.values {
            DataValues::Continuous(v) => v[row * self.p() + col],
            DataValues::Categorical { codes, .. } => codes[row * self.p() + col] as f64,
        }
    }

    pub fn categorical_cell(&self, row: usize, col: usize) -> u32 {
        match &self.values {
            DataValues::Categorical { codes, .. } => codes[row * self.p() + col],
            DataValues::Continuous(_) => panic!("categorical_cell on continuous data"),
        }
    }

    pub fn cardinalities(&self) -> Option<&[usize]> {
        match &self.values {
            DataValues::Categorical { cards, .. } => Some(cards),
            DataValues::Continuous(_) => None,
        }
    }
}

/// Conditional probability table of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    /// Parent node indices, ascending.
    pub parents: Vec<usize>,
    /// One probability vector per parent configuration; configuration
    /// index is mixed-radix over parent values with the last parent as
    /// least significant digit.
    pub rows: Vec<Vec<f64>>,
}

/// Discrete Bayesian network: DAG, per-node cardinalities and CPTs.
#[derive(Debug, Clone)]
pub struct DiscreteBN {
    pub graph: LabeledGraph,
    pub cardinalities: Vec<usize>,
    pub cpts: Vec<Cpt>,
}

/// Linear Gaussian SEM: weight matrix plus shared noise parameters.
/// `w[i*p + j]` is the coefficient of parent j in the equation of node i,
/// nonzero exactly where the DAG has the edge j→i.
#[derive(Debug, Clone)]
pub struct GaussianSEM {
    pub graph: LabeledGraph,
    pub w: Vec<f64>,
    pub noise_mean: f64,
    pub noise_sd: f64,
}

impl GaussianSEM {
    pub fn weight(&self, child: usize, parent: usize) -> f64 {
        self.w[child * self.graph.p() + parent]
    }
}

/// Parent configuration index for `values` under the CPT convention.
pub fn config_index(parents: &[usize], cards: &[usize], values: &[u32]) -> usize {
    let mut idx = 0usize;
    for &p in parents {
        idx = idx * cards[p] + values[p] as usize;
    }
    idx
}

/// Binary Bayesian network with P(node = 0 | config) ~ Unif[a, b] drawn
/// independently per node and parent configuration.
pub fn sample_bin_bn(g: &LabeledGraph, a: f64, b: f64, seed: u64) -> Result<DiscreteBN> {
    if !g.is_dag() {
        return Err(Error::NotADag("bin_bn requires a DAG".to_string()));
    }
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a >= b {
        return Err(Error::InvalidSpec(format!(
            "bin_bn: need 0 <= a < b <= 1, got a={a}, b={b}"
        )));
    }
    let p = g.p();
    let cards = vec![2usize; p];
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut cpts = Vec::with_capacity(p);
    for node in 0..p {
        let parents = g.parents(node);
        let q: usize = parents.iter().map(|&pa| cards[pa]).product();
        let mut rows = Vec::with_capacity(q);
        for _ in 0..q {
            let p0 = rng.random_range(a..b);
            rows.push(vec![p0, 1.0 - p0]);
        }
        cpts.push(Cpt { parents, rows });
    }
    Ok(DiscreteBN {
        graph: g.clone(),
        cardinalities: cards,
        cpts,
    })
}

/// Gaussian SEM weights: |W_ij| ~ Unif[a, b] with independent random sign
/// on every edge; noise fixed at N(0, 1).
pub fn sample_sem_params(g: &LabeledGraph, a: f64, b: f64, seed: u64) -> Result<GaussianSEM> {
    if !g.is_dag() {
        return Err(Error::NotADag("sem_params requires a DAG".to_string()));
    }
    if a < 0.0 || a >= b {
        return Err(Error::InvalidSpec(format!(
            "sem_params: need 0 <= a < b, got a={a}, b={b}"
        )));
    }
    let p = g.p();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut w = vec![0.0; p * p];
    for child in 0..p {
        for parent in g.parents(child) {
            let mag = rng.random_range(a..b);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            w[child * p + parent] = sign * mag;
        }
    }
    Ok(GaussianSEM {
        graph: g.clone(),
        w,
        noise_mean: 0.0,
        noise_sd: 1.0,
    })
}

/// Ancestral sampling of n rows from a discrete network.
pub fn sample_iid_discrete(model: &DiscreteBN, n: usize, seed: u64) -> Result<DataMatrix> {
    if n < 1 {
        return Err(Error::InvalidSpec("iid: n must be >= 1".to_string()));
    }
    let p = model.graph.p();
    let order = model.graph.topological_order()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut codes = vec![0u32; n * p];
    let mut row_vals = vec![0u32; p];
    for row in 0..n {
        for &node in &order {
            let cpt = &model.cpts[node];
            let cfg = config_index(&cpt.parents, &model.cardinalities, &row_vals);
            let probs = &cpt.rows[cfg];
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut value = probs.len() as u32 - 1;
            for (k, &pk) in probs.iter().enumerate() {
                acc += pk;
                if u < acc {
                    value = k as u32;
                    break;
                }
            }
            row_vals[node] = value;
        }
        codes[row * p..(row + 1) * p].copy_from_slice(&row_vals);
    }
    DataMatrix::categorical(
        model.graph.labels().to_vec(),
        n,
        codes,
        model.cardinalities.clone(),
    )
}

/// Solve the SEM along a topological order with fresh Gaussian noise per
/// node and row; optionally standardize every column to mean 0 and
/// (n−1)-denominator sample standard deviation 1.
pub fn sample_iid_gaussian(
    model: &GaussianSEM,
    n: usize,
    standardized: bool,
    seed: u64,
) -> Result<DataMatrix> {
    if n < 1 {
        return Err(Error::InvalidSpec("iid: n must be >= 1".to_string()));
    }
    if standardized && n < 2 {
        return Err(Error::InvalidSpec(
            "iid: standardization needs n >= 2".to_string(),
        ));
    }
    let p = model.graph.p();
    let order = model.graph.topological_order()?;
    let normal = Normal::new(model.noise_mean, model.noise_sd)
        .map_err(|e| Error::InvalidSpec(format!("noise: {e}")))?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut values = vec![0.0f64; n * p];
    for row in 0..n {
        for &node in &order {
            let mut y = normal.sample(&mut rng);
            for parent in model.graph.parents(node) {
                y += model.weight(node, parent) * values[row * p + parent];
            }
            values[row * p + node] = y;
        }
    }
    if standardized {
        for col in 0..p {
            let mean: f64 = (0..n).map(|r| values[r * p + col]).sum::<f64>() / n as f64;
            let ss: f64 = (0..n)
                .map(|r| {
                    let d = values[r * p + col] - mean;
                    d * d
                })
                .sum();
            let sd = (ss / (n as f64 - 1.0)).sqrt();
            if sd == 0.0 || !sd.is_finite() {
                return Err(Error::InvalidData(format!(
                    "standardization: column {col} has zero variance"
                )));
            }
            for r in 0..n {
                values[r * p + col] = (values[r * p + col] - mean) / sd;
            }
        }
    }
    DataMatrix::continuous(model.graph.labels().to_vec(), n, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dag(p: usize, edges: &[(usize, usize)]) -> LabeledGraph {
        let mut g = LabeledGraph::with_numeric_labels(p);
        for &(i, j) in edges {
            g.set_directed(i, j);
        }
        g
    }

    #[test]
    fn bin_bn_entries_in_range() {
        let g = dag(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let bn = sample_bin_bn(&g, 0.1, 0.9, 42).unwrap();
        for cpt in &bn.cpts {
            for row in &cpt.rows {
                assert!((row[0] + row[1] - 1.0).abs() < 1e-12);
                assert!(row[0] >= 0.1 && row[0] <= 0.9);
            }
        }
        // node 3 has two binary parents -> 4 rows
        assert_eq!(bn.cpts[3].rows.len(), 4);
        // root node: one row
        assert_eq!(bn.cpts[0].rows.len(), 1);
    }

    #[test]
    fn bin_bn_degenerate_interval() {
        let g = dag(2, &[(0, 1)]);
        let bn = sample_bin_bn(&g, 0.5, 0.5 + 1e-9, 1).unwrap();
        for cpt in &bn.cpts {
            for row in &cpt.rows {
                assert!((row[0] - 0.5).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn bin_bn_rejects_bad_input() {
        let g = dag(2, &[(0, 1)]);
        assert!(sample_bin_bn(&g, 0.9, 0.1, 1).is_err());
        assert!(sample_bin_bn(&g, -0.1, 0.5, 1).is_err());
        let mut cyclic = LabeledGraph::with_numeric_labels(2);
        cyclic.set_undirected(0, 1);
        assert!(sample_bin_bn(&cyclic, 0.1, 0.9, 1).is_err());
    }

    #[test]
    fn sem_weights_match_pattern() {
        let g = dag(3, &[(0, 1), (1, 2)]);
        let sem = sample_sem_params(&g, 0.25, 1.0, 7).unwrap();
        for child in 0..3 {
            for parent in 0..3 {
                let w = sem.weight(child, parent);
                if g.has_directed(parent, child) {
                    assert!(w.abs() >= 0.25 && w.abs() <= 1.0);
                } else {
                    assert_eq!(w, 0.0);
                }
            }
        }
    }

    #[test]
    fn sem_empty_graph_zero_weights() {
        let g = LabeledGraph::with_numeric_labels(3);
        let sem = sample_sem_params(&g, 0.25, 1.0, 7).unwrap();
        assert!(sem.w.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn sem_sign_frequency_balanced() {
        // one long chain gives many edges
        let p = 101;
        let edges: Vec<(usize, usize)> = (0..p - 1).map(|i| (i, i + 1)).collect();
        let g = dag(p, &edges);
        let mut pos = 0usize;
        let mut total = 0usize;
        for seed in 0..100 {
            let sem = sample_sem_params(&g, 0.25, 1.0, seed).unwrap();
            for child in 0..p {
                for parent in g.parents(child) {
                    total += 1;
                    if sem.weight(child, parent) > 0.0 {
                        pos += 1;
                    }
                }
            }
        }
        let freq = pos as f64 / total as f64;
        assert!(total == 10000);
        assert!((freq - 0.5).abs() < 0.02, "sign frequency {freq}");
    }

    #[test]
    fn discrete_sampling_degenerate_cpt() {
        let g = LabeledGraph::with_numeric_labels(1);
        let mut bn = sample_bin_bn(&g, 0.4, 0.6, 1).unwrap();
        bn.cpts[0].rows[0] = vec![1.0, 0.0];
        let data = sample_iid_discrete(&bn, 50, 9).unwrap();
        for r in 0..50 {
            assert_eq!(data.categorical_cell(r, 0), 0);
        }
    }

    #[test]
    fn discrete_sampling_matches_cpt() {
        let g = dag(2, &[(0, 1)]);
        let bn = sample_bin_bn(&g, 0.2, 0.8, 5).unwrap();
        let n = 100_000;
        let data = sample_iid_discrete(&bn, n, 17).unwrap();
        // empirical P(b | a) vs stored CPT
        let mut counts = [[0usize; 2]; 2];
        for r in 0..n {
            let a = data.categorical_cell(r, 0) as usize;
            let b = data.categorical_cell(r, 1) as usize;
            counts[a][b] += 1;
        }
        for a in 0..2 {
            let na = counts[a][0] + counts[a][1];
            let emp = counts[a][0] as f64 / na as f64;
            let stored = bn.cpts[1].rows[a][0];
            assert!((emp - stored).abs() < 0.01, "a={a}: {emp} vs {stored}");
        }
    }

    #[test]
    fn gaussian_sampling_shapes_and_determinism() {
        let g = dag(3, &[(0, 1), (1, 2)]);
        let sem = sample_sem_params(&g, 0.25, 1.0, 3).unwrap();
        let a = sample_iid_gaussian(&sem, 100, false, 11).unwrap();
        let b = sample_iid_gaussian(&sem, 100, false, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n, 100);
        assert_eq!(a.p(), 3);
    }

    #[test]
    fn gaussian_standardization_exact() {
        let g = dag(3, &[(0, 1), (1, 2)]);
        let sem = sample_sem_params(&g, 0.25, 1.0, 3).unwrap();
        let d = sample_iid_gaussian(&sem, 500, true, 13).unwrap();
        for col in 0..3 {
            let mean: f64 = (0..500).map(|r| d.continuous_cell(r, col)).sum::<f64>() / 500.0;
            let ss: f64 = (0..500)
                .map(|r| {
                    let v = d.continuous_cell(r, col) - mean;
                    v * v
                })
                .sum();
            let sd = (ss / 499.0).sqrt();
            assert!(mean.abs() < 1e-10);
            assert!((sd - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gaussian_implied_covariance_on_chain() {
        // 3-node chain with known weights: Σ = (I−B)⁻¹ σ² (I−B)⁻ᵀ
        let g = dag(3, &[(0, 1), (1, 2)]);
        let mut sem = sample_sem_params(&g, 0.25, 1.0, 3).unwrap();
        sem.w[3] = 0.8; // 0 -> 1
        sem.w[7] = -0.6; // 1 -> 2
        let n = 1_000_000;
        let d = sample_iid_gaussian(&sem, n, false, 21).unwrap();
        // analytic covariance for the chain
        // y0 = z0; y1 = 0.8 y0 + z1; y2 = -0.6 y1 + z2
        let var0 = 1.0;
        let var1 = 0.8f64.powi(2) * var0 + 1.0;
        let var2 = 0.6f64.powi(2) * var1 + 1.0;
        let cov01 = 0.8 * var0;
        let cov12 = -0.6 * var1;
        let cov02 = -0.6 * cov01;
        let expect = [
            [var0, cov01, cov02],
            [cov01, var1, cov12],
            [cov02, cov12, var2],
        ];
        let mut means = [0.0f64; 3];
        for r in 0..n {
            for c in 0..3 {
                means[c] += d.continuous_cell(r, c);
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        for a in 0..3 {
            for b in 0..3 {
                let mut s = 0.0;
                for r in 0..n {
                    s += (d.continuous_cell(r, a) - means[a]) * (d.continuous_cell(r, b) - means[b]);
                }
                let emp = s / n as f64;
                assert!(
                    (emp - expect[a][b]).abs() < 0.01,
                    "cov[{a}][{b}] = {emp} vs {}",
                    expect[a][b]
                );
            }
        }
    }

    #[test]
    fn gaussian_standardization_errors() {
        let g = LabeledGraph::with_numeric_labels(1);
        let sem = sample_sem_params(&g, 0.25, 1.0, 3).unwrap();
        assert!(sample_iid_gaussian(&sem, 1, true, 5).is_err());
    }
}
