//! Core graph representation and structural transforms.
//!
//! A [`LabeledGraph`] stores a p×p adjacency matrix over named nodes.
//! Entry (i,j)=1 with (j,i)=0 encodes the directed edge i→j; a symmetric
//! pair of ones encodes an undirected edge. This is the direct in-memory
//! image of the adjacency-matrix CSV format, so serialization never has
//! to translate.

use crate::error::{Error, Result};

/// Kind of the edge between an unordered node pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Directed,
    Undirected,
    Absent,
}

/// Adjacency-matrix graph with node labels and mixed edge kinds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    labels: Vec<String>,
    adj: Vec<u8>,
}

impl LabeledGraph {
    /// Empty graph over the given labels.
    pub fn new(labels: Vec<String>) -> Result<Self> {
        let p = labels.len();
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidGraph(format!("duplicate node label {l:?}")));
            }
        }
        Ok(LabeledGraph {
            labels,
            adj: vec![0; p * p],
        })
    }

    /// Graph with numeric labels "1".."p".
    pub fn with_numeric_labels(p: usize) -> Self {
        let labels = (1..=p).map(|i| i.to_string()).collect();
        LabeledGraph {
            labels,
            adj: vec![0; p * p],
        }
    }

    /// Build from explicit adjacency rows; validates shape, diagonal and
    /// 0/1 entries.
    pub fn from_adjacency(labels: Vec<String>, rows: &[Vec<u8>]) -> Result<Self> {
        let p = labels.len();
        if rows.len() != p {
            return Err(Error::InvalidGraph(format!(
                "adjacency has {} rows for {} labels",
                rows.len(),
                p
            )));
        }
        let mut g = LabeledGraph::new(labels)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::InvalidGraph(format!(
                    "row {i} has {} entries, expected {p}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::InvalidGraph(format!(
                        "entry ({i},{j}) = {v} is not 0/1"
                    )));
                }
                if i == j && v != 0 {
                    return Err(Error::InvalidGraph(format!("nonzero diagonal at {i}")));
                }
                g.adj[i * p + j] = v;
            }
        }
        Ok(g)
    }

    pub fn p(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.p() + j] == 1
    }

    /// Raw adjacency row.
    pub fn row(&self, i: usize) -> &[u8] {
        let p = self.p();
        &self.adj[i * p..(i + 1) * p]
    }

    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.entry(i, j) || self.entry(j, i)
    }

    /// Kind of the unordered pair {i, j}.
    pub fn edge_kind(&self, i: usize, j: usize) -> EdgeKind {
        match (self.entry(i, j), self.entry(j, i)) {
            (false, false) => EdgeKind::Absent,
            (true, true) => EdgeKind::Undirected,
            _ => EdgeKind::Directed,
        }
    }

    /// True iff the directed edge from→to is present (and not undirected).
    #[inline]
    pub fn has_directed(&self, from: usize, to: usize) -> bool {
        self.entry(from, to) && !self.entry(to, from)
    }

    #[inline]
    pub fn has_undirected(&self, i: usize, j: usize) -> bool {
        self.entry(i, j) && self.entry(j, i)
    }

    pub fn set_directed(&mut self, from: usize, to: usize) {
        let p = self.p();
        self.adj[from * p + to] = 1;
        self.adj[to * p + from] = 0;
    }

    pub fn set_undirected(&mut self, i: usize, j: usize) {
        let p = self.p();
        self.adj[i * p + j] = 1;
        self.adj[j * p + i] = 1;
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) {
        let p = self.p();
        self.adj[i * p + j] = 0;
        self.adj[j * p + i] = 0;
    }

    /// Parents of `node`: sources of directed edges into it.
    pub fn parents(&self, node: usize) -> Vec<usize> {
        (0..self.p())
            .filter(|&i| self.has_directed(i, node))
            .collect()
    }

    /// Children of `node`: targets of directed edges out of it.
    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.p())
            .filter(|&j| self.has_directed(node, j))
            .collect()
    }

    /// All nodes adjacent to `node` by any edge kind.
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        (0..self.p())
            .filter(|&j| j != node && self.adjacent(node, j))
            .collect()
    }

    /// Undirected-only neighbors.
    pub fn undirected_neighbors(&self, node: usize) -> Vec<usize> {
        (0..self.p())
            .filter(|&j| j != node && self.has_undirected(node, j))
            .collect()
    }

    /// Canonical edge list: one item per adjacent unordered pair {i,j},
    /// i < j, as (i, j, kind). A directed pair is reported as it points.
    pub fn edges(&self) -> Vec<(usize, usize, EdgeKind)> {
        let mut out = Vec::new();
        for i in 0..self.p() {
            for j in (i + 1)..self.p() {
                match self.edge_kind(i, j) {
                    EdgeKind::Absent => {}
                    k => out.push((i, j, k)),
                }
            }
        }
        out
    }

    /// Number of edges counting each adjacent unordered pair once.
    pub fn edge_count(&self) -> usize {
        let mut n = 0;
        for i in 0..self.p() {
            for j in (i + 1)..self.p() {
                if self.adjacent(i, j) {
                    n += 1;
                }
            }
        }
        n
    }

    /// True iff the graph has no undirected pair and no directed cycle.
    pub fn is_dag(&self) -> bool {
        let p = self.p();
        for i in 0..p {
            for j in (i + 1)..p {
                if self.has_undirected(i, j) {
                    return false;
                }
            }
        }
        !self.directed_part_has_cycle()
    }

    /// Cycle check restricted to directed edges (undirected pairs ignored).
    pub fn directed_part_has_cycle(&self) -> bool {
        let p = self.p();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; p];
        for start in 0..p {
            if state[start] != 0 {
                continue;
            }
            // iterative DFS with explicit child cursors
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            state[start] = 1;
            while let Some(frame) = stack.last_mut() {
                let node = frame.0;
                if frame.1 < p {
                    let child = frame.1;
                    frame.1 += 1;
                    if self.has_directed(node, child) {
                        match state[child] {
                            1 => return true,
                            0 => {
                                state[child] = 1;
                                stack.push((child, 0));
                            }
                            _ => {}
                        }
                    }
                } else {
                    state[node] = 2;
                    stack.pop();
                }
            }
        }
        false
    }

    /// A topological order of the directed part; errors when cyclic or when
    /// undirected pairs are present.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        if !self.is_dag() {
            return Err(Error::NotADag(
                "topological order requires a DAG".to_string(),
            ));
        }
        let p = self.p();
        let mut indeg = vec![0usize; p];
        for j in 0..p {
            indeg[j] = self.parents(j).len();
        }
        let mut queue: Vec<usize> = (0..p).filter(|&i| indeg[i] == 0).collect();
        queue.sort_unstable();
        let mut order = Vec::with_capacity(p);
        let mut head = 0;
        while head < queue.len() {
            // lowest index first keeps the order deterministic
            let u = queue[head];
            head += 1;
            order.push(u);
            for v in self.children(u) {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        debug_assert_eq!(order.len(), p);
        Ok(order)
    }

    pub fn has_directed_edges(&self) -> bool {
        let p = self.p();
        for i in 0..p {
            for j in 0..p {
                if i != j && self.has_directed(i, j) {
                    return true;
                }
            }
        }
        false
    }

    /// True iff there is a directed path src ⇒ dst (length ≥ 1 unless src == dst).
    pub fn has_directed_path(&self, src: usize, dst: usize) -> bool {
        if src == dst {
            return true;
        }
        let p = self.p();
        let mut seen = vec![false; p];
        let mut stack = vec![src];
        while let Some(u) = stack.pop() {
            if seen[u] {
                continue;
            }
            seen[u] = true;
            for v in 0..p {
                if self.has_directed(u, v) {
                    if v == dst {
                        return true;
                    }
                    if !seen[v] {
                        stack.push(v);
                    }
                }
            }
        }
        false
    }
}

/// Fully undirected copy: an edge wherever any edge was.
pub fn skeleton(g: &LabeledGraph) -> LabeledGraph {
    let mut out = LabeledGraph {
        labels: g.labels.clone(),
        adj: vec![0; g.p() * g.p()],
    };
    for i in 0..g.p() {
        for j in (i + 1)..g.p() {
            if g.adjacent(i, j) {
                out.set_undirected(i, j);
            }
        }
    }
    out
}

/// All v-structures (i, k, j): i→k←j with i, j non-adjacent, canonicalized
/// so that i < j. Sorted for determinism.
pub fn v_structures(g: &LabeledGraph) -> Vec<(usize, usize, usize)> {
    let p = g.p();
    let mut out = Vec::new();
    for k in 0..p {
        let parents = g.parents(k);
        for a in 0..parents.len() {
            for b in (a + 1)..parents.len() {
                let (i, j) = (parents[a], parents[b]);
                if !g.adjacent(i, j) {
                    out.push((i, k, j));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Pattern graph of a DAG: v-structure arrows stay directed, everything
/// else becomes undirected.
pub fn pattern_graph(g: &LabeledGraph) -> Result<LabeledGraph> {
    if !g.is_dag() {
        return Err(Error::NotADag("pattern_graph requires a DAG".to_string()));
    }
    let mut out = skeleton(g);
    for (i, k, j) in v_structures(g) {
        out.set_directed(i, k);
        out.set_directed(j, k);
    }
    Ok(out)
}

/// CPDAG (essential graph) of a DAG: pattern graph closed under the Meek
/// orientation rules R1–R4.
pub fn cpdag(g: &LabeledGraph) -> Result<LabeledGraph> {
    let mut pg = pattern_graph(g)?;
    meek_closure(&mut pg);
    Ok(pg)
}

/// Apply Meek rules R1–R4 to fixpoint, in deterministic node-index order.
pub fn meek_closure(g: &mut LabeledGraph) {
    let p = g.p();
    loop {
        let mut changed = false;
        for a in 0..p {
            for b in 0..p {
                if a == b || !g.has_undirected(a, b) {
                    continue;
                }
                if meek_r1(g, a, b) || meek_r2(g, a, b) || meek_r3(g, a, b) || meek_r4(g, a, b) {
                    g.set_directed(a, b);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// R1: some c→a with c, b non-adjacent forces a→b.
fn meek_r1(g: &LabeledGraph, a: usize, b: usize) -> bool {
    g.parents(a).iter().any(|&c| !g.adjacent(c, b))
}

/// R2: a chain a→c→b forces a→b.
fn meek_r2(g: &LabeledGraph, a: usize, b: usize) -> bool {
    (0..g.p()).any(|c| g.has_directed(a, c) && g.has_directed(c, b))
}

/// R3: a−c, a−d with c→b, d→b and c, d non-adjacent forces a→b.
fn meek_r3(g: &LabeledGraph, a: usize, b: usize) -> bool {
    let pb = g.parents(b);
    for x in 0..pb.len() {
        for y in (x + 1)..pb.len() {
            let (c, d) = (pb[x], pb[y]);
            if !g.adjacent(c, d) && g.has_undirected(a, c) && g.has_undirected(a, d) {
                return true;
            }
        }
    }
    false
}

/// R4: a−c, c→d, d→b with c, b non-adjacent and a, d adjacent forces a→b.
fn meek_r4(g: &LabeledGraph, a: usize, b: usize) -> bool {
    let p = g.p();
    for c in 0..p {
        if !g.has_undirected(a, c) || g.adjacent(c, b) {
            continue;
        }
        for d in 0..p {
            if g.has_directed(c, d) && g.has_directed(d, b) && g.adjacent(a, d) {
                return true;
            }
        }
    }
    false
}

/// Chordality via maximum-cardinality search with perfect-elimination
/// verification. Rejects graphs with directed edges.
pub fn is_chordal(g: &LabeledGraph) -> Result<bool> {
    if g.has_directed_edges() {
        return Err(Error::NotUndirected);
    }
    let p = g.p();
    if p <= 3 {
        return Ok(true);
    }
    // MCS: repeatedly pick an unvisited node with the most visited neighbors.
    let mut weight = vec![0usize; p];
    let mut visited = vec![false; p];
    let mut order = Vec::with_capacity(p);
    for _ in 0..p {
        let mut pick = usize::MAX;
        let mut best = 0usize;
        for v in 0..p {
            if !visited[v] && (pick == usize::MAX || weight[v] > best) {
                pick = v;
                best = weight[v];
            }
        }
        visited[pick] = true;
        order.push(pick);
        for w in g.undirected_neighbors(pick) {
            if !visited[w] {
                weight[w] += 1;
            }
        }
    }
    // Perfect-elimination check: for each node, its earlier-ordered
    // neighbors minus the latest of them must all be adjacent to that
    // latest one (Tarjan–Yannakakis).
    let mut pos = vec![0usize; p];
    for (idx, &v) in order.iter().enumerate() {
        pos[v] = idx;
    }
    for &v in &order {
        let earlier: Vec<usize> = g
            .undirected_neighbors(v)
            .into_iter()
            .filter(|&u| pos[u] < pos[v])
            .collect();
        if earlier.len() <= 1 {
            continue;
        }
        let &anchor = earlier.iter().max_by_key(|&&u| pos[u]).unwrap();
        for &u in &earlier {
            if u != anchor && !g.adjacent(u, anchor) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
