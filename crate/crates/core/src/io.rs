//! Bit-exact readers and writers for the three benchmark file formats:
//! data CSV (optional cardinality row), adjacency-matrix CSV, and the
//! compact MCMC trajectory CSV.
//!
//! Canonical number formatting: integer-valued fields are written bare;
//! real-valued fields use the shortest round-trip decimal with at least
//! one fractional digit (`0.0`, `-2325.52`), so a written file re-reads
//! to the same value and re-writes to the same bytes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graphs::LabeledGraph;
use crate::modelgen::{DataMatrix, DataValues};

/// Forced interpretation of a data file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    /// Categorical iff the second row passes the cardinality-row check.
    Auto,
    Continuous,
    Categorical,
}

/// Shortest round-trip decimal with a decimal point kept.
pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines: Vec<String> = text.split('\n').map(|s| s.to_string()).collect();
    // drop a single trailing empty line from the final newline
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    Ok(lines)
}

fn parse_int_cell(cell: &str) -> Option<i64> {
    // bare integers only; "3.0" is not an integer cell
    cell.parse::<i64>().ok()
}

/// Read a data matrix with auto-detection of the cardinality row.
pub fn read_data(path: &Path) -> Result<DataMatrix> {
    read_data_as(path, DataKind::Auto)
}

/// Read a data matrix, optionally forcing the interpretation.
pub fn read_data_as(path: &Path, kind: DataKind) -> Result<DataMatrix> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(Error::parse(path, 1, "empty file, expected a header row"));
    }
    let labels: Vec<String> = lines[0].split(',').map(|s| s.to_string()).collect();
    let p = labels.len();
    if labels.iter().any(|l| l.is_empty()) {
        return Err(Error::parse(path, 1, "empty column label"));
    }
    let body: Vec<(usize, Vec<&str>)> = lines[1..]
        .iter()
        .enumerate()
        .map(|(k, l)| (k + 2, l.split(',').collect::<Vec<&str>>()))
        .collect();
    for (lineno, cells) in &body {
        if cells.len() != p {
            return Err(Error::parse(
                path,
                *lineno,
                format!("ragged row: {} cells, expected {p}", cells.len()),
            ));
        }
    }

    let categorical = match kind {
        DataKind::Continuous => false,
        DataKind::Categorical => {
            if body.is_empty() {
                return Err(Error::parse(path, 1, "categorical file needs a cardinality row"));
            }
            true
        }
        DataKind::Auto => {
            // second row all integers >= 2 and every later cell of column j
            // an integer in [0, card_j)
            if body.is_empty() {
                false
            } else {
                let cards: Option<Vec<i64>> = body[0]
                    .1
                    .iter()
                    .map(|c| parse_int_cell(c).filter(|&v| v >= 2))
                    .collect();
                match cards {
                    None => false,
                    Some(cards) => body[1..].iter().all(|(_, cells)| {
                        cells.iter().zip(&cards).all(|(c, &card)| {
                            parse_int_cell(c).is_some_and(|v| v >= 0 && v < card)
                        })
                    }),
                }
            }
        }
    };

    if categorical {
        let (card_line, card_cells) = &body[0];
        let mut cards = Vec::with_capacity(p);
        for c in card_cells {
            match parse_int_cell(c) {
                Some(v) if v >= 1 => cards.push(v as usize),
                _ => {
                    return Err(Error::parse(
                        path,
                        *card_line,
                        format!("invalid cardinality {c:?}"),
                    ))
                }
            }
        }
        let n = body.len() - 1;
        let mut codes = Vec::with_capacity(n * p);
        for (lineno, cells) in &body[1..] {
            for (j, c) in cells.iter().enumerate() {
                match parse_int_cell(c) {
                    Some(v) if v >= 0 && (v as usize) < cards[j] => codes.push(v as u32),
                    Some(v) => {
                        return Err(Error::parse(
                            path,
                            *lineno,
                            format!("value {v} >= cardinality {} in column {j}", cards[j]),
                        ))
                    }
                    None => {
                        return Err(Error::parse(
                            path,
                            *lineno,
                            format!("non-integer cell {c:?} in categorical data"),
                        ))
                    }
                }
            }
        }
        DataMatrix::categorical(labels, n, codes, cards)
    } else {
        let n = body.len();
        let mut values = Vec::with_capacity(n * p);
        for (lineno, cells) in &body {
            for c in cells {
                let v: f64 = c.parse().map_err(|_| {
                    Error::parse(path, *lineno, format!("non-numeric cell {c:?}"))
                })?;
                values.push(v);
            }
        }
        DataMatrix::continuous(labels, n, values)
    }
}

/// Write a data matrix in the canonical format.
pub fn write_data(m: &DataMatrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&m.labels.join(","));
    out.push('\n');
    match &m.values {
        DataValues::Categorical { codes, cards } => {
            out.push_str(
                &cards
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
            out.push('\n');
            for row in 0..m.n {
                let cells: Vec<String> = (0..m.p())
                    .map(|j| codes[row * m.p() + j].to_string())
                    .collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        DataValues::Continuous(values) => {
            for row in 0..m.n {
                let cells: Vec<String> = (0..m.p())
                    .map(|j| fmt_real(values[row * m.p() + j]))
                    .collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read an adjacency-matrix CSV into a graph.
pub fn read_adjmat(path: &Path) -> Result<LabeledGraph> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(Error::parse(path, 1, "empty file, expected a header row"));
    }
    let labels: Vec<String> = lines[0].split(',').map(|s| s.to_string()).collect();
    let p = labels.len();
    if lines.len() - 1 != p {
        return Err(Error::parse(
            path,
            lines.len(),
            format!("adjacency matrix has {} rows for {p} labels", lines.len() - 1),
        ));
    }
    let mut rows = Vec::with_capacity(p);
    for (k, line) in lines[1..].iter().enumerate() {
        let mut row = Vec::with_capacity(p);
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != p {
            return Err(Error::parse(
                path,
                k + 2,
                format!("row has {} entries, expected {p}", cells.len()),
            ));
        }
        for c in &cells {
            match *c {
                "0" => row.push(0u8),
                "1" => row.push(1u8),
                other => {
                    return Err(Error::parse(
                        path,
                        k + 2,
                        format!("adjacency entry {other:?} is not 0/1"),
                    ))
                }
            }
        }
        rows.push(row);
    }
    LabeledGraph::from_adjacency(labels, &rows)
        .map_err(|e| Error::parse(path, 1, e.to_string()))
}

/// Write a graph as an adjacency-matrix CSV.
pub fn write_adjmat(g: &LabeledGraph, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&g.labels().join(","));
    out.push('\n');
    for i in 0..g.p() {
        let cells: Vec<&str> = g.row(i).iter().map(|&v| if v == 1 { "1" } else { "0" }).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// One edge inside a trajectory record, by node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajEdge {
    pub a: usize,
    pub b: usize,
    /// directed a→b when true, undirected otherwise
    pub directed: bool,
}

/// One accepted-move record: iteration index, absolute post-move score,
/// and the edge deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajRecord {
    pub index: i64,
    pub score: f64,
    pub added: Vec<TrajEdge>,
    pub removed: Vec<TrajEdge>,
}

/// Compact MCMC graph trajectory. `records[0]` has index 0 and carries
/// the starting graph in `added`; the two label-alphabet header rows of
/// the file format are regenerated from `labels` on write.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphTrajectory {
    pub labels: Vec<String>,
    pub records: Vec<TrajRecord>,
}

impl GraphTrajectory {
    /// Validate monotone indices and replayability.
    pub fn validate(&self) -> Result<()> {
        if self.labels.len() < 2 {
            return Err(Error::Trajectory(
                "trajectory needs at least two variables".to_string(),
            ));
        }
        if self.records.is_empty() || self.records[0].index != 0 {
            return Err(Error::Trajectory(
                "first record must have index 0".to_string(),
            ));
        }
        if !self.records[0].removed.is_empty() {
            return Err(Error::Trajectory(
                "index-0 record must not remove edges".to_string(),
            ));
        }
        for w in self.records.windows(2) {
            if w[1].index <= w[0].index {
                return Err(Error::Trajectory(format!(
                    "indices not strictly increasing: {} then {}",
                    w[0].index, w[1].index
                )));
            }
        }
        self.states().map(|_| ())
    }

    /// Last iteration index M.
    pub fn last_index(&self) -> i64 {
        self.records.last().map(|r| r.index).unwrap_or(0)
    }

    /// Replay the deltas: the graph state holding from each record's index
    /// until the next record.
    pub fn states(&self) -> Result<Vec<(i64, LabeledGraph)>> {
        let mut g = LabeledGraph::new(self.labels.clone())
            .map_err(|e| Error::Trajectory(e.to_string()))?;
        let mut out = Vec::with_capacity(self.records.len());
        for rec in &self.records {
            for e in &rec.removed {
                let present = if e.directed {
                    g.has_directed(e.a, e.b)
                } else {
                    g.has_undirected(e.a, e.b)
                };
                if !present {
                    return Err(Error::Trajectory(format!(
                        "record {}: removing absent edge {}{}{}",
                        rec.index,
                        self.labels[e.a],
                        if e.directed { "->" } else { "-" },
                        self.labels[e.b]
                    )));
                }
                g.remove_edge(e.a, e.b);
            }
            for e in &rec.added {
                if g.adjacent(e.a, e.b) {
                    return Err(Error::Trajectory(format!(
                        "record {}: adding already-present edge {}{}{}",
                        rec.index,
                        self.labels[e.a],
                        if e.directed { "->" } else { "-" },
                        self.labels[e.b]
                    )));
                }
                if e.directed {
                    g.set_directed(e.a, e.b);
                } else {
                    g.set_undirected(e.a, e.b);
                }
            }
            out.push((rec.index, g.clone()));
        }
        Ok(out)
    }
}

fn label_ok_for_trajectory(l: &str) -> bool {
    !l.is_empty() && !l.contains([',', ';', '[', ']', '-', '>'])
}

fn fmt_edge(e: &TrajEdge, labels: &[String]) -> String {
    if e.directed {
        format!("{}->{}", labels[e.a], labels[e.b])
    } else {
        format!("{}-{}", labels[e.a], labels[e.b])
    }
}

fn fmt_edge_list(edges: &[TrajEdge], labels: &[String]) -> String {
    let inner: Vec<String> = edges.iter().map(|e| fmt_edge(e, labels)).collect();
    format!("[{}]", inner.join(";"))
}

fn parse_edge_list(
    field: &str,
    labels: &[String],
    path: &Path,
    lineno: usize,
) -> Result<Vec<TrajEdge>> {
    let field = field.trim();
    if !field.starts_with('[') || !field.ends_with(']') {
        return Err(Error::parse(
            path,
            lineno,
            format!("edge list {field:?} not bracketed"),
        ));
    }
    let inner = &field[1..field.len() - 1];
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for tok in inner.split(';') {
        let (a, b, directed) = if let Some((a, b)) = tok.split_once("->") {
            (a, b, true)
        } else if let Some((a, b)) = tok.split_once('-') {
            (a, b, false)
        } else {
            return Err(Error::parse(
                path,
                lineno,
                format!("malformed edge token {tok:?}"),
            ));
        };
        let ia = labels.iter().position(|l| l == a).ok_or_else(|| {
            Error::parse(path, lineno, format!("unknown node {a:?} in edge {tok:?}"))
        })?;
        let ib = labels.iter().position(|l| l == b).ok_or_else(|| {
            Error::parse(path, lineno, format!("unknown node {b:?} in edge {tok:?}"))
        })?;
        out.push(TrajEdge {
            a: ia,
            b: ib,
            directed,
        });
    }
    Ok(out)
}

/// Split a trajectory row into its four fields. The edge-list fields
/// contain no commas, so a plain comma split with a field count check is
/// exact.
fn split_traj_row<'a>(line: &'a str, path: &Path, lineno: usize) -> Result<[&'a str; 4]> {
    let parts: Vec<&str> = line.split(',').collect();
    if parts.len() != 4 {
        return Err(Error::parse(
            path,
            lineno,
            format!("expected 4 fields, got {}", parts.len()),
        ));
    }
    Ok([parts[0], parts[1], parts[2], parts[3]])
}

/// Read a trajectory CSV, recovering labels from the two header rows.
pub fn read_trajectory(path: &Path) -> Result<GraphTrajectory> {
    let lines = read_lines(path)?;
    if lines.len() < 4 {
        return Err(Error::parse(
            path,
            lines.len(),
            "trajectory needs the column header, two label rows and an index-0 row",
        ));
    }
    if lines[0] != "index,score,added,removed" {
        return Err(Error::parse(
            path,
            1,
            format!("bad column header {:?}", lines[0]),
        ));
    }
    // row index -2: edges from the first variable to each of the rest
    let [idx, score, added, removed] = split_traj_row(&lines[1], path, 2)?;
    if idx != "-2" || removed != "[]" {
        return Err(Error::parse(path, 2, "first label row must be \"-2,0.0,[...],[]\""));
    }
    if score.parse::<f64>().ok() != Some(0.0) {
        return Err(Error::parse(path, 2, "label-row score must be 0"));
    }
    let added = added.trim();
    if !added.starts_with('[') || !added.ends_with(']') || added.len() < 2 {
        return Err(Error::parse(path, 2, "malformed label row"));
    }
    let inner = &added[1..added.len() - 1];
    let mut labels: Vec<String> = Vec::new();
    if inner.is_empty() {
        return Err(Error::parse(
            path,
            2,
            "cannot recover labels from an empty alphabet row (single-variable trajectory)",
        ));
    }
    for tok in inner.split(';') {
        let (a, b) = tok
            .split_once("->")
            .or_else(|| tok.split_once('-'))
            .ok_or_else(|| Error::parse(path, 2, format!("malformed label edge {tok:?}")))?;
        if labels.is_empty() {
            labels.push(a.to_string());
        } else if labels[0] != a {
            return Err(Error::parse(
                path,
                2,
                format!("label row edges must share the first variable, got {a:?}"),
            ));
        }
        labels.push(b.to_string());
    }
    // row index -1 mirrors row -2 with added/removed swapped
    let [idx, score, added2, removed2] = split_traj_row(&lines[2], path, 3)?;
    if idx != "-1" || added2 != "[]" || removed2 != added || score.parse::<f64>().ok() != Some(0.0)
    {
        return Err(Error::parse(
            path,
            3,
            "second label row must mirror the first with added/removed swapped",
        ));
    }

    let mut records = Vec::new();
    for (k, line) in lines[3..].iter().enumerate() {
        let lineno = k + 4;
        let [idx, score, added, removed] = split_traj_row(line, path, lineno)?;
        let index: i64 = idx
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("bad index {idx:?}")))?;
        let score: f64 = score
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("bad score {score:?}")))?;
        records.push(TrajRecord {
            index,
            score,
            added: parse_edge_list(added, &labels, path, lineno)?,
            removed: parse_edge_list(removed, &labels, path, lineno)?,
        });
    }
    let traj = GraphTrajectory { labels, records };
    traj.validate()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    Ok(traj)
}

/// Write a trajectory CSV with regenerated label rows.
pub fn write_trajectory(traj: &GraphTrajectory, path: &Path) -> Result<()> {
    traj.validate()?;
    for l in &traj.labels {
        if !label_ok_for_trajectory(l) {
            return Err(Error::Trajectory(format!(
                "label {l:?} contains trajectory delimiter characters"
            )));
        }
    }
    let alphabet: Vec<TrajEdge> = (1..traj.labels.len())
        .map(|b| TrajEdge {
            a: 0,
            b,
            directed: false,
        })
        .collect();
    let mut out = String::from("index,score,added,removed\n");
    out.push_str(&format!(
        "-2,0.0,{},[]\n",
        fmt_edge_list(&alphabet, &traj.labels)
    ));
    out.push_str(&format!(
        "-1,0.0,[],{}\n",
        fmt_edge_list(&alphabet, &traj.labels)
    ));
    for rec in &traj.records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            rec.index,
            fmt_real(rec.score),
            fmt_edge_list(&rec.added, &traj.labels),
            fmt_edge_list(&rec.removed, &traj.labels),
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
