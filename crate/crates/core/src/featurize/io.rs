//! Tabular inputs: point clouds, numeric matrices, label files and the TU
//! graph-corpus layout.

use std::collections::HashSet;
use std::path::Path;

use super::PointCloud;
use crate::error::{Error, Result};
use crate::graph::Graph;

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn line_of(r: &csv::StringRecord) -> usize {
    r.position().map_or(0, |p| p.line() as usize)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Numeric table with an optional header row of column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn columns(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

/// Parses comma-separated numbers, one row per line. A first row that is not
/// numeric is taken as a header; `#` lines are skipped.
pub fn parse_table(text: &str, origin: &Path) -> Result<Table> {
    let mut names: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in reader(text).records() {
        let rec = rec.map_err(|e| Error::parse(origin, e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => {
                if let Some(first) = rows.first() {
                    if first.len() != row.len() {
                        return Err(Error::parse(origin, line_of(&rec), format!("expected {} values, found {}", first.len(), row.len())));
                    }
                }
                rows.push(row);
            }
            Err(_) if rows.is_empty() && names.is_none() => names = Some(rec.iter().map(String::from).collect()),
            Err(e) => return Err(Error::parse(origin, line_of(&rec), format!("bad number: {e}"))),
        }
    }
    if let (Some(n), Some(r)) = (&names, rows.first()) {
        if n.len() != r.len() {
            return Err(Error::parse(origin, 1, format!("header has {} names but rows have {} values", n.len(), r.len())));
        }
    }
    Ok(Table { names, rows })
}

pub fn read_table(path: &Path) -> Result<Table> {
    parse_table(&read(path)?, path)
}

/// Point cloud from `x,y,z` lines.
pub fn parse_point_cloud(text: &str, origin: &Path) -> Result<PointCloud> {
    let t = parse_table(text, origin)?;
    if t.columns() != 3 && !t.rows.is_empty() {
        return Err(Error::parse(origin, 1, format!("expected 3 coordinates per point, found {}", t.columns())));
    }
    PointCloud::new(t.rows.into_iter().map(|r| [r[0], r[1], r[2]]).collect())
}

pub fn read_point_cloud(path: &Path) -> Result<PointCloud> {
    parse_point_cloud(&read(path)?, path)
}

/// `id,label` pairs in file order. A header row `id,label` is skipped.
pub fn parse_labels(text: &str, origin: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for rec in reader(text).records() {
        let rec = rec.map_err(|e| Error::parse(origin, 0, e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::parse(origin, line_of(&rec), "expected 'id,label'"));
        }
        if out.is_empty() && seen.is_empty() && rec[0].eq_ignore_ascii_case("id") {
            seen.insert(String::new());
            continue;
        }
        if !seen.insert(rec[0].to_string()) {
            return Err(Error::parse(origin, line_of(&rec), format!("duplicate id '{}'", &rec[0])));
        }
        out.push((rec[0].to_string(), rec[1].to_string()));
    }
    Ok(out)
}

pub fn read_labels(path: &Path) -> Result<Vec<(String, String)>> {
    parse_labels(&read(path)?, path)
}

/// Graphs of a TU-format corpus with their integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TuDataset {
    pub graphs: Vec<Graph>,
    pub labels: Vec<i64>,
}

fn ints(path: &Path, width: usize) -> Result<Vec<Vec<i64>>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|e| Error::parse(path, i + 1, format!("bad integer '{}': {e}", t.trim()))))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != width {
            return Err(Error::parse(path, i + 1, format!("expected {width} values, found {}", row.len())));
        }
        out.push(row);
    }
    Ok(out)
}

/// Reads `<name>_A.txt`, `<name>_graph_indicator.txt` and
/// `<name>_graph_labels.txt` from `dir`. Node and graph ids are 1-based.
pub fn read_tu(dir: &Path, name: &str) -> Result<TuDataset> {
    let a_path = dir.join(format!("{name}_A.txt"));
    let ind_path = dir.join(format!("{name}_graph_indicator.txt"));
    let lab_path = dir.join(format!("{name}_graph_labels.txt"));
    let indicator: Vec<i64> = ints(&ind_path, 1)?.into_iter().map(|r| r[0]).collect();
    let labels: Vec<i64> = ints(&lab_path, 1)?.into_iter().map(|r| r[0]).collect();
    let g = labels.len();
    let mut local = vec![0usize; indicator.len()];
    let mut sizes = vec![0usize; g];
    for (v, &gi) in indicator.iter().enumerate() {
        if gi < 1 || gi as usize > g {
            return Err(Error::parse(&ind_path, v + 1, format!("graph id {gi} outside 1..={g}")));
        }
        local[v] = sizes[gi as usize - 1];
        sizes[gi as usize - 1] += 1;
    }
    let mut edges = vec![Vec::new(); g];
    for (i, r) in ints(&a_path, 2)?.into_iter().enumerate() {
        let (a, b) = (r[0], r[1]);
        let valid = |x: i64| x >= 1 && x as usize <= indicator.len();
        if !valid(a) || !valid(b) {
            return Err(Error::parse(&a_path, i + 1, format!("node id outside 1..={}", indicator.len())));
        }
        let (a, b) = (a as usize - 1, b as usize - 1);
        if indicator[a] != indicator[b] {
            return Err(Error::parse(&a_path, i + 1, "edge joins two different graphs"));
        }
        edges[indicator[a] as usize - 1].push((local[a], local[b]));
    }
    let graphs = edges.iter().zip(&sizes).map(|(e, &n)| Graph::from_edges(n, e)).collect();
    Ok(TuDataset { graphs, labels })
}
