//! Direct matrix ingestion and emission.
//!
//! JSON: `{ "nodes": ["n1", ...], "matrix": [[...], ...] }`
//! CSV: first row is the node names, then one row of numbers per node.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplacian::Laplacian;
use crate::netlist::NodeMap;

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    nodes: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

pub fn read_matrix_json(text: &str) -> Result<Laplacian> {
    let parsed: MatrixJson = serde_json::from_str(text)?;
    from_rows(parsed.nodes, parsed.matrix)
}

pub fn write_matrix_json(laplacian: &Laplacian) -> String {
    let n = laplacian.n();
    let doc = MatrixJson {
        nodes: laplacian.node_map().names().to_vec(),
        matrix: (0..n)
            .map(|i| laplacian.matrix().row(i).to_vec())
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("matrix serialization cannot fail")
}

pub fn read_matrix_csv(text: &str) -> Result<Laplacian> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidMatrix("empty csv input".to_string()))?;
    let nodes: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if nodes.iter().any(|n| n.is_empty()) {
        return Err(Error::InvalidMatrix("empty node name in csv header".to_string()));
    }
    let mut rows = Vec::with_capacity(nodes.len());
    for (i, line) in lines.enumerate() {
        let row: Result<Vec<f64>> = line
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidMatrix(format!("row {}: non-numeric entry '{}'", i + 1, t.trim()))
                })
            })
            .collect();
        rows.push(row?);
    }
    from_rows(nodes, rows)
}

pub fn write_matrix_csv(laplacian: &Laplacian) -> String {
    let mut out = laplacian.node_map().names().join(",");
    out.push('\n');
    for i in 0..laplacian.n() {
        let row: Vec<String> = laplacian
            .matrix()
            .row(i)
            .iter()
            .map(|v| format!("{v}"))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn from_rows(nodes: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Laplacian> {
    let n = nodes.len();
    if rows.len() != n {
        return Err(Error::InvalidMatrix(format!(
            "{} node names but {} matrix rows",
            n,
            rows.len()
        )));
    }
    let mut matrix = Array2::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidMatrix(format!(
                "row {} has {} entries, expected {}",
                i + 1,
                row.len(),
                n
            )));
        }
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidMatrix(format!(
                    "non-finite entry at ({i},{j})"
                )));
            }
            matrix[[i, j]] = *v;
        }
    }
    Laplacian::from_parts(matrix, NodeMap::new(nodes)?)
}
