use std::collections::BTreeSet;
use std::fmt;

use crate::model::CallGraph;

use super::json::GraphDocument;

/// Edges reduced to (source container, defining body).
pub type ProjectedEdges = BTreeSet<(String, String)>;

pub fn project(graph: &CallGraph) -> ProjectedEdges {
    graph
        .edges()
        .map(|e| (e.source.to_string(), e.target.defined_in.to_string()))
        .collect()
}

impl GraphDocument {
    pub fn projected_edges(&self) -> ProjectedEdges {
        self.edges
            .iter()
            .map(|e| (e.src.clone(), e.defined_in.clone()))
            .collect()
    }
}

/// `cells[i][j]` is the share of generator `i`'s edges also found by `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    pub labels: Vec<String>,
    pub diagonal: Vec<usize>,
    pub cells: Vec<Vec<f64>>,
}

pub fn overlap(graphs: &[(String, ProjectedEdges)]) -> OverlapMatrix {
    let cells = graphs
        .iter()
        .map(|(_, row)| {
            graphs
                .iter()
                .map(|(_, col)| {
                    if row.is_empty() {
                        0.0
                    } else {
                        row.intersection(col).count() as f64 / row.len() as f64
                    }
                })
                .collect()
        })
        .collect();
    OverlapMatrix {
        labels: graphs.iter().map(|(l, _)| l.clone()).collect(),
        diagonal: graphs.iter().map(|(_, e)| e.len()).collect(),
        cells,
    }
}

impl OverlapMatrix {
    pub fn cell_text(&self, i: usize, j: usize) -> String {
        if i == j {
            self.diagonal[i].to_string()
        } else {
            format!("{:.1}%", self.cells[i][j] * 100.0)
        }
    }
}

/// Row generator down the side, column generator across the top; the
/// diagonal holds edge counts.
impl fmt::Display for OverlapMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.labels.len();
        let mut width = self.labels.iter().map(String::len).max().unwrap_or(0);
        for i in 0..n {
            for j in 0..n {
                width = width.max(self.cell_text(i, j).len());
            }
        }
        write!(f, "{:width$}", "")?;
        for label in &self.labels {
            write!(f, "  {label:>width$}")?;
        }
        writeln!(f)?;
        for i in 0..n {
            write!(f, "{:width$}", self.labels[i])?;
            for j in 0..n {
                write!(f, "  {:>width$}", self.cell_text(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
