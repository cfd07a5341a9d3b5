use std::collections::BTreeSet;
use std::fmt::Write;
use std::str::FromStr;

use crate::model::{CallGraph, ContainerKey, Vertex};

/// How inherited-dispatch targets are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DotMode {
    /// `B#method/0@A` stays its own node.
    #[default]
    KeepDispatch,
    /// Targets are replaced by the body they run, `A#method/0`.
    CollapseInherited,
}

impl FromStr for DotMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "keep-dispatch" => Ok(DotMode::KeepDispatch),
            "collapse-inherited" => Ok(DotMode::CollapseInherited),
            other => Err(format!("unknown dot mode {other:?}")),
        }
    }
}

fn quote(id: &str) -> String {
    let mut out = String::with_capacity(id.len() + 2);
    out.push('"');
    for c in id.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn emit_dot(graph: &CallGraph, mode: DotMode) -> String {
    let vertex_id = |v: &Vertex| match (v, mode) {
        (Vertex::Dispatch(t), DotMode::CollapseInherited) => {
            ContainerKey::Method(t.defined_in.clone()).to_string()
        }
        _ => v.to_string(),
    };
    let nodes: BTreeSet<String> = graph.vertices().map(vertex_id).collect();
    let edges: BTreeSet<(String, String)> = graph
        .edges()
        .map(|e| {
            let dst = match mode {
                DotMode::KeepDispatch => e.target.to_string(),
                DotMode::CollapseInherited => e.target.defined_in.to_string(),
            };
            (e.source.to_string(), dst)
        })
        .collect();
    if nodes.is_empty() {
        return "digraph acer {}\n".to_string();
    }
    let mut out = String::from("digraph acer {\n");
    for n in &nodes {
        let _ = writeln!(out, "  {};", quote(n));
    }
    for (src, dst) in &edges {
        let _ = writeln!(out, "  {} -> {};", quote(src), quote(dst));
    }
    out.push_str("}\n");
    out
}
