use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::java::ResolutionConfig;
use crate::model::{CallGraph, ClassName, ContainerKey, MethodKey, Vertex};

pub const GRAPH_SCHEMA: &str = "acer-graph/1";

/// Run settings embedded in every graph document. Thread counts and paths
/// are left out so that outputs do not depend on where or how fast they ran.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphConfig {
    pub language: String,
    pub algorithm: String,
    pub entry: String,
    pub resolution: ResolutionConfig,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            language: "java".into(),
            algorithm: "nr".into(),
            entry: "all".into(),
            resolution: ResolutionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub package: String,
    pub class_path: Vec<String>,
    /// Method name, or the region marker for class-level containers.
    pub name: String,
    pub arity: Option<usize>,
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: String,
    pub dst: String,
    pub defined_in: String,
    pub file: String,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnresolvedRecord {
    pub file: String,
    pub row: usize,
    pub col: usize,
    pub name: String,
    pub arity: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub schema_version: String,
    pub config: GraphConfig,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub unresolved: Vec<UnresolvedRecord>,
}

fn method_node(id: String, class: &ClassName, method: &MethodKey) -> NodeRecord {
    NodeRecord {
        id,
        package: class.package.clone(),
        class_path: class.path.clone(),
        name: method.name.clone(),
        arity: Some(method.arity),
        synthetic: false,
    }
}

fn node(vertex: &Vertex) -> NodeRecord {
    let id = vertex.to_string();
    match vertex {
        Vertex::Container(ContainerKey::Method(m)) => method_node(id, &m.class, m),
        Vertex::Container(ContainerKey::ClassLevel { class, region }) => NodeRecord {
            id,
            package: class.package.clone(),
            class_path: class.path.clone(),
            name: region.marker().to_string(),
            arity: None,
            synthetic: true,
        },
        Vertex::Dispatch(t) => method_node(id, &t.dispatch_class, &t.defined_in),
    }
}

impl GraphDocument {
    pub fn new(graph: &CallGraph, config: GraphConfig) -> GraphDocument {
        let mut nodes: Vec<NodeRecord> = graph.vertices().map(node).collect();
        nodes.sort();
        let mut edges: Vec<EdgeRecord> = graph
            .edges()
            .map(|e| EdgeRecord {
                src: e.source.to_string(),
                dst: e.target.to_string(),
                defined_in: e.target.defined_in.to_string(),
                file: e.site.file.clone(),
                row: e.site.row,
                col: e.site.col,
            })
            .collect();
        edges.sort();
        edges.dedup();
        let mut unresolved: Vec<UnresolvedRecord> = graph
            .unresolved()
            .map(|u| UnresolvedRecord {
                file: u.site.id.file.clone(),
                row: u.site.id.row,
                col: u.site.id.col,
                name: u.site.callee_name.clone(),
                arity: u.site.arg_count,
                reason: u.reason,
            })
            .collect();
        unresolved.sort();
        unresolved.dedup();
        GraphDocument {
            schema_version: GRAPH_SCHEMA.to_string(),
            config,
            nodes,
            edges,
            unresolved,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("graph documents serialize");
        text.push('\n');
        text
    }
}

pub fn emit_json(graph: &CallGraph, config: GraphConfig) -> String {
    GraphDocument::new(graph, config).to_json()
}

/// Parses a graph document, rejecting other schema versions.
pub fn read_json(text: &str) -> Result<GraphDocument> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_str())
        .unwrap_or("<missing>")
        .to_string();
    if found != GRAPH_SCHEMA {
        return Err(Error::SchemaMismatch {
            expected: GRAPH_SCHEMA.to_string(),
            found,
        });
    }
    Ok(serde_json::from_value(value)?)
}
