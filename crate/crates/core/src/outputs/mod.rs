//! Graph serialization (DOT, JSON, CSV), edge-overlap comparison and the
//! receiver census.

pub mod census;
pub mod dot;
pub mod json;
pub mod overlap;
pub mod table;

pub use census::{census, ReceiverCensus};
pub use dot::{emit_dot, DotMode};
pub use json::{emit_json, read_json, GraphConfig, GraphDocument, GRAPH_SCHEMA};
pub use overlap::{overlap, project, OverlapMatrix, ProjectedEdges};
pub use table::emit_csv;
