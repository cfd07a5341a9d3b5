//! AST-based, application-only call graph generation.
//!
//! The crate is organized along the pipeline: [`parse`] turns a source tree
//! into a [`Forest`](parse::Forest), a preprocessor builds lookup structures
//! from it, and the worklist driver in [`framework`] resolves call sites with
//! a language-specific [`Generator`](framework::Generator). The [`java`]
//! module ships two such generators (name-based and simple class hierarchy
//! analysis); [`outputs`] serializes and compares the resulting graphs.

pub mod cache;
pub mod error;
pub mod fixtures;
pub mod framework;
pub mod java;
pub mod model;
pub mod outputs;
pub mod parse;
pub mod synth;

pub use error::{Error, Result};
pub use framework::{generate, select_entry_points, EntryPointFilter, Generator};
pub use java::{Algorithm, JavaGenerator, PreprocessResult, ResolutionConfig};
pub use model::{
    merge_graphs, CallGraph, CallSite, CanonicalId, ClassName, ClassRegion, ContainerKey, Edge,
    MethodKey, ReceiverKind, SiteId, SiteKind, TargetKey, Unresolved, Vertex,
};
pub use parse::{
    descendants_of_kind, load_grammar, parse_sources, Forest, Language, SourceFile, SyntaxNode,
};
