//! Java front end: preprocessing, call-site seeking and the NR and SCHA
//! generators.

pub mod preprocess;
pub mod resolve;
pub mod seek;
pub mod syntax;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{self, EntryPointFilter, Generator, Resolution};
use crate::model::{CallGraph, CallSite, ClassRegion, ContainerKey, MethodKey};
use crate::parse::Forest;

pub use preprocess::{
    preprocess, ClassCache, ClassKind, ClassRecord, ImportTable, MethodEntry, PreprocessResult,
};
pub use resolve::{
    find_declaration, resolve_nr, resolve_scha, DeclarationSite, Outcome, ResolutionConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nr,
    Scha,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Nr => "nr",
            Algorithm::Scha => "scha",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nr" => Ok(Algorithm::Nr),
            "scha" => Ok(Algorithm::Scha),
            other => Err(format!("unknown algorithm {other:?} (expected nr or scha)")),
        }
    }
}

pub struct JavaGenerator<'a> {
    pub forest: &'a Forest,
    pub products: &'a PreprocessResult,
    pub algorithm: Algorithm,
    pub config: ResolutionConfig,
    dispatch: resolve::DispatchCache,
}

impl<'a> JavaGenerator<'a> {
    pub fn new(
        forest: &'a Forest,
        products: &'a PreprocessResult,
        algorithm: Algorithm,
        config: ResolutionConfig,
    ) -> Self {
        JavaGenerator {
            forest,
            products,
            algorithm,
            config,
            dispatch: Default::default(),
        }
    }

    pub fn entry_points(&self, filter: &EntryPointFilter) -> Result<Vec<MethodKey>> {
        framework::select_entry_points(self.products.method_dict.keys(), filter)
    }

    /// Entry selection plus generation. An empty selection yields an empty
    /// graph together with the `NoEntryPoints` error for the caller to report.
    pub fn run(&self, filter: &EntryPointFilter) -> (CallGraph, Option<Error>) {
        match self.entry_points(filter) {
            Ok(entries) => match framework::generate(self, &entries) {
                Ok(graph) => (graph, None),
                Err(e) => (CallGraph::new(), Some(e)),
            },
            Err(e) => (CallGraph::new(), Some(e)),
        }
    }
}

impl Generator for JavaGenerator<'_> {
    type Context = ();

    fn initial_context(&self) {}

    fn class_level_containers(&self, entry: &MethodKey) -> Vec<ContainerKey> {
        if self.products.class_cache.get(&entry.class).is_none() {
            return Vec::new();
        }
        ClassRegion::ALL
            .iter()
            .map(|region| ContainerKey::ClassLevel {
                class: entry.class.clone(),
                region: *region,
            })
            .collect()
    }

    fn seek_call_sites(&self, container: &ContainerKey) -> Vec<CallSite> {
        seek::seek_container(self.forest, self.products, container)
    }

    fn resolve(&self, _: &(), site: &CallSite) -> std::result::Result<Resolution<()>, String> {
        let outcome = match self.algorithm {
            Algorithm::Nr => resolve_nr(site, self.products, &self.config),
            Algorithm::Scha => {
                let node = resolve::site_node(self.forest, site)
                    .ok_or("call site no longer in the forest")?;
                resolve::resolve_scha_cached(
                    site,
                    node,
                    self.products,
                    &self.config,
                    &self.dispatch,
                )
            }
        };
        Ok(match outcome {
            Outcome::Targets(t) => Resolution::Targets(t.into_iter().map(|t| ((), t)).collect()),
            Outcome::Unresolved(reason) => Resolution::Unresolved(reason.to_string()),
        })
    }
}

/// Preprocesses and generates in one go.
pub fn generate_graph(
    forest: &Forest,
    algorithm: Algorithm,
    config: ResolutionConfig,
    filter: &EntryPointFilter,
) -> Result<CallGraph> {
    let products = preprocess(forest);
    let generator = JavaGenerator::new(forest, &products, algorithm, config);
    let entries = generator.entry_points(filter)?;
    framework::generate(&generator, &entries)
}
