//! Language-agnostic generation engine.
//!
//! A preprocessor produces at least a method dictionary (unique method keys to
//! their bodies) and a unique dictionary (non-unique lookup keys to the sets
//! of methods they may denote). A [`Generator`] supplies two operations,
//! `seek_call_sites` and `resolve`, and [`generate`] runs the worklist:
//!
//! 1. seed the deque with the call sites of every entry container, plus the
//!    class-level containers of each entry's class;
//! 2. pop `(context, site)`, skip it if already visited, otherwise resolve it;
//! 3. for every `(context', target)` add an edge and push the call sites of
//!    the target's defining body under `context'`.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;

use rayon::prelude::*;
use regex::Regex;

use crate::error::{Error, Result};
use crate::model::{CallGraph, CallSite, ContainerKey, MethodKey, SiteId, TargetKey, Vertex};

/// Lookup key that may denote several methods.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NonUniqueKey {
    NameArity(String, usize),
    AliasNameArity(String, String, usize),
}

impl fmt::Display for NonUniqueKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonUniqueKey::NameArity(name, arity) => write!(f, "{name}/{arity}"),
            NonUniqueKey::AliasNameArity(alias, name, arity) => write!(f, "{alias}#{name}/{arity}"),
        }
    }
}

impl std::str::FromStr for NonUniqueKey {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::MalformedKey {
            text: text.to_string(),
            reason: "expected name/arity or alias#name/arity",
        };
        let (head, arity) = text.rsplit_once('/').ok_or_else(bad)?;
        let arity: usize = arity.parse().map_err(|_| bad())?;
        Ok(match head.split_once('#') {
            Some((alias, name)) => NonUniqueKey::AliasNameArity(alias.into(), name.into(), arity),
            None => NonUniqueKey::NameArity(head.into(), arity),
        })
    }
}

impl serde::Serialize for NonUniqueKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for NonUniqueKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

pub type UniqueDict = BTreeMap<NonUniqueKey, BTreeSet<MethodKey>>;

/// The two products every preprocessor must provide.
pub trait PreprocessProducts {
    type Body;

    fn method_dict(&self) -> &BTreeMap<MethodKey, Self::Body>;
    fn unique_dict(&self) -> &UniqueDict;
}

/// Checks the preprocessor contract: every unique-dict value set is non-empty
/// and only mentions keys of the method dictionary.
pub fn check_products<P: PreprocessProducts>(products: &P) -> std::result::Result<(), String> {
    let methods = products.method_dict();
    for (key, set) in products.unique_dict() {
        if set.is_empty() {
            return Err(format!("empty method set for {key}"));
        }
        if let Some(missing) = set.iter().find(|m| !methods.contains_key(*m)) {
            return Err(format!("{key} refers to unknown method {missing}"));
        }
    }
    Ok(())
}

/// Outcome of resolving one call site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution<C> {
    Targets(Vec<(C, TargetKey)>),
    /// Nothing matched; the reason ends up in the unresolved report.
    Unresolved(String),
}

/// A language-specific generator.
pub trait Generator {
    /// Per-algorithm payload; `()` for context-insensitive algorithms.
    type Context: Clone + Eq + Hash + fmt::Debug;

    fn initial_context(&self) -> Self::Context;

    /// Class-level containers to seed alongside an entry method.
    fn class_level_containers(&self, entry: &MethodKey) -> Vec<ContainerKey>;

    /// Call sites inside `container`, in document order.
    fn seek_call_sites(&self, container: &ContainerKey) -> Vec<CallSite>;

    /// Target methods of `site`. May be empty but never contains duplicates.
    fn resolve(
        &self,
        context: &Self::Context,
        site: &CallSite,
    ) -> std::result::Result<Resolution<Self::Context>, String>;
}

#[derive(Debug, Clone)]
pub enum EntryPointFilter {
    AllMethods,
    NameEquals(String),
    /// Matches against the canonical method id.
    Regex(Regex),
}

impl EntryPointFilter {
    /// Parses `all`, `name=<string>` or `regex=<pattern>`.
    pub fn parse(spec: &str) -> Result<EntryPointFilter> {
        if spec == "all" {
            return Ok(EntryPointFilter::AllMethods);
        }
        if let Some(name) = spec.strip_prefix("name=") {
            return Ok(EntryPointFilter::NameEquals(name.to_string()));
        }
        if let Some(pattern) = spec.strip_prefix("regex=") {
            return Regex::new(pattern)
                .map(EntryPointFilter::Regex)
                .map_err(|_| Error::InvalidEntryFilter(spec.to_string()));
        }
        Err(Error::InvalidEntryFilter(spec.to_string()))
    }

    pub fn matches(&self, key: &MethodKey) -> bool {
        match self {
            EntryPointFilter::AllMethods => true,
            EntryPointFilter::NameEquals(name) => key.name == *name,
            EntryPointFilter::Regex(re) => re.is_match(&key.to_string()),
        }
    }
}

impl fmt::Display for EntryPointFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryPointFilter::AllMethods => f.write_str("all"),
            EntryPointFilter::NameEquals(n) => write!(f, "name={n}"),
            EntryPointFilter::Regex(re) => write!(f, "regex={}", re.as_str()),
        }
    }
}

/// Entry points sorted by canonical id. Fails with [`Error::NoEntryPoints`]
/// when the filter matches nothing.
pub fn select_entry_points<'a>(
    methods: impl IntoIterator<Item = &'a MethodKey>,
    filter: &EntryPointFilter,
) -> Result<Vec<MethodKey>> {
    let mut entries: Vec<(String, MethodKey)> = methods
        .into_iter()
        .filter(|k| filter.matches(k))
        .map(|k| (k.to_string(), k.clone()))
        .collect();
    if entries.is_empty() {
        return Err(Error::NoEntryPoints);
    }
    entries.sort();
    Ok(entries.into_iter().map(|(_, k)| k).collect())
}

/// Runs the worklist from `entries` and returns the reachable call graph.
pub fn generate<G: Generator>(generator: &G, entries: &[MethodKey]) -> Result<CallGraph> {
    Driver::new(generator).run(entries)
}

/// Splits `entries` into `shards` independent drivers run in parallel and
/// merges their graphs. For context-insensitive generators the result equals
/// [`generate`] over all entries.
pub fn generate_sharded<G>(generator: &G, entries: &[MethodKey], shards: usize) -> Result<CallGraph>
where
    G: Generator + Sync,
{
    let shards = shards.max(1);
    let chunk = entries.len().div_ceil(shards).max(1);
    let graphs: Vec<CallGraph> = entries
        .par_chunks(chunk)
        .map(|part| generate(generator, part))
        .collect::<Result<_>>()?;
    Ok(graphs.into_iter().fold(CallGraph::new(), CallGraph::merge))
}

struct Driver<'g, G: Generator> {
    generator: &'g G,
    deque: VecDeque<(G::Context, CallSite)>,
    visited: HashSet<(G::Context, SiteId)>,
    expanded: HashSet<(G::Context, MethodKey)>,
    graph: CallGraph,
}

impl<'g, G: Generator> Driver<'g, G> {
    fn new(generator: &'g G) -> Self {
        Driver {
            generator,
            deque: VecDeque::new(),
            visited: HashSet::new(),
            expanded: HashSet::new(),
            graph: CallGraph::new(),
        }
    }

    fn push_container(&mut self, context: &G::Context, container: &ContainerKey) {
        for site in self.generator.seek_call_sites(container) {
            self.deque.push_back((context.clone(), site));
        }
    }

    fn seed(&mut self, entries: &[MethodKey]) {
        let context = self.generator.initial_context();
        let mut seeded_levels = BTreeSet::new();
        for entry in entries {
            for level in self.generator.class_level_containers(entry) {
                if seeded_levels.insert(level.clone()) {
                    self.push_container(&context, &level);
                }
            }
            if self.expanded.insert((context.clone(), entry.clone())) {
                let container = ContainerKey::Method(entry.clone());
                self.graph.add_vertex(Vertex::Container(container.clone()));
                self.push_container(&context, &container);
            }
        }
    }

    fn run(mut self, entries: &[MethodKey]) -> Result<CallGraph> {
        self.seed(entries);
        while let Some((context, site)) = self.deque.pop_front() {
            if !self.visited.insert((context.clone(), site.id.clone())) {
                continue;
            }
            let resolution =
                self.generator
                    .resolve(&context, &site)
                    .map_err(|message| Error::Resolve {
                        site: site.id.to_string(),
                        message,
                    })?;
            match resolution {
                Resolution::Unresolved(reason) => self.graph.add_unresolved(site, reason),
                Resolution::Targets(targets) if targets.is_empty() => {
                    self.graph.add_unresolved(site, "unresolved")
                }
                Resolution::Targets(targets) => {
                    for (next, target) in targets {
                        let body = target.defined_in.clone();
                        self.graph
                            .add_edge(site.container.clone(), target, site.id.clone());
                        if self.expanded.insert((next.clone(), body.clone())) {
                            self.push_container(&next, &ContainerKey::Method(body));
                        }
                    }
                }
            }
        }
        Ok(self.graph)
    }
}
