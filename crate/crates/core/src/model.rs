//! Shared vocabulary: method identity, call sites, containers and the call graph.
//!
//! Every key has a canonical string form which doubles as its serialized
//! representation:
//!
//! ```text
//! class      := [package ":"] Outer("." Inner)*
//! method     := class "#" name "/" arity ["(" type ("," type)* ")"]
//! container  := method | class "#<fields>" | class "#<static_init>" | class "#<instance_init>"
//! target     := method | class "#" name "/" arity [types] "@" defining-class
//! ```
//!
//! Constructors are named `<init>`. The parameter type list is only printed
//! when a class declares several overloads with the same name and arity.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const CONSTRUCTOR_NAME: &str = "<init>";

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                text.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

fn malformed(text: &str, reason: &'static str) -> Error {
    Error::MalformedKey {
        text: text.to_string(),
        reason,
    }
}

fn is_segment(s: &str) -> bool {
    !s.is_empty()
        && !s.chars().any(|c| {
            matches!(c, '.' | ':' | '#' | '/' | '@' | '(' | ')' | ',' | '<' | '>')
                || c.is_whitespace()
        })
}

/// Package plus the chain of enclosing class names, outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassName {
    pub package: String,
    pub path: Vec<String>,
}

impl ClassName {
    pub fn new(package: impl Into<String>, path: Vec<String>) -> Self {
        assert!(!path.is_empty(), "class path must not be empty");
        ClassName {
            package: package.into(),
            path,
        }
    }

    /// A top-level class in `package`.
    pub fn top(package: impl Into<String>, name: impl Into<String>) -> Self {
        Self::new(package, vec![name.into()])
    }

    /// The rightmost simple name.
    pub fn alias(&self) -> &str {
        self.path.last().map(String::as_str).unwrap_or_default()
    }

    pub fn nested(&self, name: impl Into<String>) -> ClassName {
        let mut path = self.path.clone();
        path.push(name.into());
        ClassName {
            package: self.package.clone(),
            path,
        }
    }

    pub fn outer(&self) -> Option<ClassName> {
        (self.path.len() > 1).then(|| ClassName {
            package: self.package.clone(),
            path: self.path[..self.path.len() - 1].to_vec(),
        })
    }

    /// Class path joined with dots, as written in Java source (`Outer.Inner`).
    pub fn nested_name(&self) -> String {
        self.path.join(".")
    }

    /// Dotted Java name, e.g. `p.q.Outer.Inner`.
    pub fn java_name(&self) -> String {
        if self.package.is_empty() {
            self.nested_name()
        } else {
            format!("{}.{}", self.package, self.nested_name())
        }
    }
}

impl fmt::Display for ClassName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.package.is_empty() {
            write!(f, "{}:", self.package)?;
        }
        f.write_str(&self.path.join("."))
    }
}

impl FromStr for ClassName {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (package, path) = match text.split_once(':') {
            Some((p, rest)) => {
                if p.is_empty() || !p.split('.').all(is_segment) {
                    return Err(malformed(text, "bad package"));
                }
                (p, rest)
            }
            None => ("", text),
        };
        let path: Vec<String> = path.split('.').map(str::to_string).collect();
        if !path.iter().all(|s| is_segment(s)) {
            return Err(malformed(text, "bad class path"));
        }
        Ok(ClassName::new(package, path))
    }
}

string_serde!(ClassName);

/// Fully quantified method identity: class, name and arity, plus parameter
/// type shorthands when they are needed to tell same-arity overloads apart.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodKey {
    pub class: ClassName,
    pub name: String,
    pub arity: usize,
    pub param_types: Option<Vec<String>>,
}

impl MethodKey {
    pub fn new(class: ClassName, name: impl Into<String>, arity: usize) -> Self {
        MethodKey {
            class,
            name: name.into(),
            arity,
            param_types: None,
        }
    }

    pub fn with_param_types(mut self, types: Vec<String>) -> Self {
        assert_eq!(types.len(), self.arity, "param type count must equal arity");
        self.param_types = Some(types);
        self
    }

    pub fn is_constructor(&self) -> bool {
        self.name == CONSTRUCTOR_NAME
    }

    fn write_signature(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}/{}", self.name, self.arity)?;
        if let Some(types) = &self.param_types {
            write!(f, "({})", types.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Display for MethodKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.class)?;
        self.write_signature(f)
    }
}

fn parse_signature(text: &str, sig: &str) -> Result<(String, usize, Option<Vec<String>>)> {
    let (name, rest) = sig
        .split_once('/')
        .ok_or_else(|| malformed(text, "missing arity"))?;
    if name != CONSTRUCTOR_NAME && !is_segment(name) {
        return Err(malformed(text, "bad method name"));
    }
    let (arity, types) = match rest.split_once('(') {
        Some((a, t)) => {
            let t = t
                .strip_suffix(')')
                .ok_or_else(|| malformed(text, "unclosed types"))?;
            let types: Vec<String> = if t.is_empty() {
                Vec::new()
            } else {
                t.split(',').map(str::to_string).collect()
            };
            (a, Some(types))
        }
        None => (rest, None),
    };
    let arity: usize = arity.parse().map_err(|_| malformed(text, "bad arity"))?;
    if let Some(types) = &types {
        if types.len() != arity || types.iter().any(|t| t.is_empty()) {
            return Err(malformed(text, "type list does not match arity"));
        }
    }
    Ok((name.to_string(), arity, types))
}

impl FromStr for MethodKey {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (class, sig) = text
            .split_once('#')
            .ok_or_else(|| malformed(text, "missing `#`"))?;
        let class: ClassName = class.parse()?;
        let (name, arity, param_types) = parse_signature(text, sig)?;
        Ok(MethodKey {
            class,
            name,
            arity,
            param_types,
        })
    }
}

string_serde!(MethodKey);

/// Non-method region of a class that may contain call sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassRegion {
    Fields,
    StaticInit,
    InstanceInit,
}

impl ClassRegion {
    pub const ALL: [ClassRegion; 3] = [
        ClassRegion::Fields,
        ClassRegion::StaticInit,
        ClassRegion::InstanceInit,
    ];

    pub fn marker(self) -> &'static str {
        match self {
            ClassRegion::Fields => "<fields>",
            ClassRegion::StaticInit => "<static_init>",
            ClassRegion::InstanceInit => "<instance_init>",
        }
    }
}

/// A call container: a method body or a class-level region.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContainerKey {
    Method(MethodKey),
    ClassLevel {
        class: ClassName,
        region: ClassRegion,
    },
}

impl ContainerKey {
    pub fn class(&self) -> &ClassName {
        match self {
            ContainerKey::Method(m) => &m.class,
            ContainerKey::ClassLevel { class, .. } => class,
        }
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self, ContainerKey::ClassLevel { .. })
    }
}

impl fmt::Display for ContainerKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContainerKey::Method(m) => m.fmt(f),
            ContainerKey::ClassLevel { class, region } => {
                write!(f, "{}#{}", class, region.marker())
            }
        }
    }
}

impl FromStr for ContainerKey {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (class, sig) = text
            .split_once('#')
            .ok_or_else(|| malformed(text, "missing `#`"))?;
        if let Some(region) = ClassRegion::ALL.into_iter().find(|r| r.marker() == sig) {
            return Ok(ContainerKey::ClassLevel {
                class: class.parse()?,
                region,
            });
        }
        text.parse().map(ContainerKey::Method)
    }
}

string_serde!(ContainerKey);

/// Where an edge points: the class the call dispatches on and the method
/// body that implements it. The two differ for inherited methods.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TargetKey {
    pub dispatch_class: ClassName,
    pub defined_in: MethodKey,
}

impl TargetKey {
    pub fn direct(method: MethodKey) -> Self {
        TargetKey {
            dispatch_class: method.class.clone(),
            defined_in: method,
        }
    }

    pub fn inherited(dispatch_class: ClassName, defined_in: MethodKey) -> Self {
        TargetKey {
            dispatch_class,
            defined_in,
        }
    }

    pub fn is_inherited(&self) -> bool {
        self.dispatch_class != self.defined_in.class
    }
}

impl fmt::Display for TargetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.is_inherited() {
            return self.defined_in.fmt(f);
        }
        write!(f, "{}", self.dispatch_class)?;
        self.defined_in.write_signature(f)?;
        write!(f, "@{}", self.defined_in.class)
    }
}

impl FromStr for TargetKey {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text.rsplit_once('@') {
            None => text.parse().map(TargetKey::direct),
            Some((head, owner)) => {
                let dispatch: MethodKey = head.parse()?;
                let owner: ClassName = owner.parse()?;
                if owner == dispatch.class {
                    return Err(malformed(text, "redundant `@` suffix"));
                }
                let dispatch_class = dispatch.class.clone();
                Ok(TargetKey::inherited(
                    dispatch_class,
                    MethodKey {
                        class: owner,
                        ..dispatch
                    },
                ))
            }
        }
    }
}

string_serde!(TargetKey);

/// Any canonical key.
pub trait CanonicalId {
    fn canonical_id(&self) -> String;
}

impl<T: fmt::Display> CanonicalId for T {
    fn canonical_id(&self) -> String {
        self.to_string()
    }
}

/// Syntactic shape of the expression left of the dot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum ReceiverKind {
    Implicit,
    ExplicitThis,
    Identifier(String),
    FieldAccess,
    MethodInvocation,
    Other(String),
}

impl ReceiverKind {
    /// Category label used by the census; drops the identifier's name.
    pub fn label(&self) -> String {
        match self {
            ReceiverKind::Implicit => "implicit".into(),
            ReceiverKind::ExplicitThis => "explicit_this".into(),
            ReceiverKind::Identifier(_) => "identifier".into(),
            ReceiverKind::FieldAccess => "field_access".into(),
            ReceiverKind::MethodInvocation => "method_invocation".into(),
            ReceiverKind::Other(kind) => format!("other:{kind}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteKind {
    MethodInvocation,
    ObjectCreation,
}

/// Location of a call site: file plus the byte offset of the callee name
/// (the `new` keyword for object creations). Row and column are 1-based and
/// derived from the offset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteId {
    pub file: String,
    pub offset: usize,
    pub row: usize,
    pub col: usize,
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CallSite {
    pub id: SiteId,
    pub kind: SiteKind,
    /// Method name, or the created class's simple name.
    pub callee_name: String,
    pub arg_count: usize,
    pub receiver: ReceiverKind,
    pub container: ContainerKey,
}

/// Graph vertex. Inherited-dispatch targets are distinct vertices; a direct
/// target is the same vertex as its method container.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Container(ContainerKey),
    Dispatch(TargetKey),
}

impl Vertex {
    pub fn target(target: &TargetKey) -> Vertex {
        if target.is_inherited() {
            Vertex::Dispatch(target.clone())
        } else {
            Vertex::Container(ContainerKey::Method(target.defined_in.clone()))
        }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Container(c) => c.fmt(f),
            Vertex::Dispatch(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: ContainerKey,
    pub target: TargetKey,
    pub site: SiteId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Unresolved {
    pub site: CallSite,
    pub reason: String,
}

/// Directed call graph with set semantics on vertices and edges.
///
/// A site never appears both as an edge site and in the unresolved list:
/// resolving it to any target drops its unresolved entries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    vertices: BTreeSet<Vertex>,
    edges: BTreeSet<Edge>,
    unresolved: BTreeMap<(SiteId, String), CallSite>,
    resolved_sites: HashSet<SiteId>,
}

impl CallGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, vertex: Vertex) {
        self.vertices.insert(vertex);
    }

    pub fn add_edge(&mut self, source: ContainerKey, target: TargetKey, site: SiteId) -> bool {
        self.vertices.insert(Vertex::Container(source.clone()));
        self.vertices.insert(Vertex::target(&target));
        if self.resolved_sites.insert(site.clone()) {
            let stale: Vec<(SiteId, String)> = self
                .unresolved
                .range((site.clone(), String::new())..)
                .take_while(|((s, _), _)| *s == site)
                .map(|(k, _)| k.clone())
                .collect();
            for key in stale {
                self.unresolved.remove(&key);
            }
        }
        self.edges.insert(Edge {
            source,
            target,
            site,
        })
    }

    pub fn add_unresolved(&mut self, site: CallSite, reason: impl Into<String>) {
        if self.resolved_sites.contains(&site.id) {
            return;
        }
        self.unresolved
            .insert((site.id.clone(), reason.into()), site);
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn unresolved(&self) -> impl Iterator<Item = Unresolved> + '_ {
        self.unresolved
            .iter()
            .map(|((_, reason), site)| Unresolved {
                site: site.clone(),
                reason: reason.clone(),
            })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn unresolved_count(&self) -> usize {
        self.unresolved.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.edges.is_empty() && self.unresolved.is_empty()
    }

    /// Union of two graphs built from the same forest.
    pub fn merge(mut self, other: CallGraph) -> CallGraph {
        self.vertices.extend(other.vertices);
        for edge in other.edges {
            self.add_edge(edge.source, edge.target, edge.site);
        }
        for ((_, reason), site) in other.unresolved {
            self.add_unresolved(site, reason);
        }
        self
    }
}

pub fn merge_graphs(g1: CallGraph, g2: CallGraph) -> CallGraph {
    g1.merge(g2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(class: &str, name: &str, arity: usize) -> MethodKey {
        MethodKey::new(class.parse().unwrap(), name, arity)
    }

    fn site(file: &str, offset: usize) -> SiteId {
        SiteId {
            file: file.into(),
            offset,
            row: 1,
            col: offset + 1,
        }
    }

    #[test]
    fn method_ids() {
        assert_eq!(key("Foo", "method1", 1).canonical_id(), "Foo#method1/1");
        assert_eq!(
            key("p.q:Out.In", "<init>", 0).to_string(),
            "p.q:Out.In#<init>/0"
        );
        let overload = key("Bar", "add", 2).with_param_types(vec!["int".into(), "int".into()]);
        assert_eq!(overload.to_string(), "Bar#add/2(int,int)");
        assert_eq!(overload.to_string().parse::<MethodKey>().unwrap(), overload);
    }

    #[test]
    fn class_level_and_target_ids() {
        let fields = ContainerKey::ClassLevel {
            class: ClassName::top("", "Foo"),
            region: ClassRegion::Fields,
        };
        assert_eq!(fields.to_string(), "Foo#<fields>");
        assert_eq!("Foo#<fields>".parse::<ContainerKey>().unwrap(), fields);

        let inherited = TargetKey::inherited(ClassName::top("", "B"), key("A", "method", 0));
        assert_eq!(inherited.to_string(), "B#method/0@A");
        assert_eq!("B#method/0@A".parse::<TargetKey>().unwrap(), inherited);
        assert_eq!(
            TargetKey::direct(key("A", "method", 0)).to_string(),
            "A#method/0"
        );
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "Foo",
            "Foo#m",
            "Foo#m/x",
            ":Foo#m/0",
            "Foo#m/1(int,int)",
            "A..B#m/0",
        ] {
            assert!(bad.parse::<MethodKey>().is_err(), "{bad}");
        }
        assert!("B#m/0@B".parse::<TargetKey>().is_err());
    }

    #[test]
    fn unresolved_never_shares_a_site_with_an_edge() {
        let container = ContainerKey::Method(key("Foo", "m", 0));
        let call = CallSite {
            id: site("F.java", 10),
            kind: SiteKind::MethodInvocation,
            callee_name: "bar".into(),
            arg_count: 0,
            receiver: ReceiverKind::Implicit,
            container: container.clone(),
        };
        let mut g = CallGraph::new();
        g.add_unresolved(call.clone(), "nope");
        assert_eq!(g.unresolved_count(), 1);
        g.add_edge(
            container.clone(),
            TargetKey::direct(key("Bar", "bar", 0)),
            call.id.clone(),
        );
        assert_eq!(g.unresolved_count(), 0);
        g.add_unresolved(call, "nope");
        assert_eq!(g.unresolved_count(), 0);
    }

    fn dispatch_edges() -> Vec<(ContainerKey, TargetKey, SiteId)> {
        let src = ContainerKey::Method(key("Bar", "foo", 1));
        let a = key("A", "method", 0);
        vec![
            (
                src.clone(),
                TargetKey::direct(a.clone()),
                site("F.java", 80),
            ),
            (
                src.clone(),
                TargetKey::inherited(ClassName::top("", "B"), a.clone()),
                site("F.java", 80),
            ),
            (
                src,
                TargetKey::inherited(ClassName::top("", "C"), a),
                site("F.java", 80),
            ),
        ]
    }

    fn graph_of(edges: &[(ContainerKey, TargetKey, SiteId)]) -> CallGraph {
        let mut g = CallGraph::new();
        for (s, t, site) in edges {
            g.add_edge(s.clone(), t.clone(), site.clone());
        }
        g
    }

    #[test]
    fn merge_identity_idempotence_and_halves() {
        let full = graph_of(&dispatch_edges());
        assert_eq!(merge_graphs(full.clone(), CallGraph::new()), full);
        assert_eq!(merge_graphs(full.clone(), full.clone()), full);
        let edges = dispatch_edges();
        let merged = merge_graphs(graph_of(&edges[..1]), graph_of(&edges[1..]));
        assert_eq!(merged.edge_count(), 3);
        assert_eq!(merged, full);
    }

    fn segment() -> impl Strategy<Value = String> {
        "[A-Za-z_][A-Za-z0-9_$]{0,6}"
    }

    fn class_name() -> impl Strategy<Value = ClassName> {
        (
            prop::collection::vec("[a-z][a-z0-9]{0,4}", 0..3),
            prop::collection::vec(segment(), 1..4),
        )
            .prop_map(|(pkg, path)| ClassName::new(pkg.join("."), path))
    }

    fn method_key() -> impl Strategy<Value = MethodKey> {
        (
            class_name(),
            prop_oneof![segment(), Just(CONSTRUCTOR_NAME.to_string())],
            0usize..4,
            any::<bool>(),
        )
            .prop_flat_map(|(class, name, arity, typed)| {
                let types = prop::collection::vec("[A-Za-z][A-Za-z0-9]{0,4}(\\[\\])?", arity);
                (Just(class), Just(name), Just(arity), Just(typed), types)
            })
            .prop_map(|(class, name, arity, typed, types)| {
                let key = MethodKey::new(class, name, arity);
                if typed {
                    key.with_param_types(types)
                } else {
                    key
                }
            })
    }

    fn target_key() -> impl Strategy<Value = TargetKey> {
        (class_name(), method_key()).prop_map(|(dispatch, m)| TargetKey::inherited(dispatch, m))
    }

    proptest! {
        #[test]
        fn method_id_round_trips(k in method_key()) {
            prop_assert_eq!(k.to_string().parse::<MethodKey>().unwrap(), k);
        }

        #[test]
        fn method_id_is_injective(a in method_key(), b in method_key()) {
            prop_assert_eq!(a == b, a.to_string() == b.to_string());
        }

        #[test]
        fn target_id_round_trips_and_is_injective(a in target_key(), b in target_key()) {
            prop_assert_eq!(a.to_string().parse::<TargetKey>().unwrap(), a.clone());
            prop_assert_eq!(a == b, a.to_string() == b.to_string());
        }

        #[test]
        fn container_ids_are_injective(a in class_name(), b in method_key(), r in 0usize..3) {
            let level = ContainerKey::ClassLevel { class: a, region: ClassRegion::ALL[r] };
            let method = ContainerKey::Method(b);
            prop_assert_ne!(level.to_string(), method.to_string());
            prop_assert_eq!(level.to_string().parse::<ContainerKey>().unwrap(), level);
            prop_assert_eq!(method.to_string().parse::<ContainerKey>().unwrap(), method);
        }

        #[test]
        fn edge_insertion_order_is_irrelevant(perm in Just(dispatch_edges()).prop_shuffle(), dup in 0usize..3) {
            let mut edges = perm;
            edges.push(edges[dup].clone());
            prop_assert_eq!(graph_of(&edges), graph_of(&dispatch_edges()));
        }
    }
}
