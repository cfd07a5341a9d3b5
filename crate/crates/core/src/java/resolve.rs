//! Call-site resolution for Java: name-based (NR) and simplified class
//! hierarchy analysis (SCHA), plus the declaration walk SCHA relies on.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::preprocess::{class_path, resolve_alias, PreprocessResult};
use super::syntax::{self, is_anonymous_body, is_type_declaration};
use crate::model::{CallSite, ClassName, MethodKey, ReceiverKind, SiteKind, TargetKey};
use crate::parse::{Forest, SyntaxNode};

pub const NR_NO_NAME_MATCH: &str = "nr-no-name-match";
pub const IMPLICIT_DEFAULT_CONSTRUCTOR: &str = "implicit-default-constructor";
pub const SCHA_COMPLEX_RECEIVER: &str = "scha-complex-receiver";
pub const SCHA_UNKNOWN_ALIAS: &str = "scha-unknown-alias";
pub const SCHA_NO_METHOD_MATCH: &str = "scha-no-method-match";

/// Resolver flags, frozen per run and recorded in output metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResolutionConfig {
    pub nr_use_arity: bool,
    pub scha_expand_subtypes: bool,
    pub scha_qualify_with_imports: bool,
}

impl Default for ResolutionConfig {
    fn default() -> Self {
        ResolutionConfig {
            nr_use_arity: true,
            scha_expand_subtypes: true,
            scha_qualify_with_imports: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Targets(BTreeSet<TargetKey>),
    Unresolved(&'static str),
}

impl Outcome {
    fn or_reason(targets: BTreeSet<TargetKey>, reason: &'static str) -> Outcome {
        if targets.is_empty() {
            Outcome::Unresolved(reason)
        } else {
            Outcome::Targets(targets)
        }
    }

    pub fn targets(&self) -> Vec<TargetKey> {
        match self {
            Outcome::Targets(t) => t.iter().cloned().collect(),
            Outcome::Unresolved(_) => Vec::new(),
        }
    }
}

fn direct<'a>(keys: impl IntoIterator<Item = &'a MethodKey>) -> BTreeSet<TargetKey> {
    keys.into_iter()
        .map(|k| TargetKey::direct(k.clone()))
        .collect()
}

fn constructor_miss(
    alias: &str,
    products: &PreprocessResult,
    otherwise: &'static str,
) -> &'static str {
    let implicit = products
        .class_cache
        .with_alias(alias)
        .iter()
        .filter_map(|c| products.class_cache.get(c))
        .any(|r| !r.declares_constructor());
    if implicit {
        IMPLICIT_DEFAULT_CONSTRUCTOR
    } else {
        otherwise
    }
}

/// Name-based resolution; the receiver is never consulted.
pub fn resolve_nr(
    site: &CallSite,
    products: &PreprocessResult,
    config: &ResolutionConfig,
) -> Outcome {
    match site.kind {
        SiteKind::ObjectCreation => {
            let targets = direct(products.constructors(&site.callee_name, site.arg_count));
            if targets.is_empty() {
                Outcome::Unresolved(constructor_miss(
                    &site.callee_name,
                    products,
                    NR_NO_NAME_MATCH,
                ))
            } else {
                Outcome::Targets(targets)
            }
        }
        SiteKind::MethodInvocation => {
            let keys = if config.nr_use_arity {
                products.methods_matching(&site.callee_name, site.arg_count)
            } else {
                products.methods_named(&site.callee_name)
            };
            Outcome::or_reason(direct(keys), NR_NO_NAME_MATCH)
        }
    }
}

/// Where an identifier was introduced, with its declared type as written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeclarationSite {
    LocalVar(String),
    Param(String),
    Field(String, ClassName),
    NotFound,
}

impl DeclarationSite {
    pub fn type_alias(&self) -> Option<&str> {
        match self {
            DeclarationSite::LocalVar(t)
            | DeclarationSite::Param(t)
            | DeclarationSite::Field(t, _) => Some(t),
            DeclarationSite::NotFound => None,
        }
    }
}

/// Qualified name of a type declaration or anonymous body node.
pub fn class_of(node: SyntaxNode<'_>, products: &PreprocessResult) -> Option<ClassName> {
    let file = node.file_id();
    let path = class_path(node, products.anonymous.get(file)?)?;
    let package = products.import_table(file)?.own_package.clone();
    Some(ClassName::new(package, path))
}

/// Declared type of a local variable declarator; `var x = new T()` yields `T`.
fn declarator_type(decl: SyntaxNode<'_>, declarator: SyntaxNode<'_>) -> String {
    let written = decl
        .child_by_field("type")
        .map(syntax::type_text)
        .unwrap_or_default();
    if written == "var" {
        if let Some(value) = declarator.child_by_field("value") {
            if value.kind() == "object_creation_expression" {
                if let Some(t) = value.child_by_field("type") {
                    return syntax::type_text(t);
                }
            }
        }
    }
    let mut t = written;
    if let Some(dims) = declarator.child_by_field("dimensions") {
        t.push_str(&syntax::normalize_type(dims.text()));
    }
    t
}

fn declares<'a>(decl: SyntaxNode<'a>, name: &str) -> Option<SyntaxNode<'a>> {
    decl.children_by_field("declarator")
        .into_iter()
        .find(|d| d.child_by_field("name").is_some_and(|n| n.text() == name))
}

fn formal_param_type(params: SyntaxNode<'_>, name: &str) -> Option<String> {
    let (types, _) = syntax::formal_parameters(params);
    let named: Vec<_> = params
        .named_children()
        .into_iter()
        .filter(|p| matches!(p.kind(), "formal_parameter" | "spread_parameter"))
        .collect();
    named
        .iter()
        .zip(types)
        .find(|(p, _)| syntax::parameter_name(**p).is_some_and(|n| n.text() == name))
        .map(|(_, t)| t)
}

fn lambda_param(lambda: SyntaxNode<'_>, name: &str) -> Option<String> {
    let params = lambda.child_by_field("parameters")?;
    match params.kind() {
        "identifier" => (params.text() == name).then(|| "var".to_string()),
        "inferred_parameters" => params
            .named_children()
            .iter()
            .any(|p| p.text() == name)
            .then(|| "var".to_string()),
        "formal_parameters" => formal_param_type(params, name),
        _ => None,
    }
}

/// Field `name` in `class` or its alias-matched supertypes, nearest first.
fn field_in_hierarchy(
    class: &ClassName,
    name: &str,
    products: &PreprocessResult,
) -> Option<(String, ClassName)> {
    let cache = &products.class_cache;
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([class.clone()]);
    while let Some(current) = queue.pop_front() {
        if !seen.insert(current.clone()) {
            continue;
        }
        if let Some(t) = cache.get(&current).and_then(|r| r.fields.get(name)) {
            return Some((t.clone(), current));
        }
        queue.extend(cache.direct_supertypes(&current));
    }
    None
}

/// Classes an anonymous body extends or implements, by alias.
fn anonymous_supertypes(body: SyntaxNode<'_>, products: &PreprocessResult) -> Vec<ClassName> {
    let Some(parent) = body.parent() else {
        return Vec::new();
    };
    if parent.kind() == "enum_constant" {
        return parent
            .ancestors()
            .find(is_type_declaration)
            .and_then(|e| class_of(e, products))
            .into_iter()
            .collect();
    }
    parent
        .child_by_field("type")
        .map(|t| {
            products
                .class_cache
                .with_alias(syntax::simple_alias(&syntax::type_text(t)))
                .to_vec()
        })
        .unwrap_or_default()
}

fn anonymous_field(
    body: SyntaxNode<'_>,
    name: &str,
    products: &PreprocessResult,
) -> Option<(String, ClassName)> {
    let class = class_of(body, products)?;
    for member in body.named_children() {
        if member.kind() == "field_declaration" && declares(member, name).is_some() {
            let t = member
                .child_by_field("type")
                .map(syntax::type_text)
                .unwrap_or_default();
            return Some((t, class));
        }
    }
    anonymous_supertypes(body, products)
        .iter()
        .find_map(|s| field_in_hierarchy(s, name, products))
}

/// Walks upwards from `site` to where `name` was introduced: locals declared
/// before the site, then parameters, then fields of each enclosing class
/// (including inherited ones), innermost scope first.
pub fn find_declaration(
    name: &str,
    site: SyntaxNode<'_>,
    products: &PreprocessResult,
) -> DeclarationSite {
    let start = site.start_byte();
    let mut prev = site;
    for scope in site.ancestors() {
        let found = match scope.kind() {
            "block" | "constructor_body" | "switch_block_statement_group" | "switch_block" => scope
                .named_children()
                .into_iter()
                .take_while(|c| c.start_byte() < start)
                .filter(|c| c.kind() == "local_variable_declaration")
                .filter_map(|c| declares(c, name).map(|d| declarator_type(c, d)))
                .last()
                .map(DeclarationSite::LocalVar),
            "for_statement" => scope
                .children_by_field("init")
                .into_iter()
                .filter(|c| c.kind() == "local_variable_declaration")
                .find_map(|c| declares(c, name).map(|d| declarator_type(c, d)))
                .map(DeclarationSite::LocalVar),
            "enhanced_for_statement" => scope
                .child_by_field("name")
                .filter(|n| n.text() == name && Some(prev) == scope.child_by_field("body"))
                .and_then(|_| scope.child_by_field("type"))
                .map(|t| DeclarationSite::LocalVar(syntax::type_text(t))),
            "catch_clause" => scope
                .named_children()
                .into_iter()
                .find(|c| c.kind() == "catch_formal_parameter")
                .filter(|p| p.child_by_field("name").is_some_and(|n| n.text() == name))
                .and_then(|p| {
                    p.named_children()
                        .into_iter()
                        .find(|c| c.kind() == "catch_type")
                })
                .map(|t| {
                    let first = t.named_children().into_iter().next().map(syntax::type_text);
                    DeclarationSite::LocalVar(first.unwrap_or_default())
                }),
            "try_with_resources_statement" => scope
                .child_by_field("resources")
                .into_iter()
                .flat_map(|r| r.named_children())
                .filter(|r| r.kind() == "resource" && r.start_byte() < start)
                .filter(|r| r.child_by_field("name").is_some_and(|n| n.text() == name))
                .filter_map(|r| r.child_by_field("type"))
                .next_back()
                .map(|t| DeclarationSite::LocalVar(syntax::type_text(t))),
            "lambda_expression" => lambda_param(scope, name).map(DeclarationSite::Param),
            "method_declaration" | "constructor_declaration" => scope
                .child_by_field("parameters")
                .and_then(|p| formal_param_type(p, name))
                .map(DeclarationSite::Param),
            "compact_constructor_declaration" => scope
                .ancestors()
                .find(is_type_declaration)
                .and_then(|record| record.child_by_field("parameters"))
                .and_then(|p| formal_param_type(p, name))
                .map(DeclarationSite::Param),
            _ if is_type_declaration(&scope) => class_of(scope, products)
                .and_then(|c| field_in_hierarchy(&c, name, products))
                .map(|(t, owner)| DeclarationSite::Field(t, owner)),
            _ if is_anonymous_body(&scope) => anonymous_field(scope, name, products)
                .map(|(t, owner)| DeclarationSite::Field(t, owner)),
            _ => None,
        };
        if let Some(found) = found {
            return found;
        }
        prev = scope;
    }
    DeclarationSite::NotFound
}

/// Classes a written type may denote.
fn classes_for(
    type_text: &str,
    file: usize,
    products: &PreprocessResult,
    config: &ResolutionConfig,
) -> Vec<ClassName> {
    if config.scha_qualify_with_imports {
        let Some(table) = products.import_table(file) else {
            return Vec::new();
        };
        resolve_alias(type_text, table, &products.package_importables)
            .into_iter()
            .filter(|c| products.class_cache.get(c).is_some())
            .collect()
    } else {
        products
            .class_cache
            .with_alias(syntax::simple_alias(type_text))
            .to_vec()
    }
}

/// For one call shape (`name` with `args` arguments), every class that
/// inherits or declares a matching body, mapped to the declarers at the
/// smallest supertype distance (itself at distance 0).
type NearestDeclarers = HashMap<ClassName, Vec<MethodKey>>;

fn nearest_declarers(name: &str, args: usize, products: &PreprocessResult) -> NearestDeclarers {
    let mut nearest: NearestDeclarers = HashMap::new();
    for key in products.methods_matching(name, args) {
        nearest
            .entry(key.class.clone())
            .or_default()
            .push(key.clone());
    }
    // breadth-first down the subclass edges from all declarers at once
    let mut layer: Vec<ClassName> = nearest.keys().cloned().collect();
    while !layer.is_empty() {
        let mut next: BTreeMap<ClassName, BTreeSet<MethodKey>> = BTreeMap::new();
        for class in &layer {
            let Some(record) = products.class_cache.get(class) else {
                continue;
            };
            for sub in &record.subclasses {
                if !nearest.contains_key(sub) {
                    next.entry(sub.clone())
                        .or_default()
                        .extend(nearest[class].iter().cloned());
                }
            }
        }
        layer = next.keys().cloned().collect();
        nearest.extend(
            next.into_iter()
                .map(|(c, keys)| (c, keys.into_iter().collect())),
        );
    }
    nearest
}

/// Hierarchy queries memoised across the sites of one run: nearest
/// declarers per call shape and transitive subclasses per class.
#[derive(Debug, Default)]
pub struct DispatchCache {
    shapes: Mutex<HashMap<(String, usize), Arc<NearestDeclarers>>>,
    subclasses: Mutex<HashMap<ClassName, Arc<Vec<ClassName>>>>,
}

impl DispatchCache {
    fn subclasses(&self, class: &ClassName, products: &PreprocessResult) -> Arc<Vec<ClassName>> {
        if let Some(found) = self.subclasses.lock().expect("dispatch cache").get(class) {
            return found.clone();
        }
        let computed = Arc::new(
            products
                .class_cache
                .transitive_subclasses(class)
                .into_iter()
                .collect(),
        );
        self.subclasses
            .lock()
            .expect("dispatch cache")
            .entry(class.clone())
            .or_insert(computed)
            .clone()
    }

    fn shape(&self, name: &str, args: usize, products: &PreprocessResult) -> Arc<NearestDeclarers> {
        let key = (name.to_string(), args);
        if let Some(found) = self.shapes.lock().expect("dispatch cache").get(&key) {
            return found.clone();
        }
        let computed = Arc::new(nearest_declarers(name, args, products));
        self.shapes
            .lock()
            .expect("dispatch cache")
            .entry(key)
            .or_insert(computed)
            .clone()
    }
}

fn transitive_supertypes(class: &ClassName, products: &PreprocessResult) -> Vec<ClassName> {
    let mut seen = BTreeSet::from([class.clone()]);
    let mut out = Vec::new();
    let mut queue = VecDeque::from([class.clone()]);
    while let Some(c) = queue.pop_front() {
        for s in products.class_cache.direct_supertypes(&c) {
            if seen.insert(s.clone()) {
                out.push(s.clone());
                queue.push_back(s);
            }
        }
    }
    out
}

fn expand(
    classes: Vec<ClassName>,
    products: &PreprocessResult,
    subtypes: bool,
    cache: &DispatchCache,
) -> Vec<ClassName> {
    if !subtypes {
        return classes;
    }
    let mut seen: HashSet<ClassName> = classes.iter().cloned().collect();
    let mut out = classes.clone();
    for c in &classes {
        for s in cache.subclasses(c, products).iter() {
            if seen.insert(s.clone()) {
                out.push(s.clone());
            }
        }
    }
    out
}

/// Bodies a call on receivers of the `candidates` classes dispatches to.
fn dispatch(
    candidates: &[ClassName],
    site: &CallSite,
    products: &PreprocessResult,
    cache: &DispatchCache,
) -> BTreeSet<TargetKey> {
    let nearest = cache.shape(&site.callee_name, site.arg_count, products);
    let mut out = BTreeSet::new();
    for class in candidates {
        for key in nearest.get(class).into_iter().flatten() {
            out.insert(if key.class == *class {
                TargetKey::direct(key.clone())
            } else {
                TargetKey::inherited(class.clone(), key.clone())
            });
        }
    }
    out
}

/// Candidate receiver classes for an implicit or `this.` call in the type
/// node `scope`: the class, its supertypes and, when expanding, subclasses.
fn self_candidates(
    scope: SyntaxNode<'_>,
    products: &PreprocessResult,
    config: &ResolutionConfig,
    cache: &DispatchCache,
) -> Vec<ClassName> {
    if is_anonymous_body(&scope) {
        let supers = anonymous_supertypes(scope, products);
        let mut out = supers.clone();
        for s in &supers {
            out.extend(transitive_supertypes(s, products));
        }
        return out;
    }
    let Some(class) = class_of(scope, products) else {
        return Vec::new();
    };
    let mut out = expand(
        vec![class.clone()],
        products,
        config.scha_expand_subtypes,
        cache,
    );
    let seen: HashSet<ClassName> = out.iter().cloned().collect();
    out.extend(
        transitive_supertypes(&class, products)
            .into_iter()
            .filter(|s| !seen.contains(s)),
    );
    out
}

/// Simplified CHA: identifier and implicit receivers only.
pub fn resolve_scha(
    site: &CallSite,
    node: SyntaxNode<'_>,
    products: &PreprocessResult,
    config: &ResolutionConfig,
) -> Outcome {
    resolve_scha_cached(site, node, products, config, &DispatchCache::default())
}

pub fn resolve_scha_cached(
    site: &CallSite,
    node: SyntaxNode<'_>,
    products: &PreprocessResult,
    config: &ResolutionConfig,
    cache: &DispatchCache,
) -> Outcome {
    let file = node.file_id();
    if site.kind == SiteKind::ObjectCreation {
        let classes = node
            .child_by_field("type")
            .map(|t| classes_for(&syntax::type_text(t), file, products, config))
            .unwrap_or_default();
        if classes.is_empty() {
            return Outcome::Unresolved(SCHA_UNKNOWN_ALIAS);
        }
        let targets: BTreeSet<TargetKey> = classes
            .iter()
            .flat_map(|c| products.declared_in(c, crate::model::CONSTRUCTOR_NAME, site.arg_count))
            .map(|k| TargetKey::direct(k.clone()))
            .collect();
        if targets.is_empty() {
            return Outcome::Unresolved(constructor_miss(
                &site.callee_name,
                products,
                SCHA_NO_METHOD_MATCH,
            ));
        }
        return Outcome::Targets(targets);
    }
    match &site.receiver {
        ReceiverKind::Identifier(name) => {
            let declaration = find_declaration(name, node, products);
            let candidates = match declaration.type_alias() {
                Some(t) => {
                    let classes = classes_for(t, file, products, config);
                    if classes.is_empty() {
                        return Outcome::Unresolved(SCHA_UNKNOWN_ALIAS);
                    }
                    expand(classes, products, config.scha_expand_subtypes, cache)
                }
                None => {
                    // a class name used as receiver of a static call
                    let classes = classes_for(name, file, products, config);
                    if classes.is_empty() {
                        return Outcome::Unresolved(SCHA_UNKNOWN_ALIAS);
                    }
                    classes
                }
            };
            Outcome::or_reason(
                dispatch(&candidates, site, products, cache),
                SCHA_NO_METHOD_MATCH,
            )
        }
        ReceiverKind::ExplicitThis => {
            let Some(scope) = node
                .ancestors()
                .find(|n| is_type_declaration(n) || is_anonymous_body(n))
            else {
                return Outcome::Unresolved(SCHA_UNKNOWN_ALIAS);
            };
            let candidates = self_candidates(scope, products, config, cache);
            Outcome::or_reason(
                dispatch(&candidates, site, products, cache),
                SCHA_NO_METHOD_MATCH,
            )
        }
        ReceiverKind::Implicit => {
            // innermost class first, then lexically enclosing ones
            for scope in node
                .ancestors()
                .filter(|n| is_type_declaration(n) || is_anonymous_body(n))
            {
                let candidates = self_candidates(scope, products, config, cache);
                let targets = dispatch(&candidates, site, products, cache);
                if !targets.is_empty() {
                    return Outcome::Targets(targets);
                }
            }
            Outcome::Unresolved(SCHA_NO_METHOD_MATCH)
        }
        _ => Outcome::Unresolved(SCHA_COMPLEX_RECEIVER),
    }
}

/// Relocates the invocation or creation node of a call site.
pub fn site_node<'f>(forest: &'f Forest, site: &CallSite) -> Option<SyntaxNode<'f>> {
    let file = forest.file_id(&site.id.file)?;
    forest.node_starting_at(file, site.id.offset, syntax::CALL_KINDS)
}
