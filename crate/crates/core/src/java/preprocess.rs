//! Lookup structures built from a Java forest before generation: the method
//! dictionary, the unique dictionary, package exports and the class cache.
//!
//! Each structure is computed per file and merged; merging sorts the partial
//! products by file so the result does not depend on arrival order.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::syntax::{self, is_anonymous_body, is_type_declaration};
use crate::framework::{NonUniqueKey, PreprocessProducts, UniqueDict};
use crate::model::{ClassName, MethodKey, CONSTRUCTOR_NAME};
use crate::parse::{descendants_of_kind, FileId, Forest, NodeRef, SyntaxNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Class,
    Interface,
    Enum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub qualified_name: ClassName,
    pub alias: String,
    pub kind: ClassKind,
    /// `extends`/`implements` names as written, type arguments stripped.
    pub supertype_aliases: Vec<String>,
    /// Field name to declared type, as written.
    pub fields: BTreeMap<String, String>,
    /// Every declared method and constructor, with or without a body.
    pub method_sigs: BTreeSet<(String, usize)>,
    /// Direct subclasses, matched by alias.
    pub subclasses: BTreeSet<ClassName>,
    pub is_abstract: bool,
    pub declaration: NodeRef,
}

impl ClassRecord {
    pub fn declares_constructor(&self) -> bool {
        self.method_sigs
            .iter()
            .any(|(name, _)| name == CONSTRUCTOR_NAME)
    }
}

/// Class records keyed by qualified name, with an alias index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    from = "BTreeMap<ClassName, ClassRecord>",
    into = "BTreeMap<ClassName, ClassRecord>"
)]
pub struct ClassCache {
    records: BTreeMap<ClassName, ClassRecord>,
    by_alias: BTreeMap<String, Vec<ClassName>>,
}

impl From<BTreeMap<ClassName, ClassRecord>> for ClassCache {
    fn from(records: BTreeMap<ClassName, ClassRecord>) -> Self {
        let mut by_alias: BTreeMap<String, Vec<ClassName>> = BTreeMap::new();
        for name in records.keys() {
            by_alias
                .entry(name.alias().to_string())
                .or_default()
                .push(name.clone());
        }
        ClassCache { records, by_alias }
    }
}

impl From<ClassCache> for BTreeMap<ClassName, ClassRecord> {
    fn from(cache: ClassCache) -> Self {
        cache.records
    }
}

impl ClassCache {
    /// Builds the cache and links subclasses by inverting alias-matched
    /// supertype declarations.
    pub fn link(records: BTreeMap<ClassName, ClassRecord>) -> ClassCache {
        let mut cache = ClassCache::from(records);
        let mut links: Vec<(ClassName, ClassName)> = Vec::new();
        for record in cache.records.values() {
            for sup in &record.supertype_aliases {
                for parent in cache.with_alias(syntax::simple_alias(sup)) {
                    if *parent != record.qualified_name {
                        links.push((parent.clone(), record.qualified_name.clone()));
                    }
                }
            }
        }
        for (parent, child) in links {
            if let Some(r) = cache.records.get_mut(&parent) {
                r.subclasses.insert(child);
            }
        }
        cache
    }

    pub fn get(&self, name: &ClassName) -> Option<&ClassRecord> {
        self.records.get(name)
    }

    pub fn with_alias(&self, alias: &str) -> &[ClassName] {
        self.by_alias
            .get(alias)
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ClassName, &ClassRecord)> {
        self.records.iter()
    }

    /// All transitive subclasses, excluding `name` itself. Cycles (possible
    /// through alias collisions) are cut.
    pub fn transitive_subclasses(&self, name: &ClassName) -> BTreeSet<ClassName> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&ClassName> = VecDeque::from([name]);
        while let Some(current) = queue.pop_front() {
            if let Some(record) = self.records.get(current) {
                for sub in &record.subclasses {
                    if sub != name && seen.insert(sub.clone()) {
                        queue.push_back(sub);
                    }
                }
            }
        }
        seen
    }

    /// Alias-matched records of the direct supertypes of `name`.
    pub fn direct_supertypes(&self, name: &ClassName) -> Vec<ClassName> {
        let Some(record) = self.records.get(name) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for sup in &record.supertype_aliases {
            for candidate in self.with_alias(syntax::simple_alias(sup)) {
                if candidate != name && !out.contains(candidate) {
                    out.push(candidate.clone());
                }
            }
        }
        out
    }
}

/// Package name to exported simple (possibly nested, dotted) names.
pub type PackageImportables = BTreeMap<String, BTreeMap<String, ClassName>>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportTable {
    pub own_package: String,
    /// Alias to dotted qualified name, e.g. `List -> java.util.List`.
    pub explicit: BTreeMap<String, String>,
    pub wildcard_packages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodEntry {
    pub body: NodeRef,
    pub param_types: Vec<String>,
    pub varargs: bool,
}

impl MethodEntry {
    /// Whether a call with `args` arguments may bind to a method of `arity`.
    pub fn accepts(&self, arity: usize, args: usize) -> bool {
        arity == args || (self.varargs && args + 1 >= arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreprocessWarning {
    /// Several bodies share a name and arity in one class. Distinct parameter
    /// types keep them apart; identical ones collapse and the last wins.
    DuplicateKey {
        key: MethodKey,
        count: usize,
    },
    DuplicateClass {
        class: ClassName,
    },
}

impl fmt::Display for PreprocessWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreprocessWarning::DuplicateKey { key, count } => {
                write!(f, "duplicate key {key} ({count} declarations)")
            }
            PreprocessWarning::DuplicateClass { class } => write!(f, "duplicate class {class}"),
        }
    }
}

/// Everything the Java generators need, frozen before generation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessResult {
    pub files: Vec<String>,
    pub method_dict: BTreeMap<MethodKey, MethodEntry>,
    pub unique_dict: UniqueDict,
    pub package_importables: PackageImportables,
    pub class_cache: ClassCache,
    /// Per file, indexed like `files`.
    pub import_tables: Vec<ImportTable>,
    /// Per file, start bytes of anonymous class bodies in document order;
    /// body `i` is named `anon$<i+1>`.
    pub anonymous: Vec<Vec<usize>>,
    pub warnings: Vec<PreprocessWarning>,
}

impl PreprocessProducts for PreprocessResult {
    type Body = MethodEntry;

    fn method_dict(&self) -> &BTreeMap<MethodKey, MethodEntry> {
        &self.method_dict
    }

    fn unique_dict(&self) -> &UniqueDict {
        &self.unique_dict
    }
}

impl PreprocessResult {
    fn keys_in_range<'a>(
        &'a self,
        lo: NonUniqueKey,
        hi: NonUniqueKey,
    ) -> impl Iterator<Item = &'a MethodKey> + 'a {
        self.unique_dict
            .range(lo..=hi)
            .flat_map(|(_, set)| set.iter())
    }

    fn accepting<'a>(
        &'a self,
        keys: impl Iterator<Item = &'a MethodKey> + 'a,
        args: usize,
    ) -> impl Iterator<Item = &'a MethodKey> + 'a {
        keys.filter(move |k| {
            self.method_dict
                .get(*k)
                .is_some_and(|e| e.accepts(k.arity, args))
        })
    }

    /// Methods named `name` callable with `args` arguments (varargs aware).
    pub fn methods_matching(&self, name: &str, args: usize) -> Vec<&MethodKey> {
        let lo = NonUniqueKey::NameArity(name.to_string(), 0);
        let hi = NonUniqueKey::NameArity(name.to_string(), usize::MAX);
        self.accepting(self.keys_in_range(lo, hi), args).collect()
    }

    /// Methods named `name` of any arity.
    pub fn methods_named(&self, name: &str) -> Vec<&MethodKey> {
        let lo = NonUniqueKey::NameArity(name.to_string(), 0);
        let hi = NonUniqueKey::NameArity(name.to_string(), usize::MAX);
        self.keys_in_range(lo, hi).collect()
    }

    /// Bodies declared directly in `class` that a call `name(args...)` may bind to.
    pub fn declared_in(&self, class: &ClassName, name: &str, args: usize) -> Vec<&MethodKey> {
        let alias = class.alias().to_string();
        let lo = NonUniqueKey::AliasNameArity(alias.clone(), name.to_string(), 0);
        let hi = NonUniqueKey::AliasNameArity(alias, name.to_string(), usize::MAX);
        self.accepting(self.keys_in_range(lo, hi), args)
            .filter(|k| k.class == *class)
            .collect()
    }

    /// Constructors of classes whose alias is `alias`, callable with `args`.
    pub fn constructors(&self, alias: &str, args: usize) -> Vec<&MethodKey> {
        let lo = NonUniqueKey::AliasNameArity(alias.to_string(), CONSTRUCTOR_NAME.to_string(), 0);
        let hi = NonUniqueKey::AliasNameArity(
            alias.to_string(),
            CONSTRUCTOR_NAME.to_string(),
            usize::MAX,
        );
        self.accepting(self.keys_in_range(lo, hi), args).collect()
    }

    pub fn import_table(&self, file: FileId) -> Option<&ImportTable> {
        self.import_tables.get(file)
    }

    /// Synthetic alias of the anonymous class whose body starts at `start`.
    pub fn anonymous_alias(&self, file: FileId, start: usize) -> Option<String> {
        let bodies = self.anonymous.get(file)?;
        bodies
            .binary_search(&start)
            .ok()
            .map(|i| format!("anon${}", i + 1))
    }
}

// ---------------------------------------------------------------------------
// Per-file extraction
// ---------------------------------------------------------------------------

pub fn package_of(root: SyntaxNode<'_>) -> String {
    root.named_children()
        .into_iter()
        .find(|c| c.kind() == "package_declaration")
        .and_then(|p| {
            p.named_children()
                .into_iter()
                .find(|c| matches!(c.kind(), "scoped_identifier" | "identifier"))
        })
        .map(syntax::dotted)
        .unwrap_or_default()
}

pub fn build_import_table(root: SyntaxNode<'_>) -> ImportTable {
    let mut table = ImportTable {
        own_package: package_of(root),
        ..ImportTable::default()
    };
    for decl in root.named_children() {
        if decl.kind() != "import_declaration" {
            continue;
        }
        let tokens = decl.children();
        if tokens.iter().any(|t| t.kind() == "static") {
            continue;
        }
        let Some(path) = tokens
            .iter()
            .find(|t| matches!(t.kind(), "scoped_identifier" | "identifier"))
            .map(|p| syntax::dotted(*p))
        else {
            continue;
        };
        if tokens.iter().any(|t| t.kind() == "asterisk") {
            if !table.wildcard_packages.contains(&path) {
                table.wildcard_packages.push(path);
            }
        } else {
            let alias = path.rsplit('.').next().unwrap_or(&path).to_string();
            table.explicit.entry(alias).or_insert(path);
        }
    }
    table
}

/// Start bytes of anonymous class bodies, in document order.
pub fn anonymous_bodies(root: SyntaxNode<'_>) -> Vec<usize> {
    descendants_of_kind(root, &["class_body"])
        .into_iter()
        .filter(is_anonymous_body)
        .map(|b| b.start_byte())
        .collect()
}

/// Class path of a type declaration or anonymous body, outermost first.
pub fn class_path(node: SyntaxNode<'_>, anonymous: &[usize]) -> Option<Vec<String>> {
    let mut parts = Vec::new();
    for n in std::iter::once(node).chain(node.ancestors()) {
        if is_type_declaration(&n) {
            parts.push(n.child_by_field("name")?.text().to_string());
        } else if is_anonymous_body(&n) {
            let i = anonymous.binary_search(&n.start_byte()).ok()?;
            parts.push(format!("anon${}", i + 1));
        }
    }
    if parts.is_empty() {
        return None;
    }
    parts.reverse();
    Some(parts)
}

/// Innermost enclosing type declaration or anonymous body (excluding `node`).
pub fn enclosing_class_node<'a>(node: SyntaxNode<'a>) -> Option<SyntaxNode<'a>> {
    node.ancestors()
        .find(|n| is_type_declaration(n) || is_anonymous_body(n))
}

fn is_member_container(kind: &str) -> bool {
    matches!(
        kind,
        "class_body"
            | "interface_body"
            | "enum_body"
            | "enum_body_declarations"
            | "annotation_type_body"
    )
}

/// Declared at top level or as a member of another exported type.
fn is_exported(decl: SyntaxNode<'_>) -> bool {
    decl.ancestors().all(|a| {
        a.kind() == "program"
            || (is_member_container(a.kind()) && !is_anonymous_body(&a))
            || is_type_declaration(&a)
    })
}

/// Method and constructor bodies owned by named classes.
fn method_declarations(
    root: SyntaxNode<'_>,
    package: &str,
    anonymous: &[usize],
) -> Vec<(MethodKey, MethodEntry)> {
    let mut out = Vec::new();
    for decl in descendants_of_kind(root, syntax::CALLABLE_DECLARATIONS) {
        let Some(owner) = enclosing_class_node(decl) else {
            continue;
        };
        if !is_type_declaration(&owner) {
            continue;
        }
        let Some(path) = class_path(owner, anonymous) else {
            continue;
        };
        let Some(body) = decl.child_by_field("body") else {
            continue;
        };
        let Some((name, types, varargs)) = signature(decl, owner) else {
            continue;
        };
        let key = MethodKey::new(ClassName::new(package, path), name, types.len());
        out.push((
            key,
            MethodEntry {
                body: body.node_ref(),
                param_types: types,
                varargs,
            },
        ));
    }
    out
}

fn signature(decl: SyntaxNode<'_>, owner: SyntaxNode<'_>) -> Option<(String, Vec<String>, bool)> {
    match decl.kind() {
        "method_declaration" => {
            let name = decl.child_by_field("name")?.text().to_string();
            let (types, varargs) = decl
                .child_by_field("parameters")
                .map(syntax::formal_parameters)
                .unwrap_or_default();
            Some((name, types, varargs))
        }
        "constructor_declaration" => {
            let (types, varargs) = decl
                .child_by_field("parameters")
                .map(syntax::formal_parameters)
                .unwrap_or_default();
            Some((CONSTRUCTOR_NAME.to_string(), types, varargs))
        }
        "compact_constructor_declaration" => {
            let (types, varargs) = owner
                .child_by_field("parameters")
                .map(syntax::formal_parameters)
                .unwrap_or_default();
            Some((CONSTRUCTOR_NAME.to_string(), types, varargs))
        }
        _ => None,
    }
}

fn class_records(root: SyntaxNode<'_>, package: &str, anonymous: &[usize]) -> Vec<ClassRecord> {
    descendants_of_kind(root, syntax::TYPE_DECLARATIONS)
        .into_iter()
        .filter_map(|decl| class_record(decl, package, anonymous))
        .collect()
}

fn class_record(decl: SyntaxNode<'_>, package: &str, anonymous: &[usize]) -> Option<ClassRecord> {
    let path = class_path(decl, anonymous)?;
    let qualified_name = ClassName::new(package, path);
    let alias = qualified_name.alias().to_string();
    let kind = match decl.kind() {
        "interface_declaration" | "annotation_type_declaration" => ClassKind::Interface,
        "enum_declaration" => ClassKind::Enum,
        _ => ClassKind::Class,
    };
    let mut fields = BTreeMap::new();
    let mut method_sigs = BTreeSet::new();
    if let Some(params) = decl.child_by_field("parameters") {
        // record components
        for p in params.named_children() {
            if let (Some(name), Some(t)) = (syntax::parameter_name(p), p.child_by_field("type")) {
                fields.insert(name.text().to_string(), syntax::type_text(t));
            }
        }
    }
    if let Some(body) = decl.child_by_field("body") {
        let mut members = body.named_children();
        if let Some(decls) = members
            .iter()
            .position(|m| m.kind() == "enum_body_declarations")
        {
            let extra = members.remove(decls).named_children();
            members.extend(extra);
        }
        for member in members {
            match member.kind() {
                "field_declaration" | "constant_declaration" => {
                    let t = member
                        .child_by_field("type")
                        .map(syntax::type_text)
                        .unwrap_or_default();
                    for d in member.children_by_field("declarator") {
                        if let Some(name) = d.child_by_field("name") {
                            let mut ty = t.clone();
                            if let Some(dims) = d.child_by_field("dimensions") {
                                ty.push_str(&syntax::normalize_type(dims.text()));
                            }
                            fields.insert(name.text().to_string(), ty);
                        }
                    }
                }
                "enum_constant" => {
                    if let Some(name) = member.child_by_field("name") {
                        fields.insert(name.text().to_string(), alias.clone());
                    }
                }
                "method_declaration"
                | "constructor_declaration"
                | "compact_constructor_declaration" => {
                    if let Some((name, types, _)) = signature(member, decl) {
                        method_sigs.insert((name, types.len()));
                    }
                }
                _ => {}
            }
        }
    }
    Some(ClassRecord {
        alias,
        kind,
        supertype_aliases: syntax::supertypes(decl),
        fields,
        method_sigs,
        subclasses: BTreeSet::new(),
        is_abstract: kind == ClassKind::Interface || syntax::has_modifier(decl, "abstract"),
        declaration: decl.node_ref(),
        qualified_name,
    })
}

fn exported_types(root: SyntaxNode<'_>, package: &str, anonymous: &[usize]) -> Vec<ClassName> {
    descendants_of_kind(root, syntax::TYPE_DECLARATIONS)
        .into_iter()
        .filter(|d| is_exported(*d))
        .filter_map(|d| class_path(d, anonymous).map(|p| ClassName::new(package, p)))
        .collect()
}

/// Preprocessing products of a single file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileProducts {
    pub file: FileId,
    pub path: String,
    pub imports: ImportTable,
    pub methods: Vec<(MethodKey, MethodEntry)>,
    pub classes: Vec<ClassRecord>,
    pub exports: Vec<ClassName>,
    pub anonymous: Vec<usize>,
}

pub fn preprocess_file(forest: &Forest, file: FileId) -> FileProducts {
    let root = forest.root(file);
    let imports = build_import_table(root);
    let anonymous = anonymous_bodies(root);
    let package = imports.own_package.clone();
    FileProducts {
        file,
        path: forest.file(file).source.path.clone(),
        methods: method_declarations(root, &package, &anonymous),
        classes: class_records(root, &package, &anonymous),
        exports: exported_types(root, &package, &anonymous),
        imports,
        anonymous,
    }
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

/// Inserts declarations in order. Same-arity overloads get their parameter
/// types added to the key; exact duplicates are overwritten by the later one.
fn insert_methods(
    decls: impl IntoIterator<Item = (MethodKey, MethodEntry)>,
    warnings: &mut Vec<PreprocessWarning>,
) -> BTreeMap<MethodKey, MethodEntry> {
    let mut groups: BTreeMap<MethodKey, Vec<MethodEntry>> = BTreeMap::new();
    for (key, entry) in decls {
        groups.entry(key).or_default().push(entry);
    }
    let mut dict = BTreeMap::new();
    for (base, entries) in groups {
        if entries.len() == 1 {
            dict.insert(base, entries.into_iter().next().expect("one entry"));
            continue;
        }
        warnings.push(PreprocessWarning::DuplicateKey {
            key: base.clone(),
            count: entries.len(),
        });
        let first = &entries[0].param_types;
        if entries.iter().all(|e| e.param_types == *first) {
            dict.insert(base, entries.into_iter().last().expect("entries"));
            continue;
        }
        for entry in entries {
            let key = base.clone().with_param_types(entry.param_types.clone());
            dict.insert(key, entry);
        }
    }
    dict
}

pub fn build_unique_dict(method_dict: &BTreeMap<MethodKey, MethodEntry>) -> UniqueDict {
    let mut dict = UniqueDict::new();
    for key in method_dict.keys() {
        dict.entry(NonUniqueKey::NameArity(key.name.clone(), key.arity))
            .or_default()
            .insert(key.clone());
        dict.entry(NonUniqueKey::AliasNameArity(
            key.class.alias().to_string(),
            key.name.clone(),
            key.arity,
        ))
        .or_default()
        .insert(key.clone());
    }
    dict
}

fn insert_classes(
    records: impl IntoIterator<Item = ClassRecord>,
    warnings: &mut Vec<PreprocessWarning>,
) -> ClassCache {
    let mut map = BTreeMap::new();
    for record in records {
        let name = record.qualified_name.clone();
        if map.insert(name.clone(), record).is_some() {
            warnings.push(PreprocessWarning::DuplicateClass { class: name });
        }
    }
    ClassCache::link(map)
}

fn insert_exports(names: impl IntoIterator<Item = ClassName>) -> PackageImportables {
    let mut out = PackageImportables::new();
    for name in names {
        out.entry(name.package.clone())
            .or_default()
            .insert(name.nested_name(), name);
    }
    out
}

/// Merges per-file products into one result.
pub fn merge_products(mut parts: Vec<FileProducts>) -> PreprocessResult {
    parts.sort_by_key(|p| p.file);
    let mut warnings = Vec::new();
    let mut files = Vec::with_capacity(parts.len());
    let mut import_tables = Vec::with_capacity(parts.len());
    let mut anonymous = Vec::with_capacity(parts.len());
    let mut methods = Vec::new();
    let mut classes = Vec::new();
    let mut exports = Vec::new();
    for part in parts {
        files.push(part.path);
        import_tables.push(part.imports);
        anonymous.push(part.anonymous);
        methods.extend(part.methods);
        classes.extend(part.classes);
        exports.extend(part.exports);
    }
    let method_dict = insert_methods(methods, &mut warnings);
    let class_cache = insert_classes(classes, &mut warnings);
    PreprocessResult {
        files,
        unique_dict: build_unique_dict(&method_dict),
        method_dict,
        package_importables: insert_exports(exports),
        class_cache,
        import_tables,
        anonymous,
        warnings,
    }
}

/// Per-file preprocessing on the current rayon pool, then merge.
pub fn preprocess(forest: &Forest) -> PreprocessResult {
    let parts: Vec<FileProducts> = (0..forest.len())
        .into_par_iter()
        .map(|file| preprocess_file(forest, file))
        .collect();
    merge_products(parts)
}

/// Whole-forest builders, one structure at a time.
pub fn build_method_dict(
    forest: &Forest,
) -> (BTreeMap<MethodKey, MethodEntry>, Vec<PreprocessWarning>) {
    let mut warnings = Vec::new();
    let decls = forest.roots().flat_map(|root| {
        let package = package_of(root);
        let anonymous = anonymous_bodies(root);
        method_declarations(root, &package, &anonymous)
    });
    let dict = insert_methods(decls.collect::<Vec<_>>(), &mut warnings);
    (dict, warnings)
}

pub fn build_package_importables(forest: &Forest) -> PackageImportables {
    insert_exports(forest.roots().flat_map(|root| {
        let package = package_of(root);
        exported_types(root, &package, &anonymous_bodies(root))
    }))
}

pub fn build_class_cache(forest: &Forest) -> (ClassCache, Vec<PreprocessWarning>) {
    let mut warnings = Vec::new();
    let records: Vec<ClassRecord> = forest
        .roots()
        .flat_map(|root| {
            let package = package_of(root);
            class_records(root, &package, &anonymous_bodies(root))
        })
        .collect();
    let cache = insert_classes(records, &mut warnings);
    (cache, warnings)
}

/// Sequential whole-forest preprocessing using the individual builders.
pub fn preprocess_whole(forest: &Forest) -> PreprocessResult {
    let (method_dict, mut warnings) = build_method_dict(forest);
    let (class_cache, class_warnings) = build_class_cache(forest);
    warnings.extend(class_warnings);
    PreprocessResult {
        files: forest
            .files()
            .iter()
            .map(|f| f.source.path.clone())
            .collect(),
        unique_dict: build_unique_dict(&method_dict),
        method_dict,
        package_importables: build_package_importables(forest),
        class_cache,
        import_tables: forest.roots().map(build_import_table).collect(),
        anonymous: forest.roots().map(anonymous_bodies).collect(),
        warnings,
    }
}

/// Qualified names an alias may denote in `file`'s scope: an explicit import
/// shadows same-package types, which shadow wildcard imports. Returns nothing
/// for library types.
pub fn resolve_alias(
    alias: &str,
    table: &ImportTable,
    exports: &PackageImportables,
) -> Vec<ClassName> {
    let alias = alias.trim_end_matches("[]").trim_end_matches("...");
    let (head, rest) = match alias.split_once('.') {
        Some((h, r)) => (h, Some(r)),
        None => (alias, None),
    };
    if let Some(imported) = table.explicit.get(head) {
        let full = match rest {
            Some(r) => format!("{imported}.{r}"),
            None => imported.clone(),
        };
        return lookup_qualified(&full, exports).into_iter().collect();
    }
    if let Some(found) = exports.get(&table.own_package).and_then(|p| p.get(alias)) {
        return vec![found.clone()];
    }
    let mut out: Vec<ClassName> = Vec::new();
    for package in &table.wildcard_packages {
        let hit = exports
            .get(package)
            .and_then(|p| p.get(alias).cloned())
            .or_else(|| lookup_qualified(&format!("{package}.{alias}"), exports));
        if let Some(hit) = hit {
            if !out.contains(&hit) {
                out.push(hit);
            }
        }
    }
    if out.is_empty() && rest.is_some() {
        out.extend(lookup_qualified(alias, exports));
    }
    out
}

/// Looks up a dotted name, trying every split between package and class path.
fn lookup_qualified(dotted: &str, exports: &PackageImportables) -> Option<ClassName> {
    let segments: Vec<&str> = dotted.split('.').collect();
    (0..segments.len()).rev().find_map(|split| {
        let package = segments[..split].join(".");
        let name = segments[split..].join(".");
        exports.get(&package).and_then(|p| p.get(&name)).cloned()
    })
}

/// Number of bodies per class, used for diagnostics.
pub fn methods_per_class(result: &PreprocessResult) -> HashMap<ClassName, usize> {
    let mut out = HashMap::new();
    for key in result.method_dict.keys() {
        *out.entry(key.class.clone()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::parse::{load_grammar, SourceFile};

    fn forest(files: &[(&str, &str)]) -> Forest {
        let grammar = load_grammar("java").unwrap();
        Forest::from_sources(
            &grammar,
            files
                .iter()
                .map(|(p, c)| SourceFile::java(*p, *c))
                .collect(),
        )
        .unwrap()
    }

    fn ids<'a>(keys: impl IntoIterator<Item = &'a MethodKey>) -> Vec<String> {
        keys.into_iter().map(|k| k.to_string()).collect()
    }

    fn class(s: &str) -> ClassName {
        s.parse().unwrap()
    }

    #[test]
    fn basic_method_dict() {
        let r = preprocess(&forest(&[("Foo.java", fixtures::BASIC)]));
        assert_eq!(ids(r.method_dict.keys()), ["Bar#bar/0", "Foo#method1/1"]);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn dispatch_method_dict_and_hierarchy() {
        let r = preprocess(&forest(&[("Bar.java", fixtures::DISPATCH)]));
        assert_eq!(ids(r.method_dict.keys()), ["A#method/0", "Bar#foo/1"]);
        let cache = &r.class_cache;
        assert_eq!(
            cache.get(&class("A")).unwrap().subclasses,
            BTreeSet::from([class("B")])
        );
        assert_eq!(
            cache.get(&class("B")).unwrap().subclasses,
            BTreeSet::from([class("C")])
        );
        assert_eq!(
            cache.transitive_subclasses(&class("A")),
            BTreeSet::from([class("B"), class("C")])
        );
        assert!(cache.get(&class("Bar")).unwrap().subclasses.is_empty());
        let a =
            r.unique_dict[&NonUniqueKey::AliasNameArity("A".into(), "method".into(), 0)].clone();
        assert_eq!(ids(&a), ["A#method/0"]);
    }

    #[test]
    fn overloads_overloads() {
        let r = preprocess(&forest(&[("Bar.java", fixtures::OVERLOADS)]));
        assert_eq!(
            ids(r.method_dict.keys()),
            ["Bar#add/2(float,float)", "Bar#add/2(int,int)", "Bar#foo/2"]
        );
        assert_eq!(
            r.warnings,
            vec![PreprocessWarning::DuplicateKey {
                key: "Bar#add/2".parse().unwrap(),
                count: 2
            }]
        );
        let adds = &r.unique_dict[&NonUniqueKey::NameArity("add".into(), 2)];
        assert_eq!(adds.len(), 2);
        assert_eq!(r.import_tables[0].wildcard_packages, ["java.util"]);
    }

    #[test]
    fn identical_duplicates_collapse_to_last() {
        let r = preprocess(&forest(&[
            ("a/U.java", "class U { void f() { a(); } }"),
            ("b/U.java", "class U { void f() { b(); } }"),
        ]));
        assert_eq!(ids(r.method_dict.keys()), ["U#f/0"]);
        assert_eq!(r.method_dict.values().next().unwrap().body.file, 1);
        assert!(r
            .warnings
            .contains(&PreprocessWarning::DuplicateClass { class: class("U") }));
    }

    #[test]
    fn empty_method_dict_gives_empty_unique_dict() {
        assert!(build_unique_dict(&BTreeMap::new()).is_empty());
    }

    #[test]
    fn package_exports() {
        let r = preprocess(&forest(&[("Foo.java", fixtures::BASIC)]));
        let default = &r.package_importables[""];
        assert_eq!(default.keys().collect::<Vec<_>>(), ["Bar", "Foo"]);

        let r = preprocess(&forest(&[("p/X.java", "package p; class X {}")]));
        assert_eq!(r.package_importables["p"]["X"], class("p:X"));

        let r = preprocess(&forest(&[(
            "p/O.java",
            "package p; class O { class I {} void m() { class Local {} new Object() { class Anon {} }; } }",
        )]));
        assert_eq!(
            r.package_importables["p"].keys().collect::<Vec<_>>(),
            ["O", "O.I"]
        );
        assert!(r.class_cache.get(&class("p:O.Local")).is_some());
        assert!(r.class_cache.get(&class("p:O.anon$1.Anon")).is_some());
    }

    #[test]
    fn interface_diamond() {
        let r = preprocess(&forest(&[(
            "D.java",
            "interface I { void m(); }\nclass X implements I { public void m() {} }\nclass Y implements I { public void m() {} }",
        )]));
        let i = r.class_cache.get(&class("I")).unwrap();
        assert_eq!(i.subclasses, BTreeSet::from([class("X"), class("Y")]));
        assert_eq!(i.kind, ClassKind::Interface);
        assert!(i.method_sigs.contains(&("m".to_string(), 0)));
        assert!(!r.method_dict.contains_key(&"I#m/0".parse().unwrap()));
    }

    #[test]
    fn class_record_contents() {
        let src = "package q;\nimport java.util.List;\npublic abstract class K<T> extends Base<T> implements Runnable, java.io.Closeable {\n  private List<String> names, other[];\n  static int COUNT = 0;\n  K(int a) {}\n  K(String... xs) {}\n  abstract void todo();\n  default void nope() {}\n  public void run() {}\n}\nenum Color { RED, GREEN { void f() {} }; void g() {} }\nrecord P(int x, Color c) { P { } }";
        let r = preprocess(&forest(&[("q/K.java", src)]));
        let k = r.class_cache.get(&class("q:K")).unwrap();
        assert!(k.is_abstract);
        assert_eq!(
            k.supertype_aliases,
            ["Base", "Runnable", "java.io.Closeable"]
        );
        assert_eq!(k.fields["names"], "List");
        assert_eq!(k.fields["other"], "List[]");
        assert_eq!(k.fields["COUNT"], "int");
        assert!(k.declares_constructor());
        assert!(k.method_sigs.contains(&("todo".to_string(), 0)));
        let ctor_ids = ids(r.method_dict.keys().filter(|k| k.is_constructor()));
        assert_eq!(
            ctor_ids,
            [
                "q:K#<init>/1(String...)",
                "q:K#<init>/1(int)",
                "q:P#<init>/2"
            ]
        );
        let varargs = r
            .method_dict
            .iter()
            .find(|(k, _)| k.to_string().contains("String..."))
            .unwrap()
            .1;
        assert!(varargs.varargs && varargs.accepts(1, 0) && varargs.accepts(1, 5));

        let color = r.class_cache.get(&class("q:Color")).unwrap();
        assert_eq!(color.kind, ClassKind::Enum);
        assert_eq!(color.fields["RED"], "Color");
        assert!(r.method_dict.contains_key(&"q:Color#g/0".parse().unwrap()));
        assert!(!r.method_dict.keys().any(|k| k.name == "f"));
        assert_eq!(r.anonymous[0].len(), 1);
        let p = r.class_cache.get(&class("q:P")).unwrap();
        assert_eq!(p.fields["c"], "Color");
    }

    #[test]
    fn import_tables() {
        let f = forest(&[
            ("A.java", "package a.b;\nimport java.util.*;\nimport p.X;\nimport static java.lang.Math.max;\nclass A {}"),
            ("B.java", "class B {}"),
        ]);
        let t = build_import_table(f.root(0));
        assert_eq!(t.own_package, "a.b");
        assert_eq!(t.wildcard_packages, ["java.util"]);
        assert_eq!(t.explicit.len(), 1);
        assert_eq!(t.explicit["X"], "p.X");
        let t = build_import_table(f.root(1));
        assert_eq!(t, ImportTable::default());
    }

    #[test]
    fn alias_resolution_order() {
        let f = forest(&[
            ("p/X.java", "package p; public class X {}"),
            ("q/X.java", "package q; class X {} class Own {}"),
            (
                "q/Y.java",
                "package q; import p.X; import java.util.*; class Y { X x; List l; Own o; }",
            ),
            (
                "u1/Util.java",
                "package u1; public class Util { public static class In {} }",
            ),
            ("u2/Util.java", "package u2; public class Util {}"),
            (
                "w/W.java",
                "package w; import u2.*; import u1.*; class W {}",
            ),
        ]);
        let r = preprocess(&f);
        let y = &r.import_tables[f.file_id("q/Y.java").unwrap()];
        assert_eq!(
            resolve_alias("X", y, &r.package_importables),
            vec![class("p:X")]
        );
        assert_eq!(
            resolve_alias("Own", y, &r.package_importables),
            vec![class("q:Own")]
        );
        assert!(resolve_alias("List", y, &r.package_importables).is_empty());
        let w = &r.import_tables[f.file_id("w/W.java").unwrap()];
        assert_eq!(
            resolve_alias("Util", w, &r.package_importables),
            vec![class("u2:Util"), class("u1:Util")]
        );
        assert_eq!(
            resolve_alias("Util.In", w, &r.package_importables),
            vec![class("u1:Util.In")]
        );
        assert_eq!(
            resolve_alias("u2.Util", y, &r.package_importables),
            vec![class("u2:Util")]
        );
    }

    #[test]
    fn per_file_merge_matches_whole_forest() {
        let f = forest(&[
            ("Foo.java", fixtures::BASIC),
            ("Bar.java", fixtures::OVERLOADS),
            (
                "x/Y.java",
                "package x; class Y extends Foo { void m() { new Foo(); } }",
            ),
        ]);
        let whole = preprocess_whole(&f);
        assert_eq!(preprocess(&f), whole);
        let mut parts: Vec<_> = (0..f.len()).map(|i| preprocess_file(&f, i)).collect();
        parts.reverse();
        assert_eq!(merge_products(parts), whole);
        assert!(crate::framework::check_products(&whole).is_ok());
    }

    #[test]
    fn cache_serialization_round_trips() {
        let f = forest(&[("Bar.java", fixtures::OVERLOADS), ("Foo.java", fixtures::DISPATCH)]);
        let r = preprocess(&f);
        let text = serde_json::to_string(&r).unwrap();
        let back: PreprocessResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(
            back.class_cache.with_alias("A"),
            r.class_cache.with_alias("A")
        );
    }

    #[test]
    fn alias_cycles_terminate() {
        let r = preprocess(&forest(&[
            ("a/N.java", "package a; class N extends M {}"),
            ("b/M.java", "package b; class M extends N {}"),
        ]));
        let subs = r.class_cache.transitive_subclasses(&class("a:N"));
        assert_eq!(subs, BTreeSet::from([class("b:M")]));
    }
}
