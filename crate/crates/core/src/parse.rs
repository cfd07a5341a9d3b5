//! Grammar loading, source parsing and a uniform view over syntax nodes.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tree_sitter::{Node, Parser, Tree};
use walkdir::WalkDir;

use crate::error::{Error, Result};

/// Version of the bundled Java grammar. Node kind names depend on it.
pub const JAVA_GRAMMAR_VERSION: &str = "tree-sitter-java 0.23.5";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
}

impl Language {
    pub const SUPPORTED: &'static [Language] = &[Language::Java];

    pub fn from_tag(tag: &str) -> Result<Language> {
        Self::SUPPORTED
            .iter()
            .copied()
            .find(|l| l.tag() == tag)
            .ok_or_else(|| Error::UnsupportedLanguage(tag.to_string()))
    }

    pub fn tag(self) -> &'static str {
        match self {
            Language::Java => "java",
        }
    }

    pub fn default_globs(self) -> &'static [&'static str] {
        match self {
            Language::Java => &["**/*.java"],
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A loaded grammar; hands out parsers on demand.
#[derive(Clone)]
pub struct Grammar {
    language: Language,
    ts: tree_sitter::Language,
}

impl fmt::Debug for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grammar")
            .field("language", &self.language)
            .field("version", &self.version())
            .finish()
    }
}

pub fn load_grammar(tag: &str) -> Result<Grammar> {
    let language = Language::from_tag(tag)?;
    let ts = match language {
        Language::Java => tree_sitter_java::LANGUAGE.into(),
    };
    Ok(Grammar { language, ts })
}

impl Grammar {
    pub fn language(&self) -> Language {
        self.language
    }

    pub fn version(&self) -> String {
        let name = match self.language {
            Language::Java => JAVA_GRAMMAR_VERSION,
        };
        format!("{name} (abi {})", self.ts.abi_version())
    }

    pub fn parser(&self) -> Parser {
        let mut parser = Parser::new();
        parser
            .set_language(&self.ts)
            .expect("bundled grammar is ABI-compatible with the runtime");
        parser
    }

    pub fn parse(&self, content: &[u8]) -> Tree {
        self.parser()
            .parse(content, None)
            .expect("parser has a language and no timeout")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    /// Path relative to the source root, `/`-separated.
    pub path: String,
    pub content: Vec<u8>,
    pub language: Language,
}

impl SourceFile {
    pub fn new(path: impl Into<String>, content: impl Into<Vec<u8>>, language: Language) -> Self {
        SourceFile {
            path: path.into(),
            content: content.into(),
            language,
        }
    }

    pub fn java(path: impl Into<String>, content: impl Into<Vec<u8>>) -> Self {
        Self::new(path, content, Language::Java)
    }
}

pub struct ParsedFile {
    pub source: SourceFile,
    pub tree: Tree,
}

impl ParsedFile {
    fn first_error(&self) -> Option<Point> {
        let root = self.tree.root_node();
        if !root.has_error() {
            return None;
        }
        let mut cursor = root.walk();
        loop {
            let node = cursor.node();
            if node.is_error() || node.is_missing() {
                return Some(Point::from(node.start_position()));
            }
            if node.has_error() && cursor.goto_first_child() {
                continue;
            }
            loop {
                if cursor.goto_next_sibling() {
                    break;
                }
                if !cursor.goto_parent() {
                    return Some(Point::from(root.start_position()));
                }
            }
        }
    }
}

/// 1-based row and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub row: usize,
    pub col: usize,
}

impl From<tree_sitter::Point> for Point {
    fn from(p: tree_sitter::Point) -> Self {
        Point {
            row: p.row + 1,
            col: p.column + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start_byte: usize,
    pub end_byte: usize,
    pub start: Point,
    pub end: Point,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReportEntry {
    /// The file could not be read and is not part of the forest.
    Skipped { path: String, error: String },
    /// The file parsed with error-recovery nodes; it is still analyzed.
    Errored { path: String, at: Point },
}

impl fmt::Display for ReportEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportEntry::Skipped { path, .. } => write!(f, "PARSE-ERROR {path} 0:0"),
            ReportEntry::Errored { path, at } => {
                write!(f, "PARSE-ERROR {path} {}:{}", at.row, at.col)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParseReport {
    pub grammar: String,
    pub entries: Vec<ReportEntry>,
    /// Set when no file matched the include patterns.
    pub empty_forest: bool,
}

impl ParseReport {
    pub fn errored_files(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter_map(|e| match e {
            ReportEntry::Errored { path, .. } => Some(path.as_str()),
            ReportEntry::Skipped { .. } => None,
        })
    }

    pub fn lines(&self) -> impl Iterator<Item = String> + '_ {
        self.entries.iter().map(ToString::to_string)
    }
}

/// Index of a file within its forest.
pub type FileId = usize;

/// All parsed files of a run, ordered by path.
pub struct Forest {
    grammar: Grammar,
    files: Vec<ParsedFile>,
    by_path: HashMap<String, FileId>,
    pub report: ParseReport,
}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Forest")
            .field(
                "files",
                &self
                    .files
                    .iter()
                    .map(|p| &p.source.path)
                    .collect::<Vec<_>>(),
            )
            .field("report", &self.report)
            .finish()
    }
}

impl Forest {
    /// Parses in-memory sources. Files are reordered by path.
    pub fn from_sources(grammar: &Grammar, mut sources: Vec<SourceFile>) -> Result<Forest> {
        sources.sort_by(|a, b| a.path.cmp(&b.path));
        if let Some(w) = sources.windows(2).find(|w| w[0].path == w[1].path) {
            return Err(Error::DuplicatePath(w[0].path.clone()));
        }
        let files: Vec<ParsedFile> = sources
            .into_par_iter()
            .map(|source| {
                let tree = grammar.parse(&source.content);
                ParsedFile { source, tree }
            })
            .collect();
        Ok(Self::assemble(grammar, files, Vec::new()))
    }

    fn assemble(
        grammar: &Grammar,
        files: Vec<ParsedFile>,
        mut entries: Vec<ReportEntry>,
    ) -> Forest {
        entries.extend(files.iter().filter_map(|f| {
            f.first_error().map(|at| ReportEntry::Errored {
                path: f.source.path.clone(),
                at,
            })
        }));
        entries.sort_by(|a, b| report_path(a).cmp(report_path(b)));
        let by_path = files
            .iter()
            .enumerate()
            .map(|(i, f)| (f.source.path.clone(), i))
            .collect();
        let report = ParseReport {
            grammar: grammar.version(),
            empty_forest: files.is_empty(),
            entries,
        };
        Forest {
            grammar: grammar.clone(),
            files,
            by_path,
            report,
        }
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn files(&self) -> &[ParsedFile] {
        &self.files
    }

    pub fn file(&self, id: FileId) -> &ParsedFile {
        &self.files[id]
    }

    pub fn file_id(&self, path: &str) -> Option<FileId> {
        self.by_path.get(path).copied()
    }

    pub fn root(&self, id: FileId) -> SyntaxNode<'_> {
        let file = &self.files[id];
        SyntaxNode {
            node: file.tree.root_node(),
            file: id,
            source: &file.source,
        }
    }

    pub fn roots(&self) -> impl Iterator<Item = SyntaxNode<'_>> {
        (0..self.files.len()).map(|i| self.root(i))
    }

    /// Relocates a node recorded with [`SyntaxNode::node_ref`].
    pub fn resolve(&self, r: &NodeRef) -> Option<SyntaxNode<'_>> {
        let root = self.files.get(r.file)?;
        let mut node = root
            .tree
            .root_node()
            .descendant_for_byte_range(r.start, r.end)?;
        loop {
            if node.start_byte() == r.start && node.end_byte() == r.end && node.kind() == r.kind {
                return Some(SyntaxNode {
                    node,
                    file: r.file,
                    source: &root.source,
                });
            }
            node = node.parent()?;
        }
    }

    /// The innermost node of one of `kinds` that starts exactly at `offset`.
    pub fn node_starting_at(
        &self,
        file: FileId,
        offset: usize,
        kinds: &[&str],
    ) -> Option<SyntaxNode<'_>> {
        let root = self.root(file);
        let mut node = root.node.descendant_for_byte_range(offset, offset)?;
        loop {
            if kinds.contains(&node.kind()) {
                return Some(root.wrap(node));
            }
            node = node.parent()?;
        }
    }
}

fn report_path(e: &ReportEntry) -> &str {
    match e {
        ReportEntry::Skipped { path, .. } | ReportEntry::Errored { path, .. } => path,
    }
}

fn build_globset(patterns: &[String]) -> Result<GlobSet> {
    let mut builder = GlobSetBuilder::new();
    for pattern in patterns {
        let glob = Glob::new(pattern).map_err(|e| Error::InvalidGlob {
            pattern: pattern.clone(),
            message: e.to_string(),
        })?;
        builder.add(glob);
    }
    builder.build().map_err(|e| Error::InvalidGlob {
        pattern: patterns.join(","),
        message: e.to_string(),
    })
}

fn relative_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Source files under `root_dir` matching `include_globs` (the language's
/// defaults when empty), as `/`-separated relative paths in lexicographic order.
pub fn list_sources(
    root_dir: &Path,
    language: Language,
    include_globs: &[String],
) -> Result<Vec<String>> {
    let metadata = std::fs::metadata(root_dir).map_err(|e| Error::io(root_dir, e))?;
    if !metadata.is_dir() {
        return Err(Error::io(
            root_dir,
            std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory"),
        ));
    }
    let patterns: Vec<String> = if include_globs.is_empty() {
        language
            .default_globs()
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        include_globs.to_vec()
    };
    let globs = build_globset(&patterns)?;
    let mut paths: Vec<String> = WalkDir::new(root_dir)
        .follow_links(true)
        .into_iter()
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.file_type().is_file())
        .map(|entry| relative_path(root_dir, entry.path()))
        .filter(|rel| globs.is_match(rel))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Reads and parses the given files under `root_dir`. Unreadable files are
/// skipped and recorded in the report.
pub fn parse_files(root_dir: &Path, language: Language, paths: &[String]) -> Result<Forest> {
    let grammar = load_grammar(language.tag())?;
    let results: Vec<std::result::Result<ParsedFile, ReportEntry>> = paths
        .par_iter()
        .map(|rel| {
            let full: PathBuf = root_dir.join(rel);
            match std::fs::read(&full) {
                Ok(content) => {
                    let tree = grammar.parse(&content);
                    Ok(ParsedFile {
                        source: SourceFile::new(rel.clone(), content, language),
                        tree,
                    })
                }
                Err(e) => Err(ReportEntry::Skipped {
                    path: rel.clone(),
                    error: e.to_string(),
                }),
            }
        })
        .collect();
    let mut files = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(f) => files.push(f),
            Err(e) => skipped.push(e),
        }
    }
    files.sort_by(|a, b| a.source.path.cmp(&b.source.path));
    files.dedup_by(|a, b| a.source.path == b.source.path);
    Ok(Forest::assemble(&grammar, files, skipped))
}

/// Parses every matching file under `root_dir`. An empty match yields an
/// empty forest with `report.empty_forest` set.
pub fn parse_sources(
    root_dir: &Path,
    language: Language,
    include_globs: &[String],
) -> Result<Forest> {
    let paths = list_sources(root_dir, language, include_globs)?;
    parse_files(root_dir, language, &paths)
}

/// Serializable handle to a node: file plus exact byte range and kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeRef {
    pub file: FileId,
    pub start: usize,
    pub end: usize,
    pub kind: String,
}

/// A node together with the file it belongs to.
#[derive(Clone, Copy)]
pub struct SyntaxNode<'a> {
    node: Node<'a>,
    file: FileId,
    source: &'a SourceFile,
}

impl fmt::Debug for SyntaxNode<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}@{}:{}..{}",
            self.kind(),
            self.source.path,
            self.start_byte(),
            self.end_byte()
        )
    }
}

impl PartialEq for SyntaxNode<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.file == other.file && self.node == other.node
    }
}

impl Eq for SyntaxNode<'_> {}

impl<'a> SyntaxNode<'a> {
    fn wrap(&self, node: Node<'a>) -> SyntaxNode<'a> {
        SyntaxNode {
            node,
            file: self.file,
            source: self.source,
        }
    }

    pub fn raw(&self) -> Node<'a> {
        self.node
    }

    pub fn file_id(&self) -> FileId {
        self.file
    }

    pub fn file_path(&self) -> &'a str {
        &self.source.path
    }

    pub fn kind(&self) -> &'a str {
        self.node.kind()
    }

    pub fn is_error(&self) -> bool {
        self.node.is_error() || self.node.is_missing()
    }

    pub fn text(&self) -> &'a str {
        std::str::from_utf8(&self.source.content[self.node.byte_range()]).unwrap_or("")
    }

    pub fn start_byte(&self) -> usize {
        self.node.start_byte()
    }

    pub fn end_byte(&self) -> usize {
        self.node.end_byte()
    }

    pub fn start(&self) -> Point {
        self.node.start_position().into()
    }

    pub fn span(&self) -> Span {
        Span {
            start_byte: self.node.start_byte(),
            end_byte: self.node.end_byte(),
            start: self.node.start_position().into(),
            end: self.node.end_position().into(),
        }
    }

    pub fn parent(&self) -> Option<SyntaxNode<'a>> {
        self.node.parent().map(|n| self.wrap(n))
    }

    pub fn children(&self) -> Vec<SyntaxNode<'a>> {
        let mut cursor = self.node.walk();
        self.node
            .children(&mut cursor)
            .map(|n| self.wrap(n))
            .collect()
    }

    /// Named children, skipping comments.
    pub fn named_children(&self) -> Vec<SyntaxNode<'a>> {
        let mut cursor = self.node.walk();
        self.node
            .named_children(&mut cursor)
            .filter(|n| !n.is_extra())
            .map(|n| self.wrap(n))
            .collect()
    }

    pub fn child_by_field(&self, field: &str) -> Option<SyntaxNode<'a>> {
        self.node.child_by_field_name(field).map(|n| self.wrap(n))
    }

    pub fn children_by_field(&self, field: &str) -> Vec<SyntaxNode<'a>> {
        let mut cursor = self.node.walk();
        self.node
            .children_by_field_name(field, &mut cursor)
            .map(|n| self.wrap(n))
            .collect()
    }

    pub fn ancestors(&self) -> impl Iterator<Item = SyntaxNode<'a>> {
        std::iter::successors(self.parent(), |n| n.parent())
    }

    pub fn node_ref(&self) -> NodeRef {
        NodeRef {
            file: self.file,
            start: self.start_byte(),
            end: self.end_byte(),
            kind: self.kind().to_string(),
        }
    }

    /// Pre-order walk; `visit` returns whether to descend into the node.
    pub fn walk_preorder(&self, mut visit: impl FnMut(SyntaxNode<'a>) -> bool) {
        let mut cursor = self.node.walk();
        let mut descend = visit(*self);
        loop {
            if descend && cursor.goto_first_child() {
                descend = visit(self.wrap(cursor.node()));
                continue;
            }
            loop {
                if cursor.depth() == 0 {
                    return;
                }
                if cursor.goto_next_sibling() {
                    descend = visit(self.wrap(cursor.node()));
                    break;
                }
                cursor.goto_parent();
            }
        }
    }
}

/// All descendants of `node` (including itself) whose kind is in `kinds`, in
/// document order.
pub fn descendants_of_kind<'a>(node: SyntaxNode<'a>, kinds: &[&str]) -> Vec<SyntaxNode<'a>> {
    let mut out = Vec::new();
    if kinds.is_empty() {
        return out;
    }
    node.walk_preorder(|n| {
        if kinds.contains(&n.kind()) {
            out.push(n);
        }
        true
    });
    out
}
