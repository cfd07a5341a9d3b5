//! Seeded generator of synthetic Java corpora: packages, imports, nested
//! classes, inheritance chains up to depth four, interfaces, overloads and
//! the usual receiver shapes, including anonymous classes and lambdas.
//!
//! The output only needs to parse; it is not meant to compile.

use std::collections::BTreeSet;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::parse::SourceFile;

pub const MAX_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub seed: u64,
    pub files: usize,
    /// Types declared per file, the file's top-level type included.
    pub classes_per_file: usize,
    pub packages: usize,
    pub methods_per_class: (usize, usize),
    pub statements_per_method: (usize, usize),
}

impl SynthConfig {
    /// About 200 classes in 70 files.
    pub fn small(seed: u64) -> Self {
        SynthConfig {
            seed,
            files: 70,
            classes_per_file: 3,
            packages: 6,
            methods_per_class: (1, 3),
            statements_per_method: (1, 5),
        }
    }

    /// 1000 files, roughly 100 lines each.
    pub fn large(seed: u64) -> Self {
        SynthConfig {
            seed,
            files: 1000,
            classes_per_file: 3,
            packages: 25,
            methods_per_class: (1, 3),
            statements_per_method: (2, 6),
        }
    }

    pub fn classes(&self) -> usize {
        self.files * self.classes_per_file
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Str,
    Class(usize),
}

#[derive(Debug, Clone)]
struct Method {
    name: String,
    params: Vec<Ty>,
    is_static: bool,
    is_abstract: bool,
    varargs: bool,
}

#[derive(Debug, Clone)]
struct Class {
    file: usize,
    package: String,
    path: Vec<String>,
    interface: bool,
    parent: Option<usize>,
    interfaces: Vec<usize>,
    depth: usize,
    methods: Vec<Method>,
    fields: Vec<(String, usize, bool)>,
    ctor_params: Option<Vec<Ty>>,
    static_block: bool,
    instance_block: bool,
}

const STEMS: &[&str] = &[
    "get", "set", "run", "process", "apply", "handle", "compute", "update", "visit", "build",
    "load", "save", "check", "render", "merge", "close",
];

const HIERARCHY_WINDOW: usize = 60;
const SHARED_NAMES: &[&str] = &["Node", "Helper", "Entry", "Builder"];

struct Model {
    classes: Vec<Class>,
    /// Indices of the types declared in each file; the first is top-level.
    by_file: Vec<Vec<usize>>,
    names: Vec<String>,
}

fn pick_arity(rng: &mut ChaCha8Rng) -> usize {
    match rng.gen_range(0..10) {
        0..=3 => 0,
        4..=6 => 1,
        7..=8 => 2,
        _ => 3,
    }
}

fn pick_ty(rng: &mut ChaCha8Rng, known: usize) -> Ty {
    match rng.gen_range(0..4) {
        0 => Ty::Int,
        1 => Ty::Str,
        _ if known > 0 => Ty::Class(rng.gen_range(0..known)),
        _ => Ty::Int,
    }
}

fn build_model(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Model {
    let pool = (cfg.classes() / 2).max(8);
    let names: Vec<String> = (0..pool)
        .map(|i| format!("{}{}", STEMS[i % STEMS.len()], i / STEMS.len()))
        .collect();
    let mut classes: Vec<Class> = Vec::new();
    let mut by_file = Vec::new();
    for file in 0..cfg.files {
        let package = format!("pkg{}", file % cfg.packages.max(1));
        let interface = file > 0 && rng.gen_bool(0.12);
        let top_name = if interface {
            format!("I{file}")
        } else {
            format!("T{file}")
        };
        let mut ids = Vec::new();
        for k in 0..cfg.classes_per_file.max(1) {
            let (path, is_interface) = if k == 0 {
                (vec![top_name.clone()], interface)
            } else if !interface && rng.gen_bool(0.6) {
                let name = if rng.gen_bool(0.2) {
                    SHARED_NAMES.choose(rng).expect("names").to_string()
                } else {
                    format!("N{file}k{k}")
                };
                let mut path = vec![top_name.clone(), name];
                if path[1] != format!("N{file}k{k}")
                    && classes
                        .iter()
                        .any(|c: &Class| c.file == file && c.path == path)
                {
                    path[1] = format!("N{file}k{k}");
                }
                (path, false)
            } else {
                (vec![format!("S{file}x{k}")], false)
            };
            ids.push(classes.len());
            classes.push(Class {
                file,
                package: package.clone(),
                path,
                interface: is_interface,
                parent: None,
                interfaces: Vec::new(),
                depth: 0,
                methods: Vec::new(),
                fields: Vec::new(),
                ctor_params: None,
                static_block: false,
                instance_block: false,
            });
        }
        by_file.push(ids);
    }

    let total = classes.len();
    for i in 0..total {
        if classes[i].interface {
            let n = rng.gen_range(1..=2);
            for _ in 0..n {
                let name = names.choose(rng).expect("pool").clone();
                let params = (0..pick_arity(rng)).map(|_| pick_ty(rng, total)).collect();
                classes[i].methods.push(Method {
                    name,
                    params,
                    is_static: false,
                    is_abstract: true,
                    varargs: false,
                });
            }
            if rng.gen_bool(0.3) {
                let name = names.choose(rng).expect("pool").clone();
                classes[i].methods.push(Method {
                    name,
                    params: Vec::new(),
                    is_static: false,
                    is_abstract: false,
                    varargs: false,
                });
            }
            continue;
        }
        // parents come from a window of earlier classes: acyclic, and no
        // single root collects most of the corpus
        let window = i.saturating_sub(HIERARCHY_WINDOW)..i;
        if i > 0 && rng.gen_bool(0.6) {
            let candidates: Vec<usize> = window
                .clone()
                .filter(|&j| !classes[j].interface && classes[j].depth < MAX_DEPTH)
                .collect();
            if let Some(&p) = candidates.choose(rng) {
                classes[i].parent = Some(p);
                classes[i].depth = classes[p].depth + 1;
            }
        }
        let interfaces: Vec<usize> = window.filter(|&j| classes[j].interface).collect();
        if !interfaces.is_empty() && rng.gen_bool(0.3) {
            let chosen = *interfaces.choose(rng).expect("non-empty");
            classes[i].interfaces.push(chosen);
            let inherited: Vec<Method> = classes[chosen]
                .methods
                .iter()
                .filter(|m| m.is_abstract)
                .cloned()
                .collect();
            for mut m in inherited {
                m.is_abstract = false;
                classes[i].methods.push(m);
            }
        }
        if let Some(p) = classes[i].parent {
            let overridable: Vec<Method> = classes[p]
                .methods
                .iter()
                .filter(|m| !m.is_static)
                .cloned()
                .collect();
            for m in overridable {
                if rng.gen_bool(0.4) {
                    classes[i].methods.push(m);
                }
            }
        }
        let own = rng.gen_range(
            cfg.methods_per_class.0..=cfg.methods_per_class.1.max(cfg.methods_per_class.0),
        );
        for _ in 0..own.max(1) {
            let name = names.choose(rng).expect("pool").clone();
            let params: Vec<Ty> = (0..pick_arity(rng)).map(|_| pick_ty(rng, total)).collect();
            let varargs = !params.is_empty() && rng.gen_bool(0.05);
            let m = Method {
                name,
                params,
                is_static: rng.gen_bool(0.15),
                is_abstract: false,
                varargs,
            };
            if !classes[i]
                .methods
                .iter()
                .any(|o| o.name == m.name && o.params == m.params)
            {
                classes[i].methods.push(m);
            }
        }
        let fields = rng.gen_range(0..=2);
        for f in 0..fields {
            let ty = rng.gen_range(0..total);
            let init = rng.gen_bool(0.5);
            classes[i].fields.push((format!("f{f}"), ty, init));
        }
        if rng.gen_bool(0.5) {
            classes[i].ctor_params = Some(
                (0..rng.gen_range(0..=2))
                    .map(|_| pick_ty(rng, total))
                    .collect(),
            );
        }
        classes[i].static_block = rng.gen_bool(0.15);
        classes[i].instance_block = rng.gen_bool(0.08);
    }
    Model {
        classes,
        by_file,
        names,
    }
}

/// Per-file rendering state: the imports a file needs.
struct FileCtx<'m> {
    model: &'m Model,
    package: String,
    explicit: BTreeSet<String>,
    wildcard: BTreeSet<String>,
}

impl FileCtx<'_> {
    fn class_ref(&mut self, id: usize, rng: &mut ChaCha8Rng) -> String {
        let c = &self.model.classes[id];
        let nested = c.path.join(".");
        if c.package == self.package {
            return nested;
        }
        match rng.gen_range(0..5) {
            0 => format!("{}.{}", c.package, nested),
            1 | 2 => {
                self.explicit.insert(format!("{}.{}", c.package, c.path[0]));
                nested
            }
            _ => {
                self.wildcard.insert(c.package.clone());
                nested
            }
        }
    }

    fn ty(&mut self, ty: Ty, rng: &mut ChaCha8Rng) -> String {
        match ty {
            Ty::Int => "int".into(),
            Ty::Str => "String".into(),
            Ty::Class(id) => self.class_ref(id, rng),
        }
    }
}

fn args(n: usize, rng: &mut ChaCha8Rng) -> String {
    (0..n)
        .map(|_| *["1", "\"s\"", "null", "x"].choose(rng).expect("args"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// A call of some method of class `target`, or of a random pool name.
fn call_on(model: &Model, target: usize, rng: &mut ChaCha8Rng) -> String {
    let methods = &model.classes[target].methods;
    if methods.is_empty() || rng.gen_bool(0.15) {
        let name = model.names.choose(rng).expect("pool");
        return format!("{name}({})", args(pick_arity(rng), rng));
    }
    let m = methods.choose(rng).expect("non-empty");
    let n = if m.varargs {
        m.params.len() + rng.gen_range(0..2)
    } else {
        m.params.len()
    };
    format!("{}({})", m.name, args(n, rng))
}

fn statement(
    ctx: &mut FileCtx<'_>,
    me: usize,
    params: &[(String, Ty)],
    local: &mut usize,
    rng: &mut ChaCha8Rng,
    out: &mut String,
    indent: &str,
) {
    let model = ctx.model;
    let total = model.classes.len();
    let other = rng.gen_range(0..total);
    let class = &model.classes[me];
    match rng.gen_range(0..13) {
        0 | 1 => {
            let t = ctx.class_ref(other, rng);
            *local += 1;
            let n = model.classes[other]
                .ctor_params
                .as_ref()
                .map_or(0, Vec::len);
            let _ = writeln!(out, "{indent}{t} v{local} = new {t}({});", args(n, rng));
            let _ = writeln!(out, "{indent}v{local}.{};", call_on(model, other, rng));
        }
        2 => {
            if let Some((name, Ty::Class(c))) =
                params.iter().find(|(_, t)| matches!(t, Ty::Class(_)))
            {
                let _ = writeln!(out, "{indent}{name}.{};", call_on(model, *c, rng));
            } else {
                let _ = writeln!(out, "{indent}{};", call_on(model, me, rng));
            }
        }
        3 => {
            if let Some((name, ty, _)) = class.fields.choose(rng) {
                let _ = writeln!(out, "{indent}{name}.{};", call_on(model, *ty, rng));
            } else {
                let _ = writeln!(out, "{indent}this.{};", call_on(model, me, rng));
            }
        }
        4 => {
            let target = class.parent.filter(|_| rng.gen_bool(0.5)).unwrap_or(me);
            let _ = writeln!(out, "{indent}{};", call_on(model, target, rng));
        }
        5 => {
            let _ = writeln!(out, "{indent}this.{};", call_on(model, me, rng));
        }
        6 => {
            if let Some((name, ty, _)) = class.fields.choose(rng) {
                let _ = writeln!(out, "{indent}this.{name}.{};", call_on(model, *ty, rng));
            } else {
                let _ = writeln!(out, "{indent}System.out.println(\"x\");");
            }
        }
        7 => {
            let t = ctx.class_ref(other, rng);
            *local += 1;
            let _ = writeln!(out, "{indent}{t} v{local} = null;");
            let _ = writeln!(
                out,
                "{indent}v{local}.{}.{};",
                call_on(model, other, rng),
                call_on(model, me, rng)
            );
        }
        8 => {
            let statics: Vec<&Method> = model.classes[other]
                .methods
                .iter()
                .filter(|m| m.is_static)
                .collect();
            if let Some(m) = statics.choose(rng) {
                let t = ctx.class_ref(other, rng);
                let _ = writeln!(
                    out,
                    "{indent}{t}.{}({});",
                    m.name,
                    args(m.params.len(), rng)
                );
            } else {
                let _ = writeln!(out, "{indent}{};", call_on(model, me, rng));
            }
        }
        9 => {
            let _ = writeln!(
                out,
                "{indent}java.util.List.of(1, 2).forEach(x -> {});",
                call_on(model, me, rng)
            );
        }
        10 => {
            *local += 1;
            let _ = writeln!(out, "{indent}Runnable r{local} = new Runnable() {{");
            let _ = writeln!(out, "{indent}    public void run() {{");
            let _ = writeln!(out, "{indent}        {};", call_on(model, me, rng));
            let _ = writeln!(out, "{indent}    }}");
            let _ = writeln!(out, "{indent}}};");
        }
        11 => {
            let t = ctx.class_ref(other, rng);
            *local += 1;
            let n = model.classes[other]
                .ctor_params
                .as_ref()
                .map_or(0, Vec::len);
            let _ = writeln!(out, "{indent}var w{local} = new {t}({});", args(n, rng));
            let _ = writeln!(out, "{indent}w{local}.{};", call_on(model, other, rng));
        }
        _ => {
            let _ = writeln!(out, "{indent}if (x != null) {{");
            let _ = writeln!(out, "{indent}    {};", call_on(model, me, rng));
            let _ = writeln!(out, "{indent}}}");
        }
    }
}

fn render_class(
    ctx: &mut FileCtx<'_>,
    id: usize,
    nested: &[usize],
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
    out: &mut String,
    indent: &str,
) {
    let model = ctx.model;
    let c = &model.classes[id];
    let name = c.path.last().expect("path");
    let mut header = String::from(indent);
    if c.path.len() > 1 {
        header.push_str("public static ");
    } else if c.path[0].starts_with(['T', 'I']) {
        header.push_str("public ");
    }
    if c.interface {
        let _ = write!(header, "interface {name}");
    } else {
        let _ = write!(header, "class {name}");
        if let Some(p) = c.parent {
            let _ = write!(header, " extends {}", ctx.class_ref(p, rng));
        }
        if !c.interfaces.is_empty() {
            let list: Vec<String> = c
                .interfaces
                .iter()
                .map(|i| ctx.class_ref(*i, rng))
                .collect();
            let _ = write!(header, " implements {}", list.join(", "));
        }
    }
    let _ = writeln!(out, "{header} {{");
    let inner = format!("{indent}    ");
    for (fname, ty, init) in &c.fields {
        let t = ctx.class_ref(*ty, rng);
        if *init {
            let n = model.classes[*ty].ctor_params.as_ref().map_or(0, Vec::len);
            let _ = writeln!(out, "{inner}{t} {fname} = new {t}({});", args(n, rng));
        } else {
            let _ = writeln!(out, "{inner}{t} {fname};");
        }
    }
    if c.static_block {
        let _ = writeln!(out, "{inner}static {{");
        let _ = writeln!(out, "{inner}    {};", call_on(model, id, rng));
        let _ = writeln!(out, "{inner}}}");
    }
    if c.instance_block {
        let _ = writeln!(out, "{inner}{{");
        let _ = writeln!(out, "{inner}    {};", call_on(model, id, rng));
        let _ = writeln!(out, "{inner}}}");
    }
    if let Some(params) = &c.ctor_params {
        let list: Vec<String> = params
            .iter()
            .enumerate()
            .map(|(k, t)| format!("{} p{k}", ctx.ty(*t, rng)))
            .collect();
        let _ = writeln!(out, "{inner}public {name}({}) {{", list.join(", "));
        if let Some(p) = c.parent {
            let n = model.classes[p].ctor_params.as_ref().map_or(0, Vec::len);
            let _ = writeln!(out, "{inner}    super({});", args(n, rng));
        }
        let _ = writeln!(out, "{inner}}}");
    }
    for m in &c.methods {
        let params: Vec<(String, Ty)> = m
            .params
            .iter()
            .enumerate()
            .map(|(k, t)| (format!("a{k}"), *t))
            .collect();
        let mut list: Vec<String> = params
            .iter()
            .map(|(n, t)| format!("{} {n}", ctx.ty(*t, rng)))
            .collect();
        if m.varargs {
            if let Some(last) = list.last_mut() {
                *last = last.replacen(' ', "... ", 1);
            }
        }
        let modifiers = if m.is_static {
            "public static "
        } else if c.interface && !m.is_abstract {
            "default "
        } else {
            "public "
        };
        if m.is_abstract {
            let _ = writeln!(out, "{inner}void {}({});", m.name, list.join(", "));
            continue;
        }
        let _ = writeln!(
            out,
            "{inner}{modifiers}void {}({}) {{",
            m.name,
            list.join(", ")
        );
        let n = rng.gen_range(
            cfg.statements_per_method.0
                ..=cfg.statements_per_method.1.max(cfg.statements_per_method.0),
        );
        let mut local = 0;
        let body_indent = format!("{inner}    ");
        for _ in 0..n {
            statement(ctx, id, &params, &mut local, rng, out, &body_indent);
        }
        let _ = writeln!(out, "{inner}}}");
    }
    for &n in nested {
        out.push('\n');
        render_class(ctx, n, &[], cfg, rng, out, &inner);
    }
    let _ = writeln!(out, "{indent}}}");
}

fn render_file(model: &Model, file: usize, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> SourceFile {
    let ids = &model.by_file[file];
    let top = ids[0];
    let package = model.classes[top].package.clone();
    let mut ctx = FileCtx {
        model,
        package: package.clone(),
        explicit: BTreeSet::new(),
        wildcard: BTreeSet::new(),
    };
    let nested: Vec<usize> = ids[1..]
        .iter()
        .copied()
        .filter(|&i| model.classes[i].path.len() > 1)
        .collect();
    let siblings: Vec<usize> = ids[1..]
        .iter()
        .copied()
        .filter(|&i| model.classes[i].path.len() == 1)
        .collect();
    let mut body = String::new();
    render_class(&mut ctx, top, &nested, cfg, rng, &mut body, "");
    for s in siblings {
        body.push('\n');
        render_class(&mut ctx, s, &[], cfg, rng, &mut body, "");
    }
    let mut out = format!("package {package};\n\n");
    let imports = !ctx.explicit.is_empty() || !ctx.wildcard.is_empty();
    for e in &ctx.explicit {
        let _ = writeln!(out, "import {e};");
    }
    for w in &ctx.wildcard {
        let _ = writeln!(out, "import {w}.*;");
    }
    if imports {
        out.push('\n');
    }
    out.push_str(&body);
    let path = format!("{}/{}.java", package, model.classes[top].path[0]);
    SourceFile::java(path, out)
}

/// Shape of a generated corpus as the generator built it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusStats {
    pub classes: usize,
    pub nested: usize,
    /// Longest `extends` chain, in edges.
    pub max_depth: usize,
}

/// Generates the corpus for `cfg`; identical configs give identical files.
pub fn generate_corpus(cfg: &SynthConfig) -> Vec<SourceFile> {
    generate_corpus_with_stats(cfg).0
}

pub fn generate_corpus_with_stats(cfg: &SynthConfig) -> (Vec<SourceFile>, CorpusStats) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let model = build_model(cfg, &mut rng);
    let stats = CorpusStats {
        classes: model.classes.len(),
        nested: model.classes.iter().filter(|c| c.path.len() > 1).count(),
        max_depth: model.classes.iter().map(|c| c.depth).max().unwrap_or(0),
    };
    let files = (0..cfg.files)
        .map(|f| render_file(&model, f, cfg, &mut rng))
        .collect();
    (files, stats)
}

/// Writes a corpus below `dir`, creating package directories.
pub fn write_corpus(files: &[SourceFile], dir: &std::path::Path) -> std::io::Result<()> {
    for f in files {
        let path = dir.join(&f.path);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, &f.content)?;
    }
    Ok(())
}

pub fn line_count(files: &[SourceFile]) -> usize {
    files
        .iter()
        .map(|f| f.content.iter().filter(|b| **b == b'\n').count())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::java::preprocess;
    use crate::parse::{load_grammar, Forest};

    fn forest(files: Vec<SourceFile>) -> Forest {
        Forest::from_sources(&load_grammar("java").unwrap(), files).unwrap()
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig::small(7);
        assert_eq!(generate_corpus(&cfg), generate_corpus(&cfg));
        assert_ne!(
            generate_corpus(&cfg),
            generate_corpus(&SynthConfig::small(8))
        );
    }

    #[test]
    fn small_corpus_shape() {
        let cfg = SynthConfig::small(1);
        let files = generate_corpus(&cfg);
        assert_eq!(files.len(), 70);
        let f = forest(files);
        assert!(
            f.report.errored_files().next().is_none(),
            "{:?}",
            f.report.lines().collect::<Vec<_>>()
        );
        let p = preprocess(&f);
        assert!(p.class_cache.len() >= 200);
        assert!(p.class_cache.iter().any(|(n, _)| n.path.len() > 1));
        let deepest = p
            .class_cache
            .iter()
            .map(|(n, _)| {
                let mut depth = 0;
                let mut current = n.clone();
                while let Some(parent) =
                    p.class_cache
                        .direct_supertypes(&current)
                        .into_iter()
                        .find(|s| {
                            p.class_cache
                                .get(s)
                                .is_some_and(|r| r.kind != crate::java::ClassKind::Interface)
                        })
                {
                    depth += 1;
                    current = parent;
                    if depth > 10 {
                        break;
                    }
                }
                depth
            })
            .max()
            .unwrap();
        assert!(deepest >= 2, "deepest chain {deepest}");
        assert!(!p.anonymous.iter().all(Vec::is_empty));
    }
}
