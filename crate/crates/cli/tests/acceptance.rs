//! Acceptance checks C1 to C9. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any of them fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use callgraph_core::fixtures::{self, Fixture};
use callgraph_core::java::preprocess;
use callgraph_core::java::preprocess::preprocess_whole;
use callgraph_core::java::seek::seek_container;
use callgraph_core::outputs::{census, overlap, project};
use callgraph_core::synth::{
    generate_corpus, generate_corpus_with_stats, write_corpus, SynthConfig,
};
use callgraph_core::{
    load_grammar, Algorithm, CallGraph, ClassRegion, ContainerKey, EntryPointFilter, Forest,
    JavaGenerator, ResolutionConfig,
};

/// Random corpora checked for containment.
const CONTAINMENT_CORPORA: u64 = 50;
/// Upper bound for preprocess plus NR generation on the 1000-file corpus.
const PERF_BUDGET: Duration = Duration::from_secs(60);
/// Runs per thread count; the fastest one is compared.
const PERF_RUNS: usize = 5;
/// Timer noise allowed when comparing 4 threads against 1.
const THREAD_NOISE: f64 = 0.05;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_graph(
    forest: &Forest,
    algorithm: Algorithm,
    config: ResolutionConfig,
    filter: &EntryPointFilter,
) -> CallGraph {
    let products = preprocess(forest);
    let (graph, err) = JavaGenerator::new(forest, &products, algorithm, config).run(filter);
    if let Some(e) = err {
        panic!("generation failed: {e}");
    }
    graph
}

fn edge_strings(g: &CallGraph) -> Vec<String> {
    g.edges()
        .map(|e| format!("{} -> {}", e.source, e.target))
        .collect()
}

fn c1() -> Check {
    let start = Instant::now();
    let forest = Fixture::by_name("basic").unwrap().forest();
    let products = preprocess(&forest);
    let mut sites = 0;
    for key in products.method_dict.keys() {
        sites += seek_container(&forest, &products, &ContainerKey::Method(key.clone())).len();
        for region in ClassRegion::ALL {
            let level = ContainerKey::ClassLevel {
                class: key.class.clone(),
                region,
            };
            sites += seek_container(&forest, &products, &level).len();
        }
    }
    let graph = run_graph(
        &forest,
        Algorithm::Nr,
        ResolutionConfig::default(),
        &EntryPointFilter::AllMethods,
    );
    let elapsed = start.elapsed();
    let edges = edge_strings(&graph);
    ensure(edges == ["Foo#method1/1 -> Bar#bar/0"], || {
        format!("edges {edges:?}")
    })?;
    let unresolved: Vec<(String, String)> = graph
        .unresolved()
        .map(|u| (u.site.callee_name, u.reason))
        .collect();
    ensure(
        unresolved
            == [(
                "Bar".to_string(),
                "implicit-default-constructor".to_string(),
            )],
        || format!("unresolved {unresolved:?}"),
    )?;
    ensure(sites == 2, || format!("{sites} call sites"))?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "1 edge, 1 unresolved, 2 sites in {:.3}s",
        elapsed.as_secs_f64()
    ))
}

fn c2() -> Check {
    let forest = Fixture::by_name("dispatch").unwrap().forest();
    let entry = EntryPointFilter::parse("regex=^Bar#foo/1$").unwrap();
    let on = edge_strings(&run_graph(
        &forest,
        Algorithm::Scha,
        ResolutionConfig::default(),
        &entry,
    ));
    ensure(
        on == [
            "Bar#foo/1 -> A#method/0",
            "Bar#foo/1 -> B#method/0@A",
            "Bar#foo/1 -> C#method/0@A",
        ],
        || format!("with expansion {on:?}"),
    )?;
    let off_config = ResolutionConfig {
        scha_expand_subtypes: false,
        ..Default::default()
    };
    let off = edge_strings(&run_graph(&forest, Algorithm::Scha, off_config, &entry));
    ensure(off == ["Bar#foo/1 -> A#method/0"], || {
        format!("without expansion {off:?}")
    })?;
    Ok("3 edges with expansion, 1 without".into())
}

fn c3() -> Check {
    let forest = Fixture::by_name("overloads").unwrap().forest();
    let graph = run_graph(
        &forest,
        Algorithm::Nr,
        ResolutionConfig::default(),
        &EntryPointFilter::AllMethods,
    );
    let add_sites: BTreeSet<_> = graph
        .edges()
        .filter(|e| e.source.to_string() == "Bar#foo/2" && e.target.defined_in.name == "add")
        .map(|e| e.site.clone())
        .collect();
    ensure(add_sites.len() == 1, || {
        format!("{} add sites", add_sites.len())
    })?;
    let site = add_sites.into_iter().next().unwrap();
    let targets: Vec<String> = graph
        .edges()
        .filter(|e| e.site == site && e.source.to_string() == "Bar#foo/2")
        .map(|e| e.target.to_string())
        .collect();
    ensure(
        targets == ["Bar#add/2(float,float)", "Bar#add/2(int,int)"],
        || format!("targets {targets:?}"),
    )?;
    Ok("add site resolves to both overloads".into())
}

fn c4() -> Check {
    let grammar = load_grammar("java").unwrap();
    let mut min_classes = usize::MAX;
    let mut max_depth = 0;
    let mut edges = 0;
    for seed in 0..CONTAINMENT_CORPORA {
        let (files, stats) = generate_corpus_with_stats(&SynthConfig::small(seed));
        ensure(stats.classes >= 200, || {
            format!("seed {seed}: {} classes", stats.classes)
        })?;
        ensure(stats.nested > 0, || format!("seed {seed}: no nested types"))?;
        ensure(stats.max_depth <= 4, || {
            format!("seed {seed}: depth {}", stats.max_depth)
        })?;
        min_classes = min_classes.min(stats.classes);
        max_depth = max_depth.max(stats.max_depth);
        let forest = Forest::from_sources(&grammar, files).unwrap();
        let products = preprocess(&forest);
        let graph = |algorithm| {
            let (g, _) =
                JavaGenerator::new(&forest, &products, algorithm, ResolutionConfig::default())
                    .run(&EntryPointFilter::AllMethods);
            project(&g)
        };
        let nr = graph(Algorithm::Nr);
        let scha = graph(Algorithm::Scha);
        let violations: Vec<_> = scha.difference(&nr).take(3).cloned().collect();
        ensure(violations.is_empty(), || {
            format!("seed {seed}: SCHA edges missing from NR {violations:?}")
        })?;
        edges += scha.len();
        let matrix = overlap(&[("NR".into(), nr), ("SCHA".into(), scha)]);
        let cell = matrix.cell_text(1, 0);
        ensure(cell == "100.0%", || {
            format!("seed {seed}: SCHA row, NR column {cell}")
        })?;
    }
    Ok(format!(
        "{CONTAINMENT_CORPORA} corpora (>= {min_classes} classes, depth <= {max_depth}), {edges} SCHA edges, 0 violations"
    ))
}

fn cli(args: &[&str]) -> Result<std::process::Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_callgraph"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "callgraph {args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn c5() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let src = tmp.path().join("src");
    write_corpus(&generate_corpus(&SynthConfig::small(42)), &src).map_err(|e| e.to_string())?;
    let mut caches = Vec::new();
    for threads in ["1", "4"] {
        let cache = tmp.path().join(format!("cache{threads}.json"));
        cli(&[
            "--threads",
            threads,
            "preprocess",
            "--src",
            path(&src),
            "--out",
            path(&cache),
        ])?;
        caches.push(std::fs::read(&cache).map_err(|e| e.to_string())?);
    }
    ensure(caches[0] == caches[1], || {
        "cache bytes differ between 1 and 4 threads".into()
    })?;
    let mut compared = 0;
    for algo in ["nr", "scha"] {
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            outputs.push(
                cli(&[
                    "--threads",
                    threads,
                    "generate",
                    "--src",
                    path(&src),
                    "--algo",
                    algo,
                ])?
                .stdout,
            );
            let cache = tmp.path().join(format!("cache{threads}.json"));
            outputs.push(
                cli(&[
                    "--threads",
                    threads,
                    "generate",
                    "--cache",
                    path(&cache),
                    "--algo",
                    algo,
                ])?
                .stdout,
            );
        }
        ensure(outputs.iter().all(|o| *o == outputs[0]), || {
            format!("{algo} JSON differs")
        })?;
        compared += outputs.len();
    }
    Ok(format!(
        "identical caches and {compared} identical JSON outputs"
    ))
}

fn c6() -> Check {
    let mut checked = Vec::new();
    for fixture in fixtures::ALL {
        let forest = fixture.forest();
        ensure(preprocess(&forest) == preprocess_whole(&forest), || {
            format!("{} differs", fixture.name)
        })?;
        checked.push(fixture.name);
    }
    Ok(format!(
        "{} fixtures: {}",
        checked.len(),
        checked.join(", ")
    ))
}

/// Brute-force NR straight on the tree-sitter API: every invocation matched
/// against every declared body by name and argument count.
mod oracle {
    use std::collections::BTreeSet;

    use tree_sitter::{Node, Parser, Tree};

    /// (site file, row, col, target file, target body start byte)
    pub type OracleEdge = (String, usize, usize, String, usize);

    struct Declaration {
        file: String,
        name: String,
        arity: usize,
        varargs: bool,
        body_start: usize,
    }

    struct Invocation {
        file: String,
        row: usize,
        col: usize,
        name: String,
        args: usize,
    }

    fn preorder(tree: &Tree, mut visit: impl FnMut(Node)) {
        let mut cursor = tree.walk();
        loop {
            visit(cursor.node());
            if cursor.goto_first_child() || cursor.goto_next_sibling() {
                continue;
            }
            loop {
                if !cursor.goto_parent() {
                    return;
                }
                if cursor.goto_next_sibling() {
                    break;
                }
            }
        }
    }

    fn text<'a>(node: Node, src: &'a str) -> &'a str {
        &src[node.byte_range()]
    }

    fn in_anonymous_class(node: Node) -> bool {
        let mut current = node.parent();
        while let Some(n) = current {
            if matches!(n.kind(), "class_body" | "interface_body" | "enum_body") {
                return n.parent().is_some_and(|p| {
                    matches!(p.kind(), "object_creation_expression" | "enum_constant")
                });
            }
            current = n.parent();
        }
        false
    }

    fn argument_count(node: Node) -> usize {
        let Some(args) = node.child_by_field_name("arguments") else {
            return 0;
        };
        let mut cursor = args.walk();
        let count = args
            .named_children(&mut cursor)
            .filter(|c| !c.kind().ends_with("comment"))
            .count();
        count
    }

    fn simple_type_name(node: Node, src: &str) -> String {
        let mut t = node;
        if t.kind() == "generic_type" {
            t = t.named_child(0).unwrap_or(t);
        }
        text(t, src)
            .rsplit('.')
            .next()
            .unwrap_or_default()
            .trim()
            .to_string()
    }

    pub fn edges(files: &[(&str, &str)]) -> BTreeSet<OracleEdge> {
        let mut parser = Parser::new();
        parser
            .set_language(&tree_sitter_java::LANGUAGE.into())
            .expect("java grammar");
        let mut declarations = Vec::new();
        let mut invocations = Vec::new();
        for (file, src) in files {
            let tree = parser.parse(src, None).expect("parse");
            preorder(&tree, |node| match node.kind() {
                "method_declaration" | "constructor_declaration" => {
                    let Some(body) = node.child_by_field_name("body") else {
                        return;
                    };
                    if in_anonymous_class(node) {
                        return;
                    }
                    let name = text(node.child_by_field_name("name").unwrap(), src).to_string();
                    let (mut arity, mut varargs) = (0, false);
                    if let Some(params) = node.child_by_field_name("parameters") {
                        let mut cursor = params.walk();
                        for p in params.named_children(&mut cursor) {
                            match p.kind() {
                                "formal_parameter" => arity += 1,
                                "spread_parameter" => {
                                    arity += 1;
                                    varargs = true;
                                }
                                _ => {}
                            }
                        }
                    }
                    declarations.push(Declaration {
                        file: file.to_string(),
                        name,
                        arity,
                        varargs,
                        body_start: body.start_byte(),
                    });
                }
                "method_invocation" => {
                    let name_node = node.child_by_field_name("name").unwrap();
                    let at = name_node.start_position();
                    invocations.push(Invocation {
                        file: file.to_string(),
                        row: at.row + 1,
                        col: at.column + 1,
                        name: text(name_node, src).to_string(),
                        args: argument_count(node),
                    });
                }
                "object_creation_expression" => {
                    let at = node.start_position();
                    invocations.push(Invocation {
                        file: file.to_string(),
                        row: at.row + 1,
                        col: at.column + 1,
                        name: simple_type_name(node.child_by_field_name("type").unwrap(), src),
                        args: argument_count(node),
                    });
                }
                _ => {}
            });
        }
        let mut out = BTreeSet::new();
        for call in &invocations {
            for decl in &declarations {
                let arity_ok =
                    decl.arity == call.args || (decl.varargs && call.args + 1 >= decl.arity);
                if decl.name == call.name && arity_ok {
                    out.insert((
                        call.file.clone(),
                        call.row,
                        call.col,
                        decl.file.clone(),
                        decl.body_start,
                    ));
                }
            }
        }
        out
    }
}

fn c7() -> Check {
    let mut checked = Vec::new();
    for fixture in fixtures::ALL {
        let forest = fixture.forest();
        let products = preprocess(&forest);
        if products.method_dict.len() > 50 {
            continue;
        }
        let (graph, _) = JavaGenerator::new(
            &forest,
            &products,
            Algorithm::Nr,
            ResolutionConfig::default(),
        )
        .run(&EntryPointFilter::AllMethods);
        let driver: BTreeSet<oracle::OracleEdge> = graph
            .edges()
            .map(|e| {
                let body = &products.method_dict[&e.target.defined_in].body;
                let target_file = forest.file(body.file).source.path.clone();
                (
                    e.site.file.clone(),
                    e.site.row,
                    e.site.col,
                    target_file,
                    body.start,
                )
            })
            .collect();
        let expected = oracle::edges(fixture.files);
        ensure(driver == expected, || {
            let missing: Vec<_> = expected.difference(&driver).take(3).collect();
            let extra: Vec<_> = driver.difference(&expected).take(3).collect();
            format!("{}: missing {missing:?}, extra {extra:?}", fixture.name)
        })?;
        checked.push(format!("{}:{}", fixture.name, expected.len()));
    }
    Ok(format!("fixture:edges {}", checked.join(" ")))
}

fn c8() -> Check {
    let receivers = Fixture::by_name("receivers").unwrap();
    let counts = census(&receivers.forest()).counts;
    let hand: Vec<(String, usize)> = [
        ("explicit_this", 1),
        ("field_access", 1),
        ("identifier", 2),
        ("implicit", 1),
        ("method_invocation", 1),
    ]
    .iter()
    .map(|(k, n)| (k.to_string(), *n))
    .collect();
    let got: Vec<(String, usize)> = counts.into_iter().collect();
    ensure(got == hand, || format!("receivers fixture {got:?}"))?;

    let mut parser = tree_sitter::Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .unwrap();
    let grammar = load_grammar("java").unwrap();
    let mut total = 0;
    for seed in 0..10 {
        let files = generate_corpus(&SynthConfig::small(1000 + seed));
        let mut direct = 0;
        for f in &files {
            let tree = parser.parse(&f.content, None).unwrap();
            let mut cursor = tree.walk();
            let mut stack = vec![tree.root_node()];
            while let Some(node) = stack.pop() {
                if node.kind() == "method_invocation" {
                    direct += 1;
                }
                stack.extend(node.children(&mut cursor));
            }
        }
        let c = census(&Forest::from_sources(&grammar, files).unwrap());
        ensure(c.total == direct, || {
            format!("seed {}: census {} vs tree {direct}", 1000 + seed, c.total)
        })?;
        total += direct;
    }
    Ok(format!(
        "receivers fixture exact; 10 corpora, {total} invocations counted both ways"
    ))
}

fn reported_seconds(stderr: &[u8], label: &str) -> Result<f64, String> {
    String::from_utf8_lossy(stderr)
        .lines()
        .find_map(|l| l.strip_prefix(label)?.trim().parse().ok())
        .ok_or_else(|| format!("no `{label}` timing line"))
}

fn c9() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let src = tmp.path().join("src");
    let files = generate_corpus(&SynthConfig::large(1));
    let loc = callgraph_core::synth::line_count(&files);
    write_corpus(&files, &src).map_err(|e| e.to_string())?;
    let cache = tmp.path().join("cache.json");
    let graph = tmp.path().join("nr.json");

    let start = Instant::now();
    cli(&["preprocess", "--src", path(&src), "--out", path(&cache)])?;
    cli(&[
        "generate",
        "--cache",
        path(&cache),
        "--algo",
        "nr",
        "--out",
        path(&graph),
    ])?;
    let total = start.elapsed();
    ensure(total < PERF_BUDGET, || {
        format!("preprocess + generate took {:.1}s", total.as_secs_f64())
    })?;

    let mut best = [f64::INFINITY; 2];
    for _ in 0..PERF_RUNS {
        for (slot, threads) in ["1", "4"].iter().enumerate() {
            let out = cli(&[
                "--threads",
                threads,
                "preprocess",
                "--src",
                path(&src),
                "--out",
                path(&cache),
            ])?;
            best[slot] = best[slot].min(reported_seconds(&out.stderr, "preprocess ")?);
        }
    }
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let detail = format!(
        "{} files, {loc} lines, {:.1}s total; preprocess min of {PERF_RUNS}: 1 thread {:.3}s, 4 threads {:.3}s ({cores} cores available)",
        files.len(),
        total.as_secs_f64(),
        best[0],
        best[1]
    );
    ensure(best[1] <= best[0] * (1.0 + THREAD_NOISE), || {
        format!("4 threads slower: {detail}")
    })?;
    Ok(detail)
}

fn main() {
    let checks: [Criterion; 9] = [
        ("C1", c1),
        ("C2", c2),
        ("C3", c3),
        ("C4", c4),
        ("C5", c5),
        ("C6", c6),
        ("C7", c7),
        ("C8", c8),
        ("C9", c9),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("{name} PASS {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{name} FAIL {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
