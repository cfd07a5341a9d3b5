//! `callgraph`: preprocess Java sources, generate call graphs, compare them.
//!
//! Exit codes:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | success (also when the entry filter matched nothing) |
//! | 1    | invalid arguments or any other failure               |
//! | 2    | file could not be read or written                    |
//! | 3    | no source file matched                               |
//! | 4    | cache has another version, is malformed or is stale  |
//! | 5    | graph document has another schema version           |
//!
//! Standard output carries only the requested artifact; timings, parse
//! errors and warnings go to standard error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use callgraph_core::cache::CacheFile;
use callgraph_core::framework::generate_sharded;
use callgraph_core::java::preprocess;
use callgraph_core::outputs::{
    census, emit_csv, emit_dot, overlap, read_json, DotMode, GraphConfig, GraphDocument,
};
use callgraph_core::{
    parse_sources, Algorithm, CallGraph, EntryPointFilter, Error, Forest, JavaGenerator, Language,
    PreprocessResult, ResolutionConfig,
};

#[derive(Parser)]
#[command(
    name = "callgraph",
    version,
    about = "AST-based call graph generation for Java sources"
)]
struct Cli {
    /// Worker threads for parsing and preprocessing (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a source tree and write the preprocessing cache.
    Preprocess {
        #[command(flatten)]
        source: SourceArgs,
        /// Cache file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a call graph from a cache or directly from sources.
    Generate(GenerateArgs),
    /// Print the edge overlap matrix of two or more JSON graphs.
    Compare {
        #[arg(required = true, num_args = 2..)]
        graphs: Vec<PathBuf>,
        /// Comma-separated labels, one per graph (default: file stems).
        #[arg(long, value_delimiter = ',')]
        names: Vec<String>,
    },
    /// Count method invocations per receiver kind.
    Census {
        #[command(flatten)]
        source: SourceArgs,
    },
}

#[derive(Args)]
struct SourceArgs {
    #[arg(long, default_value = "java")]
    lang: String,
    /// Root of the source tree.
    #[arg(long)]
    src: PathBuf,
    /// Include glob relative to the root; repeatable (default: **/*.java).
    #[arg(long)]
    include: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
    Csv,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, conflicts_with = "src", required_unless_present = "src")]
    cache: Option<PathBuf>,
    #[arg(long)]
    src: Option<PathBuf>,
    #[arg(long, default_value = "java")]
    lang: String,
    #[arg(long)]
    include: Vec<String>,
    #[arg(long, default_value = "nr")]
    algo: Algorithm,
    /// `all`, `name=<method name>` or `regex=<pattern on the method id>`.
    #[arg(long, default_value = "all")]
    entry: String,
    /// NR matches on the name only, ignoring argument counts.
    #[arg(long)]
    nr_name_only: bool,
    /// SCHA does not expand receivers to their subclasses.
    #[arg(long)]
    no_subtypes: bool,
    /// SCHA resolves receiver types through the file's imports.
    #[arg(long)]
    qualify_imports: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, default_value = "keep-dispatch")]
    dot_mode: DotMode,
    /// Split the entry points over this many independent worklists.
    #[arg(long, default_value_t = 1)]
    shards: usize,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Io { .. } => 2,
            Error::EmptyForest(_) => 3,
            Error::CacheVersion { .. } | Error::StaleCache(_) => 4,
            Error::SchemaMismatch { .. } => 5,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Preprocess { source, out } => cmd_preprocess(&source, &out),
        Command::Generate(args) => cmd_generate(&args),
        Command::Compare { graphs, names } => cmd_compare(&graphs, &names),
        Command::Census { source } => cmd_census(&source),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn timing(label: &str, start: Instant) {
    eprintln!("{label} {:.3}", start.elapsed().as_secs_f64());
}

fn parse_tree(lang: &str, src: &Path, include: &[String]) -> CliResult<Forest> {
    let language = Language::from_tag(lang)?;
    let forest = parse_sources(src, language, include)?;
    for line in forest.report.lines() {
        eprintln!("{line}");
    }
    Ok(forest)
}

fn parse_nonempty(lang: &str, src: &Path, include: &[String]) -> CliResult<Forest> {
    let forest = parse_tree(lang, src, include)?;
    if forest.is_empty() {
        return Err(Error::EmptyForest(src.to_path_buf()).into());
    }
    Ok(forest)
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::new(2, format!("failed to write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::new(2, format!("failed to write output: {e}")))
        }
    }
}

fn cmd_preprocess(source: &SourceArgs, out: &Path) -> CliResult<()> {
    let start = Instant::now();
    let forest = parse_nonempty(&source.lang, &source.src, &source.include)?;
    let products = preprocess(&forest);
    let cache = CacheFile::new(&source.src, &forest, products);
    timing("preprocess", start);
    cache.write(out)?;
    Ok(())
}

fn load_cache(path: &Path) -> CliResult<(Forest, PreprocessResult, String)> {
    let cache = CacheFile::read(path).map_err(|e| match e {
        Error::Json(e) => Failure::new(4, format!("malformed cache {}: {e}", path.display())),
        other => other.into(),
    })?;
    let forest = cache.load_forest(None)?;
    Ok((forest, cache.products, cache.language))
}

fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let filter = EntryPointFilter::parse(&args.entry)?;
    let (forest, products, language) = match (&args.cache, &args.src) {
        (Some(cache), _) => load_cache(cache)?,
        (None, Some(src)) => {
            let start = Instant::now();
            let forest = parse_nonempty(&args.lang, src, &args.include)?;
            let products = preprocess(&forest);
            timing("preprocess", start);
            (forest, products, args.lang.clone())
        }
        (None, None) => return Err(Failure::new(1, "either --cache or --src is required")),
    };
    let resolution = ResolutionConfig {
        nr_use_arity: !args.nr_name_only,
        scha_expand_subtypes: !args.no_subtypes,
        scha_qualify_with_imports: args.qualify_imports,
    };

    let start = Instant::now();
    let generator = JavaGenerator::new(&forest, &products, args.algo, resolution);
    let graph = match generator.entry_points(&filter) {
        Ok(entries) => generate_sharded(&generator, &entries, args.shards)?,
        Err(Error::NoEntryPoints) => {
            eprintln!("warning: entry filter `{filter}` matched no methods; the graph is empty");
            CallGraph::new()
        }
        Err(e) => return Err(e.into()),
    };
    timing("generate", start);

    let config = GraphConfig {
        language,
        algorithm: args.algo.to_string(),
        entry: filter.to_string(),
        resolution,
    };
    let text = match args.format {
        Format::Json => GraphDocument::new(&graph, config).to_json(),
        Format::Dot => emit_dot(&graph, args.dot_mode),
        Format::Csv => emit_csv(&graph)?,
    };
    write_output(args.out.as_deref(), &text)
}

fn cmd_compare(paths: &[PathBuf], names: &[String]) -> CliResult<()> {
    if !names.is_empty() && names.len() != paths.len() {
        return Err(Failure::new(
            1,
            format!("{} names given for {} graphs", names.len(), paths.len()),
        ));
    }
    let mut graphs = Vec::with_capacity(paths.len());
    for (i, path) in paths.iter().enumerate() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::new(2, format!("failed to read {}: {e}", path.display())))?;
        let doc = read_json(&text).map_err(|e| match e {
            Error::Json(e) => Failure::new(
                5,
                format!("{} is not a graph document: {e}", path.display()),
            ),
            other => other.into(),
        })?;
        let label = names.get(i).cloned().unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string())
        });
        graphs.push((label, doc.projected_edges()));
    }
    write_output(None, &overlap(&graphs).to_string())
}

fn cmd_census(source: &SourceArgs) -> CliResult<()> {
    let forest = parse_tree(&source.lang, &source.src, &source.include)?;
    write_output(None, &census(&forest).to_string())
}
