use callgraph_bench::{corpus, forest};
use callgraph_core::java::preprocess;
use callgraph_core::outputs::{census, emit_json, GraphConfig};
use callgraph_core::{Algorithm, EntryPointFilter, JavaGenerator, ResolutionConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

const SIZES: &[usize] = &[50, 200];

fn parse(c: &mut Criterion) {
    let mut group = c.benchmark_group("parse");
    for &files in SIZES {
        let sources = corpus(files, 1);
        group.throughput(Throughput::Elements(files as u64));
        group.bench_with_input(BenchmarkId::from_parameter(files), &sources, |b, s| {
            b.iter(|| forest(s.clone()))
        });
    }
    group.finish();
}

fn preprocessing(c: &mut Criterion) {
    let mut group = c.benchmark_group("preprocess");
    for &files in SIZES {
        let f = forest(corpus(files, 1));
        group.throughput(Throughput::Elements(files as u64));
        group.bench_with_input(BenchmarkId::from_parameter(files), &f, |b, f| {
            b.iter(|| preprocess(f))
        });
    }
    group.finish();
}

fn generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    group.sample_size(20);
    for &files in SIZES {
        let f = forest(corpus(files, 1));
        let products = preprocess(&f);
        for algorithm in [Algorithm::Nr, Algorithm::Scha] {
            let generator =
                JavaGenerator::new(&f, &products, algorithm, ResolutionConfig::default());
            group.bench_function(BenchmarkId::new(algorithm.to_string(), files), |b| {
                b.iter(|| generator.run(&EntryPointFilter::AllMethods))
            });
        }
    }
    group.finish();
}

fn outputs(c: &mut Criterion) {
    let f = forest(corpus(200, 1));
    let products = preprocess(&f);
    let (graph, _) =
        JavaGenerator::new(&f, &products, Algorithm::Scha, ResolutionConfig::default())
            .run(&EntryPointFilter::AllMethods);
    c.bench_function("emit_json/200", |b| {
        b.iter(|| emit_json(&graph, GraphConfig::default()))
    });
    c.bench_function("census/200", |b| b.iter(|| census(&f)));
}

criterion_group!(benches, parse, preprocessing, generation, outputs);
criterion_main!(benches);
