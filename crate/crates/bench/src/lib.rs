//! Shared inputs for the pipeline benchmarks.

use callgraph_core::synth::{generate_corpus, SynthConfig};
use callgraph_core::{load_grammar, Forest, SourceFile};

/// A synthetic corpus of `files` files, otherwise shaped like the small preset.
pub fn corpus(files: usize, seed: u64) -> Vec<SourceFile> {
    generate_corpus(&SynthConfig {
        files,
        ..SynthConfig::small(seed)
    })
}

pub fn forest(sources: Vec<SourceFile>) -> Forest {
    Forest::from_sources(&load_grammar("java").expect("java grammar"), sources)
        .expect("unique paths")
}
