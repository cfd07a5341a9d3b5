use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::java::syntax::classify_receiver;
use crate::parse::{descendants_of_kind, Forest};

/// Receiver kinds of every method invocation in a forest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReceiverCensus {
    pub counts: BTreeMap<String, usize>,
    pub total: usize,
}

pub fn census(forest: &Forest) -> ReceiverCensus {
    let per_file: Vec<Vec<String>> = (0..forest.len())
        .into_par_iter()
        .map(|file| {
            descendants_of_kind(forest.root(file), &["method_invocation"])
                .into_iter()
                .map(|call| classify_receiver(call).label())
                .collect()
        })
        .collect();
    let mut out = ReceiverCensus::default();
    for label in per_file.into_iter().flatten() {
        *out.counts.entry(label).or_insert(0) += 1;
        out.total += 1;
    }
    out
}

impl ReceiverCensus {
    /// Shares per kind; empty when there are no invocations.
    pub fn fractions(&self) -> Vec<(String, f64)> {
        if self.total == 0 {
            return Vec::new();
        }
        self.counts
            .iter()
            .map(|(k, n)| (k.clone(), *n as f64 / self.total as f64))
            .collect()
    }
}

impl fmt::Display for ReceiverCensus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .counts
            .keys()
            .map(String::len)
            .chain([8])
            .max()
            .unwrap_or(8);
        writeln!(f, "{:width$}  count", "receiver")?;
        let fractions: BTreeMap<_, _> = self.fractions().into_iter().collect();
        for (kind, n) in &self.counts {
            match fractions.get(kind) {
                Some(share) => writeln!(f, "{kind:width$}  {n} ({:.1}%)", share * 100.0)?,
                None => writeln!(f, "{kind:width$}  {n}")?,
            }
        }
        writeln!(f, "{:width$}  {}", "total", self.total)
    }
}
