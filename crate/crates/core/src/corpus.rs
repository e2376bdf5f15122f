//! Built-in example configurations.

use crate::config::{validate_configuration, AConfiguration};

/// `(name, n, vectors)` for the built-in corpus.
const CORPUS: &[(&str, usize, &[&[i64]])] = &[
    ("E1", 1, &[&[1], &[1]]),
    ("E2", 2, &[&[1, 0], &[0, 1], &[2, -1]]),
    ("E3", 2, &[&[1, 0], &[0, 1]]),
    ("E4", 1, &[&[1], &[1], &[1]]),
    ("E5", 2, &[&[1, 0], &[0, 1], &[2, -1], &[-1, 2]]),
];

pub fn corpus() -> Vec<AConfiguration> {
    CORPUS
        .iter()
        .map(|(name, n, vectors)| {
            validate_configuration(*n, vectors.iter().map(|v| v.to_vec()).collect())
                .expect("corpus entries are valid")
                .with_name(*name)
        })
        .collect()
}

/// Looks up a corpus entry by name, case-insensitively.
pub fn corpus_entry(name: &str) -> Option<AConfiguration> {
    corpus()
        .into_iter()
        .find(|c| c.name().is_some_and(|n| n.eq_ignore_ascii_case(name)))
}
