#![allow(dead_code)]

pub mod dtd;
pub mod query;

use nlta::builder::build_network;
use nlta::frontend::parse_descriptions;
use nlta::model::TaNetwork;

pub const TRAIN_GATE: &str = include_str!("../data/traingate.txt");
pub const SPECS: &str = include_str!("../data/specs.txt");

/// Sentences of a corpus file, comments and blank lines dropped.
pub fn sentences(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

pub fn build(text: &str) -> TaNetwork {
    let (parsed, diags) = parse_descriptions(text);
    assert!(diags.is_empty(), "{diags:?}");
    let (net, diags) = build_network(&parsed);
    assert!(diags.iter().all(|d| !d.is_error()), "{diags:?}");
    net
}
