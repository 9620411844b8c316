//! Shared inputs for the benchmarks.

use leanaug::lean::{parse_statement, Statement};

pub const SEED: &str = "theorem evolved_thm (x y : ℝ) (h₀ : x * y = 4) (h₁ : x > y) (h₂ : x^3 - y^3 = 3555) : x^2 + y^2 = 233 := by sorry";

pub const CORPUS: &str = include_str!("../../core/tests/fixtures/round_trip.lean");

pub fn seed() -> Statement {
    parse_statement(SEED).expect("seed parses")
}

/// Theorem blocks of the round-trip corpus.
pub fn corpus() -> Vec<String> {
    leanaug::pipeline::split_theorems(CORPUS)
        .into_iter()
        .map(|(_, block)| block)
        .collect()
}

pub fn parsed_corpus() -> Vec<Statement> {
    corpus()
        .iter()
        .map(|s| parse_statement(s).expect("corpus parses"))
        .collect()
}
