use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::lean::{equivalence_class_hash, parse_statement_with, structural_hash, Digest, ParseOptions, Statement};

/// Identity of a statement for dedup and decontamination: the structural
/// hash when it parses, whitespace-normalized text otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementKey {
    Structural(Digest),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keyed {
    pub key: StatementKey,
    /// Present only for statements that parse.
    pub class: Option<Digest>,
    pub text: String,
}

/// Drops the theorem name and collapses whitespace.
pub fn normalized_text(stmt: &str) -> String {
    let words: Vec<&str> = stmt.split_whitespace().collect();
    let body = match words.iter().position(|w| *w == "theorem" || *w == "lemma") {
        Some(i) if i + 1 < words.len() => &words[i + 2..],
        _ => &words[..],
    };
    body.join(" ")
}

pub fn parse_lenient(stmt: &str) -> Option<Statement> {
    parse_statement_with(stmt, &ParseOptions::lenient()).ok()
}

pub fn keyed(stmt: &str) -> Keyed {
    let text = normalized_text(stmt);
    match parse_lenient(stmt) {
        Some(s) => Keyed {
            key: StatementKey::Structural(structural_hash(&s)),
            class: Some(equivalence_class_hash(&s)),
            text,
        },
        None => Keyed {
            key: StatementKey::Text(text.clone()),
            class: None,
            text,
        },
    }
}

/// Keeps the first of each key, and nothing whose key is in `reference`.
/// Returns (kept, dropped).
pub fn dedup_by_key<T>(
    items: Vec<T>,
    statement: impl Fn(&T) -> &str,
    reference: &HashSet<StatementKey>,
) -> (Vec<T>, Vec<T>) {
    let mut seen = reference.clone();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for item in items {
        if seen.insert(keyed(statement(&item)).key) {
            kept.push(item);
        } else {
            dropped.push(item);
        }
    }
    (kept, dropped)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Drop {
    pub corpus_id: String,
    pub benchmark_id: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contamination {
    pub drops: Vec<Drop>,
    /// Equal up to commutativity and friends but not structurally equal.
    /// Kept in the corpus; listed for review.
    pub near_duplicates: Vec<Drop>,
}

/// Benchmark statements indexed for lookup.
#[derive(Debug, Clone, Default)]
pub struct BenchmarkIndex {
    structural: HashMap<Digest, String>,
    classes: HashMap<Digest, String>,
    /// Normalized text of every benchmark statement, parsed or not.
    texts: HashMap<String, String>,
}

impl BenchmarkIndex {
    pub fn new<'a>(statements: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let mut idx = BenchmarkIndex::default();
        for (id, stmt) in statements {
            let k = keyed(stmt);
            if let StatementKey::Structural(d) = k.key {
                idx.structural.entry(d).or_insert_with(|| id.to_string());
            }
            if let Some(c) = k.class {
                idx.classes.entry(c).or_insert_with(|| id.to_string());
            }
            idx.texts.entry(k.text).or_insert_with(|| id.to_string());
        }
        idx
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    /// The benchmark a statement duplicates, if any.
    pub fn matches(&self, stmt: &str) -> Option<&str> {
        let k = keyed(stmt);
        if let StatementKey::Structural(d) = &k.key {
            if let Some(id) = self.structural.get(d) {
                return Some(id);
            }
        }
        self.texts.get(&k.text).map(String::as_str)
    }

    pub fn near_duplicate(&self, stmt: &str) -> Option<&str> {
        keyed(stmt).class.and_then(|c| self.classes.get(&c)).map(String::as_str)
    }
}

/// Splits `items` into clean and contaminated. Near-duplicates stay in the
/// clean part and are listed separately.
pub fn decontaminate<T>(
    items: Vec<T>,
    id: impl Fn(&T) -> &str,
    statement: impl Fn(&T) -> &str,
    index: &BenchmarkIndex,
) -> (Vec<T>, Contamination) {
    let mut report = Contamination::default();
    let mut kept = Vec::new();
    for item in items {
        if let Some(b) = index.matches(statement(&item)) {
            report.drops.push(Drop {
                corpus_id: id(&item).to_string(),
                benchmark_id: b.to_string(),
            });
            continue;
        }
        if let Some(b) = index.near_duplicate(statement(&item)) {
            report.near_duplicates.push(Drop {
                corpus_id: id(&item).to_string(),
                benchmark_id: b.to_string(),
            });
        }
        kept.push(item);
    }
    (kept, report)
}
