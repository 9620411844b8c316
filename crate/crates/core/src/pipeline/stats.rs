use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::record::DatasetRecord;
use crate::llm::{classify_domain, DomainList, LlmClient, LlmError};
use crate::verify::{Aspect, Final, VerificationReport};

pub const UNLABELED: &str = "Unlabeled";

/// Items entering a stage and where each one went.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub input: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub skipped: usize,
}

impl StageCounts {
    pub fn balanced(&self) -> bool {
        self.input == self.accepted + self.rejected + self.skipped
    }

    fn add(&mut self, o: &StageCounts) {
        self.input += o.input;
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.skipped += o.skipped;
    }

    fn accept(&mut self) {
        self.input += 1;
        self.accepted += 1;
    }

    fn reject(&mut self) {
        self.input += 1;
        self.rejected += 1;
    }

    fn skip(&mut self) {
        self.input += 1;
        self.skipped += 1;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstCounts {
    pub inputs: usize,
    pub parse_failures: usize,
    pub variants: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunnelStats {
    pub seeds_in: usize,
    /// Seeds matching a benchmark, dropped before evolution.
    pub seeds_contaminated: usize,
    /// LLM evolution calls: accepted when the reply held at least one
    /// variant, rejected when it held none, skipped on endpoint failure.
    pub generation: StageCounts,
    pub variants_raised: usize,
    pub parse_diagnostics: usize,
    pub compile: StageCounts,
    pub repair: StageCounts,
    pub judges: BTreeMap<Aspect, StageCounts>,
    pub verification: StageCounts,
    pub rejected_by: BTreeMap<String, usize>,
    pub ast: AstCounts,
    pub dedup_drops: usize,
    pub decontamination_drops: usize,
    pub near_duplicates: usize,
    pub output_records: usize,
    pub domains_before: BTreeMap<String, usize>,
    pub domains_after: BTreeMap<String, usize>,
}

impl FunnelStats {
    /// Adds the per-seed counters of `o`.
    pub fn absorb(&mut self, o: &FunnelStats) {
        self.generation.add(&o.generation);
        self.variants_raised += o.variants_raised;
        self.parse_diagnostics += o.parse_diagnostics;
        self.compile.add(&o.compile);
        self.repair.add(&o.repair);
        for (a, c) in &o.judges {
            self.judges.entry(*a).or_default().add(c);
        }
        self.verification.add(&o.verification);
        for (r, n) in &o.rejected_by {
            *self.rejected_by.entry(r.clone()).or_default() += n;
        }
        self.ast.inputs += o.ast.inputs;
        self.ast.parse_failures += o.ast.parse_failures;
        self.ast.variants += o.ast.variants;
    }

    pub fn tally_call(&mut self, variants: Option<usize>, diagnostics: usize) {
        match variants {
            None => self.generation.skip(),
            Some(0) => self.generation.reject(),
            Some(n) => {
                self.generation.accept();
                self.variants_raised += n;
            }
        }
        self.parse_diagnostics += diagnostics;
    }

    pub fn tally_report(&mut self, r: &VerificationReport) {
        let skipped = matches!(r.outcome, Final::Skipped { .. });
        let passed_compile = match &r.compile {
            None => {
                self.compile.skip();
                false
            }
            Some(c) if c.ok => {
                self.compile.accept();
                true
            }
            Some(_) => {
                self.compile.reject();
                if r.repaired.as_ref().and_then(|x| x.compile.as_ref()).is_some_and(|c| c.ok) {
                    self.repair.accept();
                    true
                } else if skipped {
                    self.repair.skip();
                    false
                } else {
                    self.repair.reject();
                    false
                }
            }
        };
        for v in &r.verdicts {
            let stage = self.judges.entry(v.aspect).or_default();
            if v.passes() {
                stage.accept();
            } else {
                stage.reject();
            }
        }
        if skipped && passed_compile {
            if let Some(a) = r.required.get(r.verdicts.len()) {
                self.judges.entry(*a).or_default().skip();
            }
        }
        match &r.outcome {
            Final::Accepted => self.verification.accept(),
            Final::Rejected { reason } => {
                self.verification.reject();
                *self.rejected_by.entry(reason.clone()).or_default() += 1;
            }
            Final::Skipped { .. } => self.verification.skip(),
        }
    }

    /// Every stage balances and what leaves one stage enters the next.
    pub fn check_conservation(&self) -> Result<(), String> {
        let mut stages = vec![
            ("generation", self.generation),
            ("compile", self.compile),
            ("repair", self.repair),
            ("verification", self.verification),
        ];
        stages.extend(self.judges.iter().map(|(a, c)| (a.as_str(), *c)));
        for (name, c) in &stages {
            if !c.balanced() {
                return Err(format!("{name}: {c:?} does not balance"));
            }
        }
        let judged: StageCounts = self.judges.values().fold(StageCounts::default(), |mut acc, c| {
            acc.add(c);
            acc
        });
        let checks = [
            ("variants raised vs verified", self.variants_raised, self.verification.input),
            ("compile input", self.compile.input, self.verification.input),
            ("repair input", self.repair.input, self.compile.rejected),
            (
                "compiled vs judged",
                self.compile.accepted + self.repair.accepted,
                self.verification.accepted + judged.rejected + judged.skipped,
            ),
            (
                "rejections",
                self.verification.rejected,
                self.repair.rejected + judged.rejected,
            ),
            (
                "skips",
                self.verification.skipped,
                self.compile.skipped + self.repair.skipped + judged.skipped,
            ),
            ("rejection reasons", self.verification.rejected, self.rejected_by.values().sum()),
            (
                "output records",
                self.output_records + self.dedup_drops + self.decontamination_drops,
                self.verification.accepted + self.ast.variants,
            ),
            ("domains before", self.domains_before.values().sum(), self.seeds_in),
            ("domains after", self.domains_after.values().sum(), self.output_records),
        ];
        for (name, a, b) in checks {
            if a != b {
                return Err(format!("{name}: {a} != {b}"));
            }
        }
        Ok(())
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seeds in            {:>8}", self.seeds_in);
        let _ = writeln!(out, "seeds contaminated  {:>8}", self.seeds_contaminated);
        let _ = writeln!(out, "variants raised     {:>8}", self.variants_raised);
        let _ = writeln!(out, "{:<20}{:>8}{:>10}{:>10}{:>9}", "stage", "in", "accepted", "rejected", "skipped");
        let mut row = |name: &str, c: &StageCounts| {
            let _ = writeln!(out, "{name:<20}{:>8}{:>10}{:>10}{:>9}", c.input, c.accepted, c.rejected, c.skipped);
        };
        row("llm calls", &self.generation);
        row("compile", &self.compile);
        row("repair", &self.repair);
        for (a, c) in &self.judges {
            row(&format!("judge {}", a.as_str()), c);
        }
        row("verification", &self.verification);
        let _ = writeln!(out, "ast inputs          {:>8}", self.ast.inputs);
        let _ = writeln!(out, "ast parse failures  {:>8}", self.ast.parse_failures);
        let _ = writeln!(out, "ast variants        {:>8}", self.ast.variants);
        let _ = writeln!(out, "dedup drops         {:>8}", self.dedup_drops);
        let _ = writeln!(out, "decontam drops      {:>8}", self.decontamination_drops);
        let _ = writeln!(out, "near duplicates     {:>8}", self.near_duplicates);
        let _ = writeln!(out, "output records      {:>8}", self.output_records);
        out.push('\n');
        out.push_str(&render_delta_table(&domain_deltas(&self.domains_before, &self.domains_after)));
        out
    }
}

pub fn histogram<'a>(labels: impl IntoIterator<Item = Option<&'a str>>) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for l in labels {
        *h.entry(l.unwrap_or(UNLABELED).to_string()).or_default() += 1;
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainDelta {
    pub domain: String,
    pub before: usize,
    pub after: usize,
    pub before_share: f64,
    pub after_share: f64,
}

pub fn domain_deltas(before: &BTreeMap<String, usize>, after: &BTreeMap<String, usize>) -> Vec<DomainDelta> {
    let tb: usize = before.values().sum();
    let ta: usize = after.values().sum();
    let share = |n: usize, t: usize| if t == 0 { 0.0 } else { n as f64 / t as f64 };
    let mut names: Vec<&String> = before.keys().chain(after.keys()).collect();
    names.sort();
    names.dedup();
    names
        .into_iter()
        .map(|d| {
            let b = before.get(d).copied().unwrap_or(0);
            let a = after.get(d).copied().unwrap_or(0);
            DomainDelta {
                domain: d.clone(),
                before: b,
                after: a,
                before_share: share(b, tb),
                after_share: share(a, ta),
            }
        })
        .collect()
}

pub fn render_delta_table(rows: &[DomainDelta]) -> String {
    let mut out = format!("{:<26}{:>8}{:>8}{:>8}{:>9}{:>9}\n", "domain", "before", "after", "delta", "before%", "after%");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<26}{:>8}{:>8}{:>+8}{:>8.1}%{:>8.1}%",
            r.domain,
            r.before,
            r.after,
            r.after as i64 - r.before as i64,
            100.0 * r.before_share,
            100.0 * r.after_share
        );
    }
    out
}

/// A label assigned by the classifier, for human review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub id: String,
    pub predicted_domain: String,
    /// `keep` or `drop`, edited by the reviewer.
    pub decision: String,
    pub formal_statement: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub records: usize,
    pub histogram: BTreeMap<String, usize>,
    #[serde(skip)]
    pub classified: Vec<Classification>,
}

/// Domain histogram of a corpus. With a classifier, unlabeled records
/// are labeled by the model first.
pub fn corpus_stats(
    records: &[DatasetRecord],
    classifier: Option<(&LlmClient, &DomainList)>,
) -> Result<CorpusStats, LlmError> {
    let mut labels: Vec<Option<String>> = records.iter().map(|r| r.domain.clone()).collect();
    let mut classified = Vec::new();
    if let Some((client, domains)) = classifier {
        for (r, label) in records.iter().zip(labels.iter_mut()) {
            if label.is_some() {
                continue;
            }
            if let Some(d) = classify_domain(client, &r.formal_statement, domains)? {
                classified.push(Classification {
                    id: r.id.clone(),
                    predicted_domain: d.clone(),
                    decision: "keep".into(),
                    formal_statement: r.formal_statement.clone(),
                });
                *label = Some(d);
            }
        }
    }
    Ok(CorpusStats {
        records: records.len(),
        histogram: histogram(labels.iter().map(|l| l.as_deref())),
        classified,
    })
}

pub fn write_review_csv<W: std::io::Write>(w: W, rows: &[Classification]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_review_csv<R: std::io::Read>(r: R) -> csv::Result<Vec<Classification>> {
    csv::Reader::from_reader(r).deserialize().collect()
}
