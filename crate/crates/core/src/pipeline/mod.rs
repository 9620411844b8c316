//! Seed ingestion, the three-phase augmentation run, corpus dedup and
//! decontamination, and funnel statistics.

pub mod config;
pub mod corpus;
pub mod record;
mod run;
pub mod stats;

pub use config::{sibling, ConfigError, Methods, MockConfig, PipelineConfig, SCHEMA_VERSION};
pub use corpus::{decontaminate, dedup_by_key, keyed, normalized_text, BenchmarkIndex, Contamination, Drop, StatementKey};
pub use record::{ingest, split_theorems, DatasetRecord, IngestDiagnostic, IngestError, Ingested, InputFormat};
pub use run::{
    compiler, llm_clients, load_benchmarks, run_pipeline, run_with, sample_seeds, seed_rng, write_jsonl, write_outputs, Backends,
    OutputRecord, PipelineError, RunOutput, VerificationSummary,
};
pub use stats::{
    corpus_stats, domain_deltas, histogram, read_review_csv, render_delta_table, write_review_csv, AstCounts,
    Classification, CorpusStats, DomainDelta, FunnelStats, StageCounts, UNLABELED,
};
