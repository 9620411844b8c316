use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use leanaug::engine::{EngineConfig, Method, Status};
use leanaug::lean::parse_statement;
use leanaug::llm::{FixtureTransport, LlmClient, LlmEndpointConfig, SyntheticTransport};
use leanaug::pipeline::{
    corpus_stats, decontaminate, dedup_by_key, domain_deltas, ingest, run_pipeline, run_with, BenchmarkIndex, Backends,
    DatasetRecord, InputFormat, MockConfig, PipelineConfig, PipelineError, UNLABELED,
};
use leanaug::verify::{Compiler, CompileResult, SyntaxMockCompiler, ToolchainError};
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pipeline").join(name)
}

fn seeds() -> Vec<DatasetRecord> {
    ingest(&fixture("seeds.jsonl"), InputFormat::Jsonl).unwrap().records
}

fn mock_cfg(dir: &Path) -> PipelineConfig {
    PipelineConfig {
        input: fixture("seeds.jsonl"),
        output: dir.join("out.jsonl"),
        mock: MockConfig {
            enabled: true,
            fixtures: None,
        },
        rng_seed: 7,
        chunk_size: 3,
        ..PipelineConfig::default()
    }
}

#[test]
fn ingest_jsonl_and_lean_dirs() {
    assert_eq!(seeds().len(), 10);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("three.jsonl");
    let lines = [
        r#"{"id":"1","formal_statement":"theorem a : 1 = 1 := by sorry"}"#,
        r#"{"id":"2","formal_statement":"theorem b : 2 = 2 := by sorry","nl_description":"two"}"#,
        r#"{"id":"3","formal_statement":"theorem c : 3 = 3 := by sorry","domain_label":"Algebra"}"#,
    ];
    std::fs::write(&p, lines.join("\n")).unwrap();
    let got = ingest(&p, InputFormat::Jsonl).unwrap();
    assert_eq!(got.records.len(), 3);
    assert_eq!(got.records[2].domain.as_deref(), Some("Algebra"));

    std::fs::write(&p, [lines[0], r#"{"id":"x","source":"s"}"#].join("\n")).unwrap();
    let got = ingest(&p, InputFormat::Jsonl).unwrap();
    assert_eq!((got.records.len(), got.skipped.len()), (1, 1));

    let got = ingest(&fixture("lean_dir"), InputFormat::detect(&fixture("lean_dir"))).unwrap();
    let ids: Vec<&str> = got.records.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["a.lean", "sub/b.lean"]);
    assert_eq!(got.skipped.len(), 1, "two theorems in one file");
    parse_statement(&got.records[0].formal_statement).unwrap();
}

#[test]
fn all_accepting_mock_run_conserves_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = mock_cfg(dir.path());
    let out = run_pipeline(&cfg).unwrap();
    let s = &out.stats;
    s.check_conservation().unwrap();
    assert_eq!(s.seeds_in, 10);
    // one domain call and two difficulty calls per seed, three variants each
    assert_eq!(s.generation.input, 30);
    // 90 variants, less those that stay in the seed's labeled domain
    assert_eq!(s.variants_raised + s.parse_diagnostics, 90);
    assert_eq!(s.verification.accepted, s.variants_raised);
    let accepted = out.records.iter().filter(|r| r.verification.is_some()).count();
    let ast = out.records.iter().filter(|r| r.provenance.method == Method::Ast).count();
    assert_eq!(accepted + ast, out.records.len());
    assert_eq!(out.records.len() + s.dedup_drops, s.verification.accepted + s.ast.variants);
    for r in &out.records {
        assert_eq!(r.schema_version, 1);
        assert_eq!(r.provenance.status, Status::Verified);
        assert!(seeds().iter().any(|sd| sd.id == r.provenance.seed_statement_id));
        assert!(r.id.starts_with(&r.provenance.seed_statement_id));
    }
    let written = std::fs::read_to_string(&cfg.output).unwrap();
    assert_eq!(written.lines().count(), out.records.len());
    assert!(cfg.stats_path().exists());
}

#[test]
fn ast_variants_are_never_verified() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline(&mock_cfg(dir.path())).unwrap();
    for r in &out.records {
        assert_eq!(r.provenance.method == Method::Ast, r.verification.is_none(), "{}", r.id);
    }
}

#[test]
fn identical_mock_runs_are_byte_identical() {
    let read = |cfg: &PipelineConfig| {
        (
            std::fs::read(&cfg.output).unwrap(),
            std::fs::read(cfg.stats_path()).unwrap(),
        )
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ca = mock_cfg(a.path());
    let cb = PipelineConfig {
        jobs: Some(1),
        chunk_size: 10,
        ..mock_cfg(b.path())
    };
    run_pipeline(&ca).unwrap();
    run_pipeline(&cb).unwrap();
    assert_eq!(read(&ca), read(&cb));
}

#[test]
fn contaminated_seed_is_dropped() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        benchmarks: vec![fixture("benchmark.jsonl")],
        ..mock_cfg(dir.path())
    };
    let out = run_pipeline(&cfg).unwrap();
    assert_eq!(out.stats.seeds_contaminated, 1);
    assert_eq!(out.contamination.drops[0].corpus_id, "mathd_algebra_10");
    assert_eq!(out.contamination.drops[0].benchmark_id, "minif2f/mathd_algebra_10");
    assert!(out.records.iter().all(|r| r.provenance.seed_statement_id != "mathd_algebra_10"));
    out.stats.check_conservation().unwrap();
}

#[test]
fn case_study_fans_out_through_ast() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        mock: MockConfig {
            enabled: true,
            fixtures: Some(fixture("case_study")),
        },
        methods: leanaug::pipeline::Methods {
            domain: true,
            difficulty: false,
            ast: true,
        },
        ast_on_seeds: false,
        engine: EngineConfig {
            probability: 1.0,
            ..EngineConfig::default()
        },
        ..mock_cfg(dir.path())
    };
    let seed = seeds().into_iter().find(|s| s.id == "lean_workbook_12011").unwrap();
    let backends = Backends::from_config(&cfg).unwrap();
    let out = run_with(&cfg, vec![seed], &backends).unwrap();
    let pairs: Vec<_> = out.records.iter().filter(|r| r.verification.is_some()).collect();
    assert_eq!(pairs.len(), 2);
    for p in &pairs {
        let children = out
            .records
            .iter()
            .filter(|r| r.provenance.parent_id.as_deref() == Some(p.id.as_str()))
            .count();
        assert!(children >= 1, "{} has no AST variant", p.id);
    }
    let domains: BTreeMap<_, _> = out.stats.domains_after.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    assert!(domains["Geometry"] >= 2 && domains["Integral"] >= 2);
}

/// Fails with a missing toolchain after `budget` statements.
struct Dying {
    inner: SyntaxMockCompiler,
    budget: AtomicUsize,
}

impl Compiler for Dying {
    fn check(&self, stmt: &str) -> Result<CompileResult, ToolchainError> {
        if self.budget.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |b| b.checked_sub(1)).is_err() {
            return Err(ToolchainError::Missing("lake vanished".into()));
        }
        self.inner.check(stmt)
    }

    fn toolchain(&self) -> String {
        "dying".into()
    }
}

#[test]
fn resume_after_interrupt_matches_an_uninterrupted_run() {
    let clean = tempfile::tempdir().unwrap();
    let reference = run_pipeline(&mock_cfg(clean.path())).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let cfg = mock_cfg(dir.path());
    let client = LlmClient::new(LlmEndpointConfig::default(), Arc::new(SyntheticTransport));
    let dying = Backends {
        client: client.clone(),
        judge: client.clone(),
        compiler: Arc::new(Dying {
            inner: SyntaxMockCompiler {
                options: leanaug::lean::ParseOptions::lenient(),
            },
            budget: AtomicUsize::new(40),
        }),
    };
    let err = run_with(&cfg, seeds(), &dying).unwrap_err();
    assert!(matches!(err, PipelineError::Toolchain(ToolchainError::Missing(_))));
    let journal = std::fs::read_to_string(cfg.checkpoint_path()).unwrap();
    assert_eq!(journal.lines().count(), 1 + 3, "header plus the first chunk");

    let resumed = run_pipeline(&cfg).unwrap();
    assert_eq!(resumed.resumed_seeds, 3);
    assert_eq!(resumed.records, reference.records);
    assert_eq!(resumed.stats, reference.stats);
}

#[test]
fn journal_from_another_config_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = mock_cfg(dir.path());
    run_pipeline(&cfg).unwrap();
    let other = PipelineConfig {
        rng_seed: 8,
        ..cfg.clone()
    };
    assert!(matches!(run_pipeline(&other), Err(PipelineError::Journal { .. })));
    let fresh = PipelineConfig { resume: false, ..other };
    run_pipeline(&fresh).unwrap();
}

#[test]
fn fixture_transport_without_a_reply_skips_the_call() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        mock: MockConfig {
            enabled: true,
            fixtures: Some(fixture("case_study")),
        },
        ..mock_cfg(dir.path())
    };
    let backends = Backends {
        client: LlmClient::new(
            LlmEndpointConfig {
                max_retries: 0,
                ..LlmEndpointConfig::default()
            },
            Arc::new(FixtureTransport::new(fixture("case_study"))),
        ),
        ..Backends::from_config(&cfg).unwrap()
    };
    let out = run_with(&cfg, seeds(), &backends).unwrap();
    // difficulty prompts have no fixture
    assert_eq!(out.stats.generation.skipped, 20);
    out.stats.check_conservation().unwrap();
}

fn statement(name: &str, body: &str) -> String {
    format!("theorem {name} {body} := by sorry")
}

#[test]
fn decontamination_cases() {
    let bench = [("b1", statement("orig", "(x y : ℝ) (h : x < y) : x + 1 < y + 1"))];
    let index = BenchmarkIndex::new(bench.iter().map(|(i, s)| (*i, s.as_str())));
    let corpus = vec![
        ("renamed", statement("copy", "(a b : ℝ) (hab : a < b) : a + 1 < b + 1")),
        ("commuted", statement("comm", "(x y : ℝ) (h : x < y) : 1 + x < y + 1")),
        ("other", statement("other", "(x : ℝ) : x = x")),
    ];
    let (kept, report) = decontaminate(corpus, |c| c.0, |c| c.1.as_str(), &index);
    assert_eq!(report.drops.len(), 1);
    assert_eq!(report.drops[0].corpus_id, "renamed");
    assert_eq!(kept.len(), 2);
    assert_eq!(report.near_duplicates.len(), 1);
    assert_eq!(report.near_duplicates[0].corpus_id, "commuted");

    let disjoint = vec![("x", statement("x", "(n : ℕ) : n = n"))];
    assert!(decontaminate(disjoint, |c| c.0, |c| c.1.as_str(), &index).1.drops.is_empty());
}

#[test]
fn unparseable_benchmarks_compare_by_text() {
    let weird = "theorem w (f : ℕ → ℕ) : f = fun x => x := by sorry";
    assert!(parse_statement(weird).is_err());
    let index = BenchmarkIndex::new([("bw", weird)]);
    let respaced = "theorem renamed  (f : ℕ → ℕ) :\n  f = fun x => x := by sorry";
    let (_, report) = decontaminate(vec![respaced], |_| "c", |c| c, &index);
    assert_eq!(report.drops.len(), 1);
}

#[test]
fn stats_histograms() {
    let rec = |id: &str, d: Option<&str>| DatasetRecord {
        id: id.into(),
        formal_statement: statement(id, "(x : ℝ) : x = x"),
        nl_description: None,
        source: "t".into(),
        domain: d.map(str::to_string),
    };
    let corpus = vec![rec("a", Some("Algebra")), rec("b", Some("Algebra")), rec("c", Some("Algebra")), rec("d", Some("Geometry"))];
    let s = corpus_stats(&corpus, None).unwrap();
    assert_eq!(s.histogram, BTreeMap::from([("Algebra".to_string(), 3), ("Geometry".to_string(), 1)]));
    assert!(corpus_stats(&[], None).unwrap().histogram.is_empty());

    let after = vec![rec("a", Some("Algebra")), rec("e", Some("Integral")), rec("f", None)];
    let deltas = domain_deltas(&s.histogram, &corpus_stats(&after, None).unwrap().histogram);
    let names: Vec<&str> = deltas.iter().map(|d| d.domain.as_str()).collect();
    assert_eq!(names, ["Algebra", "Geometry", "Integral", UNLABELED]);
    assert_eq!((deltas[0].before, deltas[0].after), (3, 1));
}

#[test]
fn classifier_labels_the_unlabeled() {
    let client = LlmClient::new(LlmEndpointConfig::default(), Arc::new(SyntheticTransport));
    let corpus = seeds();
    let domains = leanaug::llm::DomainList::default();
    let s = corpus_stats(&corpus, Some((&client, &domains))).unwrap();
    assert_eq!(s.classified.len(), corpus.iter().filter(|r| r.domain.is_none()).count());
    assert!(!s.histogram.contains_key(UNLABELED));
    assert_eq!(s.histogram.values().sum::<usize>(), corpus.len());
}

fn arb_corpus() -> impl Strategy<Value = Vec<String>> {
    let names = prop::sample::select(vec!["a", "b", "c"]);
    let rhs = prop::sample::select(vec!["1", "2", "x", "x + 1"]);
    prop::collection::vec((names, rhs), 0..20)
        .prop_map(|v| v.into_iter().map(|(n, r)| statement(n, &format!("(x : ℝ) : x = {r}"))).collect())
}

proptest! {
    #[test]
    fn dedup_is_idempotent(corpus in arb_corpus()) {
        let none = HashSet::new();
        let (once, _) = dedup_by_key(corpus, |s| s.as_str(), &none);
        let (twice, dropped) = dedup_by_key(once.clone(), |s| s.as_str(), &none);
        prop_assert_eq!(&twice, &once);
        prop_assert!(dropped.is_empty());
        prop_assert!(once.len() <= 4);
    }
}
