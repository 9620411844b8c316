use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConfigError, PipelineConfig, SCHEMA_VERSION};
use super::corpus::{decontaminate, dedup_by_key, keyed, parse_lenient, BenchmarkIndex, Contamination};
use super::record::{ingest, DatasetRecord, InputFormat, IngestError};
use super::stats::{histogram, FunnelStats};
use crate::engine::{splitmix64, Engine, EngineConfig, EvolutionRecord, Status};
use crate::llm::{
    difficulty_schedule, evolve_difficulty, evolve_domain, Direction, FixtureTransport, LlmClient, LlmEndpointConfig, LlmError,
    LlmOutcome, SyntheticTransport, Variant,
};
use crate::verify::{
    Aspect, Compiler, Final, LeanCompiler, SyntaxMockCompiler, ToolchainError, Verdict, VerificationReport, Verifier,
    VerifyItem,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Toolchain(#[from] ToolchainError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("checkpoint {path}: {message}")]
    Journal { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Where the compiler and the model come from.
pub struct Backends {
    pub client: LlmClient,
    /// Used for judging and repair.
    pub judge: LlmClient,
    pub compiler: Arc<dyn Compiler>,
}

impl Backends {
    pub fn from_config(cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        let (client, judge) = llm_clients(cfg)?;
        Ok(Backends {
            client,
            judge,
            compiler: compiler(cfg)?,
        })
    }
}

/// Evolution and judge clients: canned in mock mode, HTTP otherwise.
pub fn llm_clients(cfg: &PipelineConfig) -> Result<(LlmClient, LlmClient), PipelineError> {
    if cfg.mock.enabled {
        // offline transports are not throttled
        let unthrottled = |c: &LlmEndpointConfig| LlmEndpointConfig {
            requests_per_minute: None,
            ..c.clone()
        };
        let llm = unthrottled(&cfg.llm);
        let client = match &cfg.mock.fixtures {
            Some(dir) => LlmClient::new(llm.clone(), Arc::new(FixtureTransport::new(dir))),
            None => LlmClient::new(llm.clone(), Arc::new(SyntheticTransport)),
        };
        let judge = client.with_config(cfg.judge_llm.as_ref().map_or(llm, unthrottled));
        return Ok((client, judge));
    }
    let client = LlmClient::http(cfg.llm.clone())?;
    let judge = match &cfg.judge_llm {
        Some(j) => LlmClient::http(j.clone())?,
        None => client.clone(),
    };
    Ok((client, judge))
}

/// The parser-only compiler in mock mode, Lean otherwise.
pub fn compiler(cfg: &PipelineConfig) -> Result<Arc<dyn Compiler>, PipelineError> {
    if cfg.mock.enabled {
        return Ok(Arc::new(SyntaxMockCompiler {
            options: crate::lean::ParseOptions::lenient(),
        }));
    }
    Ok(Arc::new(LeanCompiler::new(cfg.lean.clone())?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationSummary {
    #[serde(flatten)]
    pub outcome: Final,
    pub compiled: bool,
    pub repaired: bool,
    pub verdicts: BTreeMap<Aspect, Verdict>,
}

impl From<&VerificationReport> for VerificationSummary {
    fn from(r: &VerificationReport) -> Self {
        VerificationSummary {
            outcome: r.outcome.clone(),
            compiled: r.compiled_ok(),
            repaired: r.repaired.as_ref().is_some_and(|x| x.repaired_statement.is_some()),
            verdicts: r.verdicts.iter().map(|v| (v.aspect, v.verdict)).collect(),
        }
    }
}

/// One line of the output corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub schema_version: u32,
    pub id: String,
    pub formal_statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nl_description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    pub provenance: EvolutionRecord,
    /// Absent for AST variants, which are not re-verified.
    pub verification: Option<VerificationSummary>,
}

/// Everything a finished seed contributed; one journal line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SeedResult {
    seed_id: String,
    outputs: Vec<OutputRecord>,
    stats: FunnelStats,
}

#[derive(Debug, Serialize, Deserialize)]
struct JournalHeader {
    journal_schema: u32,
    config_sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<OutputRecord>,
    pub stats: FunnelStats,
    pub contamination: Contamination,
    /// Seeds taken from the checkpoint instead of being processed.
    pub resumed_seeds: usize,
}

/// Per-seed random stream, independent of the seed's position.
pub fn seed_rng(global: u64, seed_id: &str) -> u64 {
    derive(global, seed_id)
}

fn derive(seed: u64, salt: &str) -> u64 {
    let h = crate::llm::sha256_hex(salt);
    let v = u64::from_str_radix(&h[..16], 16).expect("hex digest");
    splitmix64(seed ^ v)
}

/// Keeps `n` seeds chosen uniformly, in input order.
pub fn sample_seeds(seeds: Vec<DatasetRecord>, n: usize, rng_seed: u64) -> Vec<DatasetRecord> {
    if n >= seeds.len() {
        return seeds;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut picked = rand::seq::index::sample(&mut rng, seeds.len(), n).into_vec();
    picked.sort_unstable();
    let mut seeds: Vec<Option<DatasetRecord>> = seeds.into_iter().map(Some).collect();
    picked.into_iter().filter_map(|i| seeds[i].take()).collect()
}

/// Hash of everything that affects the output; a checkpoint is reused only
/// under the same fingerprint.
fn fingerprint(cfg: &PipelineConfig) -> String {
    let mut c = cfg.clone();
    c.output = PathBuf::new();
    c.checkpoint = None;
    c.resume = true;
    c.jobs = None;
    c.chunk_size = 1;
    crate::llm::sha256_hex(&serde_json::to_string(&c).expect("config serializes"))
}

pub fn load_benchmarks(paths: &[PathBuf]) -> Result<Vec<DatasetRecord>, PipelineError> {
    let mut out = Vec::new();
    for p in paths {
        let got = ingest(p, InputFormat::detect(p))?;
        out.extend(got.records);
    }
    Ok(out)
}

/// Ingests, runs, and writes corpus, stats and drop list.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    cfg.validate()?;
    let backends = Backends::from_config(cfg)?;
    let seeds = ingest(&cfg.input, cfg.input_format())?.records;
    let out = run_with(cfg, seeds, &backends)?;
    write_outputs(cfg, &out)?;
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for item in items {
        let line = serde_json::to_string(item).expect("records serialize");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_outputs(cfg: &PipelineConfig, out: &RunOutput) -> Result<(), PipelineError> {
    write_jsonl(&cfg.output, &out.records)?;
    let stats = cfg.stats_path();
    fs::write(&stats, serde_json::to_string_pretty(&out.stats).expect("stats serialize") + "\n")
        .map_err(io_err(&stats))?;
    if !cfg.benchmarks.is_empty() {
        let drops = super::config::sibling(&cfg.output, ".decontamination.json");
        let text = serde_json::to_string_pretty(&out.contamination).expect("drops serialize") + "\n";
        fs::write(&drops, text).map_err(io_err(&drops))?;
    }
    Ok(())
}

struct Journal {
    path: PathBuf,
    done: HashMap<String, SeedResult>,
    writer: BufWriter<File>,
}

impl Journal {
    fn open(cfg: &PipelineConfig) -> Result<Journal, PipelineError> {
        let path = cfg.checkpoint_path();
        let fp = fingerprint(cfg);
        let bad = |message: String| PipelineError::Journal {
            path: path.clone(),
            message,
        };
        let mut done = HashMap::new();
        let resume = cfg.resume && path.exists();
        if resume {
            let reader = BufReader::new(File::open(&path).map_err(io_err(&path))?);
            let mut lines = reader.lines();
            let header: JournalHeader = match lines.next() {
                Some(l) => serde_json::from_str(&l.map_err(io_err(&path))?).map_err(|e| bad(e.to_string()))?,
                None => JournalHeader {
                    journal_schema: SCHEMA_VERSION,
                    config_sha256: fp.clone(),
                },
            };
            if header.config_sha256 != fp {
                return Err(bad("written under a different configuration; delete it or disable resume".into()));
            }
            for line in lines {
                let line = line.map_err(io_err(&path))?;
                // a torn last line from an interrupted write is ignored
                if let Ok(r) = serde_json::from_str::<SeedResult>(&line) {
                    done.insert(r.seed_id.clone(), r);
                }
            }
        }
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        // rewrite so that a torn line never sits in the middle
        let mut writer = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
        let header = JournalHeader {
            journal_schema: SCHEMA_VERSION,
            config_sha256: fp,
        };
        writeln!(writer, "{}", serde_json::to_string(&header).expect("header serializes")).map_err(io_err(&path))?;
        let mut kept: Vec<&SeedResult> = done.values().collect();
        kept.sort_by(|a, b| a.seed_id.cmp(&b.seed_id));
        for r in kept {
            writeln!(writer, "{}", serde_json::to_string(r).expect("journal serializes")).map_err(io_err(&path))?;
        }
        writer.flush().map_err(io_err(&path))?;
        drop(writer);
        let file = OpenOptions::new().append(true).open(&path).map_err(io_err(&path))?;
        Ok(Journal {
            path,
            done,
            writer: BufWriter::new(file),
        })
    }

    fn append(&mut self, results: &[SeedResult]) -> Result<(), PipelineError> {
        for r in results {
            let line = serde_json::to_string(r).expect("journal serializes");
            writeln!(self.writer, "{line}").map_err(io_err(&self.path))?;
        }
        self.writer.flush().map_err(io_err(&self.path))
    }
}

/// Runs the three phases over `seeds` with the given backends. Finished
/// seeds are journaled; a rerun with the same config picks up from there.
pub fn run_with(cfg: &PipelineConfig, seeds: Vec<DatasetRecord>, backends: &Backends) -> Result<RunOutput, PipelineError> {
    cfg.validate()?;
    let seeds = match cfg.sample {
        Some(n) => sample_seeds(seeds, n, cfg.rng_seed),
        None => seeds,
    };
    let mut stats = FunnelStats {
        seeds_in: seeds.len(),
        domains_before: histogram(seeds.iter().map(|s| s.domain.as_deref())),
        ..FunnelStats::default()
    };
    let bench = load_benchmarks(&cfg.benchmarks)?;
    let index = BenchmarkIndex::new(bench.iter().map(|b| (b.id.as_str(), b.formal_statement.as_str())));
    let (seeds, mut contamination) =
        decontaminate(seeds, |s| s.id.as_str(), |s| s.formal_statement.as_str(), &index);
    stats.seeds_contaminated = contamination.drops.len();

    let mut journal = Journal::open(cfg)?;
    let resumed_seeds = seeds.iter().filter(|s| journal.done.contains_key(&s.id)).count();
    let todo: Vec<(usize, &DatasetRecord)> =
        seeds.iter().enumerate().filter(|(_, s)| !journal.done.contains_key(&s.id)).collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let verifier = Verifier::new(Arc::clone(&backends.compiler), &backends.judge, cfg.verify.clone());
    for chunk in todo.chunks(cfg.chunk_size) {
        let results = pool.install(|| process_chunk(cfg, backends, &verifier, chunk))?;
        journal.append(&results)?;
        for r in results {
            journal.done.insert(r.seed_id.clone(), r);
        }
    }

    let mut records = Vec::new();
    for s in &seeds {
        let r = &journal.done[&s.id];
        stats.absorb(&r.stats);
        records.extend(r.outputs.iter().cloned());
    }
    if cfg.dedup {
        let reference: HashSet<_> = seeds.iter().map(|s| keyed(&s.formal_statement).key).collect();
        let (kept, dropped) = dedup_by_key(records, |r| r.formal_statement.as_str(), &reference);
        stats.dedup_drops = dropped.len();
        records = kept;
    }
    let (records, out_contamination) =
        decontaminate(records, |r| r.id.as_str(), |r| r.formal_statement.as_str(), &index);
    stats.decontamination_drops = out_contamination.drops.len();
    stats.near_duplicates = contamination.near_duplicates.len() + out_contamination.near_duplicates.len();
    contamination.drops.extend(out_contamination.drops);
    contamination.near_duplicates.extend(out_contamination.near_duplicates);
    stats.output_records = records.len();
    stats.domains_after = histogram(records.iter().map(|r| r.domain.as_deref()));
    Ok(RunOutput {
        records,
        stats,
        contamination,
        resumed_seeds,
    })
}

/// A generated pair waiting for verification.
struct Pending {
    id: String,
    variant: Variant,
    record: EvolutionRecord,
    downward: bool,
}

struct Generated {
    pending: Vec<Pending>,
    stats: FunnelStats,
}

fn generate(cfg: &PipelineConfig, client: &LlmClient, index: usize, seed: &DatasetRecord) -> Generated {
    let rng = seed_rng(cfg.rng_seed, &seed.id);
    let mut out = Generated {
        pending: Vec::new(),
        stats: FunnelStats::default(),
    };
    let mut take = |tag: String, result: Result<LlmOutcome, LlmError>, downward: bool| match result {
        Ok(o) => {
            out.stats.tally_call(Some(o.pairs.len()), o.diagnostics.len());
            for (k, p) in o.pairs.into_iter().enumerate() {
                out.pending.push(Pending {
                    id: format!("{}#{tag}.{k}", seed.id),
                    variant: p.variant,
                    record: p.record,
                    downward,
                });
            }
        }
        Err(e) => {
            tracing::warn!(seed = %seed.id, "{tag} call failed: {e}");
            out.stats.tally_call(None, 0);
        }
    };
    if cfg.methods.domain {
        for c in 0..cfg.domain_calls_per_seed {
            let r = evolve_domain(client, &seed.id, &seed.formal_statement, &cfg.domains, seed.domain.as_deref(), rng);
            take(format!("domain{c}"), r, false);
        }
    }
    if cfg.methods.difficulty {
        for (c, s) in difficulty_schedule(index, cfg.difficulty_calls_per_seed).into_iter().enumerate() {
            let r = evolve_difficulty(client, &seed.id, &seed.formal_statement, s, rng);
            take(format!("difficulty{c}"), r, s.direction() == Direction::Down);
        }
    }
    out
}

fn ast_variants(
    cfg: &PipelineConfig,
    parent: &OutputRecord,
    seed_id: &str,
    parent_id: Option<&str>,
    rng_seed: u64,
    stats: &mut FunnelStats,
) -> Vec<OutputRecord> {
    stats.ast.inputs += 1;
    let Some(stmt) = parse_lenient(&parent.formal_statement) else {
        stats.ast.parse_failures += 1;
        return Vec::new();
    };
    let ecfg = EngineConfig {
        rng_seed,
        ..cfg.engine.clone()
    };
    let records = match Engine::default().evolve(seed_id, &stmt, &ecfg) {
        Ok(r) => r,
        Err(e) => {
            tracing::warn!(id = %parent.id, "AST evolution failed: {e}");
            stats.ast.parse_failures += 1;
            return Vec::new();
        }
    };
    stats.ast.variants += records.len();
    records
        .into_iter()
        .enumerate()
        .map(|(j, mut rec)| {
            rec.parent_id = parent_id.map(str::to_string);
            rec.status = Status::Verified;
            OutputRecord {
                schema_version: SCHEMA_VERSION,
                id: format!("{}#ast{j}", parent.id),
                formal_statement: rec.output.clone(),
                nl_description: parent.nl_description.clone(),
                domain: parent.domain.clone(),
                provenance: rec,
                verification: None,
            }
        })
        .collect()
}

fn process_chunk(
    cfg: &PipelineConfig,
    backends: &Backends,
    verifier: &Verifier,
    chunk: &[(usize, &DatasetRecord)],
) -> Result<Vec<SeedResult>, PipelineError> {
    let generated: Vec<Generated> = chunk
        .par_iter()
        .map(|(i, seed)| generate(cfg, &backends.client, *i, seed))
        .collect();
    let items: Vec<VerifyItem> = generated
        .iter()
        .flat_map(|g| &g.pending)
        .map(|p| VerifyItem {
            id: p.id.clone(),
            nl: p.variant.nl_description.clone(),
            statement: p.variant.formal_statement.clone(),
            downward: p.downward,
        })
        .collect();
    let mut reports = verifier.verify_batch(&items)?.into_iter();
    let per_seed: Vec<(Generated, Vec<VerificationReport>)> = generated
        .into_iter()
        .map(|g| {
            let n = g.pending.len();
            (g, reports.by_ref().take(n).collect())
        })
        .collect();
    let results = chunk
        .par_iter()
        .zip(per_seed.into_par_iter())
        .map(|((_, seed), (g, reports))| finish_seed(cfg, seed, g, reports))
        .collect();
    Ok(results)
}

fn finish_seed(cfg: &PipelineConfig, seed: &DatasetRecord, g: Generated, reports: Vec<VerificationReport>) -> SeedResult {
    let rng = seed_rng(cfg.rng_seed, &seed.id);
    let mut stats = g.stats;
    let mut outputs = Vec::new();
    for (p, report) in g.pending.into_iter().zip(&reports) {
        stats.tally_report(report);
        if !report.outcome.is_accepted() {
            continue;
        }
        let domain = match p.record.method {
            crate::engine::Method::Domain => p.variant.domain.clone(),
            _ => seed.domain.clone(),
        };
        let mut record = p.record;
        record.output = report.statement.clone();
        record.status = Status::Verified;
        let accepted = OutputRecord {
            schema_version: SCHEMA_VERSION,
            id: p.id.clone(),
            formal_statement: report.statement.clone(),
            nl_description: Some(p.variant.nl_description).filter(|s| !s.is_empty()),
            domain,
            provenance: record,
            verification: Some(report.into()),
        };
        let children = if cfg.methods.ast {
            ast_variants(cfg, &accepted, &seed.id, Some(&p.id), derive(rng, &p.id), &mut stats)
        } else {
            Vec::new()
        };
        outputs.push(accepted);
        outputs.extend(children);
    }
    if cfg.methods.ast && cfg.ast_on_seeds {
        let as_output = OutputRecord {
            schema_version: SCHEMA_VERSION,
            id: seed.id.clone(),
            formal_statement: seed.formal_statement.clone(),
            nl_description: seed.nl_description.clone(),
            domain: seed.domain.clone(),
            provenance: EvolutionRecord {
                seed_statement_id: seed.id.clone(),
                parent_id: None,
                method: crate::engine::Method::Ast,
                applications: Vec::new(),
                llm: None,
                rng_seed: rng,
                output: seed.formal_statement.clone(),
                status: Status::Verified,
            },
            verification: None,
        };
        outputs.extend(ast_variants(cfg, &as_output, &seed.id, None, rng, &mut stats));
    }
    SeedResult {
        seed_id: seed.id.clone(),
        outputs,
        stats,
    }
}
