use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use leanaug::engine::{enumerate_closure, Engine, DEFAULT_CLOSURE_LIMIT};
use leanaug::lean::{parse_statement_with, print_statement, ParseOptions};
use leanaug::llm::{difficulty_schedule, evolve_difficulty, evolve_domain, DifficultyStrategy, DomainList, LlmOutcome};
use leanaug::pipeline::{
    compiler, corpus_stats, decontaminate, domain_deltas, ingest, llm_clients, load_benchmarks, render_delta_table,
    run_pipeline, seed_rng, sibling, write_review_csv, BenchmarkIndex, DatasetRecord, InputFormat, OutputRecord,
    PipelineConfig, SCHEMA_VERSION,
};
use leanaug::rewrite::{RuleId, RuleRegistry};
use leanaug::verify::{Final, Verifier, VerifyItem};

#[derive(Parser)]
#[command(name = "leanaug", version, about = "Augment Lean 4 theorem statements")]
struct Cli {
    /// Pipeline config, TOML or JSON.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use the offline compiler and model.
    #[arg(long, global = true)]
    mock: bool,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file; stdout when omitted (except for `run`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse statements and check that print and re-parse give the same tree.
    Parse {
        input: PathBuf,
        /// Print the canonical form of each statement.
        #[arg(long)]
        print: bool,
    },
    /// Equivalence-preserving rewrites of each statement.
    EvolveAst {
        input: PathBuf,
        /// Variants per statement.
        #[arg(long)]
        variants: Option<usize>,
        /// Per-node firing probability.
        #[arg(long)]
        probability: Option<f64>,
        /// Comma-separated rule names.
        #[arg(long, value_delimiter = ',')]
        rules: Vec<RuleId>,
        /// List every statement reachable within this many rewrites instead.
        #[arg(long)]
        closure: Option<usize>,
    },
    /// Cross-domain variants from the model.
    EvolveDomain {
        input: PathBuf,
        /// Comma-separated target domains.
        #[arg(long, value_delimiter = ',')]
        domains: Vec<String>,
    },
    /// Harder or easier variants from the model.
    EvolveDifficulty {
        input: PathBuf,
        /// Strategy label such as `s2+` or `s4-`; repeatable. Round-robin
        /// over all ten when omitted.
        #[arg(long = "strategy")]
        strategies: Vec<DifficultyStrategy>,
        /// Model calls per statement.
        #[arg(long, default_value_t = 2)]
        per_seed: usize,
    },
    /// Compile check, repair and judging of (statement, description) pairs.
    Verify {
        input: PathBuf,
        /// Reject compile failures without asking for a repair.
        #[arg(long)]
        no_repair: bool,
    },
    /// The full pipeline.
    Run {
        /// Seed corpus; overrides the config.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Ignore an existing checkpoint.
        #[arg(long)]
        fresh: bool,
    },
    /// Domain histogram of a corpus.
    Stats {
        corpus: PathBuf,
        /// Corpus to compare against.
        #[arg(long)]
        before: Option<PathBuf>,
        /// Label unlabeled records with the model.
        #[arg(long)]
        classify: bool,
        /// Where to write the classifier's labels for review (csv).
        #[arg(long)]
        review: Option<PathBuf>,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Drop records that duplicate benchmark statements.
    Decontaminate {
        corpus: PathBuf,
        /// Benchmark corpus (jsonl, .lean file or directory); repeatable.
        #[arg(long = "benchmark", required = true)]
        benchmarks: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::read(p)?,
        None => PipelineConfig::default(),
    };
    if cli.mock {
        cfg.mock.enabled = true;
    }
    if let Some(s) = cli.seed {
        cfg.rng_seed = s;
        cfg.engine.rng_seed = s;
    }
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    if let Some(j) = cfg.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().ok();
    }
    Ok(cfg)
}

fn records(path: &Path) -> Result<Vec<DatasetRecord>> {
    let got = ingest(path, InputFormat::detect(path))?;
    if !got.skipped.is_empty() {
        eprintln!("{}: skipped {} malformed entries", path.display(), got.skipped.len());
    }
    Ok(got.records)
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: Serialize>(w: &mut dyn Write, item: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, item)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let mut cfg = load_config(&cli)?;
    let out = cli.out.as_deref();
    match &cli.cmd {
        Cmd::Parse { input, print } => parse_cmd(input, *print, out),
        Cmd::EvolveAst {
            input,
            variants,
            probability,
            rules,
            closure,
        } => {
            if let Some(v) = variants {
                cfg.engine.variants_per_statement = *v;
            }
            if let Some(p) = probability {
                cfg.engine.probability = *p;
            }
            if !rules.is_empty() {
                cfg.engine.enabled_rules = rules.clone();
            }
            cfg.engine.validate()?;
            evolve_ast_cmd(&cfg, input, *closure, out)
        }
        Cmd::EvolveDomain { input, domains } => {
            if !domains.is_empty() {
                cfg.domains = DomainList::try_from(domains.clone())?;
            }
            let (client, _) = llm_clients(&cfg)?;
            let mut w = sink(out)?;
            for seed in records(input)? {
                let rng = seed_rng(cfg.rng_seed, &seed.id);
                let r = evolve_domain(&client, &seed.id, &seed.formal_statement, &cfg.domains, seed.domain.as_deref(), rng);
                write_outcome(&mut *w, &seed, "domain0", r)?;
            }
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::EvolveDifficulty {
            input,
            strategies,
            per_seed,
        } => {
            let (client, _) = llm_clients(&cfg)?;
            let mut w = sink(out)?;
            for (i, seed) in records(input)?.iter().enumerate() {
                let plan = if strategies.is_empty() {
                    difficulty_schedule(i, *per_seed)
                } else {
                    strategies.clone()
                };
                let rng = seed_rng(cfg.rng_seed, &seed.id);
                for (c, s) in plan.into_iter().enumerate() {
                    let r = evolve_difficulty(&client, &seed.id, &seed.formal_statement, s, rng);
                    write_outcome(&mut *w, seed, &format!("difficulty{c}"), r)?;
                }
            }
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { input, no_repair } => {
            if *no_repair {
                cfg.verify.repair = false;
            }
            verify_cmd(&cfg, input, out)
        }
        Cmd::Run { input, fresh } => {
            if let Some(i) = input {
                cfg.input = i.clone();
            }
            if let Some(o) = out {
                cfg.output = o.to_path_buf();
            }
            if *fresh {
                cfg.resume = false;
            }
            cfg.validate()?;
            let result = run_pipeline(&cfg)?;
            eprint!("{}", result.stats.render_table());
            if let Err(e) = result.stats.check_conservation() {
                bail!("funnel counts do not balance: {e}");
            }
            eprintln!(
                "wrote {} records to {} (stats: {})",
                result.records.len(),
                cfg.output.display(),
                cfg.stats_path().display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Stats {
            corpus,
            before,
            classify,
            review,
            json,
        } => {
            let clients = if *classify { Some(llm_clients(&cfg)?.1) } else { None };
            let classifier = clients.as_ref().map(|c| (c, &cfg.domains));
            let after = corpus_stats(&records(corpus)?, classifier)?;
            if let Some(path) = review {
                write_review_csv(fs::File::create(path)?, &after.classified)?;
            }
            let before = match before {
                Some(b) => Some(corpus_stats(&records(b)?, classifier)?),
                None => None,
            };
            let mut w = sink(out)?;
            match (json, &before) {
                (true, None) => emit(&mut *w, &after)?,
                (true, Some(b)) => emit(&mut *w, &domain_deltas(&b.histogram, &after.histogram))?,
                (false, None) => {
                    for (d, n) in &after.histogram {
                        writeln!(w, "{d:<26}{n:>8}")?;
                    }
                    writeln!(w, "{:<26}{:>8}", "total", after.records)?;
                }
                (false, Some(b)) => write!(w, "{}", render_delta_table(&domain_deltas(&b.histogram, &after.histogram)))?,
            }
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Decontaminate { corpus, benchmarks } => decontaminate_cmd(corpus, benchmarks, out),
    }
}

fn parse_cmd(input: &Path, print: bool, out: Option<&Path>) -> Result<ExitCode> {
    let opts = ParseOptions::default();
    let mut w = sink(out)?;
    let mut failed = 0;
    let all = records(input)?;
    for r in &all {
        let verdict = parse_statement_with(&r.formal_statement, &opts).map_err(|e| e.to_string()).and_then(|s| {
            let printed = print_statement(&s);
            match parse_statement_with(&printed, &opts) {
                Ok(again) if again == s => Ok(printed),
                Ok(_) => Err("re-parsed tree differs".to_string()),
                Err(e) => Err(format!("printed form does not parse: {e}")),
            }
        });
        match verdict {
            Ok(printed) if print => writeln!(w, "{printed}")?,
            Ok(_) => writeln!(w, "ok   {}", r.id)?,
            Err(e) => {
                failed += 1;
                writeln!(w, "FAIL {}: {}", r.id, e.replace('\n', " "))?;
            }
        }
    }
    w.flush()?;
    eprintln!("{} statements, {} failed", all.len(), failed);
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn evolve_ast_cmd(cfg: &PipelineConfig, input: &Path, closure: Option<usize>, out: Option<&Path>) -> Result<ExitCode> {
    let engine = Engine::new(RuleRegistry::builtin());
    let opts = ParseOptions::lenient();
    let mut w = sink(out)?;
    let mut failed = 0;
    for r in records(input)? {
        let stmt = match parse_statement_with(&r.formal_statement, &opts) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("{}: {e}", r.id);
                failed += 1;
                continue;
            }
        };
        match closure {
            Some(depth) => {
                let rules = engine.registry().select(&cfg.engine.enabled_rules)?;
                let c = enumerate_closure(&stmt, &rules, depth, DEFAULT_CLOSURE_LIMIT)?;
                if c.truncated {
                    eprintln!("{}: closure truncated at {} statements", r.id, c.statements.len());
                }
                for (i, s) in c.statements.iter().enumerate() {
                    emit(
                        &mut *w,
                        &serde_json::json!({ "id": format!("{}#closure{i}", r.id), "formal_statement": s.to_string() }),
                    )?;
                }
            }
            None => {
                for rec in engine.evolve(&r.id, &stmt, &cfg.engine)? {
                    emit(&mut *w, &rec)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn write_outcome(
    w: &mut dyn Write,
    seed: &DatasetRecord,
    tag: &str,
    result: Result<LlmOutcome, leanaug::llm::LlmError>,
) -> Result<()> {
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}: {tag} call failed: {e}", seed.id);
            return Ok(());
        }
    };
    for d in &outcome.diagnostics {
        eprintln!("{}: line {}: {}", seed.id, d.line, d.message);
    }
    for (k, p) in outcome.pairs.into_iter().enumerate() {
        let domain = p.variant.domain.clone().or_else(|| seed.domain.clone());
        emit(
            w,
            &OutputRecord {
                schema_version: SCHEMA_VERSION,
                id: format!("{}#{tag}.{k}", seed.id),
                formal_statement: p.variant.formal_statement,
                nl_description: Some(p.variant.nl_description).filter(|s| !s.is_empty()),
                domain,
                provenance: p.record,
                verification: None,
            },
        )?;
    }
    Ok(())
}

fn verify_cmd(cfg: &PipelineConfig, input: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let (_, judge) = llm_clients(cfg)?;
    let verifier = Verifier::new(compiler(cfg)?, &judge, cfg.verify.clone());
    let items: Vec<VerifyItem> = records(input)?
        .into_iter()
        .map(|r| VerifyItem {
            downward: false,
            id: r.id,
            nl: r.nl_description.unwrap_or_default(),
            statement: r.formal_statement,
        })
        .collect();
    let reports = verifier.verify_batch(&items)?;
    let mut w = sink(out)?;
    let (mut acc, mut rej, mut skip) = (0, 0, 0);
    for r in &reports {
        match r.outcome {
            Final::Accepted => acc += 1,
            Final::Rejected { .. } => rej += 1,
            Final::Skipped { .. } => skip += 1,
        }
        emit(&mut *w, r)?;
    }
    w.flush()?;
    eprintln!("{} pairs: {acc} accepted, {rej} rejected, {skip} skipped", reports.len());
    Ok(ExitCode::SUCCESS)
}

/// Keeps the corpus lines verbatim so output records survive unchanged.
fn decontaminate_cmd(corpus: &Path, benchmarks: &[PathBuf], out: Option<&Path>) -> Result<ExitCode> {
    let bench = load_benchmarks(benchmarks)?;
    let index = BenchmarkIndex::new(bench.iter().map(|b| (b.id.as_str(), b.formal_statement.as_str())));
    let lines: Vec<(String, String, String)> = match InputFormat::detect(corpus) {
        InputFormat::Jsonl => {
            let text = fs::read_to_string(corpus).with_context(|| format!("cannot read {}", corpus.display()))?;
            let mut v = Vec::new();
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let value: serde_json::Value = match serde_json::from_str(line) {
                    Ok(v) => v,
                    Err(e) => {
                        eprintln!("line {}: {e}", i + 1);
                        continue;
                    }
                };
                let field = |k: &str| value.get(k).and_then(|x| x.as_str()).map(str::to_string);
                match (field("id"), field("formal_statement")) {
                    (Some(id), Some(stmt)) => v.push((id, stmt, line.to_string())),
                    _ => eprintln!("line {}: missing id or formal_statement", i + 1),
                }
            }
            v
        }
        _ => records(corpus)?
            .into_iter()
            .map(|r| {
                let line = serde_json::to_string(&r).expect("record serializes");
                (r.id, r.formal_statement, line)
            })
            .collect(),
    };
    let total = lines.len();
    let (kept, report) = decontaminate(lines, |l| l.0.as_str(), |l| l.1.as_str(), &index);
    let mut w = sink(out)?;
    for (_, _, line) in &kept {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    let report_json = serde_json::to_string_pretty(&report)?;
    match out {
        Some(o) => fs::write(sibling(o, ".drops.json"), report_json + "\n")?,
        None => eprintln!("{report_json}"),
    }
    eprintln!(
        "{total} records, {} dropped, {} near duplicates",
        report.drops.len(),
        report.near_duplicates.len()
    );
    Ok(ExitCode::SUCCESS)
}
