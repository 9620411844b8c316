use super::client::{LlmClient, LlmError};
use super::fence::{fences, last_fence_labeled};
use super::strategy::{DifficultyStrategy, Direction, DomainList};
use super::template::{self, CLASSIFY_DOMAIN, EVOL_DIFFICULTY_DOWN, EVOL_DIFFICULTY_UP, EVOL_DOMAIN};
use super::variants::{parse_variants_with, Diagnostic, Variant};
use crate::engine::{EvolutionRecord, LlmMetadata, Method, Status};

pub fn render_domain_prompt(stmt: &str, domains: &DomainList) -> String {
    EVOL_DOMAIN
        .render(&[("Domain List", &domains.render()), ("Original Formal Statement", stmt)])
        .expect("slots match the asset")
}

pub fn render_difficulty_prompt(stmt: &str, strategy: DifficultyStrategy) -> String {
    let t = match strategy.direction() {
        Direction::Up => EVOL_DIFFICULTY_UP,
        Direction::Down => EVOL_DIFFICULTY_DOWN,
    };
    t.render(&[
        ("strategy", strategy.title()),
        ("Specific Methods", &strategy.methods().join("\n")),
        ("Original Formal Statement", stmt),
    ])
    .expect("slots match the asset")
}

pub fn render_classify_prompt(stmt: &str, domains: &DomainList) -> String {
    CLASSIFY_DOMAIN
        .render(&[("Domain List", &domains.render()), ("Formal Statement", stmt)])
        .expect("slots match the asset")
}

/// A variant and the provenance record that goes with it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedPair {
    pub variant: Variant,
    pub record: EvolutionRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmOutcome {
    pub pairs: Vec<EvolvedPair>,
    pub diagnostics: Vec<Diagnostic>,
    pub prompt_sha256: String,
}

fn outcome(
    completion: super::client::Completion,
    seed_id: &str,
    rng_seed: u64,
    method: Method,
    strategy: Option<DifficultyStrategy>,
    parsed: super::variants::ParsedVariants,
) -> LlmOutcome {
    let pairs = parsed
        .variants
        .into_iter()
        .map(|variant| EvolvedPair {
            record: EvolutionRecord {
                seed_statement_id: seed_id.to_string(),
                parent_id: None,
                method,
                applications: Vec::new(),
                llm: Some(LlmMetadata {
                    target_domain: variant.domain.clone(),
                    strategy: strategy.map(|s| s.label()),
                    model: completion.model.clone(),
                    prompt_sha256: completion.prompt_sha256.clone(),
                }),
                rng_seed,
                output: variant.formal_statement.clone(),
                status: Status::Pending,
            },
            variant,
        })
        .collect();
    LlmOutcome {
        pairs,
        diagnostics: parsed.diagnostics,
        prompt_sha256: completion.prompt_sha256,
    }
}

/// Cross-domain evolution of one statement. When the source domain is
/// known, variants declaring that same domain are dropped.
pub fn evolve_domain(
    client: &LlmClient,
    seed_id: &str,
    stmt: &str,
    domains: &DomainList,
    source_domain: Option<&str>,
    rng_seed: u64,
) -> Result<LlmOutcome, LlmError> {
    let prompt = render_domain_prompt(stmt, domains);
    let completion = client.complete(template::EVOL_DOMAIN.name, &prompt)?;
    let mut parsed = parse_variants_with(&completion.text, true, domains);
    if let Some(src) = source_domain.and_then(|s| domains.resolve(s)) {
        let before = parsed.variants.len();
        parsed.variants.retain(|v| v.domain.as_deref() != Some(src));
        for _ in parsed.variants.len()..before {
            parsed.diagnostics.push(Diagnostic {
                line: 0,
                message: format!("variant stays in source domain {src}"),
            });
        }
    }
    Ok(outcome(completion, seed_id, rng_seed, Method::Domain, None, parsed))
}

/// Difficulty evolution of one statement under one strategy.
pub fn evolve_difficulty(
    client: &LlmClient,
    seed_id: &str,
    stmt: &str,
    strategy: DifficultyStrategy,
    rng_seed: u64,
) -> Result<LlmOutcome, LlmError> {
    let prompt = render_difficulty_prompt(stmt, strategy);
    let tag = match strategy.direction() {
        Direction::Up => EVOL_DIFFICULTY_UP.name,
        Direction::Down => EVOL_DIFFICULTY_DOWN.name,
    };
    let completion = client.complete(tag, &prompt)?;
    let parsed = parse_variants_with(&completion.text, false, &DomainList::default());
    Ok(outcome(completion, seed_id, rng_seed, Method::Difficulty, Some(strategy), parsed))
}

/// Asks the model for the domain of `stmt`. `None` when the answer is not
/// in the list.
pub fn classify_domain(client: &LlmClient, stmt: &str, domains: &DomainList) -> Result<Option<String>, LlmError> {
    let completion = client.complete(CLASSIFY_DOMAIN.name, &render_classify_prompt(stmt, domains))?;
    let blocks = fences(&completion.text);
    let answer = match last_fence_labeled(&blocks, "domain") {
        Some(f) => f.body.clone(),
        None => completion.text.lines().last().unwrap_or_default().to_string(),
    };
    Ok(domains.resolve(&answer).map(str::to_string))
}
