use std::sync::{Arc, Mutex};

use leanaug::engine::Method;
use leanaug::lean::parse_statement;
use leanaug::llm::template::{self, Segment};
use leanaug::llm::{
    classify_domain, evolve_difficulty, evolve_domain, parse_variants, render_difficulty_prompt, render_domain_prompt,
    render_variants, ChatRequest, ChatResponse, DifficultyStrategy, Direction, DomainList, FixtureTransport,
    FnTransport, LlmClient, LlmEndpointConfig, SyntheticTransport, Variant,
};
use proptest::prelude::*;

const SEED: &str = "theorem evolved_thm (x y : ℝ) (h₀ : x * y = 4) (h₁ : x > y) (h₂ : x^3 - y^3 = 3555) : x^2 + y^2 = 233 := by sorry";
const RESPONSE: &str = include_str!("fixtures/llm/domain_response.txt");

fn canned(text: &'static str) -> LlmClient {
    let t = FnTransport(move |_: &ChatRequest| Ok(ChatResponse::text(text)));
    LlmClient::new(LlmEndpointConfig::default(), Arc::new(t))
}

#[test]
fn case_study_response_gives_geometry_and_integral() {
    let parsed = parse_variants(RESPONSE, true);
    assert!(parsed.diagnostics.is_empty(), "{:?}", parsed.diagnostics);
    let domains: Vec<_> = parsed.variants.iter().map(|v| v.domain.as_deref()).collect();
    assert_eq!(domains, [Some("Geometry"), Some("Integral")]);
    for v in &parsed.variants {
        parse_statement(&v.formal_statement).unwrap();
        assert!(v.nl_description.starts_with("Consider") || v.nl_description.starts_with("Prove"));
    }
}

#[test]
fn default_domain_prompt_matches_the_stored_list() {
    let prompt = render_domain_prompt(SEED, &DomainList::default());
    assert!(prompt.contains("Please provide 3-5 variants"));
    assert!(prompt.contains(r#"["Algebra", "Number Theory", "Integral", "Precalculus", "Differentiation", "Multivariable Calculus", "Sequences Series", "Applied Mathematics", "Discrete Mathematics", "Geometry", "Calculus", "Other"]"#));
    for step in ["Step 1. Deconstruction & Abstraction", "Step 2. Analogy & Transfer", "Step 3. Instantiation & Packaging"] {
        assert!(prompt.contains(step), "{step}");
    }
    assert!(prompt.contains(&format!("```lean4\n{SEED}\n```")));
}

#[test]
fn statements_with_backticks_are_substituted_verbatim() {
    let weird = "theorem t (x : ℝ) : `x` = x := by sorry {Domain List}";
    let prompt = render_domain_prompt(weird, &DomainList::default());
    let slots = template::EVOL_DOMAIN.match_rendered(&prompt).unwrap();
    assert_eq!(slots["Original Formal Statement"], weird);
}

#[test]
fn difficulty_prompts_pick_direction_and_methods() {
    let up = render_difficulty_prompt(SEED, DifficultyStrategy::new(1, Direction::Up).unwrap());
    assert!(up.contains("### Difficulty Enhancement Strategy"));
    assert!(up.contains("Your objective is to Complicate the Logical Structure for the original statement."));
    assert!(up.contains("(1) Construct a new problem that increases the nesting depth"));
    let down = render_difficulty_prompt(SEED, DifficultyStrategy::from_delta(1, -1).unwrap());
    assert!(down.contains("### Difficulty Reduction Strategy"));
    assert!(down.contains("Simplify the Logical Structure"));
    assert!(DifficultyStrategy::from_delta(1, 0).is_err());
}

#[test]
fn every_rendered_prompt_differs_only_in_slots() {
    for s in DifficultyStrategy::all() {
        let t = if s.direction() == Direction::Up {
            template::EVOL_DIFFICULTY_UP
        } else {
            template::EVOL_DIFFICULTY_DOWN
        };
        let slots = t.match_rendered(&render_difficulty_prompt(SEED, s)).unwrap();
        assert_eq!(slots["strategy"], s.title());
        assert_eq!(slots["Original Formal Statement"], SEED);
    }
    let slots = template::EVOL_DOMAIN
        .match_rendered(&render_domain_prompt(SEED, &DomainList::default()))
        .unwrap();
    assert_eq!(slots["Domain List"], DomainList::default().render());
    // literal text between slots is the stored asset, verbatim
    for t in template::ALL {
        let literal: String = t
            .segments()
            .into_iter()
            .map(|s| match s {
                Segment::Literal(l) => l.to_string(),
                Segment::Slot(n) => format!("{{{n}}}"),
            })
            .collect();
        assert_eq!(literal, t.text, "{}", t.name);
    }
}

#[test]
fn evolve_domain_records_provenance_and_filters_the_source_domain() {
    let client = canned(RESPONSE);
    let out = evolve_domain(&client, "lean_workbook_12011", SEED, &DomainList::default(), Some("geometry"), 42).unwrap();
    assert_eq!(out.pairs.len(), 1);
    assert_eq!(out.diagnostics.len(), 1);
    let r = &out.pairs[0].record;
    assert_eq!(r.method, Method::Domain);
    assert_eq!(r.seed_statement_id, "lean_workbook_12011");
    assert_eq!(r.rng_seed, 42);
    let meta = r.llm.as_ref().unwrap();
    assert_eq!(meta.target_domain.as_deref(), Some("Integral"));
    assert_eq!(meta.prompt_sha256, out.prompt_sha256);
    assert_eq!(meta.prompt_sha256.len(), 64);
}

#[test]
fn evolve_difficulty_sends_the_direction_tag() {
    let tags = Arc::new(Mutex::new(Vec::new()));
    let seen = Arc::clone(&tags);
    let t = FnTransport(move |req: &ChatRequest| {
        seen.lock().unwrap().push(req.tag.clone());
        Ok(ChatResponse::text(render_variants(&[Variant {
            nl_description: "Prove it.".into(),
            formal_statement: "theorem v (x : ℝ) : x = x := by sorry".into(),
            domain: None,
        }])))
    });
    let client = LlmClient::new(LlmEndpointConfig::default(), Arc::new(t));
    let s = DifficultyStrategy::new(3, Direction::Down).unwrap();
    let out = evolve_difficulty(&client, "seed", SEED, s, 7).unwrap();
    assert_eq!(out.pairs.len(), 1);
    assert_eq!(out.pairs[0].record.llm.as_ref().unwrap().strategy.as_deref(), Some("s3-"));
    assert_eq!(out.pairs[0].record.method, Method::Difficulty);
    assert_eq!(*tags.lock().unwrap(), ["evol_difficulty_down"]);
}

#[test]
fn fixture_transport_echoes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("evol_domain.txt"), RESPONSE).unwrap();
    let client = LlmClient::new(LlmEndpointConfig::default(), Arc::new(FixtureTransport::new(dir.path())));
    let c = client.complete("evol_domain", "anything").unwrap();
    assert_eq!(c.text, RESPONSE);
}

#[test]
fn synthetic_classifier_answers_within_the_list() {
    let client = LlmClient::new(LlmEndpointConfig::default(), Arc::new(SyntheticTransport));
    let d = classify_domain(&client, "theorem t (n : ℕ) : 7 ∣ 7 * n := by sorry", &DomainList::default()).unwrap();
    assert_eq!(d.as_deref(), Some("Number Theory"));
}

fn arb_variant() -> impl Strategy<Value = Variant> {
    (
        "[A-Za-z ,.]{1,40}",
        "[a-z]{1,8}",
        prop::option::of(prop::sample::select(leanaug::llm::DEFAULT_DOMAINS.to_vec())),
    )
        .prop_map(|(nl, name, domain)| Variant {
            nl_description: nl.trim().to_string() + ".",
            formal_statement: format!("theorem {name} (x : ℝ) : x = x := by sorry"),
            domain: domain.map(str::to_string),
        })
}

proptest! {
    #[test]
    fn parser_is_total(text in "(\\PC|\n|```){0,200}") {
        let p = parse_variants(&text, true);
        let formal_fences = text.lines().filter(|l| l.trim_start().starts_with("```")).count();
        prop_assert!(p.variants.len() <= formal_fences);
    }

    #[test]
    fn rendered_responses_parse_back(vs in prop::collection::vec(arb_variant(), 0..6)) {
        let p = parse_variants(&render_variants(&vs), true);
        let expected: Vec<Variant> = vs.iter().take(5).cloned().collect();
        prop_assert_eq!(p.variants, expected);
    }
}
