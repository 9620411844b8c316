//! Offline stand-in for a chat endpoint. Answers each template with a
//! well-formed, deterministic response derived from the prompt itself.

use super::client::{ChatRequest, ChatResponse, Transport, TransportError};
use super::template::{self, Template};
use super::variants::{render_variants, Variant};
use super::strategy::DEFAULT_DOMAINS;
use crate::lean::{parse_statement_with, Expr, Hypothesis, ParseOptions, Rel};

/// Variants produced per evolution prompt.
const VARIANTS: usize = 3;

#[derive(Debug, Clone, Copy, Default)]
pub struct SyntheticTransport;

fn slot(t: &Template, prompt: &str, name: &str) -> Option<String> {
    t.match_rendered(prompt).ok()?.remove(name)
}

fn evolve_response(original: &str, infix: &str, domains: Option<Vec<String>>) -> String {
    let Ok(stmt) = parse_statement_with(original, &ParseOptions::lenient()) else {
        return "The original statement could not be analysed.".into();
    };
    let offset = original.bytes().map(usize::from).sum::<usize>();
    let variants: Vec<Variant> = (0..VARIANTS)
        .map(|k| {
            let mut v = stmt.clone();
            v.name = format!("{}_{infix}{}", stmt.name, k + 1);
            let mut label = format!("h_{infix}{}", k + 1);
            while v.hypotheses.iter().any(|h| h.label == label) {
                label.push('\'');
            }
            v.hypotheses.push(Hypothesis {
                label,
                prop: Expr::rel(Rel::Lt, Expr::num("0"), Expr::num((k + 1).to_string())),
            });
            Variant {
                nl_description: format!("Prove that {}.", v.goal),
                formal_statement: v.to_string(),
                domain: domains.as_ref().map(|d| d[(offset + k) % d.len()].clone()),
            }
        })
        .collect();
    render_variants(&variants)
}

fn judge_response(verdict: &str) -> String {
    format!("**Analysis:**\n```analysis\nSynthetic judgement.\n```\n**Judge Result:**\n```judge\n{verdict}\n```\n")
}

/// Keyword guess used by the synthetic classifier.
pub fn guess_domain(stmt: &str) -> &'static str {
    let has = |needles: &[&str]| needles.iter().any(|n| stmt.contains(n));
    if has(&["∫", "integral"]) {
        "Integral"
    } else if has(&["deriv", "HasDerivAt"]) {
        "Differentiation"
    } else if has(&["dist", "EuclideanSpace", "inner", "angle"]) {
        "Geometry"
    } else if has(&["∑", "Finset.sum", "Tendsto", "seq"]) {
        "Sequences Series"
    } else if has(&["Real.sin", "Real.cos", "Real.tan", "Real.pi", "Complex"]) {
        "Precalculus"
    } else if has(&["∣", "Nat.gcd", "Prime", "%", "ℕ", "ℤ"]) {
        "Number Theory"
    } else if has(&["Finset", "Fintype", "card"]) {
        "Discrete Mathematics"
    } else if has(&["ℝ", "ℚ"]) {
        "Algebra"
    } else {
        "Other"
    }
}

impl Transport for SyntheticTransport {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let p = &req.prompt;
        let text = match req.tag.as_str() {
            "evol_domain" => {
                let original = slot(&template::EVOL_DOMAIN, p, "Original Formal Statement").unwrap_or_default();
                let domains = slot(&template::EVOL_DOMAIN, p, "Domain List")
                    .and_then(|l| serde_json::from_str::<Vec<String>>(&l).ok())
                    .filter(|d| !d.is_empty())
                    .unwrap_or_else(|| DEFAULT_DOMAINS.iter().map(|s| s.to_string()).collect());
                evolve_response(&original, "domain", Some(domains))
            }
            "evol_difficulty_up" | "evol_difficulty_down" => {
                let t = if req.tag.ends_with("up") {
                    template::EVOL_DIFFICULTY_UP
                } else {
                    template::EVOL_DIFFICULTY_DOWN
                };
                let original = slot(&t, p, "Original Formal Statement").unwrap_or_default();
                evolve_response(&original, if req.tag.ends_with("up") { "harder" } else { "easier" }, None)
            }
            "judge_consistency" => judge_response("Consistent"),
            "judge_correctness" => judge_response("Correct"),
            "judge_difficulty" => judge_response("No"),
            "repair" => {
                let code = slot(&template::REPAIR, p, "incorrect lean4 code").unwrap_or_default();
                format!("**Modification Analysis**\n```analysis\nNo change.\n```\n**Corrected Lean4 Code**\n```lean4\n{code}\n```\n")
            }
            "classify_domain" => {
                let stmt = slot(&template::CLASSIFY_DOMAIN, p, "Formal Statement").unwrap_or_default();
                format!("```analysis\nKeyword match.\n```\n```domain\n{}\n```\n", guess_domain(&stmt))
            }
            other => return Err(TransportError::Fatal(format!("synthetic endpoint has no answer for {other}"))),
        };
        Ok(ChatResponse::text(text))
    }
}
