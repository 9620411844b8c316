//! Prompt rendering, endpoint calls and response parsing for the two
//! LLM-driven evolution methods.

mod client;
mod evolve;
pub mod fence;
mod mock;
pub mod strategy;
pub mod template;
mod variants;

pub use client::{
    parse_chat_response, ChatRequest, ChatResponse, Completion, FixtureTransport, FnTransport, HttpTransport,
    LlmClient, LlmEndpointConfig, LlmError, RateLimiter, Transport, TransportError,
};
pub use evolve::{
    classify_domain, evolve_difficulty, evolve_domain, render_classify_prompt, render_difficulty_prompt,
    render_domain_prompt, EvolvedPair, LlmOutcome,
};
pub use mock::{guess_domain, SyntheticTransport};
pub use strategy::{difficulty_schedule, DifficultyStrategy, Direction, DomainList, StrategyError, DEFAULT_DOMAINS};
pub use template::Template;
pub use variants::{parse_variants, parse_variants_with, render_variants, Diagnostic, ParsedVariants, Variant, MAX_VARIANTS};

use sha2::{Digest, Sha256};

pub(crate) fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}
