use serde::{Deserialize, Serialize};

use super::compile::CompileResult;
use crate::lean::Statement;
use crate::llm::fence::{fences, Fence};
use crate::llm::template::REPAIR;
use crate::llm::{LlmClient, LlmError};

const MARKER: &str = "**Corrected Lean4 Code**";

/// What the single repair attempt produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairOutcome {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repaired: Option<String>,
    pub analysis: String,
    /// Why nothing usable came back.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

pub fn render_repair_prompt(stmt: &str, errors: &str) -> String {
    REPAIR
        .render(&[("incorrect lean4 code", stmt), ("errors", errors)])
        .expect("slots match the asset")
}

fn is_code(f: &Fence) -> bool {
    let l = f.label.to_ascii_lowercase();
    l.is_empty() || l.starts_with("lean")
}

/// Picks the corrected code out of a repair reply: the first code fence
/// after the "Corrected Lean4 Code" heading, else the last lean fence.
pub fn parse_repair(response: &str) -> RepairOutcome {
    let blocks = fences(response);
    let analysis = blocks
        .iter()
        .rev()
        .find(|f| f.label.eq_ignore_ascii_case("analysis"))
        .map(|f| f.body.trim().to_string())
        .unwrap_or_default();
    let marker_line = response
        .lines()
        .position(|l| l.contains(MARKER))
        .map(|i| i + 1);
    let code = match marker_line {
        Some(m) => blocks.iter().find(|f| f.line > m && is_code(f)),
        None => None,
    }
    .or_else(|| blocks.iter().rev().find(|f| is_code(f) && !f.label.is_empty()));
    let Some(code) = code else {
        return RepairOutcome {
            repaired: None,
            analysis,
            failure: Some("no corrected code block".into()),
        };
    };
    let text = code.body.trim().to_string();
    if !text.ends_with(Statement::TRAILER) {
        return RepairOutcome {
            repaired: None,
            analysis,
            failure: Some("missing trailer".into()),
        };
    }
    RepairOutcome {
        repaired: Some(text),
        analysis,
        failure: None,
    }
}

/// One repair attempt for a statement that failed to compile. The caller
/// compiles the result.
pub fn repair(client: &LlmClient, stmt: &str, compile: &CompileResult) -> Result<RepairOutcome, LlmError> {
    let completion = client.complete(REPAIR.name, &render_repair_prompt(stmt, &compile.error_list()))?;
    Ok(parse_repair(&completion.text))
}
