use serde::{Deserialize, Serialize};

use crate::llm::fence::{fences, last_fence_labeled};
use crate::llm::template::{JUDGE_CONSISTENCY, JUDGE_CORRECTNESS, JUDGE_DIFFICULTY};
use crate::llm::{LlmClient, LlmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aspect {
    Consistency,
    Correctness,
    Difficulty,
}

impl Aspect {
    pub const ALL: [Aspect; 3] = [Aspect::Consistency, Aspect::Correctness, Aspect::Difficulty];

    pub fn as_str(self) -> &'static str {
        match self {
            Aspect::Consistency => "consistency",
            Aspect::Correctness => "correctness",
            Aspect::Difficulty => "difficulty",
        }
    }

    /// The verdict that fails this aspect.
    fn reject(self) -> Verdict {
        match self {
            Aspect::Consistency => Verdict::Inconsistent,
            Aspect::Correctness => Verdict::Incorrect,
            Aspect::Difficulty => Verdict::LowDifficulty,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Correct,
    Incorrect,
    /// "Is Low-difficulty: Yes", filtered out.
    LowDifficulty,
    NotLowDifficulty,
}

impl Verdict {
    pub fn passes(self) -> bool {
        matches!(self, Verdict::Consistent | Verdict::Correct | Verdict::NotLowDifficulty)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub aspect: Aspect,
    pub verdict: Verdict,
    pub analysis: String,
    /// Set when the verdict was forced because the reply was unreadable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl JudgeVerdict {
    pub fn passes(&self) -> bool {
        self.verdict.passes()
    }
}

fn normalize(token: &str) -> String {
    token
        .trim()
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_ascii_lowercase()
}

fn read_token(aspect: Aspect, token: &str) -> Option<Verdict> {
    let t = normalize(token);
    let first = t.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("");
    let pick = |w: &str| match (aspect, w) {
        (Aspect::Consistency, "consistent") => Some(Verdict::Consistent),
        (Aspect::Consistency, "inconsistent") => Some(Verdict::Inconsistent),
        (Aspect::Correctness, "correct") => Some(Verdict::Correct),
        (Aspect::Correctness, "incorrect") => Some(Verdict::Incorrect),
        (Aspect::Difficulty, "yes") => Some(Verdict::LowDifficulty),
        (Aspect::Difficulty, "no") => Some(Verdict::NotLowDifficulty),
        _ => None,
    };
    pick(&t).or_else(|| pick(first))
}

/// Reads the last ```` ```judge ```` block of a reply. Anything that is not
/// a verdict for `aspect` counts as a rejection.
pub fn parse_verdict(aspect: Aspect, response: &str) -> JudgeVerdict {
    let blocks = fences(response);
    let analysis = last_fence_labeled(&blocks, "analysis")
        .map(|f| f.body.trim().to_string())
        .unwrap_or_default();
    match last_fence_labeled(&blocks, "judge").and_then(|f| read_token(aspect, &f.body)) {
        Some(verdict) => JudgeVerdict {
            aspect,
            verdict,
            analysis,
            reason: None,
        },
        None => JudgeVerdict {
            aspect,
            verdict: aspect.reject(),
            analysis,
            reason: Some("unparseable verdict".into()),
        },
    }
}

pub fn render_judge_prompt(aspect: Aspect, nl: &str, stmt: &str) -> String {
    let rendered = match aspect {
        Aspect::Consistency => {
            JUDGE_CONSISTENCY.render(&[("Natural Language Description", nl), ("Formal Statement", stmt)])
        }
        Aspect::Correctness => JUDGE_CORRECTNESS.render(&[("original nl", nl), ("correct formal statement", stmt)]),
        Aspect::Difficulty => {
            JUDGE_DIFFICULTY.render(&[("Natural Language Description", nl), ("Formal Statement", stmt)])
        }
    };
    rendered.expect("slots match the asset")
}

pub fn judge(client: &LlmClient, nl: &str, stmt: &str, aspect: Aspect) -> Result<JudgeVerdict, LlmError> {
    let tag = match aspect {
        Aspect::Consistency => JUDGE_CONSISTENCY.name,
        Aspect::Correctness => JUDGE_CORRECTNESS.name,
        Aspect::Difficulty => JUDGE_DIFFICULTY.name,
    };
    let completion = client.complete(tag, &render_judge_prompt(aspect, nl, stmt))?;
    Ok(parse_verdict(aspect, &completion.text))
}
