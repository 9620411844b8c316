//! The verification funnel: compiler check with one repair attempt, then
//! semantic judging with short-circuit rejection.

pub mod compile;
pub mod judge;
pub mod repair;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use compile::{
    parse_diagnostics, CompileError, CompileResult, Compiler, FnCompiler, LeanCompiler, LeanConfig, LeanDiagnostic,
    SyntaxMockCompiler, ToolchainError,
};
pub use judge::{judge, parse_verdict, render_judge_prompt, Aspect, JudgeVerdict, Verdict};
pub use repair::{parse_repair, render_repair_prompt, repair, RepairOutcome};

use crate::llm::LlmClient;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Allow the single LLM repair attempt after a failed compile.
    pub repair: bool,
    pub judges: Vec<Aspect>,
    /// Run the difficulty judge on downward-evolved statements too.
    pub difficulty_on_downward: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            repair: true,
            judges: Aspect::ALL.to_vec(),
            difficulty_on_downward: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Final {
    Accepted,
    Rejected { reason: String },
    /// Infrastructure trouble; the pair can be retried later.
    Skipped { reason: String },
}

impl Final {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Final::Accepted)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Final::Accepted => "accepted",
            Final::Rejected { .. } => "rejected",
            Final::Skipped { .. } => "skipped",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Final::Accepted => None,
            Final::Rejected { reason } | Final::Skipped { reason } => Some(reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repaired_statement: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compile: Option<CompileResult>,
    pub analysis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub statement_id: String,
    /// The text that went to the judges: the repaired one if repair ran.
    pub statement: String,
    /// Judges this statement had to pass.
    pub required: Vec<Aspect>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compile: Option<CompileResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repaired: Option<RepairRecord>,
    pub verdicts: Vec<JudgeVerdict>,
    #[serde(rename = "final")]
    pub outcome: Final,
}

impl VerificationReport {
    fn new(id: &str, stmt: &str, required: Vec<Aspect>) -> Self {
        VerificationReport {
            statement_id: id.to_string(),
            statement: stmt.to_string(),
            required,
            compile: None,
            repaired: None,
            verdicts: Vec::new(),
            outcome: Final::Skipped {
                reason: "not run".into(),
            },
        }
    }

    pub fn compiled_ok(&self) -> bool {
        self.compile.as_ref().is_some_and(|c| c.ok)
            || self
                .repaired
                .as_ref()
                .and_then(|r| r.compile.as_ref())
                .is_some_and(|c| c.ok)
    }

    /// Accepted only with a passing compile and a passing verdict from
    /// every required judge.
    pub fn check_invariant(&self) -> Result<(), String> {
        for c in [self.compile.as_ref(), self.repaired.as_ref().and_then(|r| r.compile.as_ref())]
            .into_iter()
            .flatten()
        {
            if c.ok != c.errors.is_empty() {
                return Err("compile result ok disagrees with its error list".into());
            }
        }
        if self.verdicts.len() > 3 {
            return Err("more than three verdicts".into());
        }
        if !self.outcome.is_accepted() {
            return Ok(());
        }
        if !self.compiled_ok() {
            return Err("accepted without a passing compile".into());
        }
        for aspect in &self.required {
            if !self.verdicts.iter().any(|v| v.aspect == *aspect && v.passes()) {
                return Err(format!("accepted without a passing {} verdict", aspect.as_str()));
            }
        }
        if self.verdicts.iter().any(|v| !v.passes()) {
            return Err("accepted with a failing verdict".into());
        }
        Ok(())
    }
}

/// One pair to verify.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyItem {
    pub id: String,
    pub nl: String,
    pub statement: String,
    /// Downward difficulty variants may skip the difficulty judge.
    pub downward: bool,
}

pub struct Verifier {
    compiler: Arc<dyn Compiler>,
    client: LlmClient,
    cfg: VerifyConfig,
}

impl Verifier {
    /// Judge and repair calls go out at temperature 0 on `client`'s endpoint.
    pub fn new(compiler: Arc<dyn Compiler>, client: &LlmClient, cfg: VerifyConfig) -> Self {
        let judge_cfg = client.config().deterministic();
        Verifier {
            compiler,
            client: client.with_config(judge_cfg),
            cfg,
        }
    }

    pub fn config(&self) -> &VerifyConfig {
        &self.cfg
    }

    pub fn compiler(&self) -> &dyn Compiler {
        self.compiler.as_ref()
    }

    fn aspects(&self, downward: bool) -> Vec<Aspect> {
        Aspect::ALL
            .into_iter()
            .filter(|a| self.cfg.judges.contains(a))
            .filter(|a| !(downward && *a == Aspect::Difficulty && !self.cfg.difficulty_on_downward))
            .collect()
    }

    /// Errors only when the toolchain is missing; everything else ends up
    /// in the report.
    pub fn verify(&self, id: &str, nl: &str, stmt: &str) -> Result<VerificationReport, ToolchainError> {
        self.verify_item(&VerifyItem {
            id: id.into(),
            nl: nl.into(),
            statement: stmt.into(),
            downward: false,
        })
    }

    pub fn verify_item(&self, item: &VerifyItem) -> Result<VerificationReport, ToolchainError> {
        let compiled = self.compiler.check(&item.statement);
        self.finish(item, compiled)
    }

    /// Compiles all statements in one batch, then repairs and judges in
    /// parallel. Reports come back in input order.
    pub fn verify_batch(&self, items: &[VerifyItem]) -> Result<Vec<VerificationReport>, ToolchainError> {
        let stmts: Vec<String> = items.iter().map(|i| i.statement.clone()).collect();
        let compiled: Vec<Result<CompileResult, ToolchainError>> = match self.compiler.check_batch(&stmts) {
            Ok(results) => results.into_iter().map(Ok).collect(),
            Err(ToolchainError::Missing(m)) => return Err(ToolchainError::Missing(m)),
            // a failed batch invocation: fall back to one check per item
            Err(ToolchainError::Failed(_)) => stmts.par_iter().map(|s| self.compiler.check(s)).collect(),
        };
        items
            .par_iter()
            .zip(compiled.into_par_iter())
            .map(|(item, c)| self.finish(item, c))
            .collect()
    }

    fn finish(
        &self,
        item: &VerifyItem,
        compiled: Result<CompileResult, ToolchainError>,
    ) -> Result<VerificationReport, ToolchainError> {
        let mut report = VerificationReport::new(&item.id, &item.statement, self.aspects(item.downward));
        let compiled = match compiled {
            Ok(c) => c,
            Err(ToolchainError::Missing(m)) => return Err(ToolchainError::Missing(m)),
            Err(e) => {
                report.outcome = Final::Skipped { reason: e.to_string() };
                return Ok(report);
            }
        };
        let ok = compiled.ok;
        report.compile = Some(compiled.clone());
        if !ok {
            if !self.cfg.repair {
                report.outcome = rejected("syntax");
                return Ok(report);
            }
            let outcome = match repair(&self.client, &item.statement, &compiled) {
                Ok(o) => o,
                Err(e) => {
                    report.outcome = Final::Skipped {
                        reason: format!("repair: {e}"),
                    };
                    return Ok(report);
                }
            };
            let mut record = RepairRecord {
                repaired_statement: outcome.repaired.clone(),
                compile: None,
                analysis: outcome.analysis,
                failure: outcome.failure,
            };
            let Some(fixed) = outcome.repaired else {
                report.repaired = Some(record);
                report.outcome = rejected("syntax");
                return Ok(report);
            };
            match self.compiler.check(&fixed) {
                Ok(c) => {
                    let passed = c.ok;
                    record.compile = Some(c);
                    report.repaired = Some(record);
                    if !passed {
                        report.outcome = rejected("syntax");
                        return Ok(report);
                    }
                    report.statement = fixed;
                }
                Err(ToolchainError::Missing(m)) => return Err(ToolchainError::Missing(m)),
                Err(e) => {
                    report.repaired = Some(record);
                    report.outcome = Final::Skipped { reason: e.to_string() };
                    return Ok(report);
                }
            }
        }
        for aspect in report.required.clone() {
            match judge(&self.client, &item.nl, &report.statement, aspect) {
                Ok(v) => {
                    let passes = v.passes();
                    report.verdicts.push(v);
                    if !passes {
                        report.outcome = rejected(aspect.as_str());
                        return Ok(report);
                    }
                }
                Err(e) => {
                    report.outcome = Final::Skipped {
                        reason: format!("{} judge: {e}", aspect.as_str()),
                    };
                    return Ok(report);
                }
            }
        }
        report.outcome = Final::Accepted;
        Ok(report)
    }
}

fn rejected(reason: &str) -> Final {
    Final::Rejected { reason: reason.into() }
}
