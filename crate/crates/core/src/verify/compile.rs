use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::lean::{parse_statement_with, ParseOptions};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for CompileError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: error: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileResult {
    pub ok: bool,
    pub errors: Vec<CompileError>,
    pub elapsed_ms: u64,
    pub toolchain: String,
}

impl CompileResult {
    pub fn passed(toolchain: &str, elapsed: Duration) -> Self {
        CompileResult {
            ok: true,
            errors: Vec::new(),
            elapsed_ms: elapsed.as_millis() as u64,
            toolchain: toolchain.to_string(),
        }
    }

    pub fn failed(toolchain: &str, elapsed: Duration, errors: Vec<CompileError>) -> Self {
        debug_assert!(!errors.is_empty());
        CompileResult {
            ok: false,
            errors,
            elapsed_ms: elapsed.as_millis() as u64,
            toolchain: toolchain.to_string(),
        }
    }

    /// Errors one per line, as handed to the repair prompt.
    pub fn error_list(&self) -> String {
        self.errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n")
    }
}

/// Problems with the checker itself, as opposed to a statement failing.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ToolchainError {
    /// The compiler cannot be run at all; the pipeline stops.
    #[error("Lean toolchain not available: {0}")]
    Missing(String),
    /// One invocation failed for reasons unrelated to the statement.
    #[error("compiler invocation failed: {0}")]
    Failed(String),
}

pub trait Compiler: Send + Sync {
    fn check(&self, stmt: &str) -> Result<CompileResult, ToolchainError>;

    fn check_batch(&self, stmts: &[String]) -> Result<Vec<CompileResult>, ToolchainError> {
        stmts.iter().map(|s| self.check(s)).collect()
    }

    fn toolchain(&self) -> String;
}

/// Compiles with the parser of this crate only: no elaboration, no mathlib.
#[derive(Debug, Clone, Default)]
pub struct SyntaxMockCompiler {
    pub options: ParseOptions,
}

impl Compiler for SyntaxMockCompiler {
    fn check(&self, stmt: &str) -> Result<CompileResult, ToolchainError> {
        let start = Instant::now();
        Ok(match parse_statement_with(stmt, &self.options) {
            Ok(_) => CompileResult::passed("syntax-mock", start.elapsed()),
            Err(e) => CompileResult::failed(
                "syntax-mock",
                start.elapsed(),
                vec![CompileError {
                    line: e.position.line,
                    column: e.position.column,
                    message: format!("expected {}, found `{}`", e.expected, e.found),
                }],
            ),
        })
    }

    fn toolchain(&self) -> String {
        "syntax-mock".into()
    }
}

/// Outcomes chosen by a closure; for scripting funnel behaviour.
pub struct FnCompiler<F>(pub F);

impl<F> Compiler for FnCompiler<F>
where
    F: Fn(&str) -> Result<CompileResult, ToolchainError> + Send + Sync,
{
    fn check(&self, stmt: &str) -> Result<CompileResult, ToolchainError> {
        (self.0)(stmt)
    }

    fn toolchain(&self) -> String {
        "scripted".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeanConfig {
    /// Lake project with mathlib built.
    pub workspace: PathBuf,
    /// Program and arguments; the scratch file path is appended.
    pub command: Vec<String>,
    pub timeout_secs: f64,
    /// Check many statements in one file to pay the mathlib import once.
    pub batch: bool,
    pub batch_size: usize,
}

impl Default for LeanConfig {
    fn default() -> Self {
        LeanConfig {
            workspace: PathBuf::from("."),
            command: vec!["lake".into(), "env".into(), "lean".into()],
            timeout_secs: 60.0,
            batch: true,
            batch_size: 32,
        }
    }
}

pub const HEADER: &str = "import Mathlib\n\n";

/// A diagnostic line `<file>:<line>:<col>: <severity>: <message>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeanDiagnostic {
    pub line: usize,
    pub column: usize,
    pub severity: String,
    pub message: String,
}

fn split_location(line: &str) -> Option<(usize, usize, &str, &str)> {
    // scan for ":<line>:<col>: <severity>:" so file paths may contain ':'
    for (i, _) in line.match_indices(':') {
        let rest = &line[i + 1..];
        let Some((l, rest)) = rest.split_once(':') else { continue };
        let Some((c, rest)) = rest.split_once(": ") else { continue };
        if l.is_empty() || c.is_empty() || !l.bytes().all(|b| b.is_ascii_digit()) || !c.bytes().all(|b| b.is_ascii_digit()) {
            continue;
        }
        let (sev, msg) = rest.split_once(':').unwrap_or((rest, ""));
        if !matches!(sev, "error" | "warning" | "info" | "information") {
            continue;
        }
        return Some((l.parse().ok()?, c.parse().ok()?, sev, msg.trim_start()));
    }
    None
}

/// Diagnostics in compiler output. Lines that do not start a diagnostic
/// continue the previous message.
pub fn parse_diagnostics(output: &str) -> Vec<LeanDiagnostic> {
    let mut out: Vec<LeanDiagnostic> = Vec::new();
    for line in output.lines() {
        match split_location(line) {
            Some((l, c, sev, msg)) => out.push(LeanDiagnostic {
                line: l,
                column: c,
                severity: if sev == "information" { "info".into() } else { sev.into() },
                message: msg.to_string(),
            }),
            None => {
                if let Some(last) = out.last_mut() {
                    if !line.trim().is_empty() {
                        last.message.push('\n');
                        last.message.push_str(line);
                    }
                }
            }
        }
    }
    out
}

/// Runs the Lean compiler on scratch files inside a Lake workspace.
#[derive(Debug, Clone)]
pub struct LeanCompiler {
    cfg: LeanConfig,
    version: String,
}

struct RunOutput {
    output: String,
    success: bool,
    timed_out: bool,
    elapsed: Duration,
}

impl LeanCompiler {
    /// Fails with `Missing` when the command cannot be started.
    pub fn new(cfg: LeanConfig) -> Result<Self, ToolchainError> {
        let (prog, args) = cfg
            .command
            .split_first()
            .ok_or_else(|| ToolchainError::Missing("empty compiler command".into()))?;
        if !cfg.workspace.is_dir() {
            return Err(ToolchainError::Missing(format!("workspace {} is not a directory", cfg.workspace.display())));
        }
        let out = Command::new(prog)
            .args(args)
            .arg("--version")
            .current_dir(&cfg.workspace)
            .output()
            .map_err(|e| ToolchainError::Missing(format!("{prog}: {e}")))?;
        if !out.status.success() {
            return Err(ToolchainError::Missing(format!(
                "{} --version exited with {}",
                cfg.command.join(" "),
                out.status
            )));
        }
        let version = String::from_utf8_lossy(&out.stdout).trim().to_string();
        Ok(LeanCompiler { cfg, version })
    }

    fn run(&self, source: &str) -> Result<RunOutput, ToolchainError> {
        let fail = |e: std::io::Error| ToolchainError::Failed(e.to_string());
        let mut file = tempfile::Builder::new()
            .prefix("leanaug_")
            .suffix(".lean")
            .tempfile_in(&self.cfg.workspace)
            .map_err(fail)?;
        std::io::Write::write_all(&mut file, source.as_bytes()).map_err(fail)?;
        let (prog, args) = self.cfg.command.split_first().expect("checked in new");
        let start = Instant::now();
        let mut child = Command::new(prog)
            .args(args)
            .arg(file.path())
            .current_dir(&self.cfg.workspace)
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(fail)?;
        let mut stdout = child.stdout.take().expect("piped");
        let mut stderr = child.stderr.take().expect("piped");
        let out_reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stdout.read_to_string(&mut s);
            s
        });
        let err_reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            s
        });
        let deadline = Duration::from_secs_f64(self.cfg.timeout_secs);
        let (status, timed_out) = loop {
            if let Some(st) = child.try_wait().map_err(fail)? {
                break (Some(st), false);
            }
            if start.elapsed() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                break (None, true);
            }
            std::thread::sleep(Duration::from_millis(20));
        };
        let mut output = out_reader.join().unwrap_or_default();
        output.push_str(&err_reader.join().unwrap_or_default());
        Ok(RunOutput {
            output,
            success: status.is_some_and(|s| s.success()),
            timed_out,
            elapsed: start.elapsed(),
        })
    }

    fn header_lines() -> usize {
        HEADER.matches('\n').count()
    }
}

fn timeout_error() -> CompileError {
    CompileError {
        line: 0,
        column: 0,
        message: "timeout".into(),
    }
}

impl Compiler for LeanCompiler {
    fn check(&self, stmt: &str) -> Result<CompileResult, ToolchainError> {
        let run = self.run(&format!("{HEADER}{stmt}\n"))?;
        if run.timed_out {
            return Ok(CompileResult::failed(&self.version, run.elapsed, vec![timeout_error()]));
        }
        let shift = LeanCompiler::header_lines();
        let mut errors: Vec<CompileError> = parse_diagnostics(&run.output)
            .into_iter()
            .filter(|d| d.severity == "error")
            .map(|d| CompileError {
                line: d.line.saturating_sub(shift),
                column: d.column,
                message: d.message,
            })
            .collect();
        if errors.is_empty() && !run.success {
            errors.push(CompileError {
                line: 0,
                column: 0,
                message: format!("compiler exited with failure: {}", run.output.trim()),
            });
        }
        Ok(if errors.is_empty() {
            CompileResult::passed(&self.version, run.elapsed)
        } else {
            CompileResult::failed(&self.version, run.elapsed, errors)
        })
    }

    /// Checks statements in chunks of `batch_size`, each wrapped in its own
    /// namespace so equal theorem names do not clash. A chunk that times
    /// out is re-checked one statement at a time.
    fn check_batch(&self, stmts: &[String]) -> Result<Vec<CompileResult>, ToolchainError> {
        if !self.cfg.batch || stmts.len() < 2 {
            return stmts.iter().map(|s| self.check(s)).collect();
        }
        let mut results = Vec::with_capacity(stmts.len());
        for chunk in stmts.chunks(self.cfg.batch_size.max(1)) {
            let mut source = HEADER.to_string();
            let mut ranges = Vec::new();
            for (i, s) in chunk.iter().enumerate() {
                source.push_str(&format!("namespace LeanaugBatch{i}\n\n"));
                let first = source.matches('\n').count() + 1;
                source.push_str(s);
                source.push('\n');
                let last = source.matches('\n').count();
                source.push_str(&format!("\nend LeanaugBatch{i}\n\n"));
                ranges.push((first, last));
            }
            let run = self.run(&source)?;
            if run.timed_out {
                for s in chunk {
                    results.push(self.check(s)?);
                }
                continue;
            }
            let diags: Vec<LeanDiagnostic> =
                parse_diagnostics(&run.output).into_iter().filter(|d| d.severity == "error").collect();
            let share = run.elapsed / chunk.len() as u32;
            let stray = diags.iter().any(|d| !ranges.iter().any(|(a, b)| (*a..=*b).contains(&d.line)));
            for (first, last) in &ranges {
                let errors: Vec<CompileError> = diags
                    .iter()
                    .filter(|d| (*first..=*last).contains(&d.line))
                    .map(|d| CompileError {
                        line: d.line + 1 - first,
                        column: d.column,
                        message: d.message.clone(),
                    })
                    .collect();
                results.push(if errors.is_empty() {
                    CompileResult::passed(&self.version, share)
                } else {
                    CompileResult::failed(&self.version, share, errors)
                });
            }
            if stray || (!run.success && diags.is_empty()) {
                // errors outside any statement: attribute nothing, re-check singly
                let n = results.len() - chunk.len();
                results.truncate(n);
                for s in chunk {
                    results.push(self.check(s)?);
                }
            }
        }
        Ok(results)
    }

    fn toolchain(&self) -> String {
        self.version.clone()
    }
}
