use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// One statement of an input corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub formal_statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nl_description: Option<String>,
    #[serde(default)]
    pub source: String,
    #[serde(default, alias = "domain_label", skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Jsonl,
    /// A directory of `.lean` files, one theorem each.
    LeanDir,
    /// One `.lean` file holding any number of theorems.
    LeanFile,
}

impl InputFormat {
    pub fn detect(path: &Path) -> InputFormat {
        if path.is_dir() {
            InputFormat::LeanDir
        } else if path.extension().is_some_and(|e| e == "lean") {
            InputFormat::LeanFile
        } else {
            InputFormat::Jsonl
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestDiagnostic {
    /// Line number for jsonl, relative path for lean directories.
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ingested {
    pub records: Vec<DatasetRecord>,
    pub skipped: Vec<IngestDiagnostic>,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot walk {path}: {source}")]
    Walk {
        path: PathBuf,
        #[source]
        source: walkdir::Error,
    },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a corpus. Bad lines or files are skipped and reported; only an
/// unreadable input is an error.
pub fn ingest(path: &Path, format: InputFormat) -> Result<Ingested, IngestError> {
    let mut out = match format {
        InputFormat::Jsonl => ingest_jsonl(path)?,
        InputFormat::LeanDir => ingest_lean_dir(path)?,
        InputFormat::LeanFile => ingest_lean_file(path)?,
    };
    let mut seen = HashSet::new();
    let mut kept = Vec::with_capacity(out.records.len());
    for r in out.records {
        if seen.insert(r.id.clone()) {
            kept.push(r);
        } else {
            out.skipped.push(IngestDiagnostic {
                location: r.id.clone(),
                message: format!("duplicate id {}", r.id),
            });
        }
    }
    out.records = kept;
    for d in &out.skipped {
        tracing::warn!(location = %d.location, "skipped input: {}", d.message);
    }
    Ok(out)
}

fn ingest_jsonl(path: &Path) -> Result<Ingested, IngestError> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    let mut out = Ingested::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let skip = |message: String| IngestDiagnostic {
            location: format!("line {}", i + 1),
            message,
        };
        match serde_json::from_str::<DatasetRecord>(line) {
            Ok(r) if r.formal_statement.trim().is_empty() => out.skipped.push(skip("empty formal_statement".into())),
            Ok(r) if r.id.trim().is_empty() => out.skipped.push(skip("empty id".into())),
            Ok(r) => out.records.push(r),
            Err(e) => out.skipped.push(skip(e.to_string())),
        }
    }
    Ok(out)
}

fn starts_theorem(line: &str) -> bool {
    let l = line.trim_start();
    l.starts_with("theorem ") || l.starts_with("lemma ")
}

fn theorem_count(text: &str) -> usize {
    text.lines().filter(|l| starts_theorem(l)).count()
}

/// Splits Lean source into theorem blocks, each with its 1-based first
/// line. Text before the first theorem is dropped.
pub fn split_theorems(text: &str) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if starts_theorem(line) {
            out.push((i + 1, String::new()));
        }
        if let Some((_, block)) = out.last_mut() {
            block.push_str(line);
            block.push('\n');
        }
    }
    for (_, block) in &mut out {
        *block = block.trim().to_string();
    }
    out
}

fn ingest_lean_file(path: &Path) -> Result<Ingested, IngestError> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    let source = path
        .file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut out = Ingested::default();
    let mut taken = HashSet::new();
    for (line, block) in split_theorems(&text) {
        let name = block.split_whitespace().nth(1).unwrap_or("theorem").to_string();
        let id = if taken.insert(name.clone()) { name } else { format!("{name}@{line}") };
        out.records.push(DatasetRecord {
            id,
            formal_statement: block,
            nl_description: None,
            source: source.clone(),
            domain: None,
        });
    }
    Ok(out)
}

fn ingest_lean_dir(root: &Path) -> Result<Ingested, IngestError> {
    let source = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut out = Ingested::default();
    let walker = walkdir::WalkDir::new(root).sort_by_file_name();
    for entry in walker {
        let entry = entry.map_err(|source| IngestError::Walk {
            path: root.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "lean") {
            continue;
        }
        let rel = path
            .strip_prefix(root)
            .unwrap_or(path)
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let text = fs::read_to_string(path).map_err(io(path))?;
        match theorem_count(&text) {
            1 => out.records.push(DatasetRecord {
                id: rel,
                formal_statement: text.trim().to_string(),
                nl_description: None,
                source: source.clone(),
                domain: None,
            }),
            n => out.skipped.push(IngestDiagnostic {
                location: rel,
                message: format!("expected one theorem, found {n}"),
            }),
        }
    }
    Ok(out)
}
