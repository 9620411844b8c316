use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::record::InputFormat;
use crate::engine::EngineConfig;
use crate::llm::{DomainList, LlmEndpointConfig};
use crate::verify::{LeanConfig, VerifyConfig};

/// Version of the output record layout and of this config.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Methods {
    pub domain: bool,
    pub difficulty: bool,
    pub ast: bool,
}

impl Default for Methods {
    fn default() -> Self {
        Methods {
            domain: true,
            difficulty: true,
            ast: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockConfig {
    /// Offline backends: syntax-only compiler and a canned LLM.
    pub enabled: bool,
    /// Directory for the fixture transport. Without it the synthetic
    /// transport answers.
    pub fixtures: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema_version: u32,
    pub input: PathBuf,
    pub input_format: Option<InputFormat>,
    pub output: PathBuf,
    /// Journal of finished seeds; `<output>.journal.jsonl` when unset.
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    pub methods: Methods,
    pub domain_calls_per_seed: usize,
    pub difficulty_calls_per_seed: usize,
    pub domains: DomainList,
    pub engine: EngineConfig,
    /// Also run AST evolution on the seeds themselves.
    pub ast_on_seeds: bool,
    pub llm: LlmEndpointConfig,
    /// Endpoint for judge and repair calls; `llm` when unset.
    pub judge_llm: Option<LlmEndpointConfig>,
    pub verify: VerifyConfig,
    pub lean: LeanConfig,
    pub mock: MockConfig,
    pub dedup: bool,
    pub benchmarks: Vec<PathBuf>,
    /// Worker threads; CPU count when unset.
    pub jobs: Option<usize>,
    /// Seeds processed between checkpoints.
    pub chunk_size: usize,
    /// Uniform sample of this many seeds.
    pub sample: Option<usize>,
    pub rng_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            schema_version: SCHEMA_VERSION,
            input: PathBuf::from("seeds.jsonl"),
            input_format: None,
            output: PathBuf::from("augmented.jsonl"),
            checkpoint: None,
            resume: true,
            methods: Methods::default(),
            domain_calls_per_seed: 1,
            difficulty_calls_per_seed: 2,
            domains: DomainList::default(),
            engine: EngineConfig::default(),
            ast_on_seeds: true,
            llm: LlmEndpointConfig::default(),
            judge_llm: None,
            verify: VerifyConfig::default(),
            lean: LeanConfig::default(),
            mock: MockConfig::default(),
            dedup: true,
            benchmarks: Vec::new(),
            jobs: None,
            chunk_size: 64,
            sample: None,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl PipelineConfig {
    /// [`PipelineConfig::read`] followed by validation.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let cfg = PipelineConfig::read(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `.json` as JSON and anything else as TOML.
    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |message: String| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        };
        let cfg: PipelineConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| parse_err(e.to_string()))?
        };
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let m = &self.methods;
        if !(m.domain || m.difficulty || m.ast) {
            return bad("at least one method must be enabled".into());
        }
        if self.chunk_size == 0 {
            return bad("chunk_size must be at least 1".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        if m.ast {
            self.engine.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if !self.mock.enabled && (m.domain || m.difficulty) {
            self.llm.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.checkpoint.clone().unwrap_or_else(|| sibling(&self.output, ".journal.jsonl"))
    }

    pub fn stats_path(&self) -> PathBuf {
        sibling(&self.output, ".stats.json")
    }

    pub fn input_format(&self) -> InputFormat {
        self.input_format.unwrap_or_else(|| InputFormat::detect(&self.input))
    }
}

/// `out.jsonl` -> `out.jsonl<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
