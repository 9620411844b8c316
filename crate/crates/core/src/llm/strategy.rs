use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub const DEFAULT_DOMAINS: [&str; 12] = [
    "Algebra",
    "Number Theory",
    "Integral",
    "Precalculus",
    "Differentiation",
    "Multivariable Calculus",
    "Sequences Series",
    "Applied Mathematics",
    "Discrete Mathematics",
    "Geometry",
    "Calculus",
    "Other",
];

/// Target domains offered to the model. Non-empty, names unique.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct DomainList(Vec<String>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainListError {
    #[error("domain list is empty")]
    Empty,
    #[error("domain {0:?} listed twice")]
    Duplicate(String),
    #[error("domain name is blank")]
    Blank,
}

impl Default for DomainList {
    fn default() -> Self {
        DomainList(DEFAULT_DOMAINS.iter().map(|s| s.to_string()).collect())
    }
}

impl TryFrom<Vec<String>> for DomainList {
    type Error = DomainListError;

    fn try_from(names: Vec<String>) -> Result<Self, Self::Error> {
        if names.is_empty() {
            return Err(DomainListError::Empty);
        }
        for (i, n) in names.iter().enumerate() {
            if n.trim().is_empty() {
                return Err(DomainListError::Blank);
            }
            if names[..i].contains(n) {
                return Err(DomainListError::Duplicate(n.clone()));
            }
        }
        Ok(DomainList(names))
    }
}

impl From<DomainList> for Vec<String> {
    fn from(d: DomainList) -> Self {
        d.0
    }
}

impl DomainList {
    pub fn names(&self) -> &[String] {
        &self.0
    }

    /// The canonical spelling of `name`, matched case-insensitively and
    /// ignoring surrounding quotes and punctuation.
    pub fn resolve(&self, name: &str) -> Option<&str> {
        let key = name.trim().trim_matches(|c: char| c == '"' || c == '\'' || c == '.' || c == '(' || c == ')');
        self.0.iter().find(|d| d.eq_ignore_ascii_case(key.trim())).map(String::as_str)
    }

    /// The list as it appears in the prompt: `["Algebra", "Number Theory", ...]`.
    pub fn render(&self) -> String {
        let quoted: Vec<String> = self.0.iter().map(|d| format!("\"{d}\"")).collect();
        format!("[{}]", quoted.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("direction must be +1 or -1, got {0}")]
    Direction(i64),
    #[error("strategy index must be 1..=5, got {0}")]
    Index(u8),
    #[error("unrecognized strategy label {0:?}")]
    Label(String),
}

impl TryFrom<i64> for Direction {
    type Error = StrategyError;

    fn try_from(delta: i64) -> Result<Self, Self::Error> {
        match delta {
            1 => Ok(Direction::Up),
            -1 => Ok(Direction::Down),
            d => Err(StrategyError::Direction(d)),
        }
    }
}

impl Direction {
    pub fn delta(self) -> i64 {
        match self {
            Direction::Up => 1,
            Direction::Down => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct StrategyText {
    title: String,
    methods: Vec<String>,
}

fn parse_strategy_asset(text: &str) -> Vec<StrategyText> {
    let mut out: Vec<StrategyText> = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if line.starts_with('(') {
            out.last_mut().expect("method before any title").methods.push(line.to_string());
        } else {
            let title = line.split_once(". ").map_or(line, |(_, t)| t);
            out.push(StrategyText {
                title: title.to_string(),
                methods: Vec::new(),
            });
        }
    }
    out
}

fn table(direction: Direction) -> &'static [StrategyText] {
    static UP: OnceLock<Vec<StrategyText>> = OnceLock::new();
    static DOWN: OnceLock<Vec<StrategyText>> = OnceLock::new();
    match direction {
        Direction::Up => UP.get_or_init(|| parse_strategy_asset(include_str!("../../templates/strategies_up.txt"))),
        Direction::Down => DOWN.get_or_init(|| parse_strategy_asset(include_str!("../../templates/strategies_down.txt"))),
    }
}

/// One of the five strategies in one direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DifficultyStrategy {
    index: u8,
    direction: Direction,
}

impl DifficultyStrategy {
    pub fn new(index: u8, direction: Direction) -> Result<Self, StrategyError> {
        if !(1..=5).contains(&index) {
            return Err(StrategyError::Index(index));
        }
        Ok(DifficultyStrategy { index, direction })
    }

    /// Builds from a signed direction, rejecting anything but ±1.
    pub fn from_delta(index: u8, delta: i64) -> Result<Self, StrategyError> {
        DifficultyStrategy::new(index, Direction::try_from(delta)?)
    }

    /// All ten strategies, ordered (s1,+), (s1,−), (s2,+), ...
    pub fn all() -> Vec<DifficultyStrategy> {
        (1..=5)
            .flat_map(|i| [Direction::Up, Direction::Down].map(|d| DifficultyStrategy { index: i, direction: d }))
            .collect()
    }

    pub fn index(&self) -> u8 {
        self.index
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn title(&self) -> &'static str {
        &table(self.direction)[self.index as usize - 1].title
    }

    pub fn methods(&self) -> &'static [String] {
        &table(self.direction)[self.index as usize - 1].methods
    }

    /// `s3+` / `s3-`.
    pub fn label(&self) -> String {
        let sign = match self.direction {
            Direction::Up => '+',
            Direction::Down => '-',
        };
        format!("s{}{sign}", self.index)
    }
}

impl fmt::Display for DifficultyStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for DifficultyStrategy {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || StrategyError::Label(s.to_string());
        let body = s.strip_prefix('s').ok_or_else(bad)?;
        let direction = match body.chars().last() {
            Some('+') => Direction::Up,
            Some('-') => Direction::Down,
            _ => return Err(bad()),
        };
        let digits = &body[..body.len() - 1];
        DifficultyStrategy::new(digits.parse().map_err(|_| bad())?, direction)
    }
}

impl TryFrom<String> for DifficultyStrategy {
    type Error = StrategyError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<DifficultyStrategy> for String {
    fn from(s: DifficultyStrategy) -> Self {
        s.label()
    }
}

/// Round-robin over the ten (strategy, direction) pairs: the `k`-th call
/// for seed number `seed_index` gets pair `(seed_index * per_seed + k) mod 10`.
pub fn difficulty_schedule(seed_index: usize, per_seed: usize) -> Vec<DifficultyStrategy> {
    let all = DifficultyStrategy::all();
    (0..per_seed).map(|k| all[(seed_index * per_seed + k) % all.len()]).collect()
}
