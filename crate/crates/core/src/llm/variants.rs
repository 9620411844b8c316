use serde::{Deserialize, Serialize};

use super::fence::{fences, Fence};
use super::strategy::DomainList;
use crate::lean::Statement;

/// At most this many variants are taken from one response.
pub const MAX_VARIANTS: usize = 5;

/// One (description, statement) pair proposed by the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub nl_description: String,
    pub formal_statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based line in the response, 0 when not tied to a line.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedVariants {
    pub variants: Vec<Variant>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Nl,
    Formal,
    Domain,
    Other,
}

fn kind(label: &str) -> Kind {
    let l = label.to_ascii_lowercase();
    if l.starts_with("nl") || l.contains("description") || l.contains("natural") {
        Kind::Nl
    } else if l.contains("formal") || l.starts_with("lean") {
        Kind::Formal
    } else if l.contains("domain") {
        Kind::Domain
    } else {
        Kind::Other
    }
}

#[derive(Default)]
struct Group {
    line: usize,
    nl: Option<String>,
    formal: Option<String>,
    domain: Option<(String, usize)>,
}

/// Extracts variants from a raw model response using the NL Description /
/// Formal Statement / Domain fences. Total on arbitrary text.
pub fn parse_variants(response: &str, expect_domain: bool) -> ParsedVariants {
    parse_variants_with(response, expect_domain, &DomainList::default())
}

pub fn parse_variants_with(response: &str, expect_domain: bool, domains: &DomainList) -> ParsedVariants {
    let mut out = ParsedVariants::default();
    let blocks = fences(response);
    if blocks.is_empty() {
        out.diagnostics.push(Diagnostic {
            line: 0,
            message: "no fenced blocks in response".into(),
        });
        return out;
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut cur: Option<Group> = None;
    for Fence { label, body, line, closed } in &blocks {
        if !closed {
            out.diagnostics.push(Diagnostic {
                line: *line,
                message: format!("unterminated ```{label} block"),
            });
        }
        let body = body.trim().to_string();
        match kind(label) {
            Kind::Nl => {
                if cur.as_ref().is_some_and(|g| g.nl.is_some() || g.formal.is_some()) {
                    groups.extend(cur.take());
                }
                cur.get_or_insert_with(|| Group { line: *line, ..Group::default() }).nl = Some(body);
            }
            Kind::Formal => {
                if cur.as_ref().is_some_and(|g| g.formal.is_some()) {
                    groups.extend(cur.take());
                }
                cur.get_or_insert_with(|| Group { line: *line, ..Group::default() }).formal = Some(body);
            }
            Kind::Domain => match cur.as_mut() {
                Some(g) if g.domain.is_none() => g.domain = Some((body, *line)),
                _ => out.diagnostics.push(Diagnostic {
                    line: *line,
                    message: "domain block without a variant".into(),
                }),
            },
            Kind::Other => out.diagnostics.push(Diagnostic {
                line: *line,
                message: format!("ignored ```{label} block"),
            }),
        }
    }
    groups.extend(cur);

    for g in groups {
        let Some(formal) = g.formal else {
            out.diagnostics.push(Diagnostic {
                line: g.line,
                message: "missing formal statement".into(),
            });
            continue;
        };
        if formal.is_empty() {
            out.diagnostics.push(Diagnostic {
                line: g.line,
                message: "empty formal statement".into(),
            });
            continue;
        }
        if !formal.trim_end().ends_with(Statement::TRAILER) {
            out.diagnostics.push(Diagnostic {
                line: g.line,
                message: "missing trailer".into(),
            });
            continue;
        }
        let nl = g.nl.unwrap_or_else(|| {
            out.diagnostics.push(Diagnostic {
                line: g.line,
                message: "missing natural language description".into(),
            });
            String::new()
        });
        let domain = match g.domain {
            Some((d, line)) => {
                let resolved = domains.resolve(&d).map(str::to_string);
                if resolved.is_none() {
                    out.diagnostics.push(Diagnostic {
                        line,
                        message: format!("unknown domain {d:?}"),
                    });
                }
                resolved
            }
            None => {
                if expect_domain {
                    out.diagnostics.push(Diagnostic {
                        line: g.line,
                        message: "missing domain".into(),
                    });
                }
                None
            }
        };
        if out.variants.len() == MAX_VARIANTS {
            out.diagnostics.push(Diagnostic {
                line: g.line,
                message: format!("more than {MAX_VARIANTS} variants, extra dropped"),
            });
            continue;
        }
        out.variants.push(Variant {
            nl_description: nl,
            formal_statement: formal,
            domain: if expect_domain { domain } else { None },
        });
    }
    out
}

/// Writes variants in the response format the templates ask for.
pub fn render_variants(variants: &[Variant]) -> String {
    let mut out = String::new();
    for v in variants {
        out.push_str(&format!(
            "```NL Description\n{}\n```\n```Formal Statement\n{}\n```\n",
            v.nl_description, v.formal_statement
        ));
        if let Some(d) = &v.domain {
            out.push_str(&format!("``` Domain\n{d}\n```\n"));
        }
        out.push('\n');
    }
    out
}
