/// A ```` ```label ```` ... ```` ``` ```` block of model output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fence {
    /// Text after the opening backticks, trimmed.
    pub label: String,
    pub body: String,
    /// 1-based line of the opening fence.
    pub line: usize,
    /// False when the text ended before a closing fence.
    pub closed: bool,
}

/// All fenced blocks in order. A line opens a block when it starts with
/// three backticks; the block closes at the next line consisting of
/// backticks alone. Never fails.
pub fn fences(text: &str) -> Vec<Fence> {
    let mut out = Vec::new();
    let mut open: Option<(String, usize, Vec<&str>)> = None;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        match open.take() {
            None => {
                if let Some(rest) = t.strip_prefix("```") {
                    // one-line form ```judge Yes```
                    if let Some(inner) = rest.strip_suffix("```").filter(|r| !r.is_empty()) {
                        let (label, body) = inner.split_once(char::is_whitespace).unwrap_or((inner, ""));
                        out.push(Fence {
                            label: label.trim().to_string(),
                            body: body.trim().to_string(),
                            line: i + 1,
                            closed: true,
                        });
                    } else {
                        open = Some((rest.trim().to_string(), i + 1, Vec::new()));
                    }
                }
            }
            Some((label, start, mut body)) => {
                if !t.is_empty() && t.chars().all(|c| c == '`') && t.len() >= 3 {
                    out.push(Fence {
                        label,
                        body: body.join("\n"),
                        line: start,
                        closed: true,
                    });
                } else {
                    body.push(line);
                    open = Some((label, start, body));
                }
            }
        }
    }
    if let Some((label, line, body)) = open {
        out.push(Fence {
            label,
            body: body.join("\n"),
            line,
            closed: false,
        });
    }
    out
}

/// Body of the last block whose label equals `label` (case-insensitive).
pub fn last_fence_labeled<'a>(blocks: &'a [Fence], label: &str) -> Option<&'a Fence> {
    blocks.iter().rev().find(|f| f.label.eq_ignore_ascii_case(label))
}
