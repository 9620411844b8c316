use std::collections::BTreeMap;

/// A prompt template stored as a text asset. Slots are written `{Name}`;
/// only the names listed in `slots` are substituted, any other brace text
/// is literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Template {
    pub name: &'static str,
    pub text: &'static str,
    pub slots: &'static [&'static str],
}

pub const EVOL_DOMAIN: Template = Template {
    name: "evol_domain",
    text: include_str!("../../templates/evol_domain.txt"),
    slots: &["Domain List", "Original Formal Statement"],
};

pub const EVOL_DIFFICULTY_UP: Template = Template {
    name: "evol_difficulty_up",
    text: include_str!("../../templates/evol_difficulty_up.txt"),
    slots: &["strategy", "Specific Methods", "Original Formal Statement"],
};

pub const EVOL_DIFFICULTY_DOWN: Template = Template {
    name: "evol_difficulty_down",
    text: include_str!("../../templates/evol_difficulty_down.txt"),
    slots: &["strategy", "Specific Methods", "Original Formal Statement"],
};

pub const JUDGE_CONSISTENCY: Template = Template {
    name: "judge_consistency",
    text: include_str!("../../templates/judge_consistency.txt"),
    slots: &["Natural Language Description", "Formal Statement"],
};

pub const JUDGE_CORRECTNESS: Template = Template {
    name: "judge_correctness",
    text: include_str!("../../templates/judge_correctness.txt"),
    slots: &["original nl", "correct formal statement"],
};

pub const JUDGE_DIFFICULTY: Template = Template {
    name: "judge_difficulty",
    text: include_str!("../../templates/judge_difficulty.txt"),
    slots: &["Natural Language Description", "Formal Statement"],
};

pub const REPAIR: Template = Template {
    name: "repair",
    text: include_str!("../../templates/repair.txt"),
    slots: &["incorrect lean4 code", "errors"],
};

pub const CLASSIFY_DOMAIN: Template = Template {
    name: "classify_domain",
    text: include_str!("../../templates/classify_domain.txt"),
    slots: &["Domain List", "Formal Statement"],
};

pub const ALL: [Template; 8] = [
    EVOL_DOMAIN,
    EVOL_DIFFICULTY_UP,
    EVOL_DIFFICULTY_DOWN,
    JUDGE_CONSISTENCY,
    JUDGE_CORRECTNESS,
    JUDGE_DIFFICULTY,
    REPAIR,
    CLASSIFY_DOMAIN,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment<'a> {
    Literal(&'a str),
    Slot(&'a str),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template {template}: no value for slot {{{slot}}}")]
    MissingValue { template: &'static str, slot: String },
    #[error("template {template}: {{{slot}}} is not a slot")]
    UnknownSlot { template: &'static str, slot: String },
    #[error("template {template}: rendered text differs outside the slots")]
    Diverges { template: &'static str },
}

impl Template {
    /// The template split at its slots. Adjacent literals never occur.
    pub fn segments(&self) -> Vec<Segment<'static>> {
        let text = self.text;
        let mut out = Vec::new();
        let mut lit_start = 0;
        let mut i = 0;
        while i < text.len() {
            if text.as_bytes()[i] == b'{' {
                if let Some(slot) = self.slots.iter().find(|s| text[i + 1..].starts_with(&format!("{s}}}"))) {
                    if lit_start < i {
                        out.push(Segment::Literal(&text[lit_start..i]));
                    }
                    out.push(Segment::Slot(slot));
                    i += slot.len() + 2;
                    lit_start = i;
                    continue;
                }
            }
            i += 1;
        }
        if lit_start < text.len() {
            out.push(Segment::Literal(&text[lit_start..]));
        }
        out
    }

    /// Substitutes every slot verbatim. Values are not re-scanned, so a
    /// value containing `{...}` stays as is.
    pub fn render(&self, values: &[(&str, &str)]) -> Result<String, TemplateError> {
        for (k, _) in values {
            if !self.slots.contains(k) {
                return Err(TemplateError::UnknownSlot {
                    template: self.name,
                    slot: k.to_string(),
                });
            }
        }
        let mut out = String::with_capacity(self.text.len() + values.iter().map(|(_, v)| v.len()).sum::<usize>());
        for seg in self.segments() {
            match seg {
                Segment::Literal(t) => out.push_str(t),
                Segment::Slot(s) => {
                    let v = values.iter().find(|(k, _)| *k == s).ok_or_else(|| TemplateError::MissingValue {
                        template: self.name,
                        slot: s.to_string(),
                    })?;
                    out.push_str(v.1);
                }
            }
        }
        Ok(out)
    }

    /// Checks that `rendered` equals the template everywhere outside the
    /// slots and returns what each slot was filled with.
    pub fn match_rendered(&self, rendered: &str) -> Result<BTreeMap<String, String>, TemplateError> {
        let segs = self.segments();
        let mut slots = BTreeMap::new();
        if match_from(&segs, rendered, &mut slots) {
            Ok(slots)
        } else {
            Err(TemplateError::Diverges { template: self.name })
        }
    }
}

// backtracks over the occurrences of the literal after each slot so slot
// values may contain template text
fn match_from(segs: &[Segment], rest: &str, slots: &mut BTreeMap<String, String>) -> bool {
    match segs {
        [] => rest.is_empty(),
        [Segment::Literal(t), tail @ ..] => rest.strip_prefix(t).is_some_and(|r| match_from(tail, r, slots)),
        [Segment::Slot(s), tail @ ..] => match tail.first() {
            None => {
                slots.insert(s.to_string(), rest.to_string());
                true
            }
            Some(Segment::Literal(next)) => {
                for (at, _) in rest.match_indices(next) {
                    if match_from(tail, &rest[at..], slots) {
                        slots.insert(s.to_string(), rest[..at].to_string());
                        return true;
                    }
                }
                false
            }
            Some(Segment::Slot(_)) => false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_slot_occurs_in_its_template() {
        for t in ALL {
            let found: Vec<&str> = t
                .segments()
                .into_iter()
                .filter_map(|s| match s {
                    Segment::Slot(s) => Some(s),
                    Segment::Literal(_) => None,
                })
                .collect();
            for s in t.slots {
                assert!(found.contains(s), "{}: {s}", t.name);
            }
        }
    }

    #[test]
    fn render_then_match_recovers_values() {
        let values = [("incorrect lean4 code", "theorem t : {x} := by sorry"), ("errors", "1:2: error: ```judge")];
        let out = REPAIR.render(&values).unwrap();
        let got = REPAIR.match_rendered(&out).unwrap();
        assert_eq!(got["incorrect lean4 code"], values[0].1);
        assert_eq!(got["errors"], values[1].1);
    }

    #[test]
    fn edits_outside_slots_are_detected() {
        let out = REPAIR.render(&[("incorrect lean4 code", "a"), ("errors", "b")]).unwrap();
        let tampered = out.replacen("Corrected", "Fixed", 1);
        assert!(REPAIR.match_rendered(&tampered).is_err());
        assert!(REPAIR.match_rendered(&format!("{out} ")).is_err());
    }

    #[test]
    fn missing_and_unknown_slots() {
        assert!(matches!(REPAIR.render(&[("errors", "")]), Err(TemplateError::MissingValue { .. })));
        assert!(matches!(
            REPAIR.render(&[("errors", ""), ("incorrect lean4 code", ""), ("x", "")]),
            Err(TemplateError::UnknownSlot { .. })
        ));
    }
}
