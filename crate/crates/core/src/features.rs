//! Feature templates over parser states.
//!
//! Every template fires exactly once per state. Missing positions (empty
//! stack slot, exhausted queue) take the value [`NONE`].

use crate::corpus::Token;
use crate::transition::ParserState;

pub const NONE: &str = "<NONE>";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    S0,
    S1,
    Q0,
    Q1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Word,
    Tag,
}

use Field::{Tag, Word};
use Slot::{Q0, Q1, S0, S1};

type Template = &'static [(Slot, Field)];

const TEMPLATES: &[Template] = &[
    // unigram
    &[(S0, Word)],
    &[(S0, Tag)],
    &[(S0, Word), (S0, Tag)],
    &[(S1, Word)],
    &[(S1, Tag)],
    &[(S1, Word), (S1, Tag)],
    &[(Q0, Word)],
    &[(Q0, Tag)],
    &[(Q0, Word), (Q0, Tag)],
    &[(Q1, Tag)],
    // pair
    &[(S0, Word), (S1, Word)],
    &[(S0, Tag), (S1, Tag)],
    &[(S0, Tag), (Q0, Tag)],
    &[(S0, Word), (S0, Tag), (S1, Tag)],
    &[(S0, Tag), (S1, Word), (S1, Tag)],
    &[(S0, Word), (S1, Word), (S1, Tag)],
    &[(S0, Word), (S0, Tag), (S1, Word)],
    &[(S0, Word), (S0, Tag), (S1, Word), (S1, Tag)],
    // triple
    &[(S0, Tag), (S1, Tag), (Q0, Tag)],
    &[(S0, Tag), (Q0, Tag), (Q1, Tag)],
    &[(S1, Tag), (S0, Tag), (Q0, Tag), (Q1, Tag)],
];

pub const TEMPLATE_COUNT: usize = TEMPLATES.len();

fn slot_name(slot: Slot, field: Field) -> &'static str {
    match (slot, field) {
        (S0, Word) => "s0w",
        (S0, Tag) => "s0t",
        (S1, Word) => "s1w",
        (S1, Tag) => "s1t",
        (Q0, Word) => "q0w",
        (Q0, Tag) => "q0t",
        (Q1, Word) => "q1w",
        (Q1, Tag) => "q1t",
    }
}

fn template_name(t: Template) -> String {
    t.iter()
        .map(|&(s, f)| slot_name(s, f))
        .collect::<Vec<_>>()
        .join("|")
}

/// Names of all templates, in emission order.
pub fn template_names() -> Vec<String> {
    TEMPLATES.iter().map(|t| template_name(t)).collect()
}

/// Names of the templates built from POS tags alone.
pub fn pos_only_template_names() -> Vec<String> {
    TEMPLATES
        .iter()
        .filter(|t| t.iter().all(|&(_, f)| f == Tag))
        .map(|t| template_name(t))
        .collect()
}

/// Binary features of one state, in template order. Template names are
/// distinct, so the list never holds duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureVector(Vec<String>);

impl FeatureVector {
    pub fn from_strings(features: impl IntoIterator<Item = String>) -> Self {
        let mut v: Vec<String> = Vec::new();
        for f in features {
            if !v.contains(&f) {
                v.push(f);
            }
        }
        FeatureVector(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, feature: &str) -> bool {
        self.0.iter().any(|f| f == feature)
    }
}

/// Extracts the feature strings `template=value` for `state` over `sentence`.
pub fn extract(state: &ParserState, sentence: &[Token]) -> FeatureVector {
    let position = |slot: Slot| match slot {
        S0 => state.stack_item(0),
        S1 => state.stack_item(1),
        Q0 => state.queue_item(0),
        Q1 => state.queue_item(1),
    };
    let value = |slot: Slot, field: Field| -> &str {
        match position(slot).and_then(|i| sentence.get(i - 1)) {
            Some(tok) => match field {
                Word => &tok.form,
                Tag => &tok.pos,
            },
            None => NONE,
        }
    };
    let features = TEMPLATES
        .iter()
        .map(|t| {
            let mut s = template_name(t);
            s.push('=');
            for (i, &(slot, field)) in t.iter().enumerate() {
                if i > 0 {
                    s.push('|');
                }
                s.push_str(value(slot, field));
            }
            s
        })
        .collect();
    FeatureVector(features)
}
