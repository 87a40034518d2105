//! Unigram alignment and the weighted precision / recall / F-score.
//!
//! Matching is case-insensitive. Alignment runs in stages (exact, stem,
//! synonym, paraphrase); each stage links still-unmatched words only, so a
//! higher-priority relation always claims a pair first.

use std::fmt;

use thiserror::Error;

use crate::corpus::{LexicalResources, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexicalError {
    #[error("reference sentence is empty")]
    EmptyReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatchModule {
    Exact,
    Stem,
    Synonym,
    Paraphrase,
}

impl MatchModule {
    pub const STAGES: [MatchModule; 4] = [
        MatchModule::Exact,
        MatchModule::Stem,
        MatchModule::Synonym,
        MatchModule::Paraphrase,
    ];
}

impl fmt::Display for MatchModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchModule::Exact => "exact",
            MatchModule::Stem => "stem",
            MatchModule::Synonym => "synonym",
            MatchModule::Paraphrase => "paraphrase",
        })
    }
}

/// Weighting parameters of the F-score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FScoreConfig {
    pub alpha: f64,
    /// Weight of function words; content words get `1 - w_f`.
    pub w_f: f64,
    pub w_exact: f64,
    pub w_stem: f64,
    pub w_synonym: f64,
    pub w_paraphrase: f64,
}

impl Default for FScoreConfig {
    fn default() -> Self {
        FScoreConfig {
            alpha: 0.85,
            w_f: 0.25,
            w_exact: 1.0,
            w_stem: 0.6,
            w_synonym: 0.8,
            w_paraphrase: 0.6,
        }
    }
}

impl FScoreConfig {
    pub fn module_weight(&self, module: MatchModule) -> f64 {
        match module {
            MatchModule::Exact => self.w_exact,
            MatchModule::Stem => self.w_stem,
            MatchModule::Synonym => self.w_synonym,
            MatchModule::Paraphrase => self.w_paraphrase,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        for (name, v) in [
            ("w_f", self.w_f),
            ("w_exact", self.w_exact),
            ("w_stem", self.w_stem),
            ("w_synonym", self.w_synonym),
            ("w_paraphrase", self.w_paraphrase),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

/// A link between hypothesis position `hyp` and reference position `reference`
/// (both 0-based into the token slices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub hyp: usize,
    pub reference: usize,
    pub module: MatchModule,
}

/// One-to-one alignment, links ordered by hypothesis position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchAlignment {
    pub links: Vec<Link>,
}

struct Words {
    lower: Vec<String>,
    stems: Vec<String>,
}

impl Words {
    fn new(tokens: &[Token], res: &LexicalResources) -> Self {
        let lower: Vec<String> = tokens.iter().map(|t| t.form.to_lowercase()).collect();
        let stems = lower.iter().map(|w| res.stemmer.stem(w)).collect();
        Words { lower, stems }
    }
}

pub fn align(hyp: &[Token], reference: &[Token], res: &LexicalResources) -> MatchAlignment {
    let h = Words::new(hyp, res);
    let r = Words::new(reference, res);
    let mut hyp_used = vec![false; hyp.len()];
    let mut ref_used = vec![false; reference.len()];
    let mut links = Vec::new();

    for module in MatchModule::STAGES {
        let matches = |i: usize, j: usize| match module {
            MatchModule::Exact => h.lower[i] == r.lower[j],
            MatchModule::Stem => h.stems[i] == r.stems[j],
            MatchModule::Synonym => res.are_synonyms(&h.lower[i], &r.lower[j]),
            MatchModule::Paraphrase => res.are_paraphrases(&h.lower[i], &r.lower[j]),
        };
        #[allow(clippy::needless_range_loop)]
        for i in 0..hyp.len() {
            if hyp_used[i] {
                continue;
            }
            // closest free reference word, leftmost on ties
            let best = (0..reference.len())
                .filter(|&j| !ref_used[j] && matches(i, j))
                .min_by_key(|&j| (i.abs_diff(j), j));
            if let Some(j) = best {
                hyp_used[i] = true;
                ref_used[j] = true;
                links.push(Link {
                    hyp: i,
                    reference: j,
                    module,
                });
            }
        }
    }
    links.sort_by_key(|l| l.hyp);
    MatchAlignment { links }
}

/// Weighted match ratio over one side of the alignment.
fn weighted_ratio<'a>(
    matched: impl Iterator<Item = (&'a Token, MatchModule)>,
    side: &[Token],
    res: &LexicalResources,
    config: &FScoreConfig,
) -> f64 {
    let is_function = |t: &Token| res.is_function_word(&t.form.to_lowercase());
    let word_weight = |t: &Token| {
        if is_function(t) {
            config.w_f
        } else {
            1.0 - config.w_f
        }
    };
    let numerator: f64 = matched
        .map(|(t, m)| config.module_weight(m) * word_weight(t))
        .sum();
    let num_f = side.iter().filter(|t| is_function(t)).count() as f64;
    let num_c = side.len() as f64 - num_f;
    let denominator = config.w_f * num_f + (1.0 - config.w_f) * num_c;
    if denominator > 0.0 {
        numerator / denominator
    } else {
        0.0
    }
}

pub fn precision(
    alignment: &MatchAlignment,
    hyp: &[Token],
    res: &LexicalResources,
    config: &FScoreConfig,
) -> f64 {
    if hyp.is_empty() {
        return 0.0;
    }
    weighted_ratio(
        alignment.links.iter().map(|l| (&hyp[l.hyp], l.module)),
        hyp,
        res,
        config,
    )
}

pub fn recall(
    alignment: &MatchAlignment,
    reference: &[Token],
    res: &LexicalResources,
    config: &FScoreConfig,
) -> Result<f64, LexicalError> {
    if reference.is_empty() {
        return Err(LexicalError::EmptyReference);
    }
    Ok(weighted_ratio(
        alignment
            .links
            .iter()
            .map(|l| (&reference[l.reference], l.module)),
        reference,
        res,
        config,
    ))
}

/// P·R / (α·P + (1 − α)·R), 0 when the denominator vanishes.
pub fn fscore(p: f64, r: f64, alpha: f64) -> f64 {
    let denom = alpha * p + (1.0 - alpha) * r;
    if denom > 0.0 {
        p * r / denom
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexicalScore {
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub alignment: MatchAlignment,
}

/// Aligns and scores one hypothesis against one reference.
pub fn score(
    hyp: &[Token],
    reference: &[Token],
    res: &LexicalResources,
    config: &FScoreConfig,
) -> Result<LexicalScore, LexicalError> {
    let alignment = align(hyp, reference, res);
    let p = precision(&alignment, hyp, res, config);
    let r = recall(&alignment, reference, res, config)?;
    Ok(LexicalScore {
        precision: p,
        recall: r,
        fscore: fscore(p, r, config.alpha),
        alignment,
    })
}
