//! Syntax-aware machine translation evaluation.
//!
//! For each segment a maximum-entropy shift-reduce parsing model is trained
//! on the reference dependency tree alone. The hypothesis is decoded under
//! that model with beam search; the geometric mean of its action
//! probabilities is the DPM score. DPMF multiplies DPM by a unigram F-score
//! computed over an exact / stem / synonym / paraphrase alignment.
//!
//! Modules, bottom-up:
//!
//! - [`corpus`]: treebank, hypothesis, resource and judgment readers
//! - [`tree`]: tree and projectivity checks over head arrays
//! - [`transition`]: arc-standard system and static oracle
//! - [`features`]: feature templates over parser states
//! - [`maxent`]: per-segment classifier training and action probabilities
//! - [`parser`]: beam-search decoding and DPM
//! - [`lexical`]: unigram alignment and weighted F-score
//! - [`eval`]: DPMF, system averaging, Spearman and Kendall correlations
//! - [`pipeline`]: corpus-level scoring, reports and traces

pub mod corpus;
pub mod eval;
pub mod features;
pub mod lexical;
pub mod maxent;
pub mod parser;
pub mod pipeline;
pub mod transition;
pub mod tree;

pub use corpus::{Hypothesis, LexicalResources, RefTree, Token};
pub use maxent::{MaxEntModel, TrainConfig};
pub use pipeline::{Error, RunConfig, ScoreRow};
pub use transition::{Action, ParserState};
