//! Beam-search decoding of hypotheses under a segment model, and the
//! length-normalized parse score (DPM).

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::Token;
use crate::features::extract;
use crate::maxent::MaxEntModel;
use crate::transition::{Action, ParserState};

pub const DEFAULT_BEAM_WIDTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("cannot decode an empty hypothesis")]
    EmptyHypothesis,
    #[error("beam width must be at least 1")]
    ZeroBeam,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Head array of the best derivation (0 = root).
    pub tree: Vec<usize>,
    /// Σ log P(action) over the best derivation.
    pub score: f64,
    pub actions: Vec<Action>,
}

/// Surviving beam items after each step, best first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BeamTrace {
    pub steps: Vec<Vec<(Vec<Action>, f64)>>,
}

impl BeamTrace {
    /// One line per step: `step<TAB>history:logprob<TAB>...`, histories
    /// written with single-letter action codes.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, items) in self.steps.iter().enumerate() {
            let _ = write!(out, "{}", i + 1);
            for (hist, lp) in items {
                let codes: String = hist.iter().map(|a| a.code()).collect();
                let _ = write!(out, "\t{codes}:{lp:.6}");
            }
            out.push('\n');
        }
        out
    }
}

fn beam_order(a: &ParserState, b: &ParserState) -> Ordering {
    b.log_prob
        .total_cmp(&a.log_prob)
        .then_with(|| a.history().cmp(b.history()))
}

fn run_beam(
    tokens: &[Token],
    model: &MaxEntModel,
    beam_width: usize,
    mut trace: Option<&mut BeamTrace>,
) -> Result<DecodeResult, DecodeError> {
    if tokens.is_empty() {
        return Err(DecodeError::EmptyHypothesis);
    }
    if beam_width == 0 {
        return Err(DecodeError::ZeroBeam);
    }
    let n = tokens.len();
    let mut beam = vec![ParserState::initial(n)];
    for _ in 0..(2 * n - 1) {
        let mut candidates = Vec::with_capacity(beam.len() * 3);
        for state in &beam {
            let features = extract(state, tokens);
            let legal = state.legal_actions();
            for (action, lp) in model.action_log_probs(&features, &legal) {
                let mut next = state.apply(action).expect("legal action");
                next.log_prob = state.log_prob + lp;
                candidates.push(next);
            }
        }
        candidates.sort_by(beam_order);
        candidates.truncate(beam_width);
        beam = candidates;
        if let Some(t) = trace.as_deref_mut() {
            t.steps.push(
                beam.iter()
                    .map(|s| (s.history().to_vec(), s.log_prob))
                    .collect(),
            );
        }
    }
    let best = beam.into_iter().next().expect("non-empty beam");
    debug_assert!(best.is_terminal());
    Ok(DecodeResult {
        tree: best.heads().expect("terminal state forms a tree"),
        score: best.log_prob,
        actions: best.history().to_vec(),
    })
}

/// Best derivation of `tokens` found by a beam of `beam_width` states.
/// Ties on score go to the lexicographically smallest action sequence.
pub fn decode(
    tokens: &[Token],
    model: &MaxEntModel,
    beam_width: usize,
) -> Result<DecodeResult, DecodeError> {
    run_beam(tokens, model, beam_width, None)
}

pub fn decode_traced(
    tokens: &[Token],
    model: &MaxEntModel,
    beam_width: usize,
) -> Result<(DecodeResult, BeamTrace), DecodeError> {
    let mut trace = BeamTrace::default();
    let result = run_beam(tokens, model, beam_width, Some(&mut trace))?;
    Ok((result, trace))
}

/// Geometric mean of per-action probabilities: exp(score / (2n − 1)).
pub fn normalize_score(score: f64, n: usize) -> f64 {
    (score / (2 * n - 1) as f64).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dpm {
    pub value: f64,
    /// `None` when the hypothesis was empty; the value is then 0.
    pub decode: Option<DecodeResult>,
}

impl Dpm {
    pub fn is_empty_hypothesis(&self) -> bool {
        self.decode.is_none()
    }
}

pub fn dpm(tokens: &[Token], model: &MaxEntModel, beam_width: usize) -> Result<Dpm, DecodeError> {
    match decode(tokens, model, beam_width) {
        Ok(result) => Ok(Dpm {
            value: normalize_score(result.score, tokens.len()),
            decode: Some(result),
        }),
        Err(DecodeError::EmptyHypothesis) => Ok(Dpm {
            value: 0.0,
            decode: None,
        }),
        Err(e) => Err(e),
    }
}
