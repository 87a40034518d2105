//! Arc-standard transition system and its static oracle.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransitionError {
    #[error("{action} is not legal with stack size {stack} and {queue} queued tokens")]
    IllegalAction {
        action: Action,
        stack: usize,
        queue: usize,
    },
    #[error("oracle stuck after {step} steps (tree not derivable)")]
    OracleStuck { step: usize },
    #[error("expected {expected} arcs for {n} tokens, got {found}")]
    ArcCount {
        expected: usize,
        found: usize,
        n: usize,
    },
    #[error("invalid arc set: {0}")]
    InvalidArcs(String),
    #[error("unknown action {0:?}")]
    UnknownAction(String),
}

/// Parser action. The derived order (SHIFT < REDUCE_L < REDUCE_R) is the
/// decoder's tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Shift,
    ReduceLeft,
    ReduceRight,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Shift, Action::ReduceLeft, Action::ReduceRight];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Shift => "SHIFT",
            Action::ReduceLeft => "REDUCE_L",
            Action::ReduceRight => "REDUCE_R",
        }
    }

    /// Single-letter code used in beam traces.
    pub fn code(self) -> char {
        match self {
            Action::Shift => 'S',
            Action::ReduceLeft => 'L',
            Action::ReduceRight => 'R',
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = TransitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SHIFT" => Ok(Action::Shift),
            "REDUCE_L" => Ok(Action::ReduceLeft),
            "REDUCE_R" => Ok(Action::ReduceRight),
            _ => Err(TransitionError::UnknownAction(s.to_string())),
        }
    }
}

/// Parser configuration over a sentence of `n` tokens (1-based indices).
///
/// Arcs are `(head, dependent)` pairs. `log_prob` is maintained by the
/// decoder; `apply` leaves it untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct ParserState {
    n: usize,
    stack: Vec<usize>,
    next: usize,
    arcs: Vec<(usize, usize)>,
    pub log_prob: f64,
    history: Vec<Action>,
}

impl ParserState {
    pub fn initial(n: usize) -> Self {
        ParserState {
            n,
            stack: Vec::with_capacity(n),
            next: 1,
            arcs: Vec::with_capacity(n.saturating_sub(1)),
            log_prob: 0.0,
            history: Vec::with_capacity(2 * n),
        }
    }

    pub fn sentence_len(&self) -> usize {
        self.n
    }

    /// Stack contents, top last.
    pub fn stack(&self) -> &[usize] {
        &self.stack
    }

    /// `depth` 0 is the top of the stack.
    pub fn stack_item(&self, depth: usize) -> Option<usize> {
        self.stack
            .len()
            .checked_sub(depth + 1)
            .map(|i| self.stack[i])
    }

    /// `offset` 0 is the next unprocessed token.
    pub fn queue_item(&self, offset: usize) -> Option<usize> {
        let t = self.next + offset;
        (t <= self.n).then_some(t)
    }

    pub fn queue_len(&self) -> usize {
        self.n + 1 - self.next
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn history(&self) -> &[Action] {
        &self.history
    }

    pub fn is_legal(&self, action: Action) -> bool {
        match action {
            Action::Shift => self.next <= self.n,
            Action::ReduceLeft | Action::ReduceRight => self.stack.len() >= 2,
        }
    }

    /// Legal actions in tie-break order.
    pub fn legal_actions(&self) -> Vec<Action> {
        Action::ALL
            .into_iter()
            .filter(|&a| self.is_legal(a))
            .collect()
    }

    pub fn is_terminal(&self) -> bool {
        self.next > self.n && self.stack.len() == 1
    }

    pub fn apply(&self, action: Action) -> Result<ParserState, TransitionError> {
        let mut next = self.clone();
        next.apply_in_place(action)?;
        Ok(next)
    }

    pub fn apply_in_place(&mut self, action: Action) -> Result<(), TransitionError> {
        if !self.is_legal(action) {
            return Err(TransitionError::IllegalAction {
                action,
                stack: self.stack.len(),
                queue: self.queue_len(),
            });
        }
        match action {
            Action::Shift => {
                self.stack.push(self.next);
                self.next += 1;
            }
            Action::ReduceLeft => {
                let top = self.stack.pop().expect("legal reduce");
                let below = self.stack.pop().expect("legal reduce");
                self.arcs.push((top, below));
                self.stack.push(top);
            }
            Action::ReduceRight => {
                let top = self.stack.pop().expect("legal reduce");
                let below = *self.stack.last().expect("legal reduce");
                self.arcs.push((below, top));
            }
        }
        self.history.push(action);
        Ok(())
    }

    /// Head array of a terminal state.
    pub fn heads(&self) -> Result<Vec<usize>, TransitionError> {
        arcs_to_tree(&self.arcs, self.n)
    }
}

/// Replays `actions` from the initial state.
pub fn replay(n: usize, actions: &[Action]) -> Result<ParserState, TransitionError> {
    let mut state = ParserState::initial(n);
    for &a in actions {
        state.apply_in_place(a)?;
    }
    Ok(state)
}

/// Converts `(head, dependent)` arcs over `n` tokens to a head array, the
/// unattached token becoming the root.
pub fn arcs_to_tree(arcs: &[(usize, usize)], n: usize) -> Result<Vec<usize>, TransitionError> {
    let expected = n.saturating_sub(1);
    if arcs.len() != expected {
        return Err(TransitionError::ArcCount {
            expected,
            found: arcs.len(),
            n,
        });
    }
    let mut heads: Vec<Option<usize>> = vec![None; n];
    for &(h, d) in arcs {
        if h == 0 || d == 0 || h > n || d > n || h == d {
            return Err(TransitionError::InvalidArcs(format!("bad arc ({h}, {d})")));
        }
        if heads[d - 1].replace(h).is_some() {
            return Err(TransitionError::InvalidArcs(format!(
                "token {d} attached twice"
            )));
        }
    }
    let heads: Vec<usize> = heads.into_iter().map(|h| h.unwrap_or(0)).collect();
    crate::tree::check_tree(&heads).map_err(|e| TransitionError::InvalidArcs(e.to_string()))?;
    Ok(heads)
}

/// Static oracle: the unique arc-standard derivation of a projective tree.
///
/// A reduction fires only once the future dependent has collected all of
/// its own dependents.
pub fn oracle_actions(heads: &[usize]) -> Result<Vec<Action>, TransitionError> {
    let n = heads.len();
    let mut remaining = vec![0usize; n + 1];
    for &h in heads {
        remaining[h] += 1;
    }
    let mut state = ParserState::initial(n);
    while !state.is_terminal() {
        let step = state.history.len();
        let action = match (state.stack_item(0), state.stack_item(1)) {
            (Some(top), Some(below)) if heads[below - 1] == top && remaining[below] == 0 => {
                Action::ReduceLeft
            }
            (Some(top), Some(below)) if heads[top - 1] == below && remaining[top] == 0 => {
                Action::ReduceRight
            }
            _ if state.queue_len() > 0 => Action::Shift,
            _ => return Err(TransitionError::OracleStuck { step }),
        };
        match action {
            Action::ReduceLeft => remaining[state.stack_item(0).unwrap()] -= 1,
            Action::ReduceRight => remaining[state.stack_item(1).unwrap()] -= 1,
            Action::Shift => {}
        }
        state.apply_in_place(action)?;
    }
    Ok(state.history)
}
