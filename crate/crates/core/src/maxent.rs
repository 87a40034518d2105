//! Three-class maximum-entropy action classifier.
//!
//! A model is trained per reference segment from the static-oracle
//! derivation of its tree. Training maximizes the ℓ2-penalized conditional
//! log-likelihood with L-BFGS, normalizing over all three actions; decoding
//! normalizes over the legal actions of the current state only.

use std::collections::HashMap;

use crate::corpus::RefTree;
use crate::features::{extract, FeatureVector};
use crate::transition::{oracle_actions, Action, ParserState, TransitionError};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub action: Action,
    pub features: FeatureVector,
}

/// One example per step of the oracle derivation of `tree` (2n−1 in total).
pub fn oracle_examples(tree: &RefTree) -> Result<Vec<TrainingExample>, TransitionError> {
    let heads = tree.heads();
    let actions = oracle_actions(&heads)?;
    let mut state = ParserState::initial(tree.len());
    let mut examples = Vec::with_capacity(actions.len());
    for action in actions {
        examples.push(TrainingExample {
            action,
            features: extract(&state, tree.tokens()),
        });
        state.apply_in_place(action)?;
    }
    Ok(examples)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub l2: f64,
    pub max_iterations: usize,
    /// Stop once the gradient's ∞-norm falls below this.
    pub tolerance: f64,
    /// L-BFGS memory.
    pub history: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2: 0.1,
            max_iterations: 200,
            tolerance: 1e-6,
            history: 10,
        }
    }
}

/// Dense view of a training set: features interned in first-seen order,
/// parameter `f * 3 + a` holding the weight of (feature `f`, action `a`).
#[derive(Debug, Clone)]
pub struct TrainingProblem {
    features: Vec<String>,
    examples: Vec<(usize, Vec<usize>)>,
    l2: f64,
}

impl TrainingProblem {
    pub fn new(examples: &[TrainingExample], l2: f64) -> Self {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut features = Vec::new();
        let mut dense = Vec::with_capacity(examples.len());
        for ex in examples {
            let fired = ex
                .features
                .iter()
                .map(|f| {
                    *ids.entry(f).or_insert_with(|| {
                        features.push(f.to_string());
                        features.len() - 1
                    })
                })
                .collect();
            dense.push((ex.action.index(), fired));
        }
        TrainingProblem {
            features,
            examples: dense,
            l2,
        }
    }

    pub fn num_params(&self) -> usize {
        self.features.len() * 3
    }

    pub fn feature_names(&self) -> &[String] {
        &self.features
    }

    fn scores(&self, weights: &[f64], fired: &[usize]) -> [f64; 3] {
        let mut s = [0.0; 3];
        for &f in fired {
            for (a, v) in s.iter_mut().enumerate() {
                *v += weights[f * 3 + a];
            }
        }
        s
    }

    /// Penalized log-likelihood Σ log P(gold | features) − (ℓ2/2)‖λ‖².
    pub fn objective(&self, weights: &[f64]) -> f64 {
        self.value_and_gradient(weights).0
    }

    /// Objective and its gradient with respect to every weight.
    pub fn value_and_gradient(&self, weights: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(weights.len(), self.num_params());
        let mut value = 0.0;
        let mut grad = vec![0.0; weights.len()];
        for (gold, fired) in &self.examples {
            let s = self.scores(weights, fired);
            let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = s.iter().map(|v| (v - max).exp()).sum();
            let log_z = max + z.ln();
            value += s[*gold] - log_z;
            for &f in fired {
                for (a, sa) in s.iter().enumerate() {
                    let p = (sa - log_z).exp();
                    let observed = if a == *gold { 1.0 } else { 0.0 };
                    grad[f * 3 + a] += observed - p;
                }
            }
        }
        for (g, w) in grad.iter_mut().zip(weights) {
            value -= 0.5 * self.l2 * w * w;
            *g -= self.l2 * w;
        }
        (value, grad)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting from the all-zero point.
    pub objective_trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximizes the problem's objective from zero weights with L-BFGS and a
/// backtracking Armijo line search.
pub fn optimize(problem: &TrainingProblem, config: &TrainConfig) -> (Vec<f64>, TrainReport) {
    let dim = problem.num_params();
    let mut w = vec![0.0; dim];
    // Work on the negated objective so the search is a minimization.
    let eval = |w: &[f64]| {
        let (v, g) = problem.value_and_gradient(w);
        (-v, g.into_iter().map(|x| -x).collect::<Vec<_>>())
    };
    let (mut f, mut g) = eval(&w);
    let mut report = TrainReport {
        objective_trace: vec![-f],
        ..Default::default()
    };
    let mut mem: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();

    while report.iterations < config.max_iterations {
        if inf_norm(&g) <= config.tolerance {
            report.converged = true;
            break;
        }
        // Two-loop recursion for the search direction.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = mem.last() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.into_iter().map(|x| -x).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            dir = g.iter().map(|x| -x).collect();
            slope = dot(&g, &dir);
            mem.clear();
        }

        let mut step = if mem.is_empty() {
            1.0 / inf_norm(&g).max(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = w.iter().zip(&dir).map(|(wi, di)| wi + step * di).collect();
            let (fc, gc) = eval(&cand);
            if fc <= f + 1e-4 * step * slope {
                accepted = Some((cand, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((w_new, f_new, g_new)) = accepted else {
            break;
        };
        let s: Vec<f64> = w_new.iter().zip(&w).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if mem.len() == config.history {
                mem.remove(0);
            }
            mem.push((s, y, 1.0 / sy));
        }
        w = w_new;
        f = f_new;
        g = g_new;
        report.iterations += 1;
        report.objective_trace.push(-f);
    }
    if !report.converged && inf_norm(&g) <= config.tolerance {
        report.converged = true;
    }
    (w, report)
}

/// Feature → per-action weights. Absent pairs weigh exactly zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaxEntModel {
    weights: HashMap<String, [f64; 3]>,
    pub report: TrainReport,
}

impl MaxEntModel {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_weights<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, Action, f64)>,
        S: Into<String>,
    {
        let mut weights: HashMap<String, [f64; 3]> = HashMap::new();
        for (f, a, w) in entries {
            weights.entry(f.into()).or_default()[a.index()] = w;
        }
        MaxEntModel {
            weights,
            report: TrainReport::default(),
        }
    }

    pub fn train(examples: &[TrainingExample], config: &TrainConfig) -> Self {
        let problem = TrainingProblem::new(examples, config.l2);
        let (w, report) = optimize(&problem, config);
        let weights = problem
            .feature_names()
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), [w[3 * i], w[3 * i + 1], w[3 * i + 2]]))
            .collect();
        MaxEntModel { weights, report }
    }

    pub fn is_converged(&self) -> bool {
        self.report.converged
    }

    pub fn weight(&self, feature: &str, action: Action) -> f64 {
        self.weights.get(feature).map_or(0.0, |w| w[action.index()])
    }

    /// Σ λ over fired (feature, action) pairs.
    pub fn score_action(&self, features: &FeatureVector, action: Action) -> f64 {
        features.iter().map(|f| self.weight(f, action)).sum()
    }

    /// Normalized probabilities over `legal`; illegal actions get 0.
    pub fn action_probs(&self, features: &FeatureVector, legal: &[Action]) -> [f64; 3] {
        let mut probs = [0.0; 3];
        if legal.is_empty() {
            return probs;
        }
        let scores: Vec<f64> = legal
            .iter()
            .map(|&a| self.score_action(features, a))
            .collect();
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        for (&a, e) in legal.iter().zip(exps) {
            probs[a.index()] = e / z;
        }
        probs
    }

    /// Log-probabilities over `legal`, computed without underflow.
    pub fn action_log_probs(
        &self,
        features: &FeatureVector,
        legal: &[Action],
    ) -> Vec<(Action, f64)> {
        let scores: Vec<f64> = legal
            .iter()
            .map(|&a| self.score_action(features, a))
            .collect();
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_z = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
        legal
            .iter()
            .zip(scores)
            .map(|(&a, s)| (a, (s - log_z).min(0.0)))
            .collect()
    }

    pub fn num_features(&self) -> usize {
        self.weights.len()
    }

    /// `feature<TAB>action<TAB>weight` lines sorted lexicographically.
    pub fn dump(&self) -> String {
        let mut rows: Vec<String> = self
            .weights
            .iter()
            .flat_map(|(f, w)| {
                Action::ALL.into_iter().map(move |a| {
                    let mut v = format!("{:.6}", w[a.index()]);
                    if v == "-0.000000" {
                        v = "0.000000".into();
                    }
                    format!("{f}\t{}\t{v}", a.name())
                })
            })
            .collect();
        rows.sort();
        let mut out = rows.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}
