#![allow(dead_code)]

use dpmf_core::corpus::{RefTree, Token};
use dpmf_core::maxent::TrainingExample;
use dpmf_core::transition::{Action, ParserState};
use dpmf_core::MaxEntModel;
use rand::seq::SliceRandom;
use rand::Rng;

pub const TABLE3_REF: &str = "1\tmy\tPRP\t2\n2\tobjective\tNN\t3\n3\tis\tVBZ\t0\n4\tto\tTO\t5\n\
5\tdiscover\tVB\t3\n6\tthe\tDT\t7\n7\ttruth\tNN\t5\n8\t.\t.\t3\n";
pub const TABLE3_HYP1: &str = "our_PRP goal_NN was_VBZ finding_VBG fact_NN ._.";
pub const TABLE3_HYP2: &str = "was_VBZ finding_VBG our_PRP goal_NN fact_NN ._.";

/// Random projective tree over `n` tokens: each span picks a root and splits
/// its left and right remainders into contiguous child subtrees.
pub fn random_projective_heads<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    fn build<R: Rng>(rng: &mut R, l: usize, r: usize, heads: &mut [usize]) -> usize {
        let root = rng.gen_range(l..=r);
        for (lo, hi) in [(l, root - 1), (root + 1, r)] {
            let mut start = lo;
            while start <= hi {
                let end = rng.gen_range(start..=hi);
                let child = build(rng, start, end, heads);
                heads[child - 1] = root;
                start = end + 1;
            }
        }
        root
    }
    let mut heads = vec![0; n];
    let root = build(rng, 1, n, &mut heads);
    heads[root - 1] = 0;
    heads
}

/// Reachability-from-root tree check, independent of the library's.
pub fn oracle_is_tree(heads: &[usize]) -> bool {
    let n = heads.len();
    if n == 0 || heads.iter().filter(|&&h| h == 0).count() != 1 {
        return false;
    }
    if heads.iter().enumerate().any(|(i, &h)| h > n || h == i + 1) {
        return false;
    }
    let mut seen = vec![false; n + 1];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(h) = stack.pop() {
        for (i, &hh) in heads.iter().enumerate() {
            if hh == h && !seen[i + 1] {
                seen[i + 1] = true;
                stack.push(i + 1);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// No two arcs (root arc from position 0 included) cross.
pub fn oracle_no_crossing(heads: &[usize]) -> bool {
    let spans: Vec<(usize, usize)> = heads
        .iter()
        .enumerate()
        .map(|(i, &h)| ((i + 1).min(h), (i + 1).max(h)))
        .collect();
    for &(a, b) in &spans {
        for &(c, d) in &spans {
            if a < c && c < b && b < d {
                return false;
            }
        }
    }
    true
}

pub const TAGS: &[&str] = &["DT", "NN", "VB", "JJ", "IN"];
pub const WORDS: &[&str] = &["the", "cat", "sat", "red", "on", "mat", "dog"];

pub fn random_sentence<R: Rng>(rng: &mut R, n: usize) -> Vec<Token> {
    (1..=n)
        .map(|i| Token::new(i, *WORDS.choose(rng).unwrap(), *TAGS.choose(rng).unwrap()))
        .collect()
}

pub fn random_tree<R: Rng>(rng: &mut R, n: usize, segment_id: usize) -> RefTree {
    let heads = random_projective_heads(rng, n);
    let tokens = random_sentence(rng, n)
        .into_iter()
        .zip(heads)
        .map(|(t, h)| t.with_head(h))
        .collect();
    RefTree::new(segment_id, tokens).unwrap()
}

/// Every state reachable from the initial state, terminal ones included.
pub fn reachable_states(n: usize) -> Vec<ParserState> {
    let mut out = Vec::new();
    let mut frontier = vec![ParserState::initial(n)];
    while let Some(s) = frontier.pop() {
        for a in s.legal_actions() {
            frontier.push(s.apply(a).unwrap());
        }
        out.push(s);
    }
    out
}

/// A model with a random weight on every (feature, action) pair that can
/// fire on `sentence`.
pub fn random_model<R: Rng>(rng: &mut R, sentence: &[Token], scale: f64) -> MaxEntModel {
    let mut entries = Vec::new();
    for s in reachable_states(sentence.len()) {
        for f in dpmf_core::features::extract(&s, sentence).iter() {
            for a in Action::ALL {
                entries.push((f.to_string(), a, rng.gen_range(-scale..=scale)));
            }
        }
    }
    MaxEntModel::from_weights(entries)
}

/// Exhaustive search over all legal derivations. Returns the best total
/// log-probability and its action sequence (lexicographically smallest on
/// ties).
pub fn brute_force_best(sentence: &[Token], model: &MaxEntModel) -> (f64, Vec<Action>) {
    fn go(
        state: ParserState,
        acc: f64,
        sentence: &[Token],
        model: &MaxEntModel,
        best: &mut Option<(f64, Vec<Action>)>,
    ) {
        if state.is_terminal() {
            let better = match best {
                None => true,
                Some((b, hist)) => acc > *b || (acc == *b && state.history() < hist.as_slice()),
            };
            if better {
                *best = Some((acc, state.history().to_vec()));
            }
            return;
        }
        let legal = state.legal_actions();
        let f = dpmf_core::features::extract(&state, sentence);
        let probs = model.action_probs(&f, &legal);
        for a in legal {
            let next = state.apply(a).unwrap();
            go(next, acc + probs[a.index()].ln(), sentence, model, best);
        }
    }
    let mut best = None;
    go(
        ParserState::initial(sentence.len()),
        0.0,
        sentence,
        model,
        &mut best,
    );
    best.unwrap()
}

/// Independent penalized log-likelihood of a tiny problem, given as
/// (gold action index, fired feature ids) with weights laid out feature-major.
pub fn oracle_objective(examples: &[(usize, Vec<usize>)], w: &[f64], l2: f64) -> f64 {
    let mut total = 0.0;
    for (gold, fired) in examples {
        let scores: Vec<f64> = (0..3)
            .map(|a| fired.iter().map(|f| w[f * 3 + a]).sum())
            .collect();
        let z: f64 = scores.iter().map(|s| s.exp()).sum();
        total += (scores[*gold].exp() / z).ln();
    }
    total - 0.5 * l2 * w.iter().map(|x| x * x).sum::<f64>()
}

/// Naive Spearman via Pearson correlation of the two rank vectors.
pub fn oracle_spearman(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// A tiny random training problem: the examples, the same data as
/// (gold index, dense feature ids), a weight vector and an ℓ2 strength.
pub type Problem = (
    Vec<TrainingExample>,
    Vec<(usize, Vec<usize>)>,
    Vec<f64>,
    f64,
);

pub fn random_problem<R: Rng>(rng: &mut R) -> Problem {
    let nfeat = rng.gen_range(1..6);
    let nex = rng.gen_range(1..6);
    let mut examples = Vec::new();
    for _ in 0..nex {
        let mut fired: Vec<String> = (0..nfeat)
            .filter(|_| rng.gen_bool(0.5))
            .map(|f| format!("f{f}"))
            .collect();
        if fired.is_empty() {
            fired.push("f0".into());
        }
        examples.push(TrainingExample {
            action: Action::ALL[rng.gen_range(0..3)],
            features: dpmf_core::features::FeatureVector::from_strings(fired),
        });
    }
    // mirror the problem's first-seen interning
    let mut ids: Vec<String> = Vec::new();
    let dense = examples
        .iter()
        .map(|e| {
            let fired = e
                .features
                .iter()
                .map(|f| match ids.iter().position(|x| x == f) {
                    Some(i) => i,
                    None => {
                        ids.push(f.to_string());
                        ids.len() - 1
                    }
                })
                .collect();
            (e.action.index(), fired)
        })
        .collect();
    let w = (0..ids.len() * 3)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let l2 = rng.gen_range(0.0..1.0);
    (examples, dense, w, l2)
}
