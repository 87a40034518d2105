//! End-to-end scoring, correlation and inspection, with the tabular text
//! formats the command-line tool reads and writes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{
    self, CorpusError, Hypothesis, LexicalResources, Preference, RefTree, SystemRanks,
};
use crate::eval::{self, EvalError, PairCounts, SystemCorrelation};
use crate::lexical::{self, FScoreConfig};
use crate::maxent::{oracle_examples, MaxEntModel, TrainConfig};
use crate::parser::{self, DecodeError, DEFAULT_BEAM_WIDTH};
use crate::transition::TransitionError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("config: {0}")]
    Config(String),
    #[error("{refs} reference segments but {hyps} hypotheses")]
    CountMismatch { refs: usize, hyps: usize },
    #[error("no segment {0} in the reference file")]
    UnknownSegment(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Lexical(#[from] lexical::LexicalError),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl Error {
    /// Whether the failure stems from bad input rather than a bug or the
    /// environment.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Corpus(_)
            | Error::Config(_)
            | Error::CountMismatch { .. }
            | Error::UnknownSegment(_)
            | Error::Eval(_)
            | Error::Lexical(_)
            | Error::Decode(DecodeError::EmptyHypothesis) => true,
            Error::Transition(_) | Error::Decode(_) | Error::ThreadPool(_) => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Everything a scoring run needs besides the corpora.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub fscore: FScoreConfig,
    pub beam_width: usize,
    pub train: TrainConfig,
    pub function_words: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
    pub paraphrases: Option<PathBuf>,
    /// Worker threads; 0 lets the pool pick.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            fscore: FScoreConfig::default(),
            beam_width: DEFAULT_BEAM_WIDTH,
            train: TrainConfig::default(),
            function_words: None,
            synonyms: None,
            paraphrases: None,
            threads: 0,
        }
    }
}

impl RunConfig {
    pub const KEYS: &'static [&'static str] = &[
        "alpha",
        "w_f",
        "w_exact",
        "w_stem",
        "w_synonym",
        "w_paraphrase",
        "beam_width",
        "l2",
        "max_iterations",
        "tolerance",
        "function_words",
        "synonyms",
        "paraphrases",
        "threads",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
        }
        match key {
            "alpha" => self.fscore.alpha = num(key, value)?,
            "w_f" => self.fscore.w_f = num(key, value)?,
            "w_exact" => self.fscore.w_exact = num(key, value)?,
            "w_stem" => self.fscore.w_stem = num(key, value)?,
            "w_synonym" => self.fscore.w_synonym = num(key, value)?,
            "w_paraphrase" => self.fscore.w_paraphrase = num(key, value)?,
            "beam_width" => self.beam_width = num(key, value)?,
            "l2" => self.train.l2 = num(key, value)?,
            "max_iterations" => self.train.max_iterations = num(key, value)?,
            "tolerance" => self.train.tolerance = num(key, value)?,
            "function_words" => self.function_words = Some(value.into()),
            "synonyms" => self.synonyms = Some(value.into()),
            "paraphrases" => self.paraphrases = Some(value.into()),
            "threads" => self.threads = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.fscore.validate().map_err(Error::Config)?;
        if self.beam_width == 0 {
            return Err(Error::Config("beam_width must be at least 1".into()));
        }
        if self.train.l2.is_nan() || self.train.l2 < 0.0 {
            return Err(Error::Config("l2 must be non-negative".into()));
        }
        Ok(())
    }

    pub fn load_resources(&self) -> Result<LexicalResources> {
        Ok(corpus::load_resources(
            self.function_words.as_deref(),
            self.synonyms.as_deref(),
            self.paraphrases.as_deref(),
        )?)
    }
}

/// One output row of a scoring run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub segment_id: usize,
    pub dpm: f64,
    pub fscore: f64,
    pub dpmf: f64,
    /// Set when the segment failed, was empty, or its model did not converge.
    pub note: Option<String>,
}

impl ScoreRow {
    fn zero(segment_id: usize, note: String) -> Self {
        ScoreRow {
            segment_id,
            dpm: 0.0,
            fscore: 0.0,
            dpmf: 0.0,
            note: Some(note),
        }
    }
}

/// Trains the segment model on `tree`, decodes `hyp` and combines DPM with
/// the lexical F-score.
pub fn score_segment(
    tree: &RefTree,
    hyp: &Hypothesis,
    res: &LexicalResources,
    config: &RunConfig,
) -> Result<ScoreRow> {
    let segment_id = hyp.segment_id;
    if hyp.is_empty() {
        return Ok(ScoreRow::zero(segment_id, "empty hypothesis".into()));
    }
    let examples = oracle_examples(tree)?;
    let model = MaxEntModel::train(&examples, &config.train);
    let dpm = parser::dpm(&hyp.tokens, &model, config.beam_width)?;
    let lex = lexical::score(&hyp.tokens, tree.tokens(), res, &config.fscore)?;
    let seg = eval::SegmentScore::new(segment_id, dpm.value, lex.fscore);
    Ok(ScoreRow {
        segment_id,
        dpm: seg.dpm,
        fscore: seg.fscore,
        dpmf: seg.dpmf,
        note: (!model.is_converged()).then(|| "model did not converge".to_string()),
    })
}

/// Scores every segment, in parallel across segments. Rows come back in
/// segment order; a failing segment yields a zero row carrying the error.
pub fn score_corpus(
    trees: &[corpus::Result<RefTree>],
    hyps: &[Hypothesis],
    res: &LexicalResources,
    config: &RunConfig,
) -> Result<Vec<ScoreRow>> {
    config.validate()?;
    if trees.len() != hyps.len() {
        return Err(Error::CountMismatch {
            refs: trees.len(),
            hyps: hyps.len(),
        });
    }
    if trees.is_empty() {
        return Err(Error::Eval(EvalError::NoSegments));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()?;
    let rows = pool.install(|| {
        trees
            .par_iter()
            .zip(hyps.par_iter())
            .map(|(tree, hyp)| match tree {
                Ok(tree) => score_segment(tree, hyp, res, config)
                    .unwrap_or_else(|e| ScoreRow::zero(hyp.segment_id, e.to_string())),
                Err(e) => ScoreRow::zero(hyp.segment_id, e.to_string()),
            })
            .collect()
    });
    Ok(rows)
}

fn sanitize(note: &str) -> String {
    note.replace(['\t', '\n', '\r'], " ")
}

/// `segment_id dpm fscore dpmf [note]` rows followed by `SYSTEM mean_dpmf`.
pub fn render_scores(rows: &[ScoreRow]) -> String {
    let mut out = String::from("segment_id\tdpm\tfscore\tdpmf\n");
    for r in rows {
        let _ = write!(
            out,
            "{}\t{:.6}\t{:.6}\t{:.6}",
            r.segment_id, r.dpm, r.fscore, r.dpmf
        );
        if let Some(note) = &r.note {
            let _ = write!(out, "\t{}", sanitize(note));
        }
        out.push('\n');
    }
    let mean = rows.iter().map(|r| r.dpmf).sum::<f64>() / rows.len().max(1) as f64;
    let _ = writeln!(out, "SYSTEM\t{mean:.6}");
    out
}

/// A parsed score file: per-segment DPMF and the system mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub segments: Vec<(usize, f64)>,
    pub system: f64,
}

pub fn parse_scores(text: &str) -> Result<ScoreTable> {
    let bad = |line: usize, message: String| {
        Error::Corpus(CorpusError::Parse {
            line,
            column: None,
            message,
        })
    };
    let mut segments = Vec::new();
    let mut system = None;
    for (i, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        match cols.as_slice() {
            [""] | ["segment_id", ..] => {}
            ["SYSTEM", mean] => {
                system = Some(
                    mean.parse()
                        .map_err(|_| bad(i + 1, format!("bad system score {mean:?}")))?,
                )
            }
            [seg, _dpm, _f, dpmf, ..] => {
                let seg = seg
                    .parse()
                    .map_err(|_| bad(i + 1, format!("bad segment id {seg:?}")))?;
                let dpmf = dpmf
                    .parse()
                    .map_err(|_| bad(i + 1, format!("bad dpmf {dpmf:?}")))?;
                segments.push((seg, dpmf));
            }
            _ => return Err(bad(i + 1, "expected a score row".into())),
        }
    }
    let system = system.ok_or_else(|| bad(0, "missing SYSTEM line".into()))?;
    Ok(ScoreTable { segments, system })
}

/// Spearman ρ of system means against human ranks.
pub fn correlate_systems(
    tables: &[(String, ScoreTable)],
    ranks: &SystemRanks,
) -> Result<SystemCorrelation> {
    let scores: HashMap<String, f64> = tables
        .iter()
        .map(|(name, t)| (name.clone(), t.system))
        .collect();
    Ok(eval::system_correlation(&scores, &ranks.ranks)?)
}

/// Kendall-style τ of segment scores against pairwise preferences.
pub fn correlate_segments(
    tables: &[(String, ScoreTable)],
    prefs: &[Preference],
) -> Result<(PairCounts, f64)> {
    let mut scores = HashMap::new();
    for (name, t) in tables {
        for &(seg, v) in &t.segments {
            scores.insert((name.clone(), seg), v);
        }
    }
    for p in prefs {
        for sys in [&p.system_a, &p.system_b] {
            if !tables.iter().any(|(n, _)| n == sys) {
                return Err(EvalError::MissingSystem(sys.clone()).into());
            }
        }
    }
    let counts = eval::preference_counts(prefs, &scores)?;
    let tau = counts.tau()?;
    Ok((counts, tau))
}

pub fn render_system_report(c: &SystemCorrelation) -> String {
    let mut out = String::from("system\tmetric\tmetric_rank\thuman_rank\n");
    for (sys, score, mr, hr) in &c.rows {
        let _ = writeln!(out, "{sys}\t{score:.6}\t{mr:.1}\t{hr}");
    }
    let _ = writeln!(out, "rho\t{:.4}", c.rho);
    out
}

pub fn render_segment_report(counts: &PairCounts, tau: f64) -> String {
    format!(
        "concordant\t{}\ndiscordant\t{}\nties\t{}\ntau\t{tau:.4}\n",
        counts.concordant, counts.discordant, counts.ties
    )
}

/// Human-readable trace of one segment: the oracle action/feature table,
/// the trained weights, and the beam search over `hyp`.
pub fn inspect(tree: &RefTree, hyp: &Hypothesis, config: &RunConfig) -> Result<String> {
    let examples = oracle_examples(tree)?;
    let model = MaxEntModel::train(&examples, &config.train);
    let mut out = String::new();
    for ex in &examples {
        out.push_str(ex.action.name());
        for f in ex.features.iter() {
            out.push('\t');
            out.push_str(f);
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "## weights\tfeatures={}\titerations={}\tconverged={}",
        model.num_features(),
        model.report.iterations,
        model.is_converged()
    );
    out.push_str(&model.dump());
    if hyp.is_empty() {
        out.push_str("## beam\tempty hypothesis\n");
        return Ok(out);
    }
    let (result, trace) = parser::decode_traced(&hyp.tokens, &model, config.beam_width)?;
    out.push_str("## beam\n");
    out.push_str(&trace.render());
    let heads: Vec<String> = result.tree.iter().map(|h| h.to_string()).collect();
    let _ = writeln!(
        out,
        "## result\tscore={:.6}\tdpm={:.6}\theads={}",
        result.score,
        parser::normalize_score(result.score, hyp.len()),
        heads.join(",")
    );
    Ok(out)
}
