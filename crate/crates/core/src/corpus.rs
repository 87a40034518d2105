//! Readers for reference treebanks, tagged hypotheses, lexical resources
//! and human judgments.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use rust_stemmers::{Algorithm, Stemmer};
use thiserror::Error;

use crate::tree::{self, TreeError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: usize,
        column: Option<usize>,
        message: String,
    },
    #[error("segment {segment}: invalid tree: {source}")]
    InvalidTree {
        segment: usize,
        #[source]
        source: TreeError,
    },
    #[error("segment {segment}: tree is not projective")]
    NonProjective { segment: usize },
    #[error("{0}")]
    Format(String),
}

impl CorpusError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        CorpusError::Parse {
            line,
            column: None,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CorpusError>;

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CorpusError::Io {
            path: path.to_owned(),
            source,
        })
}

fn read_lines<R: BufRead>(reader: R) -> Result<Vec<String>> {
    reader
        .lines()
        .collect::<io::Result<Vec<_>>>()
        .map_err(|source| CorpusError::Io {
            path: PathBuf::from("<input>"),
            source,
        })
}

/// One word of a sentence. `head` is only set on reference tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub pos: String,
    pub head: Option<usize>,
}

impl Token {
    pub fn new(index: usize, form: impl Into<String>, pos: impl Into<String>) -> Self {
        Token {
            index,
            form: form.into(),
            pos: pos.into(),
            head: None,
        }
    }

    pub fn with_head(mut self, head: usize) -> Self {
        self.head = Some(head);
        self
    }
}

/// A validated, projective reference dependency tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefTree {
    segment_id: usize,
    tokens: Vec<Token>,
}

impl RefTree {
    /// Builds a tree from tokens that all carry heads, checking single-rootedness,
    /// acyclicity and projectivity.
    pub fn new(segment_id: usize, tokens: Vec<Token>) -> Result<Self> {
        let mut heads = Vec::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.index != i + 1 {
                return Err(CorpusError::Format(format!(
                    "segment {segment_id}: token index {} out of sequence (expected {})",
                    t.index,
                    i + 1
                )));
            }
            if t.form.is_empty() || t.pos.is_empty() {
                return Err(CorpusError::Format(format!(
                    "segment {segment_id}: token {} has empty form or POS",
                    t.index
                )));
            }
            match t.head {
                Some(h) => heads.push(h),
                None => {
                    return Err(CorpusError::Format(format!(
                        "segment {segment_id}: token {} has no head",
                        t.index
                    )))
                }
            }
        }
        tree::check_tree(&heads).map_err(|source| CorpusError::InvalidTree {
            segment: segment_id,
            source,
        })?;
        if !tree::is_projective(&heads) {
            return Err(CorpusError::NonProjective {
                segment: segment_id,
            });
        }
        Ok(RefTree { segment_id, tokens })
    }

    pub fn segment_id(&self) -> usize {
        self.segment_id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Head of every token, 0 for the root.
    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head.unwrap_or(0)).collect()
    }

    /// The tree's tokens stripped of heads, as a hypothesis of the same segment.
    pub fn as_hypothesis(&self) -> Hypothesis {
        Hypothesis {
            segment_id: self.segment_id,
            tokens: self
                .tokens
                .iter()
                .map(|t| Token::new(t.index, t.form.clone(), t.pos.clone()))
                .collect(),
        }
    }

    /// Writes the tree as `INDEX FORM POS HEAD` rows followed by a blank line.
    pub fn to_conll(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                t.index,
                t.form,
                t.pos,
                t.head.unwrap_or(0)
            ));
        }
        out.push('\n');
        out
    }
}

/// Reads a treebank, keeping structural failures per sentence.
///
/// Malformed lines abort the whole read; invalid or non-projective trees are
/// returned as `Err` entries so callers can score around them.
pub fn read_ref_sentences<R: BufRead>(reader: R) -> Result<Vec<Result<RefTree>>> {
    let lines = read_lines(reader)?;
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();

    let flush = |current: &mut Vec<Token>, sentences: &mut Vec<Result<RefTree>>| {
        if !current.is_empty() {
            let id = sentences.len() + 1;
            sentences.push(RefTree::new(id, std::mem::take(current)));
        }
    };

    for (lineno, raw) in lines.iter().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            flush(&mut current, &mut sentences);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = if line.contains('\t') {
            line.split('\t').collect()
        } else {
            line.split_whitespace().collect()
        };
        if cols.len() < 4 {
            return Err(CorpusError::parse(
                lineno,
                format!("expected at least 4 columns, found {}", cols.len()),
            ));
        }
        let index: usize = cols[0]
            .trim()
            .parse()
            .map_err(|_| CorpusError::parse(lineno, format!("bad index {:?}", cols[0])))?;
        let head: usize = cols[3]
            .trim()
            .parse()
            .map_err(|_| CorpusError::parse(lineno, format!("bad head {:?}", cols[3])))?;
        let form = cols[1].trim();
        let pos = cols[2].trim();
        if form.is_empty() || pos.is_empty() {
            return Err(CorpusError::parse(lineno, "empty form or POS"));
        }
        if index != current.len() + 1 {
            return Err(CorpusError::parse(
                lineno,
                format!("token index {index}, expected {}", current.len() + 1),
            ));
        }
        current.push(Token::new(index, form, pos).with_head(head));
    }
    flush(&mut current, &mut sentences);
    Ok(sentences)
}

/// Reads a treebank, failing on the first invalid sentence.
pub fn read_ref_treebank<R: BufRead>(reader: R) -> Result<Vec<RefTree>> {
    read_ref_sentences(reader)?.into_iter().collect()
}

pub fn load_ref_treebank(path: impl AsRef<Path>) -> Result<Vec<RefTree>> {
    read_ref_treebank(open(path.as_ref())?)
}

pub fn load_ref_sentences(path: impl AsRef<Path>) -> Result<Vec<Result<RefTree>>> {
    read_ref_sentences(open(path.as_ref())?)
}

/// A POS-tagged hypothesis sentence. An empty token list marks a blank input
/// line, which scores zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    pub segment_id: usize,
    pub tokens: Vec<Token>,
}

impl Hypothesis {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Parses one `form_POS form_POS ...` line. The last underscore of each
/// token separates form from tag.
pub fn parse_tagged_line(segment_id: usize, line: &str, lineno: usize) -> Result<Hypothesis> {
    let mut tokens = Vec::new();
    let mut column = 1;
    let mut rest = line;
    while !rest.is_empty() {
        let trimmed = rest.trim_start();
        column += rest[..rest.len() - trimmed.len()].chars().count();
        rest = trimmed;
        if rest.is_empty() {
            break;
        }
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let word = &rest[..end];
        let bad = |message: &str| CorpusError::Parse {
            line: lineno,
            column: Some(column),
            message: format!("{message} in token {word:?}"),
        };
        let (form, pos) = word
            .rsplit_once('_')
            .ok_or_else(|| bad("missing form_POS separator"))?;
        if form.is_empty() || pos.is_empty() {
            return Err(bad("empty form or POS"));
        }
        tokens.push(Token::new(tokens.len() + 1, form, pos));
        column += word.chars().count();
        rest = &rest[end..];
    }
    Ok(Hypothesis { segment_id, tokens })
}

pub fn read_hypotheses<R: BufRead>(reader: R) -> Result<Vec<Hypothesis>> {
    read_lines(reader)?
        .iter()
        .enumerate()
        .map(|(i, line)| parse_tagged_line(i + 1, line.trim_end_matches('\r'), i + 1))
        .collect()
}

pub fn load_hypotheses(path: impl AsRef<Path>) -> Result<Vec<Hypothesis>> {
    read_hypotheses(open(path.as_ref())?)
}

/// English Snowball stemmer.
pub struct PorterStemmer(Stemmer);

impl PorterStemmer {
    pub fn new() -> Self {
        PorterStemmer(Stemmer::create(Algorithm::English))
    }

    /// Stems an already lowercased word.
    pub fn stem(&self, word: &str) -> String {
        self.0.stem(word).into_owned()
    }
}

impl Default for PorterStemmer {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for PorterStemmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PorterStemmer")
    }
}

/// Function-word list, stemmer, synonym groups and unigram paraphrases.
/// All entries are lowercase.
#[derive(Debug, Default)]
pub struct LexicalResources {
    pub function_words: HashSet<String>,
    pub stemmer: PorterStemmer,
    pub synonyms: HashMap<String, HashSet<String>>,
    pub paraphrases: HashMap<String, HashSet<String>>,
}

impl LexicalResources {
    pub fn is_function_word(&self, lowered: &str) -> bool {
        self.function_words.contains(lowered)
    }

    pub fn are_synonyms(&self, a: &str, b: &str) -> bool {
        let has = |x: &str, y: &str| self.synonyms.get(x).is_some_and(|s| s.contains(y));
        has(a, b) || has(b, a)
    }

    pub fn are_paraphrases(&self, a: &str, b: &str) -> bool {
        let has = |x: &str, y: &str| self.paraphrases.get(x).is_some_and(|s| s.contains(y));
        has(a, b) || has(b, a)
    }

    pub fn add_function_words<R: BufRead>(&mut self, reader: R) -> Result<()> {
        for line in read_lines(reader)? {
            let w = line.trim();
            if !w.is_empty() {
                self.function_words.insert(w.to_lowercase());
            }
        }
        Ok(())
    }

    /// Each line is one group of mutually synonymous words.
    pub fn add_synonyms<R: BufRead>(&mut self, reader: R) -> Result<()> {
        for line in read_lines(reader)? {
            let group: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
            for w in &group {
                let entry = self.synonyms.entry(w.clone()).or_default();
                entry.extend(group.iter().filter(|o| *o != w).cloned());
            }
        }
        Ok(())
    }

    /// `source<TAB>target<TAB>prob` rows. Multi-word entries are skipped.
    pub fn add_paraphrases<R: BufRead>(&mut self, reader: R) -> Result<()> {
        for (i, line) in read_lines(reader)?.iter().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(CorpusError::parse(
                    i + 1,
                    format!(
                        "expected source<TAB>target<TAB>prob, found {} fields",
                        cols.len()
                    ),
                ));
            }
            let _prob: f64 = cols[2]
                .trim()
                .parse()
                .map_err(|_| CorpusError::parse(i + 1, format!("bad probability {:?}", cols[2])))?;
            let (src, tgt) = (cols[0].trim(), cols[1].trim());
            if src.is_empty() || tgt.is_empty() {
                return Err(CorpusError::parse(i + 1, "empty paraphrase side"));
            }
            if src.contains(char::is_whitespace) || tgt.contains(char::is_whitespace) {
                continue;
            }
            self.paraphrases
                .entry(src.to_lowercase())
                .or_default()
                .insert(tgt.to_lowercase());
        }
        Ok(())
    }
}

/// Loads whichever resources are given; absent ones stay empty.
pub fn load_resources(
    function_words: Option<&Path>,
    synonyms: Option<&Path>,
    paraphrases: Option<&Path>,
) -> Result<LexicalResources> {
    let mut res = LexicalResources::default();
    if let Some(p) = function_words {
        res.add_function_words(open(p)?)?;
    }
    if let Some(p) = synonyms {
        res.add_synonyms(open(p)?)?;
    }
    if let Some(p) = paraphrases {
        res.add_paraphrases(open(p)?)?;
    }
    Ok(res)
}

/// Human system ranks for one language pair (rank 1 = best).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemRanks {
    pub ranks: Vec<(String, usize)>,
}

impl SystemRanks {
    pub fn rank_of(&self, system: &str) -> Option<usize> {
        self.ranks
            .iter()
            .find(|(s, _)| s == system)
            .map(|(_, r)| *r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    A,
    B,
}

/// One human pairwise judgment on a segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preference {
    pub segment_id: usize,
    pub system_a: String,
    pub system_b: String,
    pub winner: Winner,
}

pub fn read_system_ranks<R: BufRead>(reader: R) -> Result<SystemRanks> {
    let mut ranks = Vec::new();
    for (i, line) in read_lines(reader)?.iter().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 {
            return Err(CorpusError::parse(
                i + 1,
                format!(
                    "system-level judgments need system<TAB>rank, found {} fields",
                    cols.len()
                ),
            ));
        }
        let rank: usize = cols[1]
            .trim()
            .parse()
            .map_err(|_| CorpusError::parse(i + 1, format!("bad rank {:?}", cols[1])))?;
        ranks.push((cols[0].trim().to_string(), rank));
    }
    let n = ranks.len();
    let mut seen = vec![false; n + 1];
    for (sys, r) in &ranks {
        if *r == 0 || *r > n || std::mem::replace(&mut seen[*r], true) {
            return Err(CorpusError::Format(format!(
                "ranks must be a permutation of 1..={n}; system {sys} has rank {r}"
            )));
        }
    }
    let mut names = HashSet::new();
    for (sys, _) in &ranks {
        if !names.insert(sys.as_str()) {
            return Err(CorpusError::Format(format!("system {sys} ranked twice")));
        }
    }
    Ok(SystemRanks { ranks })
}

pub fn load_system_ranks(path: impl AsRef<Path>) -> Result<SystemRanks> {
    read_system_ranks(open(path.as_ref())?)
}

pub fn read_preferences<R: BufRead>(reader: R) -> Result<Vec<Preference>> {
    let mut prefs = Vec::new();
    for (i, line) in read_lines(reader)?.iter().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(CorpusError::parse(
                i + 1,
                format!(
                    "sentence-level judgments need segment<TAB>sysA<TAB>sysB<TAB>winner, found {} fields",
                    cols.len()
                ),
            ));
        }
        let segment_id: usize = cols[0]
            .parse()
            .map_err(|_| CorpusError::parse(i + 1, format!("bad segment id {:?}", cols[0])))?;
        let (a, b) = (cols[1], cols[2]);
        if a == b {
            return Err(CorpusError::parse(
                i + 1,
                format!("system {a} compared with itself"),
            ));
        }
        let winner = match cols[3] {
            w if w.eq_ignore_ascii_case("a") || w == a => Winner::A,
            w if w.eq_ignore_ascii_case("b") || w == b => Winner::B,
            w => {
                return Err(CorpusError::parse(
                    i + 1,
                    format!("winner must be A, B or a system name, got {w:?}"),
                ))
            }
        };
        prefs.push(Preference {
            segment_id,
            system_a: a.to_string(),
            system_b: b.to_string(),
            winner,
        });
    }
    Ok(prefs)
}

pub fn load_preferences(path: impl AsRef<Path>) -> Result<Vec<Preference>> {
    read_preferences(open(path.as_ref())?)
}
