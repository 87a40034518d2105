use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dpmf_core::corpus;
use dpmf_core::pipeline::{self, Error, RunConfig, ScoreTable};

#[derive(Parser, Debug)]
#[command(
    name = "dpmf",
    version,
    about = "Dependency-parsing-model MT evaluation (DPM / DPMF)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score hypotheses against reference trees, one TSV row per segment
    Score {
        /// Reference treebank (index, form, tag, head per token; blank line between sentences)
        #[arg(long)]
        refs: PathBuf,
        /// Hypotheses, one `word_TAG` sentence per line
        #[arg(long)]
        hyps: PathBuf,
        /// Write the TSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Correlate metric scores with human judgments
    Correlate {
        #[arg(long, value_enum)]
        level: Level,
        /// System ranks (`system rank`) or pairwise preferences (`segment a b winner`)
        #[arg(long)]
        judgments: PathBuf,
        /// Score TSVs from `dpmf score`; the system name is the file stem, or give NAME=PATH
        #[arg(long, num_args = 1.., required = true)]
        scores: Vec<String>,
    },
    /// Print the oracle table, model weights and beam trace for one segment
    Inspect {
        #[arg(long)]
        refs: PathBuf,
        /// 1-based segment number in the reference file
        #[arg(long)]
        segment: usize,
        /// Tagged hypothesis line, e.g. "our_PRP goal_NN"
        #[arg(long)]
        hyp: String,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Level {
    System,
    Sentence,
}

/// Every config-file key as a flag; flags override the file.
#[derive(Args, Debug)]
struct ConfigArgs {
    /// `key = value` file; `#` starts a comment
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_name = "A")]
    alpha: Option<String>,
    #[arg(long = "w-f", alias = "w_f", value_name = "W")]
    w_f: Option<String>,
    #[arg(long = "w-exact", alias = "w_exact", value_name = "W")]
    w_exact: Option<String>,
    #[arg(long = "w-stem", alias = "w_stem", value_name = "W")]
    w_stem: Option<String>,
    #[arg(long = "w-synonym", alias = "w_synonym", value_name = "W")]
    w_synonym: Option<String>,
    #[arg(long = "w-paraphrase", alias = "w_paraphrase", value_name = "W")]
    w_paraphrase: Option<String>,
    #[arg(long = "beam-width", alias = "beam_width", value_name = "N")]
    beam_width: Option<String>,
    #[arg(long, value_name = "L")]
    l2: Option<String>,
    #[arg(long = "max-iterations", alias = "max_iterations", value_name = "N")]
    max_iterations: Option<String>,
    #[arg(long, value_name = "T")]
    tolerance: Option<String>,
    /// One function word per line
    #[arg(long = "function-words", alias = "function_words", value_name = "PATH")]
    function_words: Option<String>,
    /// One synonym group per line
    #[arg(long, value_name = "PATH")]
    synonyms: Option<String>,
    /// `source<TAB>target<TAB>probability` lines
    #[arg(long, value_name = "PATH")]
    paraphrases: Option<String>,
    /// Worker threads (0 = one per core)
    #[arg(long, value_name = "N")]
    threads: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            let text = read_text(path)?;
            config
                .apply_file(&text)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        }
        let flags = [
            ("alpha", &self.alpha),
            ("w_f", &self.w_f),
            ("w_exact", &self.w_exact),
            ("w_stem", &self.w_stem),
            ("w_synonym", &self.w_synonym),
            ("w_paraphrase", &self.w_paraphrase),
            ("beam_width", &self.beam_width),
            ("l2", &self.l2),
            ("max_iterations", &self.max_iterations),
            ("tolerance", &self.tolerance),
            ("function_words", &self.function_words),
            ("synonyms", &self.synonyms),
            ("paraphrases", &self.paraphrases),
            ("threads", &self.threads),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: String) -> Self {
        Failure { code: 1, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_input_error() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: corpus::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        corpus::CorpusError::Io { .. } => Failure::input(e.to_string()),
        e => Failure::input(format!("{}: {e}", path.display())),
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    let written = match out {
        Some(path) => fs::write(path, text).map_err(|e| (path.display().to_string(), e)),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| ("stdout".to_string(), e)),
    };
    written.map_err(|(what, e)| Failure {
        code: 2,
        message: format!("{what}: {e}"),
    })
}

fn score(refs: &Path, hyps: &Path, out: Option<&Path>, args: &ConfigArgs) -> Result<(), Failure> {
    let config = args.resolve()?;
    let trees = in_file(refs, corpus::load_ref_sentences(refs))?;
    let hyps = in_file(hyps, corpus::load_hypotheses(hyps))?;
    let res = config.load_resources()?;
    let rows = pipeline::score_corpus(&trees, &hyps, &res, &config)?;
    emit(&pipeline::render_scores(&rows), out)
}

/// `NAME=PATH`, or a bare path named by its file stem.
fn score_source(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            (name.to_string(), path.into())
        }
        _ => {
            let path = PathBuf::from(spec);
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            (name, path)
        }
    }
}

fn correlate(level: Level, judgments: &Path, scores: &[String]) -> Result<(), Failure> {
    let mut tables: Vec<(String, ScoreTable)> = Vec::new();
    for spec in scores {
        let (name, path) = score_source(spec);
        if tables.iter().any(|(n, _)| *n == name) {
            return Err(Failure::input(format!("system {name} given twice")));
        }
        let table = pipeline::parse_scores(&read_text(&path)?)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        tables.push((name, table));
    }
    let report = match level {
        Level::System => {
            let ranks = in_file(judgments, corpus::load_system_ranks(judgments))?;
            pipeline::render_system_report(&pipeline::correlate_systems(&tables, &ranks)?)
        }
        Level::Sentence => {
            let prefs = in_file(judgments, corpus::load_preferences(judgments))?;
            let (counts, tau) = pipeline::correlate_segments(&tables, &prefs)?;
            pipeline::render_segment_report(&counts, tau)
        }
    };
    emit(&report, None)
}

fn inspect(refs: &Path, segment: usize, hyp: &str, args: &ConfigArgs) -> Result<(), Failure> {
    let config = args.resolve()?;
    let mut trees = in_file(refs, corpus::load_ref_sentences(refs))?;
    if segment == 0 || segment > trees.len() {
        return Err(Error::UnknownSegment(segment).into());
    }
    let tree = in_file(refs, trees.swap_remove(segment - 1))?;
    let hyp = corpus::parse_tagged_line(segment, hyp, 1)
        .map_err(|e| Failure::input(format!("--hyp: {e}")))?;
    emit(&pipeline::inspect(&tree, &hyp, &config)?, None)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Score {
            refs,
            hyps,
            out,
            config,
        } => score(refs, hyps, out.as_deref(), config),
        Command::Correlate {
            level,
            judgments,
            scores,
        } => correlate(*level, judgments, scores),
        Command::Inspect {
            refs,
            segment,
            hyp,
            config,
        } => inspect(refs, *segment, hyp, config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dpmf: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
