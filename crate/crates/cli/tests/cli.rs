use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const REF: &str = "1\tmy\tPRP\t2\n2\tobjective\tNN\t3\n3\tis\tVBZ\t0\n4\tto\tTO\t5\n\
5\tdiscover\tVB\t3\n6\tthe\tDT\t7\n7\ttruth\tNN\t5\n8\t.\t.\t3\n";
const HYP1: &str = "our_PRP goal_NN was_VBZ finding_VBG fact_NN ._.";
const HYP2: &str = "was_VBZ finding_VBG our_PRP goal_NN fact_NN ._.";
const IDENT: &str = "my_PRP objective_NN is_VBZ to_TO discover_VB the_DT truth_NN ._.";

fn dpmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpmf"))
        .args(args)
        .output()
        .expect("run dpmf")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// (segment, dpm, fscore, dpmf) rows of a score TSV.
fn rows(tsv: &str) -> Vec<(usize, f64, f64, f64)> {
    tsv.lines()
        .skip(1)
        .filter(|l| !l.starts_with("SYSTEM"))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
            )
        })
        .collect()
}

fn three_refs() -> String {
    format!("{REF}\n1\ttruth\tNN\t0\n\n1\tthe\tDT\t2\n2\ttruth\tNN\t0\n")
}

#[test]
fn identity_hypotheses_score_full_f() {
    let dir = TempDir::new().unwrap();
    let refs = write(&dir, "ref.conll", &three_refs());
    let hyps = write(
        &dir,
        "hyp.txt",
        &format!("{IDENT}\ntruth_NN\nthe_DT truth_NN\n"),
    );
    let o = dpmf(&["score", "--refs", s(&refs), "--hyps", s(&hyps)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("segment_id\tdpm\tfscore\tdpmf\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    for (_, dpm, f, d) in r {
        assert_eq!(f, 1.0);
        assert_eq!(d, dpm);
        assert!(dpm > 0.0 && dpm <= 1.0);
    }
    let last = out.lines().last().unwrap();
    assert!(last.starts_with("SYSTEM\t"));
    assert_eq!(
        last.split('\t')
            .nth(1)
            .unwrap()
            .split('.')
            .nth(1)
            .unwrap()
            .len(),
        6
    );
}

#[test]
fn table3_hyp1_beats_hyp2() {
    let dir = TempDir::new().unwrap();
    let refs = write(&dir, "ref.conll", REF);
    let score = |hyp: &str| {
        let h = write(&dir, "h.txt", &format!("{hyp}\n"));
        let o = dpmf(&["score", "--refs", s(&refs), "--hyps", s(&h)]);
        assert!(o.status.success(), "{}", stderr(&o));
        rows(&stdout(&o))[0].3
    };
    assert!(score(HYP1) > score(HYP2));
}

#[test]
fn empty_hypothesis_scores_zero() {
    let dir = TempDir::new().unwrap();
    let refs = write(&dir, "ref.conll", &three_refs());
    let hyps = write(&dir, "hyp.txt", &format!("{IDENT}\n\nthe_DT truth_NN\n"));
    let o = dpmf(&["score", "--refs", s(&refs), "--hyps", s(&hyps)]);
    assert!(o.status.success());
    let line = stdout(&o).lines().nth(2).unwrap().to_string();
    assert!(
        line.starts_with("2\t0.000000\t0.000000\t0.000000\t"),
        "{line}"
    );
}

#[test]
fn count_mismatch_is_input_error() {
    let dir = TempDir::new().unwrap();
    let refs = write(&dir, "ref.conll", &three_refs());
    let hyps = write(&dir, "hyp.txt", &format!("{IDENT}\n"));
    let o = dpmf(&["score", "--refs", s(&refs), "--hyps", s(&hyps)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("3 reference segments but 1 hypotheses"));
}

#[test]
fn bad_inputs_exit_one() {
    let dir = TempDir::new().unwrap();
    let refs = write(&dir, "ref.conll", REF);
    let hyps = write(&dir, "hyp.txt", "word_without_tag_ oops\n");
    let o = dpmf(&["score", "--refs", s(&refs), "--hyps", s(&hyps)]);
    assert_eq!(o.status.code(), Some(1));

    let good = write(&dir, "good.txt", &format!("{HYP1}\n"));
    let o = dpmf(&[
        "score",
        "--refs",
        s(&refs),
        "--hyps",
        s(&good),
        "--alpha",
        "1.5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let cfg = write(&dir, "bad.cfg", "colour = blue\n");
    let o = dpmf(&[
        "score",
        "--refs",
        s(&refs),
        "--hyps",
        s(&good),
        "--config",
        s(&cfg),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"));
    let o = dpmf(&["score", "--refs", s(&refs)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    let refs = write(&dir, "ref.conll", "1\tthe\tDT\t2\n2\ttruth\tNN\t0\n");
    let hyps = write(&dir, "hyp.txt", "a_DT truth_NN\n");
    let fw = write(&dir, "fw.txt", "a\nthe\n");
    let cfg = write(
        &dir,
        "run.cfg",
        &format!("# weights\nw_f = 0.5\nfunction_words = {}\n", s(&fw)),
    );
    let f_of = |extra: &[&str]| {
        let mut args = vec![
            "score",
            "--refs",
            s(&refs),
            "--hyps",
            s(&hyps),
            "--config",
            s(&cfg),
        ];
        args.extend_from_slice(extra);
        let o = dpmf(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        rows(&stdout(&o))[0].2
    };
    // one content word matched out of one function + one content word
    assert_eq!(f_of(&[]), 0.5);
    assert_eq!(f_of(&["--w-f", "0.25"]), 0.75);
    assert_eq!(f_of(&["--w_f", "0.25"]), 0.75);
}

#[test]
fn output_is_deterministic_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let refs = write(&dir, "ref.conll", &three_refs());
    let hyps = write(
        &dir,
        "hyp.txt",
        &format!("{HYP2}\ntruth_NN\ntruth_NN the_DT\n"),
    );
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let o = dpmf(&[
            "score",
            "--refs",
            s(&refs),
            "--hyps",
            s(&hyps),
            "--threads",
            threads,
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(o.stdout.is_empty());
        fs::read(out).unwrap()
    };
    let a = run("1", "a.tsv");
    assert_eq!(a, run("1", "b.tsv"));
    assert_eq!(a, run("8", "c.tsv"));
}

fn score_file(dir: &TempDir, name: &str, dpmf: &[f64]) -> PathBuf {
    let mut t = String::from("segment_id\tdpm\tfscore\tdpmf\n");
    for (i, v) in dpmf.iter().enumerate() {
        t += &format!("{}\t{v:.6}\t1.000000\t{v:.6}\n", i + 1);
    }
    t += &format!(
        "SYSTEM\t{:.6}\n",
        dpmf.iter().sum::<f64>() / dpmf.len() as f64
    );
    write(dir, name, &t)
}

#[test]
fn correlate_system_level() {
    let dir = TempDir::new().unwrap();
    let x = score_file(&dir, "x.tsv", &[0.9, 0.1]);
    let y = score_file(&dir, "y.tsv", &[0.2, 0.4]);
    let ranks = write(&dir, "ranks.txt", "x\t1\ny\t2\n");
    let o = dpmf(&[
        "correlate",
        "--level",
        "system",
        "--judgments",
        s(&ranks),
        "--scores",
        s(&x),
        s(&y),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("rho\t1.0000\n"), "{}", stdout(&o));

    let z = score_file(&dir, "z.tsv", &[0.5, 0.5]);
    let three = write(&dir, "three.txt", "x\t1\ny\t2\nw\t3\n");
    let o = dpmf(&[
        "correlate",
        "--level",
        "system",
        "--judgments",
        s(&three),
        "--scores",
        s(&x),
        s(&y),
        &format!("w={}", s(&z)),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = dpmf(&[
        "correlate",
        "--level",
        "system",
        "--judgments",
        s(&three),
        "--scores",
        s(&x),
        s(&y),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains('w'));
}

#[test]
fn correlate_sentence_level() {
    let dir = TempDir::new().unwrap();
    let x = score_file(&dir, "x.tsv", &[0.9, 0.1]);
    let y = score_file(&dir, "y.tsv", &[0.2, 0.4]);
    let prefs = write(&dir, "prefs.txt", "1\tx\ty\tA\n2\tx\ty\tB\n1\ty\tx\tA\n");
    let o = dpmf(&[
        "correlate",
        "--level",
        "sentence",
        "--judgments",
        s(&prefs),
        "--scores",
        s(&x),
        s(&y),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "concordant\t2\ndiscordant\t1\nties\t0\ntau\t0.3333\n"
    );

    let ranks = write(&dir, "ranks.txt", "x\t1\ny\t2\n");
    let o = dpmf(&[
        "correlate",
        "--level",
        "sentence",
        "--judgments",
        s(&ranks),
        "--scores",
        s(&x),
        s(&y),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let stray = write(&dir, "stray.txt", "1\tx\tq\tA\n");
    let o = dpmf(&[
        "correlate",
        "--level",
        "sentence",
        "--judgments",
        s(&stray),
        "--scores",
        s(&x),
        s(&y),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains('q'));
}

#[test]
fn inspect_trace() {
    let dir = TempDir::new().unwrap();
    let refs = write(&dir, "ref.conll", &three_refs());
    let o = dpmf(&[
        "inspect",
        "--refs",
        s(&refs),
        "--segment",
        "1",
        "--hyp",
        HYP1,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    assert!(first.starts_with("SHIFT\t"));
    assert!(first.split('\t').any(|f| f == "s0w|s0t=<NONE>|<NONE>"));
    assert!(out.contains("\n## beam\n"));
    assert!(out.lines().last().unwrap().starts_with("## result\t"));
    // the dump is stable from run to run
    let again = dpmf(&[
        "inspect",
        "--refs",
        s(&refs),
        "--segment",
        "1",
        "--hyp",
        HYP1,
    ]);
    assert_eq!(o.stdout, again.stdout);

    let o = dpmf(&[
        "inspect",
        "--refs",
        s(&refs),
        "--segment",
        "2",
        "--hyp",
        "truth_NN",
    ]);
    let out = stdout(&o);
    let table: Vec<&str> = out.lines().take_while(|l| !l.starts_with("## ")).collect();
    assert_eq!(table.len(), 1);
    assert!(table[0].starts_with("SHIFT\t"));
}

#[test]
fn inspect_rejects_unknown_segment() {
    let dir = TempDir::new().unwrap();
    let refs = write(&dir, "ref.conll", REF);
    for seg in ["0", "2"] {
        let o = dpmf(&[
            "inspect",
            "--refs",
            s(&refs),
            "--segment",
            seg,
            "--hyp",
            HYP1,
        ]);
        assert_eq!(o.status.code(), Some(1));
    }
}
