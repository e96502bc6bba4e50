//! Runs the built binary against small files in a temporary directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use succabs::corpus::parse_corpus;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_succabs"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A small corpus where every word always carries the same tag.
const UNAMBIGUOUS: &str = "the\tD\ncat\tN\nran\tV\n\nthe\tD\ndog\tN\nsat\tV\n\na\tD\ncat\tN\nsat\tV\n\n";

fn train(dir: &Path, corpus: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let model = dir.join(name);
    let mut args = vec!["train", "--corpus", s(corpus), "--out", s(&model)];
    args.extend_from_slice(extra);
    ok(&run(&args));
    model
}

fn synth(dir: &Path) -> (PathBuf, PathBuf) {
    let train = dir.join("train.txt");
    let test = dir.join("test.txt");
    ok(&run(&[
        "synth",
        "--train-tokens",
        "4000",
        "--test-tokens",
        "800",
        "--vocab-size",
        "120",
        "--num-tags",
        "5",
        "--seed",
        "3",
        "--train-out",
        s(&train),
        "--test-out",
        s(&test),
    ]));
    (train, test)
}

#[test]
fn training_twice_gives_identical_model_files() {
    let dir = TempDir::new().unwrap();
    let (corpus, _) = synth(dir.path());
    let a = train(dir.path(), &corpus, "a.model", &[]);
    let b = train(dir.path(), &corpus, "b.model", &[]);
    let a = fs::read(a).unwrap();
    assert!(a.starts_with(b"SUCCABS\t1\n"));
    assert_eq!(a, fs::read(b).unwrap());
}

#[test]
fn tag_output_reparses_as_a_corpus() {
    let dir = TempDir::new().unwrap();
    let corpus = write(dir.path(), "c.txt", UNAMBIGUOUS);
    let model = train(dir.path(), &corpus, "m.model", &[]);
    let out = ok(&run_with_stdin(&["tag", "--model", s(&model)], "the cat sat\n\na dog ran zebra\n"));
    let parsed = parse_corpus(out.as_bytes(), None).unwrap();
    assert_eq!(parsed.len(), 2);
    let words: Vec<Vec<String>> = parsed.word_sentences();
    assert_eq!(words[1], ["a", "dog", "ran", "zebra"]);
    let tags: Vec<&str> = parsed.sentences()[0].iter().map(|t| parsed.tag_set().symbol(t.tag)).collect();
    assert_eq!(tags, ["D", "N", "V"]);
}

#[test]
fn empty_input_tags_to_empty_output() {
    let dir = TempDir::new().unwrap();
    let corpus = write(dir.path(), "c.txt", UNAMBIGUOUS);
    let model = train(dir.path(), &corpus, "m.model", &[]);
    assert_eq!(ok(&run_with_stdin(&["tag", "--model", s(&model)], "")), "");
    let input = write(dir.path(), "blank.txt", "\n  \n");
    let output = dir.path().join("out.txt");
    ok(&run(&["tag", "--model", s(&model), "--input", s(&input), "--output", s(&output)]));
    assert_eq!(fs::read_to_string(output).unwrap(), "");
}

#[test]
fn memorized_unambiguous_corpus_has_no_errors() {
    let dir = TempDir::new().unwrap();
    let corpus = write(dir.path(), "c.txt", UNAMBIGUOUS);
    let model = train(dir.path(), &corpus, "m.model", &[]);
    let kv = ok(&run(&["eval", "--model", s(&model), "--gold", s(&corpus), "--format", "kv"]));
    assert!(kv.lines().any(|l| l == "error_rate\t0.000000"), "{kv}");
    assert!(kv.lines().any(|l| l == "total_tokens\t9"), "{kv}");
    for line in kv.lines() {
        assert_eq!(line.split('\t').count(), 2, "{line}");
    }
}

#[test]
fn unigram_model_picks_each_words_majority_tag() {
    let dir = TempDir::new().unwrap();
    // "run" is N twice and V once; "set" is tied between N and V.
    let corpus = write(dir.path(), "c.txt", "run\tN\nset\tV\n\nrun\tN\nset\tN\n\nrun\tV\nup\tP\n\nby\tP\nit\tN\n\n");
    let model = train(dir.path(), &corpus, "m.model", &["--order", "1"]);
    let out = ok(&run_with_stdin(&["tag", "--model", s(&model)], "run set up by it\n"));
    let tags: Vec<&str> = out.lines().filter(|l| !l.is_empty()).map(|l| l.split('\t').nth(1).unwrap()).collect();
    // Ties go to the lower tag index: N sorts before V.
    assert_eq!(tags, ["N", "N", "P", "P", "N"]);
}

#[test]
fn synthetic_error_rate_beats_chance() {
    let dir = TempDir::new().unwrap();
    let (train_path, test_path) = synth(dir.path());
    let model = train(dir.path(), &train_path, "m.model", &[]);
    let kv = ok(&run(&["eval", "--model", s(&model), "--gold", s(&test_path), "--format", "kv"]));
    let rate: f64 = kv.lines().find_map(|l| l.strip_prefix("error_rate\t")).unwrap().parse().unwrap();
    assert!(rate < 1.0 - 1.0 / 5.0, "{rate}");
}

#[test]
fn comparing_a_model_with_itself_shows_no_difference() {
    let dir = TempDir::new().unwrap();
    let corpus = write(dir.path(), "c.txt", UNAMBIGUOUS);
    let a = train(dir.path(), &corpus, "a.model", &[]);
    let b = train(dir.path(), &corpus, "b.model", &["--smoothing", "ele"]);
    let kv = ok(&run(&["compare", "--model", s(&a), "--model", s(&a), "--gold", s(&corpus), "--format", "kv"]));
    let diff = kv.lines().find(|l| l.contains(".difference\t")).unwrap();
    assert!(diff.ends_with("\t0.000000"), "{kv}");
    assert!(kv.lines().filter(|l| l.contains(".significant_")).all(|l| l.ends_with("\tfalse")), "{kv}");
    let table = ok(&run(&["compare", "--model", s(&a), "--model", s(&b), "--gold", s(&corpus)]));
    assert!(table.lines().any(|l| l.starts_with("a - b")), "{table}");
}

#[test]
fn bad_lambdas_are_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let corpus = write(dir.path(), "c.txt", UNAMBIGUOUS);
    let out = dir.path().join("m.model");
    let r =
        run(&["train", "--corpus", s(&corpus), "--out", s(&out), "--smoothing", "interp", "--lambdas", "0.2,0.3,0.6"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(!out.exists());
    let r =
        run(&["train", "--corpus", s(&corpus), "--out", s(&out), "--smoothing", "interp", "--lambdas", "0.2,0.3,0.5"]);
    assert_eq!(r.status.code(), Some(0));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(run(&["train", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
}

#[test]
fn missing_or_malformed_files_are_data_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.txt");
    let out = dir.path().join("m.model");
    assert_eq!(run(&["train", "--corpus", s(&missing), "--out", s(&out)]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.model", "NOT A MODEL\n");
    assert_eq!(run(&["tag", "--model", s(&bad)]).status.code(), Some(2));
    let broken = write(dir.path(), "broken.txt", "word without tab\n");
    assert_eq!(run(&["train", "--corpus", s(&broken), "--out", s(&out)]).status.code(), Some(2));
}

#[test]
fn synth_writes_deterministic_files() {
    let dir = TempDir::new().unwrap();
    let (a_train, a_test) = synth(dir.path());
    let a = (fs::read(&a_train).unwrap(), fs::read(&a_test).unwrap());
    let spec = dir.path().join("spec.json");
    ok(&run(&[
        "synth",
        "--train-tokens",
        "4000",
        "--test-tokens",
        "800",
        "--vocab-size",
        "120",
        "--num-tags",
        "5",
        "--seed",
        "3",
        "--train-out",
        s(&a_train),
        "--test-out",
        s(&a_test),
        "--spec-out",
        s(&spec),
    ]));
    assert_eq!(a, (fs::read(&a_train).unwrap(), fs::read(&a_test).unwrap()));
    let json: String = fs::read_to_string(spec).unwrap();
    assert!(json.trim_start().starts_with('{'));
    let parsed = parse_corpus(&a.0[..], None).unwrap();
    assert_eq!(parsed.token_count(), 4000);
}
