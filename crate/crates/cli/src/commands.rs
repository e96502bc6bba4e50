use std::collections::HashSet;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::Context;
use succabs::corpus::{parse_corpus, split_corpus, synthesize_corpus, write_corpus, Corpus, SynthesisConfig};
use succabs::counts::RareWordPolicy;
use succabs::evaluation::{compare as compare_reports, evaluate, EvalReport};
use succabs::model_file::{load_model, save_model};
use succabs::smoothing::{InterpolationWeights, RootMode};
use succabs::tagger::{tune_interpolation, DecodeOptions, Model, Smoothing, TrainConfig, TuningObjective};

use crate::{
    CompareArgs, EvalArgs, Format, ObjectiveArg, RootModeArg, SmoothingArg, SplitArgs, SynthArgs, TagArgs, TrainArgs,
};

pub enum Failure {
    /// Bad flags or flag values.
    Usage(String),
    /// Unreadable, malformed or inconsistent input.
    Data(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Data(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome = Result<(), Failure>;

fn usage<T>(message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(message.into()))
}

fn read_corpus(path: &Path) -> Result<Corpus, Failure> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(parse_corpus(BufReader::new(file), None).with_context(|| format!("cannot read corpus {}", path.display()))?)
}

fn read_model(path: &Path) -> Result<Model, Failure> {
    Ok(load_model(path).with_context(|| format!("cannot load model {}", path.display()))?)
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Outcome {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write(&mut out).and_then(|_| out.flush()).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn divides_one(step: f64) -> bool {
    step > 0.0 && step <= 1.0 && ((1.0 / step).round() * step - 1.0).abs() <= 1e-9
}

pub fn train(a: TrainArgs) -> Outcome {
    if a.order == 0 {
        return usage("--order must be at least 1");
    }
    if !(a.sigma_scale > 0.0 && a.sigma_scale.is_finite()) {
        return usage("--sigma-scale must be a positive number");
    }
    let policy = match RareWordPolicy::new(a.rare_threshold, a.max_suffix) {
        Ok(p) => p,
        Err(e) => return usage(format!("{e}")),
    };
    let smoothing = match (a.smoothing, &a.lambdas, &a.tune_gold) {
        (SmoothingArg::Interp, Some(l), None) => {
            if l.len() != a.order {
                return usage(format!("--lambdas needs {} weights for order {}", a.order, a.order));
            }
            match InterpolationWeights::new(l.clone()) {
                Ok(w) => Smoothing::Interp(w),
                Err(e) => return usage(format!("--lambdas: {e}")),
            }
        }
        (SmoothingArg::Interp, None, Some(_)) => {
            if !divides_one(a.grid_step) {
                return usage(format!("--grid-step {} does not divide 1", a.grid_step));
            }
            let uniform = vec![1.0 / a.order as f64; a.order];
            Smoothing::Interp(InterpolationWeights::new(uniform).expect("uniform weights are valid"))
        }
        (SmoothingArg::Interp, None, None) => return usage("--smoothing interp needs --lambdas or --tune-gold"),
        (_, Some(_), _) | (_, _, Some(_)) => {
            return usage("--lambdas and --tune-gold only apply to --smoothing interp")
        }
        (SmoothingArg::Sa, None, None) => Smoothing::Sa,
        (SmoothingArg::Ele, None, None) => Smoothing::Ele,
    };
    let root_mode = match a.root_mode {
        RootModeArg::Rf => RootMode::RelativeFrequency,
        RootModeArg::Ele => RootMode::Ele,
    };
    let config = TrainConfig { order: a.order, policy, root_mode, sigma_scale: a.sigma_scale, smoothing };

    let corpus = read_corpus(&a.corpus)?;
    let mut model = Model::train(&corpus, &config).context("training failed")?;
    if let Some(path) = &a.tune_gold {
        let held_out = read_corpus(path)?;
        let objective = match a.objective {
            ObjectiveArg::Loglik => TuningObjective::LogLikelihood,
            ObjectiveArg::Accuracy => TuningObjective::Accuracy,
        };
        let options = DecodeOptions { open_lattice: a.open_lattice };
        let (best, result) =
            tune_interpolation(&model, &held_out, a.grid_step, objective, options).context("weight search failed")?;
        let weights: Vec<String> = result.weights.as_slice().iter().map(|w| format!("{w:.2}")).collect();
        eprintln!("chosen weights {} (score {}, {} grid points)", weights.join(","), result.score, result.evaluated);
        model = best;
    }
    save_model(&model, &a.out).with_context(|| format!("cannot write {}", a.out.display()))?;
    Ok(())
}

/// Sentences of whitespace-separated words, one per non-blank line.
fn read_sentences(input: impl BufRead) -> io::Result<Vec<Vec<String>>> {
    let mut sentences = Vec::new();
    for line in input.lines() {
        let words: Vec<String> = line?.split_whitespace().map(str::to_owned).collect();
        if !words.is_empty() {
            sentences.push(words);
        }
    }
    Ok(sentences)
}

pub fn tag(a: TagArgs) -> Outcome {
    let model = read_model(&a.model)?;
    let sentences = match &a.input {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            read_sentences(BufReader::new(file))
        }
        None => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text).and_then(|_| read_sentences(text.as_bytes()))
        }
    }
    .context("cannot read input")?;
    let options = DecodeOptions { open_lattice: a.open_lattice };
    let tags = model.tag_corpus(&sentences, options).context("tagging failed")?;

    let render = |out: &mut dyn Write| -> io::Result<()> {
        for (words, tags) in sentences.iter().zip(&tags) {
            for (w, t) in words.iter().zip(tags) {
                writeln!(out, "{w}\t{}", model.tag_set().symbol(*t))?;
            }
            writeln!(out)?;
        }
        Ok(())
    };
    match &a.output {
        Some(path) => write_file(path, |out| render(out)),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            render(&mut lock).and_then(|_| lock.flush()).context("cannot write output")?;
            Ok(())
        }
    }
}

fn report_for(model: &Model, gold: &Corpus, options: DecodeOptions) -> Result<EvalReport, Failure> {
    let predicted = model.tag_corpus(&gold.word_sentences(), options).context("tagging failed")?;
    let symbols: Vec<Vec<&str>> =
        predicted.iter().map(|s| s.iter().map(|&t| model.tag_set().symbol(t)).collect()).collect();
    Ok(evaluate(gold, &symbols, model.lexicon()).context("evaluation failed")?)
}

pub fn eval(a: EvalArgs) -> Outcome {
    let model = read_model(&a.model)?;
    let gold = read_corpus(&a.gold)?;
    let report = report_for(&model, &gold, DecodeOptions { open_lattice: a.open_lattice })?;
    match a.format {
        Format::Table => print!("{}", report.to_table()),
        Format::Kv => print!("{}", report.to_key_value()),
    }
    Ok(())
}

/// File stems, or full paths when two models share a stem.
fn model_names(paths: &[std::path::PathBuf]) -> Vec<String> {
    let stems: Vec<String> = paths
        .iter()
        .map(|p| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()))
        .collect();
    let unique: HashSet<&String> = stems.iter().collect();
    if unique.len() == stems.len() {
        stems
    } else {
        paths.iter().map(|p| p.display().to_string()).collect()
    }
}

pub fn compare(a: CompareArgs) -> Outcome {
    if a.models.len() < 2 {
        return usage("compare needs at least two --model flags");
    }
    let gold = read_corpus(&a.gold)?;
    let options = DecodeOptions { open_lattice: a.open_lattice };
    let mut reports = Vec::with_capacity(a.models.len());
    for (name, path) in model_names(&a.models).into_iter().zip(&a.models) {
        let model = read_model(path)?;
        reports.push((name, report_for(&model, &gold, options)?));
    }
    let comparison = compare_reports(reports).context("comparison failed")?;
    match a.format {
        Format::Table => print!("{}", comparison.to_table()),
        Format::Kv => print!("{}", comparison.to_key_value()),
    }
    Ok(())
}

pub fn synth(a: SynthArgs) -> Outcome {
    let config = SynthesisConfig {
        num_tags: a.num_tags,
        vocab_size: a.vocab_size,
        num_train_tokens: a.train_tokens,
        num_test_tokens: a.test_tokens,
        seed: a.seed,
        zipf_exponent: a.zipf_exponent,
    };
    if let Err(e) = config.validate() {
        return usage(e.to_string());
    }
    let corpus = synthesize_corpus(&config).context("synthesis failed")?;
    write_file(&a.train_out, |out| write_corpus(&corpus.train, out))?;
    write_file(&a.test_out, |out| write_corpus(&corpus.test, out))?;
    if let Some(path) = &a.spec_out {
        let json = serde_json::to_string_pretty(&corpus.spec).context("cannot encode generator spec")?;
        fs::write(path, json + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

pub fn split(a: SplitArgs) -> Outcome {
    if !(a.train_fraction > 0.0 && a.train_fraction < 1.0) {
        return usage("--train-fraction must lie strictly between 0 and 1");
    }
    let corpus = read_corpus(&a.corpus)?;
    let (train, test) = split_corpus(&corpus, a.train_fraction, a.seed).context("cannot split corpus")?;
    write_file(&a.train_out, |out| write_corpus(&train, out))?;
    write_file(&a.test_out, |out| write_corpus(&test, out))
}
