//! Command-line driver for the sentiment transformation pipeline.
//!
//! Subcommands cover the full workflow: ingest and train the classifier,
//! extract phrases, train the echo autoencoder, build the latent store,
//! transform sentences by either route, and run the evaluations. Exit codes:
//! 0 success, 1 runtime failure, 2 invalid input or configuration.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polarity_pipe::classifier::{self, ClassifierParams};
use polarity_pipe::corpus::{self, Document, Sentiment, Vocabulary};
use polarity_pipe::encoder_route::{self, AutoencoderParams};
use polarity_pipe::extractor::{self, Phrase};
use polarity_pipe::pipeline::{
    self, EncoderComponents, Pipeline, Route, TransformResult, WordvecComponents,
};
use polarity_pipe::resources;
use polarity_pipe::wordvec_route::PolarityMemo;

use config::RunConfig;

const THREADS_ENV: &str = "POLARITY_PIPE_THREADS";

/// Print to stdout, ignoring a closed pipe (e.g. `polarity-pipe ... | head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "polarity-pipe", version, about = "Sentiment transformation pipeline")]
struct Cli {
    /// Key=value configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the attention classifier on the configured dataset.
    TrainClassifier,
    /// Run the classifier over a split and dump extracted phrases.
    Extract {
        /// Which split to scan.
        #[arg(long, default_value = "train")]
        split: String,
    },
    /// Train the echo autoencoder on a phrase dump.
    TrainAutoencoder {
        #[arg(long)]
        phrases: PathBuf,
    },
    /// Encode a phrase dump into the latent store.
    BuildStore {
        #[arg(long)]
        phrases: PathBuf,
    },
    /// Transform raw sentences (one per line) and write results.
    Transform {
        #[arg(long)]
        input: PathBuf,
        /// Transformation route; defaults to the configured one.
        #[arg(long)]
        route: Option<String>,
    },
    /// Report the flip rate of a results file.
    Evaluate {
        #[arg(long)]
        results: PathBuf,
        /// Also report per-length-bucket autoencoder flip rates.
        #[arg(long)]
        ae_buckets: bool,
        /// Phrase dump for the bucket report.
        #[arg(long)]
        phrases: Option<PathBuf>,
    },
    /// Export a blank human-evaluation rating sheet for paired results.
    ExportHumanEval {
        #[arg(long)]
        encoder_results: PathBuf,
        #[arg(long)]
        wordvec_results: PathBuf,
    },
    /// Aggregate a filled rating sheet.
    AggregateRatings {
        #[arg(long)]
        csv: PathBuf,
    },
}

enum CliError {
    /// Invalid input or configuration: exit 2.
    Invalid(String),
    /// Failure during execution: exit 1.
    Runtime(String),
}

impl CliError {
    fn invalid(e: impl std::fmt::Display) -> Self {
        CliError::Invalid(e.to_string())
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut config = match &cli.config {
        Some(path) => config::parse_file(path).map_err(CliError::Invalid)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    config::validate(&config).map_err(CliError::Invalid)?;
    std::fs::create_dir_all(&config.out_dir).map_err(CliError::invalid)?;
    std::fs::write(
        config.out_dir.join("effective_config.txt"),
        config::render(&config),
    )
    .map_err(CliError::runtime)?;

    match cli.command {
        Command::TrainClassifier => cmd_train_classifier(&config),
        Command::Extract { split } => cmd_extract(&config, &split),
        Command::TrainAutoencoder { phrases } => cmd_train_autoencoder(&config, &phrases),
        Command::BuildStore { phrases } => cmd_build_store(&config, &phrases),
        Command::Transform { input, route } => cmd_transform(&config, &input, route.as_deref()),
        Command::Evaluate {
            results,
            ae_buckets,
            phrases,
        } => cmd_evaluate(&config, &results, ae_buckets, phrases.as_deref()),
        Command::ExportHumanEval {
            encoder_results,
            wordvec_results,
        } => cmd_export_human_eval(&config, &encoder_results, &wordvec_results),
        Command::AggregateRatings { csv } => cmd_aggregate_ratings(&csv),
    }
}

fn load_dataset(config: &RunConfig) -> CliResult<corpus::DatasetSplit> {
    match config.dataset.as_str() {
        "imdb" => {
            let root = config
                .imdb_root
                .as_ref()
                .ok_or_else(|| CliError::Invalid("imdb_root is not configured".into()))?;
            corpus::load_imdb(root).map_err(CliError::invalid)
        }
        "rotten" => {
            let path = config
                .rotten_tomatoes
                .as_ref()
                .ok_or_else(|| CliError::Invalid("rotten_tomatoes is not configured".into()))?;
            corpus::load_rotten_tomatoes(path).map_err(CliError::invalid)
        }
        other => Err(CliError::Invalid(format!("unknown dataset {other:?}"))),
    }
}

fn load_classifier(config: &RunConfig) -> CliResult<(ClassifierParams, Vocabulary)> {
    let params = classifier::load_checkpoint(&config.classifier_ckpt()).map_err(CliError::invalid)?;
    let vocab = Vocabulary::load(&config.classifier_vocab()).map_err(CliError::invalid)?;
    if params.dims.vocab_size != vocab.len() {
        return Err(CliError::Invalid(format!(
            "checkpoint vocabulary size {} does not match vocabulary file ({} tokens)",
            params.dims.vocab_size,
            vocab.len()
        )));
    }
    Ok((params, vocab))
}

fn load_autoencoder(config: &RunConfig) -> CliResult<(AutoencoderParams, Vocabulary)> {
    let params =
        encoder_route::load_checkpoint(&config.autoencoder_ckpt()).map_err(CliError::invalid)?;
    let vocab = Vocabulary::load(&config.autoencoder_vocab()).map_err(CliError::invalid)?;
    if params.dims.vocab_size != vocab.len() {
        return Err(CliError::Invalid(format!(
            "autoencoder vocabulary size {} does not match vocabulary file ({} tokens)",
            params.dims.vocab_size,
            vocab.len()
        )));
    }
    Ok((params, vocab))
}

fn thread_budget(items: usize) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(available);
    cap.min(available).min(items.max(1))
}

fn cmd_train_classifier(config: &RunConfig) -> CliResult<()> {
    let split = load_dataset(config)?;
    if split.train.is_empty() {
        return Err(CliError::Invalid("dataset has no training documents".into()));
    }
    if split.skipped > 0 {
        eprintln!("warning: {} inputs skipped during ingestion", split.skipped);
    }
    let vocab = corpus::build_vocabulary(&split.train, config.vocab_min_count, config.vocab_max_size);
    say!(
        "training on {} documents (vocabulary {})",
        split.train.len(),
        vocab.len()
    );
    let report =
        classifier::train(&split.train, &vocab, &config.train_config()).map_err(CliError::runtime)?;
    for (epoch, loss) in report.epoch_losses.iter().enumerate() {
        match report.holdout_accuracy.get(epoch) {
            Some(acc) => say!("epoch {}: loss {loss:.6} holdout {acc:.3}", epoch + 1),
            None => say!("epoch {}: loss {loss:.6}", epoch + 1),
        }
    }
    if !report.holdout_accuracy.is_empty() {
        say!("selected epoch {}", report.best_epoch + 1);
    }
    classifier::save_checkpoint(&report.params, &config.classifier_ckpt())
        .map_err(CliError::runtime)?;
    vocab
        .save(&config.classifier_vocab())
        .map_err(CliError::runtime)?;
    say!("checkpoint: {}", config.classifier_ckpt().display());

    if !split.test.is_empty() {
        let eval = pipeline::evaluate_classifier(
            &split.test,
            &vocab,
            &report.params,
            config.eval_sample_size,
            config.seed,
        )
        .map_err(CliError::runtime)?;
        if eval.clamped {
            eprintln!(
                "warning: eval sample {} clamped to test size {}",
                eval.requested, eval.evaluated
            );
        }
        say!(
            "test accuracy: {:.3} ({} documents)",
            eval.accuracy, eval.evaluated
        );
    }
    Ok(())
}

fn cmd_extract(config: &RunConfig, split_name: &str) -> CliResult<()> {
    let split = load_dataset(config)?;
    let docs = match split_name {
        "train" => &split.train,
        "test" => &split.test,
        other => {
            return Err(CliError::Invalid(format!(
                "unknown split {other:?} (expected train or test)"
            )))
        }
    };
    let (params, vocab) = load_classifier(config)?;
    let ext_cfg = config.extraction_config();
    let mut phrases: Vec<Phrase> = Vec::new();
    for doc in docs {
        let encoded = corpus::encode_document(doc, &vocab);
        let (_, attention) = params.forward(&encoded).map_err(CliError::runtime)?;
        let predicted = classifier::predict(&encoded, &params).map_err(CliError::runtime)?;
        phrases.extend(
            extractor::extract_phrases(doc, &attention, predicted, &ext_cfg)
                .map_err(CliError::runtime)?,
        );
    }
    let out_path = config.out_dir.join(format!("phrases-{split_name}.tsv"));
    let mut file = std::io::BufWriter::new(
        std::fs::File::create(&out_path).map_err(CliError::runtime)?,
    );
    extractor::write_phrase_dump(&phrases, &mut file).map_err(CliError::runtime)?;
    drop(file);
    say!("phrases: {}", phrases.len());
    let max_len = phrases.iter().map(Phrase::len).max().unwrap_or(0);
    for len in 1..=max_len {
        let count = phrases.iter().filter(|p| p.len() == len).count();
        if count > 0 {
            say!("len {len}: {count}");
        }
    }
    say!("dump: {}", out_path.display());
    Ok(())
}

fn read_phrase_dump(path: &Path) -> CliResult<Vec<Phrase>> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    extractor::parse_phrase_dump(&content).map_err(CliError::invalid)
}

fn cmd_train_autoencoder(config: &RunConfig, phrases_path: &Path) -> CliResult<()> {
    let phrases = read_phrase_dump(phrases_path)?;
    if phrases.is_empty() {
        return Err(CliError::Invalid(format!(
            "{}: phrase dump is empty",
            phrases_path.display()
        )));
    }
    let token_lists: Vec<Vec<String>> = phrases.iter().map(|p| p.tokens.clone()).collect();
    let vocab_docs: Vec<Document> = token_lists
        .iter()
        .enumerate()
        .map(|(i, tokens)| Document {
            sentences: vec![tokens.clone()],
            label: Sentiment::Positive,
            source_id: format!("phrase/{i}"),
        })
        .collect();
    let ae_vocab = corpus::build_vocabulary(&vocab_docs, 1, config.vocab_max_size);
    let pretrained = match &config.embeddings {
        Some(path) => Some(
            resources::load_embeddings(path, Some(config.ae_embedding_dim))
                .map_err(CliError::invalid)?,
        ),
        None => None,
    };
    say!(
        "echo training on {} phrases (vocabulary {})",
        token_lists.len(),
        ae_vocab.len()
    );
    let report = encoder_route::train_echo(
        &token_lists,
        &ae_vocab,
        &config.echo_config(),
        pretrained.as_ref(),
    )
    .map_err(CliError::runtime)?;
    for (epoch, loss) in report.epoch_losses.iter().enumerate() {
        say!("epoch {}: nll {loss:.6}", epoch + 1);
    }
    let stats = encoder_route::reconstruction_stats(
        &token_lists,
        &report.params,
        &ae_vocab,
        config.ae_max_decode_len,
    )
    .map_err(CliError::runtime)?;
    say!(
        "echo report: token accuracy {:.3}, exact match {:.3}",
        stats.token_accuracy, stats.exact_match_rate
    );
    encoder_route::save_checkpoint(&report.params, &config.autoencoder_ckpt())
        .map_err(CliError::runtime)?;
    ae_vocab
        .save(&config.autoencoder_vocab())
        .map_err(CliError::runtime)?;
    say!("checkpoint: {}", config.autoencoder_ckpt().display());
    Ok(())
}

fn cmd_build_store(config: &RunConfig, phrases_path: &Path) -> CliResult<()> {
    let phrases = read_phrase_dump(phrases_path)?;
    let (params, vocab) = load_autoencoder(config)?;
    let store = encoder_route::build_store(&phrases, &params, &vocab).map_err(CliError::runtime)?;
    encoder_route::save_store(&store, &config.store_path()).map_err(CliError::runtime)?;
    let (neg, pos) = store.label_counts();
    say!("store entries: {} (negative {neg}, positive {pos})", store.len());
    say!("store: {}", config.store_path().display());
    Ok(())
}

fn cmd_transform(config: &RunConfig, input: &Path, route_flag: Option<&str>) -> CliResult<()> {
    let route = match route_flag {
        Some(name) => Route::parse(name)
            .ok_or_else(|| CliError::Invalid(format!("unknown route {name:?}")))?,
        None => config.route,
    };
    let content = std::fs::read_to_string(input)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", input.display())))?;
    let mut docs = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let sentences = corpus::preprocess_text(line);
        if sentences.is_empty() {
            return Err(CliError::Invalid(format!(
                "{}: line {}: no tokens after preprocessing",
                input.display(),
                i + 1
            )));
        }
        docs.push(Document {
            sentences,
            // label is a placeholder; transformation uses the classifier verdict
            label: Sentiment::Negative,
            source_id: format!("line/{}", i + 1),
        });
    }

    let (cls_params, cls_vocab) = load_classifier(config)?;
    let memo = PolarityMemo::new();
    let (ae, lexres);
    let mut pipe = Pipeline {
        classifier: &cls_params,
        vocab: &cls_vocab,
        extraction: config.extraction_config(),
        encoder: None,
        wordvec: None,
    };
    match route {
        Route::Encoder => {
            let (params, vocab) = load_autoencoder(config)?;
            let store =
                encoder_route::load_store(&config.store_path()).map_err(CliError::invalid)?;
            ae = (params, vocab, store);
            pipe.encoder = Some(EncoderComponents {
                params: &ae.0,
                vocab: &ae.1,
                store: &ae.2,
                max_decode_len: config.ae_max_decode_len,
            });
        }
        Route::Wordvec => {
            let emb_path = config
                .embeddings
                .as_ref()
                .ok_or_else(|| CliError::Invalid("embeddings path is not configured".into()))?;
            let lex_path = config
                .lexicon
                .as_ref()
                .ok_or_else(|| CliError::Invalid("lexicon path is not configured".into()))?;
            let embeddings =
                resources::load_embeddings(emb_path, None).map_err(CliError::invalid)?;
            let lexicon = resources::load_lexicon(lex_path).map_err(CliError::invalid)?;
            lexres = (embeddings, lexicon);
            pipe.wordvec = Some(WordvecComponents {
                lexicon: &lexres.1,
                embeddings: &lexres.0,
                threshold: config.wordvec_threshold,
                memo: &memo,
            });
        }
    }

    let threads = thread_budget(docs.len());
    let outcomes = pipeline::parallel_map(&docs, threads, |doc| pipe.transform_document(doc, route));
    let mut results: Vec<TransformResult> = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        results.push(outcome.map_err(CliError::runtime)?);
    }

    let out_path = config.out_dir.join(format!("results-{}.jsonl", route.as_str()));
    let mut file = std::io::BufWriter::new(
        std::fs::File::create(&out_path).map_err(CliError::runtime)?,
    );
    pipeline::write_results(&results, &mut file).map_err(CliError::runtime)?;
    drop(file);
    let rate = pipeline::flip_rate(&results).map_err(CliError::runtime)?;
    say!("transformed {} lines via {}", results.len(), route.as_str());
    say!("flip rate: {rate:.3}");
    say!("results: {}", out_path.display());
    Ok(())
}

fn cmd_evaluate(
    config: &RunConfig,
    results_path: &Path,
    ae_buckets: bool,
    phrases_path: Option<&Path>,
) -> CliResult<()> {
    let content = std::fs::read_to_string(results_path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", results_path.display())))?;
    let results = pipeline::read_results(&content).map_err(CliError::invalid)?;
    if results.is_empty() {
        return Err(CliError::Invalid(format!(
            "{}: no results to evaluate",
            results_path.display()
        )));
    }
    let rate = pipeline::flip_rate(&results).map_err(CliError::invalid)?;
    say!("results: {}", results.len());
    say!("flip rate: {rate:.3}");

    if ae_buckets {
        let phrases_path = phrases_path.ok_or_else(|| {
            CliError::Invalid("--ae-buckets requires --phrases <dump>".into())
        })?;
        let phrases = read_phrase_dump(phrases_path)?;
        let (cls_params, cls_vocab) = load_classifier(config)?;
        let (ae_params, ae_vocab) = load_autoencoder(config)?;
        let store = encoder_route::load_store(&config.store_path()).map_err(CliError::invalid)?;
        let buckets = encoder_route::autoencoder_flip_experiment(
            &phrases,
            &ae_params,
            &ae_vocab,
            &store,
            &cls_params,
            &cls_vocab,
            &[0, 2, 5],
            config.ae_max_decode_len,
        )
        .map_err(CliError::runtime)?;
        for (min_len, rate) in buckets {
            match rate {
                Some(r) => say!("bucket len>{min_len}: {r:.3}"),
                None => say!("bucket len>{min_len}: undefined (empty)"),
            }
        }
    }
    Ok(())
}

fn read_results_file(path: &Path) -> CliResult<Vec<TransformResult>> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    pipeline::read_results(&content).map_err(CliError::invalid)
}

fn cmd_export_human_eval(
    config: &RunConfig,
    encoder_results: &Path,
    wordvec_results: &Path,
) -> CliResult<()> {
    let enc = read_results_file(encoder_results)?;
    let wv = read_results_file(wordvec_results)?;
    let out_path = config.out_dir.join("human_eval.csv");
    let mut buf = Vec::new();
    let rows = pipeline::export_human_eval(
        &enc,
        &wv,
        config.human_sample_size,
        config.human_reviewers,
        config.seed,
        &mut buf,
    )
    .map_err(CliError::invalid)?;
    std::fs::write(&out_path, buf).map_err(CliError::runtime)?;
    say!("rows: {rows}");
    say!("sheet: {}", out_path.display());
    Ok(())
}

fn cmd_aggregate_ratings(csv: &Path) -> CliResult<()> {
    let content = std::fs::read_to_string(csv)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", csv.display())))?;
    let summary = pipeline::aggregate_ratings(&content).map_err(CliError::invalid)?;
    let fmt = |v: Option<f64>| match v {
        Some(x) => format!("{x:.2}"),
        None => "-".to_string(),
    };
    say!("rated slots: {}", summary.rows);
    say!(
        "route encoder: correctness {}, sentiment change {}, unchanged {:.2}%",
        fmt(summary.encoder.mean_correctness),
        fmt(summary.encoder.mean_change),
        summary.encoder.unchanged_ratio * 100.0
    );
    say!(
        "route wordvec: correctness {}, sentiment change {}, unchanged {:.2}%",
        fmt(summary.wordvec.mean_correctness),
        fmt(summary.wordvec.mean_change),
        summary.wordvec.unchanged_ratio * 100.0
    );
    Ok(())
}
