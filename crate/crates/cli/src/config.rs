//! Run configuration: a flat key=value file with flag overrides.
//!
//! Every run writes its effective configuration to
//! `<out>/effective_config.txt`; that file reparses to an equal RunConfig,
//! and reruns with identical config and seeds produce byte-identical
//! outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use polarity_pipe::classifier::TrainConfig;
use polarity_pipe::encoder_route::EchoConfig;
use polarity_pipe::extractor::ExtractionConfig;
use polarity_pipe::pipeline::Route;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: String, // "imdb" | "rotten"
    pub imdb_root: Option<PathBuf>,
    pub rotten_tomatoes: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,

    pub cls_embedding_dim: usize,
    pub cls_hidden: usize,
    pub cls_attn_dim: usize,
    pub cls_batch_size: usize,
    pub cls_learning_rate: f64,
    pub cls_epochs: usize,
    pub cls_clip_norm: f64,
    pub cls_holdout_fraction: f64,

    pub vocab_min_count: usize,
    pub vocab_max_size: usize,

    pub ae_embedding_dim: usize,
    pub ae_hidden: usize,
    pub ae_learning_rate: f64,
    pub ae_epochs: usize,
    pub ae_clip_norm: f64,
    pub ae_max_decode_len: usize,

    pub tau: f64,
    pub max_gap: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub use_sentence_gate: bool,

    pub wordvec_threshold: f64,
    pub route: Route,

    pub eval_sample_size: usize,
    pub human_sample_size: usize,
    pub human_reviewers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: "imdb".into(),
            imdb_root: None,
            rotten_tomatoes: None,
            embeddings: None,
            lexicon: None,
            out_dir: PathBuf::from("out"),
            seed: 42,
            cls_embedding_dim: 300,
            cls_hidden: 150,
            cls_attn_dim: 50,
            cls_batch_size: 256,
            cls_learning_rate: 1e-3,
            cls_epochs: 4,
            cls_clip_norm: 5.0,
            cls_holdout_fraction: 0.1,
            vocab_min_count: 2,
            vocab_max_size: 20_000,
            ae_embedding_dim: 100,
            ae_hidden: 250,
            ae_learning_rate: 0.01,
            ae_epochs: 30,
            ae_clip_norm: 5.0,
            ae_max_decode_len: 20,
            tau: 1.5,
            max_gap: 1,
            min_len: 1,
            max_len: 12,
            use_sentence_gate: false,
            wordvec_threshold: 0.65,
            route: Route::Encoder,
            eval_sample_size: 2000,
            human_sample_size: 15,
            human_reviewers: 4,
        }
    }
}

pub fn parse_file(path: &Path) -> Result<RunConfig, String> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_str(&content).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_str(content: &str) -> Result<RunConfig, String> {
    let mut config = RunConfig::default();
    for (line_no, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected key = value", line_no + 1));
        };
        apply_key(&mut config, key.trim(), value.trim())
            .map_err(|e| format!("line {}: {e}", line_no + 1))?;
    }
    Ok(config)
}

fn apply_key(config: &mut RunConfig, key: &str, value: &str) -> Result<(), String> {
    fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
        value
            .parse()
            .map_err(|_| format!("bad value for {key}: {value:?}"))
    }
    match key {
        "dataset" => {
            if value != "imdb" && value != "rotten" {
                return Err(format!("dataset must be imdb or rotten, found {value:?}"));
            }
            config.dataset = value.to_string();
        }
        "imdb_root" => config.imdb_root = Some(PathBuf::from(value)),
        "rotten_tomatoes" => config.rotten_tomatoes = Some(PathBuf::from(value)),
        "embeddings" => config.embeddings = Some(PathBuf::from(value)),
        "lexicon" => config.lexicon = Some(PathBuf::from(value)),
        "out_dir" => config.out_dir = PathBuf::from(value),
        "seed" => config.seed = parse(key, value)?,
        "cls_embedding_dim" => config.cls_embedding_dim = parse(key, value)?,
        "cls_hidden" => config.cls_hidden = parse(key, value)?,
        "cls_attn_dim" => config.cls_attn_dim = parse(key, value)?,
        "cls_batch_size" => config.cls_batch_size = parse(key, value)?,
        "cls_learning_rate" => config.cls_learning_rate = parse(key, value)?,
        "cls_epochs" => config.cls_epochs = parse(key, value)?,
        "cls_clip_norm" => config.cls_clip_norm = parse(key, value)?,
        "cls_holdout_fraction" => config.cls_holdout_fraction = parse(key, value)?,
        "vocab_min_count" => config.vocab_min_count = parse(key, value)?,
        "vocab_max_size" => config.vocab_max_size = parse(key, value)?,
        "ae_embedding_dim" => config.ae_embedding_dim = parse(key, value)?,
        "ae_hidden" => config.ae_hidden = parse(key, value)?,
        "ae_learning_rate" => config.ae_learning_rate = parse(key, value)?,
        "ae_epochs" => config.ae_epochs = parse(key, value)?,
        "ae_clip_norm" => config.ae_clip_norm = parse(key, value)?,
        "ae_max_decode_len" => config.ae_max_decode_len = parse(key, value)?,
        "tau" => config.tau = parse(key, value)?,
        "max_gap" => config.max_gap = parse(key, value)?,
        "min_len" => config.min_len = parse(key, value)?,
        "max_len" => config.max_len = parse(key, value)?,
        "use_sentence_gate" => config.use_sentence_gate = parse(key, value)?,
        "wordvec_threshold" => config.wordvec_threshold = parse(key, value)?,
        "route" => {
            config.route = Route::parse(value)
                .ok_or_else(|| format!("route must be encoder or wordvec, found {value:?}"))?;
        }
        "eval_sample_size" => config.eval_sample_size = parse(key, value)?,
        "human_sample_size" => config.human_sample_size = parse(key, value)?,
        "human_reviewers" => config.human_reviewers = parse(key, value)?,
        other => return Err(format!("unknown key {other:?}")),
    }
    Ok(())
}

/// Serialize in fixed key order; `parse_str(render(c)) == c`.
pub fn render(config: &RunConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("dataset", config.dataset.clone());
    if let Some(p) = &config.imdb_root {
        kv("imdb_root", p.display().to_string());
    }
    if let Some(p) = &config.rotten_tomatoes {
        kv("rotten_tomatoes", p.display().to_string());
    }
    if let Some(p) = &config.embeddings {
        kv("embeddings", p.display().to_string());
    }
    if let Some(p) = &config.lexicon {
        kv("lexicon", p.display().to_string());
    }
    kv("out_dir", config.out_dir.display().to_string());
    kv("seed", config.seed.to_string());
    kv("cls_embedding_dim", config.cls_embedding_dim.to_string());
    kv("cls_hidden", config.cls_hidden.to_string());
    kv("cls_attn_dim", config.cls_attn_dim.to_string());
    kv("cls_batch_size", config.cls_batch_size.to_string());
    kv("cls_learning_rate", format!("{}", config.cls_learning_rate));
    kv("cls_epochs", config.cls_epochs.to_string());
    kv("cls_clip_norm", format!("{}", config.cls_clip_norm));
    kv(
        "cls_holdout_fraction",
        format!("{}", config.cls_holdout_fraction),
    );
    kv("vocab_min_count", config.vocab_min_count.to_string());
    kv("vocab_max_size", config.vocab_max_size.to_string());
    kv("ae_embedding_dim", config.ae_embedding_dim.to_string());
    kv("ae_hidden", config.ae_hidden.to_string());
    kv("ae_learning_rate", format!("{}", config.ae_learning_rate));
    kv("ae_epochs", config.ae_epochs.to_string());
    kv("ae_clip_norm", format!("{}", config.ae_clip_norm));
    kv("ae_max_decode_len", config.ae_max_decode_len.to_string());
    kv("tau", format!("{}", config.tau));
    kv("max_gap", config.max_gap.to_string());
    kv("min_len", config.min_len.to_string());
    kv("max_len", config.max_len.to_string());
    kv("use_sentence_gate", config.use_sentence_gate.to_string());
    kv("wordvec_threshold", format!("{}", config.wordvec_threshold));
    kv("route", config.route.as_str().to_string());
    kv("eval_sample_size", config.eval_sample_size.to_string());
    kv("human_sample_size", config.human_sample_size.to_string());
    kv("human_reviewers", config.human_reviewers.to_string());
    out
}

/// Numeric sanity checks shared by every command.
pub fn validate(config: &RunConfig) -> Result<(), String> {
    if config.cls_epochs == 0 || config.ae_epochs == 0 {
        return Err("epochs must be >= 1".into());
    }
    if config.cls_batch_size == 0 {
        return Err("cls_batch_size must be >= 1".into());
    }
    if config.cls_embedding_dim == 0
        || config.cls_hidden == 0
        || config.cls_attn_dim == 0
        || config.ae_embedding_dim == 0
        || config.ae_hidden == 0
    {
        return Err("model dimensions must be >= 1".into());
    }
    if config.cls_learning_rate <= 0.0 || config.ae_learning_rate <= 0.0 {
        return Err("learning rates must be positive".into());
    }
    if !(0.0..1.0).contains(&config.cls_holdout_fraction) {
        return Err("cls_holdout_fraction must be in [0, 1)".into());
    }
    if config.vocab_min_count == 0 || config.vocab_max_size == 0 {
        return Err("vocabulary bounds must be >= 1".into());
    }
    if config.tau <= 0.0 {
        return Err("tau must be positive".into());
    }
    if config.min_len < 1 || config.max_len < config.min_len {
        return Err("require 1 <= min_len <= max_len".into());
    }
    if !(config.wordvec_threshold > 0.5 && config.wordvec_threshold <= 1.0) {
        return Err("wordvec_threshold must be in (0.5, 1]".into());
    }
    if config.human_reviewers == 0 {
        return Err("human_reviewers must be >= 1".into());
    }
    Ok(())
}

impl RunConfig {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            embedding_dim: self.cls_embedding_dim,
            hidden: self.cls_hidden,
            attn_dim: self.cls_attn_dim,
            batch_size: self.cls_batch_size,
            learning_rate: self.cls_learning_rate,
            epochs: self.cls_epochs,
            seed: self.seed,
            clip_norm: self.cls_clip_norm,
            holdout_fraction: self.cls_holdout_fraction,
        }
    }

    pub fn echo_config(&self) -> EchoConfig {
        EchoConfig {
            embedding_dim: self.ae_embedding_dim,
            hidden: self.ae_hidden,
            learning_rate: self.ae_learning_rate,
            epochs: self.ae_epochs,
            seed: self.seed,
            clip_norm: self.ae_clip_norm,
        }
    }

    pub fn extraction_config(&self) -> ExtractionConfig {
        ExtractionConfig {
            tau: self.tau,
            max_gap: self.max_gap,
            min_len: self.min_len,
            max_len: self.max_len,
            use_sentence_gate: self.use_sentence_gate,
        }
    }

    pub fn classifier_ckpt(&self) -> PathBuf {
        self.out_dir.join("classifier.ckpt")
    }

    pub fn classifier_vocab(&self) -> PathBuf {
        self.out_dir.join("classifier.vocab")
    }

    pub fn autoencoder_ckpt(&self) -> PathBuf {
        self.out_dir.join("autoencoder.ckpt")
    }

    pub fn autoencoder_vocab(&self) -> PathBuf {
        self.out_dir.join("autoencoder.vocab")
    }

    pub fn store_path(&self) -> PathBuf {
        self.out_dir.join("store.bin")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_render_and_round_trip() {
        let config = RunConfig::default();
        let text = render(&config);
        let parsed = parse_str(&text).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn round_trip_with_paths_and_overrides() {
        let config = RunConfig {
            imdb_root: Some(PathBuf::from("/data/imdb")),
            embeddings: Some(PathBuf::from("emb.txt")),
            seed: 7,
            tau: 0.8,
            route: Route::Wordvec,
            ..RunConfig::default()
        };
        let parsed = parse_str(&render(&config)).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(parse_str("no_such_key = 1\n").is_err());
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(parse_str("seed = banana\n").is_err());
        assert!(parse_str("route = sideways\n").is_err());
        assert!(parse_str("dataset = csv\n").is_err());
    }

    #[test]
    fn validation_catches_out_of_range() {
        let bad = [
            RunConfig {
                wordvec_threshold: 0.4,
                ..RunConfig::default()
            },
            RunConfig {
                tau: 0.0,
                ..RunConfig::default()
            },
            RunConfig {
                cls_epochs: 0,
                ..RunConfig::default()
            },
        ];
        for config in &bad {
            assert!(validate(config).is_err());
        }
        assert!(validate(&RunConfig::default()).is_ok());
    }
}
