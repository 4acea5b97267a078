//! Dataset ingestion and preprocessing.
//!
//! Two input formats are supported: the movie-review directory layout
//! `{train,test}/{pos,neg}/*.txt` and tab-separated phrase rows
//! `PhraseId<TAB>SentenceId<TAB>Phrase<TAB>Sentiment(0-4)` with a header.
//! Preprocessing splits sentences on `.`/`!`/`?` first, then lowercases,
//! deletes ASCII punctuation and tokenizes on whitespace.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Binary sentiment label. Probability pairs throughout the crate are
/// ordered (negative, positive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Negative,
    Positive,
}

impl Sentiment {
    pub fn opposite(self) -> Sentiment {
        match self {
            Sentiment::Negative => Sentiment::Positive,
            Sentiment::Positive => Sentiment::Negative,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Negative => "negative",
            Sentiment::Positive => "positive",
        }
    }

    pub fn parse(s: &str) -> Option<Sentiment> {
        match s {
            "negative" => Some(Sentiment::Negative),
            "positive" => Some(Sentiment::Positive),
            _ => None,
        }
    }

    /// Class index used for logits and file encodings: negative 0, positive 1.
    pub fn index(self) -> usize {
        match self {
            Sentiment::Negative => 0,
            Sentiment::Positive => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Sentiment> {
        match i {
            0 => Some(Sentiment::Negative),
            1 => Some(Sentiment::Positive),
            _ => None,
        }
    }
}

/// An unprocessed review as found on disk.
#[derive(Debug, Clone)]
pub struct RawReview {
    pub text: String,
    pub label: Sentiment,
    pub source_id: String,
}

impl RawReview {
    /// Preprocess into a [`Document`]. Fails when no sentence survives.
    pub fn into_document(self) -> Result<Document> {
        let sentences = preprocess_text(&self.text);
        if sentences.is_empty() {
            return Err(Error::domain(format!(
                "{}: no tokens after preprocessing",
                self.source_id
            )));
        }
        Ok(Document {
            sentences,
            label: self.label,
            source_id: self.source_id,
        })
    }
}

/// A tokenized review: ordered sentences of lowercase, punctuation-free
/// tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub sentences: Vec<Vec<String>>,
    pub label: Sentiment,
    pub source_id: String,
}

impl Document {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.len()).sum()
    }
}

/// Train/test lists plus a count of inputs dropped during ingestion.
#[derive(Debug, Clone, Default)]
pub struct DatasetSplit {
    pub train: Vec<Document>,
    pub test: Vec<Document>,
    pub skipped: usize,
}

impl DatasetSplit {
    /// (negative, positive) counts over the training list.
    pub fn train_counts(&self) -> (usize, usize) {
        class_counts(&self.train)
    }

    pub fn test_counts(&self) -> (usize, usize) {
        class_counts(&self.test)
    }
}

fn class_counts(docs: &[Document]) -> (usize, usize) {
    let pos = docs.iter().filter(|d| d.label == Sentiment::Positive).count();
    (docs.len() - pos, pos)
}

/// Split text into sentences on `.`/`!`/`?`, then lowercase each sentence,
/// replace every ASCII punctuation character with a space and tokenize on
/// whitespace. Empty sentences are dropped.
pub fn preprocess_text(raw: &str) -> Vec<Vec<String>> {
    raw.split(['.', '!', '?'])
        .map(|sentence| {
            sentence
                .to_lowercase()
                .chars()
                .map(|c| if c.is_ascii_punctuation() { ' ' } else { c })
                .collect::<String>()
                .split_whitespace()
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .filter(|tokens: &Vec<String>| !tokens.is_empty())
        .collect()
}

/// Load the review directory layout. The root must exist; a wholly absent
/// `train/` or `test/` directory yields an empty split, but a split missing
/// one of its `pos`/`neg` class directories is an error.
pub fn load_imdb(root: &Path) -> Result<DatasetSplit> {
    if !root.is_dir() {
        return Err(Error::Ingestion {
            path: root.to_path_buf(),
            message: "dataset root does not exist".into(),
        });
    }
    let mut split = DatasetSplit::default();
    for (split_name, bucket) in [("train", 0usize), ("test", 1usize)] {
        let split_dir = root.join(split_name);
        if !split_dir.is_dir() {
            continue;
        }
        let mut docs = Vec::new();
        for (class_name, label) in [("neg", Sentiment::Negative), ("pos", Sentiment::Positive)] {
            let class_dir = split_dir.join(class_name);
            if !class_dir.is_dir() {
                return Err(Error::Ingestion {
                    path: class_dir,
                    message: "class directory missing".into(),
                });
            }
            let mut names: Vec<PathBuf> = fs::read_dir(&class_dir)
                .map_err(|e| Error::Ingestion {
                    path: class_dir.clone(),
                    message: e.to_string(),
                })?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "txt"))
                .collect();
            names.sort();
            for path in names {
                let text = fs::read_to_string(&path).map_err(|e| Error::Ingestion {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                let file_name = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let raw = RawReview {
                    text,
                    label,
                    source_id: format!("{split_name}/{class_name}/{file_name}"),
                };
                match raw.into_document() {
                    Ok(doc) => docs.push(doc),
                    Err(_) => split.skipped += 1,
                }
            }
        }
        if bucket == 0 {
            split.train = docs;
        } else {
            split.test = docs;
        }
    }
    Ok(split)
}

/// Load tab-separated phrase rows. Only the first phrase of each sentence
/// group is kept (the full sentence); five-level labels collapse to binary:
/// 0 becomes negative, 4 becomes positive, 1-3 are discarded. Malformed rows
/// are skipped and counted.
pub fn load_rotten_tomatoes(file: &Path) -> Result<DatasetSplit> {
    let handle = fs::File::open(file).map_err(|e| Error::Ingestion {
        path: file.to_path_buf(),
        message: e.to_string(),
    })?;
    let reader = BufReader::new(handle);
    let mut split = DatasetSplit::default();
    let mut seen_sentences: HashMap<String, ()> = HashMap::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Ingestion {
            path: file.to_path_buf(),
            message: format!("line {}: {e}", line_no + 1),
        })?;
        if line_no == 0 || line.trim().is_empty() {
            continue; // header
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            split.skipped += 1;
            continue;
        }
        let (phrase_id, sentence_id, phrase, label_str) =
            (fields[0], fields[1], fields[2], fields[3]);
        let Ok(level) = label_str.trim().parse::<u8>() else {
            split.skipped += 1;
            continue;
        };
        if level > 4 {
            split.skipped += 1;
            continue;
        }
        if seen_sentences.insert(sentence_id.to_string(), ()).is_some() {
            continue; // sub-phrase of an already-seen sentence
        }
        let label = match level {
            0 => Sentiment::Negative,
            4 => Sentiment::Positive,
            _ => continue, // somewhat negative/positive: ignored
        };
        let raw = RawReview {
            text: phrase.to_string(),
            label,
            source_id: format!("rt/{phrase_id}"),
        };
        match raw.into_document() {
            Ok(doc) => split.train.push(doc),
            Err(_) => split.skipped += 1,
        }
    }
    Ok(split)
}

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const SOS: usize = 2;
pub const EOS: usize = 3;

pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";
pub const SOS_TOKEN: &str = "<sos>";
pub const EOS_TOKEN: &str = "<eos>";

/// Token/index bijection with the four special tokens at indices 0-3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_index: HashMap<String, usize>,
    index_to_token: Vec<String>,
    pub min_count: usize,
    pub max_size: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.index_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_to_token.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.token_to_index.get(token).copied()
    }

    /// Index of `token`, or UNK when absent.
    pub fn get_or_unk(&self, token: &str) -> usize {
        self.index_of(token).unwrap_or(UNK)
    }

    pub fn token(&self, index: usize) -> &str {
        &self.index_to_token[index]
    }

    pub fn tokens(&self) -> &[String] {
        &self.index_to_token
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(out, "{}\t{}", self.min_count, self.max_size)?;
        for token in &self.index_to_token {
            writeln!(out, "{token}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Vocabulary> {
        let content = fs::read_to_string(path)?;
        let mut lines = content.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format(format!("{}: empty vocabulary file", path.display())))?;
        let mut parts = header.split('\t');
        let min_count = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::format(format!("{}: bad header", path.display())))?;
        let max_size = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::format(format!("{}: bad header", path.display())))?;
        let index_to_token: Vec<String> = lines.map(str::to_string).collect();
        let specials = [PAD_TOKEN, UNK_TOKEN, SOS_TOKEN, EOS_TOKEN];
        if index_to_token.len() < specials.len()
            || specials
                .iter()
                .zip(&index_to_token)
                .any(|(want, got)| want != got)
        {
            return Err(Error::format(format!(
                "{}: special tokens missing from indices 0-3",
                path.display()
            )));
        }
        let token_to_index = index_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocabulary {
            token_to_index,
            index_to_token,
            min_count,
            max_size,
        })
    }
}

/// Build a vocabulary from documents: tokens with frequency >= `min_count`,
/// ordered by descending frequency (ties broken lexicographically), truncated
/// to `max_size` non-special entries, specials prepended.
pub fn build_vocabulary(docs: &[Document], min_count: usize, max_size: usize) -> Vocabulary {
    assert!(!docs.is_empty(), "build_vocabulary over empty document list");
    assert!(min_count >= 1 && max_size >= 1);
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        for sentence in &doc.sentences {
            for token in sentence {
                *freq.entry(token.as_str()).or_insert(0) += 1;
            }
        }
    }
    let mut entries: Vec<(&str, usize)> = freq
        .into_iter()
        .filter(|&(_, count)| count >= min_count)
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    entries.truncate(max_size);

    let mut index_to_token: Vec<String> = vec![
        PAD_TOKEN.to_string(),
        UNK_TOKEN.to_string(),
        SOS_TOKEN.to_string(),
        EOS_TOKEN.to_string(),
    ];
    index_to_token.extend(entries.iter().map(|(t, _)| t.to_string()));
    let token_to_index = index_to_token
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Vocabulary {
        token_to_index,
        index_to_token,
        min_count,
        max_size,
    }
}

/// Per-sentence index lists; out-of-vocabulary tokens map to UNK.
pub type EncodedDocument = Vec<Vec<usize>>;

pub fn encode_document(doc: &Document, vocab: &Vocabulary) -> EncodedDocument {
    doc.sentences
        .iter()
        .map(|sentence| sentence.iter().map(|t| vocab.get_or_unk(t)).collect())
        .collect()
}

/// Inverse of [`encode_document`] up to UNK: indices map back to tokens.
pub fn decode_indices(encoded: &EncodedDocument, vocab: &Vocabulary) -> Vec<Vec<String>> {
    encoded
        .iter()
        .map(|sentence| sentence.iter().map(|&i| vocab.token(i).to_string()).collect())
        .collect()
}

/// Draw a balanced, seeded subset: `per_class` documents of each label (or
/// as many as exist). Output order is shuffled deterministically.
pub fn subsample_balanced(docs: &[Document], per_class: usize, seed: u64) -> Vec<Document> {
    let mut rng = Rng::new(seed);
    let neg: Vec<usize> = (0..docs.len())
        .filter(|&i| docs[i].label == Sentiment::Negative)
        .collect();
    let pos: Vec<usize> = (0..docs.len())
        .filter(|&i| docs[i].label == Sentiment::Positive)
        .collect();
    let mut chosen = Vec::new();
    for class in [neg, pos] {
        let mut idx = class;
        rng.shuffle(&mut idx);
        idx.truncate(per_class);
        chosen.extend(idx);
    }
    rng.shuffle(&mut chosen);
    chosen.into_iter().map(|i| docs[i].clone()).collect()
}

/// Seeded split into (kept, held_out) where `held_out` gets
/// `round(fraction * n)` documents.
pub fn split_holdout(docs: &[Document], fraction: f64, seed: u64) -> (Vec<Document>, Vec<Document>) {
    assert!((0.0..1.0).contains(&fraction));
    let mut idx: Vec<usize> = (0..docs.len()).collect();
    let mut rng = Rng::new(seed);
    rng.shuffle(&mut idx);
    let held = ((docs.len() as f64) * fraction).round() as usize;
    let (held_idx, kept_idx) = idx.split_at(held.min(docs.len()));
    let mut kept: Vec<usize> = kept_idx.to_vec();
    let mut held_out: Vec<usize> = held_idx.to_vec();
    kept.sort_unstable();
    held_out.sort_unstable();
    (
        kept.into_iter().map(|i| docs[i].clone()).collect(),
        held_out.into_iter().map(|i| docs[i].clone()).collect(),
    )
}
