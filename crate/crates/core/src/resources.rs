//! Pretrained word embeddings and the polarity lexicon.
//!
//! Embedding files hold one entry per line: the word followed by
//! space-separated decimal components. Lexicon files hold tab-separated
//! `word<TAB>affect<TAB>flag` triples; only the `positive` and `negative`
//! affects with flag 1 feed the polarity lists.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Fixed-dimension word vector table.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub dimension: usize,
    vectors: HashMap<String, Vec<f32>>,
    /// Later duplicates of an already-loaded word, ignored during load.
    pub duplicates_ignored: usize,
}

impl EmbeddingTable {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.vectors.get(word).map(|v| v.as_slice())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vectors.contains_key(word)
    }

    /// Build from in-memory pairs (fixtures, tests).
    pub fn from_pairs(dimension: usize, pairs: impl IntoIterator<Item = (String, Vec<f32>)>) -> Self {
        let mut vectors = HashMap::new();
        for (word, vec) in pairs {
            assert_eq!(vec.len(), dimension, "vector dimension mismatch");
            vectors.entry(word).or_insert(vec);
        }
        EmbeddingTable {
            dimension,
            vectors,
            duplicates_ignored: 0,
        }
    }
}

/// Load an embedding table. The dimension is inferred from the first line
/// unless `expected_dimension` pins it; any line with a different component
/// count is a format error naming the line.
pub fn load_embeddings(path: &Path, expected_dimension: Option<usize>) -> Result<EmbeddingTable> {
    let content = fs::read_to_string(path)?;
    let mut vectors: HashMap<String, Vec<f32>> = HashMap::new();
    let mut dimension: Option<usize> = expected_dimension;
    let mut duplicates_ignored = 0usize;
    for (line_no, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let word = parts.next().unwrap_or_default();
        if word.is_empty() {
            return Err(Error::format(format!(
                "{}: line {}: missing word",
                path.display(),
                line_no + 1
            )));
        }
        let mut vec = Vec::new();
        for component in parts {
            let value: f32 = component.parse().map_err(|_| {
                Error::format(format!(
                    "{}: line {}: bad component {component:?}",
                    path.display(),
                    line_no + 1
                ))
            })?;
            vec.push(value);
        }
        match dimension {
            None => {
                if vec.is_empty() {
                    return Err(Error::format(format!(
                        "{}: line {}: no vector components",
                        path.display(),
                        line_no + 1
                    )));
                }
                dimension = Some(vec.len());
            }
            Some(d) => {
                if vec.len() != d {
                    return Err(Error::format(format!(
                        "{}: line {}: expected {d} components, found {}",
                        path.display(),
                        line_no + 1,
                        vec.len()
                    )));
                }
            }
        }
        if vectors.contains_key(word) {
            duplicates_ignored += 1;
        } else {
            vectors.insert(word.to_string(), vec);
        }
    }
    let dimension = dimension.filter(|_| !vectors.is_empty()).ok_or_else(|| {
        Error::format(format!("{}: empty embedding file", path.display()))
    })?;
    Ok(EmbeddingTable {
        dimension,
        vectors,
        duplicates_ignored,
    })
}

/// dot(x, y) / (|x| * |y|), accumulated in f64. Errors on dimension
/// mismatch or a zero-norm argument.
pub fn cosine_similarity(x: &[f32], y: &[f32]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::domain(format!(
            "cosine: dimension mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let mut dot = 0.0f64;
    let mut nx = 0.0f64;
    let mut ny = 0.0f64;
    for (&a, &b) in x.iter().zip(y) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        nx += a * a;
        ny += b * b;
    }
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::domain("cosine: zero-norm argument"));
    }
    Ok(dot / (nx.sqrt() * ny.sqrt()))
}

/// The candidate with maximal cosine similarity to `query`. Candidates
/// missing from the table (or with a zero vector) are skipped; ties break
/// toward the lexicographically smallest word. Errors when no candidate is
/// embeddable.
pub fn nearest_in_set<'a>(
    query: &[f32],
    candidates: impl IntoIterator<Item = &'a str>,
    table: &EmbeddingTable,
) -> Result<String> {
    let mut sorted: Vec<&str> = candidates.into_iter().collect();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best: Option<(f64, &str)> = None;
    for word in sorted {
        let Some(vector) = table.get(word) else {
            continue;
        };
        let Ok(sim) = cosine_similarity(query, vector) else {
            continue; // zero vector or dimension mismatch: not a candidate
        };
        // strictly greater keeps the lexicographically smallest on ties
        if best.is_none_or(|(b, _)| sim > b) {
            best = Some((sim, word));
        }
    }
    best.map(|(_, w)| w.to_string())
        .ok_or_else(|| Error::retrieval("no embeddable candidate in set"))
}

/// Positive and negative word lists extracted from the emotion lexicon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconLists {
    pub positive_words: BTreeSet<String>,
    pub negative_words: BTreeSet<String>,
    /// Malformed rows skipped during load.
    pub skipped_rows: usize,
}

impl LexiconLists {
    pub fn list_for(&self, sentiment: crate::corpus::Sentiment) -> &BTreeSet<String> {
        match sentiment {
            crate::corpus::Sentiment::Positive => &self.positive_words,
            crate::corpus::Sentiment::Negative => &self.negative_words,
        }
    }
}

/// Parse `word<TAB>affect<TAB>flag` rows. A word joins the positive list when
/// flagged 1 under the `positive` affect, the negative list analogously;
/// all other affect rows are ignored. Malformed rows are skipped and
/// counted; a file yielding zero parsed rows is a format error.
pub fn load_lexicon(path: &Path) -> Result<LexiconLists> {
    let content = fs::read_to_string(path)?;
    let mut positive_words = BTreeSet::new();
    let mut negative_words = BTreeSet::new();
    let mut skipped_rows = 0usize;
    let mut parsed_rows = 0usize;
    for line in content.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            skipped_rows += 1;
            continue;
        }
        let flag = match fields[2].trim() {
            "0" => false,
            "1" => true,
            _ => {
                skipped_rows += 1;
                continue;
            }
        };
        parsed_rows += 1;
        if !flag {
            continue;
        }
        let word = fields[0].trim().to_lowercase();
        match fields[1].trim() {
            "positive" => {
                positive_words.insert(word);
            }
            "negative" => {
                negative_words.insert(word);
            }
            _ => {} // other affects: ignored
        }
    }
    if parsed_rows == 0 {
        return Err(Error::format(format!(
            "{}: no lexicon rows parsed",
            path.display()
        )));
    }
    Ok(LexiconLists {
        positive_words,
        negative_words,
        skipped_rows,
    })
}
