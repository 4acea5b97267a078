//! Word-vector transformation route.
//!
//! Words inside an extracted phrase whose single-word classifier posterior
//! crosses the selection threshold are replaced by the embedding-space
//! nearest word of the opposite polarity list.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::classifier::ClassifierParams;
use crate::corpus::{Sentiment, Vocabulary};
use crate::error::Result;
use crate::extractor::Phrase;
use crate::resources::{nearest_in_set, EmbeddingTable, LexiconLists};

/// Class posterior for a single word.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarityScore {
    pub word: String,
    pub p_negative: f64,
    pub p_positive: f64,
}

impl PolarityScore {
    pub fn dominant(&self) -> f64 {
        self.p_negative.max(self.p_positive)
    }
}

/// Memo table for per-word classifier posteriors, keyed by vocabulary index
/// so out-of-vocabulary words share the UNK score. Guarded for concurrent
/// use over a frozen classifier.
#[derive(Debug, Default)]
pub struct PolarityMemo {
    scores: Mutex<HashMap<usize, (f64, f64)>>,
}

impl PolarityMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.scores.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Classifier posterior for the single-word, single-sentence document
/// containing `word`. Memoized per vocabulary index.
pub fn word_polarity(
    word: &str,
    params: &ClassifierParams,
    vocab: &Vocabulary,
    memo: &PolarityMemo,
) -> Result<PolarityScore> {
    let index = vocab.get_or_unk(word);
    if let Some(&(p_neg, p_pos)) = memo.scores.lock().unwrap().get(&index) {
        return Ok(PolarityScore {
            word: word.to_string(),
            p_negative: p_neg,
            p_positive: p_pos,
        });
    }
    let (probs, _) = params.forward(&vec![vec![index]])?;
    memo.scores
        .lock()
        .unwrap()
        .insert(index, (probs[0], probs[1]));
    Ok(PolarityScore {
        word: word.to_string(),
        p_negative: probs[0],
        p_positive: probs[1],
    })
}

/// Positions whose word's dominant class probability strictly exceeds the
/// threshold. `threshold` must lie in (0.5, 1].
pub fn select_words(
    phrase: &Phrase,
    params: &ClassifierParams,
    vocab: &Vocabulary,
    memo: &PolarityMemo,
    threshold: f64,
) -> Result<Vec<usize>> {
    assert!(
        threshold > 0.5 && threshold <= 1.0,
        "selection threshold must be in (0.5, 1]"
    );
    let mut selected = Vec::new();
    for (position, word) in phrase.tokens.iter().enumerate() {
        let score = word_polarity(word, params, vocab, memo)?;
        if score.dominant() > threshold {
            selected.push(position);
        }
    }
    Ok(selected)
}

/// Why a selected word was left unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// The word has no embedding vector.
    NoEmbedding,
    /// No opposite-list candidate was embeddable.
    NoCandidate,
}

/// Replacement decisions for one phrase. Positions not listed in either
/// vector are untouched.
#[derive(Debug, Clone, Default)]
pub struct ReplacementPlan {
    pub replacements: Vec<(usize, String, String)>,
    pub skipped: Vec<(usize, String, SkipReason)>,
}

/// The opposite-polarity word nearest to `word` in embedding space. The
/// word itself is excluded from the candidate set; a word without an
/// embedding, or an empty effective candidate set, leaves the word
/// unchanged with the reason reported.
pub fn replace_word(
    word: &str,
    source_sentiment: Sentiment,
    lexicon: &LexiconLists,
    embeddings: &EmbeddingTable,
) -> std::result::Result<String, SkipReason> {
    let Some(query) = embeddings.get(word) else {
        return Err(SkipReason::NoEmbedding);
    };
    let opposite = lexicon.list_for(source_sentiment.opposite());
    let candidates = opposite
        .iter()
        .map(String::as_str)
        .filter(|&w| w != word);
    nearest_in_set(query, candidates, embeddings).map_err(|_| SkipReason::NoCandidate)
}

/// Decide the replacements for a phrase without applying them.
pub fn plan_replacements(
    phrase: &Phrase,
    params: &ClassifierParams,
    vocab: &Vocabulary,
    memo: &PolarityMemo,
    lexicon: &LexiconLists,
    embeddings: &EmbeddingTable,
    threshold: f64,
) -> Result<ReplacementPlan> {
    let mut plan = ReplacementPlan::default();
    for position in select_words(phrase, params, vocab, memo, threshold)? {
        let word = &phrase.tokens[position];
        match replace_word(word, phrase.source_sentiment, lexicon, embeddings) {
            Ok(replacement) => plan.replacements.push((position, word.clone(), replacement)),
            Err(reason) => plan.skipped.push((position, word.clone(), reason)),
        }
    }
    Ok(plan)
}

/// Apply the word-vector route to one phrase. The output has exactly the
/// input's token count; unselected positions are byte-identical.
#[allow(clippy::too_many_arguments)]
pub fn transform_phrase_wordvec(
    phrase: &Phrase,
    params: &ClassifierParams,
    vocab: &Vocabulary,
    memo: &PolarityMemo,
    lexicon: &LexiconLists,
    embeddings: &EmbeddingTable,
    threshold: f64,
) -> Result<Vec<String>> {
    let plan = plan_replacements(phrase, params, vocab, memo, lexicon, embeddings, threshold)?;
    let mut tokens = phrase.tokens.clone();
    for (position, _, replacement) in &plan.replacements {
        tokens[*position] = replacement.clone();
    }
    Ok(tokens)
}
