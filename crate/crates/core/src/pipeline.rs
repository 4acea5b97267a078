//! End-to-end orchestration and evaluation.
//!
//! A document is classified, its high-attention phrases are extracted and
//! transformed by the chosen route, the new token lists are spliced over
//! their source spans, and the reconstruction is re-classified. The flip
//! rate over many documents is the headline metric; human-evaluation export
//! and aggregation cover the rating study format.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::classifier::{predict, ClassifierParams};
use crate::corpus::{encode_document, Document, Sentiment, Vocabulary};
use crate::encoder_route::{transform_phrase_encoder, AutoencoderParams, LatentStore};
use crate::error::{Error, Result};
use crate::extractor::{extract_phrases, ExtractionConfig, Phrase};
use crate::resources::{EmbeddingTable, LexiconLists};
use crate::rng::Rng;
use crate::wordvec_route::{transform_phrase_wordvec, PolarityMemo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Encoder,
    Wordvec,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Encoder => "encoder",
            Route::Wordvec => "wordvec",
        }
    }

    pub fn parse(s: &str) -> Option<Route> {
        match s {
            "encoder" => Some(Route::Encoder),
            "wordvec" => Some(Route::Wordvec),
            _ => None,
        }
    }
}

/// One spliced span: tokens [start, end) of sentence `sentence_index`
/// replaced by `inserted`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replacement {
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
    pub original: Vec<String>,
    pub inserted: Vec<String>,
}

/// Full record of one document transformation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformResult {
    pub source_id: String,
    pub route: Route,
    pub original: Vec<Vec<String>>,
    pub replacements: Vec<Replacement>,
    pub reconstructed: Vec<Vec<String>>,
    pub sentiment_before: Sentiment,
    pub sentiment_after: Sentiment,
    pub changed: bool,
}

/// Borrowed components for the encoder route.
pub struct EncoderComponents<'a> {
    pub params: &'a AutoencoderParams,
    pub vocab: &'a Vocabulary,
    pub store: &'a LatentStore,
    pub max_decode_len: usize,
}

/// Borrowed components for the word-vector route.
pub struct WordvecComponents<'a> {
    pub lexicon: &'a LexiconLists,
    pub embeddings: &'a EmbeddingTable,
    pub threshold: f64,
    pub memo: &'a PolarityMemo,
}

/// Everything a transformation needs, with routes attached as available.
pub struct Pipeline<'a> {
    pub classifier: &'a ClassifierParams,
    pub vocab: &'a Vocabulary,
    pub extraction: ExtractionConfig,
    pub encoder: Option<EncoderComponents<'a>>,
    pub wordvec: Option<WordvecComponents<'a>>,
}

impl Pipeline<'_> {
    /// classify, extract, transform each phrase, splice, re-classify.
    pub fn transform_document(&self, doc: &Document, route: Route) -> Result<TransformResult> {
        let encoded = encode_document(doc, self.vocab);
        let (_, attention) = self.classifier.forward(&encoded)?;
        let before = predict(&encoded, self.classifier)?;
        let phrases = extract_phrases(doc, &attention, before, &self.extraction)?;

        let mut replacements = Vec::with_capacity(phrases.len());
        for phrase in &phrases {
            let inserted = self.transform_phrase(phrase, route)?;
            replacements.push(Replacement {
                sentence_index: phrase.sentence_index,
                start: phrase.start,
                end: phrase.end,
                original: phrase.tokens.clone(),
                inserted,
            });
        }
        let reconstructed = splice_sentences(&doc.sentences, &replacements)?;
        let re_encoded: Vec<Vec<usize>> = reconstructed
            .iter()
            .map(|s| s.iter().map(|t| self.vocab.get_or_unk(t)).collect())
            .collect();
        let after = predict(&re_encoded, self.classifier)?;
        Ok(TransformResult {
            source_id: doc.source_id.clone(),
            route,
            original: doc.sentences.clone(),
            replacements,
            reconstructed,
            sentiment_before: before,
            sentiment_after: after,
            changed: before != after,
        })
    }

    fn transform_phrase(&self, phrase: &Phrase, route: Route) -> Result<Vec<String>> {
        match route {
            Route::Encoder => {
                let c = self
                    .encoder
                    .as_ref()
                    .ok_or_else(|| Error::domain("encoder route components not loaded"))?;
                transform_phrase_encoder(phrase, c.params, c.vocab, c.store, c.max_decode_len)
            }
            Route::Wordvec => {
                let c = self
                    .wordvec
                    .as_ref()
                    .ok_or_else(|| Error::domain("wordvec route components not loaded"))?;
                transform_phrase_wordvec(
                    phrase,
                    self.classifier,
                    self.vocab,
                    c.memo,
                    c.lexicon,
                    c.embeddings,
                    c.threshold,
                )
            }
        }
    }
}

/// Apply replacements to sentences. Spans within a sentence are spliced
/// right to left so earlier indices stay valid; overlapping spans are
/// rejected.
pub fn splice_sentences(
    original: &[Vec<String>],
    replacements: &[Replacement],
) -> Result<Vec<Vec<String>>> {
    let mut result: Vec<Vec<String>> = original.to_vec();
    let mut by_sentence: Vec<Vec<&Replacement>> = vec![Vec::new(); original.len()];
    for r in replacements {
        if r.sentence_index >= original.len() {
            return Err(Error::domain(format!(
                "replacement sentence index {} out of range",
                r.sentence_index
            )));
        }
        if r.end <= r.start || r.end > original[r.sentence_index].len() {
            return Err(Error::domain(format!(
                "replacement span {}..{} out of range",
                r.start, r.end
            )));
        }
        by_sentence[r.sentence_index].push(r);
    }
    for (sentence, spans) in result.iter_mut().zip(by_sentence.iter_mut()) {
        spans.sort_by_key(|r| r.start);
        for pair in spans.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(Error::domain("overlapping replacement spans"));
            }
        }
        for r in spans.iter().rev() {
            sentence.splice(r.start..r.end, r.inserted.iter().cloned());
        }
    }
    Ok(result)
}

/// Fraction of results whose sentiment changed.
pub fn flip_rate(results: &[TransformResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::domain("flip_rate over empty results"));
    }
    let changed = results.iter().filter(|r| r.changed).count();
    Ok(changed as f64 / results.len() as f64)
}

/// Write results as JSON lines.
pub fn write_results(results: &[TransformResult], out: &mut impl Write) -> Result<()> {
    for r in results {
        let line = serde_json::to_string(r)
            .map_err(|e| Error::format(format!("serialize result: {e}")))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Parse JSON-line results; errors carry the 1-based line number.
pub fn read_results(content: &str) -> Result<Vec<TransformResult>> {
    let mut results = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: TransformResult = serde_json::from_str(line).map_err(|e| Error::Validation {
            row: line_no + 1,
            message: e.to_string(),
        })?;
        results.push(r);
    }
    Ok(results)
}

pub const HUMAN_EVAL_HEADER: &str = "item_id,reviewer_id,original,encoder_output,wordvec_output,enc_correctness,enc_change,enc_unchanged,wv_correctness,wv_change,wv_unchanged";

/// One rating slot of the study: an item shown to one reviewer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HumanEvalRow {
    pub item_id: String,
    pub reviewer_id: usize,
    pub original: String,
    pub encoder_output: String,
    pub wordvec_output: String,
    pub enc_correctness: Option<u8>,
    pub enc_change: Option<u8>,
    pub enc_unchanged: bool,
    pub wv_correctness: Option<u8>,
    pub wv_change: Option<u8>,
    pub wv_unchanged: bool,
}

fn join_tokens(sentences: &[Vec<String>]) -> String {
    sentences
        .iter()
        .map(|s| s.join(" "))
        .collect::<Vec<_>>()
        .join(" ")
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Export a seeded sample of paired results as a blank rating sheet: one row
/// per (item, reviewer). Returns the number of data rows written. Both
/// result lists must cover exactly the same items.
pub fn export_human_eval(
    encoder_results: &[TransformResult],
    wordvec_results: &[TransformResult],
    sample_size: usize,
    reviewers: usize,
    seed: u64,
    out: &mut impl Write,
) -> Result<usize> {
    let mut by_id: std::collections::HashMap<&str, &TransformResult> = Default::default();
    for r in wordvec_results {
        by_id.insert(r.source_id.as_str(), r);
    }
    if wordvec_results.len() != encoder_results.len() {
        return Err(Error::domain(format!(
            "unpaired items: {} encoder results vs {} wordvec results",
            encoder_results.len(),
            wordvec_results.len()
        )));
    }
    let mut paired = Vec::with_capacity(encoder_results.len());
    for enc in encoder_results {
        let wv = by_id.remove(enc.source_id.as_str()).ok_or_else(|| {
            Error::domain(format!("unpaired item {} (encoder only)", enc.source_id))
        })?;
        paired.push((enc, wv));
    }

    let mut rng = Rng::new(seed);
    let chosen = rng.sample_indices(paired.len(), sample_size);

    writeln!(out, "{HUMAN_EVAL_HEADER}")?;
    let mut rows = 0usize;
    for &item in &chosen {
        let (enc, wv) = paired[item];
        for reviewer in 1..=reviewers {
            writeln!(
                out,
                "{},{},{},{},{},,,,,,",
                csv_escape(&enc.source_id),
                reviewer,
                csv_escape(&join_tokens(&enc.original)),
                csv_escape(&join_tokens(&enc.reconstructed)),
                csv_escape(&join_tokens(&wv.reconstructed)),
            )?;
            rows += 1;
        }
    }
    Ok(rows)
}

/// Per-route aggregate of a filled rating sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteRatings {
    /// Mean over rows not flagged unchanged; `None` when every row was
    /// flagged.
    pub mean_correctness: Option<f64>,
    pub mean_change: Option<f64>,
    /// flagged rows / total rated slots
    pub unchanged_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumanEvalSummary {
    pub encoder: RouteRatings,
    pub wordvec: RouteRatings,
    pub rows: usize,
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if in_quotes && chars.peek() == Some(&'"') => {
                current.push('"');
                chars.next();
            }
            '"' => in_quotes = !in_quotes,
            ',' if !in_quotes => {
                fields.push(std::mem::take(&mut current));
            }
            other => current.push(other),
        }
    }
    fields.push(current);
    fields
}

fn parse_rating(field: &str, row: usize, what: &str) -> Result<Option<u8>> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    let value: i64 = field.parse().map_err(|_| Error::Validation {
        row,
        message: format!("{what}: not an integer: {field:?}"),
    })?;
    if !(1..=5).contains(&value) {
        return Err(Error::Validation {
            row,
            message: format!("{what}: rating {value} outside 1-5"),
        });
    }
    Ok(Some(value as u8))
}

fn parse_flag(field: &str, row: usize, what: &str) -> Result<bool> {
    match field.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Validation {
            row,
            message: format!("{what}: expected 0 or 1, found {other:?}"),
        }),
    }
}

/// Parse a filled rating sheet into rows.
pub fn parse_human_eval(content: &str) -> Result<Vec<HumanEvalRow>> {
    let mut lines = content.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::format("empty rating sheet"));
    };
    if header.trim() != HUMAN_EVAL_HEADER {
        return Err(Error::format(format!(
            "unexpected header: {:?}",
            header.trim()
        )));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row_no = idx + 1;
        let fields = split_csv_line(line);
        if fields.len() != 11 {
            return Err(Error::Validation {
                row: row_no,
                message: format!("expected 11 fields, found {}", fields.len()),
            });
        }
        let reviewer_id: usize = fields[1].trim().parse().map_err(|_| Error::Validation {
            row: row_no,
            message: format!("bad reviewer id {:?}", fields[1]),
        })?;
        let enc_unchanged = parse_flag(&fields[7], row_no, "enc_unchanged")?;
        let wv_unchanged = parse_flag(&fields[10], row_no, "wv_unchanged")?;
        let enc_correctness = parse_rating(&fields[5], row_no, "enc_correctness")?;
        let enc_change = parse_rating(&fields[6], row_no, "enc_change")?;
        let wv_correctness = parse_rating(&fields[8], row_no, "wv_correctness")?;
        let wv_change = parse_rating(&fields[9], row_no, "wv_change")?;
        if !enc_unchanged && (enc_correctness.is_none() || enc_change.is_none()) {
            return Err(Error::Validation {
                row: row_no,
                message: "encoder ratings missing on a row not flagged unchanged".into(),
            });
        }
        if !wv_unchanged && (wv_correctness.is_none() || wv_change.is_none()) {
            return Err(Error::Validation {
                row: row_no,
                message: "wordvec ratings missing on a row not flagged unchanged".into(),
            });
        }
        rows.push(HumanEvalRow {
            item_id: fields[0].clone(),
            reviewer_id,
            original: fields[2].clone(),
            encoder_output: fields[3].clone(),
            wordvec_output: fields[4].clone(),
            enc_correctness,
            enc_change,
            enc_unchanged,
            wv_correctness,
            wv_change,
            wv_unchanged,
        });
    }
    Ok(rows)
}

/// Aggregate a filled sheet: arithmetic means over rows not flagged
/// unchanged, plus the unchanged ratio per route.
pub fn aggregate_ratings(content: &str) -> Result<HumanEvalSummary> {
    let rows = parse_human_eval(content)?;
    if rows.is_empty() {
        return Err(Error::format("rating sheet has no data rows"));
    }
    let total = rows.len();
    let route = |unchanged: &dyn Fn(&HumanEvalRow) -> bool,
                 correctness: &dyn Fn(&HumanEvalRow) -> Option<u8>,
                 change: &dyn Fn(&HumanEvalRow) -> Option<u8>|
     -> RouteRatings {
        let rated: Vec<&HumanEvalRow> = rows.iter().filter(|r| !unchanged(r)).collect();
        let mean = |get: &dyn Fn(&HumanEvalRow) -> Option<u8>| -> Option<f64> {
            if rated.is_empty() {
                return None;
            }
            let sum: f64 = rated.iter().filter_map(|r| get(r)).map(f64::from).sum();
            Some(sum / rated.len() as f64)
        };
        RouteRatings {
            mean_correctness: mean(correctness),
            mean_change: mean(change),
            unchanged_ratio: (total - rated.len()) as f64 / total as f64,
        }
    };
    Ok(HumanEvalSummary {
        encoder: route(
            &|r| r.enc_unchanged,
            &|r| r.enc_correctness,
            &|r| r.enc_change,
        ),
        wordvec: route(&|r| r.wv_unchanged, &|r| r.wv_correctness, &|r| r.wv_change),
        rows: total,
    })
}

/// Map `f` over `items` with at most `threads` workers. Items are split
/// into contiguous chunks processed in order, so the output order (and any
/// floating-point content) is independent of scheduling.
pub fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let threads = threads.max(1).min(items.len().max(1));
    if threads == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk_len = items.len().div_ceil(threads);
    let mut chunk_outputs: Vec<Vec<R>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk_len)
            .map(|chunk| scope.spawn(|| chunk.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        for handle in handles {
            chunk_outputs.push(handle.join().expect("worker panicked"));
        }
    });
    chunk_outputs.into_iter().flatten().collect()
}

/// Classifier accuracy over a seeded random sample of the test documents.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierEval {
    pub accuracy: f64,
    pub evaluated: usize,
    pub requested: usize,
    pub clamped: bool,
}

pub fn evaluate_classifier(
    test: &[Document],
    vocab: &Vocabulary,
    params: &ClassifierParams,
    sample_size: usize,
    seed: u64,
) -> Result<ClassifierEval> {
    if test.is_empty() {
        return Err(Error::domain("evaluation over empty test set"));
    }
    let mut rng = Rng::new(seed);
    let chosen = rng.sample_indices(test.len(), sample_size);
    let sample: Vec<Document> = chosen.iter().map(|&i| test[i].clone()).collect();
    let accuracy = crate::classifier::accuracy(&sample, vocab, params)?;
    Ok(ClassifierEval {
        accuracy,
        evaluated: sample.len(),
        requested: sample_size,
        clamped: sample_size > test.len(),
    })
}
