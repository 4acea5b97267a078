//! Phrase extraction from attention weights.
//!
//! A word is selected when its attention weight reaches tau/T for a
//! T-word sentence (softmax weights scale as 1/T, so the cutoff is
//! relative). Maximal runs of selected words, bridging gaps of at most
//! `max_gap` unselected words, become candidate phrases.

use std::io::Write;

use crate::classifier::AttentionRecord;
use crate::corpus::{Document, Sentiment};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ExtractionConfig {
    /// Relative threshold multiplier: select weight >= tau / sentence_len.
    pub tau: f64,
    /// Unselected words tolerated inside a phrase run.
    pub max_gap: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// When set, only sentences whose sentence-level weight reaches
    /// tau / sentence_count are scanned.
    pub use_sentence_gate: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            tau: 1.5,
            max_gap: 1,
            min_len: 1,
            max_len: 12,
            use_sentence_gate: false,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau <= 0.0 {
            return Err(Error::domain("tau must be positive"));
        }
        if self.min_len < 1 || self.max_len < self.min_len {
            return Err(Error::domain("require 1 <= min_len <= max_len"));
        }
        Ok(())
    }
}

/// A contiguous sentiment-bearing token span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phrase {
    pub source_id: String,
    pub sentence_index: usize,
    /// Word positions [start, end) within the sentence.
    pub start: usize,
    pub end: usize,
    pub tokens: Vec<String>,
    pub source_sentiment: Sentiment,
}

impl Phrase {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Extract phrases from one document's attention record. `predicted` is the
/// classifier verdict on the document and becomes each phrase's source
/// sentiment.
pub fn extract_phrases(
    doc: &Document,
    attn: &AttentionRecord,
    predicted: Sentiment,
    cfg: &ExtractionConfig,
) -> Result<Vec<Phrase>> {
    cfg.validate()?;
    if attn.word_weights.len() != doc.sentences.len()
        || attn.sentence_weights.len() != doc.sentences.len()
    {
        return Err(Error::domain(format!(
            "attention record shape mismatch: {} sentences vs {} weight groups",
            doc.sentences.len(),
            attn.word_weights.len()
        )));
    }
    let mut phrases = Vec::new();
    let sentence_count = doc.sentences.len();
    for (s_idx, sentence) in doc.sentences.iter().enumerate() {
        let weights = &attn.word_weights[s_idx];
        if weights.len() != sentence.len() {
            return Err(Error::domain(format!(
                "attention record shape mismatch in sentence {s_idx}: {} words vs {} weights",
                sentence.len(),
                weights.len()
            )));
        }
        if cfg.use_sentence_gate {
            let gate = cfg.tau / sentence_count as f64;
            if (attn.sentence_weights[s_idx] as f64) < gate {
                continue;
            }
        }
        let threshold = cfg.tau / sentence.len() as f64;
        let selected: Vec<usize> = (0..sentence.len())
            .filter(|&t| weights[t] as f64 >= threshold)
            .collect();

        // merge selected positions into runs, bridging small gaps
        let mut run_start: Option<(usize, usize)> = None; // (start, last selected)
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &t in &selected {
            match run_start {
                None => run_start = Some((t, t)),
                Some((start, last)) => {
                    if t - last - 1 <= cfg.max_gap {
                        run_start = Some((start, t));
                    } else {
                        runs.push((start, last + 1));
                        run_start = Some((t, t));
                    }
                }
            }
        }
        if let Some((start, last)) = run_start {
            runs.push((start, last + 1));
        }

        for (start, end) in runs {
            let end = end.min(start + cfg.max_len); // truncate long phrases
            if end - start < cfg.min_len {
                continue;
            }
            phrases.push(Phrase {
                source_id: doc.source_id.clone(),
                sentence_index: s_idx,
                start,
                end,
                tokens: sentence[start..end].to_vec(),
                source_sentiment: predicted,
            });
        }
    }
    Ok(phrases)
}

/// Keep phrases strictly longer than `n` tokens.
pub fn filter_by_min_length(phrases: &[Phrase], n: usize) -> Vec<Phrase> {
    phrases.iter().filter(|p| p.len() > n).cloned().collect()
}

/// One tab-separated line per phrase:
/// `source_id<TAB>sentence_index<TAB>start<TAB>end<TAB>sentiment<TAB>space-joined tokens`.
pub fn write_phrase_dump(phrases: &[Phrase], out: &mut impl Write) -> Result<()> {
    for p in phrases {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            p.source_id,
            p.sentence_index,
            p.start,
            p.end,
            p.source_sentiment.as_str(),
            p.tokens.join(" ")
        )?;
    }
    Ok(())
}

/// Parse a dump produced by [`write_phrase_dump`].
pub fn parse_phrase_dump(content: &str) -> Result<Vec<Phrase>> {
    let mut phrases = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(Error::Validation {
                row: line_no + 1,
                message: format!("expected 6 tab-separated fields, found {}", fields.len()),
            });
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Validation {
                row: line_no + 1,
                message: format!("bad {what}: {s:?}"),
            })
        };
        let sentence_index = parse_usize(fields[1], "sentence index")?;
        let start = parse_usize(fields[2], "start")?;
        let end = parse_usize(fields[3], "end")?;
        let sentiment = Sentiment::parse(fields[4]).ok_or_else(|| Error::Validation {
            row: line_no + 1,
            message: format!("bad sentiment: {:?}", fields[4]),
        })?;
        let tokens: Vec<String> = fields[5].split(' ').map(str::to_string).collect();
        if end <= start || tokens.len() != end - start {
            return Err(Error::Validation {
                row: line_no + 1,
                message: "span does not match token count".into(),
            });
        }
        phrases.push(Phrase {
            source_id: fields[0].to_string(),
            sentence_index,
            start,
            end,
            tokens,
            source_sentiment: sentiment,
        });
    }
    Ok(phrases)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc_of(sentences: &[&[&str]]) -> Document {
        Document {
            sentences: sentences
                .iter()
                .map(|s| s.iter().map(|t| t.to_string()).collect())
                .collect(),
            label: Sentiment::Positive,
            source_id: "fixture".into(),
        }
    }

    fn record(word: Vec<Vec<f32>>, sent: Vec<f32>) -> AttentionRecord {
        AttentionRecord {
            word_weights: word,
            sentence_weights: sent,
        }
    }

    fn cfg(tau: f64, max_gap: usize) -> ExtractionConfig {
        ExtractionConfig {
            tau,
            max_gap,
            ..ExtractionConfig::default()
        }
    }

    #[test]
    fn uniform_weights_yield_no_phrases() {
        let doc = doc_of(&[&["a", "b", "c", "d", "e"]]);
        let attn = record(vec![vec![0.2; 5]], vec![1.0]);
        let got = extract_phrases(&doc, &attn, Sentiment::Positive, &cfg(1.5, 1)).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn single_peak_yields_single_word_phrase() {
        let doc = doc_of(&[&["a", "b", "c", "d", "e"]]);
        let attn = record(vec![vec![0.5, 0.1, 0.1, 0.2, 0.1]], vec![1.0]);
        let got = extract_phrases(&doc, &attn, Sentiment::Negative, &cfg(1.5, 1)).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!((got[0].start, got[0].end), (0, 1));
        assert_eq!(got[0].tokens, vec!["a"]);
        assert_eq!(got[0].source_sentiment, Sentiment::Negative);
    }

    #[test]
    fn gap_word_is_bridged_into_the_phrase() {
        let doc = doc_of(&[&["a", "b", "c", "d", "e"]]);
        let attn = record(vec![vec![0.35, 0.05, 0.35, 0.15, 0.10]], vec![1.0]);
        let got = extract_phrases(&doc, &attn, Sentiment::Positive, &cfg(1.5, 1)).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!((got[0].start, got[0].end), (0, 3));
        assert_eq!(got[0].tokens, vec!["a", "b", "c"]);
    }

    #[test]
    fn zero_gap_splits_runs() {
        let doc = doc_of(&[&["a", "b", "c", "d", "e"]]);
        let attn = record(vec![vec![0.35, 0.05, 0.35, 0.15, 0.10]], vec![1.0]);
        let got = extract_phrases(&doc, &attn, Sentiment::Positive, &cfg(1.5, 0)).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!((got[0].start, got[0].end), (0, 1));
        assert_eq!((got[1].start, got[1].end), (2, 3));
    }

    #[test]
    fn tiny_tau_selects_whole_sentence_up_to_max_len() {
        let doc = doc_of(&[&["a", "b", "c", "d", "e"]]);
        let attn = record(vec![vec![0.2; 5]], vec![1.0]);
        let got = extract_phrases(&doc, &attn, Sentiment::Positive, &cfg(1e-9, 1)).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!((got[0].start, got[0].end), (0, 5));
        let mut bounded = cfg(1e-9, 1);
        bounded.max_len = 3;
        let got = extract_phrases(&doc, &attn, Sentiment::Positive, &bounded).unwrap();
        assert_eq!((got[0].start, got[0].end), (0, 3));
    }

    #[test]
    fn huge_tau_selects_nothing() {
        let doc = doc_of(&[&["a", "b", "c"]]);
        let attn = record(vec![vec![0.5, 0.3, 0.2]], vec![1.0]);
        let got = extract_phrases(&doc, &attn, Sentiment::Positive, &cfg(100.0, 1)).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn min_len_drops_short_runs() {
        let doc = doc_of(&[&["a", "b", "c", "d", "e"]]);
        let attn = record(vec![vec![0.5, 0.1, 0.1, 0.2, 0.1]], vec![1.0]);
        let mut config = cfg(1.5, 1);
        config.min_len = 2;
        let got = extract_phrases(&doc, &attn, Sentiment::Positive, &config).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn sentence_gate_skips_low_weight_sentences() {
        let doc = doc_of(&[&["a", "b"], &["c", "d"]]);
        let attn = record(vec![vec![0.9, 0.1], vec![0.9, 0.1]], vec![0.95, 0.05]);
        let mut config = cfg(1.5, 1);
        config.use_sentence_gate = true;
        let got = extract_phrases(&doc, &attn, Sentiment::Positive, &config).unwrap();
        // gate is 1.5/2 = 0.75: only sentence 0 passes
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].sentence_index, 0);
    }

    #[test]
    fn shape_mismatch_is_domain_error() {
        let doc = doc_of(&[&["a", "b"]]);
        let attn = record(vec![vec![1.0]], vec![1.0]);
        assert!(extract_phrases(&doc, &attn, Sentiment::Positive, &cfg(1.5, 1)).is_err());
        let attn = record(vec![vec![0.5, 0.5], vec![1.0]], vec![1.0, 0.0]);
        assert!(extract_phrases(&doc, &attn, Sentiment::Positive, &cfg(1.5, 1)).is_err());
    }

    #[test]
    fn spans_are_sorted_and_disjoint() {
        let doc = doc_of(&[&["a", "b", "c", "d", "e", "f", "g", "h"]]);
        let attn = record(
            vec![vec![0.3, 0.02, 0.02, 0.3, 0.02, 0.02, 0.3, 0.02]],
            vec![1.0],
        );
        let got = extract_phrases(&doc, &attn, Sentiment::Positive, &cfg(1.5, 0)).unwrap();
        for pair in got.windows(2) {
            assert!(pair[0].end <= pair[1].start);
        }
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn every_phrase_position_passes_or_sits_in_gap() {
        // randomized weights; property checked against the raw selection mask
        let mut rng = crate::rng::Rng::new(41);
        for _ in 0..200 {
            let len = 2 + rng.below(10);
            let mut weights: Vec<f32> = (0..len).map(|_| rng.next_f64() as f32).collect();
            let sum: f32 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= sum);
            let tokens: Vec<String> = (0..len).map(|i| format!("w{i}")).collect();
            let doc = Document {
                sentences: vec![tokens],
                label: Sentiment::Positive,
                source_id: "prop".into(),
            };
            let attn = record(vec![weights.clone()], vec![1.0]);
            let config = cfg(1.2, 1);
            let phrases =
                extract_phrases(&doc, &attn, Sentiment::Positive, &config).unwrap();
            let threshold = config.tau / len as f64;
            let mask: Vec<bool> = weights.iter().map(|&w| w as f64 >= threshold).collect();
            for p in &phrases {
                assert!(mask[p.start], "phrase must start on a selected word");
                assert!(mask[p.end - 1] || p.end == p.start + config.max_len,
                    "phrase must end on a selected word unless truncated");
                let mut gap = 0;
                for &selected in &mask[p.start..p.end] {
                    if selected {
                        gap = 0;
                    } else {
                        gap += 1;
                        assert!(gap <= config.max_gap);
                    }
                }
            }
        }
    }

    #[test]
    fn strict_length_filter() {
        let mk = |len: usize| Phrase {
            source_id: "x".into(),
            sentence_index: 0,
            start: 0,
            end: len,
            tokens: (0..len).map(|i| format!("t{i}")).collect(),
            source_sentiment: Sentiment::Positive,
        };
        let phrases: Vec<Phrase> = [1, 2, 3, 6].iter().map(|&l| mk(l)).collect();
        let lens = |ps: &[Phrase]| ps.iter().map(Phrase::len).collect::<Vec<_>>();
        assert_eq!(lens(&filter_by_min_length(&phrases, 2)), vec![3, 6]);
        assert_eq!(lens(&filter_by_min_length(&phrases, 0)), vec![1, 2, 3, 6]);
        assert_eq!(lens(&filter_by_min_length(&phrases, 5)), vec![6]);
    }

    #[test]
    fn dump_round_trips() {
        let phrases = vec![
            Phrase {
                source_id: "train/pos/3.txt".into(),
                sentence_index: 2,
                start: 1,
                end: 4,
                tokens: vec!["really".into(), "quite".into(), "good".into()],
                source_sentiment: Sentiment::Positive,
            },
            Phrase {
                source_id: "rt/15".into(),
                sentence_index: 0,
                start: 0,
                end: 1,
                tokens: vec!["awful".into()],
                source_sentiment: Sentiment::Negative,
            },
        ];
        let mut buf = Vec::new();
        write_phrase_dump(&phrases, &mut buf).unwrap();
        let parsed = parse_phrase_dump(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed, phrases);
    }

    #[test]
    fn malformed_dump_line_names_row() {
        let err = parse_phrase_dump("good\tline\tis\tnot\there\n").unwrap_err();
        match err {
            Error::Validation { row, .. } => assert_eq!(row, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
