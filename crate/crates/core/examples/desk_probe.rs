//! Full desk-scale library run on synthetic data, with stage timings:
//! train the classifier, extract phrases, train the echo autoencoder,
//! build the store, run the phrase-level flip buckets and both end-to-end
//! routes.
//!
//! Usage: cargo run --release -p polarity-pipe --example desk_probe

use std::time::Instant;

use polarity_pipe::classifier::{self, TrainConfig};
use polarity_pipe::corpus::{self, Sentiment};
use polarity_pipe::encoder_route::{self, EchoConfig};
use polarity_pipe::extractor::{self, ExtractionConfig};
use polarity_pipe::pipeline::{self, EncoderComponents, Pipeline, Route, WordvecComponents};
use polarity_pipe::resources;
use polarity_pipe::rng::Rng;
use polarity_pipe::synth;
use polarity_pipe::wordvec_route::PolarityMemo;

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let t0 = Instant::now();
    synth::write_imdb_fixture(dir.path().join("imdb").as_path(), 1250, 300, 101).unwrap();
    let rt_path = dir.path().join("rt.tsv");
    synth::write_rotten_tomatoes_fixture(&rt_path, 150, 102).unwrap();
    let emb_path = dir.path().join("emb.txt");
    synth::write_embeddings_fixture(&emb_path, 100, 103).unwrap();
    let lex_path = dir.path().join("lex.txt");
    synth::write_lexicon_fixture(&lex_path).unwrap();
    println!("fixtures: {:?}", t0.elapsed());

    let t = Instant::now();
    let imdb = corpus::load_imdb(dir.path().join("imdb").as_path()).unwrap();
    let train_docs = corpus::subsample_balanced(&imdb.train, 1000, 7);
    let test_docs = corpus::subsample_balanced(&imdb.test, 250, 8);
    let vocab = corpus::build_vocabulary(&train_docs, 2, 20000);
    println!(
        "load: {:?} train={} test={} vocab={}",
        t.elapsed(),
        train_docs.len(),
        test_docs.len(),
        vocab.len()
    );

    let t = Instant::now();
    let config = TrainConfig {
        batch_size: 64,
        epochs: 3,
        seed: 11,
        holdout_fraction: 0.05,
        ..TrainConfig::default()
    };
    let report = classifier::train(&train_docs, &vocab, &config).unwrap();
    println!(
        "train classifier: {:?} losses={:?} holdout={:?}",
        t.elapsed(),
        report.epoch_losses,
        report.holdout_accuracy
    );
    let t = Instant::now();
    let acc = classifier::accuracy(&test_docs, &vocab, &report.params).unwrap();
    println!("test accuracy: {acc:.4} ({:?})", t.elapsed());

    // extraction over train docs for AE phrases
    let t = Instant::now();
    let ext_cfg = ExtractionConfig { tau: 0.8, ..ExtractionConfig::default() };
    let mut phrases = Vec::new();
    for doc in &train_docs {
        let enc = corpus::encode_document(doc, &vocab);
        let (_, attn) = report.params.forward(&enc).unwrap();
        let pred = classifier::predict(&enc, &report.params).unwrap();
        phrases.extend(extractor::extract_phrases(doc, &attn, pred, &ext_cfg).unwrap());
    }
    let lens: Vec<usize> = phrases.iter().map(|p| p.len()).collect();
    let longer5 = lens.iter().filter(|&&l| l > 5).count();
    let longer2 = lens.iter().filter(|&&l| l > 2).count();
    println!(
        "extract: {:?} phrases={} (>2: {longer2}, >5: {longer5}) neg={} pos={}",
        t.elapsed(),
        phrases.len(),
        phrases.iter().filter(|p| p.source_sentiment == Sentiment::Negative).count(),
        phrases.iter().filter(|p| p.source_sentiment == Sentiment::Positive).count(),
    );

    // echo training on <= 300 phrases
    let mut rng = Rng::new(55);
    let mut idx: Vec<usize> = (0..phrases.len()).collect();
    rng.shuffle(&mut idx);
    idx.truncate(300);
    let ae_phrases: Vec<_> = idx.iter().map(|&i| phrases[i].clone()).collect();
    let token_lists: Vec<Vec<String>> = ae_phrases.iter().map(|p| p.tokens.clone()).collect();
    let ae_vocab_src: Vec<corpus::Document> = token_lists
        .iter()
        .enumerate()
        .map(|(i, tokens)| corpus::Document {
            sentences: vec![tokens.clone()],
            label: Sentiment::Positive,
            source_id: format!("p{i}"),
        })
        .collect();
    let ae_vocab = corpus::build_vocabulary(&ae_vocab_src, 1, 20000);
    println!("ae vocab = {}", ae_vocab.len());

    let embeddings = resources::load_embeddings(&emb_path, Some(100)).unwrap();
    let t = Instant::now();
    let echo_cfg = EchoConfig {
        epochs: 150,
        seed: 21,
        ..EchoConfig::default()
    };
    let echo = encoder_route::train_echo(&token_lists, &ae_vocab, &echo_cfg, Some(&embeddings)).unwrap();
    println!(
        "train echo: {:?} first={:.4} last={:.4}",
        t.elapsed(),
        echo.epoch_losses[0],
        echo.epoch_losses.last().unwrap()
    );
    let stats = encoder_route::reconstruction_stats(&token_lists, &echo.params, &ae_vocab, 20).unwrap();
    println!(
        "echo stats: token_acc={:.3} exact={:.3}",
        stats.token_accuracy, stats.exact_match_rate
    );

    let store = encoder_route::build_store(&ae_phrases, &echo.params, &ae_vocab).unwrap();
    println!("store: {} entries {:?}", store.len(), store.label_counts());

    // flip experiment buckets
    let t = Instant::now();
    let buckets = encoder_route::autoencoder_flip_experiment(
        &ae_phrases,
        &echo.params,
        &ae_vocab,
        &store,
        &report.params,
        &vocab,
        &[0, 2, 5],
        20,
    )
    .unwrap();
    println!("flip buckets: {buckets:?} ({:?})", t.elapsed());

    // end-to-end on RT sentences
    let rt = corpus::load_rotten_tomatoes(&rt_path).unwrap();
    let rt_docs = corpus::subsample_balanced(&rt.train, 100, 9);
    let lexicon = resources::load_lexicon(&lex_path).unwrap();
    let memo = PolarityMemo::new();
    let pipe = Pipeline {
        classifier: &report.params,
        vocab: &vocab,
        extraction: ExtractionConfig { tau: 0.8, ..ExtractionConfig::default() },
        encoder: Some(EncoderComponents {
            params: &echo.params,
            vocab: &ae_vocab,
            store: &store,
            max_decode_len: 20,
        }),
        wordvec: Some(WordvecComponents {
            lexicon: &lexicon,
            embeddings: &embeddings,
            threshold: 0.65,
            memo: &memo,
        }),
    };
    for route in [Route::Encoder, Route::Wordvec] {
        let t = Instant::now();
        let mut results = Vec::new();
        let mut no_phrase = 0;
        for doc in &rt_docs {
            let r = pipe.transform_document(doc, route).unwrap();
            if r.replacements.is_empty() {
                no_phrase += 1;
            }
            results.push(r);
        }
        let rate = pipeline::flip_rate(&results).unwrap();
        println!(
            "route {:?}: flip={rate:.3} no_phrase={no_phrase}/{} ({:?})",
            route,
            rt_docs.len(),
            t.elapsed()
        );
    }
    println!("total: {:?}", t0.elapsed());
}
