use criterion::{black_box, criterion_group, criterion_main, Criterion};

use polarity_pipe::classifier::{predict, HanDims, HanParams};
use polarity_pipe::corpus::{build_vocabulary, preprocess_text, Document, Sentiment};
use polarity_pipe::encoder_route::{nearest_opposite, LatentEntry, LatentStore, Seq2SeqDims, Seq2SeqParams};
use polarity_pipe::extractor::{extract_phrases, ExtractionConfig};
use polarity_pipe::resources::cosine_similarity;
use polarity_pipe::rng::Rng;
use polarity_pipe::synth;

fn random_doc(rng: &mut Rng, vocab_size: usize, sentences: usize, words: usize) -> Vec<Vec<usize>> {
    (0..sentences)
        .map(|_| (0..words).map(|_| rng.below(vocab_size)).collect())
        .collect()
}

fn bench_preprocess(c: &mut Criterion) {
    let mut rng = Rng::new(1);
    let review = synth::generate_review(&mut rng, Sentiment::Positive);
    c.bench_function("preprocess_review", |b| {
        b.iter(|| preprocess_text(black_box(&review)))
    });
}

fn bench_classifier_forward(c: &mut Criterion) {
    let dims = HanDims {
        vocab_size: 5000,
        embedding_dim: 300,
        hidden: 150,
        attn_dim: 50,
    };
    let mut rng = Rng::new(2);
    let params: HanParams<f32> = HanParams::init(dims, &mut rng);
    let doc = random_doc(&mut rng, dims.vocab_size, 3, 15);
    c.bench_function("classifier_forward_45_words", |b| {
        b.iter(|| params.forward(black_box(&doc)).unwrap())
    });
    c.bench_function("classifier_predict_45_words", |b| {
        b.iter(|| predict(black_box(&doc), &params).unwrap())
    });
}

fn bench_extraction(c: &mut Criterion) {
    let mut rng = Rng::new(3);
    let words: Vec<String> = (0..20).map(|i| format!("w{i}")).collect();
    let doc = Document {
        sentences: vec![words],
        label: Sentiment::Positive,
        source_id: "bench".into(),
    };
    let mut weights: Vec<f32> = (0..20).map(|_| rng.next_f64() as f32).collect();
    let total: f32 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let attn = polarity_pipe::classifier::AttentionRecord {
        word_weights: vec![weights],
        sentence_weights: vec![1.0],
    };
    let cfg = ExtractionConfig::default();
    c.bench_function("extract_phrases_20_words", |b| {
        b.iter(|| extract_phrases(black_box(&doc), &attn, Sentiment::Positive, &cfg).unwrap())
    });
}

fn bench_latent_retrieval(c: &mut Criterion) {
    let mut rng = Rng::new(4);
    let entries: Vec<LatentEntry> = (0..1000)
        .map(|i| LatentEntry {
            code: (0..250).map(|_| rng.range_f64(-1.0, 1.0) as f32).collect(),
            label: if i % 2 == 0 { Sentiment::Negative } else { Sentiment::Positive },
            phrase_tokens: vec!["w".into()],
            source_id: format!("e{i}"),
        })
        .collect();
    let store = LatentStore { entries };
    let query: Vec<f32> = (0..250).map(|_| rng.range_f64(-1.0, 1.0) as f32).collect();
    c.bench_function("nearest_opposite_1000x250", |b| {
        b.iter(|| nearest_opposite(black_box(&store), &query, Sentiment::Positive).unwrap())
    });
    let x: Vec<f32> = (0..100).map(|_| rng.range_f64(-1.0, 1.0) as f32).collect();
    let y: Vec<f32> = (0..100).map(|_| rng.range_f64(-1.0, 1.0) as f32).collect();
    c.bench_function("cosine_similarity_100", |b| {
        b.iter(|| cosine_similarity(black_box(&x), black_box(&y)).unwrap())
    });
}

fn bench_encode_decode(c: &mut Criterion) {
    let doc = Document {
        sentences: vec![(0..8).map(|i| format!("tok{i}")).collect()],
        label: Sentiment::Positive,
        source_id: "bench".into(),
    };
    let vocab = build_vocabulary(std::slice::from_ref(&doc), 1, 1000);
    let dims = Seq2SeqDims {
        vocab_size: vocab.len(),
        embedding_dim: 100,
        hidden: 250,
    };
    let mut rng = Rng::new(5);
    let params: Seq2SeqParams<f32> = Seq2SeqParams::init(dims, &vocab, None, &mut rng).unwrap();
    let tokens: Vec<String> = doc.sentences[0].clone();
    c.bench_function("seq2seq_encode_8_tokens", |b| {
        b.iter(|| polarity_pipe::encoder_route::encode(black_box(&tokens), &params, &vocab).unwrap())
    });
    let code = polarity_pipe::encoder_route::encode(&tokens, &params, &vocab).unwrap();
    c.bench_function("seq2seq_greedy_decode", |b| {
        b.iter(|| polarity_pipe::encoder_route::decode(black_box(&code), &params, &vocab, 20).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_preprocess, bench_classifier_forward, bench_extraction,
              bench_latent_retrieval, bench_encode_decode
}
criterion_main!(benches);
