//! Hierarchical GRU sentiment classifier with word- and sentence-level
//! attention, trained from scratch with hand-derived gradients.
//!
//! Words are embedded and encoded by a bidirectional GRU; an attention layer
//! pools the annotations into a sentence vector. Sentence vectors pass
//! through a second bidirectional GRU and attention layer into a document
//! vector, which a final affine layer maps to two class logits.

use std::path::Path;

use crate::corpus::{encode_document, Document, EncodedDocument, Sentiment, Vocabulary};
use crate::error::{Error, Result};
use crate::nn::attention::{AttentionLayer, AttentionRun};
use crate::nn::checkpoint::{
    expect_eof, open_reader, read_block, read_header, write_checkpoint,
};
use crate::nn::gru::{BiGru, BiGruRun};
use crate::nn::mat::{Mat, Real};
use crate::nn::ops::clip_global_norm;
use crate::nn::optim::Adam;
use crate::rng::Rng;

const NUM_CLASSES: usize = 2;
const CHECKPOINT_MAGIC: &[u8; 8] = b"PLRPHAN1";

/// Network dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HanDims {
    pub vocab_size: usize,
    pub embedding_dim: usize,
    pub hidden: usize,
    pub attn_dim: usize,
}

/// All trainable parameters. Production models use `F = f32`; the gradient
/// checker instantiates `F = f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct HanParams<F: Real> {
    pub dims: HanDims,
    pub embedding: Mat<F>,
    pub word_gru: BiGru<F>,
    pub word_attn: AttentionLayer<F>,
    pub sent_gru: BiGru<F>,
    pub sent_attn: AttentionLayer<F>,
    pub out_w: Mat<F>,
    pub out_b: Mat<F>,
}

pub type ClassifierParams = HanParams<f32>;

/// Normalized attention weights from one forward pass; shapes mirror the
/// source document.
#[derive(Debug, Clone)]
pub struct AttentionRecord {
    pub word_weights: Vec<Vec<f32>>,
    pub sentence_weights: Vec<f32>,
}

/// Training hyperparameters (Adam, cross-entropy, seeded).
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub embedding_dim: usize,
    pub hidden: usize,
    pub attn_dim: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub clip_norm: f64,
    /// Fraction of the training set held out for epoch selection; 0 keeps
    /// the final epoch's parameters.
    pub holdout_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            embedding_dim: 300,
            hidden: 150,
            attn_dim: 50,
            batch_size: 256,
            learning_rate: 1e-3,
            epochs: 4,
            seed: 0,
            clip_norm: 5.0,
            holdout_fraction: 0.1,
        }
    }
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub params: ClassifierParams,
    pub epoch_losses: Vec<f64>,
    pub holdout_accuracy: Vec<f64>,
    pub best_epoch: usize,
}

struct SentenceCache<F: Real> {
    xs: Vec<Vec<F>>,
    gru: BiGruRun<F>,
    attn: AttentionRun<F>,
}

struct ForwardCache<F: Real> {
    sentences: Vec<SentenceCache<F>>,
    sent_gru: BiGruRun<F>,
    sent_attn: AttentionRun<F>,
    probs: [f64; 2],
}

impl<F: Real> HanParams<F> {
    /// Seeded initialization: embeddings uniform in [-0.1, 0.1], weights
    /// uniform in +-1/sqrt(fan_in), biases zero.
    pub fn init(dims: HanDims, rng: &mut Rng) -> Self {
        let ann = 2 * dims.hidden;
        HanParams {
            dims,
            embedding: Mat::uniform(dims.vocab_size, dims.embedding_dim, 0.1, rng),
            word_gru: BiGru::init(dims.embedding_dim, dims.hidden, rng),
            word_attn: AttentionLayer::init(ann, dims.attn_dim, rng),
            sent_gru: BiGru::init(ann, dims.hidden, rng),
            sent_attn: AttentionLayer::init(ann, dims.attn_dim, rng),
            out_w: Mat::uniform(NUM_CLASSES, ann, 1.0 / (ann as f64).sqrt(), rng),
            out_b: Mat::zeros(1, NUM_CLASSES),
        }
    }

    pub fn zeros(dims: HanDims) -> Self {
        let ann = 2 * dims.hidden;
        HanParams {
            dims,
            embedding: Mat::zeros(dims.vocab_size, dims.embedding_dim),
            word_gru: BiGru::zeros(dims.embedding_dim, dims.hidden),
            word_attn: AttentionLayer::zeros(ann, dims.attn_dim),
            sent_gru: BiGru::zeros(ann, dims.hidden),
            sent_attn: AttentionLayer::zeros(ann, dims.attn_dim),
            out_w: Mat::zeros(NUM_CLASSES, ann),
            out_b: Mat::zeros(1, NUM_CLASSES),
        }
    }

    pub fn cast<G: Real>(&self) -> HanParams<G> {
        HanParams {
            dims: self.dims,
            embedding: self.embedding.cast(),
            word_gru: self.word_gru.cast(),
            word_attn: self.word_attn.cast(),
            sent_gru: self.sent_gru.cast(),
            sent_attn: self.sent_attn.cast(),
            out_w: self.out_w.cast(),
            out_b: self.out_b.cast(),
        }
    }

    /// Parameter blocks in checkpoint order.
    pub fn blocks(&self) -> Vec<(String, &Mat<F>)> {
        let mut blocks = vec![("embedding".to_string(), &self.embedding)];
        blocks.extend(self.word_gru.fwd.blocks("word_gru.fwd"));
        blocks.extend(self.word_gru.bwd.blocks("word_gru.bwd"));
        blocks.extend(self.word_attn.blocks("word_attn"));
        blocks.extend(self.sent_gru.fwd.blocks("sent_gru.fwd"));
        blocks.extend(self.sent_gru.bwd.blocks("sent_gru.bwd"));
        blocks.extend(self.sent_attn.blocks("sent_attn"));
        blocks.push(("out_w".to_string(), &self.out_w));
        blocks.push(("out_b".to_string(), &self.out_b));
        blocks
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Mat<F>> {
        let mut blocks = vec![&mut self.embedding];
        blocks.extend(self.word_gru.fwd.blocks_mut());
        blocks.extend(self.word_gru.bwd.blocks_mut());
        blocks.extend(self.word_attn.blocks_mut());
        blocks.extend(self.sent_gru.fwd.blocks_mut());
        blocks.extend(self.sent_gru.bwd.blocks_mut());
        blocks.extend(self.sent_attn.blocks_mut());
        blocks.push(&mut self.out_w);
        blocks.push(&mut self.out_b);
        blocks
    }

    fn validate_doc(&self, doc: &EncodedDocument) -> Result<()> {
        if doc.is_empty() {
            return Err(Error::domain("forward over empty document"));
        }
        for sentence in doc {
            if sentence.is_empty() {
                return Err(Error::domain("forward over empty sentence"));
            }
            for &idx in sentence {
                if idx >= self.dims.vocab_size {
                    return Err(Error::domain(format!(
                        "token index {idx} out of vocabulary (size {})",
                        self.dims.vocab_size
                    )));
                }
            }
        }
        Ok(())
    }

    fn forward_cached(&self, doc: &EncodedDocument) -> Result<ForwardCache<F>> {
        self.validate_doc(doc)?;
        let mut sentences = Vec::with_capacity(doc.len());
        let mut sentence_vectors = Vec::with_capacity(doc.len());
        for sentence in doc {
            let xs: Vec<Vec<F>> = sentence
                .iter()
                .map(|&idx| self.embedding.row(idx).to_vec())
                .collect();
            let gru = self.word_gru.run(&xs);
            let attn = self.word_attn.run(&gru.annotations);
            sentence_vectors.push(attn.pooled.clone());
            sentences.push(SentenceCache { xs, gru, attn });
        }
        let sent_gru = self.sent_gru.run(&sentence_vectors);
        let sent_attn = self.sent_attn.run(&sent_gru.annotations);

        let mut logits = self.out_b.row(0).to_vec();
        self.out_w.matvec_add(&sent_attn.pooled, &mut logits);
        let probs = softmax2(logits[0].to_f64(), logits[1].to_f64());
        Ok(ForwardCache {
            sentences,
            sent_gru,
            sent_attn,
            probs,
        })
    }

    /// Class probabilities (negative, positive) and the attention record.
    pub fn forward(&self, doc: &EncodedDocument) -> Result<([f64; 2], AttentionRecord)> {
        let cache = self.forward_cached(doc)?;
        Ok((self.probs_of(&cache), record_of(&cache)))
    }

    fn probs_of(&self, cache: &ForwardCache<F>) -> [f64; 2] {
        cache.probs
    }

    /// Mean cross-entropy over a batch, forward only.
    pub fn batch_loss(&self, batch: &[(EncodedDocument, Sentiment)]) -> Result<f64> {
        let mut total = 0.0;
        for (doc, label) in batch {
            let cache = self.forward_cached(doc)?;
            total += -cache.probs[label.index()].ln();
        }
        Ok(total / batch.len() as f64)
    }

    /// Backward pass for one document; accumulates into `grads` and returns
    /// the cross-entropy loss.
    fn backward(
        &self,
        doc: &EncodedDocument,
        label: Sentiment,
        grads: &mut HanParams<F>,
    ) -> Result<f64> {
        let cache = self.forward_cached(doc)?;
        let loss = -cache.probs[label.index()].ln();

        // softmax + cross-entropy: dlogit = prob - onehot
        let mut dlogits = vec![F::ZERO; NUM_CLASSES];
        for (c, slot) in dlogits.iter_mut().enumerate() {
            let target = if c == label.index() { 1.0 } else { 0.0 };
            *slot = F::from_f64(cache.probs[c] - target);
        }
        grads.out_w.add_outer(&dlogits, &cache.sent_attn.pooled);
        for (slot, d) in grads.out_b.row_mut(0).iter_mut().zip(&dlogits) {
            *slot += *d;
        }
        let ann = 2 * self.dims.hidden;
        let mut d_doc_vec = vec![F::ZERO; ann];
        self.out_w.matvec_t_add(&dlogits, &mut d_doc_vec);

        let mut d_sent_annotations = vec![vec![F::ZERO; ann]; doc.len()];
        self.sent_attn.backward_run(
            &cache.sent_gru.annotations,
            &cache.sent_attn,
            &d_doc_vec,
            &mut grads.sent_attn,
            &mut d_sent_annotations,
        );
        let sentence_vectors: Vec<Vec<F>> = cache
            .sentences
            .iter()
            .map(|s| s.attn.pooled.clone())
            .collect();
        let d_sentence_vectors = self.sent_gru.backward_run(
            &sentence_vectors,
            &cache.sent_gru,
            &d_sent_annotations,
            &mut grads.sent_gru,
        );

        for (i, sentence) in doc.iter().enumerate() {
            let sc = &cache.sentences[i];
            let mut d_word_annotations = vec![vec![F::ZERO; ann]; sentence.len()];
            self.word_attn.backward_run(
                &sc.gru.annotations,
                &sc.attn,
                &d_sentence_vectors[i],
                &mut grads.word_attn,
                &mut d_word_annotations,
            );
            let dxs =
                self.word_gru
                    .backward_run(&sc.xs, &sc.gru, &d_word_annotations, &mut grads.word_gru);
            for (t, &idx) in sentence.iter().enumerate() {
                let row = grads.embedding.row_mut(idx);
                for (r, d) in row.iter_mut().zip(&dxs[t]) {
                    *r += *d;
                }
            }
        }
        Ok(loss)
    }
}

fn record_of<F: Real>(cache: &ForwardCache<F>) -> AttentionRecord {
    AttentionRecord {
        word_weights: cache
            .sentences
            .iter()
            .map(|s| s.attn.weights.iter().map(|w| w.to_f64() as f32).collect())
            .collect(),
        sentence_weights: cache
            .sent_attn
            .weights
            .iter()
            .map(|w| w.to_f64() as f32)
            .collect(),
    }
}

fn softmax2(a: f64, b: f64) -> [f64; 2] {
    let m = a.max(b);
    let ea = (a - m).exp();
    let eb = (b - m).exp();
    let sum = ea + eb;
    [ea / sum, eb / sum]
}

/// Argmax of the forward probabilities; exact ties go to negative.
pub fn predict<F: Real>(doc: &EncodedDocument, params: &HanParams<F>) -> Result<Sentiment> {
    let cache = params.forward_cached(doc)?;
    Ok(if cache.probs[1] > cache.probs[0] {
        Sentiment::Positive
    } else {
        Sentiment::Negative
    })
}

/// Fraction of documents whose prediction matches the label.
pub fn accuracy<F: Real>(
    test: &[Document],
    vocab: &Vocabulary,
    params: &HanParams<F>,
) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::domain("accuracy over empty test set"));
    }
    let mut correct = 0usize;
    for doc in test {
        let encoded = encode_document(doc, vocab);
        if predict(&encoded, params)? == doc.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.len() as f64)
}

/// Train on the split's training list. Deterministic given the seed;
/// returns the best-on-holdout parameters together with the loss trace.
pub fn train(
    train_docs: &[Document],
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<TrainReport> {
    if train_docs.is_empty() {
        return Err(Error::domain("training set is empty"));
    }
    if config.epochs == 0 {
        return Err(Error::domain("epochs must be >= 1"));
    }
    if config.batch_size == 0 {
        return Err(Error::domain("batch_size must be >= 1"));
    }
    if !(0.0..1.0).contains(&config.holdout_fraction) {
        return Err(Error::domain("holdout_fraction must be in [0, 1)"));
    }

    let mut rng = Rng::new(config.seed);
    let dims = HanDims {
        vocab_size: vocab.len(),
        embedding_dim: config.embedding_dim,
        hidden: config.hidden,
        attn_dim: config.attn_dim,
    };
    let mut params: ClassifierParams = HanParams::init(dims, &mut rng);
    let mut grads: ClassifierParams = HanParams::zeros(dims);

    let encoded: Vec<(EncodedDocument, Sentiment)> = train_docs
        .iter()
        .map(|d| (encode_document(d, vocab), d.label))
        .collect();
    let mut indices: Vec<usize> = (0..encoded.len()).collect();
    rng.shuffle(&mut indices);
    let holdout_len = ((encoded.len() as f64) * config.holdout_fraction).round() as usize;
    let holdout_len = holdout_len.min(encoded.len().saturating_sub(1));
    let (holdout_idx, train_idx) = indices.split_at(holdout_len);
    let holdout_idx = holdout_idx.to_vec();
    let mut train_idx = train_idx.to_vec();

    let mut adam = {
        let blocks = params.blocks();
        let refs: Vec<&Mat<f32>> = blocks.iter().map(|(_, m)| *m).collect();
        Adam::new(config.learning_rate, &refs)
    };

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut holdout_accuracy = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, ClassifierParams)> = None;

    for epoch in 0..config.epochs {
        rng.shuffle(&mut train_idx);
        let mut epoch_loss = 0.0f64;
        for batch in train_idx.chunks(config.batch_size) {
            for block in grads.blocks_mut() {
                block.fill_zero();
            }
            let mut batch_loss = 0.0f64;
            for &i in batch {
                let (doc, label) = &encoded[i];
                batch_loss += params.backward(doc, *label, &mut grads)?;
            }
            epoch_loss += batch_loss;
            let scale = 1.0 / batch.len() as f64;
            for block in grads.blocks_mut() {
                for v in block.data.iter_mut() {
                    *v *= scale as f32;
                }
            }
            clip_global_norm(&mut grads.blocks_mut(), config.clip_norm);
            {
                let grad_blocks = grads.blocks();
                let grad_refs: Vec<&Mat<f32>> = grad_blocks.iter().map(|(_, m)| *m).collect();
                adam.update(&mut params.blocks_mut(), &grad_refs);
            }
        }
        epoch_losses.push(epoch_loss / train_idx.len() as f64);

        if !holdout_idx.is_empty() {
            let mut correct = 0usize;
            for &i in &holdout_idx {
                let (doc, label) = &encoded[i];
                if predict(doc, &params)? == *label {
                    correct += 1;
                }
            }
            let acc = correct as f64 / holdout_idx.len() as f64;
            holdout_accuracy.push(acc);
            if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                best = Some((acc, epoch, params.clone()));
            }
        }
    }

    let (best_epoch, params) = match best {
        Some((_, epoch, p)) => (epoch, p),
        None => (config.epochs - 1, params),
    };
    Ok(TrainReport {
        params,
        epoch_losses,
        holdout_accuracy,
        best_epoch,
    })
}

/// Write parameters as a versioned binary checkpoint (little-endian f32
/// blocks in `blocks()` order).
pub fn save_checkpoint(params: &ClassifierParams, path: &Path) -> Result<()> {
    let dims = [
        params.dims.vocab_size as u32,
        params.dims.embedding_dim as u32,
        params.dims.hidden as u32,
        params.dims.attn_dim as u32,
        NUM_CLASSES as u32,
    ];
    let blocks = params.blocks();
    let refs: Vec<&Mat<f32>> = blocks.iter().map(|(_, m)| *m).collect();
    write_checkpoint(path, CHECKPOINT_MAGIC, &dims, &refs)
}

/// Load a checkpoint written by [`save_checkpoint`]. Header dimensions must
/// be internally consistent with every block's element count.
pub fn load_checkpoint(path: &Path) -> Result<ClassifierParams> {
    let mut reader = open_reader(path)?;
    let dims = read_header(&mut reader, CHECKPOINT_MAGIC, path)?;
    if dims.len() != 5 {
        return Err(Error::format(format!(
            "{}: expected 5 dimensions, found {}",
            path.display(),
            dims.len()
        )));
    }
    if dims[4] as usize != NUM_CLASSES {
        return Err(Error::format(format!(
            "{}: unsupported class count {}",
            path.display(),
            dims[4]
        )));
    }
    let han_dims = HanDims {
        vocab_size: dims[0] as usize,
        embedding_dim: dims[1] as usize,
        hidden: dims[2] as usize,
        attn_dim: dims[3] as usize,
    };
    let mut params = ClassifierParams::zeros(han_dims);
    let names: Vec<String> = params.blocks().iter().map(|(n, _)| n.clone()).collect();
    for (block, name) in params.blocks_mut().into_iter().zip(&names) {
        read_block(&mut reader, block, name, path)?;
    }
    expect_eof(&mut reader, path)?;
    Ok(params)
}

/// Compare analytic gradients against central finite differences (step
/// 1e-4) over every parameter of a small f64 network. Returns the maximum
/// relative error. `corrupt_block`, when set, perturbs that block's analytic
/// gradient first (used to prove the check can fail).
pub fn gradient_check(
    dims: HanDims,
    batch: &[(EncodedDocument, Sentiment)],
    seed: u64,
    corrupt_block: Option<&str>,
) -> Result<f64> {
    let mut rng = Rng::new(seed);
    let params: HanParams<f64> = HanParams::init(dims, &mut rng);
    let mut grads: HanParams<f64> = HanParams::zeros(dims);
    for (doc, label) in batch {
        params.backward(doc, *label, &mut grads)?;
    }
    let scale = 1.0 / batch.len() as f64;
    for block in grads.blocks_mut() {
        for v in block.data.iter_mut() {
            *v *= scale;
        }
    }
    if let Some(name) = corrupt_block {
        let names: Vec<String> = grads.blocks().iter().map(|(n, _)| n.clone()).collect();
        let pos = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::domain(format!("unknown block {name}")))?;
        grads.blocks_mut()[pos].data[0] += 0.05;
    }

    let step = 1e-4;
    let mut max_rel = 0.0f64;
    let n_blocks = params.blocks().len();
    let mut probe = params.clone();
    for b in 0..n_blocks {
        let len = probe.blocks()[b].1.data.len();
        for i in 0..len {
            let original = probe.blocks_mut()[b].data[i];
            probe.blocks_mut()[b].data[i] = original + step;
            let plus = probe.batch_loss(batch)?;
            probe.blocks_mut()[b].data[i] = original - step;
            let minus = probe.batch_loss(batch)?;
            probe.blocks_mut()[b].data[i] = original;
            let numeric = (plus - minus) / (2.0 * step);
            let analytic = grads.blocks()[b].1.data[i];
            let denom = analytic.abs().max(numeric.abs());
            if denom > 1e-8 {
                let rel = (analytic - numeric).abs() / denom;
                if rel > max_rel {
                    max_rel = rel;
                }
            }
        }
    }
    Ok(max_rel)
}
