//! Encoder-decoder transformation route.
//!
//! One-directional GRUs are trained together to echo extracted phrases: the
//! encoder compresses a phrase into its final hidden state, the decoder
//! reconstructs the phrase from that state. Encoded phrases are stored with
//! their sentiment labels; transforming a phrase retrieves the cosine-closest
//! opposite-label code and greedily decodes it.

use std::io::{Read, Write};
use std::path::Path;

use crate::classifier::HanParams;
use crate::corpus::{Sentiment, Vocabulary, EOS, PAD, SOS};
use crate::error::{Error, Result};
use crate::extractor::{filter_by_min_length, Phrase};
use crate::nn::checkpoint::{
    expect_eof, open_reader, read_block, read_header, write_checkpoint,
};
use crate::nn::gru::GruCell;
use crate::nn::mat::{Mat, Real};
use crate::nn::ops::{clip_global_norm, log_softmax_at, softmax};
use crate::nn::optim::sgd_update;
use crate::resources::{cosine_similarity, EmbeddingTable};
use crate::rng::Rng;

const CHECKPOINT_MAGIC: &[u8; 8] = b"PLRPAE01";
const STORE_MAGIC: &[u8; 8] = b"PLRPSTO1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seq2SeqDims {
    pub vocab_size: usize,
    pub embedding_dim: usize,
    pub hidden: usize,
}

/// Encoder/decoder parameters. The embedding table is shared between the
/// two GRUs; encoder and decoder hidden sizes are equal so the code vector
/// passes straight through.
#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqParams<F: Real> {
    pub dims: Seq2SeqDims,
    pub embedding: Mat<F>,
    pub encoder: GruCell<F>,
    pub decoder: GruCell<F>,
    pub out_w: Mat<F>,
    pub out_b: Mat<F>,
}

pub type AutoencoderParams = Seq2SeqParams<f32>;

/// Echo-training hyperparameters (plain SGD, per-sequence updates).
#[derive(Debug, Clone)]
pub struct EchoConfig {
    pub embedding_dim: usize,
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub clip_norm: f64,
}

impl Default for EchoConfig {
    fn default() -> Self {
        EchoConfig {
            embedding_dim: 100,
            hidden: 250,
            learning_rate: 0.01,
            epochs: 30,
            seed: 0,
            clip_norm: 5.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EchoReport {
    pub params: AutoencoderParams,
    /// Mean per-token negative log-likelihood per epoch.
    pub epoch_losses: Vec<f64>,
}

/// A phrase encoding stored with its sentiment label.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentEntry {
    pub code: Vec<f32>,
    pub label: Sentiment,
    pub phrase_tokens: Vec<String>,
    pub source_id: String,
}

/// Immutable collection of latent entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LatentStore {
    pub entries: Vec<LatentEntry>,
}

impl LatentStore {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// (negative, positive) entry counts.
    pub fn label_counts(&self) -> (usize, usize) {
        let pos = self
            .entries
            .iter()
            .filter(|e| e.label == Sentiment::Positive)
            .count();
        (self.entries.len() - pos, pos)
    }
}

impl<F: Real> Seq2SeqParams<F> {
    pub fn zeros(dims: Seq2SeqDims) -> Self {
        Seq2SeqParams {
            dims,
            embedding: Mat::zeros(dims.vocab_size, dims.embedding_dim),
            encoder: GruCell::zeros(dims.embedding_dim, dims.hidden),
            decoder: GruCell::zeros(dims.embedding_dim, dims.hidden),
            out_w: Mat::zeros(dims.vocab_size, dims.hidden),
            out_b: Mat::zeros(1, dims.vocab_size),
        }
    }

    /// Seeded init. Embedding rows are copied from the pretrained table for
    /// vocabulary words present in it; all other rows are uniform in
    /// [-0.1, 0.1].
    pub fn init(
        dims: Seq2SeqDims,
        vocab: &Vocabulary,
        pretrained: Option<&EmbeddingTable>,
        rng: &mut Rng,
    ) -> Result<Self> {
        if let Some(table) = pretrained {
            if table.dimension != dims.embedding_dim {
                return Err(Error::domain(format!(
                    "pretrained dimension {} does not match configured embedding dim {}",
                    table.dimension, dims.embedding_dim
                )));
            }
        }
        let mut embedding = Mat::uniform(dims.vocab_size, dims.embedding_dim, 0.1, rng);
        if let Some(table) = pretrained {
            for idx in 0..dims.vocab_size.min(vocab.len()) {
                if let Some(vector) = table.get(vocab.token(idx)) {
                    for (slot, &v) in embedding.row_mut(idx).iter_mut().zip(vector) {
                        *slot = F::from_f64(v as f64);
                    }
                }
            }
        }
        Ok(Seq2SeqParams {
            dims,
            embedding,
            encoder: GruCell::init(dims.embedding_dim, dims.hidden, rng),
            decoder: GruCell::init(dims.embedding_dim, dims.hidden, rng),
            out_w: Mat::uniform(
                dims.vocab_size,
                dims.hidden,
                1.0 / (dims.hidden as f64).sqrt(),
                rng,
            ),
            out_b: Mat::zeros(1, dims.vocab_size),
        })
    }

    pub fn cast<G: Real>(&self) -> Seq2SeqParams<G> {
        Seq2SeqParams {
            dims: self.dims,
            embedding: self.embedding.cast(),
            encoder: self.encoder.cast(),
            decoder: self.decoder.cast(),
            out_w: self.out_w.cast(),
            out_b: self.out_b.cast(),
        }
    }

    pub fn blocks(&self) -> Vec<(String, &Mat<F>)> {
        let mut blocks = vec![("embedding".to_string(), &self.embedding)];
        blocks.extend(self.encoder.blocks("encoder"));
        blocks.extend(self.decoder.blocks("decoder"));
        blocks.push(("out_w".to_string(), &self.out_w));
        blocks.push(("out_b".to_string(), &self.out_b));
        blocks
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Mat<F>> {
        let mut blocks = vec![&mut self.embedding];
        blocks.extend(self.encoder.blocks_mut());
        blocks.extend(self.decoder.blocks_mut());
        blocks.push(&mut self.out_w);
        blocks.push(&mut self.out_b);
        blocks
    }

    /// Final encoder hidden state over the index sequence.
    pub fn encode_indices(&self, indices: &[usize]) -> Result<Vec<F>> {
        if indices.is_empty() {
            return Err(Error::domain("encode over empty phrase"));
        }
        let mut state = vec![F::ZERO; self.dims.hidden];
        for &idx in indices {
            let step = self.encoder.step(self.embedding.row(idx), &state);
            state = step.h;
        }
        Ok(state)
    }

    /// Greedy decode from a code vector; stops at EOS or `max_len`. PAD and
    /// SOS are never emitted.
    pub fn decode_indices(&self, code: &[F], max_len: usize) -> Result<Vec<usize>> {
        if code.len() != self.dims.hidden {
            return Err(Error::domain(format!(
                "code dimension {} does not match hidden size {}",
                code.len(),
                self.dims.hidden
            )));
        }
        let mut state = code.to_vec();
        let mut input = SOS;
        let mut output = Vec::new();
        for _ in 0..max_len {
            let step = self.decoder.step(self.embedding.row(input), &state);
            state = step.h;
            let mut logits = self.out_b.row(0).to_vec();
            self.out_w.matvec_add(&state, &mut logits);
            let mut best = EOS;
            let mut best_score = f64::NEG_INFINITY;
            for (idx, score) in logits.iter().enumerate() {
                if idx == PAD || idx == SOS {
                    continue;
                }
                let s = score.to_f64();
                if s > best_score {
                    best_score = s;
                    best = idx;
                }
            }
            if best == EOS {
                break;
            }
            output.push(best);
            input = best;
        }
        Ok(output)
    }

    /// Teacher-forced loss and gradients for one sequence. Returns the
    /// summed token NLL and the token count.
    fn backward_sequence(
        &self,
        indices: &[usize],
        grads: &mut Seq2SeqParams<F>,
    ) -> Result<(f64, usize)> {
        let hidden = self.dims.hidden;
        // encoder forward
        let mut enc_steps = Vec::with_capacity(indices.len());
        let mut state = vec![F::ZERO; hidden];
        for &idx in indices {
            let step = self.encoder.step(self.embedding.row(idx), &state);
            state = step.h.clone();
            enc_steps.push(step);
        }
        let code = state;

        // decoder forward with teacher forcing
        let mut inputs = Vec::with_capacity(indices.len() + 1);
        inputs.push(SOS);
        inputs.extend_from_slice(indices);
        let mut targets = Vec::with_capacity(indices.len() + 1);
        targets.extend_from_slice(indices);
        targets.push(EOS);

        let mut dec_steps = Vec::with_capacity(inputs.len());
        let mut logit_rows = Vec::with_capacity(inputs.len());
        let mut state = code.clone();
        let mut loss = 0.0f64;
        for (&input, &target) in inputs.iter().zip(&targets) {
            let step = self.decoder.step(self.embedding.row(input), &state);
            state = step.h.clone();
            let mut logits = self.out_b.row(0).to_vec();
            self.out_w.matvec_add(&state, &mut logits);
            loss -= log_softmax_at(&logits, target);
            dec_steps.push(step);
            logit_rows.push(logits);
        }

        // decoder backward
        let mut dh = vec![F::ZERO; hidden];
        for t in (0..inputs.len()).rev() {
            let probs = softmax(&logit_rows[t]);
            let mut dlogits = probs;
            dlogits[targets[t]] -= F::ONE;
            grads.out_w.add_outer(&dlogits, &dec_steps[t].h);
            for (slot, d) in grads.out_b.row_mut(0).iter_mut().zip(&dlogits) {
                *slot += *d;
            }
            self.out_w.matvec_t_add(&dlogits, &mut dh);

            let h_prev = if t == 0 { &code } else { &dec_steps[t - 1].h };
            let mut dx = vec![F::ZERO; self.dims.embedding_dim];
            let mut dh_prev = vec![F::ZERO; hidden];
            self.decoder.backward_step(
                self.embedding.row(inputs[t]),
                h_prev,
                &dec_steps[t],
                &dh,
                &mut grads.decoder,
                &mut dx,
                &mut dh_prev,
            );
            let row = grads.embedding.row_mut(inputs[t]);
            for (slot, d) in row.iter_mut().zip(&dx) {
                *slot += *d;
            }
            dh = dh_prev;
        }

        // gradient on the code flows into the encoder
        for t in (0..indices.len()).rev() {
            let h_prev = if t == 0 {
                vec![F::ZERO; hidden]
            } else {
                enc_steps[t - 1].h.clone()
            };
            let mut dx = vec![F::ZERO; self.dims.embedding_dim];
            let mut dh_prev = vec![F::ZERO; hidden];
            self.encoder.backward_step(
                self.embedding.row(indices[t]),
                &h_prev,
                &enc_steps[t],
                &dh,
                &mut grads.encoder,
                &mut dx,
                &mut dh_prev,
            );
            let row = grads.embedding.row_mut(indices[t]);
            for (slot, d) in row.iter_mut().zip(&dx) {
                *slot += *d;
            }
            dh = dh_prev;
        }
        Ok((loss, targets.len()))
    }

    /// Summed token NLL / token count for a batch, forward only.
    pub fn batch_loss(&self, sequences: &[Vec<usize>]) -> Result<f64> {
        let mut loss = 0.0f64;
        let mut tokens = 0usize;
        for indices in sequences {
            let mut state = vec![F::ZERO; self.dims.hidden];
            for &idx in indices {
                state = self.encoder.step(self.embedding.row(idx), &state).h;
            }
            let mut inputs = vec![SOS];
            inputs.extend_from_slice(indices);
            let mut targets = indices.clone();
            targets.push(EOS);
            for (&input, &target) in inputs.iter().zip(&targets) {
                state = self.decoder.step(self.embedding.row(input), &state).h;
                let mut logits = self.out_b.row(0).to_vec();
                self.out_w.matvec_add(&state, &mut logits);
                loss -= log_softmax_at(&logits, target);
            }
            tokens += targets.len();
        }
        Ok(loss / tokens as f64)
    }
}

fn phrase_indices(tokens: &[String], vocab: &Vocabulary) -> Vec<usize> {
    tokens.iter().map(|t| vocab.get_or_unk(t)).collect()
}

/// Encode a phrase into its fixed-length code (f32 production entry point).
pub fn encode(
    tokens: &[String],
    params: &AutoencoderParams,
    vocab: &Vocabulary,
) -> Result<Vec<f32>> {
    params.encode_indices(&phrase_indices(tokens, vocab))
}

/// Greedy-decode a code vector into tokens.
pub fn decode(
    code: &[f32],
    params: &AutoencoderParams,
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<Vec<String>> {
    let indices = params.decode_indices(code, max_len)?;
    Ok(indices
        .into_iter()
        .map(|i| vocab.token(i).to_string())
        .collect())
}

/// Train the encoder-decoder to echo its input phrases: per-sequence SGD on
/// the summed token negative log-likelihood, teacher forcing on, seeded.
pub fn train_echo(
    phrases: &[Vec<String>],
    vocab: &Vocabulary,
    config: &EchoConfig,
    pretrained: Option<&EmbeddingTable>,
) -> Result<EchoReport> {
    if phrases.is_empty() {
        return Err(Error::domain("echo training set is empty"));
    }
    if config.epochs == 0 {
        return Err(Error::domain("epochs must be >= 1"));
    }
    let dims = Seq2SeqDims {
        vocab_size: vocab.len(),
        embedding_dim: config.embedding_dim,
        hidden: config.hidden,
    };
    let mut rng = Rng::new(config.seed);
    let mut params: AutoencoderParams = Seq2SeqParams::init(dims, vocab, pretrained, &mut rng)?;
    let mut grads: AutoencoderParams = Seq2SeqParams::zeros(dims);

    let sequences: Vec<Vec<usize>> = phrases
        .iter()
        .map(|tokens| phrase_indices(tokens, vocab))
        .collect();
    if sequences.iter().any(|s| s.is_empty()) {
        return Err(Error::domain("echo training set contains an empty phrase"));
    }

    let mut order: Vec<usize> = (0..sequences.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0f64;
        let mut token_sum = 0usize;
        for &i in &order {
            for block in grads.blocks_mut() {
                block.fill_zero();
            }
            let (loss, tokens) = params.backward_sequence(&sequences[i], &mut grads)?;
            loss_sum += loss;
            token_sum += tokens;
            clip_global_norm(&mut grads.blocks_mut(), config.clip_norm);
            let grad_blocks = grads.blocks();
            let grad_refs: Vec<&Mat<f32>> = grad_blocks.iter().map(|(_, m)| *m).collect();
            sgd_update(
                &mut params.blocks_mut(),
                &grad_refs,
                config.learning_rate,
            );
        }
        epoch_losses.push(loss_sum / token_sum as f64);
    }
    Ok(EchoReport {
        params,
        epoch_losses,
    })
}

/// Reconstruction quality over a phrase set: positional token accuracy
/// (denominator = target token count) and exact-match rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoStats {
    pub token_accuracy: f64,
    pub exact_match_rate: f64,
}

pub fn reconstruction_stats(
    phrases: &[Vec<String>],
    params: &AutoencoderParams,
    vocab: &Vocabulary,
    max_len: usize,
) -> Result<EchoStats> {
    if phrases.is_empty() {
        return Err(Error::domain("no phrases to reconstruct"));
    }
    let mut matched = 0usize;
    let mut total = 0usize;
    let mut exact = 0usize;
    for tokens in phrases {
        let target: Vec<String> = tokens
            .iter()
            .map(|t| vocab.token(vocab.get_or_unk(t)).to_string())
            .collect();
        let code = encode(tokens, params, vocab)?;
        let output = decode(&code, params, vocab, max_len.max(target.len() + 2))?;
        total += target.len();
        matched += target
            .iter()
            .zip(&output)
            .filter(|(a, b)| a == b)
            .count();
        if output == target {
            exact += 1;
        }
    }
    Ok(EchoStats {
        token_accuracy: matched as f64 / total as f64,
        exact_match_rate: exact as f64 / phrases.len() as f64,
    })
}

/// Encode every phrase and store it with its sentiment label.
pub fn build_store(
    phrases: &[Phrase],
    params: &AutoencoderParams,
    vocab: &Vocabulary,
) -> Result<LatentStore> {
    let mut entries = Vec::with_capacity(phrases.len());
    for phrase in phrases {
        let code = encode(&phrase.tokens, params, vocab)?;
        entries.push(LatentEntry {
            code,
            label: phrase.source_sentiment,
            phrase_tokens: phrase.tokens.clone(),
            source_id: phrase.source_id.clone(),
        });
    }
    Ok(LatentStore { entries })
}

/// The opposite-label entry with maximal cosine similarity to the query
/// code; ties break toward the earliest store position.
pub fn nearest_opposite<'s>(
    store: &'s LatentStore,
    query_code: &[f32],
    query_label: Sentiment,
) -> Result<&'s LatentEntry> {
    if query_code.iter().all(|&v| v == 0.0) {
        return Err(Error::domain("nearest_opposite: zero-norm query"));
    }
    let mut best: Option<(f64, &LatentEntry)> = None;
    for entry in &store.entries {
        if entry.label == query_label {
            continue;
        }
        let Ok(sim) = cosine_similarity(query_code, &entry.code) else {
            continue;
        };
        if best.as_ref().is_none_or(|(b, _)| sim > *b) {
            best = Some((sim, entry));
        }
    }
    best.map(|(_, e)| e)
        .ok_or_else(|| Error::retrieval("store holds no opposite-label entry"))
}

/// Full encoder-route phrase transformation: encode, retrieve the nearest
/// opposite, decode it. An empty decode falls back to the retrieved entry's
/// stored tokens, so the result is never empty.
pub fn transform_phrase_encoder(
    phrase: &Phrase,
    params: &AutoencoderParams,
    vocab: &Vocabulary,
    store: &LatentStore,
    max_decode_len: usize,
) -> Result<Vec<String>> {
    let code = encode(&phrase.tokens, params, vocab)?;
    let entry = nearest_opposite(store, &code, phrase.source_sentiment)?;
    let decoded = decode(&entry.code, params, vocab, max_decode_len)?;
    if decoded.is_empty() {
        Ok(entry.phrase_tokens.clone())
    } else {
        Ok(decoded)
    }
}

/// Phrase-level flip experiment: per length bucket (`len > n`), transform
/// each phrase and report the fraction whose classifier verdict (on the
/// phrase alone) differs from the verdict on the original phrase. Empty
/// buckets report `None`.
#[allow(clippy::too_many_arguments)]
pub fn autoencoder_flip_experiment(
    test_phrases: &[Phrase],
    params: &AutoencoderParams,
    ae_vocab: &Vocabulary,
    store: &LatentStore,
    classifier: &HanParams<f32>,
    cls_vocab: &Vocabulary,
    min_lengths: &[usize],
    max_decode_len: usize,
) -> Result<Vec<(usize, Option<f64>)>> {
    let classify = |tokens: &[String]| -> Result<Sentiment> {
        let indices: Vec<usize> = tokens.iter().map(|t| cls_vocab.get_or_unk(t)).collect();
        crate::classifier::predict(&vec![indices], classifier)
    };
    let mut results = Vec::with_capacity(min_lengths.len());
    for &n in min_lengths {
        let bucket = filter_by_min_length(test_phrases, n);
        if bucket.is_empty() {
            results.push((n, None));
            continue;
        }
        let mut flips = 0usize;
        for phrase in &bucket {
            let before = classify(&phrase.tokens)?;
            let transformed =
                transform_phrase_encoder(phrase, params, ae_vocab, store, max_decode_len)?;
            let after = classify(&transformed)?;
            if before != after {
                flips += 1;
            }
        }
        results.push((n, Some(flips as f64 / bucket.len() as f64)));
    }
    Ok(results)
}

/// Finite-difference gradient check for the echo model at tiny dimensions.
/// Same contract as the classifier check.
pub fn gradient_check(
    dims: Seq2SeqDims,
    sequences: &[Vec<usize>],
    seed: u64,
    corrupt_block: Option<&str>,
) -> Result<f64> {
    let vocab = crate::corpus::build_vocabulary(
        &[crate::corpus::Document {
            sentences: vec![vec!["w".to_string()]],
            label: Sentiment::Positive,
            source_id: "gc".into(),
        }],
        1,
        dims.vocab_size.saturating_sub(4).max(1),
    );
    let mut rng = Rng::new(seed);
    let params: Seq2SeqParams<f64> = Seq2SeqParams::init(dims, &vocab, None, &mut rng)?;
    let mut grads: Seq2SeqParams<f64> = Seq2SeqParams::zeros(dims);
    let mut total_tokens = 0usize;
    for seq in sequences {
        let (_, tokens) = params.backward_sequence(seq, &mut grads)?;
        total_tokens += tokens;
    }
    // batch_loss averages per token; scale gradients to match
    let scale = 1.0 / total_tokens as f64;
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
    let mut probe = params.clone();
    let n_blocks = probe.blocks().len();
    for b in 0..n_blocks {
        let len = probe.blocks()[b].1.data.len();
        for i in 0..len {
            let original = probe.blocks_mut()[b].data[i];
            probe.blocks_mut()[b].data[i] = original + step;
            let plus = probe.batch_loss(sequences)?;
            probe.blocks_mut()[b].data[i] = original - step;
            let minus = probe.batch_loss(sequences)?;
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

/// Checkpoint layout mirrors the classifier's: magic, version, dimensions
/// (vocab, embedding, hidden), then blocks in `blocks()` order.
pub fn save_checkpoint(params: &AutoencoderParams, path: &Path) -> Result<()> {
    let dims = [
        params.dims.vocab_size as u32,
        params.dims.embedding_dim as u32,
        params.dims.hidden as u32,
    ];
    let blocks = params.blocks();
    let refs: Vec<&Mat<f32>> = blocks.iter().map(|(_, m)| *m).collect();
    write_checkpoint(path, CHECKPOINT_MAGIC, &dims, &refs)
}

pub fn load_checkpoint(path: &Path) -> Result<AutoencoderParams> {
    let mut reader = open_reader(path)?;
    let dims = read_header(&mut reader, CHECKPOINT_MAGIC, path)?;
    if dims.len() != 3 {
        return Err(Error::format(format!(
            "{}: expected 3 dimensions, found {}",
            path.display(),
            dims.len()
        )));
    }
    let s_dims = Seq2SeqDims {
        vocab_size: dims[0] as usize,
        embedding_dim: dims[1] as usize,
        hidden: dims[2] as usize,
    };
    let mut params = AutoencoderParams::zeros(s_dims);
    let names: Vec<String> = params.blocks().iter().map(|(n, _)| n.clone()).collect();
    for (block, name) in params.blocks_mut().into_iter().zip(&names) {
        read_block(&mut reader, block, name, path)?;
    }
    expect_eof(&mut reader, path)?;
    Ok(params)
}

/// Store file: magic, version, entry count and code dimension, then one
/// record per entry (label byte, code as little-endian f32, token list as
/// length-prefixed UTF-8).
pub fn save_store(store: &LatentStore, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(STORE_MAGIC)?;
    w.write_all(&1u32.to_le_bytes())?;
    w.write_all(&(store.entries.len() as u32).to_le_bytes())?;
    let code_dim = store.entries.first().map_or(0, |e| e.code.len());
    w.write_all(&(code_dim as u32).to_le_bytes())?;
    for entry in &store.entries {
        if entry.code.len() != code_dim {
            return Err(Error::domain("store entries have inconsistent code sizes"));
        }
        w.write_all(&[entry.label.index() as u8])?;
        for v in &entry.code {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(entry.phrase_tokens.len() as u32).to_le_bytes())?;
        for token in &entry.phrase_tokens {
            let bytes = token.as_bytes();
            w.write_all(&(bytes.len() as u32).to_le_bytes())?;
            w.write_all(bytes)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_store(path: &Path) -> Result<LatentStore> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| Error::format(format!("{}: truncated header", path.display())))?;
    if &magic != STORE_MAGIC {
        return Err(Error::format(format!("{}: bad store magic", path.display())));
    }
    let version = read_u32(&mut r, path)?;
    if version != 1 {
        return Err(Error::format(format!(
            "{}: unsupported store version {version}",
            path.display()
        )));
    }
    let count = read_u32(&mut r, path)? as usize;
    let code_dim = read_u32(&mut r, path)? as usize;
    let mut entries = Vec::with_capacity(count);
    for i in 0..count {
        let mut label_byte = [0u8; 1];
        r.read_exact(&mut label_byte)
            .map_err(|_| Error::format(format!("{}: truncated entry {i}", path.display())))?;
        let label = Sentiment::from_index(label_byte[0] as usize).ok_or_else(|| {
            Error::format(format!("{}: entry {i}: bad label byte", path.display()))
        })?;
        let mut code = vec![0f32; code_dim];
        let mut buf = vec![0u8; code_dim * 4];
        r.read_exact(&mut buf)
            .map_err(|_| Error::format(format!("{}: truncated entry {i}", path.display())))?;
        for (slot, chunk) in code.iter_mut().zip(buf.chunks_exact(4)) {
            *slot = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        }
        let token_count = read_u32(&mut r, path)? as usize;
        let mut phrase_tokens = Vec::with_capacity(token_count);
        for _ in 0..token_count {
            let len = read_u32(&mut r, path)? as usize;
            let mut bytes = vec![0u8; len];
            r.read_exact(&mut bytes)
                .map_err(|_| Error::format(format!("{}: truncated entry {i}", path.display())))?;
            phrase_tokens.push(String::from_utf8(bytes).map_err(|_| {
                Error::format(format!("{}: entry {i}: invalid UTF-8 token", path.display()))
            })?);
        }
        entries.push(LatentEntry {
            code,
            label,
            phrase_tokens,
            source_id: format!("store/{i}"),
        });
    }
    expect_eof(&mut r, path)?;
    Ok(LatentStore { entries })
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::format(format!("{}: truncated", path.display())))?;
    Ok(u32::from_le_bytes(b))
}
