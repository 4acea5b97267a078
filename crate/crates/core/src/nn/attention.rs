//! Attention layer used at both the word and the sentence level.
//!
//! Each annotation h_t is passed through a one-layer MLP
//! u_t = tanh(W h_t + b); its score against a learned context vector c is
//! softmax-normalized into the attention weight, and the layer output is the
//! weight-averaged annotation.

use super::mat::{axpy, dot, Mat, Real};
use super::ops::softmax;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionLayer<F: Real> {
    pub proj: Mat<F>,    // attn_dim x annotation_dim
    pub bias: Mat<F>,    // 1 x attn_dim
    pub context: Mat<F>, // 1 x attn_dim
}

#[derive(Debug, Clone)]
pub struct AttentionRun<F: Real> {
    pub hidden: Vec<Vec<F>>, // tanh projections u_t
    pub weights: Vec<F>,     // softmax over scores
    pub pooled: Vec<F>,      // sum_t weight_t * annotation_t
}

impl<F: Real> AttentionLayer<F> {
    pub fn init(annotation_dim: usize, attn_dim: usize, rng: &mut Rng) -> Self {
        let pl = 1.0 / (annotation_dim as f64).sqrt();
        let cl = 1.0 / (attn_dim as f64).sqrt();
        AttentionLayer {
            proj: Mat::uniform(attn_dim, annotation_dim, pl, rng),
            bias: Mat::zeros(1, attn_dim),
            context: Mat::uniform(1, attn_dim, cl, rng),
        }
    }

    pub fn zeros(annotation_dim: usize, attn_dim: usize) -> Self {
        AttentionLayer {
            proj: Mat::zeros(attn_dim, annotation_dim),
            bias: Mat::zeros(1, attn_dim),
            context: Mat::zeros(1, attn_dim),
        }
    }

    pub fn cast<G: Real>(&self) -> AttentionLayer<G> {
        AttentionLayer {
            proj: self.proj.cast(),
            bias: self.bias.cast(),
            context: self.context.cast(),
        }
    }

    pub fn blocks(&self, prefix: &str) -> Vec<(String, &Mat<F>)> {
        vec![
            (format!("{prefix}.proj"), &self.proj),
            (format!("{prefix}.bias"), &self.bias),
            (format!("{prefix}.context"), &self.context),
        ]
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Mat<F>> {
        vec![&mut self.proj, &mut self.bias, &mut self.context]
    }

    /// Compute weights over the annotations. `annotations` must be non-empty.
    pub fn run(&self, annotations: &[Vec<F>]) -> AttentionRun<F> {
        assert!(!annotations.is_empty(), "attention over empty annotations");
        let attn_dim = self.proj.rows;
        let mut hidden = Vec::with_capacity(annotations.len());
        let mut scores = Vec::with_capacity(annotations.len());
        for a in annotations {
            let mut u = self.bias.row(0).to_vec();
            self.proj.matvec_add(a, &mut u);
            for v in u.iter_mut() {
                *v = v.tanh();
            }
            scores.push(dot(&u, self.context.row(0)));
            hidden.push(u);
        }
        let weights = softmax(&scores);
        let ann_dim = annotations[0].len();
        let mut pooled = vec![F::ZERO; ann_dim];
        for (w, a) in weights.iter().zip(annotations) {
            axpy(*w, a, &mut pooled);
        }
        debug_assert_eq!(hidden[0].len(), attn_dim);
        AttentionRun {
            hidden,
            weights,
            pooled,
        }
    }

    /// Backward through `run`: `d_pooled` is the gradient on the pooled
    /// output. Parameter gradients accumulate into `grads`; annotation
    /// gradients accumulate into `d_annotations`.
    pub fn backward_run(
        &self,
        annotations: &[Vec<F>],
        run: &AttentionRun<F>,
        d_pooled: &[F],
        grads: &mut AttentionLayer<F>,
        d_annotations: &mut [Vec<F>],
    ) {
        let t = annotations.len();
        // direct annotation term and weight gradients
        let mut d_weights = vec![F::ZERO; t];
        for (i, dw) in d_weights.iter_mut().enumerate() {
            *dw = dot(d_pooled, &annotations[i]);
            axpy(run.weights[i], d_pooled, &mut d_annotations[i]);
        }
        // softmax jacobian: ds_i = w_i * (dw_i - sum_k w_k dw_k)
        let mut inner = F::ZERO;
        for (w, dw) in run.weights.iter().zip(&d_weights) {
            inner += *w * *dw;
        }
        for i in 0..t {
            let d_score = run.weights[i] * (d_weights[i] - inner);
            // score_i = u_i . context
            axpy(d_score, &run.hidden[i], grads.context.row_mut(0));
            let mut du: Vec<F> = self.context.row(0).to_vec();
            for v in du.iter_mut() {
                *v *= d_score;
            }
            // through tanh
            for (j, v) in du.iter_mut().enumerate() {
                *v *= F::ONE - run.hidden[i][j] * run.hidden[i][j];
            }
            grads.proj.add_outer(&du, &annotations[i]);
            axpy(F::ONE, &du, grads.bias.row_mut(0));
            self.proj.matvec_t_add(&du, &mut d_annotations[i]);
        }
    }
}
