//! Optimizers: Adam for the classifier, plain SGD for the echo model.

use super::mat::{Mat, Real};

pub struct Adam<F: Real> {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<Mat<F>>,
    v: Vec<Mat<F>>,
}

impl<F: Real> Adam<F> {
    pub fn new(learning_rate: f64, param_blocks: &[&Mat<F>]) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: param_blocks
                .iter()
                .map(|b| Mat::zeros(b.rows, b.cols))
                .collect(),
            v: param_blocks
                .iter()
                .map(|b| Mat::zeros(b.rows, b.cols))
                .collect(),
        }
    }

    /// One update. `params` and `grads` must list blocks in the same order
    /// as at construction.
    pub fn update(&mut self, params: &mut [&mut Mat<F>], grads: &[&Mat<F>]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.step += 1;
        let b1 = F::from_f64(self.beta1);
        let b2 = F::from_f64(self.beta2);
        let one_m_b1 = F::from_f64(1.0 - self.beta1);
        let one_m_b2 = F::from_f64(1.0 - self.beta2);
        let bias1 = F::from_f64(1.0 / (1.0 - self.beta1.powi(self.step as i32)));
        let bias2 = F::from_f64(1.0 / (1.0 - self.beta2.powi(self.step as i32)));
        let lr = F::from_f64(self.learning_rate);
        let eps = F::from_f64(self.epsilon);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            debug_assert_eq!(p.data.len(), g.data.len());
            for i in 0..p.data.len() {
                let gi = g.data[i];
                m.data[i] = b1 * m.data[i] + one_m_b1 * gi;
                v.data[i] = b2 * v.data[i] + one_m_b2 * gi * gi;
                let m_hat = m.data[i] * bias1;
                let v_hat = v.data[i] * bias2;
                p.data[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

/// Plain stochastic gradient descent.
pub fn sgd_update<F: Real>(params: &mut [&mut Mat<F>], grads: &[&Mat<F>], learning_rate: f64) {
    let lr = F::from_f64(learning_rate);
    for (p, g) in params.iter_mut().zip(grads) {
        debug_assert_eq!(p.data.len(), g.data.len());
        for i in 0..p.data.len() {
            p.data[i] -= lr * g.data[i];
        }
    }
}
