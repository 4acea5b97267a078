//! Gated recurrent unit, forward and hand-derived backward.
//!
//! Gate equations:
//!   r = sigmoid(W_r x + U_r h + b_r)
//!   z = sigmoid(W_z x + U_z h + b_z)
//!   n = tanh(W_n x + U_n (r * h) + b_n)
//!   h' = z * h + (1 - z) * n

use super::mat::{axpy, Mat, Real};
use super::ops::sigmoid;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct GruCell<F: Real> {
    pub input_size: usize,
    pub hidden_size: usize,
    pub w_r: Mat<F>,
    pub u_r: Mat<F>,
    pub b_r: Mat<F>,
    pub w_z: Mat<F>,
    pub u_z: Mat<F>,
    pub b_z: Mat<F>,
    pub w_n: Mat<F>,
    pub u_n: Mat<F>,
    pub b_n: Mat<F>,
}

/// Per-step activations needed by the backward pass.
#[derive(Debug, Clone)]
pub struct GruStep<F: Real> {
    pub r: Vec<F>,
    pub z: Vec<F>,
    pub n: Vec<F>,
    pub rh: Vec<F>,
    pub h: Vec<F>,
}

impl<F: Real> GruCell<F> {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        GruCell {
            input_size,
            hidden_size,
            w_r: Mat::zeros(hidden_size, input_size),
            u_r: Mat::zeros(hidden_size, hidden_size),
            b_r: Mat::zeros(1, hidden_size),
            w_z: Mat::zeros(hidden_size, input_size),
            u_z: Mat::zeros(hidden_size, hidden_size),
            b_z: Mat::zeros(1, hidden_size),
            w_n: Mat::zeros(hidden_size, input_size),
            u_n: Mat::zeros(hidden_size, hidden_size),
            b_n: Mat::zeros(1, hidden_size),
        }
    }

    /// Weights uniform in +-1/sqrt(fan_in), biases zero.
    pub fn init(input_size: usize, hidden_size: usize, rng: &mut Rng) -> Self {
        let wl = 1.0 / (input_size as f64).sqrt();
        let ul = 1.0 / (hidden_size as f64).sqrt();
        GruCell {
            input_size,
            hidden_size,
            w_r: Mat::uniform(hidden_size, input_size, wl, rng),
            u_r: Mat::uniform(hidden_size, hidden_size, ul, rng),
            b_r: Mat::zeros(1, hidden_size),
            w_z: Mat::uniform(hidden_size, input_size, wl, rng),
            u_z: Mat::uniform(hidden_size, hidden_size, ul, rng),
            b_z: Mat::zeros(1, hidden_size),
            w_n: Mat::uniform(hidden_size, input_size, wl, rng),
            u_n: Mat::uniform(hidden_size, hidden_size, ul, rng),
            b_n: Mat::zeros(1, hidden_size),
        }
    }

    pub fn blocks(&self, prefix: &str) -> Vec<(String, &Mat<F>)> {
        vec![
            (format!("{prefix}.w_r"), &self.w_r),
            (format!("{prefix}.u_r"), &self.u_r),
            (format!("{prefix}.b_r"), &self.b_r),
            (format!("{prefix}.w_z"), &self.w_z),
            (format!("{prefix}.u_z"), &self.u_z),
            (format!("{prefix}.b_z"), &self.b_z),
            (format!("{prefix}.w_n"), &self.w_n),
            (format!("{prefix}.u_n"), &self.u_n),
            (format!("{prefix}.b_n"), &self.b_n),
        ]
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut Mat<F>> {
        vec![
            &mut self.w_r,
            &mut self.u_r,
            &mut self.b_r,
            &mut self.w_z,
            &mut self.u_z,
            &mut self.b_z,
            &mut self.w_n,
            &mut self.u_n,
            &mut self.b_n,
        ]
    }

    pub fn cast<G: Real>(&self) -> GruCell<G> {
        GruCell {
            input_size: self.input_size,
            hidden_size: self.hidden_size,
            w_r: self.w_r.cast(),
            u_r: self.u_r.cast(),
            b_r: self.b_r.cast(),
            w_z: self.w_z.cast(),
            u_z: self.u_z.cast(),
            b_z: self.b_z.cast(),
            w_n: self.w_n.cast(),
            u_n: self.u_n.cast(),
            b_n: self.b_n.cast(),
        }
    }

    /// One step. `h_prev` has hidden_size entries.
    pub fn step(&self, x: &[F], h_prev: &[F]) -> GruStep<F> {
        let h = self.hidden_size;
        let mut a_r = self.b_r.row(0).to_vec();
        self.w_r.matvec_add(x, &mut a_r);
        self.u_r.matvec_add(h_prev, &mut a_r);
        let r: Vec<F> = a_r.into_iter().map(sigmoid).collect();

        let mut a_z = self.b_z.row(0).to_vec();
        self.w_z.matvec_add(x, &mut a_z);
        self.u_z.matvec_add(h_prev, &mut a_z);
        let z: Vec<F> = a_z.into_iter().map(sigmoid).collect();

        let rh: Vec<F> = r.iter().zip(h_prev).map(|(&ri, &hi)| ri * hi).collect();
        let mut a_n = self.b_n.row(0).to_vec();
        self.w_n.matvec_add(x, &mut a_n);
        self.u_n.matvec_add(&rh, &mut a_n);
        let n: Vec<F> = a_n.into_iter().map(|v| v.tanh()).collect();

        let mut h_new = vec![F::ZERO; h];
        for i in 0..h {
            h_new[i] = z[i] * h_prev[i] + (F::ONE - z[i]) * n[i];
        }
        GruStep { r, z, n, rh, h: h_new }
    }

    /// Backward through one step. Accumulates parameter gradients into
    /// `grads`, input gradient into `dx` and previous-state gradient into
    /// `dh_prev`.
    #[allow(clippy::too_many_arguments)]
    pub fn backward_step(
        &self,
        x: &[F],
        h_prev: &[F],
        step: &GruStep<F>,
        dh: &[F],
        grads: &mut GruCell<F>,
        dx: &mut [F],
        dh_prev: &mut [F],
    ) {
        let hs = self.hidden_size;
        let mut dn = vec![F::ZERO; hs];
        let mut da_z = vec![F::ZERO; hs];
        for i in 0..hs {
            let dz = dh[i] * (h_prev[i] - step.n[i]);
            dn[i] = dh[i] * (F::ONE - step.z[i]);
            dh_prev[i] += dh[i] * step.z[i];
            da_z[i] = dz * step.z[i] * (F::ONE - step.z[i]);
        }

        // candidate gate
        let mut da_n = vec![F::ZERO; hs];
        for i in 0..hs {
            da_n[i] = dn[i] * (F::ONE - step.n[i] * step.n[i]);
        }
        grads.w_n.add_outer(&da_n, x);
        grads.u_n.add_outer(&da_n, &step.rh);
        axpy(F::ONE, &da_n, grads.b_n.row_mut(0));
        self.w_n.matvec_t_add(&da_n, dx);
        let mut drh = vec![F::ZERO; hs];
        self.u_n.matvec_t_add(&da_n, &mut drh);
        let mut da_r = vec![F::ZERO; hs];
        for i in 0..hs {
            let dr = drh[i] * h_prev[i];
            dh_prev[i] += drh[i] * step.r[i];
            da_r[i] = dr * step.r[i] * (F::ONE - step.r[i]);
        }

        // update gate
        grads.w_z.add_outer(&da_z, x);
        grads.u_z.add_outer(&da_z, h_prev);
        axpy(F::ONE, &da_z, grads.b_z.row_mut(0));
        self.w_z.matvec_t_add(&da_z, dx);
        self.u_z.matvec_t_add(&da_z, dh_prev);

        // reset gate
        grads.w_r.add_outer(&da_r, x);
        grads.u_r.add_outer(&da_r, h_prev);
        axpy(F::ONE, &da_r, grads.b_r.row_mut(0));
        self.w_r.matvec_t_add(&da_r, dx);
        self.u_r.matvec_t_add(&da_r, dh_prev);
    }
}

/// Bidirectional wrapper: forward and backward cells whose final states are
/// concatenated per position (forward first).
#[derive(Debug, Clone, PartialEq)]
pub struct BiGru<F: Real> {
    pub fwd: GruCell<F>,
    pub bwd: GruCell<F>,
}

impl<F: Real> BiGru<F> {
    pub fn init(input_size: usize, hidden_size: usize, rng: &mut Rng) -> Self {
        BiGru {
            fwd: GruCell::init(input_size, hidden_size, rng),
            bwd: GruCell::init(input_size, hidden_size, rng),
        }
    }

    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        BiGru {
            fwd: GruCell::zeros(input_size, hidden_size),
            bwd: GruCell::zeros(input_size, hidden_size),
        }
    }

    pub fn cast<G: Real>(&self) -> BiGru<G> {
        BiGru {
            fwd: self.fwd.cast(),
            bwd: self.bwd.cast(),
        }
    }

    /// Run over a sequence of input vectors; returns per-direction step
    /// caches and the concatenated annotations.
    pub fn run(&self, xs: &[Vec<F>]) -> BiGruRun<F> {
        let h = self.fwd.hidden_size;
        let t = xs.len();
        let mut fwd_steps = Vec::with_capacity(t);
        let mut state = vec![F::ZERO; h];
        for x in xs {
            let step = self.fwd.step(x, &state);
            state = step.h.clone();
            fwd_steps.push(step);
        }
        let mut bwd_steps: Vec<GruStep<F>> = Vec::with_capacity(t);
        let mut state = vec![F::ZERO; h];
        for x in xs.iter().rev() {
            let step = self.bwd.step(x, &state);
            state = step.h.clone();
            bwd_steps.push(step);
        }
        bwd_steps.reverse(); // index by position, not by visit order

        let mut annotations = Vec::with_capacity(t);
        for i in 0..t {
            let mut a = Vec::with_capacity(2 * h);
            a.extend_from_slice(&fwd_steps[i].h);
            a.extend_from_slice(&bwd_steps[i].h);
            annotations.push(a);
        }
        BiGruRun {
            fwd_steps,
            bwd_steps,
            annotations,
        }
    }

    /// Backward through `run`. `d_annotations[i]` is the gradient on the
    /// concatenated annotation for position i. Accumulates into `grads` and
    /// returns gradients on the input vectors.
    pub fn backward_run(
        &self,
        xs: &[Vec<F>],
        run: &BiGruRun<F>,
        d_annotations: &[Vec<F>],
        grads: &mut BiGru<F>,
    ) -> Vec<Vec<F>> {
        let h = self.fwd.hidden_size;
        let t = xs.len();
        let mut dxs = vec![vec![F::ZERO; self.fwd.input_size]; t];

        // forward direction: walk back from the last step
        let mut dh = vec![F::ZERO; h];
        for i in (0..t).rev() {
            for j in 0..h {
                dh[j] += d_annotations[i][j];
            }
            let h_prev = if i == 0 {
                vec![F::ZERO; h]
            } else {
                run.fwd_steps[i - 1].h.clone()
            };
            let mut dh_prev = vec![F::ZERO; h];
            self.fwd.backward_step(
                &xs[i],
                &h_prev,
                &run.fwd_steps[i],
                &dh,
                &mut grads.fwd,
                &mut dxs[i],
                &mut dh_prev,
            );
            dh = dh_prev;
        }

        // backward direction: its "previous" step is position i+1
        let mut dh = vec![F::ZERO; h];
        for i in 0..t {
            for j in 0..h {
                dh[j] += d_annotations[i][h + j];
            }
            let h_prev = if i + 1 == t {
                vec![F::ZERO; h]
            } else {
                run.bwd_steps[i + 1].h.clone()
            };
            let mut dh_prev = vec![F::ZERO; h];
            self.bwd.backward_step(
                &xs[i],
                &h_prev,
                &run.bwd_steps[i],
                &dh,
                &mut grads.bwd,
                &mut dxs[i],
                &mut dh_prev,
            );
            dh = dh_prev;
        }
        dxs
    }
}

#[derive(Debug, Clone)]
pub struct BiGruRun<F: Real> {
    pub fwd_steps: Vec<GruStep<F>>,
    pub bwd_steps: Vec<GruStep<F>>,
    pub annotations: Vec<Vec<F>>,
}
