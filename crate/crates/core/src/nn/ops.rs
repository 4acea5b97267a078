//! Elementwise activations, stable softmax and gradient clipping.

use super::mat::{Mat, Real};

#[inline]
pub fn sigmoid<F: Real>(x: F) -> F {
    F::ONE / (F::ONE + (-x).exp())
}

/// Numerically stable softmax: scores are shifted by their maximum and
/// accumulated in f64 before normalizing.
pub fn softmax<F: Real>(scores: &[F]) -> Vec<F> {
    assert!(!scores.is_empty(), "softmax over empty scores");
    let max = scores
        .iter()
        .map(|s| s.to_f64())
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s.to_f64() - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| F::from_f64(e / sum)).collect()
}

/// log(softmax(scores)[target]) computed without forming the full softmax.
pub fn log_softmax_at<F: Real>(scores: &[F], target: usize) -> f64 {
    let max = scores
        .iter()
        .map(|s| s.to_f64())
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = scores.iter().map(|s| (s.to_f64() - max).exp()).sum();
    (scores[target].to_f64() - max) - sum.ln()
}

/// Global-norm gradient clipping across every parameter block.
/// Returns the pre-clip norm.
pub fn clip_global_norm<F: Real>(blocks: &mut [&mut Mat<F>], max_norm: f64) -> f64 {
    let mut sq = 0.0f64;
    for b in blocks.iter() {
        for v in &b.data {
            let x = v.to_f64();
            sq += x * x;
        }
    }
    let norm = sq.sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = F::from_f64(max_norm / norm);
        for b in blocks.iter_mut() {
            for v in b.data.iter_mut() {
                *v *= scale;
            }
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_sums_to_one() {
        let w = softmax(&[1.0f64, 2.0, 3.0, -5.0]);
        let sum: f64 = w.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn softmax_handles_large_scores() {
        let w = softmax(&[1000.0f32, 1000.0]);
        assert!((w[0] - 0.5).abs() < 1e-6);
        assert!(w.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn log_softmax_consistent_with_softmax() {
        let scores = [0.3f64, -1.2, 2.0];
        let w = softmax(&scores);
        for (t, wt) in w.iter().enumerate() {
            assert!((log_softmax_at(&scores, t) - wt.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn clip_rescales_to_max_norm() {
        let mut a = Mat::from_rows(vec![vec![3.0f64, 4.0]]);
        let pre = clip_global_norm(&mut [&mut a], 1.0);
        assert!((pre - 5.0).abs() < 1e-12);
        let post: f64 = a.data.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((post - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clip_leaves_small_gradients_alone() {
        let mut a = Mat::from_rows(vec![vec![0.3f64, 0.4]]);
        clip_global_norm(&mut [&mut a], 1.0);
        assert_eq!(a.row(0), &[0.3, 0.4]);
    }
}
