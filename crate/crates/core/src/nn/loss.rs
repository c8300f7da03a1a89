use crate::error::{ensure_len, Error, Result};
use crate::scalar::Scalar;

/// Max-shifted softmax. The normalizer is summed in sorted order, so
/// permuting the input permutes the output exactly.
pub fn softmax<T: Scalar>(z: &[T]) -> Result<Vec<T>> {
    let max = z
        .iter()
        .copied()
        .reduce(T::max)
        .ok_or(Error::Empty("softmax input"))?;
    let mut out: Vec<T> = z.iter().map(|&v| (v - max).exp()).collect();
    let mut sorted = out.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let total: T = sorted.into_iter().sum();
    out.iter_mut().for_each(|v| *v /= total);
    Ok(out)
}

/// Vector-Jacobian product of softmax: given `p = softmax(z)` and `g = dL/dp`,
/// returns `dL/dz = p * (g - <p, g>)`.
pub fn softmax_backward<T: Scalar>(p: &[T], g: &[T]) -> Vec<T> {
    let dot: T = p.iter().zip(g).map(|(a, b)| *a * *b).sum();
    p.iter().zip(g).map(|(pi, gi)| *pi * (*gi - dot)).collect()
}

/// Cross-entropy of softmax output `p` against one-hot `y`. Returns the loss
/// and the gradient with respect to the logits that produced `p`, `p - y`.
pub fn cross_entropy_loss<T: Scalar>(p: &[T], y: &[T]) -> Result<(T, Vec<T>)> {
    ensure_len(p.len(), y.len(), "target length")?;
    let hot: Vec<usize> = y.iter().enumerate().filter(|(_, v)| **v == T::one()).map(|(i, _)| i).collect();
    let others_zero = y.iter().all(|v| *v == T::zero() || *v == T::one());
    if hot.len() != 1 || !others_zero {
        return Err(Error::BadTarget(y.iter().map(|v| v.to_string()).collect()));
    }
    let loss = -p[hot[0]].ln();
    let grad = p.iter().zip(y).map(|(a, b)| *a - *b).collect();
    Ok((loss, grad))
}
