use serde::{Deserialize, Serialize};

use super::{DenseNet, Gradients};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        Ok(())
    }
}

/// First and second moment estimates for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub m: Gradients<T>,
    pub v: Gradients<T>,
    pub t: u64,
    pub config: AdamConfig,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(net: &DenseNet<T>, config: AdamConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
            t: 0,
            config,
        })
    }
}

/// One bias-corrected Adam update of `net` in place.
pub fn adam_step<T: Scalar>(net: &mut DenseNet<T>, grads: &Gradients<T>, state: &mut AdamState<T>) -> Result<()> {
    if !grads.matches_shape(net) || !state.m.matches_shape(net) {
        return Err(Error::Config("gradient or optimizer shape does not match the network".into()));
    }
    state.t += 1;
    let c = state.config;
    let (b1, b2) = (T::of(c.beta1), T::of(c.beta2));
    let (one_b1, one_b2) = (T::one() - b1, T::one() - b2);
    let t = i32::try_from(state.t).unwrap_or(i32::MAX);
    let step = T::of(c.lr) / (T::one() - b1.powi(t));
    let v_corr = T::one() / (T::one() - b2.powi(t));
    let eps = T::of(c.eps);

    let update = |p: &mut T, g: T, m: &mut T, v: &mut T| {
        *m = b1 * *m + one_b1 * g;
        *v = b2 * *v + one_b2 * g * g;
        *p -= step * *m / ((*v * v_corr).sqrt() + eps);
    };
    for (((layer, g), m), v) in net
        .layers_mut()
        .iter_mut()
        .zip(&grads.layers)
        .zip(&mut state.m.layers)
        .zip(&mut state.v.layers)
    {
        ndarray::Zip::from(&mut layer.weights)
            .and(&g.weights)
            .and(&mut m.weights)
            .and(&mut v.weights)
            .for_each(|p, &g, m, v| update(p, g, m, v));
        ndarray::Zip::from(&mut layer.bias)
            .and(&g.bias)
            .and(&mut m.bias)
            .and(&mut v.bias)
            .for_each(|p, &g, m, v| update(p, g, m, v));
    }
    Ok(())
}
