//! Plain serde records mirroring the network and optimizer. Weights are stored
//! as nested decimal arrays so the JSON is readable without this crate.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Activation, AdamConfig, AdamState, DenseNet, Gradients, Layer, LayerGrad};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LayerRecord<T> {
    pub weights: Vec<Vec<T>>,
    pub bias: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NetRecord<T> {
    pub dims: Vec<usize>,
    pub activations: Vec<Activation>,
    pub layers: Vec<LayerRecord<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AdamRecord<T> {
    pub config: AdamConfig,
    pub t: u64,
    pub m: Vec<LayerRecord<T>>,
    pub v: Vec<LayerRecord<T>>,
}

fn layer_record<T: Scalar>(weights: &Array2<T>, bias: &Array1<T>) -> LayerRecord<T> {
    LayerRecord {
        weights: weights.rows().into_iter().map(|r| r.to_vec()).collect(),
        bias: bias.to_vec(),
    }
}

fn to_arrays<T: Scalar>(rec: &LayerRecord<T>) -> Result<(Array2<T>, Array1<T>)> {
    let rows = rec.weights.len();
    let cols = rec.weights.first().map_or(0, Vec::len);
    if rec.weights.iter().any(|r| r.len() != cols) {
        return Err(Error::Config("ragged weight matrix in checkpoint".into()));
    }
    let flat: Vec<T> = rec.weights.iter().flatten().copied().collect();
    let w = Array2::from_shape_vec((rows, cols), flat).map_err(|e| Error::Config(e.to_string()))?;
    Ok((w, Array1::from(rec.bias.clone())))
}

impl<T: Scalar> From<&DenseNet<T>> for NetRecord<T> {
    fn from(net: &DenseNet<T>) -> Self {
        NetRecord {
            dims: net.dims(),
            activations: net.layers().iter().map(|l| l.activation).collect(),
            layers: net.layers().iter().map(|l| layer_record(&l.weights, &l.bias)).collect(),
        }
    }
}

impl<T: Scalar> NetRecord<T> {
    pub fn to_net(&self) -> Result<DenseNet<T>> {
        if self.activations.len() != self.layers.len() {
            return Err(Error::Config("activation count does not match layer count".into()));
        }
        let layers = self
            .layers
            .iter()
            .zip(&self.activations)
            .map(|(rec, &activation)| {
                let (weights, bias) = to_arrays(rec)?;
                Ok(Layer { weights, bias, activation })
            })
            .collect::<Result<Vec<_>>>()?;
        let net = DenseNet::from_layers(layers)?;
        if net.dims() != self.dims {
            return Err(Error::Config(format!(
                "declared dims {:?} disagree with weights {:?}",
                self.dims,
                net.dims()
            )));
        }
        Ok(net)
    }
}

fn grads_record<T: Scalar>(g: &Gradients<T>) -> Vec<LayerRecord<T>> {
    g.layers.iter().map(|l| layer_record(&l.weights, &l.bias)).collect()
}

fn grads_from<T: Scalar>(recs: &[LayerRecord<T>]) -> Result<Gradients<T>> {
    let layers = recs
        .iter()
        .map(|r| to_arrays(r).map(|(weights, bias)| LayerGrad { weights, bias }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Gradients { layers })
}

impl<T: Scalar> From<&AdamState<T>> for AdamRecord<T> {
    fn from(s: &AdamState<T>) -> Self {
        AdamRecord {
            config: s.config,
            t: s.t,
            m: grads_record(&s.m),
            v: grads_record(&s.v),
        }
    }
}

impl<T: Scalar> AdamRecord<T> {
    pub fn to_state(&self, net: &DenseNet<T>) -> Result<AdamState<T>> {
        let state = AdamState {
            m: grads_from(&self.m)?,
            v: grads_from(&self.v)?,
            t: self.t,
            config: self.config,
        };
        if !state.m.matches_shape(net) || !state.v.matches_shape(net) {
            return Err(Error::Config("optimizer moments do not match the network".into()));
        }
        Ok(state)
    }
}
