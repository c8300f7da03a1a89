use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    /// `[out x in]`
    pub weights: Array2<T>,
    pub bias: Array1<T>,
    pub activation: Activation,
}

impl<T: Scalar> Layer<T> {
    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }
}

/// A multilayer perceptron. Hidden layers use ReLU and the last layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet<T> {
    layers: Vec<Layer<T>>,
}

/// Activations cached by a forward pass over a batch (one row per input).
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    pub input: Array2<T>,
    pub pre: Vec<Array2<T>>,
    pub post: Vec<Array2<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad<T> {
    pub weights: Array2<T>,
    pub bias: Array1<T>,
}

/// Parameter gradients laid out like the network they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<LayerGrad<T>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(net: &DenseNet<T>) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    bias: Array1::zeros(l.bias.raw_dim()),
                })
                .collect(),
        }
    }

    pub fn scale(&mut self, factor: T) {
        for l in &mut self.layers {
            l.weights.mapv_inplace(|w| w * factor);
            l.bias.mapv_inplace(|b| b * factor);
        }
    }

    pub fn add_assign(&mut self, other: &Gradients<T>) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights;
            a.bias += &b.bias;
        }
    }

    /// Flattened in the same order as [`DenseNet::param`].
    pub fn to_flat(&self) -> Vec<T> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }

    pub fn matches_shape(&self, net: &DenseNet<T>) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.weights.dim() == l.weights.dim() && g.bias.len() == l.bias.len())
    }
}

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::Config(format!("need at least input and output sizes, got {dims:?}")));
    }
    if dims.contains(&0) {
        return Err(Error::Config(format!("layer sizes must be positive, got {dims:?}")));
    }
    Ok(())
}

/// He-initialized network: weights ~ N(0, 2 / fan_in), zero biases. The same
/// seed always produces the same parameters.
pub fn init_net<T: Scalar>(dims: &[usize], seed: u64) -> Result<DenseNet<T>> {
    validate_dims(dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_layers = dims.len() - 1;
    let layers = dims
        .windows(2)
        .enumerate()
        .map(|(idx, w)| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("valid stddev");
            let weights = Array2::from_shape_simple_fn((fan_out, fan_in), || T::of(normal.sample(&mut rng)));
            Layer {
                weights,
                bias: Array1::zeros(fan_out),
                activation: if idx + 1 == n_layers {
                    Activation::Identity
                } else {
                    Activation::Relu
                },
            }
        })
        .collect();
    Ok(DenseNet { layers })
}

impl<T: Scalar> DenseNet<T> {
    pub fn from_layers(layers: Vec<Layer<T>>) -> Result<Self> {
        let first = layers.first().ok_or(Error::Empty("network layers"))?;
        if first.in_dim() == 0 {
            return Err(Error::Config("input dimension must be positive".into()));
        }
        for (idx, l) in layers.iter().enumerate() {
            if l.out_dim() == 0 {
                return Err(Error::Config(format!("layer {idx} has no outputs")));
            }
            ensure_len(l.out_dim(), l.bias.len(), "bias length")?;
        }
        for w in layers.windows(2) {
            ensure_len(w[0].out_dim(), w[1].in_dim(), "adjacent layer sizes")?;
        }
        if layers.last().map(|l| l.activation) != Some(Activation::Identity) {
            return Err(Error::Config("final layer must be linear".into()));
        }
        Ok(Self { layers })
    }

    /// All parameters zero.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let mut net = init_net::<T>(dims, 0)?;
        net.zero_last_layer();
        for l in &mut net.layers {
            l.weights.fill(T::zero());
        }
        Ok(net)
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Layer::out_dim))
            .collect()
    }

    pub fn zero_last_layer(&mut self) {
        let last = self.layers.last_mut().expect("network has layers");
        last.weights.fill(T::zero());
        last.bias.fill(T::zero());
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn locate(&self, mut idx: usize) -> (usize, Option<(usize, usize)>, usize) {
        for (li, l) in self.layers.iter().enumerate() {
            let nw = l.weights.len();
            if idx < nw {
                return (li, Some((idx / l.in_dim(), idx % l.in_dim())), 0);
            }
            idx -= nw;
            if idx < l.bias.len() {
                return (li, None, idx);
            }
            idx -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    /// Parameter by flat index: layer by layer, weights row-major then biases.
    pub fn param(&self, idx: usize) -> T {
        match self.locate(idx) {
            (li, Some(rc), _) => self.layers[li].weights[rc],
            (li, None, b) => self.layers[li].bias[b],
        }
    }

    pub fn param_mut(&mut self, idx: usize) -> &mut T {
        match self.locate(idx) {
            (li, Some(rc), _) => &mut self.layers[li].weights[rc],
            (li, None, b) => &mut self.layers[li].bias[b],
        }
    }

    /// Forward pass over a batch with one input per row.
    pub fn forward_batch(&self, x: ArrayView2<'_, T>) -> Result<(Array2<T>, ForwardTrace<T>)> {
        ensure_len(self.input_dim(), x.ncols(), "network input")?;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Array2<T>> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let prev = post.last().map_or(x.view(), |a| a.view());
            let mut z = prev.dot(&layer.weights.t());
            z += &layer.bias;
            let a = match layer.activation {
                Activation::Identity => z.clone(),
                Activation::Relu => z.mapv(|v| if v > T::zero() { v } else { T::zero() }),
            };
            pre.push(z);
            post.push(a);
        }
        let out = post.last().expect("network has layers").clone();
        Ok((
            out,
            ForwardTrace {
                input: x.to_owned(),
                pre,
                post,
            },
        ))
    }

    pub fn forward(&self, x: &[T]) -> Result<(Vec<T>, ForwardTrace<T>)> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        let (out, trace) = self.forward_batch(view)?;
        Ok((out.into_raw_vec_and_offset().0, trace))
    }

    /// Gradients of `sum(output * grad_out)` with respect to every parameter
    /// and to the batch input.
    pub fn backward(&self, trace: &ForwardTrace<T>, grad_out: ArrayView2<'_, T>) -> Result<(Gradients<T>, Array2<T>)> {
        ensure_len(self.output_dim(), grad_out.ncols(), "output gradient")?;
        ensure_len(trace.input.nrows(), grad_out.nrows(), "batch size")?;
        ensure_len(self.layers.len(), trace.pre.len(), "trace depth")?;
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = grad_out.to_owned();
        for (li, layer) in self.layers.iter().enumerate().rev() {
            if layer.activation == Activation::Relu {
                // subgradient 0 at the kink
                Zip::from(&mut g).and(&trace.pre[li]).for_each(|gv, &z| {
                    if z <= T::zero() {
                        *gv = T::zero();
                    }
                });
            }
            let input = if li == 0 { &trace.input } else { &trace.post[li - 1] };
            let weights = g.t().dot(input);
            let bias = g.sum_axis(Axis(0));
            g = g.dot(&layer.weights);
            grads.push(LayerGrad { weights, bias });
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, g))
    }
}
