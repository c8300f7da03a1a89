use ndarray::{s, Array2, ArrayView2, Axis};

use super::{ComparisonRecord, Dataset};
use crate::error::{ensure_len, Error, Result};
use crate::nn::{
    compare_gradients, init_net, softmax, softmax_backward, AdamState, DenseNet, ForwardTrace, GradCheckReport,
    Gradients,
};
use crate::scalar::Scalar;

/// How the per-item ratings are turned into outcome probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    /// `softmax(R)`.
    Symmetric,
    /// `softmax(A(p ++ e) + p)` with `p = softmax(R)`; without the skip
    /// connection, `softmax(A(p ++ e))`.
    Asymmetric { skip: bool },
}

/// Optimizer moments for the estimator and, when present, the adjuster.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOptimizer<T> {
    pub estimator: AdamState<T>,
    pub adjuster: Option<AdamState<T>>,
}

/// A rating estimator `E` shared across the `M` items of a comparison, plus
/// an optional advantage adjuster `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct NbtrModel<T> {
    pub(crate) estimator: DenseNet<T>,
    pub(crate) adjuster: Option<DenseNet<T>>,
    pub(crate) skip: bool,
    pub(crate) arity: usize,
    pub(crate) env_dim: usize,
    pub(crate) seed: u64,
    pub(crate) optimizer: Option<ModelOptimizer<T>>,
}

/// Parameter gradients for a whole model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads<T> {
    pub estimator: Gradients<T>,
    pub adjuster: Option<Gradients<T>>,
}

/// Everything a backward pass over a batch of records needs.
pub(crate) struct BatchForward<T> {
    e_trace: ForwardTrace<T>,
    /// `B x M`
    pub ratings: Array2<T>,
    pub fair: Array2<T>,
    a_trace: Option<ForwardTrace<T>>,
    pub outcome: Array2<T>,
}

/// `softmax` applied independently to each row.
fn softmax_rows<T: Scalar>(z: &Array2<T>) -> Array2<T> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let p = softmax(row.as_slice().expect("standard layout")).expect("rows are non-empty");
        row.assign(&ndarray::ArrayView1::from(&p));
    }
    out
}

/// Probability that rating `r_i` beats rating `r_j` in a fair comparison.
pub fn win_prob_from_ratings<T: Scalar>(r_i: T, r_j: T) -> T {
    T::one() / (T::one() + (r_j - r_i).exp())
}

impl<T: Scalar> NbtrModel<T> {
    /// Symmetric model; `estimator_dims` runs from the feature length to 1.
    pub fn symmetric(estimator_dims: &[usize], arity: usize, seed: u64) -> Result<Self> {
        Self::build(estimator_dims, None, arity, 0, true, seed)
    }

    /// Asymmetric model with adjuster hidden sizes `adjuster_hidden` (empty for
    /// a single linear layer). The adjuster's final layer starts at zero.
    pub fn asymmetric(
        estimator_dims: &[usize],
        adjuster_hidden: &[usize],
        arity: usize,
        env_dim: usize,
        skip: bool,
        seed: u64,
    ) -> Result<Self> {
        Self::build(estimator_dims, Some(adjuster_hidden), arity, env_dim, skip, seed)
    }

    fn build(
        estimator_dims: &[usize],
        adjuster_hidden: Option<&[usize]>,
        arity: usize,
        env_dim: usize,
        skip: bool,
        seed: u64,
    ) -> Result<Self> {
        if arity < 2 {
            return Err(Error::Config(format!("arity must be at least 2, got {arity}")));
        }
        if estimator_dims.last() != Some(&1) {
            return Err(Error::Config(format!(
                "rating estimator must end in a single output, got dims {estimator_dims:?}"
            )));
        }
        let estimator = init_net(estimator_dims, seed)?;
        let adjuster = match adjuster_hidden {
            None => {
                if env_dim != 0 {
                    return Err(Error::Config("environment vectors require an adjuster".into()));
                }
                None
            }
            Some(hidden) => {
                let dims: Vec<usize> = std::iter::once(arity + env_dim)
                    .chain(hidden.iter().copied())
                    .chain(std::iter::once(arity))
                    .collect();
                // distinct stream from the estimator
                let mut a = init_net(&dims, seed ^ 0x9E37_79B9_7F4A_7C15)?;
                a.zero_last_layer();
                Some(a)
            }
        };
        Ok(Self {
            estimator,
            adjuster,
            skip,
            arity,
            env_dim,
            seed,
            optimizer: None,
        })
    }

    /// Assembles a model from existing networks.
    pub fn from_parts(
        estimator: DenseNet<T>,
        adjuster: Option<DenseNet<T>>,
        skip: bool,
        arity: usize,
        env_dim: usize,
        seed: u64,
    ) -> Result<Self> {
        ensure_len(1, estimator.output_dim(), "estimator output")?;
        match &adjuster {
            Some(a) => {
                ensure_len(arity + env_dim, a.input_dim(), "adjuster input")?;
                ensure_len(arity, a.output_dim(), "adjuster output")?;
            }
            None if env_dim != 0 => return Err(Error::Config("environment vectors require an adjuster".into())),
            None => {}
        }
        Ok(Self {
            estimator,
            adjuster,
            skip,
            arity,
            env_dim,
            seed,
            optimizer: None,
        })
    }

    pub fn structure(&self) -> Structure {
        match self.adjuster {
            None => Structure::Symmetric,
            Some(_) => Structure::Asymmetric { skip: self.skip },
        }
    }

    pub fn estimator(&self) -> &DenseNet<T> {
        &self.estimator
    }

    pub fn estimator_mut(&mut self) -> &mut DenseNet<T> {
        &mut self.estimator
    }

    pub fn adjuster(&self) -> Option<&DenseNet<T>> {
        self.adjuster.as_ref()
    }

    pub fn adjuster_mut(&mut self) -> Option<&mut DenseNet<T>> {
        self.adjuster.as_mut()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn feature_dim(&self) -> usize {
        self.estimator.input_dim()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn optimizer(&self) -> Option<&ModelOptimizer<T>> {
        self.optimizer.as_ref()
    }

    fn check_record(&self, r: &ComparisonRecord<T>) -> Result<()> {
        ensure_len(self.arity, r.arity(), "record arity")?;
        ensure_len(self.feature_dim(), r.feature_dim(), "item features")?;
        if self.adjuster.is_some() && self.env_dim > 0 && r.env().is_none() {
            return Err(Error::Config(format!(
                "model expects an environment vector of length {}",
                self.env_dim
            )));
        }
        if self.adjuster.is_some() {
            ensure_len(self.env_dim, r.env_dim(), "environment vector")?;
        }
        Ok(())
    }

    /// Checks that a dataset can be fed to this model.
    pub fn check_dataset(&self, data: &Dataset<T>) -> Result<()> {
        ensure_len(self.arity, data.arity(), "dataset arity")?;
        ensure_len(self.feature_dim(), data.feature_dim(), "dataset feature length")?;
        if self.adjuster.is_some() {
            ensure_len(self.env_dim, data.env_dim(), "dataset environment length")?;
        }
        Ok(())
    }

    /// Rating of a single item.
    pub fn rate_item(&self, x: &[T]) -> Result<T> {
        Ok(self.estimator.forward(x)?.0[0])
    }

    /// Ratings of many items, one per row.
    pub fn rate_items(&self, xs: ArrayView2<'_, T>) -> Result<Vec<T>> {
        Ok(self.estimator.forward_batch(xs)?.0.column(0).to_vec())
    }

    /// Per-item ratings from the shared estimator.
    pub fn predict_ratings(&self, record: &ComparisonRecord<T>) -> Result<Vec<T>> {
        self.check_record(record)?;
        Ok(self.forward_records(&[record])?.ratings.row(0).to_vec())
    }

    /// Outcome probabilities for one record.
    pub fn predict_probs(&self, record: &ComparisonRecord<T>) -> Result<Vec<T>> {
        self.check_record(record)?;
        Ok(self.forward_records(&[record])?.outcome.row(0).to_vec())
    }

    /// Outcome probabilities for many records, one row per record.
    pub fn predict_probs_batch(&self, records: &[&ComparisonRecord<T>]) -> Result<Array2<T>> {
        for r in records {
            self.check_record(r)?;
        }
        Ok(self.forward_records(records)?.outcome)
    }

    pub(crate) fn forward_records(&self, records: &[&ComparisonRecord<T>]) -> Result<BatchForward<T>> {
        let (b, m, d) = (records.len(), self.arity, self.feature_dim());
        let mut x = Array2::zeros((b * m, d));
        for (ri, r) in records.iter().enumerate() {
            for (k, item) in r.items().iter().enumerate() {
                x.row_mut(ri * m + k).assign(&ndarray::ArrayView1::from(item.as_slice()));
            }
        }
        let (r_flat, e_trace) = self.estimator.forward_batch(x.view())?;
        let ratings = r_flat.into_shape_with_order((b, m)).expect("one rating per item");
        let fair = softmax_rows(&ratings);

        let (a_trace, outcome) = match &self.adjuster {
            None => (None, fair.clone()),
            Some(adj) => {
                let mut u = Array2::zeros((b, m + self.env_dim));
                u.slice_mut(s![.., ..m]).assign(&fair);
                if self.env_dim > 0 {
                    for (ri, r) in records.iter().enumerate() {
                        let env = r.env().expect("checked by caller");
                        u.slice_mut(s![ri, m..]).assign(&ndarray::ArrayView1::from(env));
                    }
                }
                let (mut z, trace) = adj.forward_batch(u.view())?;
                if self.skip {
                    z += &fair;
                }
                (Some(trace), softmax_rows(&z))
            }
        };
        Ok(BatchForward {
            e_trace,
            ratings,
            fair,
            a_trace,
            outcome,
        })
    }

    /// Summed cross-entropy over `records` and its gradient with respect to
    /// every parameter. Estimator gradients from all `M` towers accumulate
    /// into the one shared set of weights.
    pub fn loss_and_grads(&self, records: &[&ComparisonRecord<T>]) -> Result<(T, ModelGrads<T>)> {
        for r in records {
            self.check_record(r)?;
        }
        let fwd = self.forward_records(records)?;
        let (b, m) = (records.len(), self.arity);

        let mut loss = T::zero();
        let mut g_out = fwd.outcome.clone();
        for (ri, r) in records.iter().enumerate() {
            let w = r.winner();
            loss -= fwd.outcome[[ri, w]].ln();
            g_out[[ri, w]] -= T::one();
        }

        let (adj_grads, g_ratings) = match (&self.adjuster, &fwd.a_trace) {
            (Some(adj), Some(trace)) => {
                let (ga, gu) = adj.backward(trace, g_out.view())?;
                let mut g_fair = gu.slice(s![.., ..m]).to_owned();
                if self.skip {
                    g_fair += &g_out;
                }
                let mut g_r = Array2::zeros((b, m));
                for ri in 0..b {
                    let p = fwd.fair.row(ri).to_vec();
                    let g = g_fair.row(ri).to_vec();
                    g_r.row_mut(ri).assign(&ndarray::ArrayView1::from(&softmax_backward(&p, &g)));
                }
                (Some(ga), g_r)
            }
            // softmax followed by cross-entropy: dL/dR = p - y
            _ => (None, g_out),
        };

        let g_flat = g_ratings.into_shape_with_order((b * m, 1)).expect("one gradient per item");
        let (ge, _) = self.estimator.backward(&fwd.e_trace, g_flat.view())?;
        Ok((
            loss,
            ModelGrads {
                estimator: ge,
                adjuster: adj_grads,
            },
        ))
    }

    /// Smallest `|z|` over all hidden ReLU pre-activations the records
    /// produce. Finite-difference checks need this comfortably above the step.
    pub fn kink_margin(&self, records: &[&ComparisonRecord<T>]) -> Result<T> {
        for r in records {
            self.check_record(r)?;
        }
        let fwd = self.forward_records(records)?;
        let hidden = |net: &DenseNet<T>, trace: &ForwardTrace<T>| {
            net.layers()
                .iter()
                .zip(&trace.pre)
                .filter(|(l, _)| l.activation == crate::nn::Activation::Relu)
                .flat_map(|(_, z)| z.iter().map(|v| v.abs()).collect::<Vec<_>>())
                .fold(T::infinity(), T::min)
        };
        let mut margin = hidden(&self.estimator, &fwd.e_trace);
        if let (Some(a), Some(t)) = (&self.adjuster, &fwd.a_trace) {
            margin = margin.min(hidden(a, t));
        }
        Ok(margin)
    }

    /// Summed loss only.
    pub fn loss(&self, records: &[&ComparisonRecord<T>]) -> Result<T> {
        let fwd = self.forward_records(records)?;
        Ok(records
            .iter()
            .enumerate()
            .map(|(ri, r)| -fwd.outcome[[ri, r.winner()]].ln())
            .sum())
    }

    /// Index of the most probable outcome per record; ties go to the lowest index.
    pub fn predicted_winners(&self, records: &[&ComparisonRecord<T>]) -> Result<Vec<usize>> {
        let probs = self.predict_probs_batch(records)?;
        Ok(probs.axis_iter(Axis(0)).map(|row| argmax_lowest(row.as_slice().expect("row"))).collect())
    }
}

pub(crate) fn argmax_lowest<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Result of checking a model's analytic gradients against finite differences.
#[derive(Debug, Clone)]
pub struct ModelGradCheck {
    pub estimator: GradCheckReport,
    pub adjuster: Option<GradCheckReport>,
}

impl ModelGradCheck {
    pub fn passed(&self) -> bool {
        self.estimator.passed && self.adjuster.as_ref().is_none_or(|a| a.passed)
    }

    pub fn max_rel_error(&self) -> f64 {
        let a = self.adjuster.as_ref().map_or(0.0, |a| a.max_rel_error);
        self.estimator.max_rel_error.max(a)
    }
}

/// Central-difference check of [`NbtrModel::loss_and_grads`] through the full
/// graph, covering estimator, adjuster, and skip path.
pub fn gradcheck_model<T: Scalar>(model: &NbtrModel<T>, records: &[&ComparisonRecord<T>], tol: f64) -> Result<ModelGradCheck> {
    let (_, grads) = model.loss_and_grads(records)?;
    let mut probe = model.clone();
    let estimator = compare_gradients(
        &model.estimator,
        &grads.estimator,
        |net| {
            probe.estimator = net.clone();
            probe.loss(records).expect("shapes already checked")
        },
        tol,
    );
    let adjuster = match (&model.adjuster, &grads.adjuster) {
        (Some(adj), Some(ga)) => {
            let mut probe = model.clone();
            Some(compare_gradients(
                adj,
                ga,
                |net| {
                    probe.adjuster = Some(net.clone());
                    probe.loss(records).expect("shapes already checked")
                },
                tol,
            ))
        }
        _ => None,
    };
    Ok(ModelGradCheck { estimator, adjuster })
}
