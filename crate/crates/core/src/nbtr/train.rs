use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dataset, ModelOptimizer, NbtrModel, Structure};
use crate::error::{Error, Result};
use crate::nn::{adam_step, AdamConfig, AdamState};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Hidden layer sizes of the rating estimator.
    pub estimator_hidden: Vec<usize>,
    /// Hidden layer sizes of the advantage adjuster; empty means one linear layer.
    pub adjuster_hidden: Vec<usize>,
    pub structure: Structure,
    pub adam: AdamConfig,
    /// Fraction of the training records held out for per-epoch validation accuracy.
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            batch_size: 32,
            seed: 0,
            estimator_hidden: vec![512, 512],
            adjuster_hidden: Vec::new(),
            structure: Structure::Symmetric,
            adam: AdamConfig::default(),
            validation_fraction: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::Config(format!(
                "validation fraction must lie in [0, 1), got {}",
                self.validation_fraction
            )));
        }
        self.adam.validate()
    }

    /// Fresh model shaped for `data` with this configuration's structure and seed.
    pub fn build_model<T: Scalar>(&self, data: &Dataset<T>) -> Result<NbtrModel<T>> {
        let dims: Vec<usize> = std::iter::once(data.feature_dim())
            .chain(self.estimator_hidden.iter().copied())
            .chain(std::iter::once(1))
            .collect();
        match self.structure {
            Structure::Symmetric => NbtrModel::symmetric(&dims, data.arity(), self.seed),
            Structure::Asymmetric { skip } => NbtrModel::asymmetric(
                &dims,
                &self.adjuster_hidden,
                data.arity(),
                data.env_dim(),
                skip,
                self.seed,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// Mean training cross-entropy per epoch.
    pub epoch_loss: Vec<f64>,
    /// Validation accuracy per epoch; `None` without a validation split.
    pub val_accuracy: Vec<Option<f64>>,
    pub test_accuracy: Option<f64>,
}

pub(crate) fn accuracy_of<T: Scalar>(model: &NbtrModel<T>, data: &Dataset<T>) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation dataset"));
    }
    let mut correct = 0usize;
    // chunked so large test sets do not materialize one huge batch
    for chunk in data.records().chunks(1024) {
        let refs: Vec<_> = chunk.iter().collect();
        let predicted = model.predicted_winners(&refs)?;
        correct += predicted.iter().zip(chunk).filter(|(p, r)| **p == r.winner()).count();
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Minimizes mean cross-entropy of the model's outcome probabilities by
/// mini-batch Adam. Identical inputs give bit-identical results.
pub fn train<T: Scalar>(
    mut model: NbtrModel<T>,
    data: &Dataset<T>,
    cfg: &TrainConfig,
    test: Option<&Dataset<T>>,
) -> Result<(NbtrModel<T>, TrainReport)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training dataset"));
    }
    model.check_dataset(data)?;
    if let Some(t) = test {
        model.check_dataset(t)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let n_val = (cfg.validation_fraction * data.len() as f64).floor() as usize;
    let validation = (n_val > 0).then(|| data.subset(&order[..n_val]));
    let mut train_idx = order[n_val..].to_vec();
    if train_idx.is_empty() {
        return Err(Error::Config("validation split leaves no training records".into()));
    }

    let mut opt = match model.optimizer.take() {
        Some(o) => o,
        None => ModelOptimizer {
            estimator: AdamState::new(&model.estimator, cfg.adam)?,
            adjuster: model
                .adjuster
                .as_ref()
                .map(|a| AdamState::new(a, cfg.adam))
                .transpose()?,
        },
    };

    let mut report = TrainReport {
        epoch_loss: Vec::with_capacity(cfg.epochs),
        val_accuracy: Vec::with_capacity(cfg.epochs),
        test_accuracy: None,
    };
    let records = data.records();
    for _ in 0..cfg.epochs {
        train_idx.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in train_idx.chunks(cfg.batch_size) {
            let refs: Vec<_> = batch.iter().map(|&i| &records[i]).collect();
            let (loss, mut grads) = model.loss_and_grads(&refs)?;
            total += loss.as_f64();
            let scale = T::one() / T::of_usize(batch.len());
            grads.estimator.scale(scale);
            adam_step(&mut model.estimator, &grads.estimator, &mut opt.estimator)?;
            if let (Some(adj), Some(g), Some(state)) = (model.adjuster.as_mut(), grads.adjuster.as_mut(), opt.adjuster.as_mut()) {
                g.scale(scale);
                adam_step(adj, g, state)?;
            }
        }
        report.epoch_loss.push(total / train_idx.len() as f64);
        report
            .val_accuracy
            .push(validation.as_ref().map(|v| accuracy_of(&model, v)).transpose()?);
    }
    model.optimizer = Some(opt);
    report.test_accuracy = test.map(|t| accuracy_of(&model, t)).transpose()?;
    Ok((model, report))
}
