use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelOptimizer, NbtrModel, Structure};
use crate::error::{Error, Result};
use crate::nn::{AdamRecord, NetRecord};
use crate::scalar::Scalar;

const FORMAT: &str = "nbtr-model";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeTag {
    Symmetric,
    Asymmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct OptimizerRecord<T> {
    pub estimator: AdamRecord<T>,
    pub adjuster: Option<AdamRecord<T>>,
}

/// Self-describing JSON form of a model, its optimizer moments and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ModelCheckpoint<T> {
    pub format: String,
    pub version: u32,
    pub scalar: String,
    pub mode: ModeTag,
    pub skip: bool,
    pub arity: usize,
    pub env_dim: usize,
    pub seed: u64,
    pub estimator: NetRecord<T>,
    pub adjuster: Option<NetRecord<T>>,
    pub optimizer: Option<OptimizerRecord<T>>,
}

impl<T: Scalar> From<&NbtrModel<T>> for ModelCheckpoint<T> {
    fn from(m: &NbtrModel<T>) -> Self {
        let mode = match m.structure() {
            Structure::Symmetric => ModeTag::Symmetric,
            Structure::Asymmetric { .. } => ModeTag::Asymmetric,
        };
        ModelCheckpoint {
            format: FORMAT.into(),
            version: VERSION,
            scalar: std::any::type_name::<T>().into(),
            mode,
            skip: m.skip,
            arity: m.arity,
            env_dim: m.env_dim,
            seed: m.seed,
            estimator: NetRecord::from(&m.estimator),
            adjuster: m.adjuster.as_ref().map(NetRecord::from),
            optimizer: m.optimizer.as_ref().map(|o| OptimizerRecord {
                estimator: AdamRecord::from(&o.estimator),
                adjuster: o.adjuster.as_ref().map(AdamRecord::from),
            }),
        }
    }
}

impl<T: Scalar> ModelCheckpoint<T> {
    pub fn to_model(&self) -> Result<NbtrModel<T>> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::Config(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        let estimator = self.estimator.to_net()?;
        let adjuster = self.adjuster.as_ref().map(NetRecord::to_net).transpose()?;
        match (self.mode, &adjuster) {
            (ModeTag::Symmetric, None) | (ModeTag::Asymmetric, Some(_)) => {}
            _ => return Err(Error::Config("checkpoint mode disagrees with adjuster presence".into())),
        }
        let mut model = NbtrModel::from_parts(estimator, adjuster, self.skip, self.arity, self.env_dim, self.seed)?;
        if let Some(o) = &self.optimizer {
            let adjuster = match (&o.adjuster, &model.adjuster) {
                (Some(rec), Some(net)) => Some(rec.to_state(net)?),
                (None, None) => None,
                _ => return Err(Error::Config("optimizer state disagrees with adjuster presence".into())),
            };
            model.optimizer = Some(ModelOptimizer {
                estimator: o.estimator.to_state(&model.estimator)?,
                adjuster,
            });
        }
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl<T: Scalar> NbtrModel<T> {
    pub fn to_json(&self) -> Result<String> {
        ModelCheckpoint::from(self).to_json()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        ModelCheckpoint::<T>::from_json(s)?.to_model()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
