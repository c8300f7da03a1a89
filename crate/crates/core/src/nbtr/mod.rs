//! Shared-weight rating estimators trained end to end on comparison outcomes.

mod checkpoint;
mod model;
mod record;
mod train;

pub use checkpoint::ModelCheckpoint;
pub use model::{gradcheck_model, win_prob_from_ratings, ModelGradCheck, ModelGrads, ModelOptimizer, NbtrModel, Structure};
pub use record::{ComparisonRecord, Dataset};
pub use train::{train, TrainConfig, TrainReport};

pub(crate) use train::accuracy_of;

#[cfg(test)]
mod tests;
