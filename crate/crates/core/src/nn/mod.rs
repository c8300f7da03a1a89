//! Dense feed-forward networks with hand-written backpropagation, Adam, and
//! finite-difference gradient checking.

mod adam;
mod checkpoint;
mod gradcheck;
mod loss;
mod net;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{LayerRecord, NetRecord, AdamRecord};
pub use gradcheck::{compare_gradients, gradcheck, relative_error, GradCheckReport};
pub use loss::{cross_entropy_loss, softmax, softmax_backward};
pub use net::{init_net, Activation, DenseNet, ForwardTrace, Gradients, Layer, LayerGrad};
