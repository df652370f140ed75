//! Dense feed-forward networks with hand-written backpropagation.

mod activation;
pub mod checkpoint;
mod loss;
mod network;
mod optim;

pub use activation::Activation;
pub use loss::{recon_loss_and_grad, ReconLoss};
pub use network::{init_network, DenseLayer, DenseNetwork, ForwardCache, GradientSet, LayerGrad};
pub use optim::{OptimizerKind, OptimizerState};
