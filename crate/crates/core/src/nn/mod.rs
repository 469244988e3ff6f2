//! Minimal neural-network substrate: `f64` tensors and hand-written
//! forward/backward kernels for the layers the colorizer uses.
//!
//! There is no autograd graph. Each layer exposes a forward function and a
//! matching backward function; callers chain them explicitly.

mod adam;
mod gemm;
mod layers;
mod loss;
mod prng;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use layers::{
    avgpool2, avgpool2_backward, conv2d, conv2d_backward, he_bound, he_init, relu, relu_backward,
    sigmoid, sigmoid_backward, upsample2, upsample2_backward, ConvGrads, ConvParams,
};
pub use loss::mse_loss;
pub use prng::Prng;
pub use tensor::{NnError, Tensor};
