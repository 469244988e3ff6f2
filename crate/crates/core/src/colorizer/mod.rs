//! Convolutional autoencoder that maps an equalized grayscale plane back to
//! RGB, with its training loop, checkpoint format and whole-image inference.

mod checkpoint;
mod model;
mod train;

pub use checkpoint::{load_model, save_model, CheckpointError, MAGIC};
pub use model::{ColorizerModel, Gradients, Layer, Trace, ALIGNMENT, CONV_CHANNELS, LAYERS};
pub use train::{train, train_with, LossHistory, TrainConfig, TrainingPair};

use crate::image::{denormalize, GrayImage, ImageError, RgbImage};
use crate::nn::{NnError, Tensor};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ColorizerError {
    #[error("input {height}x{width} is not divisible by {ALIGNMENT}")]
    MisalignedDims { height: usize, width: usize },
    #[error("conv layers disagree with the fixed architecture")]
    ArchMismatch,
    #[error("training set is empty")]
    EmptyDataset,
    #[error("training diverged: non-finite loss at step {step}")]
    NonFiniteLoss { step: usize },
    #[error("invalid training config: {0}")]
    BadConfig(&'static str),
    #[error("training pair {index} is not {size}x{size}")]
    PatchSizeMismatch { index: usize, size: usize },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Colorize a grayscale image of any size (at least 2x2 along any axis that
/// needs padding). The image is reflect-padded to a multiple of 4, run
/// through the network and cropped back.
pub fn colorize(model: &ColorizerModel, img: &GrayImage) -> Result<RgbImage, ColorizerError> {
    let (padded, dims) = img.pad_reflect(ALIGNMENT)?;
    let (w, h) = (padded.width(), padded.height());
    let input = Tensor::new(vec![1, h, w], padded.normalize().data)?;
    let out = model.forward(&input)?;
    let n = w * h;
    let d = out.data();
    let rgb = denormalize([&d[..n], &d[n..2 * n], &d[2 * n..]], w, h)?;
    Ok(dims.crop_rgb(&rgb))
}
