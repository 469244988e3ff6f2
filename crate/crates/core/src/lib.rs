//! Underwater image enhancement.
//!
//! The pipeline decolors an RGB image, equalizes the histogram of the
//! grayscale result, and re-colors it with a small convolutional
//! autoencoder trained on (degraded, reference) image pairs:
//!
//! ```text
//! RgbImage --to_grayscale--> GrayImage --equalize--> GrayImage --colorize--> RgbImage
//! ```
//!
//! All network machinery (tensors, layer kernels, Adam) lives in [`nn`] and
//! is written from scratch on `f64`. Results depend only on the seed,
//! configuration and input data.

pub mod cli;
pub mod colorizer;
pub mod dataset;
pub mod histeq;
pub mod image;
pub mod metrics;
pub mod nn;
pub mod ppm;

use colorizer::{colorize, ColorizerError, ColorizerModel};
use histeq::{equalize, HistEqError};
use image::{GrayImage, Image, RgbImage};
use thiserror::Error;

pub use colorizer::{load_model, save_model, train, TrainConfig};
pub use ppm::{read_ppm, write_ppm};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    HistEq(#[from] HistEqError),
    #[error(transparent)]
    Colorizer(#[from] ColorizerError),
}

/// First two pipeline stages: decolor, then equalize.
pub fn enhance_gray(img: &Image) -> Result<GrayImage, HistEqError> {
    equalize(&img.to_grayscale())
}

/// The full pipeline.
pub fn enhance(img: &Image, model: &ColorizerModel) -> Result<RgbImage, PipelineError> {
    let gray = enhance_gray(img)?;
    Ok(colorize(model, &gray)?)
}
