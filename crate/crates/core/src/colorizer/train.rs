use super::{ColorizerError, ColorizerModel, ALIGNMENT};
use crate::image::{GrayImage, RgbImage};
use crate::nn::{adam_step, mse_loss, AdamConfig, AdamState, ConvGrads, Prng, Tensor};
use std::ops::ControlFlow;

/// Keeps the shuffle stream apart from the initialization stream.
const SHUFFLE_STREAM: u64 = 0x5348_5546_464C_4531;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub patch_size: usize,
    pub patches_per_image: usize,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            lr: 1e-3,
            seed: 42,
            patch_size: 32,
            patches_per_image: 16,
            batch_size: 8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ColorizerError> {
        if self.epochs == 0 {
            return Err(ColorizerError::BadConfig("epochs must be positive"));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(ColorizerError::BadConfig("lr must be a positive number"));
        }
        if self.patch_size == 0 || !self.patch_size.is_multiple_of(ALIGNMENT) {
            return Err(ColorizerError::BadConfig(
                "patch_size must be a positive multiple of 4",
            ));
        }
        if self.patches_per_image == 0 {
            return Err(ColorizerError::BadConfig(
                "patches_per_image must be positive",
            ));
        }
        if self.batch_size == 0 {
            return Err(ColorizerError::BadConfig("batch_size must be positive"));
        }
        Ok(())
    }
}

/// Normalized network input `[1, P, P]` and target `[3, P, P]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub input: Tensor,
    pub target: Tensor,
}

impl TrainingPair {
    pub fn from_images(gray: &GrayImage, rgb: &RgbImage) -> Result<Self, ColorizerError> {
        let (w, h) = (gray.width(), gray.height());
        if (rgb.width(), rgb.height()) != (w, h) {
            return Err(ColorizerError::Image(
                crate::image::ImageError::PlaneMismatch,
            ));
        }
        let input = Tensor::new(vec![1, h, w], gray.normalize().data)?;
        let target = Tensor::new(
            vec![3, h, w],
            rgb.normalize().into_iter().flat_map(|p| p.data).collect(),
        )?;
        Ok(Self { input, target })
    }
}

/// Mean batch loss after every optimizer step. Steps count from 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossHistory {
    pub per_step: Vec<(usize, f64)>,
}

impl LossHistory {
    pub fn last(&self) -> Option<f64> {
        self.per_step.last().map(|&(_, l)| l)
    }

    /// First step whose loss is strictly below `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.per_step
            .iter()
            .find(|&&(_, l)| l < threshold)
            .map(|&(s, _)| s)
    }

    pub fn loss_at(&self, step: usize) -> Option<f64> {
        self.per_step.get(step.checked_sub(1)?).map(|&(_, l)| l)
    }
}

/// Train a fresh model for `cfg.epochs` epochs.
pub fn train(
    pairs: &[TrainingPair],
    cfg: &TrainConfig,
) -> Result<(ColorizerModel, LossHistory), ColorizerError> {
    train_with(pairs, cfg, |_, _, _| ControlFlow::Continue(()))
}

/// As [`train`], calling `on_step(step, loss, model)` after every optimizer
/// step; `loss` is the batch loss before the step and `model` the updated one.
/// Returning `ControlFlow::Break` stops training early.
///
/// Each epoch visits the pairs in a fresh seeded shuffle, split into
/// mini-batches of `cfg.batch_size` (the last one may be short). Per-sample
/// gradients are summed in visit order and divided by the batch length.
pub fn train_with(
    pairs: &[TrainingPair],
    cfg: &TrainConfig,
    mut on_step: impl FnMut(usize, f64, &ColorizerModel) -> ControlFlow<()>,
) -> Result<(ColorizerModel, LossHistory), ColorizerError> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(ColorizerError::EmptyDataset);
    }
    let p = cfg.patch_size;
    for (index, pair) in pairs.iter().enumerate() {
        if pair.input.shape() != [1, p, p] || pair.target.shape() != [3, p, p] {
            return Err(ColorizerError::PatchSizeMismatch { index, size: p });
        }
    }

    let mut model = ColorizerModel::new(cfg.seed);
    let adam = AdamConfig::with_lr(cfg.lr);
    let mut states: Vec<(AdamState, AdamState)> = model
        .convs()
        .iter()
        .map(|c| (AdamState::new(&c.weights), AdamState::new(&c.bias)))
        .collect();
    let mut shuffler = Prng::new(cfg.seed ^ SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut history = LossHistory::default();
    let mut step = 0;

    'epochs: for _ in 0..cfg.epochs {
        shuffler.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            step += 1;
            let mut sum: Vec<ConvGrads> = model.convs().iter().map(ConvGrads::zeros_for).collect();
            let mut loss_sum = 0.0;
            for &i in batch {
                let trace = model.forward_trace(&pairs[i].input)?;
                let (loss, grad) = mse_loss(trace.output(), &pairs[i].target)?;
                let grads = model.backward(&trace, &grad)?;
                for (acc, g) in sum.iter_mut().zip(&grads.convs) {
                    acc.add_assign(g)?;
                }
                loss_sum += loss;
            }
            let n = batch.len() as f64;
            let loss = loss_sum / n;
            if !loss.is_finite() {
                return Err(ColorizerError::NonFiniteLoss { step });
            }
            for ((conv, g), (sw, sb)) in model.convs_mut().iter_mut().zip(&mut sum).zip(&mut states)
            {
                g.scale(1.0 / n);
                adam_step(&mut conv.weights, &g.weights, sw, &adam)?;
                adam_step(&mut conv.bias, &g.bias, sb, &adam)?;
            }
            history.per_step.push((step, loss));
            if on_step(step, loss, &model).is_break() {
                break 'epochs;
            }
        }
    }
    Ok((model, history))
}
