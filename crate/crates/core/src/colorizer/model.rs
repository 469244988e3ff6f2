use super::ColorizerError;
use crate::nn::{
    avgpool2, avgpool2_backward, conv2d, conv2d_backward, he_init, relu, relu_backward, sigmoid,
    sigmoid_backward, upsample2, upsample2_backward, ConvGrads, ConvParams, Prng, Tensor,
};

/// `(in, out)` channels of each convolution, in network order.
pub const CONV_CHANNELS: [(usize, usize); 6] =
    [(1, 16), (16, 32), (32, 64), (64, 32), (32, 16), (16, 3)];

/// Spatial dims must be divisible by this (two 2x poolings).
pub const ALIGNMENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Conv(usize),
    Relu,
    AvgPool,
    Upsample,
    Sigmoid,
}

/// The fixed encoder/decoder stack: 1 gray channel in, 3 color channels out,
/// with a 64-channel code at quarter resolution in the middle.
pub const LAYERS: [Layer; 16] = [
    Layer::Conv(0),
    Layer::Relu,
    Layer::AvgPool,
    Layer::Conv(1),
    Layer::Relu,
    Layer::AvgPool,
    Layer::Conv(2),
    Layer::Relu,
    Layer::Upsample,
    Layer::Conv(3),
    Layer::Relu,
    Layer::Upsample,
    Layer::Conv(4),
    Layer::Relu,
    Layer::Conv(5),
    Layer::Sigmoid,
];

#[derive(Debug, Clone, PartialEq)]
pub struct ColorizerModel {
    convs: Vec<ConvParams>,
}

/// Per-layer activations kept for the backward pass. `acts[0]` is the input
/// and `acts[i + 1]` is the output of `LAYERS[i]`.
#[derive(Debug, Clone)]
pub struct Trace {
    acts: Vec<Tensor>,
}

impl Trace {
    pub fn output(&self) -> &Tensor {
        self.acts.last().expect("trace is never empty")
    }
}

/// Gradients for every convolution plus the network input.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub convs: Vec<ConvGrads>,
    pub input: Tensor,
}

impl ColorizerModel {
    /// He-initialize every convolution from one generator, in network order.
    pub fn new(seed: u64) -> Self {
        let mut prng = Prng::new(seed);
        let convs = CONV_CHANNELS
            .iter()
            .map(|&(i, o)| he_init([o, i, 3, 3], &mut prng))
            .collect();
        Self { convs }
    }

    /// Wrap already-built parameters, checking them against the architecture.
    pub fn from_convs(convs: Vec<ConvParams>) -> Result<Self, ColorizerError> {
        if convs.len() != CONV_CHANNELS.len()
            || convs
                .iter()
                .zip(CONV_CHANNELS)
                .any(|(p, (i, o))| p.in_channels() != i || p.out_channels() != o)
        {
            return Err(ColorizerError::ArchMismatch);
        }
        Ok(Self { convs })
    }

    pub fn convs(&self) -> &[ConvParams] {
        &self.convs
    }

    pub fn convs_mut(&mut self) -> &mut [ConvParams] {
        &mut self.convs
    }

    pub fn param_count(&self) -> usize {
        self.convs.iter().map(ConvParams::param_count).sum()
    }

    fn check_input(input: &Tensor) -> Result<(), ColorizerError> {
        match input.shape() {
            &[1, h, w] if h % ALIGNMENT == 0 && w % ALIGNMENT == 0 => Ok(()),
            &[1, h, w] => Err(ColorizerError::MisalignedDims {
                height: h,
                width: w,
            }),
            other => Err(ColorizerError::Nn(crate::nn::NnError::ShapeMismatch(
                format!("colorizer input must be [1, H, W], got {other:?}"),
            ))),
        }
    }

    /// Run a `[1, H, W]` plane through the network, keeping activations.
    pub fn forward_trace(&self, input: &Tensor) -> Result<Trace, ColorizerError> {
        Self::check_input(input)?;
        let mut acts = Vec::with_capacity(LAYERS.len() + 1);
        acts.push(input.clone());
        for layer in LAYERS {
            let x = acts.last().expect("nonempty");
            let y = match layer {
                Layer::Conv(k) => conv2d(x, &self.convs[k])?,
                Layer::Relu => relu(x),
                Layer::AvgPool => avgpool2(x)?,
                Layer::Upsample => upsample2(x)?,
                Layer::Sigmoid => sigmoid(x),
            };
            acts.push(y);
        }
        Ok(Trace { acts })
    }

    /// `[1, H, W]` in, `[3, H, W]` out with values in `(0, 1)`.
    pub fn forward(&self, input: &Tensor) -> Result<Tensor, ColorizerError> {
        let mut trace = self.forward_trace(input)?;
        Ok(trace.acts.pop().expect("nonempty"))
    }

    /// Backpropagate `grad_out` (gradient w.r.t. the network output).
    pub fn backward(&self, trace: &Trace, grad_out: &Tensor) -> Result<Gradients, ColorizerError> {
        let mut convs: Vec<Option<ConvGrads>> = vec![None; self.convs.len()];
        let mut g = grad_out.clone();
        for (i, layer) in LAYERS.iter().enumerate().rev() {
            let x = &trace.acts[i];
            g = match *layer {
                Layer::Conv(k) => {
                    let (gi, gp) = conv2d_backward(&g, x, &self.convs[k])?;
                    convs[k] = Some(gp);
                    gi
                }
                Layer::Relu => relu_backward(&g, x)?,
                Layer::AvgPool => avgpool2_backward(&g)?,
                Layer::Upsample => upsample2_backward(&g)?,
                Layer::Sigmoid => sigmoid_backward(&g, &trace.acts[i + 1])?,
            };
        }
        Ok(Gradients {
            convs: convs
                .into_iter()
                .map(|c| c.expect("every conv visited"))
                .collect(),
            input: g,
        })
    }
}
