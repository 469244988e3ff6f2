use super::gemm::{gemm_acc, transpose};
use super::{NnError, Prng, Tensor};

/// Weights `[out, in, 3, 3]` and bias `[out]` of a same-size convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl ConvParams {
    pub fn new(weights: Tensor, bias: Tensor) -> Result<Self, NnError> {
        let [out_ch, _, kh, kw] = weights.shape()[..] else {
            return Err(NnError::ShapeMismatch(format!(
                "conv weights must be 4-d, got {:?}",
                weights.shape()
            )));
        };
        if (kh, kw) != (3, 3) {
            return Err(NnError::ShapeMismatch(format!(
                "kernel must be 3x3, got {kh}x{kw}"
            )));
        }
        bias.expect_shape(&[out_ch])?;
        Ok(Self { weights, bias })
    }

    pub fn out_channels(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl ConvGrads {
    pub fn zeros_for(params: &ConvParams) -> Self {
        Self {
            weights: Tensor::zeros_like(&params.weights),
            bias: Tensor::zeros_like(&params.bias),
        }
    }

    pub fn add_assign(&mut self, other: &ConvGrads) -> Result<(), NnError> {
        self.weights.add_assign(&other.weights)?;
        self.bias.add_assign(&other.bias)
    }

    pub fn scale(&mut self, k: f64) {
        self.weights.scale(k);
        self.bias.scale(k);
    }
}

/// Upper bound of the He-uniform initializer for a given fan-in.
pub fn he_bound(fan_in: usize) -> f64 {
    (6.0 / fan_in as f64).sqrt()
}

/// He-uniform weights in `(-b, b)` drawn in row-major order, zero bias.
pub fn he_init(shape: [usize; 4], prng: &mut Prng) -> ConvParams {
    let [out_ch, in_ch, kh, kw] = shape;
    let b = he_bound(in_ch * kh * kw);
    let data = (0..out_ch * in_ch * kh * kw)
        .map(|_| (2.0 * prng.uniform() - 1.0) * b)
        .collect();
    ConvParams::new(
        Tensor::new(shape.to_vec(), data).expect("shape matches data"),
        Tensor::zeros(&[out_ch]),
    )
    .expect("he_init only builds 3x3 kernels")
}

/// Unfold a `[C, H, W]` input into a `[C*9, H*W]` matrix whose row
/// `(c, ky, kx)` holds the input shifted by `(ky - 1, kx - 1)`, zero-padded.
fn im2col(x: &[f64], c: usize, h: usize, w: usize) -> Vec<f64> {
    let plane = h * w;
    let mut col = vec![0.0; c * 9 * plane];
    for ch in 0..c {
        let src = &x[ch * plane..(ch + 1) * plane];
        for ky in 0..3 {
            for kx in 0..3 {
                let row = &mut col
                    [((ch * 9) + ky * 3 + kx) * plane..((ch * 9) + ky * 3 + kx + 1) * plane];
                let (x_lo, x_hi) = (usize::from(kx == 0), w - usize::from(kx == 2 && w > 0));
                for y in 0..h {
                    let sy = y as isize + ky as isize - 1;
                    if sy < 0 || sy >= h as isize || x_lo >= x_hi {
                        continue;
                    }
                    let sy = sy as usize;
                    let sx = (x_lo + kx) - 1;
                    row[y * w + x_lo..y * w + x_hi]
                        .copy_from_slice(&src[sy * w + sx..sy * w + sx + (x_hi - x_lo)]);
                }
            }
        }
    }
    col
}

fn check_conv_input(input: &Tensor, params: &ConvParams) -> Result<(usize, usize, usize), NnError> {
    let (c, h, w) = input.chw()?;
    if c != params.in_channels() {
        return Err(NnError::ShapeMismatch(format!(
            "conv expects {} input channels, got {c}",
            params.in_channels()
        )));
    }
    Ok((c, h, w))
}

/// 3x3 convolution, stride 1, zero padding 1:
/// `out[o,y,x] = bias[o] + sum_{c,ky,kx} w[o,c,ky,kx] * in[c, y+ky-1, x+kx-1]`.
///
/// Each output element starts from its bias and accumulates in `(c, ky, kx)`
/// order.
pub fn conv2d(input: &Tensor, params: &ConvParams) -> Result<Tensor, NnError> {
    let (cin, h, w) = check_conv_input(input, params)?;
    let cout = params.out_channels();
    let plane = h * w;
    let col = im2col(input.data(), cin, h, w);
    let mut out = Tensor::zeros(&[cout, h, w]);
    for (o, p) in out.data_mut().chunks_exact_mut(plane).enumerate() {
        p.fill(params.bias.data()[o]);
    }
    gemm_acc(
        cout,
        cin * 9,
        plane,
        params.weights.data(),
        &col,
        out.data_mut(),
    );
    Ok(out)
}

/// Exact gradients of [`conv2d`] with respect to its input, weights and bias.
pub fn conv2d_backward(
    grad_out: &Tensor,
    input: &Tensor,
    params: &ConvParams,
) -> Result<(Tensor, ConvGrads), NnError> {
    let (cin, h, w) = check_conv_input(input, params)?;
    let cout = params.out_channels();
    grad_out.expect_shape(&[cout, h, w])?;
    let plane = h * w;
    let k = cin * 9;
    let g = grad_out.data();

    let grad_b: Vec<f64> = g.chunks_exact(plane).map(|p| p.iter().sum()).collect();

    // dW = G * col^T
    let col_t = transpose(k, plane, &im2col(input.data(), cin, h, w));
    let mut grad_w = vec![0.0; cout * k];
    gemm_acc(cout, plane, k, g, &col_t, &mut grad_w);

    // dX is a same-size convolution of G with the kernel flipped in space
    // and transposed in channels: w'[c,o,ky,kx] = w[o,c,2-ky,2-kx].
    let wt = params.weights.data();
    let mut flipped = vec![0.0; cin * cout * 9];
    for o in 0..cout {
        for c in 0..cin {
            for t in 0..9 {
                flipped[(c * cout + o) * 9 + t] = wt[(o * cin + c) * 9 + (8 - t)];
            }
        }
    }
    let mut grad_in = vec![0.0; cin * plane];
    gemm_acc(
        cin,
        cout * 9,
        plane,
        &flipped,
        &im2col(g, cout, h, w),
        &mut grad_in,
    );

    let grads = ConvGrads {
        weights: Tensor::new(params.weights.shape().to_vec(), grad_w)?,
        bias: Tensor::new(vec![cout], grad_b)?,
    };
    Ok((Tensor::new(vec![cin, h, w], grad_in)?, grads))
}

pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| v.max(0.0))
}

/// Gate the gradient by `x > 0`; the derivative at exactly 0 is 0.
pub fn relu_backward(grad_out: &Tensor, x: &Tensor) -> Result<Tensor, NnError> {
    grad_out.expect_shape(x.shape())?;
    let data = grad_out
        .data()
        .iter()
        .zip(x.data())
        .map(|(&g, &v)| if v > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(x.shape().to_vec(), data)
}

fn logistic(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: &Tensor) -> Tensor {
    x.map(logistic)
}

/// Backward pass given the forward *output* `y`.
pub fn sigmoid_backward(grad_out: &Tensor, y: &Tensor) -> Result<Tensor, NnError> {
    grad_out.expect_shape(y.shape())?;
    let data = grad_out
        .data()
        .iter()
        .zip(y.data())
        .map(|(&g, &s)| g * s * (1.0 - s))
        .collect();
    Tensor::new(y.shape().to_vec(), data)
}

/// 2x2 mean pooling, stride 2.
pub fn avgpool2(x: &Tensor) -> Result<Tensor, NnError> {
    let (c, h, w) = x.chw()?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(NnError::OddDimension {
            height: h,
            width: w,
        });
    }
    let (oh, ow) = (h / 2, w / 2);
    let src = x.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let p = &src[ch * h * w..(ch + 1) * h * w];
        for y in 0..oh {
            let r0 = &p[2 * y * w..(2 * y + 1) * w];
            let r1 = &p[(2 * y + 1) * w..(2 * y + 2) * w];
            for xo in 0..ow {
                let s = r0[2 * xo] + r0[2 * xo + 1] + r1[2 * xo] + r1[2 * xo + 1];
                out.push(s * 0.25);
            }
        }
    }
    Tensor::new(vec![c, oh, ow], out)
}

/// Spread each gradient element as `g / 4` over its 2x2 block.
pub fn avgpool2_backward(grad_out: &Tensor) -> Result<Tensor, NnError> {
    let q = grad_out.map(|g| g * 0.25);
    upsample2(&q)
}

/// Nearest-neighbour 2x upsampling.
pub fn upsample2(x: &Tensor) -> Result<Tensor, NnError> {
    let (c, h, w) = x.chw()?;
    let (oh, ow) = (2 * h, 2 * w);
    let src = x.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for y in 0..oh {
            let row = &src[ch * h * w + (y / 2) * w..ch * h * w + (y / 2 + 1) * w];
            for &v in row {
                out.push(v);
                out.push(v);
            }
        }
    }
    Tensor::new(vec![c, oh, ow], out)
}

/// Sum the four gradients of each 2x2 block.
pub fn upsample2_backward(grad_out: &Tensor) -> Result<Tensor, NnError> {
    let (_, h, w) = grad_out.chw()?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(NnError::OddDimension {
            height: h,
            width: w,
        });
    }
    let pooled = avgpool2(grad_out)?;
    Ok(pooled.map(|v| v * 4.0))
}
