//! Little-endian checkpoint format:
//!
//! ```text
//! "UWCOLOR1"                      8 bytes
//! u32 conv count (6)
//! per conv, in network order:
//!     u32 out_ch, u32 in_ch, u32 kh, u32 kw
//!     f64 weights, [out, in, kh, kw] row-major
//!     f64 biases
//! ```
//!
//! Parameter-free layers are implied by the fixed architecture.

use super::{ColorizerModel, CONV_CHANNELS};
use crate::nn::{ConvParams, Tensor};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"UWCOLOR1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckpointError {
    #[error("not a colorizer checkpoint (bad magic)")]
    BadMagic,
    #[error("checkpoint truncated at byte {0}")]
    TruncatedCheckpoint(usize),
    #[error("checkpoint layers disagree with the fixed architecture")]
    ArchMismatch,
    #[error("{0} unexpected bytes after the last layer")]
    TrailingBytes(usize),
}

pub fn save_model(model: &ColorizerModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + model.param_count() * 8 + 16 * model.convs().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(model.convs().len() as u32).to_le_bytes());
    for conv in model.convs() {
        for &d in conv.weights.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in conv.weights.data().iter().chain(conv.bias.data()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], CheckpointError> {
        let chunk = self
            .bytes
            .get(self.pos..self.pos + N)
            .ok_or(CheckpointError::TruncatedCheckpoint(self.bytes.len()))?;
        self.pos += N;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<usize, CheckpointError> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, CheckpointError> {
        (0..n)
            .map(|_| Ok(f64::from_le_bytes(self.take()?)))
            .collect()
    }
}

pub fn load_model(bytes: &[u8]) -> Result<ColorizerModel, CheckpointError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let mut rd = Cursor {
        bytes,
        pos: MAGIC.len(),
    };
    if rd.u32()? != CONV_CHANNELS.len() {
        return Err(CheckpointError::ArchMismatch);
    }
    let mut convs = Vec::with_capacity(CONV_CHANNELS.len());
    for &(in_ch, out_ch) in &CONV_CHANNELS {
        let dims = [rd.u32()?, rd.u32()?, rd.u32()?, rd.u32()?];
        if dims != [out_ch, in_ch, 3, 3] {
            return Err(CheckpointError::ArchMismatch);
        }
        let weights = rd.f64s(out_ch * in_ch * 9)?;
        let bias = rd.f64s(out_ch)?;
        let params = ConvParams::new(
            Tensor::new(dims.to_vec(), weights).expect("sized from dims"),
            Tensor::new(vec![out_ch], bias).expect("sized from dims"),
        )
        .map_err(|_| CheckpointError::ArchMismatch)?;
        convs.push(params);
    }
    if rd.pos != bytes.len() {
        return Err(CheckpointError::TrailingBytes(bytes.len() - rd.pos));
    }
    ColorizerModel::from_convs(convs).map_err(|_| CheckpointError::ArchMismatch)
}
