//! Binary PPM (`P6`) and PGM (`P5`) codec, maxval 255 only.
//!
//! The writer always emits the canonical header `P6\n{w} {h}\n255\n`; the
//! reader accepts any whitespace layout and `#` comments in the header.

use crate::image::{GrayImage, Image, RgbImage};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PpmError {
    #[error("unsupported magic number {0:?}, expected P5 or P6")]
    UnsupportedMagic(String),
    #[error("unsupported maxval {0}, only 255 is supported")]
    UnsupportedMaxval(u64),
    #[error("payload truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("malformed header: {0}")]
    MalformedHeader(&'static str),
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &'static str) -> Result<u64, PpmError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PpmError::MalformedHeader(what));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PpmError::MalformedHeader(what))
    }
}

/// Decode a binary PPM or PGM file.
pub fn read_ppm(bytes: &[u8]) -> Result<Image, PpmError> {
    if bytes.len() < 2 {
        return Err(PpmError::MalformedHeader("missing magic number"));
    }
    let magic = &bytes[..2];
    let channels = match magic {
        b"P6" => 3,
        b"P5" => 1,
        _ => {
            return Err(PpmError::UnsupportedMagic(
                String::from_utf8_lossy(magic).into_owned(),
            ))
        }
    };
    let mut rd = HeaderReader { bytes, pos: 2 };
    if !rd
        .bytes
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(PpmError::MalformedHeader("no separator after magic number"));
    }
    let width = rd.number("width")?;
    let height = rd.number("height")?;
    let maxval = rd.number("maxval")?;
    if maxval != 255 {
        return Err(PpmError::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(rd.pos) {
        Some(b) if b.is_ascii_whitespace() => rd.pos += 1,
        _ => return Err(PpmError::MalformedHeader("no separator after maxval")),
    }
    let (width, height) = (
        usize::try_from(width).map_err(|_| PpmError::MalformedHeader("width"))?,
        usize::try_from(height).map_err(|_| PpmError::MalformedHeader("height"))?,
    );
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or(PpmError::MalformedHeader("dimensions overflow"))?;
    let payload = &bytes[rd.pos..];
    if payload.len() < expected {
        return Err(PpmError::Truncated {
            expected,
            actual: payload.len(),
        });
    }
    let data = payload[..expected].to_vec();
    Ok(if channels == 3 {
        Image::Rgb(RgbImage::new(width, height, data).expect("length checked"))
    } else {
        Image::Gray(GrayImage::new(width, height, data).expect("length checked"))
    })
}

/// Encode in canonical form.
pub fn write_ppm(img: &Image) -> Vec<u8> {
    let magic = match img {
        Image::Rgb(_) => "P6",
        Image::Gray(_) => "P5",
    };
    let header = format!("{magic}\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.as_bytes().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.as_bytes());
    out
}
