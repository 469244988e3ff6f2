//! 8-bit raster types and the conversions the pipeline runs on them.
//!
//! Every real-to-byte conversion in the crate goes through [`to_u8`], which
//! rounds half away from zero after clamping to `[0, 255]`.

use thiserror::Error;

/// Number of representable intensity levels.
pub const LEVELS: usize = 256;

/// ITU-R BT.601 luma weights.
const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("pixel buffer holds {actual} bytes, expected {expected} for {width}x{height}")]
    BufferSize {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },
    #[error("non-finite value in channel plane")]
    NonFiniteValue,
    #[error("image of {width}x{height} is too small to reflect-pad")]
    ImageTooSmall { width: usize, height: usize },
    #[error("padding multiple must be at least 1")]
    ZeroMultiple,
    #[error("plane dimensions disagree")]
    PlaneMismatch,
}

/// Clamp to `[0, 255]` and round half away from zero.
#[inline]
pub fn to_u8(v: f64) -> u8 {
    v.clamp(0.0, 255.0).round() as u8
}

/// Interleaved row-major RGB image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        let expected = 3 * width * height;
        if pixels.len() != expected {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        let pixels = rgb
            .iter()
            .copied()
            .cycle()
            .take(3 * width * height)
            .collect();
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Self {
        let mut pixels = Vec::with_capacity(3 * width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Raw interleaved `r, g, b` bytes.
    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.pixels.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// Decolor with BT.601 luma weights.
    pub fn to_grayscale(&self) -> GrayImage {
        let data = self
            .pixels()
            .map(|[r, g, b]| to_u8(LUMA_R * r as f64 + LUMA_G * g as f64 + LUMA_B * b as f64))
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Copy out the `w`x`h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> RgbImage {
        assert!(
            x0 + w <= self.width && y0 + h <= self.height,
            "crop window out of bounds"
        );
        let mut pixels = Vec::with_capacity(3 * w * h);
        for y in y0..y0 + h {
            let start = 3 * (y * self.width + x0);
            pixels.extend_from_slice(&self.pixels[start..start + 3 * w]);
        }
        RgbImage {
            width: w,
            height: h,
            pixels,
        }
    }

    /// Split into three normalized planes.
    pub fn normalize(&self) -> [Plane; 3] {
        let mut planes: [Vec<f64>; 3] = Default::default();
        for p in planes.iter_mut() {
            p.reserve_exact(self.width * self.height);
        }
        for px in self.pixels.chunks_exact(3) {
            for c in 0..3 {
                planes[c].push(px[c] as f64 / 255.0);
            }
        }
        planes.map(|data| Plane {
            width: self.width,
            height: self.height,
            data,
        })
    }
}

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        let expected = width * height;
        if data.len() != expected {
            return Err(ImageError::BufferSize {
                width,
                height,
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, v: u8) -> Self {
        Self {
            width,
            height,
            data: vec![v; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Apply `f` to every intensity.
    pub fn map(&self, f: impl Fn(u8) -> u8) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Replicate the intensity into all three channels.
    pub fn to_rgb(&self) -> RgbImage {
        RgbImage {
            width: self.width,
            height: self.height,
            pixels: self.data.iter().flat_map(|&v| [v, v, v]).collect(),
        }
    }

    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> GrayImage {
        assert!(
            x0 + w <= self.width && y0 + h <= self.height,
            "crop window out of bounds"
        );
        let mut data = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            let start = y * self.width + x0;
            data.extend_from_slice(&self.data[start..start + w]);
        }
        GrayImage {
            width: w,
            height: h,
            data,
        }
    }

    /// Map intensities to `[0, 1]` as `v / 255`.
    pub fn normalize(&self) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v as f64 / 255.0).collect(),
        }
    }

    /// Grow each side up to the next multiple of `multiple` by mirror
    /// reflection about the last row/column (the edge itself is not repeated).
    ///
    /// Padding wider than the image keeps bouncing between the two borders,
    /// so anything at least 2 pixels wide along a padded axis can be padded.
    pub fn pad_reflect(&self, multiple: usize) -> Result<(GrayImage, OriginalDims), ImageError> {
        if multiple == 0 {
            return Err(ImageError::ZeroMultiple);
        }
        let dims = OriginalDims {
            width: self.width,
            height: self.height,
        };
        let new_w = self.width.div_ceil(multiple) * multiple;
        let new_h = self.height.div_ceil(multiple) * multiple;
        let too_small = |size: usize, padded: usize| padded != size && size < 2;
        if too_small(self.width, new_w) || too_small(self.height, new_h) {
            return Err(ImageError::ImageTooSmall {
                width: self.width,
                height: self.height,
            });
        }
        if new_w == self.width && new_h == self.height {
            return Ok((self.clone(), dims));
        }
        let padded = GrayImage::from_fn(new_w, new_h, |x, y| {
            self.get(reflect(x, self.width), reflect(y, self.height))
        });
        Ok((padded, dims))
    }
}

/// Mirror index `i` into `[0, n)` without repeating the edge sample.
fn reflect(i: usize, n: usize) -> usize {
    if i < n {
        return i;
    }
    let period = 2 * (n - 1);
    let r = i % period;
    if r < n {
        r
    } else {
        period - r
    }
}

/// Dimensions recorded by [`GrayImage::pad_reflect`] so the padding can be
/// cropped off again.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OriginalDims {
    pub width: usize,
    pub height: usize,
}

impl OriginalDims {
    pub fn crop_gray(&self, img: &GrayImage) -> GrayImage {
        img.crop(0, 0, self.width, self.height)
    }

    pub fn crop_rgb(&self, img: &RgbImage) -> RgbImage {
        img.crop(0, 0, self.width, self.height)
    }
}

/// A single real-valued channel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

/// Reassemble three real-valued planes into an RGB image.
pub fn denormalize(
    planes: [&[f64]; 3],
    width: usize,
    height: usize,
) -> Result<RgbImage, ImageError> {
    let n = width * height;
    if planes.iter().any(|p| p.len() != n) {
        return Err(ImageError::PlaneMismatch);
    }
    if planes.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(ImageError::NonFiniteValue);
    }
    let mut pixels = Vec::with_capacity(3 * n);
    for i in 0..n {
        for plane in &planes {
            pixels.push(to_u8(plane[i].clamp(0.0, 1.0) * 255.0));
        }
    }
    Ok(RgbImage {
        width,
        height,
        pixels,
    })
}

/// Either kind of raster, as produced by the PPM/PGM reader.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Image {
    Rgb(RgbImage),
    Gray(GrayImage),
}

impl Image {
    pub fn width(&self) -> usize {
        match self {
            Image::Rgb(i) => i.width(),
            Image::Gray(i) => i.width(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            Image::Rgb(i) => i.height(),
            Image::Gray(i) => i.height(),
        }
    }

    pub fn channels(&self) -> usize {
        match self {
            Image::Rgb(_) => 3,
            Image::Gray(_) => 1,
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        match self {
            Image::Rgb(i) => i.as_bytes(),
            Image::Gray(i) => i.as_bytes(),
        }
    }

    /// Grayscale view: decolors RGB, clones gray.
    pub fn to_grayscale(&self) -> GrayImage {
        match self {
            Image::Rgb(i) => i.to_grayscale(),
            Image::Gray(i) => i.clone(),
        }
    }
}

impl From<RgbImage> for Image {
    fn from(i: RgbImage) -> Self {
        Image::Rgb(i)
    }
}

impl From<GrayImage> for Image {
    fn from(i: GrayImage) -> Self {
        Image::Gray(i)
    }
}
