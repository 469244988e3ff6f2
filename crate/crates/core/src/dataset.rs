//! Paired-image manifests, seeded patch extraction and a synthetic
//! underwater degradation so training and evaluation run without external
//! data.

use crate::image::{to_u8, GrayImage, RgbImage};
use crate::nn::Prng;
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("manifest is not valid UTF-8")]
    InvalidUtf8,
    #[error("line {line}: expected `input<TAB>reference`")]
    MalformedLine { line: usize },
    #[error("line {line}: duplicate pair {input:?} / {reference:?}")]
    DuplicatePair {
        line: usize,
        input: String,
        reference: String,
    },
    #[error("patch size {size} does not fit a {width}x{height} image")]
    PatchTooLarge {
        size: usize,
        width: usize,
        height: usize,
    },
    #[error("gray and color images differ in size")]
    PairSizeMismatch,
    #[error("degradation parameter {name} = {value} out of range")]
    BadDegradeParam { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub input_path: String,
    pub reference_path: String,
    /// 1-based line in the manifest file.
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Parse `input<TAB>reference` lines. Blank lines and lines starting with
/// `#` are skipped.
pub fn load_manifest(bytes: &[u8]) -> Result<Manifest, DatasetError> {
    let text = std::str::from_utf8(bytes).map_err(|_| DatasetError::InvalidUtf8)?;
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let [input, reference] = fields[..] else {
            return Err(DatasetError::MalformedLine { line });
        };
        if input.is_empty() || reference.is_empty() {
            return Err(DatasetError::MalformedLine { line });
        }
        if !seen.insert((input, reference)) {
            return Err(DatasetError::DuplicatePair {
                line,
                input: input.to_owned(),
                reference: reference.to_owned(),
            });
        }
        entries.push(ManifestEntry {
            input_path: input.to_owned(),
            reference_path: reference.to_owned(),
            line,
        });
    }
    Ok(Manifest { entries })
}

/// Top-left corner of a square patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Corner {
    pub x: usize,
    pub y: usize,
}

/// Draw `count` corners uniformly over the valid positions of a
/// `size`x`size` window (`x` first, then `y`, per corner).
pub fn draw_corners(
    width: usize,
    height: usize,
    size: usize,
    count: usize,
    prng: &mut Prng,
) -> Result<Vec<Corner>, DatasetError> {
    if size == 0 || size > width || size > height {
        return Err(DatasetError::PatchTooLarge {
            size,
            width,
            height,
        });
    }
    let (nx, ny) = (width - size + 1, height - size + 1);
    Ok((0..count)
        .map(|_| {
            let x = prng.below(nx);
            let y = prng.below(ny);
            Corner { x, y }
        })
        .collect())
}

/// Cut `count` aligned patch pairs at seeded random corners.
pub fn extract_patches(
    gray: &GrayImage,
    rgb: &RgbImage,
    size: usize,
    count: usize,
    prng: &mut Prng,
) -> Result<Vec<(GrayImage, RgbImage)>, DatasetError> {
    if (gray.width(), gray.height()) != (rgb.width(), rgb.height()) {
        return Err(DatasetError::PairSizeMismatch);
    }
    let corners = draw_corners(gray.width(), gray.height(), size, count, prng)?;
    Ok(corners
        .into_iter()
        .map(|c| {
            (
                gray.crop(c.x, c.y, size, size),
                rgb.crop(c.x, c.y, size, size),
            )
        })
        .collect())
}

/// Per-channel gain, contrast compression and fog lift:
/// `v' = round(clamp(gain_c * (contrast * v / 255 + lift), 0, 1) * 255)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradeParams {
    pub r_gain: f64,
    pub g_gain: f64,
    pub b_gain: f64,
    pub contrast: f64,
    pub lift: f64,
}

impl Default for DegradeParams {
    fn default() -> Self {
        Self {
            r_gain: 0.35,
            g_gain: 0.85,
            b_gain: 0.95,
            contrast: 0.6,
            lift: 0.1,
        }
    }
}

impl DegradeParams {
    pub const IDENTITY: DegradeParams = DegradeParams {
        r_gain: 1.0,
        g_gain: 1.0,
        b_gain: 1.0,
        contrast: 1.0,
        lift: 0.0,
    };

    pub fn validate(&self) -> Result<(), DatasetError> {
        let unit = |name, value: f64| {
            if value > 0.0 && value <= 1.0 {
                Ok(())
            } else {
                Err(DatasetError::BadDegradeParam { name, value })
            }
        };
        unit("r_gain", self.r_gain)?;
        unit("g_gain", self.g_gain)?;
        unit("b_gain", self.b_gain)?;
        unit("contrast", self.contrast)?;
        if !(0.0..=0.3).contains(&self.lift) {
            return Err(DatasetError::BadDegradeParam {
                name: "lift",
                value: self.lift,
            });
        }
        Ok(())
    }
}

/// Apply a blue-green cast with contrast loss and haze.
pub fn synth_degrade(img: &RgbImage, params: &DegradeParams) -> Result<RgbImage, DatasetError> {
    params.validate()?;
    let gains = [params.r_gain, params.g_gain, params.b_gain];
    // one table per channel; the formula depends only on (channel, value)
    let tables: Vec<[u8; 256]> = gains
        .iter()
        .map(|&k| {
            std::array::from_fn(|v| {
                let t = k * (params.contrast * (v as f64 / 255.0) + params.lift);
                to_u8(t.clamp(0.0, 1.0) * 255.0)
            })
        })
        .collect();
    let pixels = img
        .as_bytes()
        .chunks_exact(3)
        .flat_map(|p| {
            [
                tables[0][p[0] as usize],
                tables[1][p[1] as usize],
                tables[2][p[2] as usize],
            ]
        })
        .collect();
    Ok(RgbImage::new(img.width(), img.height(), pixels).expect("same size as input"))
}

/// A smooth, seeded test scene: a few soft colored blobs over a vertical
/// color gradient. Stands in for real reference photographs.
pub fn synth_scene(width: usize, height: usize, seed: u64) -> RgbImage {
    let mut prng = Prng::new(seed);
    let mut pick = |lo: f64, hi: f64| lo + (hi - lo) * prng.uniform();
    let top = [pick(0.0, 1.0), pick(0.0, 1.0), pick(0.0, 1.0)];
    let bottom = [pick(0.0, 1.0), pick(0.0, 1.0), pick(0.0, 1.0)];
    let blobs: Vec<([f64; 2], f64, [f64; 3])> = (0..3)
        .map(|_| {
            let center = [pick(0.0, 1.0), pick(0.0, 1.0)];
            let radius = pick(0.15, 0.4);
            let color = [pick(0.0, 1.0), pick(0.0, 1.0), pick(0.0, 1.0)];
            (center, radius, color)
        })
        .collect();
    RgbImage::from_fn(width, height, |x, y| {
        let u = (x as f64 + 0.5) / width as f64;
        let v = (y as f64 + 0.5) / height as f64;
        let mut c: [f64; 3] = std::array::from_fn(|i| top[i] * (1.0 - v) + bottom[i] * v);
        for (center, radius, color) in &blobs {
            let d2 = (u - center[0]).powi(2) + (v - center[1]).powi(2);
            let a = (-d2 / (radius * radius)).exp();
            for i in 0..3 {
                c[i] = c[i] * (1.0 - a) + color[i] * a;
            }
        }
        c.map(|ch| to_u8(ch * 255.0))
    })
}
