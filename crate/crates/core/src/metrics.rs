//! MSE, PSNR and Shannon entropy, plus the JSON evaluation report.

use crate::histeq::{histogram, HistEqError};
use crate::image::{GrayImage, Image, RgbImage};
use serde::ser::Serializer;
use serde::{Deserialize, Deserializer, Serialize};
use std::fmt;
use thiserror::Error;

/// Peak signal value for 8-bit samples.
pub const PEAK: f64 = 255.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("images differ in shape: {a:?} vs {b:?} (width, height, channels)")]
    DimensionMismatch {
        a: (usize, usize, usize),
        b: (usize, usize, usize),
    },
    #[error("image has no pixels")]
    EmptyImage,
}

impl From<HistEqError> for MetricsError {
    fn from(_: HistEqError) -> Self {
        MetricsError::EmptyImage
    }
}

/// Anything with 8-bit samples laid out as `width x height x channels`.
pub trait Samples {
    fn shape(&self) -> (usize, usize, usize);
    fn samples(&self) -> &[u8];
}

impl Samples for GrayImage {
    fn shape(&self) -> (usize, usize, usize) {
        (self.width(), self.height(), 1)
    }
    fn samples(&self) -> &[u8] {
        self.as_bytes()
    }
}

impl Samples for RgbImage {
    fn shape(&self) -> (usize, usize, usize) {
        (self.width(), self.height(), 3)
    }
    fn samples(&self) -> &[u8] {
        self.as_bytes()
    }
}

impl Samples for Image {
    fn shape(&self) -> (usize, usize, usize) {
        (self.width(), self.height(), self.channels())
    }
    fn samples(&self) -> &[u8] {
        self.as_bytes()
    }
}

/// Mean over all pixels and channels of the squared difference.
pub fn mse<A: Samples + ?Sized, B: Samples + ?Sized>(a: &A, b: &B) -> Result<f64, MetricsError> {
    if a.shape() != b.shape() {
        return Err(MetricsError::DimensionMismatch {
            a: a.shape(),
            b: b.shape(),
        });
    }
    let (sa, sb) = (a.samples(), b.samples());
    if sa.is_empty() {
        return Err(MetricsError::EmptyImage);
    }
    let sum: f64 = sa
        .iter()
        .zip(sb)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / sa.len() as f64)
}

/// Peak signal-to-noise ratio in decibels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    /// The two images are identical.
    Infinite,
}

impl Psnr {
    pub fn from_mse(mse: f64) -> Psnr {
        if mse == 0.0 {
            Psnr::Infinite
        } else {
            Psnr::Finite(10.0 * (PEAK * PEAK / mse).log10())
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Psnr::Finite(v) => Some(v),
            Psnr::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Psnr::Infinite)
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Finite(v) => write!(f, "{v}"),
            Psnr::Infinite => f.write_str("inf"),
        }
    }
}

// JSON has no infinity; it travels as the string "inf".
impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Psnr::Finite(v) => s.serialize_f64(*v),
            Psnr::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Psnr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Psnr::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Psnr::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad psnr value {s:?}"))),
        }
    }
}

pub fn psnr<A: Samples + ?Sized, B: Samples + ?Sized>(a: &A, b: &B) -> Result<Psnr, MetricsError> {
    mse(a, b).map(Psnr::from_mse)
}

/// Shannon entropy of the intensity histogram, in bits.
pub fn entropy(img: &GrayImage) -> Result<f64, MetricsError> {
    let h = histogram(img)?;
    let total = h.total() as f64;
    let bits = h
        .counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>();
    // a single occupied bin yields -0.0
    Ok(bits.max(0.0))
}

/// Entropy of the grayscale view of either kind of image.
pub fn image_entropy(img: &Image) -> Result<f64, MetricsError> {
    match img {
        Image::Gray(g) => entropy(g),
        Image::Rgb(c) => entropy(&c.to_grayscale()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub input_id: String,
    pub mse: f64,
    pub psnr_db: Psnr,
    pub entropy_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub mean_mse: f64,
    /// Mean over finite PSNR entries; `None` when every entry is infinite.
    pub mean_psnr_db: Option<f64>,
    pub infinite_psnr_count: usize,
    pub mean_entropy_bits: f64,
    pub image_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_image: Vec<ImageMetrics>,
    pub aggregate: AggregateMetrics,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl MetricsReport {
    pub fn from_records(per_image: Vec<ImageMetrics>) -> Self {
        let aggregate = AggregateMetrics {
            mean_mse: mean(per_image.iter().map(|r| r.mse)).unwrap_or(0.0),
            mean_psnr_db: mean(per_image.iter().filter_map(|r| r.psnr_db.finite())),
            infinite_psnr_count: per_image.iter().filter(|r| r.psnr_db.is_infinite()).count(),
            mean_entropy_bits: mean(per_image.iter().map(|r| r.entropy_bits)).unwrap_or(0.0),
            image_count: per_image.len(),
        };
        Self {
            per_image,
            aggregate,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(d: &[u8]) -> GrayImage {
        GrayImage::new(d.len(), 1, d.to_vec()).unwrap()
    }

    #[test]
    fn mse_anchors() {
        let x = RgbImage::from_fn(4, 3, |x, y| [x as u8, y as u8, 9]);
        assert_eq!(mse(&x, &x).unwrap(), 0.0);
        assert_eq!(mse(&g(&[0]), &g(&[255])).unwrap(), 65025.0);
    }

    #[test]
    fn mse_shape_checks() {
        assert!(matches!(
            mse(&g(&[0, 1]), &g(&[0])),
            Err(MetricsError::DimensionMismatch { .. })
        ));
        let gray = Image::Gray(GrayImage::filled(2, 2, 0));
        let rgb = Image::Rgb(RgbImage::filled(2, 2, [0; 3]));
        assert!(matches!(
            mse(&gray, &rgb),
            Err(MetricsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn psnr_anchors() {
        assert_eq!(Psnr::from_mse(0.0), Psnr::Infinite);
        assert_eq!(Psnr::from_mse(65025.0), Psnr::Finite(0.0));
        let Psnr::Finite(db) = Psnr::from_mse(650.25) else {
            panic!()
        };
        assert!((db - 20.0).abs() < 1e-12);
        let x = g(&[1, 2, 3]);
        assert_eq!(psnr(&x, &x).unwrap(), Psnr::Infinite);
    }

    #[test]
    fn entropy_anchors() {
        assert_eq!(entropy(&GrayImage::filled(5, 5, 77)).unwrap(), 0.0);
        assert_eq!(entropy(&g(&[0, 255])).unwrap(), 1.0);
        let ramp = GrayImage::from_fn(256, 1, |x, _| x as u8);
        assert!((entropy(&ramp).unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(
            entropy(&GrayImage::filled(0, 0, 0)),
            Err(MetricsError::EmptyImage)
        );
    }

    #[test]
    fn report_aggregates_and_serializes_infinity() {
        let report = MetricsReport::from_records(vec![
            ImageMetrics {
                input_id: "a".into(),
                mse: 0.0,
                psnr_db: Psnr::Infinite,
                entropy_bits: 2.0,
            },
            ImageMetrics {
                input_id: "b".into(),
                mse: 650.25,
                psnr_db: Psnr::Finite(20.0),
                entropy_bits: 4.0,
            },
        ]);
        assert_eq!(report.aggregate.image_count, 2);
        assert_eq!(report.aggregate.infinite_psnr_count, 1);
        assert_eq!(report.aggregate.mean_psnr_db, Some(20.0));
        assert_eq!(report.aggregate.mean_mse, 325.125);
        assert_eq!(report.aggregate.mean_entropy_bits, 3.0);

        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["per_image"][0]["psnr_db"], "inf");
        assert_eq!(json["per_image"][1]["psnr_db"], 20.0);
        assert_eq!(json["aggregate"]["infinite_psnr_count"], 1);
        let back: MetricsReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }

    fn pair() -> impl Strategy<Value = (GrayImage, GrayImage)> {
        (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
            let v = proptest::collection::vec(any::<u8>(), w * h);
            (v.clone(), v).prop_map(move |(a, b)| {
                (
                    GrayImage::new(w, h, a).unwrap(),
                    GrayImage::new(w, h, b).unwrap(),
                )
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn mse_is_symmetric_and_zero_only_on_equality((a, b) in pair()) {
            let ab = mse(&a, &b).unwrap();
            prop_assert_eq!(ab, mse(&b, &a).unwrap());
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab == 0.0, a == b);
        }

        #[test]
        fn entropy_bounded_and_relabel_invariant(
            data in proptest::collection::vec(any::<u8>(), 1..300),
            shift in 1u8..=255,
        ) {
            let img = g(&data);
            let e = entropy(&img).unwrap();
            prop_assert!((0.0..=8.0).contains(&e));
            // adding a constant mod 256 is a bijection on intensities
            let relabeled = img.map(|v| v.wrapping_add(shift));
            prop_assert!((entropy(&relabeled).unwrap() - e).abs() < 1e-12);
        }

        #[test]
        fn psnr_decreases_with_mse(a in 1e-6f64..1e6, b in 1e-6f64..1e6) {
            prop_assume!(a < b);
            let (pa, pb) = (Psnr::from_mse(a).finite().unwrap(), Psnr::from_mse(b).finite().unwrap());
            prop_assert!(pa > pb);
        }
    }
}
