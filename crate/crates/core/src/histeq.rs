//! Global histogram equalization over the floored, scaled cumulative
//! histogram:
//!
//! ```text
//! T(k) = floor((L - 1) * sum_{n <= k} count[n] / total)
//! ```
//!
//! evaluated as `((L - 1) * cum_k) / total` in integer arithmetic, so the
//! floor is exact and `equalize` is exactly idempotent.

use crate::image::{GrayImage, LEVELS};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HistEqError {
    #[error("image has no pixels")]
    EmptyImage,
    #[error("histogram needs between 2 and 256 levels, got {0}")]
    BadLevelCount(usize),
}

/// Raw per-intensity pixel counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    /// Build a histogram with an arbitrary number of levels (`counts.len()`).
    pub fn from_counts(counts: Vec<u64>) -> Result<Self, HistEqError> {
        if !(2..=LEVELS).contains(&counts.len()) {
            return Err(HistEqError::BadLevelCount(counts.len()));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(HistEqError::EmptyImage);
        }
        Ok(Self { counts, total })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn levels(&self) -> usize {
        self.counts.len()
    }

    /// Normalized bin mass `p_n`.
    pub fn proportion(&self, n: usize) -> f64 {
        self.counts[n] as f64 / self.total as f64
    }

    /// Largest single-bin proportion.
    pub fn max_proportion(&self) -> f64 {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        max as f64 / self.total as f64
    }

    /// Highest intensity with a nonzero count.
    pub fn max_occupied(&self) -> usize {
        self.counts.iter().rposition(|&c| c > 0).expect("total > 0")
    }
}

/// Count each intensity of `img`.
pub fn histogram(img: &GrayImage) -> Result<Histogram, HistEqError> {
    if img.is_empty() {
        return Err(HistEqError::EmptyImage);
    }
    let mut counts = vec![0u64; LEVELS];
    for &v in img.as_bytes() {
        counts[v as usize] += 1;
    }
    Ok(Histogram {
        counts,
        total: img.len() as u64,
    })
}

/// Lookup table from input intensity to equalized intensity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntensityMap {
    table: Vec<u8>,
}

impl IntensityMap {
    pub fn table(&self) -> &[u8] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, v: u8) -> u8 {
        self.table[v as usize]
    }
}

pub fn equalization_map(h: &Histogram) -> IntensityMap {
    let top = (h.levels() - 1) as u128;
    let total = h.total as u128;
    let mut cum = 0u128;
    let table = h
        .counts
        .iter()
        .map(|&c| {
            cum += c as u128;
            (top * cum / total) as u8
        })
        .collect();
    IntensityMap { table }
}

/// Equalize a grayscale image pixelwise through its own equalization map.
pub fn equalize(img: &GrayImage) -> Result<GrayImage, HistEqError> {
    let map = equalization_map(&histogram(img)?);
    Ok(img.map(|v| map.apply(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: usize, h: usize, d: &[u8]) -> GrayImage {
        GrayImage::new(w, h, d.to_vec()).unwrap()
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&gray(1, 1, &[5])).unwrap();
        assert_eq!(h.total(), 1);
        assert_eq!(h.counts()[5], 1);
        assert_eq!(h.counts().iter().sum::<u64>(), 1);

        let h = histogram(&gray(2, 2, &[0, 0, 1, 3])).unwrap();
        assert_eq!(&h.counts()[..4], &[2, 1, 0, 1]);
        assert_eq!(h.total(), 4);
        assert_eq!(h.max_occupied(), 3);
    }

    #[test]
    fn empty_image_rejected() {
        let e = GrayImage::new(0, 3, vec![]).unwrap();
        assert_eq!(histogram(&e), Err(HistEqError::EmptyImage));
        assert_eq!(equalize(&e), Err(HistEqError::EmptyImage));
        assert_eq!(
            Histogram::from_counts(vec![0; 4]),
            Err(HistEqError::EmptyImage)
        );
        assert_eq!(
            Histogram::from_counts(vec![1]),
            Err(HistEqError::BadLevelCount(1))
        );
    }

    #[test]
    fn constant_image_maps_to_top() {
        for v in [0u8, 17, 255] {
            let img = GrayImage::filled(3, 2, v);
            let map = equalization_map(&histogram(&img).unwrap());
            assert_eq!(map.apply(v), 255);
            assert!(equalize(&img).unwrap().as_bytes().iter().all(|&p| p == 255));
        }
    }

    #[test]
    fn four_level_hand_example() {
        // pixels [0,0,1,3] at L = 4: cumulative proportions 0.5, 0.75, 0.75, 1
        let h = Histogram::from_counts(vec![2, 1, 0, 1]).unwrap();
        assert_eq!(equalization_map(&h).table(), &[1, 2, 2, 3]);
    }

    #[test]
    fn one_of_each_intensity_is_identity() {
        let img = GrayImage::from_fn(256, 1, |x, _| x as u8);
        let map = equalization_map(&histogram(&img).unwrap());
        for k in 0..256usize {
            assert_eq!((255 * (k + 1)) / 256, k);
            assert_eq!(map.table()[k] as usize, k);
        }
    }

    #[test]
    fn four_distinct_values() {
        let out = equalize(&gray(2, 2, &[10, 20, 30, 40])).unwrap();
        assert_eq!(out.as_bytes(), &[63, 127, 191, 255]);
    }

    fn any_gray() -> impl Strategy<Value = GrayImage> {
        (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), w * h)
                .prop_map(move |d| GrayImage::new(w, h, d).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn counts_sum_to_total(img in any_gray()) {
            let h = histogram(&img).unwrap();
            prop_assert_eq!(h.counts().iter().sum::<u64>(), h.total());
            prop_assert_eq!(h.total() as usize, img.width() * img.height());
        }

        #[test]
        fn map_is_monotone_and_saturates(img in any_gray()) {
            let h = histogram(&img).unwrap();
            let t = equalization_map(&h);
            prop_assert!(t.table().windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(t.table()[h.max_occupied()], 255);
        }

        #[test]
        fn equalize_is_idempotent(img in any_gray()) {
            let once = equalize(&img).unwrap();
            prop_assert_eq!((once.width(), once.height()), (img.width(), img.height()));
            prop_assert_eq!(equalize(&once).unwrap(), once);
        }
    }
}
