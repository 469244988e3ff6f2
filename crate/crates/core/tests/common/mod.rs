#![allow(dead_code)]

use std::fs;
use std::path::Path;
use uwe::dataset::{synth_degrade, synth_scene, DegradeParams};
use uwe::histeq::equalize;
use uwe::image::{GrayImage, Image, RgbImage};
use uwe::nn::Prng;
use uwe::ppm::write_ppm;

pub fn random_gray(prng: &mut Prng, max_side: usize) -> GrayImage {
    let w = 1 + prng.below(max_side);
    let h = 1 + prng.below(max_side);
    GrayImage::from_fn(w, h, |_, _| prng.below(256) as u8)
}

pub fn random_rgb(prng: &mut Prng, max_side: usize) -> RgbImage {
    let w = 1 + prng.below(max_side);
    let h = 1 + prng.below(max_side);
    RgbImage::from_fn(w, h, |_, _| {
        [
            prng.below(256) as u8,
            prng.below(256) as u8,
            prng.below(256) as u8,
        ]
    })
}

/// Gray images drawn with a random number of distinct levels, so that ties
/// and sparse histograms are common.
pub fn gray_corpus(seed: u64, count: usize, max_side: usize) -> Vec<GrayImage> {
    let mut prng = Prng::new(seed);
    (0..count)
        .map(|_| {
            let levels: Vec<u8> = (0..1 + prng.below(256))
                .map(|_| prng.below(256) as u8)
                .collect();
            let w = 1 + prng.below(max_side);
            let h = 1 + prng.below(max_side);
            GrayImage::from_fn(w, h, |_, _| levels[prng.below(levels.len())])
        })
        .collect()
}

/// A degraded synthetic scene, its equalized gray input and the clean target.
pub fn synthetic_pair(size: usize, seed: u64) -> (RgbImage, GrayImage, RgbImage) {
    let reference = synth_scene(size, size, seed);
    let degraded = synth_degrade(&reference, &DegradeParams::default()).unwrap();
    let input = equalize(&degraded.to_grayscale()).unwrap();
    (degraded, input, reference)
}

/// Write `count` degraded/clean pairs plus a manifest into `dir`.
pub fn write_dataset(dir: &Path, count: usize, size: usize) {
    let mut manifest = String::new();
    for k in 0..count {
        let (degraded, _, reference) = synthetic_pair(size, 500 + k as u64);
        let input = format!("in{k}.ppm");
        let target = format!("ref{k}.ppm");
        fs::write(dir.join(&input), write_ppm(&Image::Rgb(degraded))).unwrap();
        fs::write(dir.join(&target), write_ppm(&Image::Rgb(reference))).unwrap();
        manifest.push_str(&format!("{input}\t{target}\n"));
    }
    fs::write(dir.join("manifest.tsv"), manifest).unwrap();
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `img` and the
/// continuous uniform CDF on [0, 255], checked on both sides of every jump.
pub fn ks_to_uniform(img: &GrayImage) -> f64 {
    let mut counts = [0u64; 256];
    for &v in img.as_bytes() {
        counts[v as usize] += 1;
    }
    let n = img.len() as f64;
    let mut below = 0.0;
    let mut ks: f64 = 0.0;
    for (v, &c) in counts.iter().enumerate() {
        let at = below + c as f64 / n;
        let u = v as f64 / 255.0;
        ks = ks.max((u - below).abs()).max((at - u).abs());
        below = at;
    }
    ks
}
