//! The whole pipeline: train a colorizer on synthetic pairs, then decolor,
//! equalize and re-colorize a held-out degraded image. Writes PPMs to the
//! given directory (default: the system temp dir).
//!
//!     cargo run --release -p uwe --example enhance_pipeline -- out/

use std::path::PathBuf;
use std::time::Instant;
use std::{env, fs};
use uwe::colorizer::{TrainConfig, TrainingPair};
use uwe::dataset::{extract_patches, synth_degrade, synth_scene, DegradeParams};
use uwe::histeq::equalize;
use uwe::image::Image;
use uwe::metrics::psnr;
use uwe::nn::Prng;
use uwe::{enhance, enhance_gray, train, write_ppm};

fn main() -> std::io::Result<()> {
    let dir = env::args().nth(1).map_or_else(env::temp_dir, PathBuf::from);
    fs::create_dir_all(&dir)?;
    let params = DegradeParams::default();

    let cfg = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let mut prng = Prng::new(7);
    let mut pairs = Vec::new();
    for k in 0..6 {
        let clean = synth_scene(64, 64, k);
        let gray = equalize(&synth_degrade(&clean, &params).unwrap().to_grayscale()).unwrap();
        for (g, c) in extract_patches(
            &gray,
            &clean,
            cfg.patch_size,
            cfg.patches_per_image,
            &mut prng,
        )
        .unwrap()
        {
            pairs.push(TrainingPair::from_images(&g, &c).unwrap());
        }
    }
    let start = Instant::now();
    let (model, history) = train(&pairs, &cfg).unwrap();
    println!(
        "trained on {} patches: {} steps, loss {:.4} -> {:.4} in {:.1?}",
        pairs.len(),
        history.per_step.len(),
        history.loss_at(1).unwrap(),
        history.last().unwrap(),
        start.elapsed()
    );

    let clean = synth_scene(90, 70, 99);
    let degraded = Image::Rgb(synth_degrade(&clean, &params).unwrap());
    let gray = enhance_gray(&degraded).unwrap();
    let colored = enhance(&degraded, &model).unwrap();
    println!(
        "held-out psnr vs clean: degraded {}, enhanced {}",
        psnr(&degraded, &Image::Rgb(clean.clone())).unwrap(),
        psnr(&colored, &clean).unwrap()
    );

    for (name, img) in [
        ("clean.ppm", Image::Rgb(clean)),
        ("degraded.ppm", degraded),
        ("equalized.pgm", Image::Gray(gray)),
        ("enhanced.ppm", Image::Rgb(colored)),
    ] {
        fs::write(dir.join(name), write_ppm(&img))?;
    }
    println!("images written to {}", dir.display());
    Ok(())
}
