//! Overfit the colorizer on eight synthetic 32x32 underwater pairs and report
//! the loss curve and per-patch PSNR of the result.
//!
//!     cargo run --release -p uwe --example train_overfit

use std::ops::ControlFlow;
use std::time::Instant;
use uwe::colorizer::{colorize, train_with, ColorizerModel, TrainConfig, TrainingPair};
use uwe::dataset::{synth_degrade, synth_scene, DegradeParams};
use uwe::histeq::equalize;
use uwe::image::{GrayImage, RgbImage};
use uwe::metrics::psnr;

fn main() {
    let size = 32;
    let data: Vec<_> = (0..8)
        .map(|k| {
            let reference = synth_scene(size, size, 1000 + k);
            let degraded = synth_degrade(&reference, &DegradeParams::default()).unwrap();
            let input = equalize(&degraded.to_grayscale()).unwrap();
            (input, reference)
        })
        .collect();
    let pairs: Vec<_> = data
        .iter()
        .map(|(g, c)| TrainingPair::from_images(g, c).unwrap())
        .collect();

    // Train until the batch loss is below 0.005 and every patch clears 23 dB,
    // checking the patches every few steps.
    let cfg = TrainConfig {
        epochs: 3000,
        ..TrainConfig::default()
    };
    let start = Instant::now();
    let mut loss_reached = None;
    let (model, history) = train_with(&pairs, &cfg, |step, loss, model| {
        if step % 100 == 0 || step == 1 {
            println!("step {step:>5} loss {loss:.6} ({:.1?})", start.elapsed());
        }
        if loss < 0.005 && loss_reached.is_none() {
            println!("loss {loss:.6} at step {step}");
            loss_reached = Some(step);
        }
        if loss_reached.is_some() && step % 10 == 0 {
            let worst = worst_psnr(model, &data);
            if worst > 23.0 {
                println!("all patches above 23 dB at step {step} (worst {worst:.2})");
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    })
    .expect("training failed");
    println!(
        "{} steps in {:.1?}",
        history.per_step.len(),
        start.elapsed()
    );

    for (k, (gray, reference)) in data.iter().enumerate() {
        let out = colorize(&model, gray).unwrap();
        println!("pair {k}: psnr {}", psnr(&out, reference).unwrap());
    }
}

fn worst_psnr(model: &ColorizerModel, data: &[(GrayImage, RgbImage)]) -> f64 {
    data.iter()
        .map(|(gray, reference)| {
            let out = colorize(model, gray).unwrap();
            psnr(&out, reference)
                .unwrap()
                .finite()
                .unwrap_or(f64::INFINITY)
        })
        .fold(f64::INFINITY, f64::min)
}
