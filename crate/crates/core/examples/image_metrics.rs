//! Score a degraded image and its equalized version against the clean scene,
//! and print the JSON report format used by `uwe eval`.
//!
//!     cargo run --release -p uwe --example image_metrics

use uwe::dataset::{synth_degrade, synth_scene, DegradeParams};
use uwe::histeq::equalize;
use uwe::metrics::{entropy, mse, psnr, ImageMetrics, MetricsReport};

fn main() {
    let clean = synth_scene(64, 48, 3);
    let degraded = synth_degrade(&clean, &DegradeParams::default()).unwrap();
    let reference = clean.to_grayscale();

    let candidates = [
        ("degraded", degraded.to_grayscale()),
        ("equalized", equalize(&degraded.to_grayscale()).unwrap()),
        ("reference", reference.clone()),
    ];
    let records = candidates
        .iter()
        .map(|(id, img)| ImageMetrics {
            input_id: id.to_string(),
            mse: mse(img, &reference).unwrap(),
            psnr_db: psnr(img, &reference).unwrap(),
            entropy_bits: entropy(img).unwrap(),
        })
        .collect();
    println!("{}", MetricsReport::from_records(records).to_json());
}
