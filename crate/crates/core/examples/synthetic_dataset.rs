//! Write a small paired dataset (degraded input, clean reference) and a
//! manifest that `uwe train` and `uwe eval` can read.
//!
//!     cargo run --release -p uwe --example synthetic_dataset -- data/ 12 64
//!     cargo run --release -p uwe -- train --manifest data/manifest.tsv --out model.bin

use std::path::PathBuf;
use std::{env, fs};
use uwe::dataset::{load_manifest, synth_degrade, synth_scene, DegradeParams};
use uwe::image::Image;
use uwe::ppm::write_ppm;

fn main() -> std::io::Result<()> {
    let mut args = env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "uwe-data".into()));
    let count: usize = args.next().map_or(8, |s| s.parse().expect("count"));
    let size: usize = args.next().map_or(64, |s| s.parse().expect("size"));
    fs::create_dir_all(&dir)?;

    let params = DegradeParams::default();
    let mut manifest = String::from("# degraded input\tclean reference\n");
    for k in 0..count {
        let clean = synth_scene(size, size, k as u64);
        let degraded = synth_degrade(&clean, &params).expect("default params are valid");
        let (input, reference) = (format!("input_{k:03}.ppm"), format!("reference_{k:03}.ppm"));
        fs::write(dir.join(&input), write_ppm(&Image::Rgb(degraded)))?;
        fs::write(dir.join(&reference), write_ppm(&Image::Rgb(clean)))?;
        manifest.push_str(&format!("{input}\t{reference}\n"));
    }
    let path = dir.join("manifest.tsv");
    fs::write(&path, &manifest)?;
    let entries = load_manifest(manifest.as_bytes()).expect("manifest we just wrote");
    println!(
        "wrote {} pairs of {size}x{size} to {}",
        entries.len(),
        path.display()
    );
    Ok(())
}
