//! Write and re-read binary PGM/PPM images.
//!
//!     cargo run --release -p uwe --example netpbm_codec

use uwe::dataset::synth_scene;
use uwe::image::Image;
use uwe::ppm::{read_ppm, write_ppm};

fn main() {
    let rgb = synth_scene(5, 3, 8);
    for img in [Image::Gray(rgb.to_grayscale()), Image::Rgb(rgb)] {
        let bytes = write_ppm(&img);
        let header_end = bytes.len() - img.as_bytes().len();
        println!(
            "{} channel(s): header {:?}, {} bytes total",
            img.channels(),
            String::from_utf8_lossy(&bytes[..header_end]),
            bytes.len()
        );
        let back = read_ppm(&bytes).unwrap();
        assert_eq!(back, img);
        assert_eq!(write_ppm(&back), bytes);
    }

    // comments and other whitespace in the header are accepted on read
    let img = read_ppm(b"P5 # gray\n2\t1 # dims\n255\n\x00\xff").unwrap();
    println!(
        "parsed commented header: {}x{}, pixels {:?}",
        img.width(),
        img.height(),
        img.as_bytes()
    );
    println!(
        "rejected ASCII PGM: {}",
        read_ppm(b"P2\n1 1\n255\n0\n").unwrap_err()
    );
}
