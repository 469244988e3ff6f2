//! Equalize a dark, low-contrast image and show how the histogram spreads.
//!
//!     cargo run --release -p uwe --example histogram_equalization

use uwe::histeq::{equalization_map, equalize, histogram};
use uwe::image::GrayImage;
use uwe::metrics::entropy;
use uwe::nn::Prng;

fn summary(label: &str, img: &GrayImage) {
    let hist = histogram(img).unwrap();
    let occupied = hist.counts().iter().filter(|&&c| c > 0).count();
    let lo = hist.counts().iter().position(|&c| c > 0).unwrap();
    println!(
        "{label:>9}: range {lo}..={}, {occupied} levels used, entropy {:.4} bits",
        hist.max_occupied(),
        entropy(img).unwrap()
    );
}

fn main() {
    // skewed toward dark values, as in murky water
    let mut prng = Prng::new(11);
    let img = GrayImage::from_fn(256, 256, |_, _| (120.0 * prng.uniform().powf(2.0)) as u8);
    let out = equalize(&img).unwrap();
    summary("input", &img);
    summary("equalized", &out);

    let map = equalization_map(&histogram(&img).unwrap());
    print!("map samples:");
    for k in [0, 10, 30, 60, 90, 119] {
        print!(" {k}->{}", map.apply(k));
    }
    println!();

    // a second pass changes nothing
    assert_eq!(equalize(&out).unwrap(), out);
    println!("equalize(equalize(x)) == equalize(x)");
}
