mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{synthetic_pair, write_dataset};
use uwe::histeq::equalize;
use uwe::image::{GrayImage, Image, RgbImage};
use uwe::metrics::MetricsReport;
use uwe::ppm::{read_ppm, write_ppm};

fn uwe(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_uwe"));
    for a in args {
        cmd.arg(a);
    }
    cmd.output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_image(path: &Path, img: Image) {
    fs::write(path, write_ppm(&img)).unwrap();
}

fn read_image(path: &Path) -> Image {
    read_ppm(&fs::read(path).unwrap()).unwrap()
}

fn train_small(dir: &Path) -> PathBuf {
    write_dataset(dir, 2, 16);
    let ckpt = dir.join("model.bin");
    let out = uwe(&[
        &"train",
        &"--manifest",
        &dir.join("manifest.tsv"),
        &"--out",
        &ckpt,
        &"--epochs",
        &"1",
        &"--patch-size",
        &"8",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    ckpt
}

#[test]
fn enhance_writes_rgb_of_input_size() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = train_small(dir.path());
    let output = dir.path().join("out.ppm");
    let out = uwe(&[
        &"enhance",
        &"--input",
        &dir.path().join("in0.ppm"),
        &"--model",
        &ckpt,
        &"--output",
        &output,
    ]);
    assert_eq!(code(&out), 0);
    match read_image(&output) {
        Image::Rgb(img) => assert_eq!((img.width(), img.height()), (16, 16)),
        Image::Gray(_) => panic!("expected a color image"),
    }
}

#[test]
fn enhance_skip_colorize_is_equalized_gray() {
    let dir = tempfile::tempdir().unwrap();
    let (degraded, _, _) = synthetic_pair(21, 3);
    let input = dir.path().join("in.ppm");
    write_image(&input, Image::Rgb(degraded.clone()));
    let output = dir.path().join("out.pgm");
    let out = uwe(&[
        &"enhance",
        &"--input",
        &input,
        &"--output",
        &output,
        &"--skip-colorize",
    ]);
    assert_eq!(code(&out), 0);
    let expected = equalize(&degraded.to_grayscale()).unwrap();
    assert_eq!(
        fs::read(&output).unwrap(),
        write_ppm(&Image::Gray(expected))
    );
}

#[test]
fn enhance_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ppm");
    write_image(&input, Image::Rgb(RgbImage::filled(8, 8, [10, 20, 30])));
    let output = dir.path().join("out.ppm");

    let out = uwe(&[&"enhance", &"--input", &input, &"--output", &output]);
    assert_eq!(code(&out), 1, "missing model is a usage error");
    assert!(!out.stderr.is_empty());

    let out = uwe(&[
        &"enhance",
        &"--input",
        &dir.path().join("nope.ppm"),
        &"--output",
        &output,
        &"--skip-colorize",
    ]);
    assert_eq!(code(&out), 2);

    let junk = dir.path().join("junk.ppm");
    fs::write(&junk, b"P3\n1 1\n255\n0 0 0\n").unwrap();
    let out = uwe(&[
        &"enhance",
        &"--input",
        &junk,
        &"--output",
        &output,
        &"--skip-colorize",
    ]);
    assert_eq!(code(&out), 3);

    let bad_model = dir.path().join("bad.bin");
    fs::write(&bad_model, b"UWCOLOR1garbage").unwrap();
    let out = uwe(&[
        &"enhance",
        &"--input",
        &input,
        &"--model",
        &bad_model,
        &"--output",
        &output,
    ]);
    assert_eq!(code(&out), 4);

    assert!(!output.exists(), "failed runs must not leave output behind");
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(leftovers.len(), 3, "{leftovers:?}");
}

#[test]
fn histeq_constant_and_twice() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.pgm");
    write_image(&flat, Image::Gray(GrayImage::filled(5, 3, 40)));
    let out_flat = dir.path().join("flat_eq.pgm");
    assert_eq!(
        code(&uwe(&[
            &"histeq",
            &"--input",
            &flat,
            &"--output",
            &out_flat
        ])),
        0
    );
    assert_eq!(
        read_image(&out_flat),
        Image::Gray(GrayImage::filled(5, 3, 255))
    );

    let (degraded, _, _) = synthetic_pair(30, 9);
    let input = dir.path().join("scene.ppm");
    write_image(&input, Image::Rgb(degraded));
    let once = dir.path().join("once.pgm");
    let twice = dir.path().join("twice.pgm");
    assert_eq!(
        code(&uwe(&[&"histeq", &"--input", &input, &"--output", &once])),
        0
    );
    assert_eq!(
        code(&uwe(&[&"histeq", &"--input", &once, &"--output", &twice])),
        0
    );
    assert_eq!(fs::read(&once).unwrap(), fs::read(&twice).unwrap());
}

#[test]
fn train_progress_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), 2, 16);
    let manifest = dir.path().join("manifest.tsv");
    // 2 images x 16 patches in batches of 8: 4 steps per epoch
    let run = |name: &str| {
        let ckpt = dir.path().join(name);
        let out = uwe(&[
            &"train",
            &"--manifest",
            &manifest,
            &"--out",
            &ckpt,
            &"--epochs",
            &"50",
            &"--patch-size",
            &"8",
            &"--seed",
            &"3",
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        (
            String::from_utf8(out.stdout).unwrap(),
            fs::read(ckpt).unwrap(),
        )
    };
    let (log_a, ckpt_a) = run("a.bin");
    let (log_b, ckpt_b) = run("b.bin");
    assert_eq!(ckpt_a, ckpt_b);
    assert_eq!(log_a, log_b);
    let lines: Vec<&str> = log_a.lines().collect();
    assert_eq!(lines.len(), 2, "{log_a}");
    for (line, step) in lines.iter().zip([100, 200]) {
        let rest = line
            .strip_prefix(&format!("step {step} loss "))
            .expect(line);
        assert!(rest.parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn train_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.tsv");
    fs::write(&empty, "# nothing here\n\n").unwrap();
    let ckpt = dir.path().join("m.bin");
    let out = uwe(&[&"train", &"--manifest", &empty, &"--out", &ckpt]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());

    write_image(
        &dir.path().join("a.ppm"),
        Image::Rgb(RgbImage::filled(40, 40, [1, 2, 3])),
    );
    write_image(
        &dir.path().join("b.ppm"),
        Image::Rgb(RgbImage::filled(40, 36, [1, 2, 3])),
    );
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "a.ppm\ta.ppm\n# comment\na.ppm\tb.ppm\n").unwrap();
    let out = uwe(&[&"train", &"--manifest", &bad, &"--out", &ckpt]);
    assert_eq!(code(&out), 3);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 3"), "{msg}");

    write_dataset(dir.path(), 1, 16);
    let manifest = dir.path().join("manifest.tsv");
    let out = uwe(&[
        &"train",
        &"--manifest",
        &manifest,
        &"--out",
        &ckpt,
        &"--patch-size",
        &"8",
        &"--lr",
        &"1e300",
    ]);
    assert_eq!(code(&out), 5, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!ckpt.exists());
}

#[test]
fn eval_identity_reports_infinite_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = String::new();
    for k in 0..3 {
        let (_, eq, _) = synthetic_pair(20, 40 + k);
        let name = format!("eq{k}.pgm");
        write_image(&dir.path().join(&name), Image::Gray(eq));
        manifest.push_str(&format!("{name}\t{name}\n"));
    }
    let manifest_path = dir.path().join("manifest.tsv");
    fs::write(&manifest_path, manifest).unwrap();
    let report = dir.path().join("report.json");
    let out = uwe(&[
        &"eval",
        &"--manifest",
        &manifest_path,
        &"--report",
        &report,
        &"--skip-colorize",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("\"inf\""));
    let parsed: MetricsReport = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.aggregate.image_count, 3);
    assert_eq!(parsed.aggregate.infinite_psnr_count, 3);
    assert_eq!(parsed.aggregate.mean_psnr_db, None);
    assert_eq!(parsed.aggregate.mean_mse, 0.0);
    let ids: Vec<&str> = parsed
        .per_image
        .iter()
        .map(|r| r.input_id.as_str())
        .collect();
    assert_eq!(ids, ["eq0.pgm", "eq1.pgm", "eq2.pgm"]);
}

#[test]
fn eval_with_model_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = train_small(dir.path());
    let report = dir.path().join("report.json");
    let out = uwe(&[
        &"eval",
        &"--manifest",
        &dir.path().join("manifest.tsv"),
        &"--model",
        &ckpt,
        &"--report",
        &report,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let parsed: MetricsReport =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed.aggregate.image_count, 2);
    let mean = parsed.per_image.iter().map(|r| r.mse).sum::<f64>() / 2.0;
    assert!((parsed.aggregate.mean_mse - mean).abs() <= 1e-9);
    assert!(parsed
        .per_image
        .iter()
        .all(|r| r.entropy_bits > 0.0 && r.entropy_bits <= 8.0));
}

fn parse_metrics(stdout: &[u8]) -> Vec<(String, String)> {
    let text = String::from_utf8(stdout.to_vec()).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
    text.trim_end()
        .split(' ')
        .map(|kv| {
            let (k, v) = kv.split_once('=').expect(kv);
            (k.to_owned(), v.to_owned())
        })
        .collect()
}

#[test]
fn metrics_output_format() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pgm");
    let b = dir.path().join("b.pgm");
    write_image(&a, Image::Gray(GrayImage::filled(1, 1, 0)));
    write_image(&b, Image::Gray(GrayImage::filled(1, 1, 255)));

    let out = uwe(&[&"metrics", &"--a", &a, &"--b", &b]);
    assert_eq!(code(&out), 0);
    let kv = parse_metrics(&out.stdout);
    let keys: Vec<&str> = kv.iter().map(|(k, _)| k.as_str()).collect();
    assert_eq!(keys, ["mse", "psnr", "entropy_a", "entropy_b"]);
    assert_eq!(kv[0].1, "65025");
    assert_eq!(kv[1].1, "0");

    let out = uwe(&[&"metrics", &"--a", &a, &"--b", &a]);
    let kv = parse_metrics(&out.stdout);
    assert_eq!((kv[0].1.as_str(), kv[1].1.as_str()), ("0", "inf"));

    let c = dir.path().join("c.pgm");
    write_image(
        &c,
        Image::Gray(GrayImage::from_fn(16, 16, |x, y| (x * 16 + y) as u8)),
    );
    let out = uwe(&[&"metrics", &"--a", &c, &"--b", &c]);
    assert_eq!(parse_metrics(&out.stdout)[2].1, "8");

    let wide = dir.path().join("wide.pgm");
    write_image(&wide, Image::Gray(GrayImage::filled(2, 1, 0)));
    assert_eq!(code(&uwe(&[&"metrics", &"--a", &a, &"--b", &wide])), 3);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&uwe(&[&"frobnicate"])), 1);
    assert_eq!(code(&uwe(&[&"histeq", &"--input", &"x.pgm"])), 1);
    assert_eq!(code(&uwe(&[&"--help"])), 0);
}
