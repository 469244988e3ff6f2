//! The `uwe` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 image/manifest format,
//! 4 model, 5 training diverged. Outputs are written to a temporary file in
//! the destination directory and renamed into place, so a failed command
//! never leaves a partial file behind.

use crate::colorizer::{
    colorize, load_model, save_model, train_with, ColorizerError, ColorizerModel, TrainConfig,
    TrainingPair,
};
use crate::dataset::{extract_patches, load_manifest, Manifest};
use crate::histeq::equalize;
use crate::image::{GrayImage, Image, RgbImage};
use crate::metrics::{image_entropy, mse, ImageMetrics, MetricsReport, Psnr};
use crate::nn::Prng;
use crate::ppm::{read_ppm, write_ppm};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

/// Separates the patch-extraction stream from model init and shuffling.
const PATCH_STREAM: u64 = 0x5041_5443_4845_5331;

#[derive(Debug, Parser)]
#[command(name = "uwe", version, about = "Underwater image enhancement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decolor, equalize and re-colorize an image
    Enhance(EnhanceArgs),
    /// Decolor and equalize only, writing a PGM
    Histeq(HisteqArgs),
    /// Train a colorizer from a manifest of (input, reference) pairs
    Train(TrainArgs),
    /// Enhance every manifest input and report MSE/PSNR/entropy as JSON
    Eval(EvalArgs),
    /// Compare two images
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct EnhanceArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Colorizer checkpoint; required unless --skip-colorize
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    /// Stop after equalization and write a grayscale PGM
    #[arg(long)]
    pub skip_colorize: bool,
}

#[derive(Debug, Args)]
pub struct HisteqArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where to write the checkpoint
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub patch_size: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub report: PathBuf,
    /// Evaluate the equalized grayscale image against the reference's
    /// grayscale instead of colorizing
    #[arg(long)]
    pub skip_colorize: bool,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Usage = 1,
    Io = 2,
    Format = 3,
    Model = 4,
    Diverged = 5,
}

#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    fn new(code: ExitCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parse `args` (including the program name) and run the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    ExitCode::Ok as i32
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    ExitCode::Usage as i32
                }
            };
        }
    };
    let result = match cli.command {
        Command::Enhance(a) => cmd_enhance(&a),
        Command::Histeq(a) => cmd_histeq(&a),
        Command::Train(a) => cmd_train(&a, stdout),
        Command::Eval(a) => cmd_eval(&a),
        Command::Metrics(a) => cmd_metrics(&a, stdout),
    };
    match result {
        Ok(()) => ExitCode::Ok as i32,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code as i32
        }
    }
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path)
        .map_err(|e| CliError::new(ExitCode::Io, format!("cannot read {}: {e}", path.display())))
}

fn read_image(path: &Path) -> CliResult<Image> {
    let bytes = read_bytes(path)?;
    read_ppm(&bytes)
        .map_err(|e| CliError::new(ExitCode::Format, format!("{}: {e}", path.display())))
}

fn read_model(path: &Path) -> CliResult<ColorizerModel> {
    let bytes = read_bytes(path)?;
    load_model(&bytes)
        .map_err(|e| CliError::new(ExitCode::Model, format!("{}: {e}", path.display())))
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Fail early if `path` cannot be created.
fn check_output(path: &Path) -> CliResult<()> {
    let dir = parent_dir(path);
    if !dir.is_dir() {
        return Err(CliError::new(
            ExitCode::Io,
            format!("output directory {} does not exist", dir.display()),
        ));
    }
    Ok(())
}

/// Write via a temporary file in the same directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |e: std::io::Error| {
        CliError::new(
            ExitCode::Io,
            format!("cannot write {}: {e}", path.display()),
        )
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(path)).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn equalize_image(img: &Image, path: &Path) -> CliResult<GrayImage> {
    equalize(&img.to_grayscale())
        .map_err(|e| CliError::new(ExitCode::Format, format!("{}: {e}", path.display())))
}

fn colorize_image(model: &ColorizerModel, gray: &GrayImage, path: &Path) -> CliResult<RgbImage> {
    colorize(model, gray)
        .map_err(|e| CliError::new(ExitCode::Format, format!("{}: {e}", path.display())))
}

pub fn cmd_enhance(args: &EnhanceArgs) -> CliResult<()> {
    let model_path = match (&args.model, args.skip_colorize) {
        (None, false) => {
            return Err(CliError::new(
                ExitCode::Usage,
                "--model is required unless --skip-colorize is given",
            ))
        }
        (m, _) => m.as_deref(),
    };
    check_output(&args.output)?;
    let input = read_image(&args.input)?;
    let model = match (model_path, args.skip_colorize) {
        (Some(p), false) => Some(read_model(p)?),
        _ => None,
    };
    let gray = equalize_image(&input, &args.input)?;
    let out: Image = match model {
        Some(m) => colorize_image(&m, &gray, &args.input)?.into(),
        None => gray.into(),
    };
    write_atomic(&args.output, &write_ppm(&out))
}

pub fn cmd_histeq(args: &HisteqArgs) -> CliResult<()> {
    check_output(&args.output)?;
    let input = read_image(&args.input)?;
    let gray = equalize_image(&input, &args.input)?;
    write_atomic(&args.output, &write_ppm(&gray.into()))
}

/// Load a manifest and resolve its paths against the manifest's directory.
fn read_manifest(path: &Path) -> CliResult<(Manifest, PathBuf)> {
    let bytes = read_bytes(path)?;
    let manifest = load_manifest(&bytes)
        .map_err(|e| CliError::new(ExitCode::Format, format!("{}: {e}", path.display())))?;
    if manifest.is_empty() {
        return Err(CliError::new(
            ExitCode::Usage,
            format!("manifest {} lists no image pairs", path.display()),
        ));
    }
    Ok((manifest, parent_dir(path).to_path_buf()))
}

/// Read every manifest pair, checking that input and reference agree in size.
fn read_pairs(
    manifest: &Manifest,
    base: &Path,
    manifest_path: &Path,
) -> CliResult<Vec<(String, Image, Image)>> {
    manifest
        .entries
        .iter()
        .map(|e| {
            let input = read_image(&base.join(&e.input_path))?;
            let reference = read_image(&base.join(&e.reference_path))?;
            if (input.width(), input.height()) != (reference.width(), reference.height()) {
                return Err(CliError::new(
                    ExitCode::Format,
                    format!(
                        "{} line {}: {} is {}x{} but {} is {}x{}",
                        manifest_path.display(),
                        e.line,
                        e.input_path,
                        input.width(),
                        input.height(),
                        e.reference_path,
                        reference.width(),
                        reference.height()
                    ),
                ));
            }
            Ok((e.input_path.clone(), input, reference))
        })
        .collect()
}

fn as_rgb(img: Image) -> RgbImage {
    match img {
        Image::Rgb(c) => c,
        Image::Gray(g) => g.to_rgb(),
    }
}

pub fn cmd_train(args: &TrainArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = TrainConfig {
        epochs: args.epochs,
        lr: args.lr,
        seed: args.seed,
        patch_size: args.patch_size,
        ..TrainConfig::default()
    };
    cfg.validate()
        .map_err(|e| CliError::new(ExitCode::Usage, e.to_string()))?;
    check_output(&args.out)?;
    let (manifest, base) = read_manifest(&args.manifest)?;
    let images = read_pairs(&manifest, &base, &args.manifest)?;

    let mut prng = Prng::new(cfg.seed ^ PATCH_STREAM);
    let mut pairs = Vec::new();
    for (id, input, reference) in images {
        let gray = equalize_image(&input, Path::new(&id))?;
        let patches = extract_patches(
            &gray,
            &as_rgb(reference),
            cfg.patch_size,
            cfg.patches_per_image,
            &mut prng,
        )
        .map_err(|e| CliError::new(ExitCode::Format, format!("{id}: {e}")))?;
        for (g, c) in patches {
            pairs.push(TrainingPair::from_images(&g, &c).expect("patches are aligned"));
        }
    }

    let (model, _) = train_with(&pairs, &cfg, |step, loss, _| {
        if step % 100 == 0 {
            let _ = writeln!(stdout, "step {step} loss {loss:.8}");
        }
        ControlFlow::Continue(())
    })
    .map_err(|e| match e {
        ColorizerError::NonFiniteLoss { .. } => CliError::new(ExitCode::Diverged, e.to_string()),
        other => CliError::new(ExitCode::Model, other.to_string()),
    })?;
    write_atomic(&args.out, &save_model(&model))
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult<()> {
    let model = match (&args.model, args.skip_colorize) {
        (None, false) => {
            return Err(CliError::new(
                ExitCode::Usage,
                "--model is required unless --skip-colorize is given",
            ))
        }
        (Some(p), false) => Some(read_model(p)?),
        _ => None,
    };
    check_output(&args.report)?;
    let (manifest, base) = read_manifest(&args.manifest)?;
    let images = read_pairs(&manifest, &base, &args.manifest)?;

    let mut records = Vec::with_capacity(images.len());
    for (id, input, reference) in images {
        let gray = equalize_image(&input, Path::new(&id))?;
        let (enhanced, reference): (Image, Image) = match &model {
            Some(m) => (
                colorize_image(m, &gray, Path::new(&id))?.into(),
                as_rgb(reference).into(),
            ),
            None => (gray.into(), reference.to_grayscale().into()),
        };
        let err = mse(&enhanced, &reference)
            .map_err(|e| CliError::new(ExitCode::Format, format!("{id}: {e}")))?;
        let entropy_bits = image_entropy(&enhanced)
            .map_err(|e| CliError::new(ExitCode::Format, format!("{id}: {e}")))?;
        records.push(ImageMetrics {
            input_id: id,
            mse: err,
            psnr_db: Psnr::from_mse(err),
            entropy_bits,
        });
    }
    let report = MetricsReport::from_records(records);
    write_atomic(&args.report, report.to_json().as_bytes())
}

/// Format like C's `%.6g`.
pub fn fmt_sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}"))
    }
}

pub fn cmd_metrics(args: &MetricsArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let a = read_image(&args.a)?;
    let b = read_image(&args.b)?;
    let err = mse(&a, &b).map_err(|e| CliError::new(ExitCode::Format, e.to_string()))?;
    let entropy = |img: &Image, p: &Path| {
        image_entropy(img)
            .map_err(|e| CliError::new(ExitCode::Format, format!("{}: {e}", p.display())))
    };
    let (ea, eb) = (entropy(&a, &args.a)?, entropy(&b, &args.b)?);
    let psnr = match Psnr::from_mse(err) {
        Psnr::Finite(db) => fmt_sig6(db),
        Psnr::Infinite => "inf".into(),
    };
    writeln!(
        stdout,
        "mse={} psnr={} entropy_a={} entropy_b={}",
        fmt_sig6(err),
        psnr,
        fmt_sig6(ea),
        fmt_sig6(eb)
    )
    .map_err(|e| CliError::new(ExitCode::Io, e.to_string()))
}
