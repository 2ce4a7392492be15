//! The `qfslice` command line: scan | components | ray | verify | limitset.
//!
//! Every run prints a single JSON report to stdout embedding the artifact
//! version, the fully resolved configuration, wall-clock time and a
//! verdict histogram, so any figure can be reproduced from its report.
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration,
//! 3 verification failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qfslice_core::bq::BqParams;
use qfslice_core::farey::Slope;
use qfslice_core::repr::FNPoint;
use qfslice_core::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::render::{
    limit_set, rasterize, rasterize_points, rasterize_with_overlays, write_pnm, write_points_csv,
    Palette,
};
use crate::slicescan::{
    count_components, pleating_ray, scan, verify, write_ray_csv, SliceScan, Window,
};
use crate::SliceError;

#[derive(Parser, Debug)]
#[command(
    name = "qfslice",
    version,
    about = "Linear slices of quasi-Fuchsian once-punctured-torus space"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a grid over the τ-strip and write an image.
    Scan(ScanArgs),
    /// Count standard/non-standard components over a fundamental domain.
    Components(ComponentsArgs),
    /// Trace the real locus of one slope's trace function.
    Ray(RayArgs),
    /// Run the quantitative verification battery.
    Verify(VerifyArgs),
    /// Sample a limit set and write a point cloud.
    Limitset(LimitsetArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct WindowArgs {
    /// Left edge of the window; defaults to −l/2.
    #[arg(long, allow_hyphen_values = true)]
    re_min: Option<f64>,
    /// Right edge of the window; defaults to 7l/4.
    #[arg(long, allow_hyphen_values = true)]
    re_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = -std::f64::consts::PI)]
    im_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = std::f64::consts::PI)]
    im_max: f64,
    #[arg(long, default_value_t = 400)]
    nx: usize,
    #[arg(long, default_value_t = 200)]
    ny: usize,
}

impl WindowArgs {
    fn resolve(&self, l: f64) -> Result<Window, SliceError> {
        let re_min = self.re_min.unwrap_or(-0.5 * l);
        let re_max = self.re_max.unwrap_or(1.75 * l);
        Window::new(re_min, re_max, self.im_min, self.im_max, self.nx, self.ny)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct BqArgs {
    #[arg(long, default_value_t = 2.0 + 1e-6)]
    explore_cutoff: f64,
    #[arg(long, default_value_t = 20_000)]
    node_cap: usize,
    #[arg(long, default_value_t = 1e-7)]
    real_band_eps: f64,
    #[arg(long, default_value_t = 1e150)]
    saturation: f64,
}

impl BqArgs {
    fn resolve(&self) -> Result<BqParams, SliceError> {
        if !(self.explore_cutoff > 0.0)
            || self.node_cap == 0
            || !(self.real_band_eps > 0.0)
            || !(self.saturation > 0.0)
        {
            return Err(SliceError::InvalidParam(
                "bq parameters must all be positive".into(),
            ));
        }
        Ok(BqParams {
            explore_cutoff: self.explore_cutoff,
            node_cap: self.node_cap,
            real_band_eps: self.real_band_eps,
            saturation: self.saturation,
        })
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct ScanArgs {
    /// Real length of the pinned curve (positive).
    #[arg(long, allow_hyphen_values = true)]
    l: f64,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    bq: BqArgs,
    /// Output image path (PGM, or PPM with overlays).
    #[arg(long)]
    out: PathBuf,
    /// Optional per-cell CSV path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Overlay the Parker-Parkkonen band boundary (forces color output).
    #[arg(long)]
    overlay_pp: bool,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "QFSLICE_WORKERS")]
    workers: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ComponentsArgs {
    #[arg(long, allow_hyphen_values = true)]
    l: f64,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    bq: BqArgs,
    /// Optional copy of the JSON report to a file.
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long, env = "QFSLICE_WORKERS")]
    workers: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct RayArgs {
    #[arg(long, allow_hyphen_values = true)]
    l: f64,
    /// Slope p/q of the trace function, e.g. 1/2 (not 1/0).
    #[arg(long, allow_hyphen_values = true)]
    slope: String,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    bq: BqArgs,
    /// Output CSV path for the polylines.
    #[arg(long)]
    out: PathBuf,
    /// Optional overlay image (PPM): scan shading plus the ray in red.
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long, env = "QFSLICE_WORKERS")]
    workers: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct VerifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    l: f64,
    /// Samples per predicate.
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[command(flatten)]
    bq: BqArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct LimitsetArgs {
    #[arg(long, allow_hyphen_values = true)]
    l: f64,
    /// Twist-bend parameter, written like 0.40+0.40i.
    #[arg(long, allow_hyphen_values = true)]
    tau: String,
    #[arg(long, default_value_t = 12)]
    max_word_len: usize,
    /// Output CSV path for the point cloud.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Output raster path (PGM).
    #[arg(long)]
    out_image: Option<PathBuf>,
    /// View bounds and resolution of the raster.
    #[arg(long, allow_hyphen_values = true, default_value_t = -3.0)]
    view_re_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
    view_re_max: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -3.0)]
    view_im_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
    view_im_max: f64,
    #[arg(long, default_value_t = 800)]
    nx: usize,
    #[arg(long, default_value_t = 800)]
    ny: usize,
}

/// Parse the CLI complex-number syntax `x`, `yi` or `x±yi` (spaces
/// allowed, scientific notation allowed, bare `i` meaning `1i`).
pub fn parse_complex(input: &str) -> Result<Complex64, String> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty complex literal".into());
    }
    let parse_re = |t: &str| -> Result<f64, String> {
        t.parse::<f64>()
            .map_err(|_| format!("bad real part {t:?} in {input:?}"))
    };
    let parse_im = |t: &str| -> Result<f64, String> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t
                .parse::<f64>()
                .map_err(|_| format!("bad imaginary part {t:?} in {input:?}")),
        }
    };
    // Last sign that is not a leading sign and not part of an exponent.
    let split_at = |t: &str| -> Option<usize> {
        let bytes = t.as_bytes();
        (1..bytes.len())
            .rev()
            .find(|&k| {
                (bytes[k] == b'+' || bytes[k] == b'-')
                    && bytes[k - 1] != b'e'
                    && bytes[k - 1] != b'E'
            })
    };
    if let Some(body) = s.strip_suffix(['i', 'I']) {
        match split_at(body) {
            Some(k) => Ok(Complex64::new(parse_re(&body[..k])?, parse_im(&body[k..])?)),
            None => Ok(Complex64::new(0.0, parse_im(body)?)),
        }
    } else {
        if split_at(&s).is_some() {
            return Err(format!("missing trailing i in complex literal {input:?}"));
        }
        Ok(Complex64::new(parse_re(&s)?, 0.0))
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: msg.into(),
        }
    }
}

impl From<SliceError> for Failure {
    fn from(e: SliceError) -> Failure {
        let code = match &e {
            SliceError::Io { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn check_l(l: f64) -> Result<(), Failure> {
    if l > 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(Failure::config(format!("--l must be positive, got {l}")))
    }
}

fn resolve_workers(req: Option<usize>) -> usize {
    req.filter(|w| *w >= 1).unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

fn create_out(path: &Path) -> Result<BufWriter<File>, SliceError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| SliceError::Io {
            path: path.display().to_string(),
            source,
        })
}

#[derive(Serialize)]
struct Histogram {
    qf: usize,
    not_qf: usize,
    unknown: usize,
}

impl Histogram {
    fn of(scan: &SliceScan) -> Histogram {
        let (qf, not_qf, unknown) = scan.histogram();
        Histogram {
            qf,
            not_qf,
            unknown,
        }
    }

    fn empty() -> Histogram {
        Histogram {
            qf: 0,
            not_qf: 0,
            unknown: 0,
        }
    }
}

fn envelope(
    command: &str,
    config: serde_json::Value,
    started: Instant,
    verdicts: Histogram,
    extra: serde_json::Value,
) -> serde_json::Value {
    let mut v = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "wall_clock_s": started.elapsed().as_secs_f64(),
        "verdicts": verdicts,
    });
    if let (Some(obj), Some(add)) = (v.as_object_mut(), extra.as_object()) {
        for (k, val) in add {
            obj.insert(k.clone(), val.clone());
        }
    }
    v
}

fn run_scan(args: &ScanArgs) -> Result<serde_json::Value, Failure> {
    check_l(args.l)?;
    let window = args.window.resolve(args.l)?;
    let params = args.bq.resolve()?;
    let workers = resolve_workers(args.workers);
    let started = Instant::now();
    let scan = scan(args.l, &window, &params, workers)?;

    let img = if args.overlay_pp {
        rasterize_with_overlays(&scan, &Palette::default(), true, &[])
    } else {
        rasterize(&scan, &Palette::default())
    };
    write_pnm(&img, &args.out)?;
    if let Some(csv_path) = &args.csv {
        let mut out = create_out(csv_path)?;
        scan.write_csv(&mut out)
            .map_err(|source| SliceError::Io {
                path: csv_path.display().to_string(),
                source,
            })?;
    }

    let config = json!({
        "l": args.l,
        "window": window,
        "bq": args.bq,
        "workers": workers,
        "overlay_pp": args.overlay_pp,
        "out": args.out,
        "csv": args.csv,
    });
    Ok(envelope(
        "scan",
        config,
        started,
        Histogram::of(&scan),
        json!({
            "outputs": {
                "image": args.out,
                "image_format": if img.is_color() { "ppm" } else { "pgm" },
                "csv": args.csv,
            },
        }),
    ))
}

fn run_components(args: &ComponentsArgs) -> Result<serde_json::Value, Failure> {
    check_l(args.l)?;
    let window = args.window.resolve(args.l)?;
    let params = args.bq.resolve()?;
    let workers = resolve_workers(args.workers);
    let started = Instant::now();
    let scan = scan(args.l, &window, &params, workers)?;
    let report = count_components(&scan)?;

    let config = json!({
        "l": args.l,
        "window": window,
        "bq": args.bq,
        "workers": workers,
    });
    let value = envelope(
        "components",
        config,
        started,
        Histogram::of(&scan),
        json!({
            "standard": report.standard_present,
            "nonstandard_count": report.nonstandard_count,
            "truncated": report.truncated,
            "components": report.components,
        }),
    );
    if let Some(path) = &args.out_json {
        let mut out = create_out(path)?;
        let pretty = serde_json::to_string_pretty(&value).expect("report serializes");
        out.write_all(pretty.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|source| SliceError::Io {
                path: path.display().to_string(),
                source,
            })?;
    }
    Ok(value)
}

fn run_ray(args: &RayArgs) -> Result<serde_json::Value, Failure> {
    check_l(args.l)?;
    let slope: Slope = args
        .slope
        .parse()
        .map_err(|e| Failure::config(format!("--slope {:?}: {e}", args.slope)))?;
    if slope.is_infinity() {
        return Err(Failure::config(
            "--slope 1/0 has no pleating ray in this slice (it is the pinned curve)",
        ));
    }
    let window = args.window.resolve(args.l)?;
    let params = args.bq.resolve()?;
    let started = Instant::now();
    let rays = pleating_ray(args.l, &slope, &window, &params)?;

    let mut out = create_out(&args.out)?;
    write_ray_csv(&rays, &mut out).map_err(|source| SliceError::Io {
        path: args.out.display().to_string(),
        source,
    })?;

    let mut histogram = Histogram::empty();
    if let Some(image_path) = &args.image {
        let workers = resolve_workers(args.workers);
        let scan = scan(args.l, &window, &params, workers)?;
        histogram = Histogram::of(&scan);
        let img = rasterize_with_overlays(&scan, &Palette::default(), true, &rays);
        write_pnm(&img, image_path)?;
    }

    let config = json!({
        "l": args.l,
        "slope": slope.to_string(),
        "window": window,
        "bq": args.bq,
        "out": args.out,
        "image": args.image,
    });
    let n_points: usize = rays.iter().map(|r| r.points.len()).sum();
    Ok(envelope(
        "ray",
        config,
        started,
        histogram,
        json!({
            "segments": rays.len(),
            "points": n_points,
            "outputs": { "csv": args.out, "image": args.image },
        }),
    ))
}

fn run_verify(args: &VerifyArgs) -> Result<(serde_json::Value, bool), Failure> {
    check_l(args.l)?;
    let params = args.bq.resolve()?;
    if args.samples == 0 {
        return Err(Failure::config("--samples must be positive"));
    }
    let started = Instant::now();
    let report = verify(args.l, args.samples, &params)?;
    let pass = report.passes();
    let config = json!({
        "l": args.l,
        "samples": args.samples,
        "bq": args.bq,
    });
    let value = envelope(
        "verify",
        config,
        started,
        Histogram::empty(),
        json!({
            "report": report,
            "pass": pass,
        }),
    );
    Ok((value, pass))
}

fn run_limitset(args: &LimitsetArgs) -> Result<serde_json::Value, Failure> {
    check_l(args.l)?;
    let tau = parse_complex(&args.tau).map_err(Failure::config)?;
    if args.max_word_len > 20 {
        return Err(Failure::config(format!(
            "--max-word-len {} exceeds the supported bound 20",
            args.max_word_len
        )));
    }
    let started = Instant::now();
    let pt = FNPoint::real(args.l, tau);
    let cloud = limit_set(&pt, args.max_word_len)?;

    if let Some(path) = &args.out_csv {
        let mut out = create_out(path)?;
        write_points_csv(&cloud, &mut out).map_err(|source| SliceError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    if let Some(path) = &args.out_image {
        let img = rasterize_points(
            &cloud,
            args.view_re_min,
            args.view_re_max,
            args.view_im_min,
            args.view_im_max,
            args.nx,
            args.ny,
        )?;
        write_pnm(&img, path)?;
    }

    let config = json!({
        "l": args.l,
        "tau": { "re": tau.re, "im": tau.im },
        "max_word_len": args.max_word_len,
        "view": [args.view_re_min, args.view_re_max, args.view_im_min, args.view_im_max],
        "nx": args.nx,
        "ny": args.ny,
    });
    Ok(envelope(
        "limitset",
        config,
        started,
        Histogram::empty(),
        json!({
            "points": cloud.points.len(),
            "includes_infinity": cloud.has_infinity,
            "outputs": { "csv": args.out_csv, "image": args.out_image },
        }),
    ))
}

/// Parse arguments, run the selected command, print its JSON report and
/// return the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Scan(a) => run_scan(a).map(|v| (v, 0)),
        Command::Components(a) => run_components(a).map(|v| (v, 0)),
        Command::Ray(a) => run_ray(a).map(|v| (v, 0)),
        Command::Verify(a) => run_verify(a).map(|(v, pass)| (v, if pass { 0 } else { 3 })),
        Command::Limitset(a) => run_limitset(a).map(|v| (v, 0)),
    };
    match outcome {
        Ok((value, code)) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
            code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        let c = |s: &str| parse_complex(s).unwrap();
        assert_eq!(c("2"), Complex64::new(2.0, 0.0));
        assert_eq!(c("-1.5"), Complex64::new(-1.5, 0.0));
        assert_eq!(c("0.4+0.4i"), Complex64::new(0.4, 0.4));
        assert_eq!(c("0.4 - 0.7 i"), Complex64::new(0.4, -0.7));
        assert_eq!(c("2i"), Complex64::new(0.0, 2.0));
        assert_eq!(c("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(c("1e-3+2e-2i"), Complex64::new(1e-3, 2e-2));
        assert_eq!(c("-1e2-3I"), Complex64::new(-100.0, -3.0));
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1+2").is_err());
        assert!(parse_complex("abci").is_err());
        assert!(parse_complex("1++2i").is_err());
    }

    #[test]
    fn cli_parses_scan_invocation() {
        let cli = Cli::try_parse_from([
            "qfslice", "scan", "--l", "4.13", "--re-min", "-2", "--re-max", "10", "--nx", "600",
            "--ny", "300", "--out", "slice.pgm",
        ])
        .unwrap();
        match cli.command {
            Command::Scan(a) => {
                assert_eq!(a.l, 4.13);
                assert_eq!(a.window.re_min, Some(-2.0));
                assert_eq!(a.window.nx, 600);
            }
            _ => panic!("wrong command"),
        }
    }

    #[test]
    fn missing_l_is_a_usage_error() {
        let err = Cli::try_parse_from(["qfslice", "scan", "--out", "x.pgm"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
