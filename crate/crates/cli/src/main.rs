use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use bandfit::io::{normalize_points, read_curve, read_points, write_curve, CurveFile};
use bandfit::render::{curve_plot, render_svg};
use bandfit::{run_continuation, Error, FitConfig, Point};
use clap::{Args, Parser, Subcommand};

/// Smooth, bandlimited curves through ordered points.
#[derive(Parser, Debug)]
#[command(name = "bandfit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a curve to a point file and write a curve file.
    Fit(FitArgs),
    /// Evaluate a curve file at parameters.
    Eval(EvalArgs),
    /// Render a curve file as SVG.
    Render(RenderArgs),
    /// Print coefficient magnitudes of a curve file.
    Spectrum(SpectrumArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Point file (`closed` or `open [sxl syl sxr syr]` header, then `x y` rows).
    input: PathBuf,
    /// Output curve file [default: input with extension `curve`].
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Treat the points as a closed curve regardless of the header.
    #[arg(long, conflicts_with_all = ["slope_left", "slope_right"])]
    closed: bool,
    /// Derivative at the first point (open curves).
    #[arg(long, num_args = 2, value_names = ["SX", "SY"], allow_negative_numbers = true, requires = "slope_right")]
    slope_left: Option<Vec<f64>>,
    /// Derivative at the last point (open curves).
    #[arg(long, num_args = 2, value_names = ["SX", "SY"], allow_negative_numbers = true, requires = "slope_left")]
    slope_right: Option<Vec<f64>>,
    /// Number of discretization nodes.
    #[arg(short = 'N', long = "nodes", default_value_t = 1000)]
    nodes: usize,
    /// Maximum number of iterations.
    #[arg(long, default_value_t = 60)]
    iters: usize,
    /// Fraction of the spectrum filtered away per iteration.
    #[arg(long, default_value_t = 0.04)]
    h_filter: f64,
    /// Requested accuracy.
    #[arg(long, default_value_t = 1e-16)]
    eps: f64,
    /// Requested number of coefficients.
    #[arg(long, default_value_t = 500)]
    ncoefs: usize,
    /// Half-bandwidth of the perturbation system.
    #[arg(long, default_value_t = 8)]
    nbands: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    curve: PathBuf,
    /// Parameters in [0, L]; reads `--count` equispaced ones if omitted.
    #[arg(long = "t", num_args = 1.., allow_negative_numbers = true)]
    t: Vec<f64>,
    /// Number of equispaced parameters when `--t` is not given.
    #[arg(long, default_value_t = 11)]
    count: usize,
    /// Report points in the coordinates of the input data instead of the
    /// normalized frame.
    #[arg(long)]
    original: bool,
}

#[derive(Args, Debug)]
struct RenderArgs {
    curve: PathBuf,
    /// Output SVG file.
    #[arg(short, long)]
    output: PathBuf,
    /// Add the θ and s′ coefficient spectra below the curve.
    #[arg(long)]
    spectrum: bool,
    /// Number of points on the drawn curve.
    #[arg(long, default_value_t = 2000)]
    dense: usize,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    curve: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let usage = err.chain().any(|e| {
                matches!(
                    e.downcast_ref::<Error>(),
                    Some(Error::Config(_) | Error::Parse { .. } | Error::Io(_) | Error::Size(_) | Error::Degenerate(_))
                )
            });
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Fit(a) => fit(a),
        Command::Eval(a) => eval(a),
        Command::Render(a) => render(a),
        Command::Spectrum(a) => spectrum(a),
    }
}

fn pair(v: &Option<Vec<f64>>) -> Option<Point> {
    v.as_ref().map(|v| Point::new(v[0], v[1]))
}

fn load(path: &Path) -> anyhow::Result<CurveFile> {
    read_curve(path).with_context(|| format!("reading {}", path.display()))
}

fn fit(a: FitArgs) -> anyhow::Result<ExitCode> {
    let file = read_points(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let slopes = pair(&a.slope_left).zip(pair(&a.slope_right));
    let pts = file.to_point_set(a.closed.then_some(true), slopes)?;
    let (pts, scale) = normalize_points(&pts)?;
    let cfg = FitConfig {
        n_nodes: a.nodes,
        n_iters: a.iters,
        h_filter: a.h_filter,
        eps: a.eps,
        n_coefs: a.ncoefs,
        n_bands: a.nbands,
    };
    let result = run_continuation(&pts, &cfg)?;
    let out = a.output.unwrap_or_else(|| a.input.with_extension("curve"));
    write_curve(&out, &CurveFile::from_result(&result, scale)).with_context(|| format!("writing {}", out.display()))?;
    let idx = |v: Option<usize>| v.map_or("none".to_string(), |k| k.to_string());
    println!("n_stop {}", result.n_stop);
    println!("converged {}", result.converged);
    println!("e_samp {:e}", result.e_samp);
    println!("decay_theta {}", idx(result.decay_theta));
    println!("decay_sprime {}", idx(result.decay_sprime));
    println!("wrote {}", out.display());
    Ok(if result.converged { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn eval(a: EvalArgs) -> anyhow::Result<ExitCode> {
    let file = load(&a.curve)?;
    let length = file.curve.length;
    let ts = if a.t.is_empty() {
        let n = a.count.max(2);
        (0..n).map(|i| length * i as f64 / (n - 1) as f64).collect()
    } else {
        a.t
    };
    let pts = if a.original { file.eval_original(&ts)? } else { file.eval(&ts)? };
    for (t, p) in ts.iter().zip(pts) {
        println!("{t:.16e} {:.16e} {:.16e}", p.x, p.y);
    }
    Ok(ExitCode::SUCCESS)
}

fn render(a: RenderArgs) -> anyhow::Result<ExitCode> {
    let file = load(&a.curve)?;
    let svg = render_svg(&curve_plot(&file, a.dense, a.spectrum)?);
    std::fs::write(&a.output, svg).with_context(|| format!("writing {}", a.output.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn spectrum(a: SpectrumArgs) -> anyhow::Result<ExitCode> {
    let file = load(&a.curve)?;
    println!("# k |x_k| |y_k|");
    for (k, x, y) in file.curve.magnitudes() {
        println!("{k} {x:.6e} {y:.6e}");
    }
    Ok(ExitCode::SUCCESS)
}
