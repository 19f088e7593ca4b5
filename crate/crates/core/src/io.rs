//! Point and curve files, and the unit-size normalization of input data.
//!
//! Point file: `#` starts a comment; the first non-blank line is `closed`,
//! `open`, or `open sxl syl sxr syr`; every further line is `x y`.
//!
//! Curve file: `key value` header lines, then `coefficients` followed by
//! one `x y` row per coefficient.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::bezier::PointSet;
use crate::driver::{FitConfig, FitResult, TruncatedCurve};
use crate::error::{Error, Result};
use crate::point::{bbox_extent, Point};
use crate::spectral::Basis;

pub const CURVE_FORMAT: &str = "bandfit-curve";
pub const CURVE_VERSION: u32 = 1;

/// Scales `pts` uniformly so that the bounding-box side closest to 1 (in
/// the sense of `|ln d|`, ties going to the width) becomes 1. End slopes
/// are left as given. Returns the scaled set and the factor applied.
pub fn normalize_points(pts: &PointSet) -> Result<(PointSet, f64)> {
    let (w, h) = bbox_extent(pts.points());
    let side = match (w > 0.0, h > 0.0) {
        (false, false) => return Err(Error::Degenerate("all points coincide".into())),
        (true, false) => w,
        (false, true) => h,
        (true, true) => {
            if h.ln().abs() < w.ln().abs() {
                h
            } else {
                w
            }
        }
    };
    // Rescaling already-normalized data must be the identity.
    let factor = if (side - 1.0).abs() <= 4.0 * f64::EPSILON { 1.0 } else { 1.0 / side };
    let points = pts.points().iter().map(|&p| p * factor).collect();
    let scaled = match pts.slopes() {
        Some((l, r)) => PointSet::open(points, l, r)?,
        None => PointSet::closed(points)?,
    };
    Ok((scaled, factor))
}

/// Contents of a point file.
#[derive(Clone, Debug, PartialEq)]
pub struct PointFile {
    pub closed: bool,
    pub slopes: Option<(Point, Point)>,
    pub points: Vec<Point>,
}

impl PointFile {
    /// Builds the point set; `closed` and `slopes` override the header.
    pub fn to_point_set(&self, closed: Option<bool>, slopes: Option<(Point, Point)>) -> Result<PointSet> {
        if closed.unwrap_or(self.closed) {
            return PointSet::closed(self.points.clone());
        }
        match slopes.or(self.slopes) {
            Some((l, r)) => PointSet::open(self.points.clone(), l, r),
            None => Err(Error::Config("open curves need end slopes (header or command line)".into())),
        }
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse { line, msg: format!("`{tok}` is not a number") })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("`{tok}` is not finite") });
    }
    Ok(v)
}

/// Non-blank lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

pub fn parse_points(text: &str) -> Result<PointFile> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty point file".into() })?;
    let words: Vec<&str> = header.split_whitespace().collect();
    let (closed, slopes) = match words.as_slice() {
        ["closed"] => (true, None),
        ["open"] => (false, None),
        ["open", rest @ ..] if rest.len() == 4 => {
            let v = rest.iter().map(|t| parse_f64(t, hline)).collect::<Result<Vec<_>>>()?;
            (false, Some((Point::new(v[0], v[1]), Point::new(v[2], v[3]))))
        }
        _ => {
            return Err(Error::Parse {
                line: hline,
                msg: format!("expected `closed`, `open` or `open sxl syl sxr syr`, found `{header}`"),
            })
        }
    };
    let mut points = Vec::new();
    for (line, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 2 {
            return Err(Error::Parse { line, msg: format!("expected `x y`, found {} fields", f.len()) });
        }
        points.push(Point::new(parse_f64(f[0], line)?, parse_f64(f[1], line)?));
    }
    if points.is_empty() {
        return Err(Error::Parse { line: hline, msg: "no points after the header".into() });
    }
    Ok(PointFile { closed, slopes, points })
}

pub fn format_points(pts: &PointSet) -> String {
    let mut out = String::new();
    match pts.slopes() {
        Some((l, r)) => writeln!(out, "open {:.16e} {:.16e} {:.16e} {:.16e}", l.x, l.y, r.x, r.y),
        None => writeln!(out, "closed"),
    }
    .expect("writing to a String");
    for p in pts.points() {
        writeln!(out, "{:.16e} {:.16e}", p.x, p.y).expect("writing to a String");
    }
    out
}

pub fn read_points(path: impl AsRef<Path>) -> Result<PointFile> {
    parse_points(&fs::read_to_string(path)?)
}

pub fn write_points(path: impl AsRef<Path>, pts: &PointSet) -> Result<()> {
    Ok(fs::write(path, format_points(pts))?)
}

/// A fitted curve as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveFile {
    pub curve: TruncatedCurve,
    /// Factor the input data were multiplied by before fitting.
    pub scale: f64,
    pub n_stop: usize,
    pub converged: bool,
    pub e_samp: f64,
    pub decay_theta: Option<usize>,
    pub decay_sprime: Option<usize>,
    pub delta_theta: f64,
    pub delta_sprime: f64,
    pub config: FitConfig,
    pub tpar: Vec<f64>,
}

impl CurveFile {
    pub fn from_result(result: &FitResult, scale: f64) -> Self {
        CurveFile {
            curve: result.curve.clone(),
            scale,
            n_stop: result.n_stop,
            converged: result.converged,
            e_samp: result.e_samp,
            decay_theta: result.decay_theta,
            decay_sprime: result.decay_sprime,
            delta_theta: result.thresholds.delta_theta,
            delta_sprime: result.thresholds.delta_sprime,
            config: result.config.clone(),
            tpar: result.tpar.clone(),
        }
    }

    /// Points of the truncated curve, in the normalized frame.
    pub fn eval(&self, ts: &[f64]) -> Result<Vec<Point>> {
        eval_result(&self.curve, ts)
    }

    /// Points of the truncated curve, in the frame of the input data.
    pub fn eval_original(&self, ts: &[f64]) -> Result<Vec<Point>> {
        Ok(self.eval(ts)?.into_iter().map(|p| p * (1.0 / self.scale)).collect())
    }
}

/// Evaluates the truncated series at each parameter.
pub fn eval_result(curve: &TruncatedCurve, ts: &[f64]) -> Result<Vec<Point>> {
    curve.eval_many(ts)
}

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "none".to_string(), |k| k.to_string())
}

pub fn format_curve(file: &CurveFile) -> String {
    let c = &file.curve;
    let cfg = &file.config;
    let mut s = String::new();
    let basis = match c.basis {
        Basis::Chebyshev => "chebyshev",
        Basis::Fourier => "fourier",
    };
    let mut kv = |k: &str, v: String| writeln!(s, "{k} {v}").expect("writing to a String");
    kv(CURVE_FORMAT, CURVE_VERSION.to_string());
    kv("basis", basis.into());
    kv("length", format!("{:.16e}", c.length));
    kv("ncoefs", c.x.len().to_string());
    kv("scale", format!("{:.16e}", file.scale));
    kv("n_stop", file.n_stop.to_string());
    kv("converged", file.converged.to_string());
    kv("e_samp", format!("{:.16e}", file.e_samp));
    kv("decay_theta", opt(file.decay_theta));
    kv("decay_sprime", opt(file.decay_sprime));
    kv("delta_theta", format!("{:.16e}", file.delta_theta));
    kv("delta_sprime", format!("{:.16e}", file.delta_sprime));
    kv("n_nodes", cfg.n_nodes.to_string());
    kv("n_iters", cfg.n_iters.to_string());
    kv("h_filter", format!("{:.16e}", cfg.h_filter));
    kv("eps", format!("{:.16e}", cfg.eps));
    kv("n_coefs", cfg.n_coefs.to_string());
    kv("n_bands", cfg.n_bands.to_string());
    let tpar: Vec<String> = file.tpar.iter().map(|t| format!("{t:.16e}")).collect();
    kv("tpar", tpar.join(" "));
    s.push_str("coefficients\n");
    for (x, y) in c.x.iter().zip(&c.y) {
        writeln!(s, "{x:.16e} {y:.16e}").expect("writing to a String");
    }
    s
}

pub fn parse_curve(text: &str) -> Result<CurveFile> {
    let mut header: Vec<(usize, &str, &str)> = Vec::new();
    let mut lines = content_lines(text);
    let mut coeff_line = None;
    for (line, l) in lines.by_ref() {
        if l == "coefficients" {
            coeff_line = Some(line);
            break;
        }
        let (k, v) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        header.push((line, k, v.trim()));
    }
    let coeff_line = coeff_line.ok_or(Error::Parse { line: 1, msg: "missing `coefficients` section".into() })?;
    let get = |key: &str| -> Result<(usize, &str)> {
        header
            .iter()
            .find(|(_, k, _)| *k == key)
            .map(|&(l, _, v)| (l, v))
            .ok_or(Error::Parse { line: coeff_line, msg: format!("missing header key `{key}`") })
    };
    let num = |key: &str| -> Result<f64> {
        let (l, v) = get(key)?;
        parse_f64(v, l)
    };
    let int = |key: &str| -> Result<usize> {
        let (l, v) = get(key)?;
        v.parse().map_err(|_| Error::Parse { line: l, msg: format!("`{key}`: `{v}` is not a count") })
    };
    let opt_int = |key: &str| -> Result<Option<usize>> {
        let (l, v) = get(key)?;
        if v == "none" {
            return Ok(None);
        }
        v.parse().map(Some).map_err(|_| Error::Parse { line: l, msg: format!("`{key}`: `{v}` is not a count") })
    };

    let (vl, version) = get(CURVE_FORMAT)?;
    if version != CURVE_VERSION.to_string() {
        return Err(Error::Parse { line: vl, msg: format!("unsupported format version `{version}`") });
    }
    let (bl, basis) = get("basis")?;
    let basis = match basis {
        "chebyshev" => Basis::Chebyshev,
        "fourier" => Basis::Fourier,
        other => return Err(Error::Parse { line: bl, msg: format!("unknown basis `{other}`") }),
    };
    let ncoefs = int("ncoefs")?;
    let (converged_line, converged) = get("converged")?;
    let converged = match converged {
        "true" => true,
        "false" => false,
        other => return Err(Error::Parse { line: converged_line, msg: format!("`converged`: `{other}` is not a bool") }),
    };
    let (tl, tpar) = get("tpar")?;
    let tpar = tpar.split_whitespace().map(|t| parse_f64(t, tl)).collect::<Result<Vec<_>>>()?;

    let mut x = Vec::with_capacity(ncoefs);
    let mut y = Vec::with_capacity(ncoefs);
    for (line, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 2 {
            return Err(Error::Parse { line, msg: format!("expected `x y`, found {} fields", f.len()) });
        }
        x.push(parse_f64(f[0], line)?);
        y.push(parse_f64(f[1], line)?);
    }
    if x.len() != ncoefs {
        return Err(Error::Parse {
            line: coeff_line,
            msg: format!("header announces {ncoefs} coefficients, found {}", x.len()),
        });
    }
    if ncoefs == 0 {
        return Err(Error::Parse { line: coeff_line, msg: "no coefficients".into() });
    }
    let length = num("length")?;
    if !(length > 0.0) {
        let (l, _) = get("length")?;
        return Err(Error::Parse { line: l, msg: "length must be positive".into() });
    }
    Ok(CurveFile {
        curve: TruncatedCurve { basis, length, x, y },
        scale: num("scale")?,
        n_stop: int("n_stop")?,
        converged,
        e_samp: num("e_samp")?,
        decay_theta: opt_int("decay_theta")?,
        decay_sprime: opt_int("decay_sprime")?,
        delta_theta: num("delta_theta")?,
        delta_sprime: num("delta_sprime")?,
        config: FitConfig {
            n_nodes: int("n_nodes")?,
            n_iters: int("n_iters")?,
            h_filter: num("h_filter")?,
            eps: num("eps")?,
            n_coefs: int("n_coefs")?,
            n_bands: int("n_bands")?,
        },
        tpar,
    })
}

pub fn write_curve(path: impl AsRef<Path>, file: &CurveFile) -> Result<()> {
    Ok(fs::write(path, format_curve(file))?)
}

pub fn read_curve(path: impl AsRef<Path>) -> Result<CurveFile> {
    parse_curve(&fs::read_to_string(path)?)
}
