//! Deterministic SVG plots: the curve with its data points, and optional
//! log-scale coefficient spectra with threshold and cutoff guides.

use std::fmt::Write as _;

use crate::error::Result;
use crate::io::CurveFile;
use crate::kinematics::{basis_nodes, extract_kinematics, CurveState};
use crate::point::Point;
use crate::spectral::{Basis, SpectralSeries};

const CURVE_SIZE: f64 = 480.0;
const MARGIN: f64 = 20.0;
const SPECTRUM_HEIGHT: f64 = 240.0;
const FLOOR: f64 = 1e-20;

/// One coefficient-magnitude trace: `magnitudes[k]` belongs to index `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub label: String,
    pub color: String,
    pub magnitudes: Vec<f64>,
    /// Drawn as a horizontal line in the trace's colour.
    pub threshold: Option<f64>,
}

impl Spectrum {
    /// Largest magnitude per frequency index `|k|`.
    pub fn from_series(label: &str, color: &str, series: &SpectralSeries, threshold: Option<f64>) -> Self {
        let mags = series.magnitudes();
        let top = mags.iter().map(|(k, _)| *k).max().unwrap_or(0);
        let mut magnitudes = vec![0.0f64; top + 1];
        for (k, m) in mags {
            magnitudes[k] = magnitudes[k].max(m);
        }
        Spectrum { label: label.into(), color: color.into(), magnitudes, threshold }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Plot {
    /// Dense samples of the curve, drawn as one path.
    pub curve: Vec<Point>,
    pub closed: bool,
    /// Data points, drawn as red dots.
    pub samples: Vec<Point>,
    pub spectra: Vec<Spectrum>,
    /// Vertical guide at this coefficient index.
    pub cutoff: Option<usize>,
}

fn fmt(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

pub fn render_svg(plot: &Plot) -> String {
    let width = CURVE_SIZE + 2.0 * MARGIN;
    let spectrum_h = if plot.spectra.is_empty() { 0.0 } else { SPECTRUM_HEIGHT + 2.0 * MARGIN };
    let height = CURVE_SIZE + 2.0 * MARGIN + spectrum_h;
    let mut s = String::new();
    let mut w = |line: String| {
        s.push_str(&line);
        s.push('\n');
    };
    w(r#"<?xml version="1.0" encoding="UTF-8"?>"#.into());
    w(format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    ));
    w(format!(r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, fmt(width), fmt(height)));

    let all: Vec<Point> = plot.curve.iter().chain(&plot.samples).copied().collect();
    if !all.is_empty() {
        let (lo, hi) = all.iter().fold((all[0], all[0]), |(lo, hi), p| {
            (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y)))
        });
        let span = (hi.x - lo.x).max(hi.y - lo.y);
        let k = if span > 0.0 { CURVE_SIZE / span } else { 1.0 };
        let ox = MARGIN + 0.5 * (CURVE_SIZE - k * (hi.x - lo.x));
        let oy = MARGIN + 0.5 * (CURVE_SIZE - k * (hi.y - lo.y));
        let map = |p: &Point| (ox + k * (p.x - lo.x), oy + k * (hi.y - p.y));
        if !plot.curve.is_empty() {
            let mut d = String::new();
            for (i, p) in plot.curve.iter().enumerate() {
                let (x, y) = map(p);
                let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, fmt(x), fmt(y));
            }
            if plot.closed {
                d.push_str(" Z");
            }
            w(format!(r#"<path d="{d}" fill="none" stroke="black" stroke-width="1"/>"#));
        }
        for p in &plot.samples {
            let (x, y) = map(p);
            w(format!(r#"<circle cx="{}" cy="{}" r="2.5" fill="red"/>"#, fmt(x), fmt(y)));
        }
    }

    if !plot.spectra.is_empty() {
        let top = MARGIN + CURVE_SIZE + 2.0 * MARGIN;
        let left = MARGIN;
        let pw = CURVE_SIZE;
        let ph = SPECTRUM_HEIGHT;
        let logs = |m: f64| m.max(FLOOR).log10();
        let values = plot.spectra.iter().flat_map(|sp| sp.magnitudes.iter().copied().chain(sp.threshold));
        let (mut ymin, mut ymax) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), m| (a.min(logs(m)), b.max(logs(m))));
        if !ymin.is_finite() {
            ymin = -1.0;
            ymax = 0.0;
        }
        ymin = ymin.floor();
        ymax = ymax.ceil().max(ymin + 1.0);
        let kmax = plot.spectra.iter().map(|sp| sp.magnitudes.len()).max().unwrap_or(1).max(plot.cutoff.unwrap_or(0) + 1).max(2) - 1;
        let px = |k: f64| left + pw * k / kmax as f64;
        let py = |m: f64| top + ph * (ymax - logs(m)) / (ymax - ymin);
        w(format!(
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="gray" stroke-width="0.5"/>"#,
            fmt(left),
            fmt(top),
            fmt(pw),
            fmt(ph)
        ));
        w(format!(r#"<text x="{}" y="{}" font-size="10" font-family="sans-serif">1e{}</text>"#, fmt(left + 2.0), fmt(top + 10.0), ymax));
        w(format!(r#"<text x="{}" y="{}" font-size="10" font-family="sans-serif">1e{}</text>"#, fmt(left + 2.0), fmt(top + ph - 2.0), ymin));
        for (i, sp) in plot.spectra.iter().enumerate() {
            let pts: Vec<String> =
                sp.magnitudes.iter().enumerate().map(|(k, &m)| format!("{},{}", fmt(px(k as f64)), fmt(py(m)))).collect();
            w(format!(r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="0.75"/>"#, pts.join(" "), sp.color));
            if let Some(t) = sp.threshold {
                w(format!(
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="0.75"/>"#,
                    fmt(left),
                    fmt(py(t)),
                    fmt(left + pw),
                    fmt(py(t)),
                    sp.color
                ));
            }
            w(format!(
                r#"<text x="{}" y="{}" font-size="10" font-family="sans-serif" fill="{}">{}</text>"#,
                fmt(left + pw - 90.0),
                fmt(top + 12.0 * (i + 1) as f64),
                sp.color,
                sp.label
            ));
        }
        if let Some(c) = plot.cutoff {
            w(format!(
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 3" stroke-width="0.75"/>"#,
                fmt(px(c as f64)),
                fmt(top),
                fmt(px(c as f64)),
                fmt(top + ph)
            ));
        }
    }
    w("</svg>".into());
    s
}

/// The plot of a stored curve: `dense` evaluation points, the curve at its
/// data parameters, and (optionally) the θ and s′ spectra of the truncated
/// curve resampled on its original node count.
pub fn curve_plot(file: &CurveFile, dense: usize, with_spectrum: bool) -> Result<Plot> {
    let c = &file.curve;
    let closed = c.basis == Basis::Fourier;
    let dense = dense.max(2);
    let ts: Vec<f64> = if closed {
        (0..dense).map(|i| c.length * i as f64 / dense as f64).collect()
    } else {
        (0..dense).map(|i| c.length * i as f64 / (dense - 1) as f64).collect()
    };
    let mut plot = Plot { curve: c.eval_many(&ts)?, closed, samples: c.eval_many(&file.tpar)?, ..Plot::default() };
    if with_spectrum {
        let n = file.config.n_nodes;
        let nodes = basis_nodes(c.basis, n, c.length)?;
        let pts = c.eval_many(&nodes)?;
        let state = CurveState::from_samples(
            c.basis,
            c.length,
            pts.iter().map(|p| p.x).collect(),
            pts.iter().map(|p| p.y).collect(),
        )?;
        let k = extract_kinematics(&state)?;
        let theta = SpectralSeries::forward(c.basis, &k.detrended_theta(), c.length)?;
        let sprime = SpectralSeries::forward(c.basis, &k.sprime, c.length)?;
        plot.spectra = vec![
            Spectrum::from_series("theta", "blue", &theta, Some(file.delta_theta)),
            Spectrum::from_series("s'", "darkgreen", &sprime, Some(file.delta_sprime)),
        ];
        plot.cutoff = Some(if closed { c.n_coefs() / 2 } else { c.n_coefs() });
    }
    Ok(plot)
}
