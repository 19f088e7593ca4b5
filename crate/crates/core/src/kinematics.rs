//! Sampled curves and their kinematic description: tangential angle θ(t)
//! and speed s′(t), extracted by spectral differentiation and turned back
//! into coordinates by spectral integration.

use std::f64::consts::PI;

use crate::bezier::BezierSpline;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::spectral::{cheb_nodes, fourier_nodes, Basis, SpectralSeries};

/// A curve sampled at the `N` nodes of its basis on `[0, L]`.
///
/// `theta` and `sprime` are empty until [`extract_kinematics`] runs.
/// `theta` always holds the continuous (unwrapped) angle; for closed
/// curves `winding` is `θ(L) - θ(0)`, an integer multiple of 2π.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveState {
    pub basis: Basis,
    pub length: f64,
    pub nodes: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub theta: Vec<f64>,
    pub sprime: Vec<f64>,
    pub winding: f64,
    pub anchor: Point,
}

/// Speeds at or below this fraction of the largest one count as zero.
pub const SPEED_FLOOR: f64 = 1e-12;

/// Nodes of the basis: practical Chebyshev nodes (open) or `jL/N` (closed).
pub fn basis_nodes(basis: Basis, n: usize, length: f64) -> Result<Vec<f64>> {
    match basis {
        Basis::Chebyshev => cheb_nodes(n, length),
        Basis::Fourier => {
            if n < 2 || n % 2 != 0 {
                return Err(Error::Size(format!("closed curves need an even N >= 2, got {n}")));
            }
            Ok(fourier_nodes(n, length))
        }
    }
}

impl CurveState {
    /// A state holding coordinates only.
    pub fn from_samples(basis: Basis, length: f64, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Size(format!("x has {} samples, y has {}", x.len(), y.len())));
        }
        let nodes = basis_nodes(basis, x.len(), length)?;
        let anchor = Point::new(x[0], y[0]);
        Ok(CurveState { basis, length, nodes, x, y, theta: Vec::new(), sprime: Vec::new(), winding: 0.0, anchor })
    }

    /// Samples `f` at the basis nodes.
    pub fn from_fn(basis: Basis, n: usize, length: f64, f: impl Fn(f64) -> Point) -> Result<Self> {
        let nodes = basis_nodes(basis, n, length)?;
        let (x, y) = nodes.iter().map(|&t| f(t)).map(|p| (p.x, p.y)).unzip();
        CurveState::from_samples(basis, length, x, y)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.basis == Basis::Fourier
    }

    pub fn has_kinematics(&self) -> bool {
        self.theta.len() == self.len() && self.sprime.len() == self.len()
    }

    pub fn point(&self, j: usize) -> Point {
        Point::new(self.x[j], self.y[j])
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.x.iter().zip(&self.y).map(|(&x, &y)| Point::new(x, y))
    }

    /// Coordinate series `(x(t), y(t))` interpolating the samples.
    pub fn coordinate_series(&self) -> Result<(SpectralSeries, SpectralSeries)> {
        Ok((
            SpectralSeries::forward(self.basis, &self.x, self.length)?,
            SpectralSeries::forward(self.basis, &self.y, self.length)?,
        ))
    }

    /// θ with the linear winding ramp removed (closed), θ itself (open).
    pub fn detrended_theta(&self) -> Vec<f64> {
        if self.is_closed() {
            detrend_theta(&self.theta, &self.nodes, self.winding, self.length)
        } else {
            self.theta.clone()
        }
    }

    /// Drops θ and s′ after the coordinates have been changed.
    pub fn with_coordinates(&self, x: Vec<f64>, y: Vec<f64>) -> CurveState {
        CurveState {
            basis: self.basis,
            length: self.length,
            nodes: self.nodes.clone(),
            anchor: Point::new(x[0], y[0]),
            x,
            y,
            theta: Vec::new(),
            sprime: Vec::new(),
            winding: self.winding,
        }
    }
}

/// Evaluates the interpolating series of a state at arbitrary parameters.
#[derive(Clone, Debug)]
pub struct CurveEvaluator {
    x: SpectralSeries,
    y: SpectralSeries,
    dx: SpectralSeries,
    dy: SpectralSeries,
    ddx: SpectralSeries,
    ddy: SpectralSeries,
}

impl CurveEvaluator {
    pub fn new(state: &CurveState) -> Result<Self> {
        let (x, y) = state.coordinate_series()?;
        Ok(CurveEvaluator::from_series(x, y))
    }

    pub fn from_series(x: SpectralSeries, y: SpectralSeries) -> Self {
        let dx = x.differentiate();
        let dy = y.differentiate();
        let ddx = dx.differentiate();
        let ddy = dy.differentiate();
        CurveEvaluator { x, y, dx, dy, ddx, ddy }
    }

    pub fn point(&self, t: f64) -> Result<Point> {
        Ok(Point::new(self.x.eval(t)?, self.y.eval(t)?))
    }

    pub fn tangent(&self, t: f64) -> Result<Point> {
        Ok(Point::new(self.dx.eval(t)?, self.dy.eval(t)?))
    }

    pub fn second(&self, t: f64) -> Result<Point> {
        Ok(Point::new(self.ddx.eval(t)?, self.ddy.eval(t)?))
    }
}

/// Samples the seed spline at `n` nodes: Chebyshev nodes when open,
/// equispaced nodes when closed.
pub fn discretize_spline(spline: &BezierSpline, n: usize) -> Result<CurveState> {
    let segments = spline.segments().len();
    let points = if spline.is_closed() { segments } else { segments + 1 };
    let min = 4 * points;
    if n < min {
        return Err(Error::Config(format!("N = {n} is too small for {points} data points (need at least {min})")));
    }
    let basis = if spline.is_closed() { Basis::Fourier } else { Basis::Chebyshev };
    let length = spline.length();
    let nodes = basis_nodes(basis, n, length)?;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for &t in &nodes {
        let p = spline.eval(t)?;
        x.push(p.x);
        y.push(p.y);
    }
    CurveState::from_samples(basis, length, x, y)
}

/// Adds multiples of 2π so consecutive entries differ by less than π.
/// The first entry is unchanged.
pub fn unwrap_angles(raw: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(raw.len());
    let mut shift = 0.0_f64;
    for (j, &a) in raw.iter().enumerate() {
        if j > 0 {
            let prev = out[j - 1];
            let cand = a + shift;
            shift += -2.0 * PI * ((cand - prev) / (2.0 * PI)).round();
        }
        out.push(a + shift);
    }
    out
}

/// `θ̃_j = θ_j - (c/L) t_j`.
pub fn detrend_theta(theta: &[f64], nodes: &[f64], winding: f64, length: f64) -> Vec<f64> {
    let slope = winding / length;
    theta.iter().zip(nodes).map(|(th, t)| th - slope * t).collect()
}

/// Inverse of [`detrend_theta`].
pub fn retrend_theta(theta: &[f64], nodes: &[f64], winding: f64, length: f64) -> Vec<f64> {
    let slope = winding / length;
    theta.iter().zip(nodes).map(|(th, t)| th + slope * t).collect()
}

/// Computes s′ and the unwrapped θ from the coordinates; for closed curves
/// also the winding `c = θ(L) - θ(0)`.
pub fn extract_kinematics(state: &CurveState) -> Result<CurveState> {
    let (xs, ys) = state.coordinate_series()?;
    let n = state.len();
    let dx = xs.differentiate().values_at_nodes(n);
    let dy = ys.differentiate().values_at_nodes(n);
    let mut sprime = Vec::with_capacity(n);
    let mut raw = Vec::with_capacity(n);
    for (&a, &b) in dx.iter().zip(&dy) {
        sprime.push(a.hypot(b));
        raw.push(b.atan2(a));
    }
    // Spectral derivatives of a stalled parametrization are rounding noise,
    // not exact zeros.
    let floor = SPEED_FLOOR * sprime.iter().fold(0.0f64, |m, s| m.max(*s));
    if let Some(j) = sprime.iter().position(|s| !(*s > floor) || !s.is_finite()) {
        return Err(Error::SingularParametrization(format!("s'({}) = {}", state.nodes[j], sprime[j])));
    }
    let theta = unwrap_angles(&raw);
    let winding = if state.is_closed() {
        // θ(L) is θ(0) continued past the last sample.
        let last = theta[n - 1];
        2.0 * PI * ((last - theta[0]) / (2.0 * PI)).round()
    } else {
        0.0
    };
    Ok(CurveState { theta, sprime, winding, anchor: state.point(0), ..state.clone() })
}

/// Rebuilds coordinates from θ and s′:
/// `x(t) = x(0) + ∫_0^t s′ cos θ`, `y(t) = y(0) + ∫_0^t s′ sin θ`.
///
/// Closed curves integrate in the Fourier basis, which requires both
/// integrands to have (numerically) zero mean.
pub fn reconstruct_curve(state: &CurveState) -> Result<CurveState> {
    if !state.has_kinematics() {
        return Err(Error::Size("reconstruction needs theta and sprime samples".into()));
    }
    let n = state.len();
    let (cx, cy): (Vec<f64>, Vec<f64>) =
        state.theta.iter().zip(&state.sprime).map(|(th, s)| (s * th.cos(), s * th.sin())).unzip();
    let integrate = |v: &[f64]| -> Result<Vec<f64>> {
        let series = SpectralSeries::forward(state.basis, v, state.length)?;
        let integral = series.integrate().map_err(|e| match e {
            Error::NonPeriodicIntegrand { mean, .. } => Error::NotClosed(mean * state.length),
            other => other,
        })?;
        Ok(integral.values_at_nodes(n))
    };
    let ix = integrate(&cx)?;
    let iy = integrate(&cy)?;
    let x = ix.iter().map(|v| state.anchor.x + v).collect();
    let y = iy.iter().map(|v| state.anchor.y + v).collect();
    Ok(CurveState { x, y, ..state.clone() })
}

/// Gap `L * |mean(s′ cos θ), mean(s′ sin θ)|` of a closed curve's
/// trapezoidal closure integrals.
pub fn closure_gap(theta: &[f64], sprime: &[f64], length: f64) -> f64 {
    let n = theta.len() as f64;
    let (c, s) = theta.iter().zip(sprime).fold((0.0, 0.0), |(c, s), (th, sp)| (c + sp * th.cos(), s + sp * th.sin()));
    length * (c / n).hypot(s / n)
}
