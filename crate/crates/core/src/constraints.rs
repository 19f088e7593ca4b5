//! Per-iteration corrections applied after filtering: closing the curve,
//! rigid repositioning onto the data, and Gaussian interpolation bumps.

use std::f64::consts::PI;

use crate::bezier::{BezierSpline, PointSet};
use crate::error::{Error, Result};
use crate::kinematics::{CurveEvaluator, CurveState};
use crate::linalg::{solve_dense, BandMatrix, CyclicBandMatrix};
use crate::point::Point;

/// Entries of the perturbation system below this are dropped.
pub const DROP_TOLERANCE: f64 = 1e-17;

/// A curve that can be evaluated, with derivatives, at any parameter.
pub trait ParametricCurve {
    fn point(&self, t: f64) -> Result<Point>;
    fn tangent(&self, t: f64) -> Result<Point>;
    fn second(&self, t: f64) -> Result<Point>;
}

impl ParametricCurve for BezierSpline {
    fn point(&self, t: f64) -> Result<Point> {
        self.eval(t)
    }
    fn tangent(&self, t: f64) -> Result<Point> {
        self.derivative(t)
    }
    fn second(&self, t: f64) -> Result<Point> {
        self.second_derivative(t)
    }
}

impl ParametricCurve for CurveEvaluator {
    fn point(&self, t: f64) -> Result<Point> {
        CurveEvaluator::point(self, t)
    }
    fn tangent(&self, t: f64) -> Result<Point> {
        CurveEvaluator::tangent(self, t)
    }
    fn second(&self, t: f64) -> Result<Point> {
        CurveEvaluator::second(self, t)
    }
}

/// Orthogonalizes `s′` against `cos θ` and then against the part of
/// `sin θ` orthogonal to `cos θ`, using uniform (trapezoidal) weights.
pub fn close_sprime(theta: &[f64], sprime: &[f64]) -> Result<Vec<f64>> {
    if theta.len() != sprime.len() || theta.is_empty() {
        return Err(Error::Size(format!("theta has {} samples, sprime {}", theta.len(), sprime.len())));
    }
    let n = theta.len() as f64;
    let mean = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>() / n;
    let cos: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
    let sin: Vec<f64> = theta.iter().map(|t| t.sin()).collect();

    let cc = mean(&cos, &cos);
    if !(cc > 1e-14) {
        return Err(Error::DegenerateDirection(format!("mean cos^2 theta = {cc:e}")));
    }
    let a = mean(sprime, &cos) / cc;
    let mut s: Vec<f64> = sprime.iter().zip(&cos).map(|(s, c)| s - a * c).collect();

    let sc = mean(&sin, &cos) / cc;
    let lambda: Vec<f64> = sin.iter().zip(&cos).map(|(s, c)| s - sc * c).collect();
    let ll = mean(&lambda, &lambda);
    if !(ll > 1e-14) {
        return Err(Error::DegenerateDirection(format!("mean lambda^2 = {ll:e}")));
    }
    let b = mean(&s, &lambda) / ll;
    for (sj, l) in s.iter_mut().zip(&lambda) {
        *sj -= b * l;
    }
    Ok(s)
}

/// Curve parameters of the points closest to the data, with the width of
/// the Gaussian bump centred at each.
#[derive(Clone, Debug, PartialEq)]
pub struct NearestParams {
    pub tpar: Vec<f64>,
    pub sigma: Vec<f64>,
    pub length: f64,
    pub closed: bool,
}

impl NearestParams {
    /// Builds the bump widths for given parameters:
    /// `σ_i = ln(1/ε) L² / Δ_i²`, `Δ_i` the distance to the `n_bands`-th
    /// nearest other parameter.
    pub fn new(tpar: Vec<f64>, length: f64, closed: bool, n_bands: usize, eps: f64) -> Result<Self> {
        if n_bands == 0 {
            return Err(Error::Config("n_bands must be at least 1".into()));
        }
        let m = tpar.len();
        let log = (1.0 / eps).ln();
        let mut sigma = Vec::with_capacity(m);
        for (i, &ti) in tpar.iter().enumerate() {
            let mut dist: Vec<f64> = tpar
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &tj)| param_distance(ti, tj, length, closed))
                .collect();
            let delta = if dist.is_empty() {
                length
            } else {
                dist.sort_by(f64::total_cmp);
                dist[n_bands.min(dist.len()) - 1]
            };
            if !(delta > 0.0) {
                return Err(Error::Degenerate(format!("data points {i} and a neighbour share the curve parameter {ti}")));
            }
            sigma.push(log * length * length / (delta * delta));
        }
        Ok(NearestParams { tpar, sigma, length, closed })
    }

    pub fn len(&self) -> usize {
        self.tpar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tpar.is_empty()
    }
}

fn param_distance(a: f64, b: f64, length: f64, closed: bool) -> f64 {
    let d = (a - b).abs();
    if closed {
        d.min(length - d % length).min(d % length)
    } else {
        d
    }
}

/// Finds, for every data point, the curve parameter of its closest point:
/// a coarse scan over the samples of `state`, refined by Newton's method
/// on the squared distance to `curve`.
pub fn nearest_parameters(
    curve: &impl ParametricCurve,
    state: &CurveState,
    pts: &PointSet,
    n_bands: usize,
    eps: f64,
) -> Result<NearestParams> {
    let length = state.length;
    let closed = state.is_closed();
    let mut tpar = Vec::with_capacity(pts.len());
    for &c in pts.points() {
        let (j, _) = state
            .points()
            .map(|p| (p - c).dot(p - c))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("state has samples");
        tpar.push(refine_nearest(curve, c, state.nodes[j], length, closed)?);
    }
    NearestParams::new(tpar, length, closed, n_bands, eps)
}

fn refine_nearest(curve: &impl ParametricCurve, c: Point, t0: f64, length: f64, closed: bool) -> Result<f64> {
    let tol = 1e-12 * length;
    let mut t = t0;
    let mut best = (curve.point(t)? - c).hypot();
    for _ in 0..30 {
        let r = curve.point(t)? - c;
        let d1 = curve.tangent(t)?;
        let d2 = curve.second(t)?;
        let grad = d1.dot(r);
        let newton = d1.dot(d1) + d2.dot(r);
        let curv = if newton > 0.0 { newton } else { d1.dot(d1) };
        if !(curv > 0.0) {
            break;
        }
        let mut step = -grad / curv;
        let mut next = clamp_param(t + step, length, closed);
        let mut dist = (curve.point(next)? - c).hypot();
        let mut halvings = 0;
        while dist > best && halvings < 30 {
            step *= 0.5;
            next = clamp_param(t + step, length, closed);
            dist = (curve.point(next)? - c).hypot();
            halvings += 1;
        }
        if dist > best {
            break;
        }
        best = dist;
        t = next;
        if step.abs() <= tol {
            break;
        }
    }
    Ok(t)
}

fn clamp_param(t: f64, length: f64, closed: bool) -> f64 {
    if closed {
        let w = t.rem_euclid(length);
        if length - w <= 1e-12 * length {
            0.0
        } else {
            w
        }
    } else {
        t.clamp(0.0, length)
    }
}

/// The rigid motion that best maps the closest points onto the data:
/// rotation by `psi` about `center`, then translation by `(dx, dy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidFix {
    pub psi: f64,
    pub dx: f64,
    pub dy: f64,
    pub center: Point,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
}

impl RigidFix {
    pub fn apply(&self, p: Point) -> Point {
        self.center + Point::new(self.dx, self.dy) + (p - self.center).rotate(self.psi)
    }

    /// Sum of squared distances between the moved closest points and `data`.
    pub fn objective(&self, data: &[Point]) -> f64 {
        rigid_objective(self.center, &self.r, &self.phi, data, self.psi, self.dx, self.dy)
    }

    /// Gradient of [`RigidFix::objective`] in `(ψ, Δx, Δy)`.
    pub fn gradient(&self, data: &[Point]) -> [f64; 3] {
        let (g, _) = rigid_derivatives(self.center, &self.r, &self.phi, data, self.psi, self.dx, self.dy);
        g
    }
}

pub fn rigid_objective(center: Point, r: &[f64], phi: &[f64], data: &[Point], psi: f64, dx: f64, dy: f64) -> f64 {
    r.iter()
        .zip(phi)
        .zip(data)
        .map(|((&ri, &fi), c)| {
            let ex = center.x + dx + ri * (fi + psi).cos() - c.x;
            let ey = center.y + dy + ri * (fi + psi).sin() - c.y;
            ex * ex + ey * ey
        })
        .sum()
}

fn rigid_derivatives(
    center: Point,
    r: &[f64],
    phi: &[f64],
    data: &[Point],
    psi: f64,
    dx: f64,
    dy: f64,
) -> ([f64; 3], [f64; 9]) {
    let mut g = [0.0; 3];
    let mut h = [0.0; 9];
    for ((&ri, &fi), c) in r.iter().zip(phi).zip(data) {
        let (s, co) = (fi + psi).sin_cos();
        let ex = center.x + dx + ri * co - c.x;
        let ey = center.y + dy + ri * s - c.y;
        // d(ex)/dψ = -r sin, d(ey)/dψ = r cos
        let px = -ri * s;
        let py = ri * co;
        g[0] += 2.0 * (ex * px + ey * py);
        g[1] += 2.0 * ex;
        g[2] += 2.0 * ey;
        h[0] += 2.0 * (px * px + py * py - ex * ri * co - ey * ri * s);
        h[1] += 2.0 * px;
        h[2] += 2.0 * py;
        h[4] += 2.0;
        h[8] += 2.0;
    }
    h[3] = h[1];
    h[6] = h[2];
    (g, h)
}

/// Rotates and translates the whole curve to minimize the summed squared
/// distance between its points at `nearest.tpar` and the data.
pub fn reposition(state: &CurveState, nearest: &NearestParams, pts: &PointSet) -> Result<(RigidFix, CurveState)> {
    if nearest.len() != pts.len() || pts.is_empty() {
        return Err(Error::Size(format!("{} parameters for {} data points", nearest.len(), pts.len())));
    }
    let eval = CurveEvaluator::new(state)?;
    let closest: Vec<Point> = nearest.tpar.iter().map(|&t| eval.point(t)).collect::<Result<_>>()?;
    let fix = rigid_fix(&closest, pts.points(), pts.scale())?;
    let (x, y) = state.points().map(|p| fix.apply(p)).map(|p| (p.x, p.y)).unzip();
    Ok((fix, state.with_coordinates(x, y)))
}

/// Minimizes the rigid-motion objective by Newton's method from the origin.
pub fn rigid_fix(closest: &[Point], data: &[Point], scale: f64) -> Result<RigidFix> {
    let m = closest.len() as f64;
    let center = closest.iter().fold(Point::ZERO, |a, &p| a + p) * (1.0 / m);
    let r: Vec<f64> = closest.iter().map(|&p| (p - center).hypot()).collect();
    let phi: Vec<f64> = closest.iter().map(|&p| (p.y - center.y).atan2(p.x - center.x)).collect();
    let f = |v: [f64; 3]| rigid_objective(center, &r, &phi, data, v[0], v[1], v[2]);
    let gtol = 1e-12 * scale.max(f64::MIN_POSITIVE).powi(2);

    let mut v = [0.0; 3];
    let mut fv = f(v);
    let mut converged = false;
    for _ in 0..50 {
        let (g, h) = rigid_derivatives(center, &r, &phi, data, v[0], v[1], v[2]);
        if g.iter().map(|x| x * x).sum::<f64>().sqrt() <= gtol {
            converged = true;
            break;
        }
        if !(h[0] > 0.0) {
            break;
        }
        let step = match solve_dense(&h, &[-g[0], -g[1], -g[2]]) {
            Ok(s) => s,
            Err(_) => break,
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = [v[0] + alpha * step[0], v[1] + alpha * step[1], v[2] + alpha * step[2]];
            let ft = f(trial);
            if ft <= fv {
                let moved = trial != v;
                v = trial;
                fv = ft;
                accepted = moved;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !converged {
        // Near the optimum the decrease in f drops below its rounding and
        // the line search stalls; the closed form is exact there.
        let grad_norm = |v: [f64; 3]| {
            let (g, _) = rigid_derivatives(center, &r, &phi, data, v[0], v[1], v[2]);
            g.iter().map(|x| x * x).sum::<f64>().sqrt()
        };
        let exact = rigid_closed_form(center, closest, data);
        if !exact.iter().all(|x| x.is_finite()) {
            return Err(Error::Reposition("no finite minimizer found".into()));
        }
        if !(grad_norm(v) <= grad_norm(exact)) {
            v = exact;
        }
    }
    Ok(RigidFix { psi: v[0], dx: v[1], dy: v[2], center, r, phi })
}

/// Exact minimizer after eliminating the translation: the angle of
/// `Σ q_i × e_i, Σ q_i · e_i` with `q`, `e` taken about the centre.
fn rigid_closed_form(center: Point, closest: &[Point], data: &[Point]) -> [f64; 3] {
    let m = closest.len() as f64;
    let (mut dot, mut cross) = (0.0, 0.0);
    let mut mean_e = Point::ZERO;
    for (&p, &c) in closest.iter().zip(data) {
        let q = p - center;
        let e = c - center;
        dot += q.dot(e);
        cross += q.cross(e);
        mean_e += e;
    }
    let psi = if dot == 0.0 && cross == 0.0 { 0.0 } else { cross.atan2(dot) };
    let psi = if psi > PI { psi - 2.0 * PI } else { psi };
    let d = mean_e * (1.0 / m);
    [psi, d.x, d.y]
}

/// The Gaussian bumps `g_i`, periodized by image summation when closed.
#[derive(Clone, Debug)]
pub struct PerturbationBasis {
    centers: Vec<f64>,
    sigma: Vec<f64>,
    images: Vec<i64>,
    length: f64,
    closed: bool,
}

/// Smallest `K` with `exp(-σ (K-1)²) < 1e-17`.
pub fn image_count(sigma: f64) -> i64 {
    let mut k = 1i64;
    while (-sigma * ((k - 1) as f64).powi(2)).exp() >= DROP_TOLERANCE {
        k += 1;
    }
    k
}

impl PerturbationBasis {
    pub fn new(nearest: &NearestParams) -> Self {
        let images = if nearest.closed { nearest.sigma.iter().map(|&s| image_count(s)).collect() } else { Vec::new() };
        PerturbationBasis {
            centers: nearest.tpar.clone(),
            sigma: nearest.sigma.clone(),
            images,
            length: nearest.length,
            closed: nearest.closed,
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn image_counts(&self) -> &[i64] {
        &self.images
    }

    /// `g_i(t)`.
    pub fn eval(&self, i: usize, t: f64) -> f64 {
        let u = (t - self.centers[i]) / self.length;
        let s = self.sigma[i];
        if !self.closed {
            return (-s * u * u).exp();
        }
        let u = (t.rem_euclid(self.length) - self.centers[i]) / self.length;
        let u = u - u.round();
        let k = self.images[i];
        (-k..=k).map(|j| (-s * (u + j as f64).powi(2)).exp()).sum()
    }

    /// `g_i(t)` with an explicit image count, ignoring the stored truncation.
    pub fn eval_with_images(&self, i: usize, t: f64, images: i64) -> f64 {
        let u = (t - self.centers[i]) / self.length;
        let s = self.sigma[i];
        if !self.closed {
            return (-s * u * u).exp();
        }
        (-images..=images).map(|j| (-s * (u + j as f64).powi(2)).exp()).sum()
    }

    /// The interpolation matrix `A[i][j] = g_j(t̃_i)` in row-major order.
    pub fn dense_matrix(&self) -> Vec<f64> {
        let m = self.len();
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] = self.eval(j, self.centers[i]);
            }
        }
        a
    }

    /// Solves `A c = rhs` for each right-hand side, exploiting bandedness.
    pub fn solve(&self, rhs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let m = self.len();
        let ill = |e: Error| Error::IllConditionedPerturbation(e.to_string());
        let mut entries: Vec<(usize, isize, f64)> = Vec::new();
        let mut bandwidth = 0usize;
        let max_offset = if self.closed { m / 2 } else { m.saturating_sub(1) };
        for i in 0..m {
            let ti = self.centers[i];
            entries.push((i, 0, self.eval(i, ti)));
            for dir in [-1isize, 1] {
                for d in 1..=max_offset as isize {
                    let off = dir * d;
                    let j = i as isize + off;
                    let j = if self.closed {
                        j.rem_euclid(m as isize) as usize
                    } else if j < 0 || j >= m as isize {
                        break;
                    } else {
                        j as usize
                    };
                    let v = self.eval(j, ti);
                    if v < DROP_TOLERANCE {
                        break;
                    }
                    entries.push((i, off, v));
                    bandwidth = bandwidth.max(d as usize);
                }
            }
        }
        let solutions = if self.closed && m > 4 * bandwidth + 2 {
            let mut a = CyclicBandMatrix::zeros(m, bandwidth);
            for &(i, off, v) in &entries {
                a.set_offset(i, off, v);
            }
            a.solve_many(rhs).map_err(ill)?
        } else if self.closed {
            let mut a = vec![0.0; m * m];
            for &(i, off, v) in &entries {
                let j = (i as isize + off).rem_euclid(m as isize) as usize;
                a[i * m + j] = v;
            }
            rhs.iter().map(|r| solve_dense(&a, r)).collect::<Result<_>>().map_err(ill)?
        } else {
            let mut a = BandMatrix::zeros(m, bandwidth, bandwidth);
            for &(i, off, v) in &entries {
                a.set(i, (i as isize + off) as usize, v);
            }
            let lu = a.factor().map_err(ill)?;
            rhs.iter().map(|r| lu.solve(r)).collect::<Result<_>>().map_err(ill)?
        };
        for s in &solutions {
            if !s.iter().all(|v| v.is_finite()) {
                return Err(Error::IllConditionedPerturbation("non-finite perturbation coefficients".into()));
            }
        }
        Ok(solutions)
    }

    /// Adds `Σ_i c_i g_i(t_j)` to `values`.
    pub fn add_to(&self, coeffs: &[f64], nodes: &[f64], values: &mut [f64]) {
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (v, &t) in values.iter_mut().zip(nodes) {
                *v += c * self.eval(i, t);
            }
        }
    }
}

/// Perturbation coefficients found by [`apply_perturbations`].
#[derive(Clone, Debug, PartialEq)]
pub struct Corrections {
    pub cx: Vec<f64>,
    pub cy: Vec<f64>,
}

/// Adds Gaussian bumps so the curve passes through every data point at
/// its fixed parameter `t̃_i`.
pub fn apply_perturbations(
    state: &CurveState,
    nearest: &NearestParams,
    pts: &PointSet,
) -> Result<(CurveState, Corrections)> {
    if nearest.len() != pts.len() {
        return Err(Error::Size(format!("{} parameters for {} data points", nearest.len(), pts.len())));
    }
    let eval = CurveEvaluator::new(state)?;
    let mut rx = Vec::with_capacity(pts.len());
    let mut ry = Vec::with_capacity(pts.len());
    for (&t, &c) in nearest.tpar.iter().zip(pts.points()) {
        let p = eval.point(t)?;
        rx.push(c.x - p.x);
        ry.push(c.y - p.y);
    }
    let basis = PerturbationBasis::new(nearest);
    let mut sol = basis.solve(&[&rx, &ry])?;
    let cy = sol.pop().expect("two solutions");
    let cx = sol.pop().expect("two solutions");
    let mut x = state.x.clone();
    let mut y = state.y.clone();
    basis.add_to(&cx, &state.nodes, &mut x);
    basis.add_to(&cy, &state.nodes, &mut y);
    Ok((state.with_coordinates(x, y), Corrections { cx, cy }))
}
