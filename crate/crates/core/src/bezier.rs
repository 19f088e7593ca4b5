//! C² cubic Bézier seed splines through an ordered point set.
//!
//! Segment `i` (1-based in the formulas, 0-based in storage) runs from
//! `C[i-1]` to `C[i]` over one unit of the spline parameter, so an open
//! spline through `n + 1` points lives on `[0, n]` and a closed one on
//! `[0, n + 1]`. The first interior control points solve a `[1, 4, 1]`
//! tridiagonal system (cyclic when closed); the second ones follow from
//! C¹ continuity at the knots.

use crate::error::{Error, Result};
use crate::linalg::{solve_cyclic_tridiagonal, solve_tridiagonal};
use crate::point::{bbox_diameter, Point};

/// Ordered sample points with an open/closed flag and, for open curves,
/// the prescribed derivatives at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
    closed: bool,
    slopes: Option<(Point, Point)>,
}

impl PointSet {
    pub fn open(points: Vec<Point>, slope_left: Point, slope_right: Point) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Size(format!("open curve needs at least 2 points, got {}", points.len())));
        }
        if !slope_left.is_finite() || !slope_right.is_finite() {
            return Err(Error::Degenerate("end slopes must be finite".into()));
        }
        check_points(&points, false)?;
        Ok(PointSet { points, closed: false, slopes: Some((slope_left, slope_right)) })
    }

    pub fn closed(points: Vec<Point>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Size(format!("closed curve needs at least 3 points, got {}", points.len())));
        }
        check_points(&points, true)?;
        Ok(PointSet { points, closed: true, slopes: None })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// `(slope_left, slope_right)` for open sets, `None` for closed ones.
    pub fn slopes(&self) -> Option<(Point, Point)> {
        self.slopes
    }

    /// Diameter of the bounding box; the length scale for tolerances.
    pub fn scale(&self) -> f64 {
        bbox_diameter(&self.points)
    }

    /// Applies `p -> factor * p` to points and slopes.
    pub fn scaled(&self, factor: f64) -> PointSet {
        PointSet {
            points: self.points.iter().map(|&p| p * factor).collect(),
            closed: self.closed,
            slopes: self.slopes.map(|(l, r)| (l * factor, r * factor)),
        }
    }

    /// Applies a map to every point and a (linear) map to the slopes.
    pub fn map(&self, point_map: impl Fn(Point) -> Point, vector_map: impl Fn(Point) -> Point) -> PointSet {
        PointSet {
            points: self.points.iter().map(|&p| point_map(p)).collect(),
            closed: self.closed,
            slopes: self.slopes.map(|(l, r)| (vector_map(l), vector_map(r))),
        }
    }
}

fn check_points(points: &[Point], closed: bool) -> Result<()> {
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(Error::Degenerate(format!("point {i} is not finite")));
    }
    for (i, w) in points.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(Error::Degenerate(format!("points {i} and {} coincide", i + 1)));
        }
    }
    if closed && points[0] == points[points.len() - 1] {
        return Err(Error::Degenerate("first and last points of a closed curve coincide".into()));
    }
    Ok(())
}

/// A piecewise cubic Bézier curve, one segment per unit parameter interval.
#[derive(Clone, Debug, PartialEq)]
pub struct BezierSpline {
    segments: Vec<[Point; 4]>,
    closed: bool,
}

impl BezierSpline {
    pub fn segments(&self) -> &[[Point; 4]] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Parameter domain length (number of segments).
    pub fn length(&self) -> f64 {
        self.segments.len() as f64
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let len = self.length();
        let t = if self.closed {
            let w = t.rem_euclid(len);
            if w >= len {
                0.0
            } else {
                w
            }
        } else {
            if !(0.0..=len).contains(&t) {
                return Err(Error::Domain(format!("t = {t} outside [0, {len}]")));
            }
            t
        };
        let i = (t.ceil() as usize).clamp(1, self.segments.len());
        Ok((i - 1, t - (i - 1) as f64))
    }

    /// `S(t) = B_i(t - i + 1)` with `i = ceil(t)` clamped to `[1, L]`.
    pub fn eval(&self, t: f64) -> Result<Point> {
        let (i, u) = self.locate(t)?;
        Ok(bernstein(&self.segments[i], u))
    }

    pub fn derivative(&self, t: f64) -> Result<Point> {
        let (i, u) = self.locate(t)?;
        Ok(bernstein_derivative(&self.segments[i], u))
    }

    pub fn second_derivative(&self, t: f64) -> Result<Point> {
        let (i, u) = self.locate(t)?;
        Ok(bernstein_second_derivative(&self.segments[i], u))
    }

    /// Largest jump of the first and second derivative across knots
    /// (including the wrap-around knot when closed).
    pub fn knot_jumps(&self) -> (f64, f64) {
        let m = self.segments.len();
        let knots = if self.closed { m } else { m - 1 };
        let mut d1 = 0.0f64;
        let mut d2 = 0.0f64;
        for k in 0..knots {
            let a = &self.segments[k];
            let b = &self.segments[(k + 1) % m];
            d1 = d1.max((bernstein_derivative(a, 1.0) - bernstein_derivative(b, 0.0)).hypot());
            d2 = d2.max((bernstein_second_derivative(a, 1.0) - bernstein_second_derivative(b, 0.0)).hypot());
        }
        (d1, d2)
    }
}

/// Cubic Bernstein form evaluated by de Casteljau.
pub fn bernstein(p: &[Point; 4], u: f64) -> Point {
    let s = 1.0 - u;
    let a = p[0] * s + p[1] * u;
    let b = p[1] * s + p[2] * u;
    let c = p[2] * s + p[3] * u;
    let d = a * s + b * u;
    let e = b * s + c * u;
    d * s + e * u
}

pub fn bernstein_derivative(p: &[Point; 4], u: f64) -> Point {
    let s = 1.0 - u;
    ((p[1] - p[0]) * (s * s) + (p[2] - p[1]) * (2.0 * s * u) + (p[3] - p[2]) * (u * u)) * 3.0
}

pub fn bernstein_second_derivative(p: &[Point; 4], u: f64) -> Point {
    let s = 1.0 - u;
    ((p[2] - p[1] * 2.0 + p[0]) * s + (p[3] - p[2] * 2.0 + p[1]) * u) * 6.0
}

/// Splits a point slice into coordinate vectors, solves each with `solve`,
/// and zips the results back.
fn solve_xy(rhs: &[Point], solve: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<Vec<Point>> {
    let xs: Vec<f64> = rhs.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = rhs.iter().map(|p| p.y).collect();
    let sx = solve(&xs)?;
    let sy = solve(&ys)?;
    Ok(sx.into_iter().zip(sy).map(|(x, y)| Point::new(x, y)).collect())
}

/// Open C² spline with prescribed end derivatives `B_1'(0)` and `B_n'(1)`.
pub fn fit_open_spline(pts: &PointSet) -> Result<BezierSpline> {
    let (c_left, c_right) = match (pts.is_closed(), pts.slopes()) {
        (false, Some(s)) => s,
        _ => return Err(Error::Domain("fit_open_spline requires an open point set with end slopes".into())),
    };
    let c = pts.points();
    let n = c.len() - 1;
    if n == 0 {
        return Err(Error::Size("open spline needs at least one segment".into()));
    }
    let first = c[0] + c_left * (1.0 / 3.0);
    let last_second = c[n] - c_right * (1.0 / 3.0);
    if n == 1 {
        return Ok(BezierSpline { segments: vec![[c[0], first, last_second, c[1]]], closed: false });
    }

    // Unknowns P_{i1}, i = 1..n (stored 0-based). Row 0 pins P_11, the
    // last row encodes the right-end condition, the rest are C² rows.
    let mut lower = vec![1.0; n - 1];
    let mut diag = vec![4.0; n];
    let mut upper = vec![1.0; n - 1];
    let mut rhs = vec![Point::ZERO; n];
    diag[0] = 1.0;
    upper[0] = 0.0;
    rhs[0] = first;
    for i in 2..n {
        rhs[i - 1] = c[i] * 2.0 + c[i - 1] * 4.0;
    }
    lower[n - 2] = 1.0;
    diag[n - 1] = 4.0;
    rhs[n - 1] = c[n - 1] * 4.0 + c[n] - c_right * (1.0 / 3.0);

    let p1 = solve_xy(&rhs, |r| solve_tridiagonal(&lower, &diag, &upper, r))?;
    let mut segments = Vec::with_capacity(n);
    for i in 0..n {
        let p2 = if i + 1 < n { c[i + 1] * 2.0 - p1[i + 1] } else { last_second };
        segments.push([c[i], p1[i], p2, c[i + 1]]);
    }
    Ok(BezierSpline { segments, closed: false })
}

/// Closed C² spline through `C_0..C_n` with a closing segment `C_n -> C_0`.
///
/// The wrap-around C² row combined with the row pinning `P_{(n+1)1}` is
/// row-equivalent to the `[1, 4, 1]` relation applied cyclically, so the
/// system is solved as a circulant tridiagonal one.
pub fn fit_closed_spline(pts: &PointSet) -> Result<BezierSpline> {
    if !pts.is_closed() {
        return Err(Error::Domain("fit_closed_spline requires a closed point set".into()));
    }
    let c = pts.points();
    let m = c.len();
    if m < 3 {
        return Err(Error::Size(format!("closed spline needs at least 3 points, got {m}")));
    }
    // Row k (0-based) is the C² condition at knot C_k:
    // P_{k-1} + 4 P_k + P_{k+1} = 2 C_{k+1} + 4 C_k, indices mod m.
    let rhs: Vec<Point> = (0..m).map(|k| c[(k + 1) % m] * 2.0 + c[k] * 4.0).collect();
    let p1 = solve_xy(&rhs, |r| solve_cyclic_tridiagonal(&vec![1.0; m - 1], &vec![4.0; m], &vec![1.0; m - 1], 1.0, 1.0, r))?;
    let segments = (0..m)
        .map(|i| {
            let end = c[(i + 1) % m];
            [c[i], p1[i], end * 2.0 - p1[(i + 1) % m], end]
        })
        .collect();
    Ok(BezierSpline { segments, closed: true })
}

/// Fits the open or closed seed spline according to the point set's flag.
pub fn fit_spline(pts: &PointSet) -> Result<BezierSpline> {
    if pts.is_closed() {
        fit_closed_spline(pts)
    } else {
        fit_open_spline(pts)
    }
}
