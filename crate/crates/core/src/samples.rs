//! Point sets sampled from the analytic test curves.

use std::f64::consts::{LN_2, PI};

use crate::bezier::PointSet;
use crate::error::Result;
use crate::point::Point;

/// Logarithmic spiral `φ(t) = 6π ln t / ln 2`, `r = φ`, sampled at
/// `t_i = 1 + i/n`, `i = 0..=n` (so `n + 1` points), with the given slopes.
pub fn spiral(n: usize, slope_left: Point, slope_right: Point) -> Result<PointSet> {
    let pts = (0..=n)
        .map(|i| {
            let t = 1.0 + i as f64 / n as f64;
            let phi = 6.0 * PI / LN_2 * t.ln();
            Point::new(phi * phi.cos(), phi * phi.sin())
        })
        .collect();
    PointSet::open(pts, slope_left, slope_right)
}

/// Flower `r = 1 + cos(18φ) sin(4φ)/α`, `φ = 2πt`, sampled at
/// `t_i = i/n`, `i = 0..n` (`n` points, the last one not repeating the first).
pub fn flower(alpha: f64, n: usize) -> Result<PointSet> {
    let pts = (0..n)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / n as f64;
            let r = 1.0 + (18.0 * phi).cos() * (4.0 * phi).sin() / alpha;
            Point::new(r * phi.cos(), r * phi.sin())
        })
        .collect();
    PointSet::closed(pts)
}

/// `n` equispaced points on the circle of radius `r` about the origin.
pub fn circle(r: f64, n: usize) -> Result<PointSet> {
    let pts = (0..n)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / n as f64;
            Point::new(r * phi.cos(), r * phi.sin())
        })
        .collect();
    PointSet::closed(pts)
}
