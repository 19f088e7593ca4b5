//! Bandlimited curve fitting through ordered points in the plane.
//!
//! A C² cubic Bézier spline through the points seeds the iteration. Each
//! pass low-pass filters the curve's tangential angle and speed with a
//! Gaussian, rebuilds the curve from them, moves it back onto the data
//! with a rigid motion plus small Gaussian bumps, and stops once both
//! spectra fit the requested coefficient budget.

pub mod bezier;
pub mod constraints;
pub mod driver;
pub mod error;
pub mod io;
pub mod kinematics;
pub mod linalg;
pub mod point;
pub mod render;
pub mod samples;
pub mod spectral;

pub use bezier::{fit_closed_spline, fit_open_spline, fit_spline, BezierSpline, PointSet};
pub use constraints::{apply_perturbations, close_sprime, nearest_parameters, reposition, NearestParams, RigidFix};
pub use driver::{run_continuation, Continuation, FitConfig, FitResult, Thresholds, TruncatedCurve};
pub use error::{Error, Result};
pub use kinematics::{extract_kinematics, reconstruct_curve, CurveEvaluator, CurveState};
pub use point::Point;
pub use spectral::{Basis, ChebyshevSeries, FourierSeries, SpectralSeries};
