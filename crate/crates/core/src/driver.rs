//! The outer continuation loop: filter a little, repair, repeat until the
//! spectra of θ and s′ fit the requested coefficient budget.

use std::f64::consts::PI;
use std::time::Instant;

use crate::bezier::{fit_spline, PointSet};
use crate::constraints::{apply_perturbations, close_sprime, nearest_parameters, reposition, NearestParams};
use crate::error::{Error, Result};
use crate::kinematics::{
    closure_gap, discretize_spline, extract_kinematics, reconstruct_curve, retrend_theta, CurveEvaluator, CurveState,
};
use crate::point::Point;
use crate::spectral::{clenshaw_curtis_weights, Basis, ChebyshevSeries, SpectralSeries};

/// Parameters of a fit. Whether the curve is open or closed, and its end
/// slopes, come from the [`PointSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    /// Number of discretization nodes `N`.
    pub n_nodes: usize,
    pub n_iters: usize,
    /// Fraction of the surviving spectrum pushed below `eps` per iteration.
    pub h_filter: f64,
    pub eps: f64,
    pub n_coefs: usize,
    pub n_bands: usize,
}

impl FitConfig {
    pub fn validate(&self, closed: bool) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.h_filter > 0.0 && self.h_filter < 1.0) {
            return bad(format!("h_filter must lie in (0, 1), got {}", self.h_filter));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if self.n_coefs < 4 || self.n_coefs > self.n_nodes {
            return bad(format!("n_coefs must lie in [4, N = {}], got {}", self.n_nodes, self.n_coefs));
        }
        if self.n_bands < 1 {
            return bad("n_bands must be at least 1".into());
        }
        if self.n_iters < 1 {
            return bad("n_iters must be at least 1".into());
        }
        if closed && self.n_nodes % 2 != 0 {
            return bad(format!("closed curves need an even N, got {}", self.n_nodes));
        }
        Ok(())
    }
}

/// Coefficient thresholds and the counts allowed above them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub delta_theta: f64,
    pub delta_sprime: f64,
    pub budget_theta: usize,
    pub budget_sprime: usize,
}

/// `(δ_θ, δ_s′)` from the samples of `state`.
pub fn compute_thresholds(state: &CurveState, eps: f64) -> Result<(f64, f64)> {
    let n = state.len();
    let (xs, ys) = state.coordinate_series()?;
    let dx = xs.differentiate().values_at_nodes(n);
    let dy = ys.differentiate().values_at_nodes(n);
    let (factor, weights) = match state.basis {
        Basis::Chebyshev => ((n as f64).powf(1.5), clenshaw_curtis_weights(n, state.length)?),
        Basis::Fourier => (n as f64, vec![state.length / n as f64; n]),
    };
    let norm2: f64 = state.x.iter().zip(&state.y).zip(&weights).map(|((x, y), w)| (x * x + y * y) * w).sum();
    let delta_sprime = eps * factor * norm2.sqrt();
    let min_tangent = dx
        .iter()
        .zip(&dy)
        .zip(&weights)
        .map(|((a, b), w)| (a * a * w + b * b * w).sqrt())
        .fold(f64::INFINITY, f64::min);
    if !(min_tangent > 0.0) || !min_tangent.is_finite() {
        return Err(Error::SingularParametrization(format!("minimum weighted tangent norm is {min_tangent:e}")));
    }
    Ok((delta_sprime / min_tangent, delta_sprime))
}

/// `ceil(n_coefs · ln(1/δ) / ln(1/ε))`.
pub fn coef_budget(n_coefs: usize, eps: f64, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("threshold must lie in (0, 1), got {delta:e}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps:e}")));
    }
    let exact = n_coefs as f64 * (1.0 / delta).ln() / (1.0 / eps).ln();
    Ok((exact - 1e-9 * exact.max(1.0)).ceil().max(0.0) as usize)
}

/// Gaussian bandwidth for iteration `m` (1-based): the gain at the cutoff
/// `K (1 - h)^m` equals `eps`.
pub fn filter_bandwidth(m: usize, basis: Basis, n_nodes: usize, h_filter: f64, eps: f64) -> f64 {
    let k_top = basis.max_index(n_nodes) as f64;
    let cutoff = k_top * (1.0 - h_filter).powi(m as i32);
    cutoff * (PI / (1.0 / eps).ln()).sqrt()
}

/// Counts of θ and s′ coefficients above their thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerminationCheck {
    pub count_theta: usize,
    pub count_sprime: usize,
    pub last_theta: Option<usize>,
    pub last_sprime: Option<usize>,
    pub done: bool,
}

pub fn check_termination(theta: &SpectralSeries, sprime: &SpectralSeries, thresholds: &Thresholds) -> TerminationCheck {
    let count_theta = theta.count_above(thresholds.delta_theta);
    let count_sprime = sprime.count_above(thresholds.delta_sprime);
    TerminationCheck {
        count_theta,
        count_sprime,
        last_theta: theta.last_index_above(thresholds.delta_theta),
        last_sprime: sprime.last_index_above(thresholds.delta_sprime),
        done: count_theta <= thresholds.budget_theta && count_sprime <= thresholds.budget_sprime,
    }
}

/// A curve kept to its first `n_coefs` coefficients.
///
/// Chebyshev: `x(t) = Σ_k x[k] T_k(2t/L - 1)`. Fourier: real layout
/// `[a_0, a_1, b_1, a_2, b_2, ...]` for
/// `x(t) = a_0 + Σ_k a_k cos(2πkt/L) + b_k sin(2πkt/L)`; an even count ends
/// with a cosine term.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedCurve {
    pub basis: Basis,
    pub length: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TruncatedCurve {
    /// Truncates the interpolating series of `state`.
    pub fn from_state(state: &CurveState, n_coefs: usize) -> Result<Self> {
        let (xs, ys) = state.coordinate_series()?;
        Ok(TruncatedCurve {
            basis: state.basis,
            length: state.length,
            x: truncate_series(&xs, n_coefs),
            y: truncate_series(&ys, n_coefs),
        })
    }

    pub fn n_coefs(&self) -> usize {
        self.x.len()
    }

    pub fn eval(&self, t: f64) -> Result<Point> {
        Ok(Point::new(eval_coeffs(self.basis, self.length, &self.x, t)?, eval_coeffs(self.basis, self.length, &self.y, t)?))
    }

    pub fn eval_many(&self, ts: &[f64]) -> Result<Vec<Point>> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }

    /// `(frequency index, magnitude)` of the x and y coefficients; a
    /// Fourier cosine/sine pair counts as one entry.
    pub fn magnitudes(&self) -> Vec<(usize, f64, f64)> {
        match self.basis {
            Basis::Chebyshev => {
                self.x.iter().zip(&self.y).enumerate().map(|(k, (a, b))| (k, a.abs(), b.abs())).collect()
            }
            Basis::Fourier => {
                let pair = |c: &[f64], k: usize| -> f64 {
                    if k == 0 {
                        c[0].abs()
                    } else {
                        let a = c[2 * k - 1];
                        let b = c.get(2 * k).copied().unwrap_or(0.0);
                        a.hypot(b)
                    }
                };
                (0..=self.x.len() / 2).map(|k| (k, pair(&self.x, k), pair(&self.y, k))).collect()
            }
        }
    }
}

fn truncate_series(series: &SpectralSeries, n_coefs: usize) -> Vec<f64> {
    match series {
        SpectralSeries::Chebyshev(s) => s.truncated(n_coefs).coeffs,
        SpectralSeries::Fourier(s) => {
            let half = (s.len() / 2) as i64;
            let mut out = Vec::with_capacity(n_coefs);
            out.push(s.coeff(0).re);
            let mut k = 1i64;
            while out.len() < n_coefs {
                let c = s.coeff(k);
                // The k = -N/2 slot holds the whole Nyquist term.
                let (a, b) = if k == half { (s.coeff(-half).re, 0.0) } else { (2.0 * c.re, -2.0 * c.im) };
                out.push(a);
                if out.len() < n_coefs {
                    out.push(b);
                }
                k += 1;
            }
            out
        }
    }
}

fn eval_coeffs(basis: Basis, length: f64, c: &[f64], t: f64) -> Result<f64> {
    match basis {
        Basis::Chebyshev => ChebyshevSeries { coeffs: c.to_vec(), length }.eval(t),
        Basis::Fourier => {
            let w = 2.0 * PI * t / length;
            let mut sum = c[0];
            for (i, pair) in c[1..].chunks(2).enumerate() {
                let (s, co) = ((i + 1) as f64 * w).sin_cos();
                sum += pair[0] * co;
                if let Some(b) = pair.get(1) {
                    sum += b * s;
                }
            }
            Ok(sum)
        }
    }
}

/// What happened in one pass of the loop.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub bandwidth: f64,
    pub count_theta: usize,
    pub count_sprime: usize,
    pub last_theta: Option<usize>,
    pub last_sprime: Option<usize>,
    /// `L |mean(s′ cos θ), mean(s′ sin θ)|` after closing (closed curves).
    pub closure_gap: Option<f64>,
    pub rotation: f64,
    /// Largest perturbation coefficient.
    pub max_correction: f64,
    /// `max_i |curve(t̃_i) - C_i|` at the end of the pass.
    pub interpolation_residual: f64,
    pub seconds: f64,
}

/// Outcome of a fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub curve: TruncatedCurve,
    /// Iteration at which the budget test passed, or `n_iters` if it never did.
    pub n_stop: usize,
    pub converged: bool,
    pub e_samp: f64,
    pub decay_theta: Option<usize>,
    pub decay_sprime: Option<usize>,
    pub count_theta: usize,
    pub count_sprime: usize,
    pub thresholds: Thresholds,
    pub tpar: Vec<f64>,
    pub config: FitConfig,
    pub history: Vec<IterationRecord>,
    /// Samples of the curve before truncation.
    pub state: CurveState,
}

/// `max_i |curve(t̃_i) - C_i|`.
pub fn residual_at_samples(curve: &TruncatedCurve, pts: &PointSet, nearest: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (&t, &c) in nearest.iter().zip(pts.points()) {
        worst = worst.max((curve.eval(t)? - c).hypot());
    }
    Ok(worst)
}

/// Largest distance between the interpolant of `state` at `t̃_i` and `C_i`.
pub fn interpolation_residual(state: &CurveState, nearest: &NearestParams, pts: &PointSet) -> Result<f64> {
    let eval = CurveEvaluator::new(state)?;
    let mut worst = 0.0f64;
    for (&t, &c) in nearest.tpar.iter().zip(pts.points()) {
        worst = worst.max((eval.point(t)? - c).hypot());
    }
    Ok(worst)
}

/// Result of [`Continuation::step`].
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Converged(TerminationCheck),
    Filtered(IterationRecord),
}

/// The continuation loop, one iteration per [`Continuation::step`].
#[derive(Clone, Debug)]
pub struct Continuation {
    cfg: FitConfig,
    pts: PointSet,
    nearest: NearestParams,
    thresholds: Thresholds,
    state: CurveState,
    iteration: usize,
    last_check: Option<TerminationCheck>,
    converged: bool,
    history: Vec<IterationRecord>,
}

impl Continuation {
    /// Seeds the loop with the C² Bézier spline through `pts`.
    pub fn new(pts: &PointSet, cfg: &FitConfig) -> Result<Self> {
        cfg.validate(pts.is_closed())?;
        let spline = fit_spline(pts)?;
        let state = discretize_spline(&spline, cfg.n_nodes)?;
        let state = extract_kinematics(&state)?;
        let nearest = nearest_parameters(&spline, &state, pts, cfg.n_bands, cfg.eps)?;
        Continuation::start(state, nearest, pts, cfg)
    }

    /// Seeds the loop with given samples instead of a spline.
    pub fn from_state(state: CurveState, pts: &PointSet, cfg: &FitConfig) -> Result<Self> {
        cfg.validate(pts.is_closed())?;
        if state.is_closed() != pts.is_closed() {
            return Err(Error::Config("state and point set disagree on closedness".into()));
        }
        if state.len() != cfg.n_nodes {
            return Err(Error::Config(format!("state has {} nodes, config asks for {}", state.len(), cfg.n_nodes)));
        }
        let state = extract_kinematics(&state)?;
        let eval = CurveEvaluator::new(&state)?;
        let nearest = nearest_parameters(&eval, &state, pts, cfg.n_bands, cfg.eps)?;
        Continuation::start(state, nearest, pts, cfg)
    }

    fn start(state: CurveState, nearest: NearestParams, pts: &PointSet, cfg: &FitConfig) -> Result<Self> {
        let (delta_theta, delta_sprime) = compute_thresholds(&state, cfg.eps)?;
        let thresholds = Thresholds {
            delta_theta,
            delta_sprime,
            budget_theta: coef_budget(cfg.n_coefs, cfg.eps, delta_theta)?,
            budget_sprime: coef_budget(cfg.n_coefs, cfg.eps, delta_sprime)?,
        };
        Ok(Continuation {
            cfg: cfg.clone(),
            pts: pts.clone(),
            nearest,
            thresholds,
            state,
            iteration: 0,
            last_check: None,
            converged: false,
            history: Vec::new(),
        })
    }

    pub fn state(&self) -> &CurveState {
        &self.state
    }

    pub fn nearest(&self) -> &NearestParams {
        &self.nearest
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_converged(&self) -> bool {
        self.converged
    }

    /// Spectra of the (detrended) θ and of s′ for the current state.
    pub fn spectra(&self) -> Result<(SpectralSeries, SpectralSeries)> {
        let theta = SpectralSeries::forward(self.state.basis, &self.state.detrended_theta(), self.state.length)?;
        let sprime = SpectralSeries::forward(self.state.basis, &self.state.sprime, self.state.length)?;
        Ok((theta, sprime))
    }

    /// Runs one iteration: the budget test, then (if it fails) filtering,
    /// closing, reconstruction, repositioning and perturbation.
    pub fn step(&mut self) -> Result<Step> {
        if self.converged {
            return Ok(Step::Converged(self.last_check.expect("converged runs have a check")));
        }
        let started = Instant::now();
        let m = self.iteration + 1;
        let (theta_hat, sprime_hat) = self.spectra()?;
        let check = check_termination(&theta_hat, &sprime_hat, &self.thresholds);
        self.last_check = Some(check);
        self.iteration = m;
        if check.done {
            self.converged = true;
            return Ok(Step::Converged(check));
        }

        let state = &self.state;
        let n = state.len();
        let a = filter_bandwidth(m, state.basis, n, self.cfg.h_filter, self.cfg.eps);
        let mut theta = theta_hat.filter(a).values_at_nodes(n);
        if state.is_closed() {
            theta = retrend_theta(&theta, &state.nodes, state.winding, state.length);
        }
        let mut sprime = sprime_hat.filter(a).values_at_nodes(n);
        let mut gap = None;
        if state.is_closed() {
            sprime = close_sprime(&theta, &sprime)?;
            gap = Some(closure_gap(&theta, &sprime, state.length));
        }
        let filtered = CurveState { theta, sprime, ..state.clone() };
        let rebuilt = reconstruct_curve(&filtered)?;
        let (fix, moved) = reposition(&rebuilt, &self.nearest, &self.pts)?;
        let (perturbed, corr) = apply_perturbations(&moved, &self.nearest, &self.pts)?;
        let next = extract_kinematics(&perturbed)?;
        let residual = interpolation_residual(&next, &self.nearest, &self.pts)?;
        self.state = next;

        let record = IterationRecord {
            iteration: m,
            bandwidth: a,
            count_theta: check.count_theta,
            count_sprime: check.count_sprime,
            last_theta: check.last_theta,
            last_sprime: check.last_sprime,
            closure_gap: gap,
            rotation: fix.psi,
            max_correction: corr.cx.iter().chain(&corr.cy).fold(0.0f64, |m, c| m.max(c.abs())),
            interpolation_residual: residual,
            seconds: started.elapsed().as_secs_f64(),
        };
        self.history.push(record.clone());
        Ok(Step::Filtered(record))
    }

    /// Truncates the current curve and measures its error at the data.
    pub fn finish(self) -> Result<FitResult> {
        let curve = TruncatedCurve::from_state(&self.state, self.cfg.n_coefs)?;
        let e_samp = residual_at_samples(&curve, &self.pts, &self.nearest.tpar)?;
        let check = match self.last_check {
            Some(c) if self.converged => c,
            _ => {
                let (theta, sprime) = self.spectra()?;
                check_termination(&theta, &sprime, &self.thresholds)
            }
        };
        Ok(FitResult {
            curve,
            n_stop: self.iteration,
            converged: self.converged,
            e_samp,
            decay_theta: check.last_theta,
            decay_sprime: check.last_sprime,
            count_theta: check.count_theta,
            count_sprime: check.count_sprime,
            thresholds: self.thresholds,
            tpar: self.nearest.tpar,
            config: self.cfg,
            history: self.history,
            state: self.state,
        })
    }

    /// Steps until the budget test passes or `n_iters` is used up.
    pub fn run(mut self) -> Result<FitResult> {
        while self.iteration < self.cfg.n_iters && !self.converged {
            self.step()?;
        }
        self.finish()
    }
}

/// Fits a bandlimited curve through `pts` (which should already be
/// normalized). Non-convergence is reported through
/// [`FitResult::converged`], not as an error.
pub fn run_continuation(pts: &PointSet, cfg: &FitConfig) -> Result<FitResult> {
    Continuation::new(pts, cfg)?.run()
}
