//! Chebyshev and Fourier representations on a parameter interval `[0, L]`:
//! fast transforms, spectral differentiation and integration, and Gaussian
//! low-pass filtering.
//!
//! Chebyshev series live on the practical (extrema) nodes mapped from
//! `[-1, 1]` to `[0, L]`. Fourier series use the centered index range
//! `-N/2..N/2` with the `1/N` scaling on the forward transform, so a
//! coefficient is directly the amplitude of `exp(2πikt/L)`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

fn inverse_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// The two spectral bases used for open and closed curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Chebyshev polynomials on `[0, L]` (open curves).
    Chebyshev,
    /// Complex exponentials of period `L` (closed curves).
    Fourier,
}

impl Basis {
    /// Highest frequency index a series on `n` nodes can carry.
    pub fn max_index(self, n: usize) -> usize {
        match self {
            Basis::Chebyshev => n - 1,
            Basis::Fourier => n / 2,
        }
    }
}

/// Type-I discrete cosine transform with half-weighted endpoints:
/// `out[k] = sum''_j v[j] cos(π j k / (n - 1))`.
fn dct1(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    if n == 1 {
        return vec![v[0]];
    }
    let m = 2 * (n - 1);
    let mut buf: Vec<Complex64> = Vec::with_capacity(m);
    buf.extend(v.iter().map(|&x| Complex64::new(x, 0.0)));
    buf.extend(v[1..n - 1].iter().rev().map(|&x| Complex64::new(x, 0.0)));
    forward_plan(m).process(&mut buf);
    buf[..n].iter().map(|c| 0.5 * c.re).collect()
}

// ---------------------------------------------------------------------------
// Chebyshev
// ---------------------------------------------------------------------------

/// Practical Chebyshev nodes `t_j = (1 - cos(jπ/(N-1))) L/2`, ascending,
/// with exact endpoints.
pub fn cheb_nodes(n: usize, length: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Size(format!("Chebyshev grid needs N >= 2, got {n}")));
    }
    let m = (n - 1) as f64;
    let half = 0.5 * length;
    Ok((0..n)
        .map(|j| {
            if j == 0 {
                0.0
            } else if j == n - 1 {
                length
            } else if 2 * j == n - 1 {
                half
            } else {
                // sin form keeps small nodes accurate near t = 0.
                let s = (0.5 * PI * j as f64 / m).sin();
                2.0 * s * s * half
            }
        })
        .collect())
}

/// A Chebyshev expansion `sum_k c_k T_k(2t/L - 1)` on `[0, L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevSeries {
    pub coeffs: Vec<f64>,
    pub length: f64,
}

/// Coefficients that reproduce `values` at the practical nodes exactly
/// (collocation), computed with a fast cosine transform.
pub fn cheb_forward(values: &[f64], length: f64) -> Result<ChebyshevSeries> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Size(format!("Chebyshev transform needs N >= 2, got {n}")));
    }
    let scale = 2.0 / (n - 1) as f64;
    let mut coeffs = dct1(values);
    for (k, c) in coeffs.iter_mut().enumerate() {
        // Nodes run from -1 to 1, so T_k(x_j) = (-1)^k cos(π j k/(N-1)).
        *c *= if k % 2 == 0 { scale } else { -scale };
    }
    coeffs[0] *= 0.5;
    coeffs[n - 1] *= 0.5;
    Ok(ChebyshevSeries { coeffs, length })
}

impl ChebyshevSeries {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Values at the `n` practical nodes of `[0, L]`.
    ///
    /// Coefficients past `n - 1` are folded onto the grid by aliasing
    /// (`T_{n-1+m} = T_{n-1-m}` at these nodes).
    pub fn values_at_nodes(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "need at least two nodes");
        let top = n - 1;
        let mut b = vec![0.0; n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            let period = 2 * top;
            let r = k % period;
            let idx = if r <= top { r } else { period - r };
            b[idx] += c;
        }
        for (k, v) in b.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
            if k == 0 || k == top {
                *v *= 2.0;
            }
        }
        dct1(&b)
    }

    /// Clenshaw summation at one parameter in `[0, L]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.length.abs().max(1.0);
        if !(t >= -slack && t <= self.length + slack) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.length)));
        }
        let x = (2.0 * t / self.length - 1.0).clamp(-1.0, 1.0);
        Ok(clenshaw(&self.coeffs, x))
    }

    /// Values at arbitrary parameters.
    pub fn eval_many(&self, ts: &[f64]) -> Result<Vec<f64>> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }

    /// Series of `d/dt`, including the `2/L` chain-rule factor.
    pub fn differentiate(&self) -> ChebyshevSeries {
        let n = self.coeffs.len();
        let mut d = vec![0.0; n];
        if n >= 2 {
            let c = &self.coeffs;
            for k in (1..n).rev() {
                let above = if k + 1 < n { d[k + 1] } else { 0.0 };
                d[k - 1] = above + 2.0 * k as f64 * c[k];
            }
            d[0] *= 0.5;
        }
        let s = 2.0 / self.length;
        d.iter_mut().for_each(|v| *v *= s);
        ChebyshevSeries { coeffs: d, length: self.length }
    }

    /// Series (one term longer) of `t -> ∫_0^t f`, including the `L/2`
    /// factor; it vanishes at `t = 0`.
    pub fn integrate(&self) -> ChebyshevSeries {
        let n = self.coeffs.len();
        let c = |k: usize| -> f64 {
            if k < n {
                self.coeffs[k]
            } else {
                0.0
            }
        };
        let mut out = vec![0.0; n + 1];
        for k in 1..=n {
            let prev = if k == 1 { 2.0 * c(0) } else { c(k - 1) };
            out[k] = (prev - c(k + 1)) / (2.0 * k as f64);
        }
        // Fix the constant so the antiderivative is zero at x = -1.
        let at_left: f64 = out.iter().enumerate().skip(1).map(|(k, v)| if k % 2 == 0 { *v } else { -*v }).sum();
        out[0] = -at_left;
        let s = 0.5 * self.length;
        out.iter_mut().for_each(|v| *v *= s);
        ChebyshevSeries { coeffs: out, length: self.length }
    }

    /// Multiply coefficient `k` by `gaussian_gain(k, a)`.
    pub fn filter(&self, a: f64) -> ChebyshevSeries {
        let coeffs = self.coeffs.iter().enumerate().map(|(k, c)| c * gaussian_gain(k as f64, a)).collect();
        ChebyshevSeries { coeffs, length: self.length }
    }

    /// First `count` coefficients.
    pub fn truncated(&self, count: usize) -> ChebyshevSeries {
        ChebyshevSeries { coeffs: self.coeffs.iter().take(count).copied().collect(), length: self.length }
    }
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Inverse transform evaluated at arbitrary query parameters.
pub fn cheb_inverse(series: &ChebyshevSeries, ts: &[f64]) -> Result<Vec<f64>> {
    series.eval_many(ts)
}

pub fn cheb_differentiate(series: &ChebyshevSeries) -> ChebyshevSeries {
    series.differentiate()
}

pub fn cheb_integrate(series: &ChebyshevSeries) -> ChebyshevSeries {
    series.integrate()
}

pub fn filter_chebyshev(series: &ChebyshevSeries, a: f64) -> ChebyshevSeries {
    series.filter(a)
}

/// Clenshaw–Curtis quadrature weights for the practical nodes of `[0, L]`.
pub fn clenshaw_curtis_weights(n: usize, length: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Size(format!("quadrature needs N >= 2, got {n}")));
    }
    let m = n - 1;
    if m == 1 {
        return Ok(vec![0.5 * length, 0.5 * length]);
    }
    // w_k = (c_k/m) sum'' over even j of moment_j cos(π j k/m) with
    // moment_j = 2/(1 - j^2); the half weights are folded into dct1.
    let mut moments = vec![0.0; n];
    for j in (0..=m).step_by(2) {
        moments[j] = 2.0 / (1.0 - (j * j) as f64);
    }
    let sums = dct1(&moments);
    let mut w: Vec<f64> = sums.iter().map(|s| 2.0 * s / m as f64).collect();
    w[0] *= 0.5;
    w[m] *= 0.5;
    let half = 0.5 * length;
    w.iter_mut().for_each(|v| *v *= half);
    Ok(w)
}

// ---------------------------------------------------------------------------
// Fourier
// ---------------------------------------------------------------------------

/// Equispaced nodes `t_j = jL/N`, `j = 0..N-1`.
pub fn fourier_nodes(n: usize, length: f64) -> Vec<f64> {
    (0..n).map(|j| length * j as f64 / n as f64).collect()
}

/// Centered Fourier series on the circle of circumference `L`:
/// `f(t) = sum_{k=-N/2}^{N/2-1} c_k exp(2πikt/L)`.
///
/// `coeffs[i]` holds the coefficient of index `k = i - N/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    pub coeffs: Vec<Complex64>,
    pub length: f64,
}

pub fn fourier_forward(values: &[f64], length: f64) -> Result<FourierSeries> {
    let buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fourier_forward_complex(buf, length)
}

pub fn fourier_forward_complex(mut values: Vec<Complex64>, length: f64) -> Result<FourierSeries> {
    let n = values.len();
    if n == 0 || n % 2 != 0 {
        return Err(Error::Size(format!("Fourier transform needs an even, positive N, got {n}")));
    }
    forward_plan(n).process(&mut values);
    let inv = 1.0 / n as f64;
    // Standard order is 0..N-1; rotate so index 0 holds k = -N/2.
    values.rotate_right(n / 2);
    values.iter_mut().for_each(|v| *v *= inv);
    Ok(FourierSeries { coeffs: values, length })
}

impl FourierSeries {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Centered indices `-N/2..N/2` in storage order.
    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let half = (self.coeffs.len() / 2) as i64;
        (0..self.coeffs.len() as i64).map(move |i| i - half)
    }

    /// Coefficient of index `k`, zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let half = (self.coeffs.len() / 2) as i64;
        let i = k + half;
        if i < 0 || i >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[i as usize]
        }
    }

    /// Values at the `N` equispaced nodes.
    pub fn inverse(&self) -> Vec<Complex64> {
        let n = self.coeffs.len();
        let mut buf = self.coeffs.clone();
        buf.rotate_left(n / 2);
        inverse_plan(n).process(&mut buf);
        buf
    }

    /// Real parts of the nodal values.
    pub fn inverse_real(&self) -> Vec<f64> {
        self.inverse().into_iter().map(|c| c.re).collect()
    }

    /// Direct summation at one parameter.
    pub fn eval(&self, t: f64) -> Complex64 {
        let w = 2.0 * PI * t / self.length;
        let half = (self.coeffs.len() / 2) as f64;
        // Start from exp(-i N/2 w) and step by exp(i w).
        let step = Complex64::from_polar(1.0, w);
        let mut phase = Complex64::from_polar(1.0, -half * w);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            if i % 64 == 0 {
                phase = Complex64::from_polar(1.0, (i as f64 - half) * w);
            }
            acc += c * phase;
            phase *= step;
        }
        acc
    }

    pub fn eval_real(&self, t: f64) -> f64 {
        self.eval(t).re
    }

    /// Multiply index `k` by `2πik/L`.
    pub fn differentiate(&self) -> FourierSeries {
        let s = 2.0 * PI / self.length;
        let coeffs = self.indices().zip(&self.coeffs).map(|(k, c)| c * Complex64::new(0.0, s * k as f64)).collect();
        FourierSeries { coeffs, length: self.length }
    }

    /// Antiderivative vanishing at `t = 0`. The mean coefficient must be
    /// zero to within `1e-10 * max|c_k|`.
    pub fn integrate(&self) -> Result<FourierSeries> {
        let max = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()));
        let mean = self.coeff(0).norm();
        let tol = 1e-10 * max;
        if mean > tol {
            return Err(Error::NonPeriodicIntegrand { mean, tol });
        }
        let s = self.length / (2.0 * PI);
        let mut coeffs: Vec<Complex64> = self
            .indices()
            .zip(&self.coeffs)
            .map(|(k, c)| if k == 0 { Complex64::new(0.0, 0.0) } else { c * Complex64::new(0.0, -s / k as f64) })
            .collect();
        let total: Complex64 = coeffs.iter().sum();
        let zero = self.coeffs.len() / 2;
        coeffs[zero] = -total;
        Ok(FourierSeries { coeffs, length: self.length })
    }

    /// Multiply index `k` by `gaussian_gain(k, a)`.
    pub fn filter(&self, a: f64) -> FourierSeries {
        let coeffs = self.indices().zip(&self.coeffs).map(|(k, c)| c * gaussian_gain(k as f64, a)).collect();
        FourierSeries { coeffs, length: self.length }
    }
}

pub fn fourier_inverse(series: &FourierSeries) -> Vec<Complex64> {
    series.inverse()
}

pub fn fourier_differentiate(series: &FourierSeries) -> FourierSeries {
    series.differentiate()
}

pub fn fourier_integrate(series: &FourierSeries) -> Result<FourierSeries> {
    series.integrate()
}

pub fn filter_fourier(series: &FourierSeries, a: f64) -> FourierSeries {
    series.filter(a)
}

/// Gaussian filter gain `exp(-π k²/a²)`.
#[inline]
pub fn gaussian_gain(k: f64, a: f64) -> f64 {
    (-PI * k * k / (a * a)).exp()
}

/// A series in either basis.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralSeries {
    Chebyshev(ChebyshevSeries),
    Fourier(FourierSeries),
}

impl SpectralSeries {
    /// Forward transform of real nodal values in the given basis.
    pub fn forward(basis: Basis, values: &[f64], length: f64) -> Result<Self> {
        Ok(match basis {
            Basis::Chebyshev => SpectralSeries::Chebyshev(cheb_forward(values, length)?),
            Basis::Fourier => SpectralSeries::Fourier(fourier_forward(values, length)?),
        })
    }

    pub fn basis(&self) -> Basis {
        match self {
            SpectralSeries::Chebyshev(_) => Basis::Chebyshev,
            SpectralSeries::Fourier(_) => Basis::Fourier,
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            SpectralSeries::Chebyshev(s) => s.length,
            SpectralSeries::Fourier(s) => s.length,
        }
    }

    /// Real nodal values on the basis's own `n`-point grid.
    pub fn values_at_nodes(&self, n: usize) -> Vec<f64> {
        match self {
            SpectralSeries::Chebyshev(s) => s.values_at_nodes(n),
            SpectralSeries::Fourier(s) => {
                debug_assert_eq!(s.len(), n);
                s.inverse_real()
            }
        }
    }

    /// Real value at an arbitrary parameter (wrapped for Fourier).
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            SpectralSeries::Chebyshev(s) => s.eval(t),
            SpectralSeries::Fourier(s) => Ok(s.eval_real(t)),
        }
    }

    pub fn differentiate(&self) -> SpectralSeries {
        match self {
            SpectralSeries::Chebyshev(s) => SpectralSeries::Chebyshev(s.differentiate()),
            SpectralSeries::Fourier(s) => SpectralSeries::Fourier(s.differentiate()),
        }
    }

    pub fn integrate(&self) -> Result<SpectralSeries> {
        Ok(match self {
            SpectralSeries::Chebyshev(s) => SpectralSeries::Chebyshev(s.integrate()),
            SpectralSeries::Fourier(s) => SpectralSeries::Fourier(s.integrate()?),
        })
    }

    pub fn filter(&self, a: f64) -> SpectralSeries {
        match self {
            SpectralSeries::Chebyshev(s) => SpectralSeries::Chebyshev(s.filter(a)),
            SpectralSeries::Fourier(s) => SpectralSeries::Fourier(s.filter(a)),
        }
    }

    /// `(frequency index, magnitude)` for every stored coefficient;
    /// Fourier indices are reported as `|k|`.
    pub fn magnitudes(&self) -> Vec<(usize, f64)> {
        match self {
            SpectralSeries::Chebyshev(s) => s.coeffs.iter().enumerate().map(|(k, c)| (k, c.abs())).collect(),
            SpectralSeries::Fourier(s) => s.indices().zip(&s.coeffs).map(|(k, c)| (k.unsigned_abs() as usize, c.norm())).collect(),
        }
    }

    /// Number of coefficients whose magnitude exceeds `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.magnitudes().iter().filter(|(_, m)| *m > threshold).count()
    }

    /// Largest frequency index whose magnitude exceeds `threshold`.
    pub fn last_index_above(&self, threshold: f64) -> Option<usize> {
        self.magnitudes().iter().filter(|(_, m)| *m > threshold).map(|(k, _)| *k).max()
    }
}
