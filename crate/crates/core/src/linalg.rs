//! Direct solvers for the structured linear systems that show up while
//! seeding and correcting curves: tridiagonal, cyclic tridiagonal, banded
//! and cyclic banded.

use crate::error::{Error, Result};

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `lower[i]` is `A[i+1][i]`, `diag[i]` is `A[i][i]` and `upper[i]` is
/// `A[i][i+1]`, so both off-diagonals have length `n - 1`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || lower.len() + 1 != n.max(1) || upper.len() + 1 != n.max(1) {
        return Err(Error::Size(format!(
            "tridiagonal bands {}/{}/{} do not match rhs length {}",
            lower.len(),
            n,
            upper.len(),
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut gamma = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::Singular("zero pivot in row 0".into()));
    }
    x[0] = rhs[0] / beta;
    for i in 1..n {
        gamma[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i - 1] * gamma[i];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Singular(format!("zero pivot in row {i}")));
        }
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= gamma[i + 1] * next;
    }
    Ok(x)
}

/// Solves a cyclic tridiagonal system by a Sherman–Morrison correction of
/// one tridiagonal solve pair.
///
/// `corner_lower` is `A[n-1][0]` and `corner_upper` is `A[0][n-1]`.
pub fn solve_cyclic_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    corner_lower: f64,
    corner_upper: f64,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(Error::Size(format!("cyclic tridiagonal system needs n >= 3, got {n}")));
    }
    if rhs.len() != n || lower.len() + 1 != n || upper.len() + 1 != n {
        return Err(Error::Size("cyclic tridiagonal band lengths do not match rhs".into()));
    }
    let gamma = if diag[0] != 0.0 { -diag[0] } else { 1.0 };
    let mut modified = diag.to_vec();
    modified[0] -= gamma;
    modified[n - 1] -= corner_lower * corner_upper / gamma;

    let x = solve_tridiagonal(lower, &modified, upper, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = corner_lower;
    let z = solve_tridiagonal(lower, &modified, upper, &u)?;

    let v_dot_x = x[0] + corner_upper * x[n - 1] / gamma;
    let v_dot_z = z[0] + corner_upper * z[n - 1] / gamma;
    let denom = 1.0 + v_dot_z;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Singular("Sherman-Morrison denominator vanished".into()));
    }
    let factor = v_dot_x / denom;
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect())
}

/// Solves a dense system by Gaussian elimination with partial pivoting.
/// `a` is row-major `n x n`.
pub fn solve_dense(a: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    if a.len() != n * n {
        return Err(Error::Size(format!("dense matrix has {} entries, expected {}", a.len(), n * n)));
    }
    let mut m = a.to_vec();
    let mut b = rhs.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, m[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= f64::EPSILON * scale * n as f64 || pivot == 0.0 {
            return Err(Error::Singular(format!("pivot {pivot:e} in column {k}")));
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        for i in k + 1..n {
            let f = m[i * n + k] / m[k * n + k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i * n + j] * x[j]).sum();
        x[i] = (b[i] - s) / m[i * n + i];
    }
    Ok(x)
}

/// A square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Storage leaves room for the `kl` extra super-diagonals created by row
/// interchanges during factorization.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku + self.kl
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) && j < self.n {
            self.data[self.index(i, j)]
        } else {
            0.0
        }
    }

    /// Sets an entry inside the declared band.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the declared `kl`/`ku` band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku && j < self.n,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let idx = self.index(i, j);
        self.data[idx] = value;
    }

    /// LU factorization with partial pivoting, in place.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let scale = self.data.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut pivots = vec![0usize; n];
        let mut multipliers = vec![0.0; n * self.kl.max(1)];
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || best <= f64::EPSILON * scale * 1e-3 {
                return Err(Error::Singular(format!("band pivot {best:e} in column {k}")));
            }
            pivots[k] = p;
            let last_col = (k + self.kl + self.ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.index(k, j);
                    let b = self.index(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last_row {
                let f = self.get(i, k) / pivot;
                multipliers[k * self.kl.max(1) + (i - k - 1)] = f;
                if f == 0.0 {
                    continue;
                }
                for j in k..=last_col {
                    let upper = self.data[self.index(k, j)];
                    let idx = self.index(i, j);
                    self.data[idx] -= f * upper;
                }
            }
        }
        Ok(BandLu { matrix: self, pivots, multipliers })
    }
}

/// Factorized band matrix, reusable for several right-hand sides.
#[derive(Clone, Debug)]
pub struct BandLu {
    matrix: BandMatrix,
    pivots: Vec<usize>,
    multipliers: Vec<f64>,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let m = &self.matrix;
        let n = m.n;
        if rhs.len() != n {
            return Err(Error::Size(format!("rhs length {} for band system of size {n}", rhs.len())));
        }
        let stride = m.kl.max(1);
        let mut b = rhs.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let last_row = (k + m.kl).min(n - 1);
            for i in k + 1..=last_row {
                b[i] -= self.multipliers[k * stride + (i - k - 1)] * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let last_col = (i + m.kl + m.ku).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=last_col {
                s -= m.data[m.index(i, j)] * x[j];
            }
            x[i] = s / m.data[m.index(i, i)];
        }
        Ok(x)
    }
}

/// A matrix whose nonzeros lie within `bandwidth` of the diagonal when
/// indices are taken cyclically (modulo `n`).
///
/// Solved as a band matrix plus a low-rank corner correction
/// (Sherman–Morrison–Woodbury).
#[derive(Clone, Debug)]
pub struct CyclicBandMatrix {
    n: usize,
    bandwidth: usize,
    /// `rows[i][d]` holds `A[i][(i + d - bandwidth) mod n]`.
    rows: Vec<Vec<f64>>,
}

impl CyclicBandMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        CyclicBandMatrix { n, bandwidth, rows: vec![vec![0.0; 2 * bandwidth + 1]; n] }
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Sets `A[i][(i + offset) mod n]` for `|offset| <= bandwidth`.
    pub fn set_offset(&mut self, i: usize, offset: isize, value: f64) {
        let b = self.bandwidth as isize;
        assert!(offset.abs() <= b, "offset {offset} outside cyclic band {b}");
        self.rows[i][(offset + b) as usize] = value;
    }

    fn column(&self, i: usize, d: usize) -> usize {
        (i + self.n + d - self.bandwidth) % self.n
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for d in 0..=2 * self.bandwidth {
                a[i * n + self.column(i, d)] += self.rows[i][d];
            }
        }
        a
    }

    /// Solves `A x = b` for each right-hand side in `rhs`.
    pub fn solve_many(&self, rhs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let n = self.n;
        let b = self.bandwidth;
        if n <= 4 * b + 2 {
            let dense = self.to_dense();
            return rhs.iter().map(|r| solve_dense(&dense, r)).collect();
        }
        // Split A = B + U W, where B keeps the entries with |i - j| <= b and
        // the wrapped entries live in the first and last b rows.
        let mut band = BandMatrix::zeros(n, b, b);
        let corner_rows: Vec<usize> = (0..b).chain(n - b..n).collect();
        let mut w = vec![vec![0.0; n]; corner_rows.len()];
        for i in 0..n {
            for d in 0..=2 * b {
                let j = self.column(i, d);
                let v = self.rows[i][d];
                if v == 0.0 {
                    continue;
                }
                if i.abs_diff(j) <= b {
                    band.set(i, j, band.get(i, j) + v);
                } else {
                    let r = corner_rows.iter().position(|&c| c == i).expect("wrapped entry outside corner rows");
                    w[r][j] += v;
                }
            }
        }
        let lu = band.factor()?;
        let rank = corner_rows.len();
        // Z = B^{-1} U, one column per corner row.
        let mut z = Vec::with_capacity(rank);
        for &row in &corner_rows {
            let mut e = vec![0.0; n];
            e[row] = 1.0;
            z.push(lu.solve(&e)?);
        }
        // Capacitance matrix I + W Z.
        let mut cap = vec![0.0; rank * rank];
        for r in 0..rank {
            for c in 0..rank {
                let dot: f64 = w[r].iter().zip(&z[c]).map(|(a, b)| a * b).sum();
                cap[r * rank + c] = dot + if r == c { 1.0 } else { 0.0 };
            }
        }
        rhs.iter()
            .map(|r| {
                let y = lu.solve(r)?;
                let wy: Vec<f64> = w.iter().map(|row| row.iter().zip(&y).map(|(a, b)| a * b).sum()).collect();
                let coef = solve_dense(&cap, &wy)?;
                let mut x = y;
                for (c, zc) in coef.iter().zip(&z) {
                    for (xi, zi) in x.iter_mut().zip(zc) {
                        *xi -= c * zi;
                    }
                }
                Ok(x)
            })
            .collect()
    }
}
