mod common;

use std::f64::consts::PI;

use bandfit::spectral::{
    cheb_differentiate, cheb_forward, cheb_integrate, cheb_inverse, cheb_nodes, clenshaw_curtis_weights,
    filter_chebyshev, filter_fourier, fourier_differentiate, fourier_forward, fourier_forward_complex,
    fourier_integrate, fourier_inverse, fourier_nodes, gaussian_gain,
};
use bandfit::{ChebyshevSeries, Error, FourierSeries};
use common::{cheb_t, dense_solve, max_abs, max_abs_diff, rng, simpson};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn random_vec(seed: u64, n: usize) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

fn direct_dft(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let half = (n / 2) as i64;
    (-half..half)
        .map(|k| {
            values
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * j as i64) as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

fn direct_cheb_eval(c: &[f64], t: f64, length: f64) -> f64 {
    let x = 2.0 * t / length - 1.0;
    c.iter().enumerate().map(|(k, ck)| ck * cheb_t(k, x)).sum()
}

#[test]
fn cheb_nodes_match_direct_formula() {
    let t = cheb_nodes(5, 1.0).unwrap();
    for (j, tj) in t.iter().enumerate() {
        assert!((tj - 0.5 * (1.0 - (j as f64 * PI / 4.0).cos())).abs() <= 1e-16);
    }
    let t = cheb_nodes(101, 3.0).unwrap();
    assert_eq!((t[0], t[100]), (0.0, 3.0));
    assert!(t.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn cheb_forward_matches_collocation_solve() {
    let n = 8;
    let v = random_vec(10, n);
    let length = 1.7;
    let nodes = cheb_nodes(n, length).unwrap();
    let mut a = vec![0.0; n * n];
    for (j, t) in nodes.iter().enumerate() {
        for k in 0..n {
            a[j * n + k] = cheb_t(k, 2.0 * t / length - 1.0);
        }
    }
    let oracle = dense_solve(&a, &v);
    let c = cheb_forward(&v, length).unwrap();
    assert!(max_abs_diff(&c.coeffs, &oracle) <= 1e-13 * max_abs(&oracle));
}

#[test]
fn cheb_collocation_identity_at_nodes() {
    for n in [2usize, 3, 17, 200] {
        let v = random_vec(11 + n as u64, n);
        let c = cheb_forward(&v, 2.5).unwrap();
        let nodes = cheb_nodes(n, 2.5).unwrap();
        let back: Vec<f64> = nodes.iter().map(|&t| direct_cheb_eval(&c.coeffs, t, 2.5)).collect();
        assert!(max_abs_diff(&back, &v) <= 1e-13 * max_abs(&v) * (n as f64).max(10.0) / 10.0, "n = {n}");
    }
}

#[test]
fn cheb_inverse_examples() {
    let nodes = cheb_nodes(9, 3.0).unwrap();
    let mut coeffs = vec![0.0; 9];
    coeffs[1] = 1.0;
    let s = ChebyshevSeries { coeffs, length: 3.0 };
    let vals = cheb_inverse(&s, &nodes).unwrap();
    for (t, v) in nodes.iter().zip(&vals) {
        assert!((v - (2.0 * t / 3.0 - 1.0)).abs() <= 1e-15);
    }
    let zero = ChebyshevSeries { coeffs: vec![0.0; 5], length: 1.0 };
    assert!(cheb_inverse(&zero, &[0.0, 0.3, 1.0]).unwrap().iter().all(|v| *v == 0.0));
    assert!(matches!(cheb_inverse(&zero, &[1.5]), Err(Error::Domain(_))));
    assert!(matches!(cheb_inverse(&zero, &[-0.1]), Err(Error::Domain(_))));
}

#[test]
fn cheb_inverse_matches_direct_cosine_sum() {
    let c = random_vec(12, 40);
    let s = ChebyshevSeries { coeffs: c.clone(), length: 4.0 };
    let mut r = rng(13);
    for _ in 0..50 {
        let t = r.gen_range(0.0..4.0);
        let direct = direct_cheb_eval(&c, t, 4.0);
        assert!((cheb_inverse(&s, &[t]).unwrap()[0] - direct).abs() <= 1e-13 * max_abs(&c) * 10.0);
    }
}

#[test]
fn cheb_differentiate_examples() {
    let mut coeffs = vec![0.0; 5];
    coeffs[2] = 1.0;
    let d = cheb_differentiate(&ChebyshevSeries { coeffs, length: 2.0 });
    assert_eq!(d.coeffs, vec![0.0, 4.0, 0.0, 0.0, 0.0]);
    let d = cheb_differentiate(&ChebyshevSeries { coeffs: vec![2.5, 0.0, 0.0], length: 7.0 });
    assert!(d.coeffs.iter().all(|v| *v == 0.0));
}

#[test]
fn cheb_derivative_of_sin() {
    let n = 64;
    let length = 2.0 * PI;
    let nodes = cheb_nodes(n, length).unwrap();
    let v: Vec<f64> = nodes.iter().map(|t| t.sin()).collect();
    let d = cheb_differentiate(&cheb_forward(&v, length).unwrap());
    let got = d.values_at_nodes(n);
    let want: Vec<f64> = nodes.iter().map(|t| t.cos()).collect();
    assert!(max_abs_diff(&got, &want) <= 1e-10);
}

#[test]
fn cheb_integrate_examples() {
    let one = cheb_integrate(&ChebyshevSeries { coeffs: vec![1.0], length: 2.0 });
    assert!(max_abs_diff(&one.coeffs, &[1.0, 1.0]) <= 1e-16);
    let lin = cheb_integrate(&ChebyshevSeries { coeffs: vec![0.0, 1.0, 0.0], length: 2.0 });
    assert!(max_abs_diff(&lin.coeffs, &[-0.25, 0.0, 0.25, 0.0]) <= 1e-16);
    assert_eq!(lin.len(), 4);
}

#[test]
fn cheb_integrate_matches_quadrature() {
    let c = random_vec(14, 16);
    let length = 3.0;
    let s = ChebyshevSeries { coeffs: c.clone(), length };
    let f = |t: f64| direct_cheb_eval(&c, t, length);
    let integral = cheb_integrate(&s);
    assert!(integral.eval(0.0).unwrap().abs() <= 1e-15);
    for i in 1..=10 {
        let t = length * i as f64 / 10.0;
        let oracle = simpson(&f, 0.0, t, 1e-14);
        assert!((integral.eval(t).unwrap() - oracle).abs() <= 1e-12, "t = {t}");
    }
}

#[test]
fn clenshaw_curtis_integrates_polynomials() {
    for n in [2usize, 3, 9, 64] {
        let w = clenshaw_curtis_weights(n, 2.0).unwrap();
        let nodes = cheb_nodes(n, 2.0).unwrap();
        for p in 0..n.min(12) {
            let q: f64 = w.iter().zip(&nodes).map(|(w, t)| w * (t - 1.0).powi(p as i32)).sum();
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() <= 1e-13, "n = {n}, p = {p}");
        }
    }
}

#[test]
fn fourier_forward_examples() {
    let s = fourier_forward(&[2.5; 8], 1.0).unwrap();
    for k in s.indices() {
        let want = if k == 0 { 2.5 } else { 0.0 };
        assert!((s.coeff(k) - Complex64::new(want, 0.0)).norm() <= 1e-15);
    }
    let n = 16;
    let v: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)).collect();
    let s = fourier_forward_complex(v, 1.0).unwrap();
    for k in s.indices() {
        let want = if k == 1 { 1.0 } else { 0.0 };
        assert!((s.coeff(k) - Complex64::new(want, 0.0)).norm() <= 1e-15);
    }
    assert!(matches!(fourier_forward(&[1.0; 7], 1.0), Err(Error::Size(_))));
}

#[test]
fn fourier_matches_direct_dft() {
    let mut r = rng(15);
    let v: Vec<Complex64> = (0..16).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    let s = fourier_forward_complex(v.clone(), 1.0).unwrap();
    let oracle = direct_dft(&v);
    for (a, b) in s.coeffs.iter().zip(&oracle) {
        assert!((a - b).norm() <= 1e-14);
    }
    let back = fourier_inverse(&s);
    for (a, b) in back.iter().zip(&v) {
        assert!((a - b).norm() <= 1e-14);
    }
    // Direct synthesis at the nodes.
    let nodes = fourier_nodes(16, 1.0);
    for (t, want) in nodes.iter().zip(&v) {
        assert!((s.eval(*t) - want).norm() <= 1e-13);
    }
}

#[test]
fn fourier_real_input_is_conjugate_symmetric() {
    let v = random_vec(16, 64);
    let s = fourier_forward(&v, 1.0).unwrap();
    let max = s.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    for k in 1..32 {
        assert!((s.coeff(k) - s.coeff(-k).conj()).norm() <= 1e-13 * max);
    }
    let f = filter_fourier(&s, 5.0);
    for k in 1..32 {
        assert!((f.coeff(k) - f.coeff(-k).conj()).norm() <= 1e-13 * max);
    }
}

#[test]
fn fourier_differentiate_examples() {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 8];
    coeffs[5] = Complex64::new(1.0, 0.0);
    let d = fourier_differentiate(&FourierSeries { coeffs, length: 1.0 });
    assert!((d.coeff(1) - Complex64::new(0.0, 2.0 * PI)).norm() <= 1e-15);
    let c = fourier_differentiate(&fourier_forward(&[3.0; 8], 2.0).unwrap());
    assert!(c.coeffs.iter().all(|v| v.norm() == 0.0));

    let n = 32;
    let nodes = fourier_nodes(n, 1.0);
    let v: Vec<f64> = nodes.iter().map(|t| (2.0 * PI * t).sin()).collect();
    let d = fourier_differentiate(&fourier_forward(&v, 1.0).unwrap()).inverse_real();
    let want: Vec<f64> = nodes.iter().map(|t| 2.0 * PI * (2.0 * PI * t).cos()).collect();
    assert!(max_abs_diff(&d, &want) <= 1e-12 * 2.0 * PI);
}

#[test]
fn fourier_integrate_examples() {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 8];
    coeffs[5] = Complex64::new(1.0, 0.0);
    let s = fourier_integrate(&FourierSeries { coeffs, length: 1.0 }).unwrap();
    let want = Complex64::new(0.0, -1.0 / (2.0 * PI));
    assert!((s.coeff(1) - want).norm() <= 1e-16);
    assert!((s.coeff(0) + want).norm() <= 1e-16);
    let zero = fourier_integrate(&FourierSeries { coeffs: vec![Complex64::new(0.0, 0.0); 8], length: 1.0 }).unwrap();
    assert!(zero.coeffs.iter().all(|c| c.norm() == 0.0));
    let biased = fourier_forward(&[1.0, 2.0, 3.0, 4.0], 1.0).unwrap();
    assert!(matches!(fourier_integrate(&biased), Err(Error::NonPeriodicIntegrand { .. })));
}

#[test]
fn fourier_integrate_matches_quadrature() {
    let mut v = random_vec(17, 16);
    let mean = v.iter().sum::<f64>() / 16.0;
    v.iter_mut().for_each(|x| *x -= mean);
    let length = 2.0;
    let s = fourier_forward(&v, length).unwrap();
    let f = |t: f64| s.eval_real(t);
    let integral = fourier_integrate(&s).unwrap();
    for i in 1..=10 {
        let t = length * i as f64 / 10.0;
        let oracle = simpson(&f, 0.0, t, 1e-14);
        assert!((integral.eval_real(t) - oracle).abs() <= 1e-12, "t = {t}");
    }
}

#[test]
fn gaussian_gain_examples() {
    assert_eq!(gaussian_gain(0.0, 3.0), 1.0);
    assert!((gaussian_gain(3.0, 3.0) - 0.0432139).abs() <= 1e-7);
    let mut prev = 1.0;
    for i in 1..2000 {
        let g = gaussian_gain(0.01 * i as f64, 2.5);
        assert!(g <= prev && g > 0.0);
        assert_eq!(g, gaussian_gain(-0.01 * i as f64, 2.5));
        prev = g;
    }
}

#[test]
fn filters_with_huge_bandwidth_are_identity() {
    let v = random_vec(18, 32);
    let f = fourier_forward(&v, 1.0).unwrap();
    let g = filter_fourier(&f, 1e12);
    for (a, b) in f.coeffs.iter().zip(&g.coeffs) {
        assert!((a - b).norm() <= 1e-15);
    }
    let c = cheb_forward(&v, 1.0).unwrap();
    assert!(max_abs_diff(&c.coeffs, &filter_chebyshev(&c, 1e12).coeffs) <= 1e-15);
    let constant = fourier_forward(&[4.0; 16], 1.0).unwrap();
    assert_eq!(filter_fourier(&constant, 0.5), constant);
    let constant = cheb_forward(&[4.0; 16], 1.0).unwrap();
    assert!(max_abs_diff(&filter_chebyshev(&constant, 0.5).values_at_nodes(16), &[4.0; 16]) <= 1e-14);
}

/// Filtering as cyclic convolution of the samples with the inverse DFT of
/// the gains.
#[test]
fn fourier_filter_matches_cyclic_convolution() {
    let n = 32;
    let a = 4.0;
    let v = random_vec(19, n);
    let half = (n / 2) as i64;
    let kernel: Vec<f64> = (0..n)
        .map(|j| {
            (-half..half)
                .map(|k| gaussian_gain(k as f64, a) * (2.0 * PI * (j as i64 * k) as f64 / n as f64).cos())
                .sum()
        })
        .collect();
    let conv: Vec<f64> = (0..n).map(|j| (0..n).map(|l| kernel[(j + n - l) % n] * v[l]).sum::<f64>() / n as f64).collect();
    let got = filter_fourier(&fourier_forward(&v, 1.0).unwrap(), a).inverse_real();
    assert!(max_abs_diff(&got, &conv) <= 1e-12);
}

/// Chebyshev filtering as Fourier filtering of the even extension in the
/// angle variable.
#[test]
fn chebyshev_filter_matches_even_extension() {
    let n = 16;
    let a = 5.0;
    let v = random_vec(20, n);
    let m = 2 * (n - 1);
    let ext: Vec<Complex64> = (0..m).map(|j| Complex64::new(if j < n { v[j] } else { v[m - j] }, 0.0)).collect();
    let spec = direct_dft(&ext);
    let half = (m / 2) as i64;
    let filtered: Vec<Complex64> = (-half..half).zip(&spec).map(|(k, c)| c * gaussian_gain(k as f64, a)).collect();
    let back: Vec<f64> = (0..n)
        .map(|j| {
            (-half..half)
                .zip(&filtered)
                .map(|(k, c)| (c * Complex64::from_polar(1.0, 2.0 * PI * (k * j as i64) as f64 / m as f64)).re)
                .sum()
        })
        .collect();
    let got = filter_chebyshev(&cheb_forward(&v, 1.0).unwrap(), a).values_at_nodes(n);
    assert!(max_abs_diff(&got, &back) <= 1e-12);
}

fn sizes() -> impl Strategy<Value = usize> {
    prop_oneof![Just(8usize), Just(64), Just(1024)]
}

fn random_values() -> impl Strategy<Value = (usize, u64)> {
    (sizes(), any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn round_trips((n, seed) in random_values(), length in 0.1f64..10.0) {
        let v = random_vec(seed, n);
        let scale = max_abs(&v);
        let c = cheb_forward(&v, length).unwrap();
        prop_assert!(max_abs_diff(&c.values_at_nodes(n), &v) <= 1e-13 * scale);
        let f = fourier_forward(&v, length).unwrap();
        prop_assert!(max_abs_diff(&f.inverse_real(), &v) <= 1e-13 * scale);
        prop_assert!(f.inverse().iter().all(|z| z.im.abs() <= 1e-13 * scale));
    }

    #[test]
    fn derivative_of_integral((n, seed) in random_values(), length in 0.1f64..10.0) {
        let mut r = rng(seed);
        let coeffs: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let c = ChebyshevSeries { coeffs: coeffs.clone(), length };
        let back = cheb_differentiate(&cheb_integrate(&c));
        prop_assert!(max_abs_diff(&back.coeffs[..n], &coeffs) <= 1e-11);
        prop_assert!(back.coeffs[n].abs() <= 1e-11);

        let mut fc: Vec<Complex64> = (0..n).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        fc[n / 2] = Complex64::new(0.0, 0.0);
        let f = FourierSeries { coeffs: fc.clone(), length };
        let back = fourier_differentiate(&fourier_integrate(&f).unwrap());
        for (a, b) in back.coeffs.iter().zip(&fc) {
            prop_assert!((a - b).norm() <= 1e-11);
        }
    }

    #[test]
    fn parseval((n, seed) in random_values()) {
        let v = random_vec(seed, n);
        let f = fourier_forward(&v, 1.0).unwrap();
        let lhs: f64 = v.iter().map(|x| x * x).sum::<f64>() / n as f64;
        let rhs: f64 = f.coeffs.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs);
    }

    #[test]
    fn filter_contracts((n, seed) in random_values(), a in 0.5f64..2000.0) {
        let v = random_vec(seed, n);
        let c = cheb_forward(&v, 1.0).unwrap();
        let cf = filter_chebyshev(&c, a);
        prop_assert!(c.coeffs.iter().zip(&cf.coeffs).all(|(x, y)| y.abs() <= x.abs()));
        let f = fourier_forward(&v, 1.0).unwrap();
        let ff = filter_fourier(&f, a);
        prop_assert!(f.coeffs.iter().zip(&ff.coeffs).all(|(x, y)| y.norm() <= x.norm()));
    }

    #[test]
    fn filter_semigroup((n, seed) in random_values(), a1 in 0.5f64..500.0, a2 in 0.5f64..500.0) {
        let v = random_vec(seed, n);
        let a = 1.0 / (1.0 / (a1 * a1) + 1.0 / (a2 * a2)).sqrt();
        let c = cheb_forward(&v, 1.0).unwrap();
        let two = filter_chebyshev(&filter_chebyshev(&c, a1), a2);
        let one = filter_chebyshev(&c, a);
        prop_assert!(max_abs_diff(&two.coeffs, &one.coeffs) <= 1e-13);
        let f = fourier_forward(&v, 1.0).unwrap();
        let two = filter_fourier(&filter_fourier(&f, a1), a2);
        let one = filter_fourier(&f, a);
        prop_assert!(two.coeffs.iter().zip(&one.coeffs).all(|(x, y)| (x - y).norm() <= 1e-13));
    }
}
