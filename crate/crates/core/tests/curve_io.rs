mod common;

use std::f64::consts::PI;

use bandfit::io::{
    format_curve, normalize_points, parse_curve, parse_points, read_curve, read_points, write_curve, write_points,
    CurveFile,
};
use bandfit::render::{curve_plot, render_svg};
use bandfit::samples::spiral;
use bandfit::{run_continuation, Basis, CurveState, Error, FitConfig, Point, PointSet, SpectralSeries, TruncatedCurve};
use proptest::prelude::*;

fn small_fit() -> CurveFile {
    let pts = PointSet::closed(vec![
        Point::new(1.0, 0.0),
        Point::new(0.0, 0.7),
        Point::new(-1.0, 0.1),
        Point::new(-0.2, -0.8),
    ])
    .unwrap();
    let (pts, scale) = normalize_points(&pts).unwrap();
    let cfg = FitConfig { n_nodes: 128, n_iters: 60, h_filter: 0.1, eps: 1e-16, n_coefs: 64, n_bands: 4 };
    CurveFile::from_result(&run_continuation(&pts, &cfg).unwrap(), scale)
}

#[test]
fn curve_file_round_trip_is_exact() {
    let file = small_fit();
    let text = format_curve(&file);
    let back = parse_curve(&text).unwrap();
    assert_eq!(back, file);
    assert_eq!(format_curve(&back), text);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.curve");
    write_curve(&path, &file).unwrap();
    assert_eq!(read_curve(&path).unwrap(), file);
}

#[test]
fn point_file_round_trip_is_exact() {
    let pts = spiral(50, Point::new(0.05, 0.05), Point::new(0.05, 0.05)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.pts");
    write_points(&path, &pts).unwrap();
    let back = read_points(&path).unwrap().to_point_set(None, None).unwrap();
    assert_eq!(back, pts);
}

#[test]
fn hand_written_point_file() {
    let text = "# three points\nopen 1 0 0 -1\n0 0\n0.5 0.25\n1 0\n";
    let got = parse_points(text).unwrap().to_point_set(None, None).unwrap();
    let want = PointSet::open(
        vec![Point::new(0.0, 0.0), Point::new(0.5, 0.25), Point::new(1.0, 0.0)],
        Point::new(1.0, 0.0),
        Point::new(0.0, -1.0),
    )
    .unwrap();
    assert_eq!(got, want);
}

#[test]
fn parse_errors_are_located() {
    assert!(matches!(parse_points(""), Err(Error::Parse { .. })));
    assert!(matches!(parse_points("closed\n0 0\ninf 1\n"), Err(Error::Parse { line: 3, .. })));
    let text = format_curve(&small_fit());
    let lines: Vec<&str> = text.lines().collect();
    let coeff_line = lines.iter().position(|l| *l == "coefficients").unwrap() + 1;

    let bad_row = text.replacen(lines[coeff_line], "1.0 NaN", 1);
    assert!(matches!(parse_curve(&bad_row), Err(Error::Parse { line, .. }) if line == coeff_line + 1));
    let short = lines[..lines.len() - 1].join("\n");
    assert!(matches!(parse_curve(&short), Err(Error::Parse { line, .. }) if line == coeff_line));
    let bad_basis = text.replacen("basis fourier", "basis legendre", 1);
    assert!(matches!(parse_curve(&bad_basis), Err(Error::Parse { line: 2, .. })));
    let no_version = text.replacen("bandfit-curve 1", "bandfit-curve 9", 1);
    assert!(matches!(parse_curve(&no_version), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn normalization_examples() {
    let pts = PointSet::closed(vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 3.0)]).unwrap();
    let (n, f) = normalize_points(&pts).unwrap();
    assert_eq!(f, 1.0 / 3.0);
    assert_eq!(n.points()[1], Point::new(10.0 * (1.0 / 3.0), 0.0));
    let line = PointSet::closed(vec![Point::new(0.0, 0.0), Point::new(0.0, 4.0), Point::new(0.0, 2.0)]).unwrap();
    assert_eq!(normalize_points(&line).unwrap().1, 0.25);
    let tiny = PointSet::closed(vec![Point::new(0.0, 0.0), Point::new(1e-3, 0.0), Point::new(0.0, 1e-5)]).unwrap();
    assert_eq!(normalize_points(&tiny).unwrap().1, 1e3);
}

#[test]
fn constant_series_evaluates_to_constant() {
    for basis in [Basis::Chebyshev, Basis::Fourier] {
        let mut x = vec![0.0; 9];
        let mut y = vec![0.0; 9];
        x[0] = 0.3;
        y[0] = -1.2;
        let c = TruncatedCurve { basis, length: 2.0, x, y };
        for p in c.eval_many(&[0.0, 0.4, 1.3, 2.0]).unwrap() {
            assert!(p.distance(Point::new(0.3, -1.2)) <= 1e-15);
        }
    }
}

#[test]
fn stored_curve_passes_through_its_data() {
    let file = small_fit();
    let pts = normalize_points(
        &PointSet::closed(vec![
            Point::new(1.0, 0.0),
            Point::new(0.0, 0.7),
            Point::new(-1.0, 0.1),
            Point::new(-0.2, -0.8),
        ])
        .unwrap(),
    )
    .unwrap()
    .0;
    let at = file.eval(&file.tpar).unwrap();
    for (p, q) in at.iter().zip(pts.points()) {
        assert!(p.distance(*q) <= file.e_samp + 1e-15);
    }
    let orig = file.eval_original(&file.tpar).unwrap();
    assert!(orig[0].distance(Point::new(1.0, 0.0)) <= 1e-12);
}

#[test]
fn truncated_curve_matches_full_transform_at_nodes() {
    let length = 3.0;
    for basis in [Basis::Chebyshev, Basis::Fourier] {
        let n = 64;
        let s = CurveState::from_fn(basis, n, length, |t| {
            let w = 2.0 * PI * t / length;
            Point::new(w.cos() + 0.2 * (2.0 * w).sin(), w.sin())
        })
        .unwrap();
        let c = TruncatedCurve::from_state(&s, 40).unwrap();
        let nodes = bandfit::kinematics::basis_nodes(basis, n, length).unwrap();
        let at = c.eval_many(&nodes).unwrap();
        let back_x = SpectralSeries::forward(basis, &s.x, length).unwrap().values_at_nodes(n);
        for (j, p) in at.iter().enumerate() {
            assert!((p.x - back_x[j]).abs() <= 1e-13, "{basis:?} node {j}");
            assert!((p.y - s.y[j]).abs() <= 1e-13, "{basis:?} node {j}");
        }
    }
}

#[test]
fn rendering_is_deterministic() {
    let file = small_fit();
    let a = render_svg(&curve_plot(&file, 400, true).unwrap());
    let b = render_svg(&curve_plot(&parse_curve(&format_curve(&file)).unwrap(), 400, true).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.matches("<circle").count(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn normalization_is_idempotent(
        raw in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..20),
        stretch in 1e-3f64..1e3,
    ) {
        let pts: Vec<Point> = raw.iter().map(|&(x, y)| Point::new(x * stretch, y)).collect();
        let Ok(set) = PointSet::closed(pts) else { return Ok(()) };
        let Ok((once, _)) = normalize_points(&set) else { return Ok(()) };
        let (twice, f) = normalize_points(&once).unwrap();
        prop_assert_eq!(f, 1.0);
        prop_assert_eq!(twice, once);
    }
}
