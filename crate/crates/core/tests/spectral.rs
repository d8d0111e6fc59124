use std::f64::consts::PI;

use gravwave::spectral::*;
use gravwave::Error;
use proptest::prelude::*;

fn coeffs(n: usize, seed: f64) -> Vec<f64> {
    (0..=n).map(|k| if k == 0 { 0.0 } else { (seed * k as f64).sin() / (k * k) as f64 }).collect()
}

#[test]
fn hilbert_round_trip_is_exact_to_rounding() {
    for h in [0.3, 1.0, 4.0] {
        let u = PeriodicScalar::general(2.5, coeffs(24, 1.7), coeffs(24, 0.4));
        let back = hilbert_strip_inverse(&hilbert_strip(&u, h).unwrap(), h).unwrap();
        for k in 1..=24 {
            assert!((back.cos()[k] - u.cos()[k]).abs() < 1e-13);
            assert!((back.sin()[k] - u.sin()[k]).abs() < 1e-13);
        }
    }
}

#[test]
fn hilbert_maps_cosine_to_coth_sine() {
    let h = 0.7;
    let u = PeriodicScalar::cosine_mode(2.0 * PI, 4, 3, 1.0);
    let c = hilbert_strip(&u, h).unwrap();
    assert_eq!(c.parity(), Parity::Odd);
    assert!((c.sin()[3] - 1.0 / (3.0 * h).tanh()).abs() < 1e-15);
    let s = PeriodicScalar::sine_mode(2.0 * PI, 4, 2, 1.0);
    let c = hilbert_strip(&s, h).unwrap();
    assert!((c.cos()[2] + 1.0 / (2.0 * h).tanh()).abs() < 1e-15);
}

#[test]
fn operators_reject_nonzero_mean() {
    let mut u = PeriodicScalar::cosine_mode(1.0, 3, 1, 1.0);
    u.cos_mut()[0] = 0.5;
    assert!(matches!(hilbert_strip(&u, 1.0), Err(Error::NonzeroMean { .. })));
    assert!(matches!(antiderivative(&u), Err(Error::NonzeroMean { .. })));
    assert!(antiderivative(&project_zero_mean(&u)).is_ok());
}

#[test]
fn antiderivative_inverts_differentiation() {
    let u = PeriodicScalar::general(3.0, coeffs(10, 0.9), coeffs(10, 2.3));
    let back = differentiate(&antiderivative(&u).unwrap());
    for k in 1..=10 {
        assert!((back.cos()[k] - u.cos()[k]).abs() < 1e-14);
        assert!((back.sin()[k] - u.sin()[k]).abs() < 1e-14);
    }
    // sin(k nu x) -> -cos(k nu x) / (k nu)
    let s = PeriodicScalar::sine_mode(2.0, 3, 2, 1.0);
    let a = antiderivative(&s).unwrap();
    assert!((a.cos()[2] + 1.0 / (2.0 * PI)).abs() < 1e-15);
}

#[test]
fn grid_projection_reproduces_modes() {
    let d = Discretization::new(2.0 * PI, 1.0, 12, 16).unwrap();
    let c = coeffs(12, 0.77);
    let mut g = vec![0.0; d.grid_len()];
    d.synth_cos(&c, &mut g);
    let mut back = vec![0.0; 13];
    d.project_cos(&g, &mut back);
    for k in 0..=12 {
        assert!((back[k] - c[k]).abs() < 1e-14, "cos mode {k}");
    }
    d.synth_sin(&c, &mut g);
    d.project_sin(&g, &mut back);
    for k in 1..=12 {
        assert!((back[k] - c[k]).abs() < 1e-14, "sin mode {k}");
    }
}

#[test]
fn product_matrix_matches_pointwise_product() {
    let d = Discretization::new(2.0 * PI, 1.0, 8, 16).unwrap();
    let g = d.grid_len();
    let mult: Vec<f64> = d.grid().iter().map(|x| 1.0 + 0.3 * x.cos() + 0.1 * (2.0 * x).cos()).collect();
    let mut m = vec![0.0; 81];
    d.product_matrix(&mult, &mut m);
    let v = coeffs(8, 1.1);
    let mut vg = vec![0.0; g];
    d.synth_cos(&v, &mut vg);
    let prod: Vec<f64> = vg.iter().zip(&mult).map(|(a, b)| a * b).collect();
    let mut expect = vec![0.0; 9];
    d.project_cos(&prod, &mut expect);
    for k in 0..9 {
        let got: f64 = (0..9).map(|l| m[k * 9 + l] * v[l]).sum();
        assert!((got - expect[k]).abs() < 1e-14);
    }
}

#[test]
fn harmonic_extension_traces_are_exact_in_coefficients() {
    let d = Discretization::new(2.0 * PI, 0.8, 10, 32).unwrap();
    let w = PeriodicScalar::even(2.0 * PI, coeffs(10, 0.5));
    let v = harmonic_extension(&w, &d).unwrap();
    assert_eq!(v.profile(0)[0], 0.0);
    assert!((v.profile(0)[32] - 0.8).abs() < 1e-15);
    for k in 1..=10 {
        assert_eq!(v.profile(k)[0], 0.0);
        assert!((v.profile(k)[32] - w.cos()[k]).abs() <= 1e-15 * w.cos()[k].abs());
    }
}

#[test]
fn extension_profile_matches_sinh_ratio() {
    let d = Discretization::new(2.0 * PI, 1.3, 6, 20).unwrap();
    for k in 1..=6 {
        let kn = k as f64;
        for j in 0..=20 {
            let y = d.y(j);
            let exact = (kn * (y + 1.3)).sinh() / (kn * 1.3).sinh();
            let slope = kn * (kn * (y + 1.3)).cosh() / (kn * 1.3).sinh();
            assert!((d.extension_profile(k)[j] - exact).abs() < 1e-14);
            assert!((d.extension_slope(k)[j] - slope).abs() < 1e-13 * slope.max(1.0));
        }
    }
}

#[test]
fn surface_gradient_of_flat_surface() {
    let w = PeriodicScalar::zeros(1.0, 4, Parity::Even);
    let (vx, vy) = surface_gradient(&w, 1.0).unwrap();
    assert_eq!(vx.max_coeff(), 0.0);
    assert_eq!(vy.cos()[0], 1.0);
    let d = Discretization::new(1.0, 1.0, 4, 8).unwrap();
    assert!(metric_k(&w, &d).unwrap().values.iter().all(|k| *k == 1.0));
}

#[test]
fn small_waves_do_not_self_intersect() {
    let w = PeriodicScalar::cosine_mode(2.0 * PI, 8, 1, 0.1);
    let c = surface_curve(&w, 1.0, 128).unwrap();
    assert_eq!(c.len(), 129);
    assert!(!curve_self_intersects(&c, 2.0 * PI));
}

#[test]
fn folded_curve_self_intersects() {
    // A curve that doubles back on itself within a period.
    let pts: Vec<(f64, f64)> = vec![(0.0, 0.0), (2.0, 0.0), (1.0, 1.0), (1.0, -1.0), (3.0, 0.0), (4.0, 0.0)];
    assert!(curve_self_intersects(&pts, 4.0));
    let straight: Vec<(f64, f64)> = (0..=8).map(|i| (i as f64 * 0.5, (i as f64).sin() * 0.1)).collect();
    assert!(!curve_self_intersects(&straight, 4.0));
}

#[test]
fn overlapping_neighbour_copies_are_detected() {
    // Overhanging lobe wider than the period reaches into the next copy.
    let pts: Vec<(f64, f64)> = vec![(0.0, 0.0), (0.5, 0.0), (1.6, 0.5), (0.6, 1.0), (1.0, 0.0)];
    assert!(curve_self_intersects(&pts, 1.0));
}

#[test]
fn segment_intersection_cases() {
    assert!(segments_intersect((0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)));
    assert!(!segments_intersect((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)));
    assert!(segments_intersect((0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (2.0, 1.0)));
}

#[test]
fn strip_field_requires_parity() {
    let f = StripField::<f64>::zeros(1.0, 1.0, 3, 8, Parity::Even);
    assert!(f.has_zero_traces());
    assert_eq!(f.rows(), 8);
    assert!((f.dy() - 0.125).abs() < 1e-16);
}

#[test]
fn single_precision_round_trip() {
    let u = PeriodicScalar::<f32>::general(2.0, vec![0.0, 0.5, 0.25], vec![0.0, -0.3, 0.1]);
    let back = hilbert_strip_inverse(&hilbert_strip(&u, 1.0f32).unwrap(), 1.0f32).unwrap();
    for k in 1..=2 {
        assert!((back.cos()[k] - u.cos()[k]).abs() < 1e-6);
        assert!((back.sin()[k] - u.sin()[k]).abs() < 1e-6);
    }
}

proptest! {
    #[test]
    fn hilbert_round_trip_random(
        cos in prop::collection::vec(-1.0f64..1.0, 2..20),
        sin in prop::collection::vec(-1.0f64..1.0, 2..20),
        h in 0.05f64..10.0,
        period in 0.5f64..20.0,
    ) {
        let n = cos.len().min(sin.len());
        let mut c = cos[..n].to_vec();
        c[0] = 0.0;
        let u = PeriodicScalar::general(period, c, sin[..n].to_vec());
        let back = hilbert_strip_inverse(&hilbert_strip(&u, h).unwrap(), h).unwrap();
        for k in 1..n {
            prop_assert!((back.cos()[k] - u.cos()[k]).abs() < 1e-13);
            prop_assert!((back.sin()[k] - u.sin()[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn hilbert_commutes_with_differentiation(
        cos in prop::collection::vec(-1.0f64..1.0, 2..12),
        h in 0.1f64..5.0,
    ) {
        let mut c = cos.clone();
        c[0] = 0.0;
        let u = PeriodicScalar::even(3.0, c);
        let a = differentiate(&hilbert_strip(&u, h).unwrap());
        let b = hilbert_strip(&differentiate(&u), h).unwrap();
        for k in 0..u.order() + 1 {
            prop_assert!((a.cos()[k] - b.cos()[k]).abs() < 1e-12);
            prop_assert!((a.sin()[k] - b.sin()[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_preserves_mean_and_parity(values in prop::collection::vec(-5.0f64..5.0, 9)) {
        let d = Discretization::new(2.0, 1.0, 4, 8).unwrap();
        let p = d.project_even(&values);
        prop_assert_eq!(p.parity(), Parity::Even);
        let z = project_zero_mean(&p);
        prop_assert!(z.is_zero_mean());
        prop_assert_eq!(mean(&z), 0.0);
    }
}
