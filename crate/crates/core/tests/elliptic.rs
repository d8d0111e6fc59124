#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use gravwave::elliptic::*;
use gravwave::laminar::{solve_laminar, Vorticity};
use gravwave::spectral::*;
use proptest::prelude::*;

/// `u(y) = sin(pi (y + h) / h) exp(y)` and `u'' - l^2 u`.
fn manufactured(y: f64, h: f64, l: f64) -> (f64, f64, f64) {
    let a = PI / h;
    let s = (a * (y + h)).sin();
    let c = (a * (y + h)).cos();
    let e = y.exp();
    let u = s * e;
    let du = (a * c + s) * e;
    let d2u = (-a * a * s + 2.0 * a * c + s) * e;
    (u, du, d2u - l * l * u)
}

fn mode_error(rows: usize, k: usize) -> (f64, f64) {
    let h = 1.3;
    let d = Discretization::new(2.0 * PI, h, 4, rows).unwrap();
    let solver = PoissonSolver::new(&d).unwrap();
    let l = k as f64 * d.nu();
    let rhs: Vec<f64> = (0..=rows).map(|j| manufactured(d.y(j), h, l).2).collect();
    let u = solver.solve_mode(k, &rhs);
    let err = (0..=rows).fold(0.0f64, |m, j| m.max((u[j] - manufactured(d.y(j), h, l).0).abs()));
    let slope_err = (top_slope(&u, d.dy()) - manufactured(0.0, h, l).1).abs();
    (err, slope_err)
}

#[test]
fn poisson_modes_converge_at_fourth_order() {
    for k in [0, 1, 3] {
        let mut prev = mode_error(16, k);
        for rows in [32, 64, 128] {
            let e = mode_error(rows, k);
            let ratio = prev.0 / e.0;
            let slope_ratio = prev.1 / e.1;
            assert!(ratio > 14.0 && ratio < 18.0, "k = {k}, M = {rows}: value ratio {ratio}");
            assert!(slope_ratio > 12.0, "k = {k}, M = {rows}: slope ratio {slope_ratio}");
            prev = e;
        }
    }
}

#[test]
fn solutions_vanish_on_both_boundaries() {
    let d = Discretization::new(3.0, 0.9, 6, 24).unwrap();
    let solver = PoissonSolver::new(&d).unwrap();
    let mut rhs = d.zero_field(Parity::Even);
    for k in 0..=6 {
        for (j, v) in rhs.profile_mut(k).iter_mut().enumerate() {
            *v = ((j + k) as f64 * 0.31).sin();
        }
    }
    let u = poisson_strip(&rhs, &solver).unwrap();
    assert!(u.has_zero_traces());
}

#[test]
fn nonpositive_source_gives_nonnegative_solution() {
    let h = 1.0;
    let d = Discretization::new(2.0 * PI, h, 16, 64).unwrap();
    let solver = PoissonSolver::new(&d).unwrap();
    let g = d.grid_len();
    let xs = d.grid();
    let mut rhs = d.zero_field(Parity::Even);
    let mut c = vec![0.0; 17];
    for j in 0..=64 {
        let y = d.y(j);
        let row: Vec<f64> = xs.iter().map(|x| -(1.0 + x.cos()).powi(2) * (1.0 + y * y)).collect();
        d.project_cos(&row, &mut c);
        for k in 0..=16 {
            rhs.profile_mut(k)[j] = c[k];
        }
    }
    let u = poisson_strip(&rhs, &solver).unwrap();
    let mut vals = vec![0.0; g];
    for j in 0..=64 {
        let coeffs: Vec<f64> = (0..=16).map(|k| u.profile(k)[j]).collect();
        d.synth_cos(&coeffs, &mut vals);
        assert!(vals.iter().all(|v| *v >= -1e-14), "row {j}");
    }
}

#[test]
fn a_vanishes_for_zero_vorticity_and_flat_surface() {
    let d = Discretization::new(2.0 * PI, 1.0, 8, 32).unwrap();
    let solver = PoissonSolver::new(&d).unwrap();
    for gamma in [Vorticity::Constant(0.0), Vorticity::Constant(2.0), Vorticity::Affine { slope: -1.0, intercept: 0.5 }] {
        let lam = solve_laminar(&gamma, 1.5, 1.0, 32).unwrap();
        let a = compute_a(&gamma, &lam, &d.zero_scalar(Parity::Even), &d.zero_field(Parity::Even), &d, &solver).unwrap();
        assert!(a.max_abs() < 1e-15, "{gamma:?}");
    }
}

#[test]
fn a_for_constant_vorticity_matches_mode_solve() {
    // With gamma constant, Delta A = gamma (1 - |grad V|^2) and |grad V|^2 is
    // explicit for a single-mode surface.
    let h = 1.0;
    let gamma0 = 1.7;
    let eps = 0.05;
    let d = Discretization::new(2.0 * PI, h, 8, 64).unwrap();
    let solver = PoissonSolver::new(&d).unwrap();
    let w = PeriodicScalar::cosine_mode(2.0 * PI, 8, 1, eps);
    let gamma = Vorticity::Constant(gamma0);
    let lam = solve_laminar(&gamma, 1.0, h, 64).unwrap();
    let a = compute_a(&gamma, &lam, &w, &d.zero_field(Parity::Even), &d, &solver).unwrap();
    // |grad V|^2 = (1 + eps s')^2 + (eps s)^2 sin^2 - ... expanded in modes 0 and 2:
    // V = y + h + eps S(y) cos x with S = sinh(y + h) / sinh h.
    let s = |y: f64| (y + h).sinh() / h.sinh();
    let c = |y: f64| (y + h).cosh() / h.sinh();
    let mut r0 = vec![0.0; 65];
    let mut r1 = vec![0.0; 65];
    let mut r2 = vec![0.0; 65];
    for j in 0..=64 {
        let y = d.y(j);
        // |grad V|^2 = (eps S sin x)^2 + (1 + eps C cos x)^2
        //            = 1 + eps^2 (S^2 + C^2)/2 + 2 eps C cos x + eps^2 (C^2 - S^2)/2 cos 2x
        r0[j] = -gamma0 * eps * eps * (s(y).powi(2) + c(y).powi(2)) / 2.0;
        r1[j] = -gamma0 * 2.0 * eps * c(y);
        r2[j] = -gamma0 * eps * eps * (c(y).powi(2) - s(y).powi(2)) / 2.0;
    }
    for (k, r) in [(0, r0), (1, r1), (2, r2)] {
        let u = solver.solve_mode(k, &r);
        for j in 0..=64 {
            assert!((a.profile(k)[j] - u[j]).abs() < 1e-13, "mode {k} row {j}");
        }
    }
    assert!(a.profiles()[3..].iter().flatten().all(|v| v.abs() < 1e-13));
}

#[test]
fn mismatched_grids_are_rejected() {
    let d = Discretization::new(1.0, 1.0, 4, 16).unwrap();
    let solver = PoissonSolver::new(&d).unwrap();
    let rhs = StripField::zeros(1.0, 1.0, 4, 32, Parity::Even);
    assert!(poisson_strip(&rhs, &solver).is_err());
}

proptest! {
    #[test]
    fn poisson_is_linear(a in -3.0f64..3.0, seed in 0.1f64..5.0) {
        let d = Discretization::new(2.0, 1.0, 3, 16).unwrap();
        let solver = PoissonSolver::new(&d).unwrap();
        let r1: Vec<f64> = (0..=16).map(|j| (seed * j as f64).sin()).collect();
        let r2: Vec<f64> = (0..=16).map(|j| (seed * j as f64 * 0.5).cos()).collect();
        let comb: Vec<f64> = r1.iter().zip(&r2).map(|(x, y)| a * x + y).collect();
        for k in 0..=3 {
            let u1 = solver.solve_mode(k, &r1);
            let u2 = solver.solve_mode(k, &r2);
            let u = solver.solve_mode(k, &comb);
            for j in 0..=16 {
                prop_assert!((u[j] - a * u1[j] - u2[j]).abs() < 1e-12);
            }
        }
    }
}
