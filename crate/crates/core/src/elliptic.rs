//! Dirichlet Poisson problems on the periodic strip and the vorticity-coupled
//! field `A(lambda, w, phi)`.
//!
//! Each x-mode `k` solves `u'' - (k nu)^2 u = r` with `u(-h) = u(0) = 0` using
//! the fourth-order compact (Numerov) stencil
//! `u[j-1] - 2u[j] + u[j+1] - a (u[j-1] + 10u[j] + u[j+1]) = dy^2/12 (r[j-1] + 10r[j] + r[j+1])`
//! with `a = (k nu dy)^2 / 12`.

use crate::laminar::{LaminarFlow, Vorticity};
use crate::linalg::Tridiagonal;
use crate::spectral::{Discretization, Parity, PeriodicScalar, StripField};
use crate::{Error, Real, Result};

/// Per-mode factorized Numerov operators for one discretization.
#[derive(Clone, Debug)]
pub struct PoissonSolver<T> {
    rows: usize,
    dy: T,
    modes: Vec<Tridiagonal<T>>,
    shifts: Vec<T>,
}

impl<T: Real> PoissonSolver<T> {
    pub fn new(disc: &Discretization<T>) -> Result<Self> {
        let dy = disc.dy();
        let nu = disc.nu();
        let twelve = T::lit(12.0);
        let mut modes = Vec::with_capacity(disc.order() + 1);
        let mut shifts = Vec::with_capacity(disc.order() + 1);
        for k in 0..=disc.order() {
            let kn = T::from_usize_lossy(k) * nu;
            let a = dy * dy * kn * kn / twelve;
            modes.push(Tridiagonal::new(T::one() - a, -(T::lit(2.0) + T::lit(10.0) * a), disc.rows() - 1)?);
            shifts.push(a);
        }
        Ok(Self { rows: disc.rows(), dy, modes, shifts })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `(k nu dy)^2 / 12` for mode `k`.
    pub(crate) fn shift(&self, k: usize) -> T {
        self.shifts[k]
    }

    /// Solves mode `k` for the right-hand side profile `r` (all `M + 1` rows);
    /// the returned profile has exact zeros at both ends.
    pub fn solve_mode(&self, k: usize, r: &[T]) -> Vec<T> {
        let m = self.rows;
        let c = self.dy * self.dy / T::lit(12.0);
        let ten = T::lit(10.0);
        let mut b: Vec<T> = (1..m).map(|j| c * (r[j - 1] + ten * r[j] + r[j + 1])).collect();
        self.modes[k].solve(&mut b);
        let mut out = Vec::with_capacity(m + 1);
        out.push(T::zero());
        out.extend(b);
        out.push(T::zero());
        out
    }

    /// Numerov operator applied to a profile with zero ends, interior rows.
    pub(crate) fn apply_mode(&self, k: usize, u: &[T], out: &mut [T]) {
        let a = self.shifts[k];
        let ten = T::lit(10.0);
        let two = T::lit(2.0);
        for j in 1..self.rows {
            let s = u[j - 1] + u[j + 1];
            out[j - 1] = s - two * u[j] - a * (s + ten * u[j]);
        }
    }
}

/// Solves `Delta u = rhs` with zero traces mode by mode.
pub fn poisson_strip<T: Real>(rhs: &StripField<T>, solver: &PoissonSolver<T>) -> Result<StripField<T>> {
    if rhs.rows() != solver.rows {
        return Err(Error::InvalidArgument("right-hand side and solver grids differ".into()));
    }
    if rhs.profiles().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite Poisson right-hand side".into()));
    }
    let mut out = StripField::zeros(rhs.period(), rhs.depth(), rhs.order(), rhs.rows(), rhs.parity());
    for k in 0..=rhs.order() {
        let u = solver.solve_mode(k, rhs.profile(k));
        out.profile_mut(k).copy_from_slice(&u);
    }
    Ok(out)
}

/// One-sided fourth-order derivative at the top row of a profile.
pub fn top_slope<T: Real>(u: &[T], dy: T) -> T {
    let m = u.len() - 1;
    (T::lit(25.0) * u[m] - T::lit(48.0) * u[m - 1] + T::lit(36.0) * u[m - 2] - T::lit(16.0) * u[m - 3]
        + T::lit(3.0) * u[m - 4])
        / (T::lit(12.0) * dy)
}

/// `d/dy` at `y = 0`, mode by mode.
pub fn surface_normal_derivative<T: Real>(a: &StripField<T>) -> PeriodicScalar<T> {
    let dy = a.dy();
    let coeffs: Vec<T> = a.profiles().iter().map(|p| top_slope(p, dy)).collect();
    match a.parity() {
        Parity::Odd => PeriodicScalar::odd(a.period(), coeffs),
        _ => PeriodicScalar::even(a.period(), coeffs),
    }
}

/// Grid samples of `V_x`, `V_y` and `phi` on `(M + 1) x G` points, rows `y_j`,
/// columns the half-period collocation points.
#[derive(Clone, Debug)]
pub struct StripSamples<T> {
    pub cols: usize,
    pub vx: Vec<T>,
    pub vy: Vec<T>,
    pub phi: Vec<T>,
}

impl<T: Real> StripSamples<T> {
    pub fn new(w: &PeriodicScalar<T>, phi: &StripField<T>, disc: &Discretization<T>) -> Self {
        let g = disc.grid_len();
        let n = disc.order();
        let rows = disc.rows();
        let nu = disc.nu();
        let mut vx = vec![T::zero(); (rows + 1) * g];
        let mut vy = vec![T::zero(); (rows + 1) * g];
        let mut ph = vec![T::zero(); (rows + 1) * g];
        let mut cx = vec![T::zero(); n + 1];
        let mut cy = vec![T::zero(); n + 1];
        let mut cp = vec![T::zero(); n + 1];
        let kmax = w.order().min(n);
        for j in 0..=rows {
            cy[0] = T::one();
            for k in 1..=kmax {
                let kn = T::from_usize_lossy(k) * nu;
                cx[k] = -kn * w.cos()[k] * disc.extension_profile(k)[j];
                cy[k] = w.cos()[k] * disc.extension_slope(k)[j];
            }
            for k in 0..=phi.order().min(n) {
                cp[k] = phi.profile(k)[j];
            }
            disc.synth_sin(&cx, &mut vx[j * g..(j + 1) * g]);
            disc.synth_cos(&cy, &mut vy[j * g..(j + 1) * g]);
            disc.synth_cos(&cp, &mut ph[j * g..(j + 1) * g]);
        }
        Self { cols: g, vx, vy, phi: ph }
    }

    pub fn grad_v_sq(&self, idx: usize) -> T {
        self.vx[idx] * self.vx[idx] + self.vy[idx] * self.vy[idx]
    }
}

/// Projects grid rows to cosine profiles and solves the Poisson problem.
pub(crate) fn solve_from_grid<T: Real>(values: &[T], disc: &Discretization<T>, solver: &PoissonSolver<T>) -> StripField<T> {
    let g = disc.grid_len();
    let n1 = disc.order() + 1;
    let rows = disc.rows();
    let mut rhs = disc.zero_field(Parity::Even);
    let mut c = vec![T::zero(); n1];
    for j in 0..=rows {
        disc.project_cos(&values[j * g..(j + 1) * g], &mut c);
        for k in 0..n1 {
            rhs.profile_mut(k)[j] = c[k];
        }
    }
    let mut out = disc.zero_field(Parity::Even);
    for k in 0..n1 {
        let u = solver.solve_mode(k, rhs.profile(k));
        out.profile_mut(k).copy_from_slice(&u);
    }
    out
}

/// Grid values of `-gamma(phi + psi) |grad V|^2 + gamma(psi)`.
pub(crate) fn a_rhs_samples<T: Real>(gamma: &Vorticity<T>, laminar: &LaminarFlow<T>, s: &StripSamples<T>) -> Vec<T> {
    let g = s.cols;
    let mut out = vec![T::zero(); s.vx.len()];
    if gamma.is_zero() {
        return out;
    }
    for (j, psi) in laminar.psi.iter().enumerate() {
        let base = gamma.value(*psi);
        for i in 0..g {
            let idx = j * g + i;
            out[idx] = -gamma.value(s.phi[idx] + *psi) * s.grad_v_sq(idx) + base;
        }
    }
    out
}

/// `A` solving `Delta A = -gamma(phi + psi^lambda) |grad V|^2 + gamma(psi^lambda)`
/// with zero traces.
pub fn compute_a<T: Real>(
    gamma: &Vorticity<T>,
    laminar: &LaminarFlow<T>,
    w: &PeriodicScalar<T>,
    phi: &StripField<T>,
    disc: &Discretization<T>,
    solver: &PoissonSolver<T>,
) -> Result<StripField<T>> {
    if laminar.rows != disc.rows() || phi.rows() != disc.rows() {
        return Err(Error::InvalidArgument("laminar profile, phi and discretization must share the y-grid".into()));
    }
    let samples = StripSamples::new(w, phi, disc);
    let rhs = a_rhs_samples(gamma, laminar, &samples);
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("vorticity produced non-finite values".into()));
    }
    Ok(solve_from_grid(&rhs, disc, solver))
}
