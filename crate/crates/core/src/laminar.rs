//! Laminar (x-independent) flows, the Sturm–Liouville profile `beta`, the
//! dispersion relation `d(mu, lambda)` and location of bifurcation points.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::{Error, Real, Result};

/// User-supplied vorticity function with its first two derivatives.
pub trait VorticityFn<T>: Send + Sync {
    fn value(&self, s: T) -> T;
    fn d1(&self, s: T) -> T;
    fn d2(&self, s: T) -> T;
}

/// Piecewise polynomial in the local variable `s - breaks[i]` on
/// `[breaks[i], breaks[i+1]]`, extended linearly outside the table so the
/// derivative stays bounded.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePolynomial<T> {
    breaks: Vec<T>,
    coeffs: Vec<Vec<T>>,
}

impl<T: Real> PiecewisePolynomial<T> {
    pub fn new(breaks: Vec<T>, coeffs: Vec<Vec<T>>) -> Result<Self> {
        if breaks.len() < 2 || coeffs.len() + 1 != breaks.len() {
            return Err(Error::InvalidArgument("need p+1 breakpoints for p polynomial pieces".into()));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("breakpoints must be strictly increasing".into()));
        }
        if coeffs.iter().any(|c| c.is_empty()) {
            return Err(Error::InvalidArgument("empty polynomial piece".into()));
        }
        Ok(Self { breaks, coeffs })
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn coeffs(&self) -> &[Vec<T>] {
        &self.coeffs
    }

    fn piece(&self, i: usize, t: T) -> [T; 3] {
        let c = &self.coeffs[i];
        let v = c.iter().rev().fold(T::zero(), |acc, a| acc * t + *a);
        [v, Self::horner_d1(c, t), Self::horner_d2(c, t)]
    }

    fn horner_d1(c: &[T], t: T) -> T {
        c.iter().enumerate().skip(1).rev().fold(T::zero(), |acc, (n, a)| acc * t + *a * T::from_usize_lossy(n))
    }

    fn horner_d2(c: &[T], t: T) -> T {
        c.iter().enumerate().skip(2).rev().fold(T::zero(), |acc, (n, a)| {
            let nf = T::from_usize_lossy(n);
            acc * t + *a * nf * (nf - T::one())
        })
    }

    pub fn eval(&self, s: T) -> [T; 3] {
        let p = self.coeffs.len();
        let first = self.breaks[0];
        let last = self.breaks[p];
        if s < first {
            let [v, d, _] = self.piece(0, T::zero());
            return [v + d * (s - first), d, T::zero()];
        }
        if s > last {
            let [v, d, _] = self.piece(p - 1, last - self.breaks[p - 1]);
            return [v + d * (s - last), d, T::zero()];
        }
        let i = self.breaks[1..p].iter().take_while(|b| **b <= s).count();
        self.piece(i, s - self.breaks[i])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VorticityKind {
    Constant,
    Affine,
    Custom,
}

/// The vorticity function `gamma` with `Delta psi = -gamma(psi)`.
#[derive(Clone)]
pub enum Vorticity<T> {
    Constant(T),
    /// `slope * s + intercept`.
    Affine { slope: T, intercept: T },
    /// `offset + amplitude * sin(frequency * s)`.
    Sine { amplitude: T, frequency: T, offset: T },
    Piecewise(PiecewisePolynomial<T>),
    Custom(Arc<dyn VorticityFn<T>>),
}

impl<T: fmt::Debug> fmt::Debug for Vorticity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vorticity::Constant(c) => write!(f, "Constant({c:?})"),
            Vorticity::Affine { slope, intercept } => write!(f, "Affine({slope:?} s + {intercept:?})"),
            Vorticity::Sine { amplitude, frequency, offset } => {
                write!(f, "Sine({offset:?} + {amplitude:?} sin({frequency:?} s))")
            }
            Vorticity::Piecewise(p) => write!(f, "Piecewise({} pieces)", p.coeffs.len()),
            Vorticity::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl<T: Real> Vorticity<T> {
    pub fn irrotational() -> Self {
        Vorticity::Constant(T::zero())
    }

    pub fn kind(&self) -> VorticityKind {
        match self {
            Vorticity::Constant(_) => VorticityKind::Constant,
            Vorticity::Affine { .. } => VorticityKind::Affine,
            _ => VorticityKind::Custom,
        }
    }

    /// `[gamma, gamma', gamma'']` at `s`.
    pub fn eval(&self, s: T) -> [T; 3] {
        match self {
            Vorticity::Constant(c) => [*c, T::zero(), T::zero()],
            Vorticity::Affine { slope, intercept } => [*slope * s + *intercept, *slope, T::zero()],
            Vorticity::Sine { amplitude, frequency, offset } => {
                let (sn, cs) = (*frequency * s).sin_cos();
                [
                    *offset + *amplitude * sn,
                    *amplitude * *frequency * cs,
                    -*amplitude * *frequency * *frequency * sn,
                ]
            }
            Vorticity::Piecewise(p) => p.eval(s),
            Vorticity::Custom(f) => [f.value(s), f.d1(s), f.d2(s)],
        }
    }

    pub fn value(&self, s: T) -> T {
        self.eval(s)[0]
    }

    pub fn d1(&self, s: T) -> T {
        self.eval(s)[1]
    }

    pub fn d2(&self, s: T) -> T {
        self.eval(s)[2]
    }

    /// Global Lipschitz constant when known in closed form.
    pub fn lipschitz_bound(&self) -> Option<T> {
        match self {
            Vorticity::Constant(_) => Some(T::zero()),
            Vorticity::Affine { slope, .. } => Some(slope.abs()),
            Vorticity::Sine { amplitude, frequency, .. } => Some((*amplitude * *frequency).abs()),
            Vorticity::Piecewise(p) => {
                // Derivative extremes are sampled densely on each piece.
                let mut best = T::zero();
                for (i, w) in p.breaks.windows(2).enumerate() {
                    for n in 0..=64 {
                        let t = (w[1] - w[0]) * T::from_usize_lossy(n) / T::lit(64.0);
                        best = best.max(p.piece(i, t)[1].abs());
                    }
                }
                Some(best)
            }
            Vorticity::Custom(_) => None,
        }
    }

    /// Whether `gamma` vanishes identically.
    pub fn is_zero(&self) -> bool {
        matches!(self, Vorticity::Constant(c) if *c == T::zero())
    }

    /// Whether `gamma'` vanishes identically.
    pub fn has_zero_slope(&self) -> bool {
        matches!(self, Vorticity::Constant(_)) || matches!(self, Vorticity::Affine { slope, .. } if *slope == T::zero())
    }
}

/// Laminar profile `psi^lambda` on the grid `y_j = -h + j h / M`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaminarFlow<T> {
    pub lambda: T,
    pub depth: T,
    pub rows: usize,
    pub psi: Vec<T>,
    pub psi_y: Vec<T>,
    /// `d psi / d lambda` and its y-derivative.
    pub dpsi: Vec<T>,
    pub dpsi_y: Vec<T>,
    /// Mass flux `m = -psi(-h)`.
    pub m: T,
}

impl<T: Real> LaminarFlow<T> {
    pub fn dy(&self) -> T {
        self.depth / T::from_usize_lossy(self.rows)
    }

    pub fn y(&self, j: usize) -> T {
        if j == self.rows {
            T::zero()
        } else {
            -self.depth + T::from_usize_lossy(j) * self.dy()
        }
    }

    /// `dm/dlambda = -d psi/d lambda (-h)`.
    pub fn dm_dlambda(&self) -> T {
        -self.dpsi[0]
    }

    pub fn psi_y_range(&self) -> (T, T) {
        self.psi_y.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), v| (a.min(*v), b.max(*v)))
    }

    /// Sign changes of `psi_y` along the grid (critical layers of the laminar flow).
    pub fn critical_layer_count(&self) -> usize {
        let mut count = 0;
        let mut last = T::zero();
        for v in &self.psi_y {
            if *v != T::zero() {
                if last != T::zero() && (*v > T::zero()) != (last > T::zero()) {
                    count += 1;
                }
                last = *v;
            }
        }
        count
    }

    /// Inf and sup of `gamma'(psi^lambda)` over the grid.
    pub fn gamma_prime_range(&self, gamma: &Vorticity<T>) -> (T, T) {
        self.psi.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), s| {
            let g = gamma.d1(*s);
            (a.min(g), b.max(g))
        })
    }
}

fn rk4<T: Real, const D: usize>(y: [T; D], t: T, dt: T, f: impl Fn(T, &[T; D]) -> [T; D]) -> [T; D] {
    let half = T::lit(0.5);
    let add = |a: &[T; D], b: &[T; D], s: T| -> [T; D] {
        let mut out = *a;
        for i in 0..D {
            out[i] = a[i] + s * b[i];
        }
        out
    };
    let k1 = f(t, &y);
    let k2 = f(t + half * dt, &add(&y, &k1, half * dt));
    let k3 = f(t + half * dt, &add(&y, &k2, half * dt));
    let k4 = f(t + dt, &add(&y, &k3, dt));
    let six = T::lit(6.0);
    let mut out = y;
    for i in 0..D {
        out[i] = y[i] + dt / six * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
    }
    out
}

/// Integrates `psi'' = -gamma(psi)`, `psi(0) = 0`, `psi'(0) = lambda`, and
/// the variational equation for `d psi / d lambda`, from `y = 0` down to `-h`
/// with `rows` classical RK4 steps.
pub fn solve_laminar<T: Real>(gamma: &Vorticity<T>, lambda: T, h: T, rows: usize) -> Result<LaminarFlow<T>> {
    if rows < 16 {
        return Err(Error::InvalidArgument(format!("laminar grid needs at least 16 steps, got {rows}")));
    }
    if !lambda.is_finite() || !(h > T::zero()) {
        return Err(Error::InvalidArgument("lambda must be finite and h positive".into()));
    }
    let dy = h / T::from_usize_lossy(rows);
    let mut psi = vec![T::zero(); rows + 1];
    let mut psi_y = vec![T::zero(); rows + 1];
    let mut dpsi = vec![T::zero(); rows + 1];
    let mut dpsi_y = vec![T::zero(); rows + 1];
    let mut state = [T::zero(), lambda, T::zero(), T::one()];
    let store = |j: usize, s: &[T; 4], psi: &mut [T], psi_y: &mut [T], dpsi: &mut [T], dpsi_y: &mut [T]| {
        psi[j] = s[0];
        psi_y[j] = s[1];
        dpsi[j] = s[2];
        dpsi_y[j] = s[3];
    };
    store(rows, &state, &mut psi, &mut psi_y, &mut dpsi, &mut dpsi_y);
    for j in (0..rows).rev() {
        let y = -h + T::from_usize_lossy(j + 1) * dy;
        state = rk4(state, y, -dy, |_, s| {
            let [g, g1, _] = gamma.eval(s[0]);
            [s[1], -g, s[3], -g1 * s[2]]
        });
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration { y: (-h + T::from_usize_lossy(j) * dy).to_f64().unwrap_or(f64::NAN) });
        }
        store(j, &state, &mut psi, &mut psi_y, &mut dpsi, &mut dpsi_y);
    }
    let m = -psi[0];
    Ok(LaminarFlow { lambda, depth: h, rows, psi, psi_y, dpsi, dpsi_y, m })
}

/// Quintic Hermite midpoint value from values, slopes and second derivatives
/// at the two ends of an interval of length `step`.
fn hermite_mid<T: Real>(f: [T; 2], d: [T; 2], s: [T; 2], step: T) -> T {
    (f[0] + f[1]) * T::lit(0.5) + step * (d[0] - d[1]) * T::lit(5.0 / 32.0) + step * step * (s[0] + s[1]) / T::lit(64.0)
}

/// Solution of `beta'' + (gamma'(psi^lambda) + mu) beta = 0`, `beta(-h) = 0`,
/// `beta(0) = 1`, together with its lambda-derivative at the surface.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaProfile<T> {
    pub mu: T,
    pub lambda: T,
    /// Normalized profile on the grid, or the raw unit-slope shot when the
    /// problem is on the Dirichlet spectrum.
    pub beta: Vec<T>,
    pub beta_y_top: T,
    /// `d/d lambda` of `beta'(0)`.
    pub dbeta_y_top: T,
    pub in_dirichlet_spectrum: bool,
    /// Interior sign changes of the shot solution.
    pub zeros: usize,
}

/// Shoots from `y = -h` with unit slope and rescales to `beta(0) = 1`.
pub fn solve_beta<T: Real>(gamma: &Vorticity<T>, mu: T, laminar: &LaminarFlow<T>) -> BetaProfile<T> {
    let rows = laminar.rows;
    let dy = laminar.dy();
    let half = T::lit(0.5);
    // Second derivatives of psi and d psi / d lambda at the nodes.
    let g: Vec<[T; 3]> = laminar.psi.iter().map(|s| gamma.eval(*s)).collect();
    let mut shot = vec![T::zero(); rows + 1];
    // state: beta, beta', f, f' with f = d beta_shot / d lambda.
    let mut state = [T::zero(), T::one(), T::zero(), T::zero()];
    for j in 0..rows {
        let mid_psi = hermite_mid(
            [laminar.psi[j], laminar.psi[j + 1]],
            [laminar.psi_y[j], laminar.psi_y[j + 1]],
            [-g[j][0], -g[j + 1][0]],
            dy,
        );
        let mid_dpsi = hermite_mid(
            [laminar.dpsi[j], laminar.dpsi[j + 1]],
            [laminar.dpsi_y[j], laminar.dpsi_y[j + 1]],
            [-g[j][1] * laminar.dpsi[j], -g[j + 1][1] * laminar.dpsi[j + 1]],
            dy,
        );
        let gm = gamma.eval(mid_psi);
        let coeff = |t: T| -> ([T; 3], T) {
            if t == T::zero() {
                (g[j], laminar.dpsi[j])
            } else if t == half {
                (gm, mid_dpsi)
            } else {
                (g[j + 1], laminar.dpsi[j + 1])
            }
        };
        state = rk4(state, T::zero(), T::one(), |t, s| {
            let (gg, dp) = coeff(t);
            let a = gg[1] + mu;
            [dy * s[1], -dy * a * s[0], dy * s[3], -dy * (a * s[2] + gg[2] * dp * s[0])]
        });
        shot[j + 1] = state[0];
    }
    let top = state[0];
    let slope = state[1];
    let (f_top, f_slope) = (state[2], state[3]);
    let sup = shot.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut zeros = 0;
    for w in shot[1..rows].windows(2) {
        if (w[0] > T::zero()) != (w[1] > T::zero()) {
            zeros += 1;
        }
    }
    if top.abs() < T::lit(1e-10) * sup {
        return BetaProfile {
            mu,
            lambda: laminar.lambda,
            beta: shot,
            beta_y_top: T::infinity(),
            dbeta_y_top: T::nan(),
            in_dirichlet_spectrum: true,
            zeros,
        };
    }
    let beta: Vec<T> = shot.iter().map(|v| *v / top).collect();
    let beta_y_top = slope / top;
    let dbeta_y_top = f_slope / top - slope * f_top / (top * top);
    BetaProfile { mu, lambda: laminar.lambda, beta, beta_y_top, dbeta_y_top, in_dirichlet_spectrum: false, zeros }
}

/// `d(mu, lambda)` and its lambda-derivative; `d` is `None` on the Dirichlet
/// spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionResult<T> {
    pub mu: T,
    pub lambda: T,
    pub d: Option<T>,
    pub d_lambda: Option<T>,
    pub beta: BetaProfile<T>,
}

impl<T: Real> DispersionResult<T> {
    pub fn in_dirichlet_spectrum(&self) -> bool {
        self.beta.in_dirichlet_spectrum
    }
}

/// Physical and numerical inputs shared by dispersion computations.
#[derive(Clone, Debug)]
pub struct DispersionSetup<T> {
    pub gamma: Vorticity<T>,
    pub depth: T,
    pub period: T,
    pub gravity: T,
    /// RK4 steps across the depth.
    pub steps: usize,
}

impl<T: Real> DispersionSetup<T> {
    pub fn nu(&self) -> T {
        T::TAU() / self.period
    }

    pub fn dispersion(&self, lambda: T, mu: T) -> Result<DispersionResult<T>> {
        dispersion(&self.gamma, lambda, mu, self.depth, self.gravity, self.steps)
    }

    /// `d(-(k nu)^2, lambda)`.
    pub fn mode(&self, k: usize, lambda: T) -> Result<DispersionResult<T>> {
        let kn = T::from_usize_lossy(k) * self.nu();
        self.dispersion(lambda, -kn * kn)
    }
}

pub fn dispersion<T: Real>(gamma: &Vorticity<T>, lambda: T, mu: T, h: T, g: T, steps: usize) -> Result<DispersionResult<T>> {
    if lambda == T::zero() {
        return Err(Error::InvalidArgument("dispersion relation needs lambda != 0".into()));
    }
    let laminar = solve_laminar(gamma, lambda, h, steps)?;
    Ok(dispersion_with(gamma, &laminar, mu, g))
}

/// As [`dispersion`] but reusing a laminar profile.
pub fn dispersion_with<T: Real>(gamma: &Vorticity<T>, laminar: &LaminarFlow<T>, mu: T, g: T) -> DispersionResult<T> {
    let lambda = laminar.lambda;
    let beta = solve_beta(gamma, mu, laminar);
    let g0 = gamma.value(T::zero());
    let (d, d_lambda) = if beta.in_dirichlet_spectrum {
        (None, None)
    } else {
        let l2 = lambda * lambda;
        let d = beta.beta_y_top + g0 / lambda - g / l2;
        let dl = beta.dbeta_y_top - g0 / l2 + T::lit(2.0) * g / (l2 * lambda);
        (Some(d), Some(dl))
    };
    DispersionResult { mu, lambda, d, d_lambda, beta }
}

/// Magnitude scale of the terms making up `d`, for relative root tests.
fn d_scale<T: Real>(r: &DispersionResult<T>, gamma0: T, g: T) -> T {
    let l = r.lambda;
    r.beta.beta_y_top.abs() + (gamma0 / l).abs() + g / (l * l)
}

/// Options for the sign-change scan.
#[derive(Clone, Copy, Debug)]
pub struct RootScan {
    pub samples: usize,
    pub bisections: usize,
    /// Relative size of `|d|` accepted at a polished root (poles are rejected).
    pub root_tolerance: f64,
    pub k_max: usize,
}

impl Default for RootScan {
    fn default() -> Self {
        Self { samples: 400, bisections: 60, root_tolerance: 1e-6, k_max: 64 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BifurcationPoint<T> {
    pub k: usize,
    pub lambda: T,
    pub d_lambda: T,
    /// Wavenumbers `k` whose `d(-(k nu)^2, lambda)` vanishes at this lambda.
    pub kernel_modes: Vec<usize>,
}

impl<T: Real> BifurcationPoint<T> {
    pub fn multiplicity(&self) -> usize {
        self.kernel_modes.len()
    }
}

/// All roots of `lambda -> d(-(k nu)^2, lambda)` inside `bracket`.
pub fn find_bifurcation<T: Real>(setup: &DispersionSetup<T>, k: usize, bracket: (T, T), scan: &RootScan) -> Result<Vec<BifurcationPoint<T>>> {
    let (lo, hi) = bracket;
    if !(lo < hi) || (lo <= T::zero() && hi >= T::zero()) {
        return Err(Error::InvalidArgument("lambda bracket must be ordered and exclude 0".into()));
    }
    if k == 0 || scan.samples < 2 {
        return Err(Error::InvalidArgument("need k >= 1 and at least 2 samples".into()));
    }
    let n = scan.samples;
    let lambdas: Vec<T> = (0..n)
        .map(|i| lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1))
        .collect();
    let values: Vec<Option<T>> = lambdas
        .par_iter()
        .map(|l| setup.mode(k, *l).ok().and_then(|r| r.d))
        .collect();
    let g0 = setup.gamma.value(T::zero());
    let mut out = Vec::new();
    for i in 0..n - 1 {
        let (Some(a), Some(b)) = (values[i], values[i + 1]) else { continue };
        if a == T::zero() || (a > T::zero()) != (b > T::zero()) {
            let (mut l0, mut l1, mut f0) = (lambdas[i], lambdas[i + 1], a);
            if a != T::zero() {
                for _ in 0..scan.bisections {
                    let mid = (l0 + l1) * T::lit(0.5);
                    if mid == l0 || mid == l1 {
                        break;
                    }
                    match setup.mode(k, mid)?.d {
                        Some(fm) if (fm > T::zero()) == (f0 > T::zero()) && fm != T::zero() => {
                            l0 = mid;
                            f0 = fm;
                        }
                        Some(_) => l1 = mid,
                        None => break,
                    }
                }
            }
            let root = if a == T::zero() { l0 } else { (l0 + l1) * T::lit(0.5) };
            let r = setup.mode(k, root)?;
            let Some(d) = r.d else { continue };
            if d.abs() > T::lit(scan.root_tolerance) * d_scale(&r, g0, setup.gravity) {
                continue; // a pole of d, not a root
            }
            let kernel = kernel_multiplicity(setup, root, scan)?;
            out.push(BifurcationPoint { k, lambda: root, d_lambda: r.d_lambda.unwrap_or(T::nan()), kernel_modes: kernel });
        }
    }
    Ok(out)
}

/// Wavenumbers `k in 1..=k_max` with `d(-(k nu)^2, lambda) = 0` up to the scan
/// tolerance. Fails when `lambda` sits on the Dirichlet spectrum at `mu = 0`.
pub fn kernel_multiplicity<T: Real>(setup: &DispersionSetup<T>, lambda: T, scan: &RootScan) -> Result<Vec<usize>> {
    let laminar = solve_laminar(&setup.gamma, lambda, setup.depth, setup.steps)?;
    let at_zero = solve_beta(&setup.gamma, T::zero(), &laminar);
    if at_zero.in_dirichlet_spectrum {
        return Err(Error::DirichletSpectrum { lambda: lambda.to_f64().unwrap_or(f64::NAN) });
    }
    let g0 = setup.gamma.value(T::zero());
    let nu = setup.nu();
    let hits: Vec<usize> = (1..=scan.k_max)
        .into_par_iter()
        .filter(|&k| {
            let kn = T::from_usize_lossy(k) * nu;
            let r = dispersion_with(&setup.gamma, &laminar, -kn * kn, setup.gravity);
            match r.d {
                Some(d) => d.abs() <= T::lit(scan.root_tolerance) * d_scale(&r, g0, setup.gravity),
                None => false,
            }
        })
        .collect();
    Ok(hits)
}

/// `v(z) = sqrt(-z) coth(h sqrt(-z))`, continued analytically to `z >= 0`.
pub fn prufer_comparison<T: Real>(z: T, h: T) -> T {
    if z < T::zero() {
        let r = (-z).sqrt();
        r * (h * r).coth_clamped()
    } else if z == T::zero() {
        T::one() / h
    } else {
        let r = z.sqrt();
        r / (h * r).tan()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PruferSample<T> {
    pub mu: T,
    pub beta_y_top: T,
    pub lower: T,
    pub upper: T,
    /// False when the sample is on the Dirichlet spectrum or the comparison
    /// arguments straddle a pole of `v`.
    pub applicable: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PruferReport<T> {
    pub gamma_prime_inf: T,
    pub gamma_prime_sup: T,
    pub samples: Vec<PruferSample<T>>,
}

impl<T: Real> PruferReport<T> {
    pub fn violations(&self) -> usize {
        self.samples.iter().filter(|s| s.applicable && !s.holds).count()
    }
}

/// Checks `v(mu + sup gamma') <= beta_y(0) <= v(mu + inf gamma')` on the
/// given `mu` samples, with `gamma'` ranging over the laminar profile.
pub fn prufer_bounds_check<T: Real>(gamma: &Vorticity<T>, lambda: T, mus: &[T], h: T, steps: usize) -> Result<PruferReport<T>> {
    let laminar = solve_laminar(gamma, lambda, h, steps)?;
    let (inf, sup) = laminar.gamma_prime_range(gamma);
    let branch = |z: T| -> usize {
        // Number of constant-coefficient Dirichlet eigenvalues below z.
        if z <= T::zero() {
            0
        } else {
            (z.sqrt() * h / T::PI()).floor().to_usize().unwrap_or(usize::MAX)
        }
    };
    let samples = mus
        .par_iter()
        .map(|&mu| {
            let b = solve_beta(gamma, mu, &laminar);
            let lower = prufer_comparison(mu + sup, h);
            let upper = prufer_comparison(mu + inf, h);
            let applicable = !b.in_dirichlet_spectrum && branch(mu + sup) == branch(mu + inf) && branch(mu + inf) == b.zeros;
            let tol = T::lit(1e-8) * (T::one() + b.beta_y_top.abs());
            let holds = b.beta_y_top >= lower - tol && b.beta_y_top <= upper + tol;
            PruferSample { mu, beta_y_top: b.beta_y_top, lower, upper, applicable, holds }
        })
        .collect();
    Ok(PruferReport { gamma_prime_inf: inf, gamma_prime_sup: sup, samples })
}
