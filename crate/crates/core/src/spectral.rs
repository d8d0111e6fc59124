//! Fourier calculus for L-periodic functions and their harmonic extension to
//! the strip `R x (-h, 0)`.
//!
//! Functions of `x` are stored as real cosine/sine coefficient arrays for
//! wavenumbers `0..=N`. Strip fields keep one y-profile per x-mode on a uniform
//! grid of `M + 1` points from `y = -h` to `y = 0`.

use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    fn flipped(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
            Parity::None => Parity::None,
        }
    }
}

/// Truncated Fourier series `sum_k a_k cos(k nu x) + b_k sin(k nu x)`,
/// `nu = 2 pi / L`, `k = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicScalar<T> {
    period: T,
    cos: Vec<T>,
    sin: Vec<T>,
    parity: Parity,
}

impl<T: Real> PeriodicScalar<T> {
    pub fn zeros(period: T, order: usize, parity: Parity) -> Self {
        assert!(order >= 1, "truncation order must be at least 1");
        assert!(period > T::zero(), "period must be positive");
        Self { period, cos: vec![T::zero(); order + 1], sin: vec![T::zero(); order + 1], parity }
    }

    /// Even function from cosine coefficients `a_0..=a_N`.
    pub fn even(period: T, cos: Vec<T>) -> Self {
        let n = cos.len();
        let mut out = Self::zeros(period, n.saturating_sub(1), Parity::Even);
        out.cos = cos;
        out
    }

    /// Odd function from sine coefficients `b_0..=b_N`; `b_0` is ignored.
    pub fn odd(period: T, mut sin: Vec<T>) -> Self {
        let n = sin.len();
        sin[0] = T::zero();
        let mut out = Self::zeros(period, n.saturating_sub(1), Parity::Odd);
        out.sin = sin;
        out
    }

    pub fn general(period: T, cos: Vec<T>, mut sin: Vec<T>) -> Self {
        assert_eq!(cos.len(), sin.len());
        sin[0] = T::zero();
        let mut out = Self::zeros(period, cos.len() - 1, Parity::None);
        out.cos = cos;
        out.sin = sin;
        out
    }

    /// Single mode `amplitude * cos(k nu x)`.
    pub fn cosine_mode(period: T, order: usize, k: usize, amplitude: T) -> Self {
        let mut out = Self::zeros(period, order, Parity::Even);
        out.cos[k] = amplitude;
        out
    }

    /// Single mode `amplitude * sin(k nu x)`.
    pub fn sine_mode(period: T, order: usize, k: usize, amplitude: T) -> Self {
        let mut out = Self::zeros(period, order, Parity::Odd);
        out.sin[k] = amplitude;
        out
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn nu(&self) -> T {
        T::TAU() / self.period
    }

    pub fn order(&self) -> usize {
        self.cos.len() - 1
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn cos(&self) -> &[T] {
        &self.cos
    }

    pub fn sin(&self) -> &[T] {
        &self.sin
    }

    /// Mutable access to the cosine coefficients. Setting nonzero values on an
    /// odd function breaks the parity tag; callers own that invariant.
    pub fn cos_mut(&mut self) -> &mut [T] {
        &mut self.cos
    }

    pub fn sin_mut(&mut self) -> &mut [T] {
        &mut self.sin
    }

    pub fn mean(&self) -> T {
        self.cos[0]
    }

    pub fn is_zero_mean(&self) -> bool {
        self.cos[0] == T::zero()
    }

    pub fn eval(&self, x: T) -> T {
        let nu = self.nu();
        let mut acc = self.cos[0];
        for k in 1..=self.order() {
            let arg = T::from_usize_lossy(k) * nu * x;
            acc = acc + self.cos[k] * arg.cos() + self.sin[k] * arg.sin();
        }
        acc
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> T {
        self.cos.iter().chain(self.sin.iter()).fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        out.cos.iter_mut().chain(out.sin.iter_mut()).for_each(|v| *v = *v * factor);
        out
    }

    /// `self + factor * other`; parity is kept only if both agree.
    pub fn axpy(&self, factor: T, other: &Self) -> Self {
        assert_eq!(self.order(), other.order(), "truncation orders differ");
        let mut out = self.clone();
        for k in 0..=self.order() {
            out.cos[k] = out.cos[k] + factor * other.cos[k];
            out.sin[k] = out.sin[k] + factor * other.sin[k];
        }
        if self.parity != other.parity {
            out.parity = Parity::None;
        }
        out
    }

    /// Same function at a different truncation order (padding or cutting).
    pub fn with_order(&self, order: usize) -> Self {
        let mut out = Self::zeros(self.period, order, self.parity);
        for k in 0..=order.min(self.order()) {
            out.cos[k] = self.cos[k];
            out.sin[k] = self.sin[k];
        }
        out
    }

    fn map_modes(&self, parity: Parity, f: impl Fn(usize, T, T) -> (T, T)) -> Self {
        let mut out = Self::zeros(self.period, self.order(), parity);
        for k in 1..=self.order() {
            let (c, s) = f(k, self.cos[k], self.sin[k]);
            out.cos[k] = c;
            out.sin[k] = s;
        }
        out
    }
}

fn require_zero_mean<T: Real>(u: &PeriodicScalar<T>, op: &'static str) -> Result<()> {
    if u.is_zero_mean() {
        Ok(())
    } else {
        Err(Error::NonzeroMean { op, mean: u.mean().to_f64().unwrap_or(f64::NAN) })
    }
}

/// Periodic Hilbert transform on the strip of depth `h`: multiplier
/// `-i coth(k nu h)`, so `cos -> coth sin` and `sin -> -coth cos`.
pub fn hilbert_strip<T: Real>(u: &PeriodicScalar<T>, h: T) -> Result<PeriodicScalar<T>> {
    require_zero_mean(u, "hilbert_strip")?;
    let nu = u.nu();
    Ok(u.map_modes(u.parity.flipped(), |k, a, b| {
        let c = (T::from_usize_lossy(k) * nu * h).coth_clamped();
        (-b * c, a * c)
    }))
}

/// Inverse of [`hilbert_strip`]: multiplier `i tanh(k nu h)`.
pub fn hilbert_strip_inverse<T: Real>(u: &PeriodicScalar<T>, h: T) -> Result<PeriodicScalar<T>> {
    require_zero_mean(u, "hilbert_strip_inverse")?;
    let nu = u.nu();
    Ok(u.map_modes(u.parity.flipped(), |k, a, b| {
        let t = (T::from_usize_lossy(k) * nu * h).tanh();
        (b * t, -a * t)
    }))
}

pub fn mean<T: Real>(u: &PeriodicScalar<T>) -> T {
    u.mean()
}

/// `u - <u>`.
pub fn project_zero_mean<T: Real>(u: &PeriodicScalar<T>) -> PeriodicScalar<T> {
    let mut out = u.clone();
    out.cos[0] = T::zero();
    out
}

pub fn differentiate<T: Real>(u: &PeriodicScalar<T>) -> PeriodicScalar<T> {
    let nu = u.nu();
    u.map_modes(u.parity.flipped(), |k, a, b| {
        let kn = T::from_usize_lossy(k) * nu;
        (kn * b, -kn * a)
    })
}

/// Zero-mean antiderivative, symbol `(i k nu)^{-1}`.
pub fn antiderivative<T: Real>(u: &PeriodicScalar<T>) -> Result<PeriodicScalar<T>> {
    require_zero_mean(u, "antiderivative")?;
    let nu = u.nu();
    Ok(u.map_modes(u.parity.flipped(), |k, a, b| {
        let kn = T::from_usize_lossy(k) * nu;
        (-b / kn, a / kn)
    }))
}

/// Field on the strip stored as per-mode y-profiles. Even fields expand in
/// `cos(k nu x)`, odd ones in `sin(k nu x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StripField<T> {
    period: T,
    depth: T,
    rows: usize,
    parity: Parity,
    profiles: Vec<Vec<T>>,
}

impl<T: Real> StripField<T> {
    pub fn zeros(period: T, depth: T, order: usize, rows: usize, parity: Parity) -> Self {
        assert!(parity != Parity::None, "strip fields are even or odd in x");
        assert!(rows >= 4, "need at least 4 y-intervals");
        assert!(depth > T::zero() && period > T::zero());
        Self { period, depth, rows, parity, profiles: vec![vec![T::zero(); rows + 1]; order + 1] }
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn depth(&self) -> T {
        self.depth
    }

    pub fn nu(&self) -> T {
        T::TAU() / self.period
    }

    pub fn order(&self) -> usize {
        self.profiles.len() - 1
    }

    /// Number of y-intervals `M`; the grid has `M + 1` points.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn dy(&self) -> T {
        self.depth / T::from_usize_lossy(self.rows)
    }

    /// `y_j = -h + j h / M`; the endpoints are exactly `-h` and `0`.
    pub fn y(&self, j: usize) -> T {
        if j == self.rows {
            T::zero()
        } else {
            -self.depth + T::from_usize_lossy(j) * self.dy()
        }
    }

    pub fn profile(&self, k: usize) -> &[T] {
        &self.profiles[k]
    }

    pub fn profile_mut(&mut self, k: usize) -> &mut [T] {
        &mut self.profiles[k]
    }

    pub fn profiles(&self) -> &[Vec<T>] {
        &self.profiles
    }

    fn trace(&self, j: usize) -> PeriodicScalar<T> {
        let coeffs: Vec<T> = self.profiles.iter().map(|p| p[j]).collect();
        match self.parity {
            Parity::Odd => PeriodicScalar::odd(self.period, coeffs),
            _ => PeriodicScalar::even(self.period, coeffs),
        }
    }

    pub fn trace_top(&self) -> PeriodicScalar<T> {
        self.trace(self.rows)
    }

    pub fn trace_bottom(&self) -> PeriodicScalar<T> {
        self.trace(0)
    }

    /// Value at `(x, y_j)`.
    pub fn eval(&self, x: T, j: usize) -> T {
        self.trace(j).eval(x)
    }

    pub fn max_abs(&self) -> T {
        self.profiles.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn has_zero_traces(&self) -> bool {
        self.profiles.iter().all(|p| p[0] == T::zero() && p[self.rows] == T::zero())
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        out.profiles.iter_mut().flatten().for_each(|v| *v = *v * factor);
        out
    }

    pub fn axpy(&self, factor: T, other: &Self) -> Self {
        assert_eq!(self.order(), other.order());
        assert_eq!(self.rows, other.rows);
        let mut out = self.clone();
        for (p, q) in out.profiles.iter_mut().zip(&other.profiles) {
            for (a, b) in p.iter_mut().zip(q) {
                *a = *a + factor * *b;
            }
        }
        out
    }

    /// Profile values multiplied pointwise by a function of `y` alone.
    pub fn times_profile(&self, g: &[T]) -> Self {
        let mut out = self.clone();
        for p in out.profiles.iter_mut() {
            for (a, b) in p.iter_mut().zip(g) {
                *a = *a * *b;
            }
        }
        out
    }
}

/// Shared discretization: period, depth, truncation `N`, y-intervals `M`, and
/// the tables every nonlinear evaluation needs.
///
/// The collocation grid covers half a period, `x_i = i L / (4N)` for
/// `i = 0..=2N`; by parity this represents the `4N`-point full grid, which
/// exceeds the 3/2 padding needed for quadratic products of `N` modes.
#[derive(Clone, Debug)]
pub struct Discretization<T> {
    period: T,
    depth: T,
    order: usize,
    rows: usize,
    cos_tab: Vec<T>,
    sin_tab: Vec<T>,
    ring: Vec<T>,
    weights: Vec<T>,
    ext_value: Vec<Vec<T>>,
    ext_slope: Vec<Vec<T>>,
}

impl<T: Real> Discretization<T> {
    pub fn new(period: T, depth: T, order: usize, rows: usize) -> Result<Self> {
        if !(period > T::zero()) || !(depth > T::zero()) {
            return Err(Error::InvalidArgument("period and depth must be positive".into()));
        }
        if order < 1 || rows < 8 {
            return Err(Error::InvalidArgument(format!(
                "resolution N = {order}, M = {rows} too small (need N >= 1, M >= 8)"
            )));
        }
        let full = 4 * order;
        let half = 2 * order + 1;
        let ring: Vec<T> = (0..full)
            .map(|n| (T::TAU() * T::from_usize_lossy(n) / T::from_usize_lossy(full)).cos())
            .collect();
        let ring_sin: Vec<T> = (0..full)
            .map(|n| (T::TAU() * T::from_usize_lossy(n) / T::from_usize_lossy(full)).sin())
            .collect();
        let mut cos_tab = vec![T::zero(); half * (order + 1)];
        let mut sin_tab = vec![T::zero(); half * (order + 1)];
        for i in 0..half {
            for k in 0..=order {
                cos_tab[i * (order + 1) + k] = ring[(i * k) % full];
                sin_tab[i * (order + 1) + k] = ring_sin[(i * k) % full];
            }
        }
        let two = T::lit(2.0);
        let mut weights = vec![two; half];
        weights[0] = T::one();
        weights[half - 1] = T::one();

        let nu = T::TAU() / period;
        let dy = depth / T::from_usize_lossy(rows);
        let mut ext_value = vec![vec![T::zero(); rows + 1]; order + 1];
        let mut ext_slope = vec![vec![T::zero(); rows + 1]; order + 1];
        for j in 0..=rows {
            let t = T::from_usize_lossy(j) * dy;
            ext_value[0][j] = t;
            ext_slope[0][j] = T::one();
        }
        for k in 1..=order {
            let a = T::from_usize_lossy(k) * nu;
            let denom = -(-two * a * depth).exp_m1();
            for j in 0..=rows {
                let t = T::from_usize_lossy(j) * dy;
                let decay = (a * (t - depth)).exp();
                let tail = (-two * a * t).exp();
                ext_value[k][j] = decay * (T::one() - tail) / denom;
                ext_slope[k][j] = a * decay * (T::one() + tail) / denom;
            }
        }
        Ok(Self { period, depth, order, rows, cos_tab, sin_tab, ring, weights, ext_value, ext_slope })
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn depth(&self) -> T {
        self.depth
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn nu(&self) -> T {
        T::TAU() / self.period
    }

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

    /// Number of half-period collocation points.
    pub fn grid_len(&self) -> usize {
        2 * self.order + 1
    }

    pub fn grid_x(&self, i: usize) -> T {
        self.period * T::from_usize_lossy(i) / T::from_usize_lossy(4 * self.order)
    }

    pub fn grid(&self) -> Vec<T> {
        (0..self.grid_len()).map(|i| self.grid_x(i)).collect()
    }

    /// `sinh(k nu (y_j + h)) / sinh(k nu h)` (and `y_j + h` for `k = 0`).
    pub fn extension_profile(&self, k: usize) -> &[T] {
        &self.ext_value[k]
    }

    /// y-derivative of [`Self::extension_profile`].
    pub fn extension_slope(&self, k: usize) -> &[T] {
        &self.ext_slope[k]
    }

    pub fn zero_field(&self, parity: Parity) -> StripField<T> {
        StripField::zeros(self.period, self.depth, self.order, self.rows, parity)
    }

    pub fn zero_scalar(&self, parity: Parity) -> PeriodicScalar<T> {
        PeriodicScalar::zeros(self.period, self.order, parity)
    }

    /// Samples `sum_k c_k cos(k nu x_i)` on the collocation grid.
    pub fn synth_cos(&self, coeffs: &[T], out: &mut [T]) {
        let n1 = self.order + 1;
        let kmax = coeffs.len().min(n1);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.cos_tab[i * n1..i * n1 + kmax];
            *o = row.iter().zip(coeffs).fold(T::zero(), |acc, (c, a)| acc + *c * *a);
        }
    }

    /// Samples `sum_k c_k sin(k nu x_i)` on the collocation grid.
    pub fn synth_sin(&self, coeffs: &[T], out: &mut [T]) {
        let n1 = self.order + 1;
        let kmax = coeffs.len().min(n1);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.sin_tab[i * n1..i * n1 + kmax];
            *o = row.iter().zip(coeffs).fold(T::zero(), |acc, (c, a)| acc + *c * *a);
        }
    }

    /// Cosine coefficients `0..=N` of an even function sampled on the grid.
    pub fn project_cos(&self, values: &[T], out: &mut [T]) {
        let n1 = self.order + 1;
        let full = T::from_usize_lossy(4 * self.order);
        out.iter_mut().for_each(|o| *o = T::zero());
        for (i, v) in values.iter().enumerate() {
            let wv = self.weights[i] * *v;
            let row = &self.cos_tab[i * n1..(i + 1) * n1];
            for (o, c) in out.iter_mut().zip(row) {
                *o = *o + wv * *c;
            }
        }
        let two = T::lit(2.0);
        out[0] = out[0] / full;
        for o in out.iter_mut().skip(1) {
            *o = two * *o / full;
        }
    }

    /// Sine coefficients `0..=N` of an odd function sampled on the grid.
    pub fn project_sin(&self, values: &[T], out: &mut [T]) {
        let n1 = self.order + 1;
        let full = T::from_usize_lossy(4 * self.order);
        out.iter_mut().for_each(|o| *o = T::zero());
        for (i, v) in values.iter().enumerate() {
            let wv = self.weights[i] * *v;
            let row = &self.sin_tab[i * n1..(i + 1) * n1];
            for (o, s) in out.iter_mut().zip(row) {
                *o = *o + wv * *s;
            }
        }
        let two = T::lit(2.0);
        out[0] = T::zero();
        for o in out.iter_mut().skip(1) {
            *o = two * *o / full;
        }
    }

    pub fn to_grid(&self, u: &PeriodicScalar<T>) -> Vec<T> {
        let mut a = vec![T::zero(); self.grid_len()];
        let mut b = vec![T::zero(); self.grid_len()];
        self.synth_cos(u.cos(), &mut a);
        self.synth_sin(u.sin(), &mut b);
        a.iter().zip(&b).map(|(x, y)| *x + *y).collect()
    }

    pub fn project_even(&self, values: &[T]) -> PeriodicScalar<T> {
        let mut c = vec![T::zero(); self.order + 1];
        self.project_cos(values, &mut c);
        PeriodicScalar::even(self.period, c)
    }

    pub fn project_odd(&self, values: &[T]) -> PeriodicScalar<T> {
        let mut s = vec![T::zero(); self.order + 1];
        self.project_sin(values, &mut s);
        PeriodicScalar::odd(self.period, s)
    }

    /// Matrix of `v -> project_cos(c * v)` for cosine coefficient vectors `v`,
    /// row-major `(N+1) x (N+1)`, for grid samples `c` of an even function.
    pub fn product_matrix(&self, c: &[T], out: &mut [T]) {
        let n1 = self.order + 1;
        let full = 4 * self.order;
        let mut sums = vec![T::zero(); 2 * self.order + 1];
        for (m, s) in sums.iter_mut().enumerate() {
            let mut acc = T::zero();
            for (i, v) in c.iter().enumerate() {
                acc = acc + self.weights[i] * *v * self.ring[(m * i) % full];
            }
            *s = acc;
        }
        let fullt = T::from_usize_lossy(full);
        for k in 0..n1 {
            let scale = if k == 0 { T::one() } else { T::lit(2.0) } / fullt * T::lit(0.5);
            for l in 0..n1 {
                let d = k.abs_diff(l);
                out[k * n1 + l] = scale * (sums[d] + sums[k + l]);
            }
        }
    }
}

/// Values of a function on the half-period collocation grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    pub x: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn min(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, v| m.min(*v))
    }

    pub fn max(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, v| m.max(*v))
    }
}

/// `V[w + h]`: the harmonic function equal to `y + h` plus the extension of
/// `w` with `V = w + h` on top and `V = 0` at the bed.
pub fn harmonic_extension<T: Real>(w: &PeriodicScalar<T>, disc: &Discretization<T>) -> Result<StripField<T>> {
    require_zero_mean(w, "harmonic_extension")?;
    if w.parity() == Parity::Odd || w.sin().iter().any(|s| *s != T::zero()) {
        return Err(Error::InvalidArgument("harmonic_extension expects an even profile".into()));
    }
    let mut out = disc.zero_field(Parity::Even);
    out.profile_mut(0).copy_from_slice(disc.extension_profile(0));
    for k in 1..=w.order().min(disc.order()) {
        let a = w.cos()[k];
        for (o, s) in out.profile_mut(k).iter_mut().zip(disc.extension_profile(k)) {
            *o = a * *s;
        }
    }
    Ok(out)
}

/// Extension of a zero-mean even function without the linear part `y + h`.
pub(crate) fn extension_perturbation<T: Real>(w: &PeriodicScalar<T>, disc: &Discretization<T>) -> StripField<T> {
    let mut out = disc.zero_field(Parity::Even);
    for k in 1..=w.order().min(disc.order()) {
        let a = w.cos()[k];
        for (o, s) in out.profile_mut(k).iter_mut().zip(disc.extension_profile(k)) {
            *o = a * *s;
        }
    }
    out
}

/// Surface trace of `grad V`: `(w', 1 + C w')`.
pub fn surface_gradient<T: Real>(w: &PeriodicScalar<T>, h: T) -> Result<(PeriodicScalar<T>, PeriodicScalar<T>)> {
    require_zero_mean(w, "surface_gradient")?;
    let dw = differentiate(w);
    let mut vy = hilbert_strip(&project_zero_mean(&dw), h)?;
    vy.cos_mut()[0] = T::one();
    Ok((dw, vy))
}

/// `K(w) = sqrt((1 + C w')^2 + w'^2)` on the collocation grid.
pub fn metric_k<T: Real>(w: &PeriodicScalar<T>, disc: &Discretization<T>) -> Result<GridFunction<T>> {
    let (vx, vy) = surface_gradient(w, disc.depth())?;
    let a = disc.to_grid(&vx);
    let b = disc.to_grid(&vy);
    let values = a.iter().zip(&b).map(|(p, q)| p.hypot(*q)).collect();
    Ok(GridFunction { x: disc.grid(), values })
}

/// Samples of `x -> (x + C w(x), w(x) + h)` for `x = i L / samples`,
/// `i = 0..=samples`.
pub fn surface_curve<T: Real>(w: &PeriodicScalar<T>, h: T, samples: usize) -> Result<Vec<(T, T)>> {
    let cw = hilbert_strip(w, h)?;
    let l = w.period();
    Ok((0..=samples)
        .map(|i| {
            let x = l * T::from_usize_lossy(i) / T::from_usize_lossy(samples);
            (x + cw.eval(x), w.eval(x) + h)
        })
        .collect())
}

fn orient<T: Real>(a: (T, T), b: (T, T), c: (T, T)) -> T {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn within<T: Real>(a: (T, T), b: (T, T), p: (T, T)) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect<T: Real>(p1: (T, T), p2: (T, T), p3: (T, T), p4: (T, T)) -> bool {
    let d1 = orient(p3, p4, p1);
    let d2 = orient(p3, p4, p2);
    let d3 = orient(p1, p2, p3);
    let d4 = orient(p1, p2, p4);
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    (d1 == z && within(p3, p4, p1))
        || (d2 == z && within(p3, p4, p2))
        || (d3 == z && within(p1, p2, p3))
        || (d4 == z && within(p1, p2, p4))
}

/// Whether the periodic curve given by one period of samples (first and last
/// point one period apart) crosses itself or a neighbouring period copy.
pub fn curve_self_intersects<T: Real>(points: &[(T, T)], period: T) -> bool {
    let n = points.len() - 1;
    // Chain over three periods; segment g joins chain[g] and chain[g+1].
    let mut chain = Vec::with_capacity(3 * n + 1);
    for p in -1i32..=1 {
        let shift = T::from_i32(p).unwrap() * period;
        for pt in &points[..n] {
            chain.push((pt.0 + shift, pt.1));
        }
    }
    chain.push((points[n].0 + period, points[n].1));
    let segs = chain.len() - 1;
    let mut order: Vec<usize> = (0..segs).collect();
    let lo = |g: usize| chain[g].0.min(chain[g + 1].0);
    let hi = |g: usize| chain[g].0.max(chain[g + 1].0);
    order.sort_by(|a, b| lo(*a).partial_cmp(&lo(*b)).unwrap_or(std::cmp::Ordering::Equal));
    for (idx, &g) in order.iter().enumerate() {
        for &e in &order[idx + 1..] {
            if lo(e) > hi(g) {
                break;
            }
            // Only pairs with one segment in the middle copy are needed.
            let central = |s: usize| (n..2 * n).contains(&s);
            if g.abs_diff(e) <= 1 || !(central(g) || central(e)) {
                continue;
            }
            if segments_intersect(chain[g], chain[g + 1], chain[e], chain[e + 1]) {
                return true;
            }
        }
    }
    false
}
