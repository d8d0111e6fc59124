//! The nonlinear map `M`, the residual `F = (q, w, phi) - M(lambda, q, w, phi)`,
//! admissibility, and linearizations about laminar flows.

use crate::elliptic::{self, PoissonSolver, StripSamples};
use crate::laminar::{solve_laminar, LaminarFlow, Vorticity};
use crate::spectral::{
    self, antiderivative, hilbert_strip_inverse, project_zero_mean, Discretization, GridFunction, Parity,
    PeriodicScalar, StripField,
};
use crate::{Error, Margins, Real, Result};

/// Physical parameters, vorticity and discretization of one computation.
#[derive(Clone, Debug)]
pub struct Problem<T> {
    pub disc: Discretization<T>,
    pub solver: PoissonSolver<T>,
    pub gamma: Vorticity<T>,
    pub gravity: T,
    coth: Vec<T>,
    tanh: Vec<T>,
}

impl<T: Real> Problem<T> {
    pub fn new(gamma: Vorticity<T>, gravity: T, period: T, depth: T, order: usize, rows: usize) -> Result<Self> {
        if !(gravity > T::zero()) {
            return Err(Error::InvalidArgument("gravity must be positive".into()));
        }
        let disc = Discretization::new(period, depth, order, rows)?;
        let solver = PoissonSolver::new(&disc)?;
        let nu = disc.nu();
        let mut coth = vec![T::zero(); order + 1];
        let mut tanh = vec![T::zero(); order + 1];
        for k in 1..=order {
            let z = T::from_usize_lossy(k) * nu * depth;
            coth[k] = z.coth_clamped();
            tanh[k] = z.tanh();
        }
        Ok(Self { disc, solver, gamma, gravity, coth, tanh })
    }

    pub fn order(&self) -> usize {
        self.disc.order()
    }

    pub fn rows(&self) -> usize {
        self.disc.rows()
    }

    pub fn depth(&self) -> T {
        self.disc.depth()
    }

    pub fn period(&self) -> T {
        self.disc.period()
    }

    pub fn nu(&self) -> T {
        self.disc.nu()
    }

    /// Same physics at another resolution.
    pub fn with_resolution(&self, order: usize, rows: usize) -> Result<Self> {
        Self::new(self.gamma.clone(), self.gravity, self.period(), self.depth(), order, rows)
    }

    pub fn laminar(&self, lambda: T) -> Result<LaminarFlow<T>> {
        solve_laminar(&self.gamma, lambda, self.depth(), self.rows())
    }

    /// Dimension of packed residuals: `1 + N + (N + 1)(M - 1)`.
    pub fn residual_len(&self) -> usize {
        1 + self.order() + (self.order() + 1) * (self.rows() - 1)
    }
}

/// Solver unknown. `orientation` is the sign of `S dA/dy + lambda`, fixed per
/// branch, which replaces the absolute value in `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct State<T> {
    pub lambda: T,
    pub q: T,
    pub w: PeriodicScalar<T>,
    pub phi: StripField<T>,
    pub orientation: T,
}

impl<T: Real> State<T> {
    /// Laminar flow `(lambda, 0, 0, 0)`.
    pub fn trivial(problem: &Problem<T>, lambda: T) -> Self {
        Self {
            lambda,
            q: T::zero(),
            w: problem.disc.zero_scalar(Parity::Even),
            phi: problem.disc.zero_field(Parity::Even),
            orientation: if lambda < T::zero() { -T::one() } else { T::one() },
        }
    }

    /// Checks shapes, evenness, zero mean of `w` and zero traces of `phi`.
    pub fn validate(&self, problem: &Problem<T>) -> Result<()> {
        let n = problem.order();
        if self.w.order() != n || self.phi.order() != n || self.phi.rows() != problem.rows() {
            return Err(Error::InvalidArgument("state resolution does not match the problem".into()));
        }
        if self.w.parity() != Parity::Even || !self.w.is_zero_mean() {
            return Err(Error::InvalidArgument("w must be even with zero mean".into()));
        }
        if self.phi.parity() != Parity::Even || !self.phi.has_zero_traces() {
            return Err(Error::InvalidArgument("phi must be even with zero traces".into()));
        }
        if self.lambda == T::zero() || !self.lambda.is_finite() || !self.q.is_finite() {
            return Err(Error::InvalidArgument("lambda must be finite and nonzero".into()));
        }
        if self.orientation.abs() != T::one() {
            return Err(Error::InvalidArgument("orientation must be +1 or -1".into()));
        }
        Ok(())
    }
}

/// `F = (F1, F2, F3)`; `F2` keeps cosine modes `1..=N`, `F3` is zero on the
/// boundary rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual<T> {
    pub scalar: T,
    pub surface: PeriodicScalar<T>,
    pub field: StripField<T>,
}

impl<T: Real> Residual<T> {
    /// `(F1, F2 modes 1..=N, F3 interior values mode-major)`.
    pub fn pack(&self) -> Vec<T> {
        let n = self.surface.order();
        let rows = self.field.rows();
        let mut out = Vec::with_capacity(1 + n + (n + 1) * (rows - 1));
        out.push(self.scalar);
        out.extend_from_slice(&self.surface.cos()[1..]);
        for k in 0..=self.field.order() {
            out.extend_from_slice(&self.field.profile(k)[1..rows]);
        }
        out
    }

    pub fn unpack(problem: &Problem<T>, v: &[T]) -> Result<Self> {
        if v.len() != problem.residual_len() {
            return Err(Error::InvalidArgument(format!(
                "packed length {} differs from {}",
                v.len(),
                problem.residual_len()
            )));
        }
        let n = problem.order();
        let rows = problem.rows();
        let mut surface = problem.disc.zero_scalar(Parity::Even);
        surface.cos_mut()[1..].copy_from_slice(&v[1..=n]);
        let mut field = problem.disc.zero_field(Parity::Even);
        for k in 0..=n {
            let start = 1 + n + k * (rows - 1);
            field.profile_mut(k)[1..rows].copy_from_slice(&v[start..start + rows - 1]);
        }
        Ok(Self { scalar: v[0], surface, field })
    }

    pub fn norm_inf(&self) -> T {
        self.scalar.abs().max(self.surface.max_coeff()).max(self.field.max_abs())
    }
}

/// Surface-level quantities on the collocation grid.
#[derive(Clone, Debug)]
pub struct SurfaceValues<T> {
    /// Cosine coefficients of `S dA/dy`.
    pub a_top: Vec<T>,
    pub w: Vec<T>,
    pub k: Vec<T>,
    /// Signed `orientation * (S dA/dy + lambda)`.
    pub b: Vec<T>,
    pub r: Vec<T>,
    pub theta: PeriodicScalar<T>,
    pub m1: T,
    pub m2: PeriodicScalar<T>,
    pub margins: Margins,
    /// `q + lambda^2/2 - g max w`.
    pub greatest_height_margin: T,
}

fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// `(M1, M2)` and the surface diagnostics from `(lambda, q, w)` and the
/// coefficients of `S dA/dy`.
pub(crate) fn surface_map<T: Real>(
    problem: &Problem<T>,
    lambda: T,
    q: T,
    w: &PeriodicScalar<T>,
    a_top: &[T],
    orientation: T,
) -> Result<SurfaceValues<T>> {
    let disc = &problem.disc;
    let n = problem.order();
    let g = disc.grid_len();
    let nu = problem.nu();
    let two = T::lit(2.0);
    let mut dw = vec![T::zero(); n + 1];
    let mut cdw = vec![T::zero(); n + 1];
    cdw[0] = T::one();
    for k in 1..=n {
        let kn = T::from_usize_lossy(k) * nu;
        dw[k] = -kn * w.cos()[k];
        cdw[k] = kn * w.cos()[k] * problem.coth[k];
    }
    let mut wg = vec![T::zero(); g];
    let mut vx = vec![T::zero(); g];
    let mut vy = vec![T::zero(); g];
    let mut ag = vec![T::zero(); g];
    disc.synth_cos(w.cos(), &mut wg);
    disc.synth_sin(&dw, &mut vx);
    disc.synth_cos(&cdw, &mut vy);
    disc.synth_cos(a_top, &mut ag);
    let kv: Vec<T> = vx.iter().zip(&vy).map(|(a, b)| a.hypot(*b)).collect();
    let b: Vec<T> = ag.iter().map(|a| orientation * (*a + lambda)).collect();
    let head: Vec<T> = wg.iter().map(|wv| two * q + lambda * lambda - two * problem.gravity * *wv).collect();
    let fold_min = |v: &[T]| v.iter().fold(T::infinity(), |m, x| if x.is_nan() { T::nan() } else { m.min(*x) });
    let margins = Margins {
        min_k: to_f64(fold_min(&kv)),
        min_stagnation: to_f64(fold_min(&b)),
        min_head: to_f64(fold_min(&head) / two),
    };
    let wmax = wg.iter().fold(T::neg_infinity(), |m, x| m.max(*x));
    let greatest_height_margin = q + lambda * lambda / two - problem.gravity * wmax;
    if !(margins.min_k > 0.0 && margins.min_stagnation > 0.0 && margins.min_head > 0.0) {
        return Err(Error::Inadmissible(margins));
    }
    let r: Vec<T> = b.iter().zip(&head).map(|(bv, hv)| *bv / hv.sqrt()).collect();
    let lnr: Vec<T> = r.iter().map(|v| v.ln()).collect();
    let mut c = vec![T::zero(); n + 1];
    disc.project_cos(&lnr, &mut c);
    let mut ts = vec![T::zero(); n + 1];
    for k in 1..=n {
        ts[k] = -c[k] * problem.tanh[k];
    }
    let mut thg = vec![T::zero(); g];
    disc.synth_sin(&ts, &mut thg);
    let rc: Vec<T> = r.iter().zip(&thg).map(|(rv, t)| *rv * t.cos()).collect();
    let rs: Vec<T> = r.iter().zip(&thg).map(|(rv, t)| *rv * t.sin()).collect();
    disc.project_cos(&rc, &mut c);
    let m1 = q + c[0] - T::one();
    let mut s = vec![T::zero(); n + 1];
    disc.project_sin(&rs, &mut s);
    let mut m2 = vec![T::zero(); n + 1];
    for k in 1..=n {
        m2[k] = -s[k] / (T::from_usize_lossy(k) * nu);
    }
    Ok(SurfaceValues {
        a_top: a_top.to_vec(),
        w: wg,
        k: kv,
        b,
        r,
        theta: PeriodicScalar::odd(problem.period(), ts),
        m1,
        m2: PeriodicScalar::even(problem.period(), m2),
        margins,
        greatest_height_margin,
    })
}

/// Everything computed while evaluating `F` at a state.
#[derive(Clone, Debug)]
pub struct Evaluation<T> {
    pub laminar: LaminarFlow<T>,
    pub samples: StripSamples<T>,
    pub a: StripField<T>,
    pub surface: SurfaceValues<T>,
    pub residual: Residual<T>,
}

pub fn evaluate<T: Real>(problem: &Problem<T>, state: &State<T>) -> Result<Evaluation<T>> {
    state.validate(problem)?;
    let laminar = problem.laminar(state.lambda)?;
    evaluate_with(problem, state, laminar)
}

pub(crate) fn evaluate_with<T: Real>(problem: &Problem<T>, state: &State<T>, laminar: LaminarFlow<T>) -> Result<Evaluation<T>> {
    let samples = StripSamples::new(&state.w, &state.phi, &problem.disc);
    let rhs = elliptic::a_rhs_samples(&problem.gamma, &laminar, &samples);
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("vorticity produced non-finite values".into()));
    }
    let a = elliptic::solve_from_grid(&rhs, &problem.disc, &problem.solver);
    let a_top: Vec<T> = elliptic::surface_normal_derivative(&a).cos().to_vec();
    let surface = surface_map(problem, state.lambda, state.q, &state.w, &a_top, state.orientation)?;
    let residual = Residual {
        scalar: state.q - surface.m1,
        surface: state.w.axpy(-T::one(), &surface.m2),
        field: state.phi.axpy(-T::one(), &a),
    };
    Ok(Evaluation { laminar, samples, a, surface, residual })
}

/// `R = |S dA/dy + lambda| / sqrt(2q + lambda^2 - 2 g w)` on the collocation grid.
pub fn bernoulli_r<T: Real>(problem: &Problem<T>, state: &State<T>) -> Result<GridFunction<T>> {
    let e = evaluate(problem, state)?;
    Ok(GridFunction { x: problem.disc.grid(), values: e.surface.r })
}

/// `(M1, M2, M3)`.
pub fn apply_m<T: Real>(problem: &Problem<T>, state: &State<T>) -> Result<(T, PeriodicScalar<T>, StripField<T>)> {
    let e = evaluate(problem, state)?;
    Ok((e.surface.m1, e.surface.m2, e.a))
}

pub fn apply_f<T: Real>(problem: &Problem<T>, state: &State<T>) -> Result<Residual<T>> {
    Ok(evaluate(problem, state)?.residual)
}

/// `max |K(w) - R|` over the collocation grid.
pub fn flattened_bernoulli_gap<T: Real>(problem: &Problem<T>, state: &State<T>) -> Result<T> {
    let e = evaluate(problem, state)?;
    Ok(gap_of(&e.surface))
}

pub(crate) fn gap_of<T: Real>(s: &SurfaceValues<T>) -> T {
    s.k.iter().zip(&s.r).fold(T::zero(), |m, (k, r)| m.max((*k - *r).abs()))
}

/// Residuals of the original free-boundary problem, transplanted through the
/// conformal map. `None` entries mean the map failed the injectivity test.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalReport<T> {
    pub injective: bool,
    pub bed_clear: bool,
    /// `max |Delta psi + gamma(psi)|` over interior grid points.
    pub interior: Option<T>,
    /// `max ||grad psi|^2/2 + g (Y - h) - Q|` on the surface.
    pub bernoulli: Option<T>,
    /// `max |psi|` on the surface.
    pub surface_streamline: Option<T>,
    /// `max |psi + m|` on the bed.
    pub bed_streamline: Option<T>,
}

/// One-sided sixth-order derivative at the top row, independent of the
/// fourth-order stencil used by the solver.
fn top_slope_6<T: Real>(u: &[T], dy: T) -> T {
    let m = u.len() - 1;
    let c = [147.0, -360.0, 450.0, -400.0, 225.0, -72.0, 10.0];
    let s = c.iter().enumerate().fold(T::zero(), |acc, (i, ci)| acc + T::lit(*ci) * u[m - i]);
    s / (T::lit(60.0) * dy)
}

pub fn physical_oracle<T: Real>(problem: &Problem<T>, state: &State<T>) -> Result<PhysicalReport<T>> {
    state.validate(problem)?;
    let disc = &problem.disc;
    let n = problem.order();
    let h = problem.depth();
    let curve = spectral::surface_curve(&state.w, h, 16 * n.max(8))?;
    let injective = !spectral::curve_self_intersects(&curve, problem.period())
        && spectral::metric_k(&state.w, disc)?.min() > T::zero();
    let wg = disc.to_grid(&state.w);
    let bed_clear = wg.iter().all(|v| *v > -h);
    if !(injective && bed_clear) {
        return Ok(PhysicalReport {
            injective,
            bed_clear,
            interior: None,
            bernoulli: None,
            surface_streamline: None,
            bed_streamline: None,
        });
    }
    let laminar = problem.laminar(state.lambda)?;
    let samples = StripSamples::new(&state.w, &state.phi, disc);
    let rows = problem.rows();
    let g = disc.grid_len();
    let dy = disc.dy();
    let nu = problem.nu();
    // Laplacian of phi: spectral in x, explicit fourth-order central in y.
    let mut interior = T::zero();
    let mut lap = vec![T::zero(); n + 1];
    let mut row = vec![T::zero(); g];
    for j in 2..=rows - 2 {
        for (k, l) in lap.iter_mut().enumerate() {
            let u = state.phi.profile(k);
            let uyy = (-u[j - 2] + T::lit(16.0) * (u[j - 1] + u[j + 1]) - T::lit(30.0) * u[j] - u[j + 2])
                / (T::lit(12.0) * dy * dy);
            let kn = T::from_usize_lossy(k) * nu;
            *l = uyy - kn * kn * u[j];
        }
        disc.synth_cos(&lap, &mut row);
        let psi = laminar.psi[j];
        for i in 0..g {
            let idx = j * g + i;
            let gv = samples.grad_v_sq(idx);
            let res = (row[i] - problem.gamma.value(psi) + problem.gamma.value(samples.phi[idx] + psi) * gv) / gv;
            interior = interior.max(res.abs());
        }
    }
    // Surface Bernoulli with Q = q + lambda^2 / 2.
    let top: Vec<T> = (0..=n).map(|k| top_slope_6(state.phi.profile(k), dy)).collect();
    let mut tg = vec![T::zero(); g];
    disc.synth_cos(&top, &mut tg);
    let kv = spectral::metric_k(&state.w, disc)?;
    let big_q = state.q + state.lambda * state.lambda / T::lit(2.0);
    let bernoulli = (0..g).fold(T::zero(), |m, i| {
        let speed = (tg[i] + state.lambda) / kv.values[i];
        let res = speed * speed / T::lit(2.0) + problem.gravity * wg[i] - big_q;
        m.max(res.abs())
    });
    let top_trace = disc.to_grid(&state.phi.trace_top());
    let surface_streamline = top_trace.iter().fold(T::zero(), |m, v| m.max((*v + laminar.psi[rows]).abs()));
    let bed_trace = disc.to_grid(&state.phi.trace_bottom());
    let bed_streamline = bed_trace.iter().fold(T::zero(), |m, v| m.max((*v + laminar.psi[0] + laminar.m).abs()));
    Ok(PhysicalReport {
        injective,
        bed_clear,
        interior: Some(interior),
        bernoulli: Some(bernoulli),
        surface_streamline: Some(surface_streamline),
        bed_streamline: Some(bed_streamline),
    })
}

/// Derivative of `F` in `(q, w, phi)` at the laminar state `(lambda, 0, 0, 0)`,
/// applied without assembling a matrix.
#[derive(Clone, Debug)]
pub struct TrivialLinearization<'a, T> {
    problem: &'a Problem<T>,
    pub lambda: T,
    pub laminar: LaminarFlow<T>,
}

/// Direction `(dq, dw, dphi)` in the space of `(q, w, phi)`; shares the
/// residual layout.
pub type Direction<T> = Residual<T>;

pub fn linearize_trivial<T: Real>(problem: &Problem<T>, lambda: T) -> Result<TrivialLinearization<'_, T>> {
    if lambda == T::zero() {
        return Err(Error::InvalidArgument("linearization needs lambda != 0".into()));
    }
    Ok(TrivialLinearization { problem, lambda, laminar: problem.laminar(lambda)? })
}

impl<T: Real> TrivialLinearization<'_, T> {
    /// `A_w dw + A_phi dphi` mode by mode.
    fn a_derivative(&self, dw: &PeriodicScalar<T>, dphi: &StripField<T>) -> StripField<T> {
        let p = self.problem;
        let rows = p.rows();
        let mut out = p.disc.zero_field(Parity::Even);
        let mut rhs = vec![T::zero(); rows + 1];
        for k in 0..=p.order() {
            let slope = p.disc.extension_slope(k);
            let ak = if k == 0 { T::zero() } else { dw.cos()[k] };
            for j in 0..=rows {
                let [gv, g1, _] = p.gamma.eval(self.laminar.psi[j]);
                rhs[j] = -T::lit(2.0) * gv * ak * slope[j] - g1 * dphi.profile(k)[j];
            }
            let u = p.solver.solve_mode(k, &rhs);
            out.profile_mut(k).copy_from_slice(&u);
        }
        out
    }

    pub fn apply(&self, d: &Direction<T>) -> Result<Residual<T>> {
        let p = self.problem;
        let l = self.lambda;
        let a = self.a_derivative(&d.surface, &d.field);
        let st = elliptic::surface_normal_derivative(&a);
        let mut inner = project_zero_mean(&st).axpy(p.gravity / l, &d.surface);
        inner.cos_mut()[0] = T::zero();
        let corr = antiderivative(&hilbert_strip_inverse(&inner, p.depth())?)?;
        Ok(Residual {
            scalar: d.scalar / (l * l) - st.mean() / l,
            surface: d.surface.axpy(-T::one() / l, &corr),
            field: d.field.axpy(-T::one(), &a),
        })
    }

    /// Dense matrix in packed coordinates, row-major. Intended for small N, M.
    pub fn assemble(&self) -> Result<Vec<T>> {
        let n = self.problem.residual_len();
        let mut out = vec![T::zero(); n * n];
        let mut e = vec![T::zero(); n];
        for c in 0..n {
            e[c] = T::one();
            let col = self.apply(&Residual::unpack(self.problem, &e)?)?.pack();
            e[c] = T::zero();
            for r in 0..n {
                out[r * n + c] = col[r];
            }
        }
        Ok(out)
    }
}

fn require_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda == T::zero() {
        Err(Error::InvalidArgument("lambda must be nonzero".into()))
    } else {
        Ok(())
    }
}

/// `T(lambda) theta = (-S theta / lambda, theta - psi_y V[S theta] / lambda)`.
pub fn t_isomorphism<T: Real>(
    problem: &Problem<T>,
    laminar: &LaminarFlow<T>,
    theta: &StripField<T>,
) -> Result<(PeriodicScalar<T>, StripField<T>)> {
    require_lambda(laminar.lambda)?;
    let top = theta.trace_top();
    let ext = spectral::extension_perturbation(&project_zero_mean(&top), &problem.disc);
    let scaled: Vec<T> = laminar.psi_y.iter().map(|v| *v / laminar.lambda).collect();
    let field = theta.axpy(-T::one(), &ext.times_profile(&scaled));
    Ok((top.scaled(-T::one() / laminar.lambda), field))
}

/// `(dw, dphi) -> dphi - psi_y V[dw]`.
pub fn t_isomorphism_inverse<T: Real>(
    problem: &Problem<T>,
    laminar: &LaminarFlow<T>,
    dw: &PeriodicScalar<T>,
    dphi: &StripField<T>,
) -> Result<StripField<T>> {
    require_lambda(laminar.lambda)?;
    let ext = spectral::extension_perturbation(&project_zero_mean(dw), &problem.disc);
    Ok(dphi.axpy(-T::one(), &ext.times_profile(&laminar.psi_y)))
}

/// The linearized operator `L(lambda) = DF(lambda, 0) T(lambda)` in the
/// closed form valid at laminar flows.
pub fn linearized_l<T: Real>(
    problem: &Problem<T>,
    laminar: &LaminarFlow<T>,
    theta: &StripField<T>,
) -> Result<(PeriodicScalar<T>, StripField<T>)> {
    let l = laminar.lambda;
    require_lambda(l)?;
    let rows = problem.rows();
    let mut a_phi = problem.disc.zero_field(Parity::Even);
    let mut rhs = vec![T::zero(); rows + 1];
    for k in 0..=problem.order() {
        for j in 0..=rows {
            rhs[j] = -problem.gamma.d1(laminar.psi[j]) * theta.profile(k)[j];
        }
        a_phi.profile_mut(k).copy_from_slice(&problem.solver.solve_mode(k, &rhs));
    }
    let top = theta.trace_top();
    let ext = spectral::extension_perturbation(&project_zero_mean(&top), &problem.disc);
    let second = theta.axpy(-T::one(), &a_phi).axpy(-T::one(), &ext);
    let st = elliptic::surface_normal_derivative(&a_phi);
    let g0 = problem.gamma.value(T::zero());
    let c = (g0 - problem.gravity / l) / l;
    let inner = project_zero_mean(&project_zero_mean(&st).axpy(c, &project_zero_mean(&top)));
    let corr = antiderivative(&hilbert_strip_inverse(&inner, problem.depth())?)?;
    let first = top.scaled(-T::one() / l).axpy(-T::one() / l, &corr);
    Ok((first, second))
}
