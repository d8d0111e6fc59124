//! Newton correction, the bifurcation tangent, and pseudo-arclength
//! continuation with monitors for the ways a global branch can end.
//!
//! The packed unknown is `(lambda, q, w_1..w_N, phi interior mode-major)`.
//! Newton systems are solved by eliminating `phi`: the field block
//! `I - A_phi` is block tridiagonal in `y` and is factored directly, leaving a
//! dense `(N + 2)`-square Schur complement for `(lambda, q, w)`.

use rayon::prelude::*;

use crate::diagnostics::{self, BranchOrientation};
use crate::elliptic::{self, StripSamples};
use crate::laminar::{solve_beta, BifurcationPoint, LaminarFlow};
use crate::linalg::{BlockTridiagonal, DenseLu};
use crate::operator::{evaluate, evaluate_with, gap_of, surface_map, t_isomorphism, Evaluation, Problem, State};
use crate::spectral::{self, Parity};
use crate::{Error, Real, Result};

/// Length of the packed unknown.
pub fn unknown_len<T: Real>(problem: &Problem<T>) -> usize {
    2 + problem.order() + (problem.order() + 1) * (problem.rows() - 1)
}

pub fn pack_state<T: Real>(state: &State<T>) -> Vec<T> {
    let rows = state.phi.rows();
    let mut out = Vec::with_capacity(2 + state.w.order() + (state.phi.order() + 1) * (rows - 1));
    out.push(state.lambda);
    out.push(state.q);
    out.extend_from_slice(&state.w.cos()[1..]);
    for k in 0..=state.phi.order() {
        out.extend_from_slice(&state.phi.profile(k)[1..rows]);
    }
    out
}

pub fn unpack_state<T: Real>(problem: &Problem<T>, x: &[T], orientation: T) -> Result<State<T>> {
    if x.len() != unknown_len(problem) {
        return Err(Error::InvalidArgument(format!("packed unknown has length {}, expected {}", x.len(), unknown_len(problem))));
    }
    let n = problem.order();
    let rows = problem.rows();
    let mut w = problem.disc.zero_scalar(Parity::Even);
    w.cos_mut()[1..].copy_from_slice(&x[2..2 + n]);
    let mut phi = problem.disc.zero_field(Parity::Even);
    for k in 0..=n {
        let start = 2 + n + k * (rows - 1);
        phi.profile_mut(k)[1..rows].copy_from_slice(&x[start..start + rows - 1]);
    }
    Ok(State { lambda: x[0], q: x[1], w, phi, orientation })
}

/// Arclength weights: 1 for `lambda`, `q`, `w`; `1/sqrt(N M)` for `phi`.
pub fn arclength_weights<T: Real>(problem: &Problem<T>) -> Vec<T> {
    let n = problem.order();
    let field = T::one() / T::from_usize_lossy(n * problem.rows()).sqrt();
    let mut out = vec![T::one(); 2 + n];
    out.resize(unknown_len(problem), field);
    out
}

pub fn weighted_dot<T: Real>(a: &[T], b: &[T], weights: &[T]) -> T {
    a.iter().zip(b).zip(weights).fold(T::zero(), |s, ((x, y), w)| s + *w * *x * *y)
}

/// Direction of the bifurcating branch at `(lambda0, 0, 0, 0)`.
#[derive(Clone, Debug)]
pub struct Tangent<T> {
    pub lambda0: T,
    pub k0: usize,
    /// Packed direction with zero `lambda` and `q` parts, scaled so that the
    /// mode-`k0` coefficient of `w` is `-sign(lambda0)`.
    pub direction: Vec<T>,
    /// `beta^{-(k0 nu)^2, lambda0}` on the solver grid.
    pub beta: Vec<T>,
}

/// Builds `T(lambda0) theta` with `theta = beta(y) cos(k0 nu x)`.
pub fn bifurcation_tangent<T: Real>(problem: &Problem<T>, point: &BifurcationPoint<T>) -> Result<Tangent<T>> {
    if point.multiplicity() != 1 {
        return Err(Error::Refused(format!(
            "kernel at lambda = {} has dimension {} (modes {:?}); branch switching needs a simple kernel",
            point.lambda,
            point.multiplicity(),
            point.kernel_modes
        )));
    }
    let d_scale = T::one() + problem.gravity / (point.lambda * point.lambda);
    if !(point.d_lambda.abs() > T::lit(1e-8) * d_scale) {
        return Err(Error::Refused(format!("transversality fails at lambda = {}: d_lambda = {}", point.lambda, point.d_lambda)));
    }
    let k0 = point.k;
    if k0 > problem.order() {
        return Err(Error::InvalidArgument(format!("mode {k0} exceeds the truncation order")));
    }
    let laminar = problem.laminar(point.lambda)?;
    let kn = T::from_usize_lossy(k0) * problem.nu();
    let beta = solve_beta(&problem.gamma, -kn * kn, &laminar);
    if beta.in_dirichlet_spectrum {
        return Err(Error::Refused("beta is undefined on the Dirichlet spectrum".into()));
    }
    let mut theta = problem.disc.zero_field(Parity::Even);
    theta.profile_mut(k0).copy_from_slice(&beta.beta);
    theta.profile_mut(k0)[0] = T::zero();
    let (dw, dphi) = t_isomorphism(problem, &laminar, &theta)?;
    let scale = point.lambda.abs();
    let state = State {
        lambda: T::zero(),
        q: T::zero(),
        w: dw.scaled(scale),
        phi: dphi.scaled(scale),
        orientation: T::one(),
    };
    let mut direction = pack_state(&state);
    direction[0] = T::zero();
    Ok(Tangent { lambda0: point.lambda, k0, direction, beta: beta.beta })
}

/// Scalar equation closing the Newton system.
#[derive(Clone, Debug)]
pub enum Constraint<T> {
    FixedLambda(T),
    /// Cosine coefficient `mode` of `w` equals `value`.
    FixedAmplitude { mode: usize, value: T },
    /// `sum_i weights_i (x_i - anchor_i) direction_i = target`.
    Arclength { anchor: Vec<T>, direction: Vec<T>, weights: Vec<T>, target: T },
}

impl<T: Real> Constraint<T> {
    fn residual(&self, x: &[T]) -> T {
        match self {
            Constraint::FixedLambda(v) => x[0] - *v,
            Constraint::FixedAmplitude { mode, value } => x[1 + mode] - *value,
            Constraint::Arclength { anchor, direction, weights, target } => {
                let mut s = T::zero();
                for i in 0..x.len() {
                    s = s + weights[i] * (x[i] - anchor[i]) * direction[i];
                }
                s - *target
            }
        }
    }

    fn gradient(&self, len: usize) -> Vec<T> {
        let mut g = vec![T::zero(); len];
        match self {
            Constraint::FixedLambda(_) => g[0] = T::one(),
            Constraint::FixedAmplitude { mode, .. } => g[1 + mode] = T::one(),
            Constraint::Arclength { direction, weights, .. } => {
                for i in 0..len {
                    g[i] = weights[i] * direction[i];
                }
            }
        }
        g
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions<T> {
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self { tolerance: T::lit(1e-11), max_iterations: 12 }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome<T> {
    pub state: State<T>,
    pub iterations: usize,
    pub residual: T,
    /// Sign and log-magnitude of the bordered Jacobian determinant from the
    /// last linear solve.
    pub det_sign: T,
    pub log_abs_det: T,
    pub evaluation: Evaluation<T>,
}

enum FieldBlock<T> {
    Identity,
    Blocks(BlockTridiagonal<T>),
}

struct FieldOperator<'a, T> {
    problem: &'a Problem<T>,
    block: FieldBlock<T>,
}

impl<T: Real> FieldOperator<'_, T> {
    /// Solves `(I - A_phi) v = u` for packed interior fields.
    fn solve(&self, u: &[T]) -> Vec<T> {
        match &self.block {
            FieldBlock::Identity => u.to_vec(),
            FieldBlock::Blocks(bt) => {
                let p = self.problem;
                let n1 = p.order() + 1;
                let inner = p.rows() - 1;
                let mut b = vec![T::zero(); n1 * inner];
                let mut prof = vec![T::zero(); inner + 2];
                let mut nu_out = vec![T::zero(); inner];
                for k in 0..n1 {
                    prof[1..=inner].copy_from_slice(&u[k * inner..(k + 1) * inner]);
                    p.solver.apply_mode(k, &prof, &mut nu_out);
                    for r in 0..inner {
                        b[r * n1 + k] = nu_out[r];
                    }
                }
                bt.solve(&mut b);
                let mut out = vec![T::zero(); u.len()];
                for k in 0..n1 {
                    for r in 0..inner {
                        out[k * inner + r] = b[r * n1 + k];
                    }
                }
                out
            }
        }
    }

    fn log_det(&self) -> (T, T) {
        match &self.block {
            FieldBlock::Identity => (T::one(), T::zero()),
            FieldBlock::Blocks(bt) => bt.log_det(),
        }
    }
}

fn build_field_operator<'a, T: Real>(problem: &'a Problem<T>, laminar: &LaminarFlow<T>, samples: &StripSamples<T>) -> Result<FieldOperator<'a, T>> {
    if problem.gamma.has_zero_slope() {
        return Ok(FieldOperator { problem, block: FieldBlock::Identity });
    }
    let disc = &problem.disc;
    let g = disc.grid_len();
    let n1 = problem.order() + 1;
    let rows = problem.rows();
    let dy = disc.dy();
    let c12 = dy * dy / T::lit(12.0);
    let mats: Vec<Vec<T>> = (0..=rows)
        .into_par_iter()
        .map(|j| {
            let c: Vec<T> = (0..g)
                .map(|i| {
                    let idx = j * g + i;
                    -problem.gamma.d1(samples.phi[idx] + laminar.psi[j]) * samples.grad_v_sq(idx)
                })
                .collect();
            let mut m = vec![T::zero(); n1 * n1];
            disc.product_matrix(&c, &mut m);
            m
        })
        .collect();
    let band = |j: usize, centre: T, shift_factor: T| -> Vec<T> {
        let mut b: Vec<T> = mats[j].iter().map(|v| -shift_factor * c12 * *v).collect();
        for k in 0..n1 {
            let a = problem.solver.shift(k);
            b[k * n1 + k] = b[k * n1 + k] + centre - shift_factor * a;
        }
        b
    };
    let ten = T::lit(10.0);
    let mut sub = Vec::with_capacity(rows - 1);
    let mut diag = Vec::with_capacity(rows - 1);
    let mut sup = Vec::with_capacity(rows - 1);
    for j in 1..rows {
        sub.push(band(j - 1, T::one(), T::one()));
        diag.push(band(j, -T::lit(2.0), ten));
        sup.push(band(j + 1, T::one(), T::one()));
    }
    Ok(FieldOperator { problem, block: FieldBlock::Blocks(BlockTridiagonal::new(sub, diag, sup, n1)?) })
}

fn interior_of<T: Real>(field: &spectral::StripField<T>) -> Vec<T> {
    let rows = field.rows();
    let mut out = Vec::with_capacity((field.order() + 1) * (rows - 1));
    for k in 0..=field.order() {
        out.extend_from_slice(&field.profile(k)[1..rows]);
    }
    out
}

/// Top slopes of a packed interior field with zero traces.
fn top_slopes_packed<T: Real>(problem: &Problem<T>, v: &[T]) -> Vec<T> {
    let inner = problem.rows() - 1;
    let dy = problem.disc.dy();
    (0..=problem.order())
        .map(|k| {
            let p = &v[k * inner..(k + 1) * inner];
            let u = [p[inner - 4], p[inner - 3], p[inner - 2], p[inner - 1], T::zero()];
            elliptic::top_slope(&u, dy)
        })
        .collect()
}

fn surface_vector<T: Real>(problem: &Problem<T>, x: &[T], a_top: &[T], orientation: T) -> Result<Vec<T>> {
    let n = problem.order();
    let mut w = problem.disc.zero_scalar(Parity::Even);
    w.cos_mut()[1..].copy_from_slice(&x[2..2 + n]);
    let s = surface_map(problem, x[0], x[1], &w, a_top, orientation)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(x[1] - s.m1);
    for k in 1..=n {
        out.push(x[1 + k] - s.m2.cos()[k]);
    }
    Ok(out)
}

fn fd_column<T: Real>(base: &[T], value: T, eval: impl Fn(T) -> Result<Vec<T>>) -> Result<Vec<T>> {
    let h = T::epsilon().sqrt() * (T::one() + value.abs());
    let (step, col) = match eval(value + h) {
        Ok(c) => (h, c),
        Err(_) => (-h, eval(value - h)?),
    };
    Ok(col.iter().zip(base).map(|(a, b)| (*a - *b) / step).collect())
}

struct LinearStep<T> {
    dx: Vec<T>,
    det_sign: T,
    log_abs_det: T,
}

fn linear_step<T: Real>(problem: &Problem<T>, x: &[T], orientation: T, eval: &Evaluation<T>, constraint: &Constraint<T>) -> Result<LinearStep<T>> {
    let n = problem.order();
    let np = n + 2;
    let nf = (n + 1) * (problem.rows() - 1);
    let a_top = eval.surface.a_top.clone();
    let base = surface_vector(problem, x, &a_top, orientation)?;

    // Surface sensitivities by forward differences: explicit (lambda, q, w) and
    // through the coefficients of S dA/dy.
    let phi_p: Vec<Vec<T>> = (0..np)
        .into_par_iter()
        .map(|c| {
            fd_column(&base, x[c], |v| {
                let mut xp = x[..np].to_vec();
                xp[c] = v;
                surface_vector(problem, &xp, &a_top, orientation)
            })
        })
        .collect::<Result<_>>()?;
    let phi_a: Vec<Vec<T>> = (0..=n)
        .into_par_iter()
        .map(|m| {
            fd_column(&base, a_top[m], |v| {
                let mut at = a_top.clone();
                at[m] = v;
                surface_vector(problem, &x[..np], &at, orientation)
            })
        })
        .collect::<Result<_>>()?;

    // Field sensitivities of A in lambda and w (q does not enter A).
    let laminar = &eval.laminar;
    let samples = &eval.samples;
    let disc = &problem.disc;
    let g = disc.grid_len();
    let rows = problem.rows();
    let nu = problem.nu();
    let mut a_cols: Vec<Option<Vec<T>>> = vec![None; np];
    if !problem.gamma.has_zero_slope() {
        let mut rhs = vec![T::zero(); (rows + 1) * g];
        for j in 0..=rows {
            let psi = laminar.psi[j];
            let dpsi = laminar.dpsi[j];
            let base_slope = problem.gamma.d1(psi);
            for i in 0..g {
                let idx = j * g + i;
                rhs[idx] = (-problem.gamma.d1(samples.phi[idx] + psi) * samples.grad_v_sq(idx) + base_slope) * dpsi;
            }
        }
        a_cols[0] = Some(interior_of(&elliptic::solve_from_grid(&rhs, disc, &problem.solver)));
    }
    if !problem.gamma.is_zero() {
        let gamma_vals: Vec<T> = (0..(rows + 1) * g)
            .map(|idx| problem.gamma.value(samples.phi[idx] + laminar.psi[idx / g]))
            .collect();
        let cols: Vec<(usize, Vec<T>)> = (1..=n)
            .into_par_iter()
            .map(|k| {
                let kn = T::from_usize_lossy(k) * nu;
                let mut sin_k = vec![T::zero(); g];
                let mut cos_k = vec![T::zero(); g];
                let mut unit = vec![T::zero(); n + 1];
                unit[k] = T::one();
                disc.synth_sin(&unit, &mut sin_k);
                disc.synth_cos(&unit, &mut cos_k);
                let ext = disc.extension_profile(k);
                let slope = disc.extension_slope(k);
                let mut rhs = vec![T::zero(); (rows + 1) * g];
                for j in 0..=rows {
                    for i in 0..g {
                        let idx = j * g + i;
                        let dvx = -kn * ext[j] * sin_k[i];
                        let dvy = slope[j] * cos_k[i];
                        rhs[idx] = -gamma_vals[idx] * T::lit(2.0) * (samples.vx[idx] * dvx + samples.vy[idx] * dvy);
                    }
                }
                (k, interior_of(&elliptic::solve_from_grid(&rhs, disc, &problem.solver)))
            })
            .collect();
        for (k, c) in cols {
            a_cols[1 + k] = Some(c);
        }
    }

    // Small block rows: F1, F2 (N+1 rows) then the constraint.
    let grad = constraint.gradient(x.len());
    let mut j_sp = vec![T::zero(); np * np];
    for c in 0..np {
        let slopes = a_cols[c].as_ref().map(|v| top_slopes_packed(problem, v));
        for r in 0..=n {
            let mut v = phi_p[c][r];
            if let Some(sl) = &slopes {
                for m in 0..=n {
                    v = v + phi_a[m][r] * sl[m];
                }
            }
            j_sp[r * np + c] = v;
        }
        j_sp[(np - 1) * np + c] = grad[c];
    }

    let field = build_field_operator(problem, laminar, samples)?;
    let r_f = interior_of(&eval.residual.field);
    let neg_rf: Vec<T> = r_f.iter().map(|v| -*v).collect();
    let y0 = field.solve(&neg_rf);
    // Couples a field vector v into the small rows: Phi_a * S d(A_phi v)/dy and
    // the constraint gradient.
    let couple = |v: &[T], a_phi_v: &[T]| -> Vec<T> {
        let mut out = vec![T::zero(); np];
        if !matches!(field.block, FieldBlock::Identity) {
            let sl = top_slopes_packed(problem, a_phi_v);
            for r in 0..=n {
                out[r] = (0..=n).fold(T::zero(), |s, m| s + phi_a[m][r] * sl[m]);
            }
        }
        out[np - 1] = v.iter().zip(&grad[np..]).fold(T::zero(), |s, (a, b)| s + *a * *b);
        out
    };
    let a_phi_y0: Vec<T> = y0.iter().zip(&r_f).map(|(a, b)| *a + *b).collect();
    let c0 = couple(&y0, &a_phi_y0);
    let ycols: Vec<Option<Vec<T>>> = a_cols
        .par_iter()
        .map(|col| {
            col.as_ref().map(|a| {
                let jfp: Vec<T> = a.iter().map(|v| -*v).collect();
                field.solve(&jfp)
            })
        })
        .collect();
    let mut schur = j_sp.clone();
    for c in 0..np {
        if let (Some(y), Some(a)) = (&ycols[c], &a_cols[c]) {
            let a_phi_y: Vec<T> = y.iter().zip(a).map(|(yv, av)| *yv + *av).collect();
            let cc = couple(y, &a_phi_y);
            for r in 0..np {
                schur[r * np + c] = schur[r * np + c] - cc[r];
            }
        }
    }
    let mut rhs_s = Vec::with_capacity(np);
    rhs_s.push(-eval.residual.scalar);
    for k in 1..=n {
        rhs_s.push(-eval.residual.surface.cos()[k]);
    }
    rhs_s.push(-constraint.residual(x));
    for r in 0..np {
        rhs_s[r] = rhs_s[r] - c0[r];
    }
    let lu = DenseLu::new(schur, np)?;
    if lu.pivot_ratio() < T::epsilon() * T::lit(10.0) {
        return Err(Error::Singular("bordered Jacobian is numerically singular".into()));
    }
    let dp = lu.solve(&rhs_s);
    let mut dphi = y0;
    for c in 0..np {
        if let Some(y) = &ycols[c] {
            for (a, b) in dphi.iter_mut().zip(y) {
                *a = *a - dp[c] * *b;
            }
        }
    }
    let (s1, l1) = field.log_det();
    let (s2, l2) = lu.log_det();
    let mut dx = dp;
    dx.extend(dphi);
    debug_assert_eq!(dx.len(), np + nf);
    Ok(LinearStep { dx, det_sign: s1 * s2, log_abs_det: l1 + l2 })
}

fn residual_norm<T: Real>(eval: &Evaluation<T>, constraint: &Constraint<T>, x: &[T]) -> T {
    eval.residual.norm_inf().max(constraint.residual(x).abs())
}

/// Damped Newton on `[F; constraint] = 0`. The step is halved while the
/// iterate leaves the admissible set.
pub fn newton_correct<T: Real>(problem: &Problem<T>, guess: &State<T>, constraint: &Constraint<T>, options: &NewtonOptions<T>) -> Result<NewtonOutcome<T>> {
    let orientation = guess.orientation;
    let mut x = pack_state(guess);
    let mut state = guess.clone();
    let mut eval = evaluate(problem, &state)?;
    let mut det = (T::one(), T::zero());
    let mut have_det = false;
    for it in 0..=options.max_iterations {
        let res = residual_norm(&eval, constraint, &x);
        if !res.is_finite() {
            return Err(Error::NoConvergence { iterations: it, residual: f64::NAN });
        }
        if res <= options.tolerance {
            if !have_det {
                let step = linear_step(problem, &x, orientation, &eval, constraint)?;
                det = (step.det_sign, step.log_abs_det);
            }
            return Ok(NewtonOutcome { state, iterations: it, residual: res, det_sign: det.0, log_abs_det: det.1, evaluation: eval });
        }
        if it == options.max_iterations {
            return Err(Error::NoConvergence { iterations: it, residual: res.to_f64().unwrap_or(f64::NAN) });
        }
        let step = linear_step(problem, &x, orientation, &eval, constraint)?;
        det = (step.det_sign, step.log_abs_det);
        have_det = true;
        let mut tau = T::one();
        loop {
            let trial: Vec<T> = x.iter().zip(&step.dx).map(|(a, b)| *a + tau * *b).collect();
            let ts = unpack_state(problem, &trial, orientation)?;
            let attempt = if ts.lambda == T::zero() {
                Err(Error::InvalidArgument("lambda reached zero".into()))
            } else {
                problem.laminar(ts.lambda).and_then(|lam| evaluate_with(problem, &ts, lam))
            };
            match attempt {
                Ok(e) => {
                    x = trial;
                    state = ts;
                    eval = e;
                    break;
                }
                Err(Error::Inadmissible(m)) => {
                    tau = tau * T::lit(0.5);
                    if tau < T::lit(1.0 / 64.0) {
                        return Err(Error::Inadmissible(m));
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    unreachable!("loop returns on the final iteration")
}

/// Converged point on the local branch: predictor `s * direction` from the
/// laminar state, corrected on the hyperplane orthogonal to `direction`.
pub fn local_branch_point<T: Real>(problem: &Problem<T>, tangent: &Tangent<T>, s: T, options: &NewtonOptions<T>) -> Result<NewtonOutcome<T>> {
    let anchor = pack_state(&State::trivial(problem, tangent.lambda0));
    let weights = arclength_weights(problem);
    let guess: Vec<T> = anchor.iter().zip(&tangent.direction).map(|(a, d)| *a + s * *d).collect();
    let target = s * weighted_dot(&tangent.direction, &tangent.direction, &weights);
    let orientation = State::trivial(problem, tangent.lambda0).orientation;
    let constraint = Constraint::Arclength { anchor, direction: tangent.direction.clone(), weights, target };
    newton_correct(problem, &unpack_state(problem, &guess, orientation)?, &constraint, options)
}

/// Why a branch run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    LambdaUnbounded,
    SurfaceUnbounded,
    VorticityUnbounded,
    ReturnToTrivial,
    /// `w` returned to zero while `phi` did not.
    FlatSurfaceNonzeroField,
    GreatestHeight,
    ConformalDegeneracy,
    SelfIntersection,
    BedContact,
    BudgetExhausted,
    Stalled,
    /// A nodal property failed where it is expected to hold.
    NodalViolation,
    /// The flattened Bernoulli gap of a converged point exceeded its bound:
    /// the truncation no longer resolves the wave.
    ResolutionExhausted,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::LambdaUnbounded => "lambda_unbounded",
            Verdict::SurfaceUnbounded => "surface_unbounded",
            Verdict::VorticityUnbounded => "vorticity_unbounded",
            Verdict::ReturnToTrivial => "return_to_trivial",
            Verdict::FlatSurfaceNonzeroField => "flat_surface_nonzero_field",
            Verdict::GreatestHeight => "greatest_height",
            Verdict::ConformalDegeneracy => "conformal_degeneracy",
            Verdict::SelfIntersection => "self_intersection",
            Verdict::BedContact => "bed_contact",
            Verdict::BudgetExhausted => "budget_exhausted",
            Verdict::Stalled => "stalled",
            Verdict::NodalViolation => "nodal_violation",
            Verdict::ResolutionExhausted => "resolution_exhausted",
        }
    }

    /// Whether the verdict is one of the alternatives a global branch can
    /// exhibit (or the budget ran out first).
    pub fn is_alternative(&self) -> bool {
        !matches!(self, Verdict::Stalled | Verdict::NodalViolation | Verdict::ResolutionExhausted)
    }
}

/// Monitor thresholds; a run stops at the first one crossed.
#[derive(Clone, Copy, Debug)]
pub struct Thresholds<T> {
    pub lambda_max: T,
    /// Bound on the discrete Holder quotient of `w` with exponent 7/8.
    pub holder_max: T,
    pub vorticity_max: T,
    pub vorticity_exponent: T,
    pub trivial_w: T,
    pub trivial_phi: T,
    pub height_margin_min: T,
    pub min_k_min: T,
    pub bed_clearance_min: T,
    /// Converged points with a larger `max |K - R|` are rejected.
    pub bernoulli_gap_max: T,
}

impl<T: Real> Default for Thresholds<T> {
    fn default() -> Self {
        Self {
            lambda_max: T::lit(1e3),
            holder_max: T::lit(1e3),
            vorticity_max: T::lit(1e6),
            vorticity_exponent: T::lit(2.0),
            trivial_w: T::lit(1e-8),
            trivial_phi: T::lit(1e-8),
            height_margin_min: T::lit(1e-3),
            min_k_min: T::lit(1e-3),
            bed_clearance_min: T::lit(1e-3),
            bernoulli_gap_max: T::lit(1e-10),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ContinuationConfig<T> {
    pub initial_step: T,
    pub min_step: T,
    pub max_step: T,
    pub newton: NewtonOptions<T>,
    pub thresholds: Thresholds<T>,
    pub max_points: usize,
    /// `+1` follows `s > 0`, `-1` the mirrored half-branch.
    pub direction: T,
    /// Stop when a nodal property fails (only meaningful where it is expected).
    pub enforce_nodal: bool,
}

impl<T: Real> ContinuationConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let z = T::zero();
        if !(z < self.min_step && self.min_step <= self.initial_step && self.initial_step <= self.max_step) {
            return Err(Error::InvalidArgument("need 0 < min_step <= initial_step <= max_step".into()));
        }
        if !(self.newton.tolerance > z) || self.newton.max_iterations == 0 {
            return Err(Error::InvalidArgument("Newton tolerance and iteration limit must be positive".into()));
        }
        if self.direction.abs() != T::one() {
            return Err(Error::InvalidArgument("direction must be +1 or -1".into()));
        }
        Ok(())
    }
}

impl<T: Real> Default for ContinuationConfig<T> {
    fn default() -> Self {
        Self {
            initial_step: T::lit(0.01),
            min_step: T::lit(1e-6),
            max_step: T::lit(0.1),
            newton: NewtonOptions::default(),
            thresholds: Thresholds::default(),
            max_points: 100,
            direction: T::one(),
            enforce_nodal: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monitors<T> {
    pub greatest_height_margin: T,
    pub min_k: T,
    pub min_stagnation: T,
    pub bed_clearance: T,
    pub self_intersect: bool,
    pub wave_height: T,
    pub vorticity_lp: T,
    pub lambda_abs: T,
    pub q_abs: T,
    pub w_sup: T,
    pub w_slope_sup: T,
    pub w_holder: T,
    pub phi_sup: T,
    pub bernoulli_gap: T,
}

#[derive(Clone, Debug)]
pub struct BranchPoint<T> {
    pub state: State<T>,
    pub s: T,
    pub newton_iterations: usize,
    pub monitors: Monitors<T>,
    pub det_sign: T,
    pub log_abs_det: T,
}

/// Discrete Holder quotient `max |w(x_i) - w(x_j)| / |x_i - x_j|^alpha`.
pub fn holder_quotient<T: Real>(x: &[T], w: &[T], alpha: T) -> T {
    let mut best = T::zero();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let q = (w[i] - w[j]).abs() / (x[j] - x[i]).abs().powf(alpha);
            best = best.max(q);
        }
    }
    best
}

/// `(int int |gamma(psi)|^p |grad V|^2 dx dy)^{1/p}` over one period of the
/// strip, i.e. the vorticity norm over one period of the physical fluid.
pub fn vorticity_lp<T: Real>(problem: &Problem<T>, state: &State<T>, laminar: &LaminarFlow<T>, p: T) -> T {
    if problem.gamma.is_zero() {
        return T::zero();
    }
    let disc = &problem.disc;
    let samples = StripSamples::new(&state.w, &state.phi, disc);
    let g = disc.grid_len();
    let rows = problem.rows();
    let full = T::from_usize_lossy(4 * problem.order());
    let mut total = T::zero();
    for j in 0..=rows {
        let mut row = T::zero();
        for i in 0..g {
            let idx = j * g + i;
            let wt = if i == 0 || i == g - 1 { T::one() } else { T::lit(2.0) };
            let v = problem.gamma.value(samples.phi[idx] + laminar.psi[j]).abs().powf(p) * samples.grad_v_sq(idx);
            row = row + wt * v;
        }
        let yw = if j == 0 || j == rows { T::lit(0.5) } else { T::one() };
        total = total + yw * row;
    }
    (total * problem.period() / full * disc.dy()).powf(T::one() / p)
}

pub fn monitors<T: Real>(problem: &Problem<T>, state: &State<T>, eval: &Evaluation<T>, thresholds: &Thresholds<T>) -> Result<Monitors<T>> {
    let disc = &problem.disc;
    let sv = &eval.surface;
    let h = problem.depth();
    let wmin = sv.w.iter().fold(T::infinity(), |m, v| m.min(*v));
    let wmax = sv.w.iter().fold(T::neg_infinity(), |m, v| m.max(*v));
    let dw = disc.to_grid(&spectral::differentiate(&state.w));
    let curve = spectral::surface_curve(&state.w, h, 8 * problem.order().max(16))?;
    Ok(Monitors {
        greatest_height_margin: sv.greatest_height_margin,
        min_k: T::lit(sv.margins.min_k),
        min_stagnation: T::lit(sv.margins.min_stagnation),
        bed_clearance: wmin + h,
        self_intersect: spectral::curve_self_intersects(&curve, problem.period()),
        wave_height: wmax - wmin,
        vorticity_lp: vorticity_lp(problem, state, &eval.laminar, thresholds.vorticity_exponent),
        lambda_abs: state.lambda.abs(),
        q_abs: state.q.abs(),
        w_sup: wmin.abs().max(wmax.abs()),
        w_slope_sup: dw.iter().fold(T::zero(), |m, v| m.max(v.abs())),
        w_holder: holder_quotient(&disc.grid(), &sv.w, T::lit(0.875)),
        phi_sup: state.phi.max_abs(),
        bernoulli_gap: gap_of(sv),
    })
}

fn check_thresholds<T: Real>(m: &Monitors<T>, t: &Thresholds<T>, s: T, initial_step: T) -> Option<Verdict> {
    if m.lambda_abs > t.lambda_max {
        return Some(Verdict::LambdaUnbounded);
    }
    if m.w_holder > t.holder_max {
        return Some(Verdict::SurfaceUnbounded);
    }
    if m.vorticity_lp > t.vorticity_max {
        return Some(Verdict::VorticityUnbounded);
    }
    if m.w_sup < t.trivial_w && s.abs() > T::lit(10.0) * initial_step {
        return Some(if m.phi_sup < t.trivial_phi { Verdict::ReturnToTrivial } else { Verdict::FlatSurfaceNonzeroField });
    }
    if m.greatest_height_margin < t.height_margin_min {
        return Some(Verdict::GreatestHeight);
    }
    if m.min_k < t.min_k_min {
        return Some(Verdict::ConformalDegeneracy);
    }
    if m.self_intersect {
        return Some(Verdict::SelfIntersection);
    }
    if m.bed_clearance < t.bed_clearance_min {
        return Some(Verdict::BedContact);
    }
    None
}

#[derive(Clone, Debug)]
pub struct BranchRun<T> {
    pub tangent: Tangent<T>,
    pub points: Vec<BranchPoint<T>>,
    pub verdict: Verdict,
    /// Step size to use if the run is resumed.
    pub next_step: T,
}

/// Where a run starts: at the bifurcation point, or from two accepted points.
#[derive(Clone, Debug)]
pub enum Start<T> {
    Bifurcation(Tangent<T>),
    Resume { tangent: Tangent<T>, previous: State<T>, last: State<T>, s: T, step: T },
}

/// Pseudo-arclength continuation from a simple bifurcation point.
pub fn continue_branch<T: Real>(problem: &Problem<T>, point: &BifurcationPoint<T>, config: &ContinuationConfig<T>) -> Result<BranchRun<T>> {
    let tangent = bifurcation_tangent(problem, point)?;
    run_branch(problem, Start::Bifurcation(tangent), config, |_| {})
}

/// Continuation driver; `on_point` sees every accepted point as it arrives.
pub fn run_branch<T: Real>(
    problem: &Problem<T>,
    start: Start<T>,
    config: &ContinuationConfig<T>,
    mut on_point: impl FnMut(&BranchPoint<T>),
) -> Result<BranchRun<T>> {
    config.validate()?;
    let weights = arclength_weights(problem);
    let (tangent, mut prev, mut curr, mut s, mut step) = match start {
        Start::Bifurcation(t) => {
            let x0 = pack_state(&State::trivial(problem, t.lambda0));
            let norm = weighted_dot(&t.direction, &t.direction, &weights).sqrt();
            let dir: Vec<T> = t.direction.iter().map(|v| config.direction * *v / norm).collect();
            // `prev` holds a virtual point one unit back along the tangent.
            let virtual_prev: Vec<T> = x0.iter().zip(&dir).map(|(a, d)| *a - *d).collect();
            (t, virtual_prev, x0, T::zero(), config.initial_step)
        }
        Start::Resume { tangent, previous, last, s, step } => (tangent, pack_state(&previous), pack_state(&last), s, step),
    };
    let orientation = if tangent.lambda0 < T::zero() { -T::one() } else { T::one() };
    let branch = BranchOrientation::new(tangent.lambda0, config.direction);
    let mut points: Vec<BranchPoint<T>> = Vec::new();
    let verdict = loop {
        if points.len() >= config.max_points {
            break Verdict::BudgetExhausted;
        }
        let diff: Vec<T> = curr.iter().zip(&prev).map(|(a, b)| *a - *b).collect();
        let norm = weighted_dot(&diff, &diff, &weights).sqrt();
        let dir: Vec<T> = diff.iter().map(|v| *v / norm).collect();
        let guess: Vec<T> = curr.iter().zip(&dir).map(|(a, d)| *a + step * *d).collect();
        let constraint = Constraint::Arclength { anchor: curr.clone(), direction: dir, weights: weights.clone(), target: step };
        let outcome = unpack_state(problem, &guess, orientation)
            .and_then(|g| newton_correct(problem, &g, &constraint, &config.newton));
        let outcome = match outcome {
            Ok(o) => o,
            Err(Error::NoConvergence { .. }) | Err(Error::Inadmissible(_)) | Err(Error::Singular(_)) => {
                step = step * T::lit(0.5);
                if step < config.min_step {
                    break Verdict::Stalled;
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let m = monitors(problem, &outcome.state, &outcome.evaluation, &config.thresholds)?;
        if !(m.bernoulli_gap <= config.thresholds.bernoulli_gap_max) {
            break Verdict::ResolutionExhausted;
        }
        s = s + step;
        let bp = BranchPoint {
            state: outcome.state.clone(),
            s,
            newton_iterations: outcome.iterations,
            monitors: m,
            det_sign: outcome.det_sign,
            log_abs_det: outcome.log_abs_det,
        };
        on_point(&bp);
        let hit = check_thresholds(&bp.monitors, &config.thresholds, s, config.initial_step);
        let nodal_failed = config.enforce_nodal && !diagnostics::nodal_check(problem, &bp.state, branch)?.all_pass();
        points.push(bp);
        if let Some(v) = hit {
            break v;
        }
        if nodal_failed {
            break Verdict::NodalViolation;
        }
        prev = std::mem::replace(&mut curr, pack_state(&outcome.state));
        if outcome.iterations <= 3 {
            step = (step * T::lit(2.0)).min(config.max_step);
        } else if outcome.iterations > 7 {
            step = (step * T::lit(0.5)).max(config.min_step);
        }
    };
    Ok(BranchRun { tangent, points, verdict, next_step: step })
}

/// Arclength values between consecutive points where the bordered Jacobian
/// determinant changes sign.
pub fn detect_secondary_bifurcation<T: Real>(points: &[BranchPoint<T>]) -> Result<Vec<T>> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(format!("need at least 3 branch points, got {}", points.len())));
    }
    Ok(points
        .windows(2)
        .filter(|w| w[0].det_sign != w[1].det_sign)
        .map(|w| (w[0].s + w[1].s) * T::lit(0.5))
        .collect())
}
