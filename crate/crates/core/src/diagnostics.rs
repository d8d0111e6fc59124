//! Structural properties of computed waves: nodal pattern, the field `f`
//! (minus the horizontal derivative of the physical stream function),
//! unidirectionality, overhangs, stagnation and surface geometry.
//!
//! Open conditions are tested on grids with an absolute margin; reports keep
//! the worst value found so a near-miss is visible.

use crate::elliptic::{top_slope, StripSamples};
use crate::operator::{Problem, State};
use crate::spectral::{self, differentiate, hilbert_strip, Parity, PeriodicScalar, StripField};
use crate::{Error, Real, Result};

/// Absolute margin for strict inequalities.
pub const DEFAULT_MARGIN: f64 = 1e-10;

/// Sign conventions of one half-branch, fixed at its bifurcation point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchOrientation<T> {
    /// `sgn(lambda0)`.
    pub flow: T,
    /// `+1` for the half-branch leaving along the tangent, `-1` for its mirror.
    pub direction: T,
}

impl<T: Real> BranchOrientation<T> {
    pub fn new(lambda0: T, direction: T) -> Self {
        let flow = if lambda0 < T::zero() { -T::one() } else { T::one() };
        let direction = if direction < T::zero() { -T::one() } else { T::one() };
        Self { flow, direction }
    }

    /// Sign `c` with `c w' > 0` on `(0, L/2)`: the crest sits at `x = 0` when
    /// `c = -1` and the trough does when `c = +1`.
    pub fn monotone_sign(&self) -> T {
        self.direction * self.flow
    }

    /// Sign of `f` inside the half cell.
    pub fn f_sign(&self) -> T {
        self.direction
    }
}

/// Samples of the half period `[0, L/2]` used by [`nodal_check`].
fn half_period_points<T: Real>(period: T, intervals: usize) -> Vec<T> {
    (0..=intervals)
        .map(|i| period * T::from_usize_lossy(i) / T::from_usize_lossy(2 * intervals))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodalReport<T> {
    /// Number of subintervals of `[0, L/2]` sampled.
    pub intervals: usize,
    pub bed_clear: bool,
    /// `min (w + h)`.
    pub bed_margin: T,
    pub monotone_crest_to_trough: bool,
    /// `min c w'` over interior samples.
    pub monotone_margin: T,
    /// `w' = 0` everywhere: the surface is flat.
    pub flat: bool,
    /// `w''(0)` and `w''(L/2)`.
    pub crest_curvature: T,
    pub trough_curvature: T,
    pub crest_curvature_ok: bool,
    pub trough_curvature_ok: bool,
    /// `0 < x + C w < L/2` on `(0, L/2)`.
    pub mapped_half_period_ok: bool,
    pub mapped_margin: T,
    /// `1 + C w' > 0` at `x = 0` and `x = L/2`.
    pub endpoint_ux_positive: bool,
    pub endpoint_ux_margin: T,
    /// Independent segment-intersection test on the surface curve.
    pub curve_self_intersects: bool,
}

impl<T: Real> NodalReport<T> {
    pub fn all_pass(&self) -> bool {
        self.bed_clear
            && self.monotone_crest_to_trough
            && self.crest_curvature_ok
            && self.trough_curvature_ok
            && self.mapped_half_period_ok
            && self.endpoint_ux_positive
    }
}

pub fn nodal_check<T: Real>(problem: &Problem<T>, state: &State<T>, branch: BranchOrientation<T>) -> Result<NodalReport<T>> {
    nodal_check_with_margin(problem, state, branch, T::lit(DEFAULT_MARGIN))
}

pub fn nodal_check_with_margin<T: Real>(
    problem: &Problem<T>,
    state: &State<T>,
    branch: BranchOrientation<T>,
    margin: T,
) -> Result<NodalReport<T>> {
    state.validate(problem)?;
    let w = &state.w;
    let h = problem.depth();
    let l = problem.period();
    let half = l / T::lit(2.0);
    let intervals = 8 * problem.order().max(4);
    let xs = half_period_points(l, intervals);
    let c = branch.monotone_sign();

    let (dw, ux) = spectral::surface_gradient(w, h)?;
    let d2w = differentiate(&dw);
    let cw = hilbert_strip(w, h)?;

    let bed_margin = xs.iter().fold(T::infinity(), |m, x| m.min(w.eval(*x) + h));
    let interior = &xs[1..intervals];
    let monotone_margin = interior.iter().fold(T::infinity(), |m, x| m.min(c * dw.eval(*x)));
    let flat = w.max_coeff() == T::zero();
    let crest_curvature = d2w.eval(T::zero());
    let trough_curvature = d2w.eval(half);
    let mapped_margin = interior.iter().fold(T::infinity(), |m, x| {
        let u = *x + cw.eval(*x);
        m.min(u).min(half - u)
    });
    let endpoint_ux_margin = ux.eval(T::zero()).min(ux.eval(half));
    let curve = spectral::surface_curve(w, h, 16 * problem.order().max(8))?;

    Ok(NodalReport {
        intervals,
        bed_clear: bed_margin > margin,
        bed_margin,
        monotone_crest_to_trough: !flat && monotone_margin > margin,
        monotone_margin,
        flat,
        crest_curvature,
        trough_curvature,
        crest_curvature_ok: c * crest_curvature > margin,
        trough_curvature_ok: -c * trough_curvature > margin,
        mapped_half_period_ok: mapped_margin > margin,
        mapped_margin,
        endpoint_ux_positive: endpoint_ux_margin > margin,
        endpoint_ux_margin,
        curve_self_intersects: spectral::curve_self_intersects(&curve, l),
    })
}

/// First derivative of a profile on the uniform y-grid, fourth order
/// everywhere (one-sided near the ends).
fn profile_slope<T: Real>(u: &[T], dy: T) -> Vec<T> {
    let m = u.len() - 1;
    let c12 = T::lit(12.0) * dy;
    let k = |v: f64| T::lit(v);
    let mut out = vec![T::zero(); m + 1];
    out[0] = (k(-25.0) * u[0] + k(48.0) * u[1] - k(36.0) * u[2] + k(16.0) * u[3] - k(3.0) * u[4]) / c12;
    out[1] = (k(-3.0) * u[0] - k(10.0) * u[1] + k(18.0) * u[2] - k(6.0) * u[3] + u[4]) / c12;
    for j in 2..m - 1 {
        out[j] = (u[j - 2] - k(8.0) * u[j - 1] + k(8.0) * u[j + 1] - u[j + 2]) / c12;
    }
    out[m - 1] = (k(3.0) * u[m] + k(10.0) * u[m - 1] - k(18.0) * u[m - 2] + k(6.0) * u[m - 3] - u[m - 4]) / c12;
    out[m] = top_slope(u, dy);
    out
}

/// Grid values of `phi_x` and `phi_y`, rows `y_j`, columns the collocation grid.
fn phi_gradient<T: Real>(problem: &Problem<T>, phi: &StripField<T>) -> (Vec<T>, Vec<T>) {
    let disc = &problem.disc;
    let g = disc.grid_len();
    let n = problem.order();
    let rows = problem.rows();
    let nu = problem.nu();
    let slopes: Vec<Vec<T>> = (0..=n).map(|k| profile_slope(phi.profile(k), disc.dy())).collect();
    let mut px = vec![T::zero(); (rows + 1) * g];
    let mut py = vec![T::zero(); (rows + 1) * g];
    let mut cx = vec![T::zero(); n + 1];
    let mut cy = vec![T::zero(); n + 1];
    for j in 0..=rows {
        for k in 0..=n {
            cx[k] = -T::from_usize_lossy(k) * nu * phi.profile(k)[j];
            cy[k] = slopes[k][j];
        }
        disc.synth_sin(&cx, &mut px[j * g..(j + 1) * g]);
        disc.synth_cos(&cy, &mut py[j * g..(j + 1) * g]);
    }
    (px, py)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Positivity {
    Positive,
    Violated,
    /// `f` vanishes to the margin: nothing to test.
    DegenerateFlat,
}

#[derive(Clone, Debug)]
pub struct FField<T> {
    /// Sine profiles of `f` (it is odd in `x`).
    pub field: StripField<T>,
    /// Grid values, `(M + 1) x G` row-major.
    pub values: Vec<T>,
    pub verdict: Positivity,
    /// `min sign * f` over `(0, L/2) x (-h, 0]`.
    pub margin: T,
    /// `max |f|` on `x = 0`, `x = L/2` and `y = -h`.
    pub boundary_max: T,
    /// `max |f - orientation w' sqrt(2q + lambda^2 - 2 g w) / K|` on the surface.
    pub surface_identity_gap: T,
}

/// `f = (V_x (phi_y + psi_y) - V_y phi_x) / |grad V|^2` on the flattened grid.
pub fn f_field<T: Real>(problem: &Problem<T>, state: &State<T>, branch: BranchOrientation<T>) -> Result<FField<T>> {
    f_field_with_margin(problem, state, branch, T::lit(DEFAULT_MARGIN))
}

pub fn f_field_with_margin<T: Real>(
    problem: &Problem<T>,
    state: &State<T>,
    branch: BranchOrientation<T>,
    margin: T,
) -> Result<FField<T>> {
    state.validate(problem)?;
    let disc = &problem.disc;
    let g = disc.grid_len();
    let rows = problem.rows();
    let s = StripSamples::new(&state.w, &state.phi, disc);
    let min_grad = (0..s.vx.len()).fold(T::infinity(), |m, i| m.min(s.grad_v_sq(i)));
    if !(min_grad > margin) {
        return Err(Error::Refused(format!("|grad V|^2 drops to {min_grad}; f is undefined")));
    }
    let laminar = problem.laminar(state.lambda)?;
    let (px, py) = phi_gradient(problem, &state.phi);
    let mut values = vec![T::zero(); (rows + 1) * g];
    for j in 0..=rows {
        for i in 0..g {
            let idx = j * g + i;
            values[idx] = (s.vx[idx] * (py[idx] + laminar.psi_y[j]) - s.vy[idx] * px[idx]) / s.grad_v_sq(idx);
        }
    }
    let sign = branch.f_sign();
    let mut field = disc.zero_field(Parity::Odd);
    let mut c = vec![T::zero(); problem.order() + 1];
    for j in 0..=rows {
        disc.project_sin(&values[j * g..(j + 1) * g], &mut c);
        for (k, ck) in c.iter().enumerate() {
            field.profile_mut(k)[j] = *ck;
        }
    }
    let mut inner = T::infinity();
    let mut largest = T::zero();
    for j in 1..=rows {
        for i in 1..g - 1 {
            let v = values[j * g + i];
            inner = inner.min(sign * v);
            largest = largest.max(v.abs());
        }
    }
    let mut boundary_max = T::zero();
    for j in 0..=rows {
        boundary_max = boundary_max.max(values[j * g].abs()).max(values[j * g + g - 1].abs());
    }
    for i in 0..g {
        boundary_max = boundary_max.max(values[i].abs());
    }
    let kv = spectral::metric_k(&state.w, disc)?;
    let dw = disc.to_grid(&differentiate(&state.w));
    let wg = disc.to_grid(&state.w);
    let two = T::lit(2.0);
    let mut surface_identity_gap = T::zero();
    for i in 0..g {
        let head = (two * state.q + state.lambda * state.lambda - two * problem.gravity * wg[i]).max(T::zero());
        let expect = state.orientation * dw[i] * head.sqrt() / kv.values[i];
        surface_identity_gap = surface_identity_gap.max((values[rows * g + i] - expect).abs());
    }
    let verdict = if largest <= margin {
        Positivity::DegenerateFlat
    } else if inner > margin {
        Positivity::Positive
    } else {
        Positivity::Violated
    };
    Ok(FField { field, values, verdict, margin: inner, boundary_max, surface_identity_gap })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DownstreamReport<T> {
    pub unidirectional: bool,
    /// `min sgn(lambda0) * (horizontal physical velocity)` on the closed strip grid.
    pub unidirectional_margin: T,
    pub overhang_free: bool,
    /// `min (1 + C w')` on the fine half-period samples.
    pub overhang_margin: T,
}

/// Horizontal velocity `(V_x phi_x + V_y (phi_y + psi_y)) / |grad V|^2` has the
/// sign of `lambda0` everywhere, and the surface is a graph.
pub fn downstream_check<T: Real>(problem: &Problem<T>, state: &State<T>) -> Result<DownstreamReport<T>> {
    downstream_check_with_margin(problem, state, T::lit(DEFAULT_MARGIN))
}

pub fn downstream_check_with_margin<T: Real>(problem: &Problem<T>, state: &State<T>, margin: T) -> Result<DownstreamReport<T>> {
    state.validate(problem)?;
    let disc = &problem.disc;
    let g = disc.grid_len();
    let rows = problem.rows();
    let (_, ux) = spectral::surface_gradient(&state.w, problem.depth())?;
    let xs = half_period_points(problem.period(), 8 * problem.order().max(4));
    let overhang_margin = xs.iter().fold(T::infinity(), |m, x| m.min(ux.eval(*x)));

    let s = StripSamples::new(&state.w, &state.phi, disc);
    let laminar = problem.laminar(state.lambda)?;
    let (px, py) = phi_gradient(problem, &state.phi);
    let mut unidirectional_margin = T::infinity();
    for j in 0..=rows {
        for i in 0..g {
            let idx = j * g + i;
            let gv = s.grad_v_sq(idx);
            let u = (s.vx[idx] * px[idx] + s.vy[idx] * (py[idx] + laminar.psi_y[j])) / gv;
            // A vanishing |grad V| makes the quotient NaN; count it as failure.
            let u = if u.is_nan() { T::neg_infinity() } else { state.orientation * u };
            unidirectional_margin = unidirectional_margin.min(u);
        }
    }
    Ok(DownstreamReport {
        unidirectional: unidirectional_margin > margin,
        unidirectional_margin,
        overhang_free: overhang_margin > margin,
        overhang_margin,
    })
}

/// Flattened-grid point where `|grad (phi + psi)|` is below a threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StagnationPoint<T> {
    pub x: T,
    pub y: T,
    pub speed: T,
}

pub fn stagnation_scan<T: Real>(problem: &Problem<T>, state: &State<T>, threshold: T) -> Result<Vec<StagnationPoint<T>>> {
    state.validate(problem)?;
    let disc = &problem.disc;
    let g = disc.grid_len();
    let laminar = problem.laminar(state.lambda)?;
    let (px, py) = phi_gradient(problem, &state.phi);
    let mut out = Vec::new();
    for j in 0..=problem.rows() {
        for i in 0..g {
            let idx = j * g + i;
            let speed = px[idx].hypot(py[idx] + laminar.psi_y[j]);
            if speed < threshold {
                out.push(StagnationPoint { x: disc.grid_x(i), y: disc.y(j), speed });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveGeometry<T> {
    /// Half the crest-to-trough height.
    pub amplitude: T,
    pub height: T,
    pub crest: (T, T),
    pub trough: (T, T),
    /// Height over period.
    pub steepness: T,
    /// Largest angle of the surface tangent with the horizontal, radians.
    pub max_angle: T,
}

/// Geometry of the physical surface `(x + C w, w + h)`.
pub fn geometry<T: Real>(problem: &Problem<T>, w: &PeriodicScalar<T>) -> Result<WaveGeometry<T>> {
    let h = problem.depth();
    let l = problem.period();
    let cw = hilbert_strip(w, h)?;
    let (dw, ux) = spectral::surface_gradient(w, h)?;
    let xs = half_period_points(l, 8 * problem.order().max(4));
    let point = |x: T| (x + cw.eval(x), w.eval(x) + h);
    let mut crest = point(xs[0]);
    let mut trough = crest;
    let mut max_angle = T::zero();
    for x in &xs {
        let p = point(*x);
        if p.1 > crest.1 {
            crest = p;
        }
        if p.1 < trough.1 {
            trough = p;
        }
        max_angle = max_angle.max(dw.eval(*x).abs().atan2(ux.eval(*x)));
    }
    let height = crest.1 - trough.1;
    Ok(WaveGeometry {
        amplitude: height / T::lit(2.0),
        height,
        crest,
        trough,
        steepness: height / l,
        max_angle,
    })
}

/// Every structural check for one state.
#[derive(Clone, Debug)]
pub struct WaveReport<T> {
    /// `(N, M)` the checks ran at.
    pub resolution: (usize, usize),
    pub nodal: NodalReport<T>,
    /// `None` when `f` could not be formed.
    pub f_positive: Option<bool>,
    pub f_margin: Option<T>,
    pub downstream: DownstreamReport<T>,
    pub geometry: WaveGeometry<T>,
}

impl<T: Real> WaveReport<T> {
    pub fn unidirectional(&self) -> bool {
        self.downstream.unidirectional
    }

    pub fn overhang_free(&self) -> bool {
        self.downstream.overhang_free
    }
}

pub fn wave_report<T: Real>(problem: &Problem<T>, state: &State<T>, branch: BranchOrientation<T>) -> Result<WaveReport<T>> {
    let nodal = nodal_check(problem, state, branch)?;
    let (f_positive, f_margin) = match f_field(problem, state, branch) {
        Ok(f) => (Some(f.verdict == Positivity::Positive), Some(f.margin)),
        Err(Error::Refused(_)) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(WaveReport {
        resolution: (problem.order(), problem.rows()),
        nodal,
        f_positive,
        f_margin,
        downstream: downstream_check(problem, state)?,
        geometry: geometry(problem, &state.w)?,
    })
}
