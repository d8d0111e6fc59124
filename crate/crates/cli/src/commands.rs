use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gravwave::continuation::{bifurcation_tangent, detect_secondary_bifurcation, run_branch, BranchPoint, Start, Verdict};
use gravwave::diagnostics::{wave_report, BranchOrientation, WaveReport};
use gravwave::laminar::{find_bifurcation, solve_laminar, BifurcationPoint, DispersionSetup, RootScan};
use gravwave::operator::{evaluate, physical_oracle, Problem, State};
use gravwave::spectral::surface_curve;
use serde_json::{json, Value};

use crate::config::{ContinueOptions, RunConfig};
use crate::error::{CliError, CliResult};
use crate::persist::{write_json, BranchInfo, Checkpoint, StateBody, StateFile, TangentBody, CHECKPOINT_FORMAT, VERSION};

pub const LAMINAR_COLUMNS: &str = "lambda,m,psi_y_min,psi_y_max,critical_layer_count";
pub const DISPERSION_COLUMNS: &str = "k,mu,lambda,d,d_lambda,dirichlet_spectrum";
pub const ROOT_COLUMNS: &str = "k,lambda,d_lambda,multiplicity,kernel_modes";
pub const BRANCH_COLUMNS: &str = "s,lambda,q,wave_height,min_K,greatest_height_margin,bed_clearance,newton_iterations,verdict";
pub const PROFILE_COLUMNS: &str = "X,Y";

/// Plain decimal in `[1e-4, 1e6)`, shortest round-trip scientific otherwise.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn section_missing(name: &str) -> CliError {
    CliError::Config(format!("{name}: section missing"))
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

pub fn cmd_laminar(cfg: &RunConfig, out: &Path) -> CliResult<PathBuf> {
    let opts = cfg.laminar.as_ref().ok_or_else(|| section_missing("laminar"))?;
    let gamma = cfg.vorticity.build()?;
    let mut csv = format!("{LAMINAR_COLUMNS}\n");
    for lambda in linspace(opts.lambda_min, opts.lambda_max, opts.count) {
        let lam = solve_laminar(&gamma, lambda, cfg.physical.h, cfg.numerics.shooting())?;
        let (lo, hi) = lam.psi_y_range();
        writeln!(csv, "{},{},{},{},{}", num(lambda), num(lam.m), num(lo), num(hi), lam.critical_layer_count()).unwrap();
    }
    create_dir(out)?;
    let path = out.join("laminar.csv");
    write_text(&path, &csv)?;
    Ok(path)
}

/// Splits a bracket that straddles zero into its two one-sided parts.
fn one_sided(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let gap = 1e-3 * lo.abs().max(hi.abs());
    let mut out = Vec::new();
    if lo < 0.0 {
        out.push((lo, hi.min(-gap)));
    }
    if hi > 0.0 {
        out.push((lo.max(gap), hi));
    }
    out.retain(|(a, b)| a < b);
    out
}

fn root_rows(setup: &DispersionSetup<f64>, ks: &[usize], brackets: &[(f64, f64)], scan: &RootScan) -> CliResult<Vec<BifurcationPoint<f64>>> {
    let mut points = Vec::new();
    for &k in ks {
        for &(lo, hi) in brackets {
            points.extend(find_bifurcation(setup, k, (lo, hi), scan)?);
        }
    }
    Ok(points)
}

fn root_csv(points: &[BifurcationPoint<f64>]) -> String {
    let mut csv = format!("{ROOT_COLUMNS}\n");
    for p in points {
        let modes: Vec<String> = p.kernel_modes.iter().map(|k| k.to_string()).collect();
        writeln!(csv, "{},{},{},{},{}", p.k, num(p.lambda), num(p.d_lambda), p.multiplicity(), modes.join(";")).unwrap();
    }
    csv
}

pub fn cmd_dispersion(cfg: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let opts = cfg.dispersion.as_ref().ok_or_else(|| section_missing("dispersion"))?;
    let setup = cfg.dispersion_setup()?;
    let nu = setup.nu();
    let mut rows: Vec<(String, f64)> = opts.k.iter().map(|k| (k.to_string(), -(*k as f64 * nu).powi(2))).collect();
    rows.extend(opts.mu.iter().map(|mu| (String::new(), *mu)));
    let mut csv = format!("{DISPERSION_COLUMNS}\n");
    for (label, mu) in &rows {
        for lambda in linspace(opts.lambda_min, opts.lambda_max, opts.count) {
            if lambda == 0.0 {
                continue;
            }
            let r = setup.dispersion(lambda, *mu)?;
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            writeln!(csv, "{label},{},{},{},{},{}", num(*mu), num(lambda), opt(r.d), opt(r.d_lambda), r.in_dirichlet_spectrum()).unwrap();
        }
    }
    create_dir(out)?;
    let path = out.join("dispersion.csv");
    write_text(&path, &csv)?;
    let mut written = vec![path];
    if opts.roots {
        let brackets = one_sided(opts.lambda_min, opts.lambda_max);
        let points = root_rows(&setup, &opts.k, &brackets, &cfg.numerics.root_scan())?;
        let path = out.join("dispersion_roots.csv");
        write_text(&path, &root_csv(&points))?;
        written.push(path);
    }
    Ok(written)
}

fn point_json(p: &BifurcationPoint<f64>) -> Value {
    json!({
        "k": p.k,
        "lambda": p.lambda,
        "d_lambda": p.d_lambda,
        "kernel_modes": p.kernel_modes,
        "simple": p.multiplicity() == 1,
    })
}

pub fn cmd_bifurcate(cfg: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let opts = cfg.bifurcate.clone().unwrap_or(crate::config::BifurcateOptions { k: vec![1, 2, 3], brackets: vec![[-50.0, -0.05], [0.05, 50.0]] });
    let setup = cfg.dispersion_setup()?;
    let brackets: Vec<(f64, f64)> = opts.brackets.iter().map(|[a, b]| (*a, *b)).collect();
    let points = root_rows(&setup, &opts.k, &brackets, &cfg.numerics.root_scan())?;
    create_dir(out)?;
    let csv = out.join("bifurcation.csv");
    write_text(&csv, &root_csv(&points))?;
    let js = out.join("bifurcation.json");
    write_json(&js, &json!({ "points": points.iter().map(point_json).collect::<Vec<_>>() }))?;
    Ok(vec![csv, js])
}

pub fn report_json(r: &WaveReport<f64>) -> Value {
    let n = &r.nodal;
    json!({
        "resolution": { "N": r.resolution.0, "M": r.resolution.1 },
        "nodal": {
            "bed_clear": n.bed_clear,
            "bed_margin": n.bed_margin,
            "monotone_crest_to_trough": n.monotone_crest_to_trough,
            "monotone_margin": n.monotone_margin,
            "flat": n.flat,
            "crest_curvature": n.crest_curvature,
            "trough_curvature": n.trough_curvature,
            "crest_curvature_ok": n.crest_curvature_ok,
            "trough_curvature_ok": n.trough_curvature_ok,
            "mapped_half_period_ok": n.mapped_half_period_ok,
            "mapped_margin": n.mapped_margin,
            "endpoint_ux_positive": n.endpoint_ux_positive,
            "endpoint_ux_margin": n.endpoint_ux_margin,
            "curve_self_intersects": n.curve_self_intersects,
            "all_pass": n.all_pass(),
        },
        "f_positive": r.f_positive,
        "f_margin": r.f_margin,
        "unidirectional": r.unidirectional(),
        "unidirectional_margin": r.downstream.unidirectional_margin,
        "overhang_free": r.overhang_free(),
        "overhang_margin": r.downstream.overhang_margin,
        "geometry": {
            "amplitude": r.geometry.amplitude,
            "height": r.geometry.height,
            "crest": [r.geometry.crest.0, r.geometry.crest.1],
            "trough": [r.geometry.trough.0, r.geometry.trough.1],
            "steepness": r.geometry.steepness,
            "max_angle": r.geometry.max_angle,
        },
    })
}

/// Inputs fixed for one half-branch run.
struct Half<'a> {
    cfg: &'a RunConfig,
    opts: ContinueOptions,
    problem: &'a Problem<f64>,
    branch: BranchInfo,
    tangent: TangentBody,
    out: PathBuf,
    /// Index of the first point of this run (nonzero on resume).
    offset: usize,
}

fn branch_row(bp: &BranchPoint<f64>, verdict: &str) -> String {
    let m = &bp.monitors;
    format!(
        "{},{},{},{},{},{},{},{},{}\n",
        num(bp.s),
        num(bp.state.lambda),
        num(bp.state.q),
        num(m.wave_height),
        num(m.min_k),
        num(m.greatest_height_margin),
        num(m.bed_clearance),
        bp.newton_iterations,
        verdict
    )
}

impl Half<'_> {
    fn snapshot(&self, index: usize, bp: &BranchPoint<f64>) -> CliResult<Value> {
        let name = format!("{index:05}");
        let curve = surface_curve(&bp.state.w, self.problem.depth(), 16 * self.problem.order().max(8))?;
        let mut csv = format!("{PROFILE_COLUMNS}\n");
        for (x, y) in &curve {
            writeln!(csv, "{},{}", num(*x), num(*y)).unwrap();
        }
        let profile = format!("profiles/profile_{name}.csv");
        write_text(&self.out.join(&profile), &csv)?;
        let state = format!("states/state_{name}.json");
        write_json(&self.out.join(&state), &StateFile::new(self.cfg, &bp.state, Some(self.branch), Some(bp.s)))?;
        let orientation = BranchOrientation::new(self.branch.lambda0, self.branch.direction);
        let report = match wave_report(self.problem, &bp.state, orientation) {
            Ok(r) => report_json(&r),
            Err(e) => json!({ "error": e.to_string() }),
        };
        Ok(json!({
            "index": index,
            "s": bp.s,
            "lambda": bp.state.lambda,
            "q": bp.state.q,
            "wave_height": bp.monitors.wave_height,
            "bernoulli_gap": bp.monitors.bernoulli_gap,
            "profile": profile,
            "state": state,
            "report": report,
        }))
    }

    fn checkpoint(&self, previous: &State<f64>, last: &State<f64>, points: usize, s: f64, step: f64) -> CliResult<()> {
        let c = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: VERSION,
            config: self.cfg.clone(),
            branch: self.branch,
            tangent: self.tangent.clone(),
            points,
            s,
            step,
            previous: StateBody::from_state(previous),
            last: StateBody::from_state(last),
        };
        write_json(&self.out.join("checkpoint.json"), &c)
    }

    /// Runs the half-branch, streaming rows and snapshots, and always leaves
    /// a summary and (once a point exists) a checkpoint behind.
    fn run(&self, start: Start<f64>) -> CliResult<Value> {
        create_dir(&self.out.join("profiles"))?;
        create_dir(&self.out.join("states"))?;
        let config = self.opts.continuation(&self.cfg.numerics, self.branch.direction);
        let (mut previous, mut last, mut s0) = match &start {
            Start::Bifurcation(t) => (State::trivial(self.problem, t.lambda0), None, 0.0),
            Start::Resume { previous, last, s, .. } => (previous.clone(), Some(last.clone()), *s),
        };
        let mut csv = format!("{BRANCH_COLUMNS}\n");
        let mut pending: Option<BranchPoint<f64>> = None;
        let mut snapshots = Vec::new();
        let mut io_error: Option<CliError> = None;
        let mut count = 0usize;
        let every = self.opts.snapshot_every;
        let result = run_branch(self.problem, start, &config, |bp| {
            if let Some(p) = pending.take() {
                csv.push_str(&branch_row(&p, "continuing"));
            }
            count += 1;
            let index = self.offset + count;
            if index.is_multiple_of(every) && io_error.is_none() {
                match self.snapshot(index, bp) {
                    Ok(v) => snapshots.push(v),
                    Err(e) => io_error = Some(e),
                }
            }
            if let Some(l) = last.replace(bp.state.clone()) {
                previous = l;
            }
            s0 = bp.s;
            pending = Some(bp.clone());
        });
        let (verdict, error, next_step, secondary) = match &result {
            Ok(run) => {
                let secondary = if run.points.len() >= 3 { detect_secondary_bifurcation(&run.points)? } else { Vec::new() };
                (run.verdict.label().to_string(), None, Some(run.next_step), secondary)
            }
            Err(e) => ("error".to_string(), Some(e.to_string()), None, Vec::new()),
        };
        if let Some(p) = pending.take() {
            csv.push_str(&branch_row(&p, &verdict));
            let index = self.offset + count;
            if !index.is_multiple_of(every) && io_error.is_none() {
                snapshots.push(self.snapshot(index, &p)?);
            }
        }
        write_text(&self.out.join("branch.csv"), &csv)?;
        if let Some(l) = &last {
            let step = next_step.unwrap_or(self.opts.initial_step);
            self.checkpoint(&previous, l, self.offset + count, s0, step)?;
        }
        let alternative = match &result {
            Ok(run) => run.verdict.is_alternative(),
            Err(_) => false,
        };
        let summary = json!({
            "verdict": verdict,
            "alternative": alternative,
            "error": error,
            "k": self.tangent.k0,
            "lambda0": self.branch.lambda0,
            "direction": self.branch.direction,
            "resolution": { "N": self.problem.order(), "M": self.problem.rows() },
            "first_index": self.offset + 1,
            "points": count,
            "s_final": s0,
            "next_step": next_step,
            "secondary_bifurcations": secondary,
            "snapshots": snapshots,
        });
        write_json(&self.out.join("summary.json"), &summary)?;
        if let Some(e) = io_error {
            return Err(e);
        }
        result?;
        Ok(summary)
    }
}

fn same_setup(a: &RunConfig, b: &RunConfig) -> bool {
    a.physical == b.physical && a.vorticity == b.vorticity && a.numerics.order == b.numerics.order && a.numerics.rows == b.numerics.rows
}

/// Continues a branch from its bifurcation point, or from a checkpoint.
/// Returns the run summaries, one per half-branch.
pub fn cmd_continue(cfg: Option<&RunConfig>, out: &Path, both_halves: bool, resume: Option<&Path>) -> CliResult<Vec<Value>> {
    if let Some(path) = resume {
        if both_halves {
            return Err(CliError::Config("--both-half-branches cannot be combined with --resume".into()));
        }
        let ck = Checkpoint::load(path)?;
        let cfg = match cfg {
            Some(c) if !same_setup(c, &ck.config) => {
                return Err(CliError::Config("resume: physical, vorticity or resolution differ from the checkpoint".into()))
            }
            Some(c) => c.clone(),
            None => ck.config.clone(),
        };
        let problem = cfg.problem()?;
        let tangent = ck.tangent.to_tangent();
        let start = Start::Resume {
            tangent,
            previous: ck.previous.to_state(&problem)?,
            last: ck.last.to_state(&problem)?,
            s: ck.s,
            step: ck.step,
        };
        let half = Half {
            cfg: &cfg,
            opts: cfg.continuation.clone().unwrap_or_default(),
            problem: &problem,
            branch: ck.branch,
            tangent: ck.tangent.clone(),
            out: out.to_path_buf(),
            offset: ck.points,
        };
        return Ok(vec![half.run(start)?]);
    }
    let cfg = cfg.ok_or_else(|| CliError::Config("continue needs --config or --resume".into()))?;
    let opts = cfg.continuation.clone().unwrap_or_default();
    let problem = cfg.problem()?;
    let setup = cfg.dispersion_setup()?;
    let roots = find_bifurcation(&setup, opts.k, opts.bracket(), &cfg.numerics.root_scan())?;
    let point = roots.get(opts.root_index).ok_or_else(|| {
        CliError::Numerical(format!("no bifurcation point with index {} for k = {} in {:?} ({} found)", opts.root_index, opts.k, opts.bracket(), roots.len()))
    })?;
    let tangent = bifurcation_tangent(&problem, point)?;
    let halves: Vec<(f64, PathBuf)> =
        if both_halves { vec![(1.0, out.join("plus")), (-1.0, out.join("minus"))] } else { vec![(1.0, out.to_path_buf())] };
    let mut summaries = Vec::new();
    for (direction, dir) in halves {
        let half = Half {
            cfg,
            opts: opts.clone(),
            problem: &problem,
            branch: BranchInfo { lambda0: point.lambda, direction },
            tangent: TangentBody::from_tangent(&tangent),
            out: dir,
            offset: 0,
        };
        summaries.push(half.run(Start::Bifurcation(tangent.clone()))?);
    }
    Ok(summaries)
}

/// Half-branch of a state without stored branch data: the flow sign from
/// `lambda`, the direction from the sign of the first Fourier mode.
fn inferred_branch(state: &State<f64>) -> BranchOrientation<f64> {
    let flow = state.lambda.signum();
    let w1 = state.w.cos().get(1).copied().unwrap_or(0.0);
    let direction = if w1 * flow > 0.0 { -1.0 } else { 1.0 };
    BranchOrientation::new(state.lambda, direction)
}

pub const RESIDUAL_BOUND: f64 = 1e-9;
pub const GAP_BOUND: f64 = 1e-10;

/// Verdict table for a persisted state, and its JSON form.
pub fn cmd_check(path: &Path, out: Option<&Path>) -> CliResult<(String, Value)> {
    let (file, problem, state) = StateFile::load(path)?;
    let eval = evaluate(&problem, &state)?;
    let residual = eval.residual.norm_inf();
    let gap = eval.surface.k.iter().zip(&eval.surface.r).fold(0.0f64, |m, (k, r)| m.max((k - r).abs()));
    let physical = physical_oracle(&problem, &state)?;
    let orientation = match file.branch {
        Some(b) => BranchOrientation::new(b.lambda0, b.direction),
        None => inferred_branch(&state),
    };
    let report = wave_report(&problem, &state, orientation)?;
    let pass = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "-".into());
    let solves = residual <= RESIDUAL_BOUND && gap <= GAP_BOUND;
    let mut t = String::new();
    writeln!(t, "{:<28} {:>24} {:>10} verdict", "quantity", "value", "bound").unwrap();
    let mut row = |name: &str, value: String, bound: &str, verdict: &str| {
        writeln!(t, "{name:<28} {value:>24} {bound:>10} {verdict}").unwrap();
    };
    row("residual_inf", num(residual), &num(RESIDUAL_BOUND), pass(residual <= RESIDUAL_BOUND));
    row("bernoulli_gap", num(gap), &num(GAP_BOUND), pass(gap <= GAP_BOUND));
    row("physical_interior", opt(physical.interior), "-", "info");
    row("physical_bernoulli", opt(physical.bernoulli), "-", "info");
    row("physical_surface_streamline", opt(physical.surface_streamline), "-", "info");
    row("physical_bed_streamline", opt(physical.bed_streamline), "-", "info");
    row("injective", physical.injective.to_string(), "-", pass(physical.injective));
    row("bed_clear", physical.bed_clear.to_string(), "-", pass(physical.bed_clear));
    row("nodal", report.nodal.all_pass().to_string(), "-", pass(report.nodal.all_pass()));
    row("f_positive", report.f_positive.map(|b| b.to_string()).unwrap_or_else(|| "undetermined".into()), "-", if report.f_positive == Some(true) { "PASS" } else { "FAIL" });
    row("unidirectional", report.unidirectional().to_string(), "-", pass(report.unidirectional()));
    row("overhang_free", report.overhang_free().to_string(), "-", pass(report.overhang_free()));
    row("wave_height", num(report.geometry.height), "-", "info");
    writeln!(t, "solution: {}", if solves { "yes" } else { "no" }).unwrap();
    let value = json!({
        "state": path.display().to_string(),
        "residual_inf": residual,
        "bernoulli_gap": gap,
        "solution": solves,
        "physical": {
            "injective": physical.injective,
            "bed_clear": physical.bed_clear,
            "interior": physical.interior,
            "bernoulli": physical.bernoulli,
            "surface_streamline": physical.surface_streamline,
            "bed_streamline": physical.bed_streamline,
        },
        "report": report_json(&report),
    });
    if let Some(dir) = out {
        create_dir(dir)?;
        write_json(&dir.join("check.json"), &value)?;
    }
    Ok((t, value))
}

/// Labels of every verdict, in declaration order.
pub fn verdict_labels() -> Vec<&'static str> {
    use Verdict::*;
    [
        LambdaUnbounded,
        SurfaceUnbounded,
        VorticityUnbounded,
        ReturnToTrivial,
        FlatSurfaceNonzeroField,
        GreatestHeight,
        ConformalDegeneracy,
        SelfIntersection,
        BedContact,
        BudgetExhausted,
        Stalled,
        NodalViolation,
        ResolutionExhausted,
    ]
    .iter()
    .map(|v| v.label())
    .collect()
}
