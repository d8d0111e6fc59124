//! Run configuration, read from TOML.
//!
//! `N` and `M` work best as powers of two; this is not enforced.

use std::path::{Path, PathBuf};

use gravwave::continuation::{ContinuationConfig, NewtonOptions, Thresholds};
use gravwave::laminar::{DispersionSetup, PiecewisePolynomial, RootScan, Vorticity};
use gravwave::operator::Problem;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physical {
    pub g: f64,
    pub h: f64,
    #[serde(rename = "L")]
    pub period: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VorticitySpec {
    Constant {
        value: f64,
    },
    Affine {
        slope: f64,
        intercept: f64,
    },
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Polynomial pieces in local powers of `s - breakpoints[i]`.
    Piecewise {
        breakpoints: Vec<f64>,
        pieces: Vec<Vec<f64>>,
    },
}

impl Default for VorticitySpec {
    fn default() -> Self {
        VorticitySpec::Constant { value: 0.0 }
    }
}

impl VorticitySpec {
    pub fn build(&self) -> CliResult<Vorticity<f64>> {
        Ok(match self {
            VorticitySpec::Constant { value } => Vorticity::Constant(*value),
            VorticitySpec::Affine { slope, intercept } => Vorticity::Affine { slope: *slope, intercept: *intercept },
            VorticitySpec::Sine { amplitude, frequency, offset } => {
                Vorticity::Sine { amplitude: *amplitude, frequency: *frequency, offset: *offset }
            }
            VorticitySpec::Piecewise { breakpoints, pieces } => Vorticity::Piecewise(
                PiecewisePolynomial::new(breakpoints.clone(), pieces.clone())
                    .map_err(|e| CliError::Config(format!("vorticity: {e}")))?,
            ),
        })
    }

    fn values(&self) -> Vec<f64> {
        match self {
            VorticitySpec::Constant { value } => vec![*value],
            VorticitySpec::Affine { slope, intercept } => vec![*slope, *intercept],
            VorticitySpec::Sine { amplitude, frequency, offset } => vec![*amplitude, *frequency, *offset],
            VorticitySpec::Piecewise { breakpoints, pieces } => breakpoints.iter().chain(pieces.iter().flatten()).copied().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    #[serde(rename = "N", default = "default_order")]
    pub order: usize,
    #[serde(rename = "M", default = "default_rows")]
    pub rows: usize,
    #[serde(default = "default_tolerance")]
    pub newton_tolerance: f64,
    #[serde(default = "default_iterations")]
    pub newton_max_iterations: usize,
    /// Steps of the laminar and dispersion shooting; defaults to `M`.
    #[serde(default)]
    pub shooting_steps: Option<usize>,
    #[serde(default = "default_samples")]
    pub root_samples: usize,
}

fn default_order() -> usize {
    32
}
fn default_rows() -> usize {
    64
}
fn default_tolerance() -> f64 {
    1e-11
}
fn default_iterations() -> usize {
    12
}
fn default_samples() -> usize {
    400
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            order: default_order(),
            rows: default_rows(),
            newton_tolerance: default_tolerance(),
            newton_max_iterations: default_iterations(),
            shooting_steps: None,
            root_samples: default_samples(),
        }
    }
}

impl Numerics {
    pub fn shooting(&self) -> usize {
        self.shooting_steps.unwrap_or(self.rows)
    }

    pub fn root_scan(&self) -> RootScan {
        RootScan { samples: self.root_samples, ..RootScan::default() }
    }

    pub fn newton(&self) -> NewtonOptions<f64> {
        NewtonOptions { tolerance: self.newton_tolerance, max_iterations: self.newton_max_iterations }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminarOptions {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionOptions {
    /// Wavenumbers whose `mu = -(k nu)^2` is sampled.
    #[serde(default = "default_ks")]
    pub k: Vec<usize>,
    /// Additional raw values of `mu`.
    #[serde(default)]
    pub mu: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub count: usize,
    /// Also locate the roots in `lambda` for each `k`.
    #[serde(default = "yes")]
    pub roots: bool,
}

fn default_ks() -> Vec<usize> {
    vec![1, 2, 3]
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifurcateOptions {
    #[serde(default = "default_ks")]
    pub k: Vec<usize>,
    /// Brackets in `lambda`, none containing zero.
    #[serde(default = "default_brackets")]
    pub brackets: Vec<[f64; 2]>,
}

fn default_brackets() -> Vec<[f64; 2]> {
    vec![[-50.0, -0.05], [0.05, 50.0]]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Positive,
    Negative,
}

/// Optional overrides of the monitor thresholds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdOverrides {
    pub lambda_max: Option<f64>,
    pub holder_max: Option<f64>,
    pub vorticity_max: Option<f64>,
    pub vorticity_exponent: Option<f64>,
    pub trivial_w: Option<f64>,
    pub trivial_phi: Option<f64>,
    pub height_margin_min: Option<f64>,
    pub min_k_min: Option<f64>,
    pub bed_clearance_min: Option<f64>,
    pub bernoulli_gap_max: Option<f64>,
}

impl ThresholdOverrides {
    pub fn apply(&self) -> Thresholds<f64> {
        let mut t = Thresholds::default();
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut t.lambda_max, self.lambda_max);
        set(&mut t.holder_max, self.holder_max);
        set(&mut t.vorticity_max, self.vorticity_max);
        set(&mut t.vorticity_exponent, self.vorticity_exponent);
        set(&mut t.trivial_w, self.trivial_w);
        set(&mut t.trivial_phi, self.trivial_phi);
        set(&mut t.height_margin_min, self.height_margin_min);
        set(&mut t.min_k_min, self.min_k_min);
        set(&mut t.bed_clearance_min, self.bed_clearance_min);
        set(&mut t.bernoulli_gap_max, self.bernoulli_gap_max);
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinueOptions {
    #[serde(default = "one")]
    pub k: usize,
    /// Sign of `lambda0`.
    #[serde(default = "positive")]
    pub side: Side,
    /// Search bracket for `lambda0`; defaults to `[0.05, 50]` on the chosen side.
    #[serde(default)]
    pub bracket: Option<[f64; 2]>,
    /// Which root in the bracket, ordered by increasing `lambda`.
    #[serde(default)]
    pub root_index: usize,
    #[serde(default = "default_initial_step")]
    pub initial_step: f64,
    #[serde(default = "default_min_step")]
    pub min_step: f64,
    #[serde(default = "default_max_step")]
    pub max_step: f64,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
    /// Every `snapshot_every`-th point (and the last) gets profile, state and report output.
    #[serde(default = "default_snapshot")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub enforce_nodal: bool,
    #[serde(default)]
    pub thresholds: ThresholdOverrides,
}

fn one() -> usize {
    1
}
fn positive() -> Side {
    Side::Positive
}
fn default_initial_step() -> f64 {
    0.01
}
fn default_min_step() -> f64 {
    1e-6
}
fn default_max_step() -> f64 {
    0.05
}
fn default_max_points() -> usize {
    100
}
fn default_snapshot() -> usize {
    10
}

impl Default for ContinueOptions {
    fn default() -> Self {
        Self {
            k: one(),
            side: positive(),
            bracket: None,
            root_index: 0,
            initial_step: default_initial_step(),
            min_step: default_min_step(),
            max_step: default_max_step(),
            max_points: default_max_points(),
            snapshot_every: default_snapshot(),
            enforce_nodal: false,
            thresholds: ThresholdOverrides::default(),
        }
    }
}

impl ContinueOptions {
    pub fn bracket(&self) -> (f64, f64) {
        match (self.bracket, self.side) {
            (Some([a, b]), _) => (a, b),
            (None, Side::Positive) => (0.05, 50.0),
            (None, Side::Negative) => (-50.0, -0.05),
        }
    }

    pub fn continuation(&self, numerics: &Numerics, direction: f64) -> ContinuationConfig<f64> {
        ContinuationConfig {
            initial_step: self.initial_step,
            min_step: self.min_step,
            max_step: self.max_step,
            newton: numerics.newton(),
            thresholds: self.thresholds.apply(),
            max_points: self.max_points,
            direction,
            enforce_nodal: self.enforce_nodal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physical: Physical,
    #[serde(default)]
    pub vorticity: VorticitySpec,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub laminar: Option<LaminarOptions>,
    #[serde(default)]
    pub dispersion: Option<DispersionOptions>,
    #[serde(default)]
    pub bifurcate: Option<BifurcateOptions>,
    #[serde(default, rename = "continue")]
    pub continuation: Option<ContinueOptions>,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn bad(path: &str, what: &str) -> CliError {
    CliError::Config(format!("{path}: {what}"))
}

fn positive_finite(path: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(path, &format!("must be positive and finite, got {v}")))
    }
}

fn sweep(path: &str, lo: f64, hi: f64, count: usize) -> CliResult<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(bad(path, "need finite lambda_min <= lambda_max"));
    }
    if count == 0 {
        return Err(bad(&format!("{path}.count"), "must be at least 1"));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let msg = inner.message().to_string();
            if path.is_empty() || path == "." {
                CliError::Config(msg)
            } else {
                CliError::Config(format!("{path}: {msg}"))
            }
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg = Self::from_toml(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        positive_finite("physical.g", self.physical.g)?;
        positive_finite("physical.h", self.physical.h)?;
        positive_finite("physical.L", self.physical.period)?;
        if self.vorticity.values().iter().any(|v| !v.is_finite()) {
            return Err(bad("vorticity", "parameters must be finite"));
        }
        self.vorticity.build()?;
        let n = &self.numerics;
        if n.order == 0 {
            return Err(bad("numerics.N", "must be at least 1"));
        }
        if n.rows < 16 {
            return Err(bad("numerics.M", "must be at least 16"));
        }
        if n.shooting() < 16 {
            return Err(bad("numerics.shooting_steps", "must be at least 16"));
        }
        positive_finite("numerics.newton_tolerance", n.newton_tolerance)?;
        if n.newton_max_iterations == 0 {
            return Err(bad("numerics.newton_max_iterations", "must be at least 1"));
        }
        if n.root_samples < 2 {
            return Err(bad("numerics.root_samples", "must be at least 2"));
        }
        if let Some(l) = &self.laminar {
            sweep("laminar", l.lambda_min, l.lambda_max, l.count)?;
        }
        if let Some(d) = &self.dispersion {
            sweep("dispersion", d.lambda_min, d.lambda_max, d.count)?;
            if d.k.contains(&0) {
                return Err(bad("dispersion.k", "wavenumbers start at 1"));
            }
            if d.mu.iter().any(|m| !m.is_finite()) {
                return Err(bad("dispersion.mu", "values must be finite"));
            }
        }
        if let Some(b) = &self.bifurcate {
            if b.k.is_empty() || b.k.contains(&0) {
                return Err(bad("bifurcate.k", "need wavenumbers >= 1"));
            }
            for (i, [lo, hi]) in b.brackets.iter().enumerate() {
                if !(lo < hi) || (*lo <= 0.0 && *hi >= 0.0) {
                    return Err(bad(&format!("bifurcate.brackets[{i}]"), "need lo < hi on one side of zero"));
                }
            }
        }
        if let Some(c) = &self.continuation {
            if c.k == 0 || c.k > n.order {
                return Err(bad("continue.k", "must lie in 1..=N"));
            }
            let (lo, hi) = c.bracket();
            if !(lo < hi) || (lo <= 0.0 && hi >= 0.0) {
                return Err(bad("continue.bracket", "need lo < hi on one side of zero"));
            }
            positive_finite("continue.min_step", c.min_step)?;
            if !(c.min_step <= c.initial_step && c.initial_step <= c.max_step) {
                return Err(bad("continue.initial_step", "need min_step <= initial_step <= max_step"));
            }
            if c.snapshot_every == 0 {
                return Err(bad("continue.snapshot_every", "must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> CliResult<Problem<f64>> {
        Ok(Problem::new(
            self.vorticity.build()?,
            self.physical.g,
            self.physical.period,
            self.physical.h,
            self.numerics.order,
            self.numerics.rows,
        )?)
    }

    pub fn dispersion_setup(&self) -> CliResult<DispersionSetup<f64>> {
        Ok(DispersionSetup {
            gamma: self.vorticity.build()?,
            depth: self.physical.h,
            period: self.physical.period,
            gravity: self.physical.g,
            steps: self.numerics.shooting(),
        })
    }
}

/// Parses `--resolution N,M`.
pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected N,M, got `{s}`"))?;
    let n = a.trim().parse().map_err(|_| format!("bad N in `{s}`"))?;
    let m = b.trim().parse().map_err(|_| format!("bad M in `{s}`"))?;
    Ok((n, m))
}
