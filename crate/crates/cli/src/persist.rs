//! JSON state and checkpoint files. Floats are written in shortest
//! round-trip form and parsed exactly, so a save/load cycle is lossless.

use std::path::Path;

use gravwave::continuation::Tangent;
use gravwave::operator::{Problem, State};
use gravwave::spectral::{Parity, PeriodicScalar, StripField};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{Physical, RunConfig, VorticitySpec};
use crate::error::{CliError, CliResult};

pub const STATE_FORMAT: &str = "gravwave-state";
pub const CHECKPOINT_FORMAT: &str = "gravwave-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    #[serde(rename = "N")]
    pub order: usize,
    #[serde(rename = "M")]
    pub rows: usize,
}

/// Half-branch a state belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchInfo {
    pub lambda0: f64,
    pub direction: f64,
}

/// `(lambda, q, w, phi)` with `w` as cosine coefficients `0..=N` and `phi` as
/// `N + 1` profiles of `M + 1` values from bed to surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateBody {
    pub lambda: f64,
    pub q: f64,
    pub orientation: f64,
    pub w: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
}

impl StateBody {
    pub fn from_state(state: &State<f64>) -> Self {
        Self {
            lambda: state.lambda,
            q: state.q,
            orientation: state.orientation,
            w: state.w.cos().to_vec(),
            phi: state.phi.profiles().to_vec(),
        }
    }

    pub fn to_state(&self, problem: &Problem<f64>) -> CliResult<State<f64>> {
        let n = problem.order();
        let m = problem.rows();
        if self.w.len() != n + 1 {
            return Err(schema(&format!("w has {} coefficients, expected {}", self.w.len(), n + 1)));
        }
        if self.phi.len() != n + 1 {
            return Err(schema(&format!("phi has {} profiles, expected {}", self.phi.len(), n + 1)));
        }
        if let Some(k) = self.phi.iter().position(|p| p.len() != m + 1) {
            return Err(schema(&format!("phi[{k}] has {} values, expected {}", self.phi[k].len(), m + 1)));
        }
        let mut phi = StripField::zeros(problem.period(), problem.depth(), n, m, Parity::Even);
        for (k, p) in self.phi.iter().enumerate() {
            phi.profile_mut(k).copy_from_slice(p);
        }
        let state = State {
            lambda: self.lambda,
            q: self.q,
            w: PeriodicScalar::even(problem.period(), self.w.clone()),
            phi,
            orientation: self.orientation,
        };
        state.validate(problem).map_err(|e| schema(&e.to_string()))?;
        Ok(state)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub format: String,
    pub version: u32,
    pub physical: Physical,
    pub vorticity: VorticitySpec,
    pub resolution: Resolution,
    #[serde(default)]
    pub branch: Option<BranchInfo>,
    #[serde(default)]
    pub s: Option<f64>,
    pub state: StateBody,
}

impl StateFile {
    pub fn new(config: &RunConfig, state: &State<f64>, branch: Option<BranchInfo>, s: Option<f64>) -> Self {
        Self {
            format: STATE_FORMAT.into(),
            version: VERSION,
            physical: config.physical.clone(),
            vorticity: config.vorticity.clone(),
            resolution: Resolution { order: state.w.order(), rows: state.phi.rows() },
            branch,
            s,
            state: StateBody::from_state(state),
        }
    }

    pub fn problem(&self) -> CliResult<Problem<f64>> {
        Ok(Problem::new(
            self.vorticity.build()?,
            self.physical.g,
            self.physical.period,
            self.physical.h,
            self.resolution.order,
            self.resolution.rows,
        )?)
    }

    pub fn load(path: &Path) -> CliResult<(Self, Problem<f64>, State<f64>)> {
        let file: StateFile = read_json(path)?;
        check_format(&file.format, file.version, STATE_FORMAT)?;
        let problem = file.problem()?;
        let state = file.state.to_state(&problem)?;
        Ok((file, problem, state))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentBody {
    pub lambda0: f64,
    pub k0: usize,
    pub direction: Vec<f64>,
    pub beta: Vec<f64>,
}

impl TangentBody {
    pub fn from_tangent(t: &Tangent<f64>) -> Self {
        Self { lambda0: t.lambda0, k0: t.k0, direction: t.direction.clone(), beta: t.beta.clone() }
    }

    pub fn to_tangent(&self) -> Tangent<f64> {
        Tangent { lambda0: self.lambda0, k0: self.k0, direction: self.direction.clone(), beta: self.beta.clone() }
    }
}

/// Everything needed to resume a half-branch: the two most recent accepted
/// points, arclength, step and the tangent at the bifurcation point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config: RunConfig,
    pub branch: BranchInfo,
    pub tangent: TangentBody,
    pub points: usize,
    pub s: f64,
    pub step: f64,
    pub previous: StateBody,
    pub last: StateBody,
}

impl Checkpoint {
    pub fn load(path: &Path) -> CliResult<Self> {
        let c: Checkpoint = read_json(path)?;
        check_format(&c.format, c.version, CHECKPOINT_FORMAT)?;
        Ok(c)
    }
}

fn schema(msg: &str) -> CliError {
    CliError::Config(format!("schema error: {msg}"))
}

fn check_format(found: &str, version: u32, expected: &str) -> CliResult<()> {
    if found != expected {
        return Err(schema(&format!("format is `{found}`, expected `{expected}`")));
    }
    if version != VERSION {
        return Err(schema(&format!("unsupported version {version}")));
    }
    Ok(())
}

/// Byte offset of a 1-based `(line, column)` position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn located(text: &str, name: &str, path: &str, e: &serde_json::Error) -> CliError {
    let offset = if e.is_eof() { text.len() } else { byte_offset(text, e.line(), e.column()) };
    let at = if path.is_empty() || path == "." { String::new() } else { format!(" at `{path}`") };
    schema(&format!("{name}: byte {offset}{at}: {e}"))
}

pub fn parse_json<T: DeserializeOwned>(text: &str, name: &str) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        located(text, name, &path, e.inner())
    })?;
    de.end().map_err(|e| located(text, name, "", &e))?;
    Ok(value)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
