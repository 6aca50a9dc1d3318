//! Experiment configuration.
//!
//! Configurations are TOML documents with a few top-level keys and one
//! table per concern:
//!
//! ```toml
//! experiment = "trajectory"   # trajectory | deviation | fixation | timeavg | hopf_scan
//! seed = 1
//!
//! [game]                      # a, b, c, d  or  matrix = [[...], ...]
//! a = 0.5
//! b = 0.5
//! c = 1.5
//! d = 0.0
//!
//! [kernel]                    # dirac: r | discrete: spacing, weights | uniform: r, spacing
//! type = "dirac"
//! r = 4.0
//!
//! [population]                # n  or  n_grid; m (optional) must equal round(r·N)
//! n = 1000
//!
//! [integration]
//! dt = 0.01
//! horizon = 200.0
//!
//! [sampling]
//! replicates = 100
//!
//! [initial]                   # constant = [...]  or  file = "phi.csv"
//! constant = [0.5, 0.5]
//! ```
//!
//! [`validate`] reports every problem at once; [`ExperimentConfig::resolve`]
//! turns a valid document into typed settings with all defaults filled in.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dde::InitialHistory;
use crate::game::{grid_steps, is_snowdrift, DelayKernel, GameSpec, PayoffMatrix};
use crate::simplex::SimplexVector;
use crate::stochastic::worst_case_mass;
use crate::{analysis, io, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Trajectory,
    Deviation,
    Fixation,
    Timeavg,
    HopfScan,
}

impl ExperimentKind {
    fn uses_stochastic(self) -> bool {
        !matches!(self, ExperimentKind::HopfScan)
    }

    fn uses_dde(self) -> bool {
        !matches!(self, ExperimentKind::Fixation)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentKind::Trajectory => "trajectory",
            ExperimentKind::Deviation => "deviation",
            ExperimentKind::Fixation => "fixation",
            ExperimentKind::Timeavg => "timeavg",
            ExperimentKind::HopfScan => "hopf_scan",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub output: Option<String>,
    #[serde(default)]
    pub game: RawGame,
    #[serde(default)]
    pub kernel: RawKernel,
    #[serde(default)]
    pub population: RawPopulation,
    #[serde(default)]
    pub integration: RawIntegration,
    #[serde(default)]
    pub sampling: RawSampling,
    #[serde(default)]
    pub initial: RawInitial,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGame {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawKernel {
    #[serde(rename = "type")]
    pub kind: Option<String>,
    pub r: Option<f64>,
    pub spacing: Option<f64>,
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPopulation {
    pub n: Option<u32>,
    pub n_grid: Option<Vec<u32>>,
    /// Optional cross-check of the derived history depth `round(r·N)`.
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawIntegration {
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub r_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSampling {
    pub replicates: Option<usize>,
    pub cap: Option<u64>,
    pub epsilon: Option<f64>,
    /// Averaging horizon for stochastic running averages.
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInitial {
    pub constant: Option<Vec<f64>>,
    pub file: Option<String>,
}

pub fn parse_config(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))
}

/// A single configuration problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub field: String,
    pub message: String,
}

impl Finding {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Finding {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_HORIZON: f64 = 200.0;
pub const DEFAULT_REPLICATES: usize = 500;
pub const DEFAULT_CAP: u64 = 100_000_000;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_TAU: f64 = 200.0;
pub const DEFAULT_N: u32 = 1000;

/// Where the initial function came from.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSource {
    Constant(SimplexVector),
    File {
        path: PathBuf,
        history: InitialHistory,
    },
}

impl InitialSource {
    pub fn history(&self) -> InitialHistory {
        match self {
            InitialSource::Constant(v) => InitialHistory::Constant(v.clone()),
            InitialSource::File { history, .. } => history.clone(),
        }
    }
}

/// Fully resolved, validated settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub game: GameSpec,
    pub n_grid: Vec<u32>,
    /// History depth per entry of `n_grid`.
    pub m: Vec<usize>,
    pub dt: f64,
    pub horizon: f64,
    pub r_grid: Vec<f64>,
    pub replicates: usize,
    pub cap: u64,
    pub epsilon: f64,
    pub tau: f64,
    pub initial: InitialSource,
    raw: RawConfig,
}

impl ExperimentConfig {
    /// Validates `raw`; relative file paths are taken from `base_dir`.
    pub fn resolve(raw: &RawConfig, base_dir: &Path) -> std::result::Result<Self, Vec<Finding>> {
        let mut v = Validator {
            findings: Vec::new(),
        };
        let cfg = v.resolve(raw, base_dir);
        match cfg {
            Some(cfg) if v.findings.is_empty() => Ok(cfg),
            _ => Err(v.findings),
        }
    }

    pub fn from_file(path: &Path) -> std::result::Result<Self, Vec<Finding>> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            vec![Finding::new(
                "config",
                format!("cannot read {}: {e}", path.display()),
            )]
        })?;
        let raw = parse_config(&text).map_err(|e| vec![Finding::new("config", e.to_string())])?;
        Self::resolve(&raw, path.parent().unwrap_or(Path::new(".")))
    }

    /// TOML echo of every resolved setting, derived depths included.
    pub fn manifest(&self, tool_version: &str) -> String {
        #[derive(Serialize)]
        struct Manifest<'a> {
            tool_version: &'a str,
            experiment: String,
            seed: u64,
            game: BTreeMap<String, Vec<f64>>,
            kernel: ManifestKernel,
            population: ManifestPopulation<'a>,
            integration: ManifestIntegration<'a>,
            sampling: ManifestSampling,
            initial: ManifestInitial,
        }
        #[derive(Serialize)]
        struct ManifestKernel {
            #[serde(rename = "type")]
            kind: &'static str,
            r: f64,
            lags: Vec<f64>,
            weights: Vec<f64>,
            average_delay: f64,
        }
        #[derive(Serialize)]
        struct ManifestPopulation<'a> {
            n_grid: &'a [u32],
            m: Vec<u64>,
        }
        #[derive(Serialize)]
        struct ManifestIntegration<'a> {
            dt: f64,
            horizon: f64,
            r_grid: &'a [f64],
        }
        #[derive(Serialize)]
        struct ManifestSampling {
            replicates: u64,
            cap: u64,
            epsilon: f64,
            tau: f64,
        }
        #[derive(Serialize)]
        struct ManifestInitial {
            kind: &'static str,
            file: Option<String>,
            first: Vec<f64>,
        }

        let payoffs = &self.game.payoffs;
        let game = (0..payoffs.dim())
            .map(|i| (format!("row_{}", i + 1), payoffs.row(i).to_vec()))
            .collect();
        let (lags, weights): (Vec<f64>, Vec<f64>) =
            self.game.kernel.lags_and_weights().into_iter().unzip();
        let kind = match self.game.kernel {
            DelayKernel::Dirac { .. } => "dirac",
            DelayKernel::DiscreteWeights { .. } => "discrete",
            DelayKernel::SampledContinuous { .. } => "uniform",
        };
        let (ikind, file, first) = match &self.initial {
            InitialSource::Constant(v) => ("constant", None, v.as_slice().to_vec()),
            InitialSource::File { path, history } => (
                "file",
                Some(path.display().to_string()),
                match history {
                    InitialHistory::Tabulated { points, .. } => points[0].as_slice().to_vec(),
                    InitialHistory::Constant(v) => v.as_slice().to_vec(),
                },
            ),
        };
        let m = Manifest {
            tool_version,
            experiment: self.experiment.to_string(),
            seed: self.seed,
            game,
            kernel: ManifestKernel {
                kind,
                r: self.game.kernel.max_lag(),
                average_delay: crate::game::average_delay(&self.game.kernel),
                lags,
                weights,
            },
            population: ManifestPopulation {
                n_grid: &self.n_grid,
                m: self.m.iter().map(|&m| m as u64).collect(),
            },
            integration: ManifestIntegration {
                dt: self.dt,
                horizon: self.horizon,
                r_grid: &self.r_grid,
            },
            sampling: ManifestSampling {
                replicates: self.replicates as u64,
                cap: self.cap,
                epsilon: self.epsilon,
                tau: self.tau,
            },
            initial: ManifestInitial {
                kind: ikind,
                file,
                first,
            },
        };
        toml::to_string(&m).expect("manifest serializes")
    }

    pub fn raw(&self) -> &RawConfig {
        &self.raw
    }
}

/// All problems with `raw`; empty means the configuration can run.
pub fn validate(raw: &RawConfig, base_dir: &Path) -> Vec<Finding> {
    ExperimentConfig::resolve(raw, base_dir)
        .err()
        .unwrap_or_default()
}

struct Validator {
    findings: Vec<Finding>,
}

impl Validator {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.findings.push(Finding::new(field, message));
    }

    fn positive(&mut self, field: &str, value: f64) -> f64 {
        if !(value.is_finite() && value > 0.0) {
            self.push(field, format!("must be a positive number, got {value}"));
        }
        value
    }

    fn resolve(&mut self, raw: &RawConfig, base_dir: &Path) -> Option<ExperimentConfig> {
        let experiment = match raw.experiment.as_deref() {
            None => {
                self.push("experiment", "missing required field");
                None
            }
            Some(name) => {
                match toml::Value::String(name.to_string()).try_into::<ExperimentKind>() {
                    Ok(kind) => Some(kind),
                    Err(_) => {
                        self.push(
                        "experiment",
                        format!("unknown experiment '{name}' (expected trajectory, deviation, fixation, timeavg or hopf_scan)"),
                    );
                        None
                    }
                }
            }
        };
        let seed = raw.seed;
        if seed.is_none() {
            self.push("seed", "missing required field");
        }

        let payoffs = self.payoffs(&raw.game);
        let dt = self.positive("integration.dt", raw.integration.dt.unwrap_or(DEFAULT_DT));
        let horizon = self.positive(
            "integration.horizon",
            raw.integration.horizon.unwrap_or(DEFAULT_HORIZON),
        );
        let kernel = self.kernel(&raw.kernel, dt);
        let replicates = raw.sampling.replicates.unwrap_or(DEFAULT_REPLICATES);
        if replicates == 0 {
            self.push("sampling.replicates", "must be at least 1");
        }
        let cap = raw.sampling.cap.unwrap_or(DEFAULT_CAP);
        if cap == 0 {
            self.push("sampling.cap", "must be at least 1");
        }
        let epsilon = raw.sampling.epsilon.unwrap_or(DEFAULT_EPSILON);
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            self.push("sampling.epsilon", format!("must be >= 0, got {epsilon}"));
        }
        let tau = self.positive("sampling.tau", raw.sampling.tau.unwrap_or(DEFAULT_TAU));
        let r_grid = raw
            .integration
            .r_grid
            .clone()
            .unwrap_or_else(|| vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);

        let n_grid = match (&raw.population.n, &raw.population.n_grid) {
            (Some(_), Some(_)) => {
                self.push("population", "give either n or n_grid, not both");
                Vec::new()
            }
            (Some(n), None) => vec![*n],
            (None, Some(grid)) => grid.clone(),
            (None, None) => vec![DEFAULT_N],
        };
        if n_grid.is_empty() {
            self.push("population.n_grid", "must not be empty");
        }
        for &n in &n_grid {
            if n < 2 {
                self.push(
                    "population.n",
                    format!("population size must be >= 2, got {n}"),
                );
            }
        }

        let initial = self.initial(&raw.initial, base_dir, payoffs.as_ref().map(|p| p.dim()));

        let (experiment, payoffs, kernel, initial) = match (experiment, payoffs, kernel, initial) {
            (Some(e), Some(p), Some(k), Some(i)) => (e, p, k, i),
            _ => return None,
        };
        let game = GameSpec::new(payoffs, kernel);

        let mut m = Vec::new();
        if experiment.uses_stochastic() {
            let bound = worst_case_mass(&game);
            if bound > 1.0 {
                self.push(
                    "game",
                    Error::PayoffScale {
                        bound,
                        max_scale: 1.0 / bound,
                    }
                    .to_string(),
                );
            }
            let r = game.kernel.max_lag();
            for &n in n_grid.iter().filter(|&&n| n >= 2) {
                let depth = match game.kernel.resolve(1.0 / n as f64) {
                    Ok(k) => k.depth(),
                    Err(_) => {
                        self.push(
                            "kernel.r",
                            format!("delay not grid-representable: r·N = {} is not an integer for N={n}", r * n as f64),
                        );
                        continue;
                    }
                };
                if r > 0.0 && depth < 1 {
                    self.push(
                        "population.m",
                        format!("derived m must be >= 1 for r > 0 (N={n})"),
                    );
                }
                match raw.population.m {
                    Some(given) if given != depth => self.push(
                        "population.m",
                        format!("m={given} disagrees with round(r·N)={depth} at N={n}"),
                    ),
                    _ => m.push(depth),
                }
                if let InitialSource::File { history, .. } = &initial {
                    if let Err(e) = history.sample(1.0 / n as f64, depth) {
                        self.push("initial.file", format!("N={n}: {e}"));
                    }
                }
            }
        }
        if experiment.uses_dde() {
            if let Err(e) = game.kernel.resolve(dt) {
                self.push(
                    "integration.dt",
                    format!("delay not grid-representable at dt={dt}: {e}"),
                );
            }
        }

        match experiment {
            ExperimentKind::Trajectory => {
                if n_grid.len() != 1 {
                    self.push("population", "trajectory experiments take a single n");
                }
                self.check_grid_compat(&n_grid, dt);
            }
            ExperimentKind::Deviation => {
                if replicates < 50 {
                    self.push(
                        "sampling.replicates",
                        "deviation tails need at least 50 replicates",
                    );
                }
                self.check_grid_compat(&n_grid, dt);
                self.check_horizon_on_grid(&n_grid, horizon, "integration.horizon");
            }
            ExperimentKind::Fixation => {
                if !matches!(initial, InitialSource::Constant(_)) {
                    self.push(
                        "initial",
                        "fixation experiments start from a constant history",
                    );
                }
                for &n in &n_grid {
                    if analysis::frozen_state_risk(&game.payoffs, n) {
                        self.push(
                            "population.n_grid",
                            format!("frozen state: N={n} puts the mixed equilibrium on the population grid"),
                        );
                    }
                }
            }
            ExperimentKind::Timeavg => {
                if !matches!(
                    crate::game::interior_equilibrium_2x2(&game.payoffs),
                    Ok(Some(_))
                ) {
                    self.push(
                        "game",
                        "time averages are measured against the mixed equilibrium of a 2x2 game",
                    );
                }
                if grid_steps(horizon, dt).is_none() {
                    self.push("integration.horizon", "horizon must be a multiple of dt");
                }
                self.check_horizon_on_grid(&n_grid, tau, "sampling.tau");
            }
            ExperimentKind::HopfScan => {
                match is_snowdrift(&game.payoffs) {
                    Ok(true) => {}
                    Ok(false) => {
                        self.push("game", "not in snowdrift regime (need b > d and c > a)")
                    }
                    Err(e) => self.push("game", e.to_string()),
                }
                if r_grid.is_empty() {
                    self.push("integration.r_grid", "must not be empty");
                }
                for &r in &r_grid {
                    if !(r.is_finite() && r >= 0.0) || grid_steps(r, dt).is_none() {
                        self.push(
                            "integration.r_grid",
                            format!("delay {r} is not grid-representable at dt={dt}"),
                        );
                    } else if let Err(e) =
                        analysis::kernel_with_delay(&game.kernel, r).and_then(|k| k.resolve(dt))
                    {
                        self.push("integration.r_grid", format!("delay {r}: {e}"));
                    }
                }
            }
        }

        Some(ExperimentConfig {
            experiment,
            seed: seed?,
            output: raw.output.as_ref().map(PathBuf::from),
            game,
            n_grid,
            m,
            dt,
            horizon,
            r_grid,
            replicates,
            cap,
            epsilon,
            tau,
            initial,
            raw: raw.clone(),
        })
    }

    fn payoffs(&mut self, g: &RawGame) -> Option<PayoffMatrix> {
        let has_abcd = [g.a, g.b, g.c, g.d].iter().any(Option::is_some);
        let result = match (&g.matrix, has_abcd) {
            (Some(_), true) => {
                self.push("game", "give either a, b, c, d or matrix, not both");
                return None;
            }
            (Some(rows), false) => PayoffMatrix::new(rows.clone()),
            (None, true) => match (g.a, g.b, g.c, g.d) {
                (Some(a), Some(b), Some(c), Some(d)) => PayoffMatrix::two_by_two(a, b, c, d),
                _ => {
                    self.push("game", "a, b, c and d must all be given");
                    return None;
                }
            },
            (None, false) => Ok(PayoffMatrix::hawk_dove()),
        };
        result.map_err(|e| self.push("game", e.to_string())).ok()
    }

    fn kernel(&mut self, k: &RawKernel, dt: f64) -> Option<DelayKernel> {
        let kind = k.kind.as_deref().unwrap_or("dirac");
        let result = match kind {
            "dirac" => DelayKernel::dirac(k.r.unwrap_or(4.0)),
            "discrete" => match (&k.weights, k.spacing) {
                (Some(w), Some(s)) => DelayKernel::discrete(s, w.clone()),
                _ => {
                    self.push("kernel", "discrete kernels need spacing and weights");
                    return None;
                }
            },
            "uniform" => match k.r {
                Some(r) => DelayKernel::uniform(r, k.spacing.unwrap_or(dt)),
                None => {
                    self.push("kernel.r", "uniform kernels need r");
                    return None;
                }
            },
            other => {
                self.push(
                    "kernel.type",
                    format!("unknown kernel type '{other}' (expected dirac, discrete or uniform)"),
                );
                return None;
            }
        };
        result.map_err(|e| self.push("kernel", e.to_string())).ok()
    }

    fn initial(
        &mut self,
        i: &RawInitial,
        base_dir: &Path,
        dim: Option<usize>,
    ) -> Option<InitialSource> {
        let source = match (&i.constant, &i.file) {
            (Some(_), Some(_)) => {
                self.push("initial", "give either constant or file, not both");
                return None;
            }
            (Some(v), None) => InitialSource::Constant(
                SimplexVector::new(v.clone())
                    .map_err(|e| self.push("initial.constant", e.to_string()))
                    .ok()?,
            ),
            (None, Some(f)) => {
                let path = base_dir.join(f);
                let history = std::fs::File::open(&path)
                    .map_err(Error::from)
                    .and_then(io::read_initial_function)
                    .map_err(|e| self.push("initial.file", format!("{}: {e}", path.display())))
                    .ok()?;
                InitialSource::File { path, history }
            }
            (None, None) => {
                InitialSource::Constant(SimplexVector::new(vec![0.5, 0.5]).expect("valid"))
            }
        };
        let got = source.history().dim();
        if let Some(d) = dim.filter(|&d| d != got) {
            self.push(
                "initial",
                format!("initial state has {got} strategies, game has {d}"),
            );
            return None;
        }
        Some(source)
    }

    /// The deterministic step and `1/N` must nest so paths can be compared.
    fn check_grid_compat(&mut self, n_grid: &[u32], dt: f64) {
        for &n in n_grid.iter().filter(|&&n| n >= 2) {
            let delta = 1.0 / n as f64;
            if grid_steps(dt, delta).is_none() && grid_steps(delta, dt).is_none() {
                self.push(
                    "integration.dt",
                    format!("dt={dt} and 1/N (N={n}) do not divide each other"),
                );
            }
        }
    }

    fn check_horizon_on_grid(&mut self, n_grid: &[u32], horizon: f64, field: &str) {
        for &n in n_grid.iter().filter(|&&n| n >= 2) {
            if grid_steps(horizon * n as f64, 1.0).is_none() {
                self.push(
                    field,
                    format!("{horizon} is not a multiple of 1/N for N={n}"),
                );
            }
        }
    }
}
