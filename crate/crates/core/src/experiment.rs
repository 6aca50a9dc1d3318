//! Runs configured experiments and writes their CSV artifacts.
//!
//! Every run writes `manifest.toml` (the resolved configuration and the tool
//! version), `results.toml` (derived scalars such as fitted slopes) and one
//! or more CSV tables. All output is computed before anything is written, so
//! a failing run leaves the output directory untouched.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{
    concentration_estimate, deviation_tail_estimate, fixation_scaling, hopf_scan, time_average,
    Averaging, ConcentrationConfig, FixationConfig, LinearFit, TailConfig,
};
use crate::config::{parse_config, ExperimentConfig, ExperimentKind, Finding, InitialSource};
use crate::dde::{integrate, DdeProblem};
use crate::game::interior_equilibrium_2x2;
use crate::io::{format_number, trajectory_header, write_table, write_trajectory};
use crate::stochastic::{replicate_rng, FixationOutcome, ImitationProcess, PopulationState};
use crate::{Error, Result, SimplexVector, Trajectory};

pub const TOOL_VERSION: &str = concat!("memrep ", env!("CARGO_PKG_VERSION"));

/// Files produced by a run, in write order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub results: BTreeMap<String, toml::Value>,
}

struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    results: BTreeMap<String, toml::Value>,
}

impl Artifacts {
    fn new() -> Self {
        Artifacts {
            files: Vec::new(),
            results: BTreeMap::new(),
        }
    }

    fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut buf = Vec::new();
        write_table(&mut buf, header, rows)?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    fn trajectory(&mut self, name: &str, traj: &Trajectory) -> Result<()> {
        let mut buf = Vec::new();
        write_trajectory(&mut buf, traj)?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    fn result(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    fn fit(&mut self, prefix: &str, fit: Option<LinearFit>) {
        if let Some(f) = fit {
            self.result(&format!("{prefix}_slope"), f.slope);
            self.result(&format!("{prefix}_intercept"), f.intercept);
            self.result(&format!("{prefix}_r_squared"), f.r_squared);
        }
    }
}

/// Runs `cfg` and writes its artifacts into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    let mut art = Artifacts::new();
    match cfg.experiment {
        ExperimentKind::Trajectory => trajectory(cfg, &mut art)?,
        ExperimentKind::Deviation => deviation(cfg, &mut art)?,
        ExperimentKind::Fixation => fixation(cfg, &mut art)?,
        ExperimentKind::Timeavg => timeavg(cfg, &mut art)?,
        ExperimentKind::HopfScan => hopf(cfg, &mut art)?,
    }
    let results = toml::to_string(&art.results).map_err(|e| Error::Io(e.to_string()))?;
    art.files.insert(
        0,
        (
            "manifest.toml".into(),
            cfg.manifest(TOOL_VERSION).into_bytes(),
        ),
    );
    art.files
        .push(("results.toml".into(), results.into_bytes()));

    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    for (name, bytes) in &art.files {
        let path = out_dir.join(name);
        fs::write(&path, bytes)?;
        files.push(path);
    }
    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        files,
        results: art.results,
    })
}

fn stochastic_start(cfg: &ExperimentConfig, n: u32, depth: usize) -> Result<PopulationState> {
    match &cfg.initial {
        InitialSource::Constant(v) => crate::stochastic::init_constant_history(v, n, depth),
        src => {
            crate::stochastic::init_from_function(&src.history().sample(1.0 / n as f64, depth)?, n)
        }
    }
}

fn trajectory(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let n = cfg.n_grid[0];
    let mut process = ImitationProcess::new(&cfg.game, n)?;
    let mut state = stochastic_start(cfg, n, process.required_depth())?;
    let mut rng = replicate_rng(cfg.seed, 0);
    let path = process.run(&mut state, &mut rng, cfg.horizon)?;
    let det = integrate(&DdeProblem::new(
        cfg.game.clone(),
        cfg.initial.history(),
        cfg.dt,
        cfg.horizon,
    ))?;

    let last = |t: &Trajectory| t.last().map(|p| p[0]).unwrap_or(f64::NAN);
    art.result("stochastic_final_x1", last(&path));
    art.result("deterministic_final_x1", last(&det));
    if let Some(step) = path.absorbed_at() {
        art.result("absorbed_at_time", step as f64 / n as f64);
    }
    art.trajectory("stochastic.csv", &path)?;
    art.trajectory("deterministic.csv", &det)?;
    Ok(())
}

fn deviation(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let report = deviation_tail_estimate(&TailConfig {
        game: cfg.game.clone(),
        initial: cfg.initial.history(),
        n_grid: cfg.n_grid.clone(),
        epsilon: cfg.epsilon,
        horizon: cfg.horizon,
        replicates: cfg.replicates,
        seed: cfg.seed,
        dt: cfg.dt,
    })?;
    let mut dev_rows = Vec::new();
    let mut tail_rows = Vec::new();
    for row in &report.rows {
        for (rep, d) in row.deviations.iter().enumerate() {
            dev_rows.push(vec![row.n.to_string(), rep.to_string(), format_number(*d)]);
        }
        tail_rows.push(vec![
            row.n.to_string(),
            format_number(cfg.epsilon),
            format_number(row.tail_probability),
        ]);
    }
    art.result("tail_nonincreasing", report.is_nonincreasing());
    art.fit("log_tail", report.fit);
    let floored: Vec<toml::Value> = report
        .rows
        .iter()
        .filter(|r| r.floored)
        .map(|r| toml::Value::Integer(r.n.into()))
        .collect();
    art.result("floored_n", floored);
    art.table("deviation.csv", &["N", "replicate", "D"], dev_rows)?;
    art.table("tails.csv", &["N", "epsilon", "prob"], tail_rows)?;
    Ok(())
}

fn fixation(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let InitialSource::Constant(initial) = &cfg.initial else {
        return Err(Error::Config(
            "fixation experiments start from a constant history".into(),
        ));
    };
    let report = fixation_scaling(&FixationConfig {
        game: cfg.game.clone(),
        initial: initial.clone(),
        n_grid: cfg.n_grid.clone(),
        replicates: cfg.replicates,
        cap: cfg.cap,
        seed: cfg.seed,
    })?;
    let mut per_rep = Vec::new();
    let mut summary = Vec::new();
    for row in &report.rows {
        for s in &row.samples {
            let (time, vertex, timed_out) = match s.outcome {
                FixationOutcome::Absorbed { steps, n, vertex } => {
                    (steps as f64 / n as f64, (vertex + 1).to_string(), "0")
                }
                FixationOutcome::TimedOut { steps } => {
                    (steps as f64 / s.n as f64, String::new(), "1")
                }
            };
            per_rep.push(vec![
                s.replicate.to_string(),
                s.n.to_string(),
                s.seed.to_string(),
                format_number(time),
                vertex,
                timed_out.to_string(),
            ]);
        }
        summary.push(vec![
            row.n.to_string(),
            format_number(row.mean),
            format_number(row.median),
            format_number(row.stderr),
            row.timeouts.to_string(),
        ]);
    }
    art.fit("log_mean", report.fit);
    art.result("timeouts_flagged", report.flagged);
    art.table(
        "fixation_replicates.csv",
        &[
            "replicate",
            "N",
            "seed",
            "fixation_time",
            "absorbed_vertex",
            "timed_out",
        ],
        per_rep,
    )?;
    art.table(
        "fixation.csv",
        &["N", "mean", "median", "stderr", "timeouts"],
        summary,
    )?;
    Ok(())
}

fn timeavg(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let e = interior_equilibrium_2x2(&cfg.game.payoffs)?
        .ok_or_else(|| Error::Domain("game has no interior equilibrium".into()))?;
    let center = SimplexVector::binary(e)?;
    let det = integrate(&DdeProblem::new(
        cfg.game.clone(),
        cfg.initial.history(),
        cfg.dt,
        cfg.horizon,
    ))?;
    let avg = time_average(&det, cfg.horizon, Averaging::Trapezoid)?;
    let rows = concentration_estimate(&ConcentrationConfig {
        game: cfg.game.clone(),
        initial: cfg.initial.history(),
        n_grid: cfg.n_grid.clone(),
        horizon: cfg.tau,
        epsilon: cfg.epsilon,
        center: center.clone(),
        replicates: cfg.replicates,
        seed: cfg.seed,
    })?;

    art.result("deterministic_distance", avg.max_norm_distance(&center));
    art.result(
        "exit_fraction_nonincreasing",
        rows.windows(2)
            .all(|w| w[1].exit_fraction <= w[0].exit_fraction),
    );
    let header = trajectory_header(avg.dim());
    let mut header: Vec<&str> = header.iter().map(String::as_str).collect();
    header[0] = "T";
    let row = std::iter::once(format_number(cfg.horizon))
        .chain(avg.as_slice().iter().map(|&v| format_number(v)))
        .collect();
    art.table("timeavg.csv", &header, vec![row])?;

    let mut summary = Vec::new();
    let mut per_rep = Vec::new();
    for row in &rows {
        summary.push(vec![
            row.n.to_string(),
            format_number(cfg.tau),
            format_number(cfg.epsilon),
            format_number(row.exit_fraction),
        ]);
        for (rep, d) in row.distances.iter().enumerate() {
            per_rep.push(vec![row.n.to_string(), rep.to_string(), format_number(*d)]);
        }
    }
    art.table(
        "concentration.csv",
        &["N", "tau", "epsilon", "exit_fraction"],
        summary,
    )?;
    art.table(
        "concentration_replicates.csv",
        &["N", "replicate", "distance"],
        per_rep,
    )?;
    Ok(())
}

fn hopf(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let rows = hopf_scan(
        &cfg.game,
        &cfg.r_grid,
        cfg.dt,
        cfg.horizon,
        &cfg.initial.history(),
    )?;
    art.result(
        "critical_delay",
        crate::game::critical_delay_2x2(&cfg.game.payoffs)?,
    );
    art.result(
        "amplitude_agrees_with_root",
        rows.iter()
            .all(|r| r.agrees(crate::analysis::HOPF_AMPLITUDE_TOL)),
    );
    let table = rows
        .iter()
        .map(|r| {
            vec![
                format_number(r.r),
                format_number(r.amplitude),
                format_number(r.re_lambda),
                format_number(r.im_lambda),
            ]
        })
        .collect();
    art.table(
        "hopf.csv",
        &["r", "amplitude", "re_lambda", "im_lambda"],
        table,
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Presets

pub const PRESETS: &[&str] = &[
    "fig1a",
    "fig1b",
    "fig1c",
    "fig1d",
    "fig2",
    "hopf",
    "timeavg",
    "deviation",
];

fn fig1(r: f64, n: u32) -> String {
    format!(
        "experiment = \"trajectory\"\nseed = 1\n\n[kernel]\ntype = \"dirac\"\nr = {r:?}\n\n\
         [population]\nn = {n}\n\n[integration]\ndt = 0.01\nhorizon = 200.0\n\n\
         [initial]\nconstant = [0.5, 0.5]\n"
    )
}

/// TOML source of a named preset.
pub fn preset_source(name: &str) -> Option<String> {
    let text = match name {
        "fig1a" => fig1(4.0, 1000),
        "fig1b" => fig1(4.0, 10000),
        "fig1c" => fig1(5.0, 1000),
        "fig1d" => fig1(5.0, 10000),
        "fig2" => "experiment = \"fixation\"\nseed = 2\n\n[kernel]\ntype = \"dirac\"\nr = 5.4\n\n\
                   [population]\nn_grid = [10, 25, 40, 55, 70, 85, 100]\n\n\
                   [sampling]\nreplicates = 500\ncap = 100000000\n\n[initial]\nconstant = [0.5, 0.5]\n"
            .to_string(),
        "hopf" => "experiment = \"hopf_scan\"\nseed = 3\n\n[kernel]\ntype = \"dirac\"\nr = 4.0\n\n\
                   [integration]\ndt = 0.01\nhorizon = 1000.0\nr_grid = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]\n\n\
                   [initial]\nconstant = [0.5, 0.5]\n"
            .to_string(),
        "timeavg" => "experiment = \"timeavg\"\nseed = 4\n\n[kernel]\ntype = \"dirac\"\nr = 5.0\n\n\
                      [population]\nn_grid = [500, 1000, 2000]\n\n[integration]\ndt = 0.01\nhorizon = 2000.0\n\n\
                      [sampling]\nreplicates = 100\nepsilon = 0.1\ntau = 200.0\n\n[initial]\nconstant = [0.5, 0.5]\n"
            .to_string(),
        "deviation" => "experiment = \"deviation\"\nseed = 5\n\n[kernel]\ntype = \"dirac\"\nr = 4.0\n\n\
                        [population]\nn_grid = [500, 1000, 2000]\n\n[integration]\ndt = 0.01\nhorizon = 50.0\n\n\
                        [sampling]\nreplicates = 100\nepsilon = 0.1\n\n[initial]\nconstant = [0.5, 0.5]\n"
            .to_string(),
        _ => return None,
    };
    Some(text)
}

/// Resolved configuration of a named preset.
pub fn preset(name: &str) -> std::result::Result<ExperimentConfig, Vec<Finding>> {
    let text = preset_source(name).ok_or_else(|| {
        vec![Finding {
            field: "preset".into(),
            message: format!(
                "unknown preset '{name}' (expected one of {})",
                PRESETS.join(", ")
            ),
        }]
    })?;
    let raw = parse_config(&text).map_err(|e| {
        vec![Finding {
            field: "preset".into(),
            message: e.to_string(),
        }]
    })?;
    ExperimentConfig::resolve(&raw, Path::new("."))
}
