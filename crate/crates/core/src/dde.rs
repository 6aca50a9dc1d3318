//! Explicit Euler integration of the delayed mean-field equation.
//!
//! The state `x(t)` evolves by `ẋ = F(x(t), x̄(t))` where `x̄` is the
//! kernel-weighted average of the solution over `[t - r, t]`. Every kernel
//! lag must land on the integration grid, so delayed lookups are exact reads
//! of earlier grid points. After each step negative roundoff is clamped and
//! the point renormalized onto the simplex; genuine excursions beyond
//! `1e-6` are reported as instability instead.

use crate::game::{GameSpec, PayoffMatrix};
use crate::simplex::{max_norm_diff, SimplexVector};
use crate::{Error, Result, Trajectory};

/// Largest pre-projection excursion outside `[0, 1]` that is treated as roundoff.
pub const INSTABILITY_TOL: f64 = 1e-6;

/// A right-hand side `F(x(t), x̄(t))`.
pub trait MeanField {
    fn dim(&self) -> usize;
    fn field(&self, current: &[f64], xbar: &[f64], out: &mut [f64]);
}

/// Replicator field `F_i = x_i (f_i(x̄) - Σ_k x_k f_k(x̄))`.
#[derive(Debug, Clone)]
pub struct Replicator {
    payoffs: PayoffMatrix,
}

impl Replicator {
    pub fn new(payoffs: PayoffMatrix) -> Self {
        Replicator { payoffs }
    }
}

impl MeanField for Replicator {
    fn dim(&self) -> usize {
        self.payoffs.dim()
    }

    fn field(&self, current: &[f64], xbar: &[f64], out: &mut [f64]) {
        self.payoffs.apply(xbar, out);
        let mean: f64 = current.iter().zip(out.iter()).map(|(x, f)| x * f).sum();
        for (o, x) in out.iter_mut().zip(current) {
            *o = x * (*o - mean);
        }
    }
}

/// Pairwise switching rates `p_ij`: mass moving from strategy `j` to `i`.
pub trait PairwiseRates {
    fn dim(&self) -> usize;
    /// Fills `out[i * d + j]` with `p_ij`.
    fn rates(&self, current: &[f64], xbar: &[f64], out: &mut [f64]);
}

/// Imitation rates `p_ij = x_i x_j [f_i(x̄) - f_j(x̄)]_+` of the stochastic model.
#[derive(Debug, Clone)]
pub struct ImitationRates {
    payoffs: PayoffMatrix,
}

impl ImitationRates {
    pub fn new(payoffs: PayoffMatrix) -> Self {
        ImitationRates { payoffs }
    }
}

impl PairwiseRates for ImitationRates {
    fn dim(&self) -> usize {
        self.payoffs.dim()
    }

    fn rates(&self, current: &[f64], xbar: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let mut fit = vec![0.0; d];
        self.payoffs.apply(xbar, &mut fit);
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = if i == j {
                    0.0
                } else {
                    current[i] * current[j] * (fit[i] - fit[j]).max(0.0)
                };
            }
        }
    }
}

/// Net flow field `F_i = Σ_j (p_ij - p_ji)` built from pairwise rates.
#[derive(Debug, Clone)]
pub struct NetFlow<R>(pub R);

impl<R: PairwiseRates> MeanField for NetFlow<R> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn field(&self, current: &[f64], xbar: &[f64], out: &mut [f64]) {
        let d = self.0.dim();
        let mut p = vec![0.0; d * d];
        self.0.rates(current, xbar, &mut p);
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..d).map(|j| p[i * d + j] - p[j * d + i]).sum();
        }
    }
}

/// Replicator vector field at `current` with payoffs evaluated at `xbar`.
pub fn replicator_field(
    current: &SimplexVector,
    xbar: &SimplexVector,
    payoffs: &PayoffMatrix,
) -> Vec<f64> {
    let mut out = vec![0.0; payoffs.dim()];
    Replicator::new(payoffs.clone()).field(current.as_slice(), xbar.as_slice(), &mut out);
    out
}

/// Initial function on `[-r, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialHistory {
    Constant(SimplexVector),
    /// Samples at `-(len-1)·step, …, -step, 0`, oldest first.
    Tabulated {
        step: f64,
        points: Vec<SimplexVector>,
    },
}

impl InitialHistory {
    pub fn dim(&self) -> usize {
        match self {
            InitialHistory::Constant(v) => v.dim(),
            InitialHistory::Tabulated { points, .. } => points.first().map_or(0, |p| p.dim()),
        }
    }

    /// The `depth + 1` grid values at `-depth·dt, …, 0`.
    ///
    /// Tabulated data must contain every grid time exactly; it is subsampled,
    /// never interpolated.
    pub fn sample(&self, dt: f64, depth: usize) -> Result<Vec<SimplexVector>> {
        match self {
            InitialHistory::Constant(v) => Ok(vec![v.clone(); depth + 1]),
            InitialHistory::Tabulated { step, points } => {
                let stride = crate::game::grid_steps(dt, *step)
                    .filter(|&s| s > 0)
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "integration step {dt} is not a multiple of the tabulated step {step}"
                        ))
                    })?;
                let needed = depth * stride + 1;
                if points.len() < needed {
                    return Err(Error::Config(format!(
                        "initial function covers {} samples, {needed} needed",
                        points.len()
                    )));
                }
                let last = points.len() - 1;
                Ok((0..=depth)
                    .rev()
                    .map(|k| points[last - k * stride].clone())
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DdeProblem {
    pub game: GameSpec,
    pub initial: InitialHistory,
    pub dt: f64,
    pub horizon: f64,
}

impl DdeProblem {
    pub fn new(game: GameSpec, initial: InitialHistory, dt: f64, horizon: f64) -> Self {
        DdeProblem {
            game,
            initial,
            dt,
            horizon,
        }
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        DdeProblem { dt, ..self.clone() }
    }
}

/// Integrated trajectory plus per-step conservation diagnostics.
#[derive(Debug, Clone)]
pub struct Integration {
    pub trajectory: Trajectory,
    /// Largest `|Σ x_i(t+dt) - Σ x_i(t)|` before projection.
    pub max_sum_drift: f64,
    /// Most negative component seen before projection (0 if none).
    pub min_component: f64,
}

/// Integrates the delayed replicator equation.
pub fn integrate(problem: &DdeProblem) -> Result<Trajectory> {
    let field = Replicator::new(problem.game.payoffs.clone());
    Ok(integrate_with(problem, &field)?.trajectory)
}

/// Euler integration with an arbitrary mean field.
pub fn integrate_with<F: MeanField>(problem: &DdeProblem, field: &F) -> Result<Integration> {
    let DdeProblem {
        game,
        initial,
        dt,
        horizon,
    } = problem;
    let (dt, horizon) = (*dt, *horizon);
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("dt must be > 0, got {dt}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Config(format!("horizon must be > 0, got {horizon}")));
    }
    let d = game.dim();
    if field.dim() != d || initial.dim() != d {
        return Err(Error::Config(format!(
            "dimension mismatch: game {d}, field {}, initial {}",
            field.dim(),
            initial.dim()
        )));
    }
    let kernel = game.kernel.resolve(dt)?;
    let depth = kernel.depth();
    let history = initial.sample(dt, depth)?;
    let steps = (horizon / dt - 1e-9).ceil() as usize;

    let mut traj = Trajectory::with_capacity(-(depth as i64), dt, d, depth + 1 + steps);
    for p in &history {
        traj.push(p.as_slice());
    }
    let mut xbar = vec![0.0; d];
    let mut rhs = vec![0.0; d];
    let mut next = vec![0.0; d];
    let mut max_sum_drift: f64 = 0.0;
    let mut min_component: f64 = 0.0;
    for _ in 0..steps {
        let now = traj.len() - 1;
        kernel.average_into(|lag| traj.point(now - lag), &mut xbar);
        let current = traj.point(now);
        field.field(current, &xbar, &mut rhs);
        let mut old_sum = 0.0;
        let mut new_sum = 0.0;
        for ((n, x), f) in next.iter_mut().zip(current).zip(&rhs) {
            *n = x + dt * f;
            old_sum += x;
            new_sum += *n;
        }
        max_sum_drift = max_sum_drift.max((new_sum - old_sum).abs());
        if let Some(bad) = next
            .iter()
            .find(|v| !v.is_finite() || **v < -INSTABILITY_TOL || **v > 1.0 + INSTABILITY_TOL)
        {
            return Err(Error::Instability {
                t: traj.time(now + 1),
                detail: format!("component {bad} left [0, 1]"),
            });
        }
        min_component = next.iter().copied().fold(min_component, f64::min);
        project(&mut next);
        traj.push(&next);
    }
    Ok(Integration {
        trajectory: traj,
        max_sum_drift,
        min_component,
    })
}

/// Clamps negatives to zero and rescales to unit sum.
fn project(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    let sum: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= sum);
}

/// Max-norm gap at the horizon between runs with `dt` and `dt / 2`.
pub fn step_doubling_error(problem: &DdeProblem) -> Result<f64> {
    step_doubling_error_with(problem, &Replicator::new(problem.game.payoffs.clone()))
}

pub fn step_doubling_error_with<F: MeanField>(problem: &DdeProblem, field: &F) -> Result<f64> {
    let coarse = integrate_with(problem, field)?.trajectory;
    let fine = integrate_with(&problem.with_dt(problem.dt / 2.0), field)?.trajectory;
    let (a, b) = (
        coarse.last().expect("non-empty"),
        fine.last().expect("non-empty"),
    );
    Ok(max_norm_diff(a, b))
}

/// Errors at the horizon of the `dt` and `dt / 2` runs against a
/// `reference_dt` run, and their ratio (about 2 for a first-order scheme).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceCheck {
    pub coarse_error: f64,
    pub fine_error: f64,
    pub ratio: f64,
}

pub fn convergence_check(problem: &DdeProblem, reference_dt: f64) -> Result<ConvergenceCheck> {
    let end = |dt: f64| -> Result<Vec<f64>> {
        Ok(integrate(&problem.with_dt(dt))?
            .last()
            .expect("non-empty")
            .to_vec())
    };
    let reference = end(reference_dt)?;
    let coarse_error = max_norm_diff(&end(problem.dt)?, &reference);
    let fine_error = max_norm_diff(&end(problem.dt / 2.0)?, &reference);
    Ok(ConvergenceCheck {
        coarse_error,
        fine_error,
        ratio: coarse_error / fine_error,
    })
}
