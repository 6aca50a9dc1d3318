//! Quantitative comparisons between the stochastic process and its
//! deterministic limit.
//!
//! * [`deviation`] and [`deviation_tail_estimate`]: sup-norm gap between an
//!   interpolated stochastic path and the delayed replicator solution, and
//!   how often it exceeds `ε` as `N` grows.
//! * [`fixation_scaling`]: mean absorption time against `N`, with a log-linear fit.
//! * [`time_average`] and [`concentration_estimate`]: long-run averages of
//!   oscillating solutions and of stochastic paths.
//! * [`characteristic_root`], [`hopf_scan`] and [`average_delay_stability_check`]:
//!   linear stability of the mixed equilibrium under delay.
//!
//! Replicate loops run on the rayon pool. Every replicate draws from its own
//! seeded generator and results are reduced in index order, so reports do
//! not depend on the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dde::{integrate, DdeProblem, InitialHistory};
use crate::game::{
    average_delay, feedback_gain_2x2, grid_steps, interior_equilibrium_2x2, DelayKernel, GameSpec,
    PayoffMatrix,
};
use crate::simplex::{max_norm_diff, SimplexVector};
use crate::stochastic::{
    init_constant_history, init_from_function, replicate_rng, replicate_seed, FixationOutcome,
    ImitationProcess, PopulationState,
};
use crate::{Error, Result, Trajectory};

// ---------------------------------------------------------------------------
// Deviation

/// `max_{t ∈ [0, T]} ‖a(t) - b(t)‖_∞` over the finer of the two grids, the
/// coarser path linearly interpolated.
pub fn deviation(a: &Trajectory, b: &Trajectory, horizon: f64) -> Result<f64> {
    let (fine, coarse) = if a.dt() <= b.dt() { (a, b) } else { (b, a) };
    if grid_steps(coarse.dt(), fine.dt()).is_none() {
        return Err(Error::Config(format!(
            "incompatible grids: steps {} and {} do not divide",
            a.dt(),
            b.dt()
        )));
    }
    let steps = grid_steps(horizon, fine.dt()).ok_or_else(|| {
        Error::Config(format!(
            "horizon {horizon} is not on the grid with step {}",
            fine.dt()
        ))
    })?;
    for t in [a, b] {
        if t.start_time() > 1e-12 || t.end_time() < horizon - 1e-9 * horizon.max(1.0) {
            return Err(Error::Range(format!(
                "trajectory covers [{}, {}], need [0, {horizon}]",
                t.start_time(),
                t.end_time()
            )));
        }
    }
    let dim = a.dim();
    let (mut xa, mut xb) = (vec![0.0; dim], vec![0.0; dim]);
    let mut worst: f64 = 0.0;
    for k in 0..=steps {
        let t = k as f64 * fine.dt();
        a.interpolate_into(t, &mut xa)?;
        b.interpolate_into(t, &mut xb)?;
        worst = worst.max(max_norm_diff(&xa, &xb));
    }
    Ok(worst)
}

/// Ordinary least-squares line with coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone)]
pub struct TailConfig {
    pub game: GameSpec,
    pub initial: InitialHistory,
    pub n_grid: Vec<u32>,
    pub epsilon: f64,
    pub horizon: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Step of the deterministic reference solution.
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRow {
    pub n: u32,
    pub deviations: Vec<f64>,
    pub tail_probability: f64,
    /// No replicate reached `ε`; the log fit used `1/replicates`.
    pub floored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub epsilon: f64,
    pub horizon: f64,
    pub replicates: usize,
    pub rows: Vec<DeviationRow>,
    /// Fit of `ln max(Pr, 1/replicates)` against `N`; `None` for a single `N`.
    pub fit: Option<LinearFit>,
}

impl DeviationReport {
    /// Whether the tail probability never increases along the `N` grid.
    pub fn is_nonincreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].tail_probability <= w[0].tail_probability)
    }
}

/// Stochastic history matching `initial` on the `1/N` grid, `m` steps deep.
fn stochastic_history(initial: &InitialHistory, n: u32, depth: usize) -> Result<PopulationState> {
    match initial {
        InitialHistory::Constant(v) => init_constant_history(v, n, depth),
        tab => init_from_function(&tab.sample(1.0 / n as f64, depth)?, n),
    }
}

/// Empirical `Pr[D(T) ≥ ε]` for each population size.
pub fn deviation_tail_estimate(cfg: &TailConfig) -> Result<DeviationReport> {
    if cfg.replicates == 0 {
        return Err(Error::Config("replicates must be positive".into()));
    }
    let reference = integrate(&DdeProblem::new(
        cfg.game.clone(),
        cfg.initial.clone(),
        cfg.dt,
        cfg.horizon,
    ))?;
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let proto = ImitationProcess::new(&cfg.game, n)?;
        let start = stochastic_history(&cfg.initial, n, proto.required_depth())?;
        let deviations = (0..cfg.replicates)
            .into_par_iter()
            .map(|rep| {
                let mut process = proto.clone();
                let mut state = start.clone();
                let idx = (ni * cfg.replicates + rep) as u64;
                let mut rng = replicate_rng(cfg.seed, idx);
                let path = process.run(&mut state, &mut rng, cfg.horizon)?;
                deviation(&path, &reference, cfg.horizon)
            })
            .collect::<Result<Vec<f64>>>()?;
        let hits = deviations.iter().filter(|&&d| d >= cfg.epsilon).count();
        rows.push(DeviationRow {
            n,
            tail_probability: hits as f64 / cfg.replicates as f64,
            floored: hits == 0,
            deviations,
        });
    }
    let floor = 1.0 / cfg.replicates as f64;
    let x: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| r.tail_probability.max(floor).ln())
        .collect();
    Ok(DeviationReport {
        epsilon: cfg.epsilon,
        horizon: cfg.horizon,
        replicates: cfg.replicates,
        fit: linear_fit(&x, &y),
        rows,
    })
}

// ---------------------------------------------------------------------------
// Time averages

/// How a trajectory is averaged over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    /// Trapezoid rule; for deterministic solutions.
    Trapezoid,
    /// Plain mean of the grid states `X(0), X(δ), …, X(T)`, computed from
    /// integer counts; for stochastic paths.
    StepSum,
}

/// Time average of `trajectory` over `[0, T]`. `T` must be a grid time.
pub fn time_average(
    trajectory: &Trajectory,
    horizon: f64,
    rule: Averaging,
) -> Result<SimplexVector> {
    let first = trajectory
        .index_of(0.0)
        .ok_or_else(|| Error::Range("trajectory does not contain t = 0".into()))?;
    let last = trajectory.index_of(horizon).ok_or_else(|| {
        Error::Range(format!(
            "t = {horizon} is not a grid time of the trajectory"
        ))
    })?;
    if last <= first {
        return Err(Error::Range("averaging window is empty".into()));
    }
    let dim = trajectory.dim();
    let avg = match rule {
        Averaging::Trapezoid => {
            let mut acc = vec![0.0; dim];
            for i in first..=last {
                let w = if i == first || i == last { 0.5 } else { 1.0 };
                for (a, x) in acc.iter_mut().zip(trajectory.point(i)) {
                    *a += w * x;
                }
            }
            let intervals = (last - first) as f64;
            acc.into_iter().map(|a| a / intervals).collect()
        }
        Averaging::StepSum => {
            let n = trajectory.population().ok_or_else(|| {
                Error::Config("step-sum averaging needs a stochastic trajectory".into())
            })? as f64;
            let mut acc = vec![0u64; dim];
            for i in first..=last {
                for (a, x) in acc.iter_mut().zip(trajectory.point(i)) {
                    *a += (x * n).round() as u64;
                }
            }
            let total = (last - first + 1) as f64 * n;
            acc.into_iter().map(|a| a as f64 / total).collect()
        }
    };
    Ok(SimplexVector::from_raw(avg))
}

#[derive(Debug, Clone)]
pub struct ConcentrationConfig {
    pub game: GameSpec,
    pub initial: InitialHistory,
    pub n_grid: Vec<u32>,
    /// Averaging horizon τ.
    pub horizon: f64,
    pub epsilon: f64,
    pub center: SimplexVector,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub n: u32,
    /// Max-norm distance of each replicate's running average from the center.
    pub distances: Vec<f64>,
    pub exit_fraction: f64,
}

/// Fraction of stochastic replicates whose time average over `[0, τ]`
/// lies outside the `ε`-ball around `center`.
pub fn concentration_estimate(cfg: &ConcentrationConfig) -> Result<Vec<ConcentrationRow>> {
    if cfg.replicates == 0 {
        return Err(Error::Config("replicates must be positive".into()));
    }
    let mut rows = Vec::new();
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let proto = ImitationProcess::new(&cfg.game, n)?;
        let start = stochastic_history(&cfg.initial, n, proto.required_depth())?;
        let distances = (0..cfg.replicates)
            .into_par_iter()
            .map(|rep| {
                let mut process = proto.clone();
                let mut state = start.clone();
                let mut rng = replicate_rng(cfg.seed, (ni * cfg.replicates + rep) as u64);
                let path = process.run(&mut state, &mut rng, cfg.horizon)?;
                let avg = time_average(&path, cfg.horizon, Averaging::StepSum)?;
                Ok(avg.max_norm_distance(&cfg.center))
            })
            .collect::<Result<Vec<f64>>>()?;
        let outside = distances.iter().filter(|&&d| d >= cfg.epsilon).count();
        rows.push(ConcentrationRow {
            n,
            exit_fraction: outside as f64 / cfg.replicates as f64,
            distances,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Fixation

/// Whether the mixed equilibrium of a 2×2 game is a grid point for `N`
/// (the chain can then stall with all imitation probabilities zero).
pub fn frozen_state_risk(payoffs: &PayoffMatrix, n: u32) -> bool {
    if payoffs.dim() != 2 {
        return false;
    }
    match interior_equilibrium_2x2(payoffs) {
        Ok(Some(e)) => {
            let q = e * n as f64;
            (q - q.round()).abs() < 1e-9
        }
        _ => false,
    }
}

#[derive(Debug, Clone)]
pub struct FixationConfig {
    pub game: GameSpec,
    pub initial: SimplexVector,
    pub n_grid: Vec<u32>,
    pub replicates: usize,
    pub cap: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixationSample {
    pub replicate: usize,
    pub n: u32,
    pub seed: u64,
    pub outcome: FixationOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixationRow {
    pub n: u32,
    /// Mean over absorbed replicates, in time units.
    pub mean: f64,
    pub median: f64,
    pub stderr: f64,
    pub timeouts: usize,
    pub samples: Vec<FixationSample>,
}

impl FixationRow {
    pub fn timeout_fraction(&self) -> f64 {
        self.timeouts as f64 / self.samples.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixationReport {
    pub replicates: usize,
    pub rows: Vec<FixationRow>,
    /// Fit of `ln(mean)` against `N` over rows with a positive mean.
    pub fit: Option<LinearFit>,
    /// Some `N` had more than 5% timeouts, so its mean underestimates.
    pub flagged: bool,
}

/// Timeout share above which a fixation mean is only a lower bound.
pub const TIMEOUT_FLAG_FRACTION: f64 = 0.05;

pub fn fixation_scaling(cfg: &FixationConfig) -> Result<FixationReport> {
    if cfg.replicates == 0 || cfg.cap == 0 {
        return Err(Error::Config("replicates and cap must be positive".into()));
    }
    if let Some(&n) = cfg
        .n_grid
        .iter()
        .find(|&&n| frozen_state_risk(&cfg.game.payoffs, n))
    {
        return Err(Error::FrozenState(format!(
            "N={n} puts the mixed equilibrium on the population grid; runs can stall without absorbing"
        )));
    }
    let mut rows = Vec::new();
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let proto = ImitationProcess::new(&cfg.game, n)?;
        let start = init_constant_history(&cfg.initial, n, proto.required_depth())?;
        let samples: Vec<FixationSample> = (0..cfg.replicates)
            .into_par_iter()
            .map(|rep| {
                let idx = (ni * cfg.replicates + rep) as u64;
                let mut process = proto.clone();
                let mut state = start.clone();
                let mut rng = replicate_rng(cfg.seed, idx);
                FixationSample {
                    replicate: rep,
                    n,
                    seed: replicate_seed(cfg.seed, idx),
                    outcome: process.fixation_time(&mut state, &mut rng, cfg.cap),
                }
            })
            .collect();
        let mut times: Vec<f64> = samples.iter().filter_map(|s| s.outcome.time()).collect();
        let timeouts = samples.len() - times.len();
        let (mean, stderr) = mean_and_stderr(&times);
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        rows.push(FixationRow {
            n,
            mean,
            median: median_sorted(&times),
            stderr,
            timeouts,
            samples,
        });
    }
    let fitted: Vec<&FixationRow> = rows.iter().filter(|r| r.mean > 0.0).collect();
    let x: Vec<f64> = fitted.iter().map(|r| r.n as f64).collect();
    let y: Vec<f64> = fitted.iter().map(|r| r.mean.ln()).collect();
    Ok(FixationReport {
        replicates: cfg.replicates,
        fit: linear_fit(&x, &y),
        flagged: rows
            .iter()
            .any(|r| r.timeout_fraction() > TIMEOUT_FLAG_FRACTION),
        rows,
    })
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn median_sorted(v: &[f64]) -> f64 {
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

// ---------------------------------------------------------------------------
// Linear stability

/// Residual bound a returned characteristic root must satisfy.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;

/// `g(λ) = λ + β Σ_j w_j e^{-λ s_j}` and its derivative.
fn characteristic(lambda: Complex64, beta: f64, kernel: &[(f64, f64)]) -> (Complex64, Complex64) {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut dsum = Complex64::new(0.0, 0.0);
    for &(s, w) in kernel {
        let term = w * (-lambda * s).exp();
        sum += term;
        dsum -= s * term;
    }
    (lambda + beta * sum, 1.0 + beta * dsum)
}

/// Residual `|λ + β Σ_j w_j e^{-λ s_j}|` of the characteristic equation.
pub fn characteristic_residual(lambda: Complex64, beta: f64, kernel: &DelayKernel) -> f64 {
    characteristic(lambda, beta, &kernel.lags_and_weights())
        .0
        .norm()
}

/// Damped Newton iteration; `None` if it stalls or diverges.
fn newton(start: Complex64, beta: f64, kernel: &[(f64, f64)]) -> Option<Complex64> {
    let mut lambda = start;
    let (mut g, mut dg) = characteristic(lambda, beta, kernel);
    for _ in 0..200 {
        let scale = 1.0 + lambda.norm();
        if g.norm() <= 1e-13 * scale {
            return Some(lambda);
        }
        if dg.norm() == 0.0 || !dg.is_finite() {
            return None;
        }
        let delta = g / dg;
        let mut damping = 1.0;
        let mut accepted = false;
        while damping > 1e-6 {
            let trial = lambda - damping * delta;
            let (gt, dgt) = characteristic(trial, beta, kernel);
            if gt.is_finite() && gt.norm() < g.norm() {
                lambda = trial;
                g = gt;
                dg = dgt;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted {
            // Already at the roundoff floor of |g|.
            return (g.norm() <= 1e-11 * scale).then_some(lambda);
        }
        if (damping * delta).norm() <= 1e-15 * scale {
            return (g.norm() <= 1e-11 * scale).then_some(lambda);
        }
    }
    None
}

/// Root of `λ + β Σ_j w_j e^{-λ s_j} = 0` with the largest real part.
///
/// The root `-β` of the memoryless equation is continued as all lags grow
/// from zero to their actual values; every continuation step restarts Newton
/// slightly above the real axis so a real pair that collides can leave it.
/// A multi-start sweep over the region where roots to the right of the
/// continued one can exist then confirms that no other root leads. The root
/// with nonnegative imaginary part is returned.
pub fn characteristic_root(beta: f64, kernel: &DelayKernel) -> Result<Complex64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain(format!(
            "feedback gain must be > 0, got {beta}"
        )));
    }
    let full = kernel.lags_and_weights();
    let scaled =
        |theta: f64| -> Vec<(f64, f64)> { full.iter().map(|&(s, w)| (s * theta, w)).collect() };

    let mut lambda = Complex64::new(-beta, 0.0);
    let mut theta = 0.0;
    let mut dtheta: f64 = 0.02;
    while theta < 1.0 {
        let target = (theta + dtheta).min(1.0);
        let k = scaled(target);
        let nudge = Complex64::new(0.0, 1e-3 * (beta + lambda.norm()));
        match newton(lambda + nudge, beta, &k) {
            Some(next) if (next - lambda).norm() <= 0.5 * (beta + lambda.norm()) => {
                lambda = next;
                theta = target;
                dtheta = (dtheta * 1.5).min(0.05);
            }
            _ => {
                dtheta *= 0.5;
                if dtheta < 1e-9 {
                    return Err(Error::Numerical(format!(
                        "characteristic root continuation stalled at {:.6} of the delay",
                        theta
                    )));
                }
            }
        }
    }
    lambda = sweep_for_leading_root(lambda, beta, &full);
    if lambda.im.abs() <= 1e-9 * (beta + lambda.norm()) {
        // Real iterates stay real: polish on the axis.
        if let Some(real) = newton(Complex64::new(lambda.re, 0.0), beta, &full) {
            lambda = real;
        }
    }
    lambda = Complex64::new(lambda.re, lambda.im.abs());

    let residual = characteristic(lambda, beta, &full).0.norm();
    if residual > ROOT_RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "characteristic root residual {residual:e} exceeds {ROOT_RESIDUAL_TOL:e}"
        )));
    }
    Ok(lambda)
}

/// Any root with `Re λ ≥ x0` satisfies `|λ| ≤ β max(1, e^{-x0 r})` and
/// `Re λ ≤ β`; seed Newton across that box and keep the rightmost root.
fn sweep_for_leading_root(current: Complex64, beta: f64, kernel: &[(f64, f64)]) -> Complex64 {
    let r = kernel.iter().map(|&(s, _)| s).fold(0.0, f64::max);
    if r == 0.0 {
        return current;
    }
    let x0 = current.re;
    let radius = beta * (-x0 * r).exp().max(1.0);
    let im_spacing = (std::f64::consts::FRAC_PI_2 / r)
        .min(radius / 8.0)
        .max(radius / 400.0);
    let re_count = 8;
    let im_count = (radius / im_spacing).ceil() as usize;
    let mut best = current;
    for a in 0..=re_count {
        let re = x0 + (beta.min(radius) - x0) * a as f64 / re_count as f64;
        for b in 0..=im_count {
            let seed = Complex64::new(re, b as f64 * im_spacing + 1e-3 * beta);
            if let Some(root) = newton(seed, beta, kernel) {
                if root.re > best.re + 1e-9 * (1.0 + best.norm()) {
                    best = root;
                }
            }
        }
    }
    best
}

/// One row of a Hopf scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfRow {
    pub r: f64,
    /// `max - min` of the first strategy over the last quarter of the run.
    pub amplitude: f64,
    pub re_lambda: f64,
    pub im_lambda: f64,
}

impl HopfRow {
    /// Simulated decay agrees with the sign of the leading root.
    pub fn agrees(&self, amp_tol: f64) -> bool {
        (self.amplitude < amp_tol) == (self.re_lambda < 0.0)
    }
}

/// Amplitude threshold separating decay from sustained oscillation.
pub const HOPF_AMPLITUDE_TOL: f64 = 1e-3;

/// `max - min` of component 0 over `t ∈ [from, T]`.
pub fn oscillation_amplitude(trajectory: &Trajectory, from: f64) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..trajectory.len() {
        if trajectory.time(i) >= from - 1e-9 {
            let z = trajectory.point(i)[0];
            lo = lo.min(z);
            hi = hi.max(z);
        }
    }
    hi - lo
}

/// The game's kernel stretched so its maximal lag is `r`.
pub fn kernel_with_delay(base: &DelayKernel, r: f64) -> Result<DelayKernel> {
    let current = base.max_lag();
    if current == 0.0 || matches!(base, DelayKernel::Dirac { .. }) {
        DelayKernel::dirac(r)
    } else {
        Ok(base.scaled(r / current))
    }
}

/// Integrates the delayed replicator equation for each delay in `r_grid`
/// and pairs the late-time amplitude with the leading characteristic root.
pub fn hopf_scan(
    game: &GameSpec,
    r_grid: &[f64],
    dt: f64,
    horizon: f64,
    probe: &InitialHistory,
) -> Result<Vec<HopfRow>> {
    let beta = feedback_gain_2x2(&game.payoffs)?;
    r_grid
        .par_iter()
        .map(|&r| {
            let kernel = kernel_with_delay(&game.kernel, r)?;
            let problem = DdeProblem::new(
                GameSpec::new(game.payoffs.clone(), kernel.clone()),
                probe.clone(),
                dt,
                horizon,
            );
            let traj = integrate(&problem)?;
            let root = characteristic_root(beta, &kernel)?;
            Ok(HopfRow {
                r,
                amplitude: oscillation_amplitude(&traj, 0.75 * horizon),
                re_lambda: root.re,
                im_lambda: root.im,
            })
        })
        .collect()
}

/// Outcome of the average-delay sufficient condition for stability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageDelayCheck {
    /// Average delay below the bound; sufficient, not necessary, for stability.
    pub sufficient_condition_holds: bool,
    pub average_delay: f64,
    /// `1 / (e (c - a))`.
    pub bound: f64,
}

pub fn average_delay_stability_check(game: &GameSpec) -> Result<AverageDelayCheck> {
    let bound = 1.0 / feedback_gain_2x2(&game.payoffs)?;
    let avg = average_delay(&game.kernel);
    Ok(AverageDelayCheck {
        sufficient_condition_holds: avg < bound,
        average_delay: avg,
        bound,
    })
}
