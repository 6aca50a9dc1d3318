//! Payoff matrices, delay kernels and history-dependent fitness.
//!
//! Fitness is always evaluated at a *delayed average* of the population
//! state: the kernel assigns weights to past lags and the payoff matrix is
//! applied to the resulting convex combination. For two strategies the
//! closed forms for the mixed equilibrium and the Hopf threshold of the
//! single-delay equation live here as well.

use std::f64::consts::FRAC_PI_2;

use crate::simplex::SimplexVector;
use crate::{Error, Result};

/// Relative tolerance for deciding that a lag is an integer multiple of a grid step.
const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl PayoffMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim < 2 {
            return Err(Error::Config(format!(
                "payoff matrix needs at least 2 strategies, got {dim}"
            )));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Config(format!(
                "payoff matrix row {bad} has {} entries, expected {dim}",
                rows[bad].len()
            )));
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("payoff matrix has non-finite entries".into()));
        }
        Ok(PayoffMatrix { dim, entries })
    }

    /// The 2×2 game with row payoffs `(a, b)` for A and `(c, d)` for B.
    pub fn two_by_two(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(vec![vec![a, b], vec![c, d]])
    }

    /// Hawk-Dove game used throughout the experiments.
    pub fn hawk_dove() -> Self {
        Self::two_by_two(0.5, 0.5, 1.5, 0.0).expect("finite entries")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    /// `(a, b, c, d)` of a 2×2 matrix.
    pub fn abcd(&self) -> Result<(f64, f64, f64, f64)> {
        if self.dim != 2 {
            return Err(Error::Config(format!(
                "expected a 2x2 game, got {0}x{0}",
                self.dim
            )));
        }
        let e = &self.entries;
        Ok((e[0], e[1], e[2], e[3]))
    }

    /// Largest possible payoff gap `f_i - f_k` over all points of the simplex.
    ///
    /// `f_i - f_k = Σ_j (A_ij - A_kj) x_j`, so the gap is bounded by the
    /// widest spread of any single column.
    pub fn max_payoff_spread(&self) -> f64 {
        (0..self.dim)
            .map(|j| {
                let col = (0..self.dim).map(|i| self.get(i, j));
                let hi = col.clone().fold(f64::NEG_INFINITY, f64::max);
                let lo = col.fold(f64::INFINITY, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// `out = A · xbar`. No dimension checks.
    #[inline]
    pub(crate) fn apply(&self, xbar: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(xbar).map(|(a, x)| a * x).sum();
        }
    }
}

/// Fitness of each strategy against a (delayed) population state: `f = A · xbar`.
pub fn fitness(xbar: &SimplexVector, payoffs: &PayoffMatrix) -> Result<Vec<f64>> {
    if xbar.dim() != payoffs.dim() {
        return Err(Error::Config(format!(
            "state has {} strategies but payoff matrix has {}",
            xbar.dim(),
            payoffs.dim()
        )));
    }
    let mut out = vec![0.0; payoffs.dim()];
    payoffs.apply(xbar.as_slice(), &mut out);
    Ok(out)
}

/// Distribution over past lags used to average population states.
///
/// Lags are measured in time units and are nonnegative: lag `s` refers to
/// the state at `t - s`.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayKernel {
    /// All weight on a single lag.
    Dirac { lag: f64 },
    /// Weight `weights[i]` at lag `i * spacing`.
    DiscreteWeights { spacing: f64, weights: Vec<f64> },
    /// A density sampled at lags `0, spacing, …, r`, stored with its
    /// normalized trapezoid weights.
    SampledContinuous {
        spacing: f64,
        density: Vec<f64>,
        weights: Vec<f64>,
    },
}

impl DelayKernel {
    pub fn dirac(lag: f64) -> Result<Self> {
        if !(lag.is_finite() && lag >= 0.0) {
            return Err(Error::Config(format!(
                "delay must be finite and >= 0, got {lag}"
            )));
        }
        Ok(DelayKernel::Dirac { lag })
    }

    pub fn discrete(spacing: f64, weights: Vec<f64>) -> Result<Self> {
        check_spacing(spacing)?;
        if weights.is_empty() {
            return Err(Error::Config(
                "discrete kernel needs at least one weight".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config(
                "kernel weights must be finite and >= 0".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "kernel weights sum to {total}, expected 1"
            )));
        }
        Ok(DelayKernel::DiscreteWeights { spacing, weights })
    }

    /// Continuous kernel from density samples at lags `0, spacing, …`.
    ///
    /// The samples are integrated with the trapezoid rule and rescaled so the
    /// quadrature equals one.
    pub fn sampled(spacing: f64, density: Vec<f64>) -> Result<Self> {
        check_spacing(spacing)?;
        if density.len() < 2 {
            return Err(Error::Config(
                "sampled kernel needs at least two samples".into(),
            ));
        }
        if density.iter().any(|k| !k.is_finite() || *k < 0.0) {
            return Err(Error::Config(
                "kernel density must be finite and >= 0".into(),
            ));
        }
        let last = density.len() - 1;
        let raw: Vec<f64> = density
            .iter()
            .enumerate()
            .map(|(i, k)| {
                if i == 0 || i == last {
                    0.5 * spacing * k
                } else {
                    spacing * k
                }
            })
            .collect();
        let mass: f64 = raw.iter().sum();
        if mass <= 0.0 {
            return Err(Error::Config("kernel density has zero mass".into()));
        }
        let weights = raw.into_iter().map(|w| w / mass).collect();
        Ok(DelayKernel::SampledContinuous {
            spacing,
            density,
            weights,
        })
    }

    /// Uniform density on lags `[0, r]`, sampled every `spacing`.
    pub fn uniform(r: f64, spacing: f64) -> Result<Self> {
        check_spacing(spacing)?;
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Config(format!(
                "uniform kernel needs r > 0, got {r}"
            )));
        }
        let steps = grid_steps(r, spacing).ok_or_else(|| {
            Error::Config(format!(
                "uniform kernel: r={r} is not a multiple of spacing {spacing}"
            ))
        })?;
        Self::sampled(spacing, vec![1.0 / r; steps + 1])
    }

    /// Largest lag carrying the kernel's support (the delay `r`).
    pub fn max_lag(&self) -> f64 {
        match self {
            DelayKernel::Dirac { lag } => *lag,
            DelayKernel::DiscreteWeights { spacing, weights } => {
                spacing * (weights.len() - 1) as f64
            }
            DelayKernel::SampledContinuous {
                spacing, weights, ..
            } => spacing * (weights.len() - 1) as f64,
        }
    }

    /// `(lag, weight)` pairs, weights summing to one.
    pub fn lags_and_weights(&self) -> Vec<(f64, f64)> {
        match self {
            DelayKernel::Dirac { lag } => vec![(*lag, 1.0)],
            DelayKernel::DiscreteWeights { spacing, weights }
            | DelayKernel::SampledContinuous {
                spacing, weights, ..
            } => weights
                .iter()
                .enumerate()
                .map(|(i, w)| (i as f64 * spacing, *w))
                .collect(),
        }
    }

    /// Same kernel with every lag multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DelayKernel {
        match self {
            DelayKernel::Dirac { lag } => DelayKernel::Dirac { lag: lag * factor },
            DelayKernel::DiscreteWeights { spacing, weights } => DelayKernel::DiscreteWeights {
                spacing: spacing * factor,
                weights: weights.clone(),
            },
            DelayKernel::SampledContinuous {
                spacing,
                density,
                weights,
            } => DelayKernel::SampledContinuous {
                spacing: spacing * factor,
                density: density.iter().map(|k| k / factor).collect(),
                weights: weights.clone(),
            },
        }
    }

    /// Converts lags to whole steps of an evaluation grid.
    ///
    /// Every lag must be an integer multiple of `step`; lags are never
    /// interpolated. Zero weights are dropped.
    pub fn resolve(&self, step: f64) -> Result<ResolvedKernel> {
        check_spacing(step)?;
        let depth = grid_steps(self.max_lag(), step).ok_or_else(|| {
            Error::Config(format!(
                "delay {} is not representable on a grid with step {step}",
                self.max_lag()
            ))
        })?;
        let mut lags = Vec::new();
        let mut weights = Vec::new();
        for (lag, w) in self.lags_and_weights() {
            let k = grid_steps(lag, step).ok_or_else(|| {
                Error::Config(format!(
                    "kernel lag {lag} is not representable on a grid with step {step}"
                ))
            })?;
            if w > 0.0 {
                lags.push(k);
                weights.push(w);
            }
        }
        Ok(ResolvedKernel {
            depth,
            lags,
            weights,
        })
    }
}

fn check_spacing(spacing: f64) -> Result<()> {
    if spacing.is_finite() && spacing > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "grid spacing must be > 0, got {spacing}"
        )))
    }
}

/// `value / step` as a whole number of steps, if it is one.
pub(crate) fn grid_steps(value: f64, step: f64) -> Option<usize> {
    let q = value / step;
    let k = q.round();
    ((q - k).abs() <= GRID_TOL * q.abs().max(1.0) && k >= 0.0).then_some(k as usize)
}

/// A kernel expressed in whole grid steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedKernel {
    depth: usize,
    lags: Vec<usize>,
    weights: Vec<f64>,
}

impl ResolvedKernel {
    /// Number of past grid points the kernel reaches back.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `out = Σ_j w_j · point(lag_j)`.
    #[inline]
    pub(crate) fn average_into<'a>(&self, point: impl Fn(usize) -> &'a [f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (&lag, &w) in self.lags.iter().zip(&self.weights) {
            for (o, x) in out.iter_mut().zip(point(lag)) {
                *o += w * x;
            }
        }
    }
}

/// Uniformly spaced history ending at the current time.
///
/// `points` runs from oldest to newest; the last entry is the present state.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub step: f64,
    pub points: Vec<SimplexVector>,
}

impl History {
    pub fn new(step: f64, points: Vec<SimplexVector>) -> Result<Self> {
        check_spacing(step)?;
        if points.is_empty() {
            return Err(Error::Config(
                "history must contain at least one point".into(),
            ));
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::Config("history points differ in dimension".into()));
        }
        Ok(History { step, points })
    }

    fn at_lag(&self, k: usize) -> &[f64] {
        self.points[self.points.len() - 1 - k].as_slice()
    }
}

/// Kernel-weighted average of the history: `Σ_j w_j · x(t - s_j)`.
pub fn delayed_average(history: &History, kernel: &DelayKernel) -> Result<SimplexVector> {
    let resolved = kernel.resolve(history.step)?;
    if resolved.depth() >= history.points.len() {
        return Err(Error::Config(format!(
            "history covers {} steps but kernel reaches back {}",
            history.points.len() - 1,
            resolved.depth()
        )));
    }
    let mut out = vec![0.0; history.points[0].dim()];
    resolved.average_into(|k| history.at_lag(k), &mut out);
    Ok(SimplexVector::from_raw(out))
}

/// First moment of the lag distribution, `Σ_j w_j s_j`.
pub fn average_delay(kernel: &DelayKernel) -> f64 {
    kernel
        .lags_and_weights()
        .iter()
        .map(|(lag, w)| lag * w)
        .sum()
}

/// Payoff matrix together with the delay structure used to evaluate fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    pub payoffs: PayoffMatrix,
    pub kernel: DelayKernel,
}

impl GameSpec {
    pub fn new(payoffs: PayoffMatrix, kernel: DelayKernel) -> Self {
        GameSpec { payoffs, kernel }
    }

    pub fn dim(&self) -> usize {
        self.payoffs.dim()
    }

    pub fn max_payoff_spread(&self) -> f64 {
        self.payoffs.max_payoff_spread()
    }
}

/// Mixed equilibrium of a 2×2 game: the root of `(a-b-c+d)e + b - d = 0`.
///
/// Returns `None` when the root falls outside `(0, 1)`.
pub fn interior_equilibrium_2x2(payoffs: &PayoffMatrix) -> Result<Option<f64>> {
    let (a, b, c, d) = payoffs.abcd()?;
    let denom = a - b - c + d;
    if denom == 0.0 {
        return Err(Error::DegenerateGame(
            "a - b - c + d = 0, no isolated interior root".into(),
        ));
    }
    let e = (d - b) / denom;
    Ok((e > 0.0 && e < 1.0).then_some(e))
}

/// Snowdrift regime `b > d`, `c > a`.
pub fn is_snowdrift(payoffs: &PayoffMatrix) -> Result<bool> {
    let (a, b, c, d) = payoffs.abcd()?;
    Ok(b > d && c > a)
}

/// Linearized feedback strength `e (c - a)` at the mixed equilibrium.
pub fn feedback_gain_2x2(payoffs: &PayoffMatrix) -> Result<f64> {
    if !is_snowdrift(payoffs)? {
        let (a, b, c, d) = payoffs.abcd()?;
        return Err(Error::Domain(format!(
            "not in snowdrift regime (need b > d and c > a; got a={a}, b={b}, c={c}, d={d})"
        )));
    }
    let (a, _, c, _) = payoffs.abcd()?;
    let e = interior_equilibrium_2x2(payoffs)?
        .ok_or_else(|| Error::Domain("snowdrift game without interior equilibrium".into()))?;
    Ok(e * (c - a))
}

/// Delay at which the single-delay replicator equation loses stability,
/// `(π/2) / (e (c - a))`.
pub fn critical_delay_2x2(payoffs: &PayoffMatrix) -> Result<f64> {
    Ok(FRAC_PI_2 / feedback_gain_2x2(payoffs)?)
}
