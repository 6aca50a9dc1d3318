//! The finite-population imitation process with memory.
//!
//! At every step of length `δ = 1/N` exactly one agent may switch strategy.
//! A `j`-strategist becomes an `i`-strategist with probability
//!
//! ```text
//! p_ij = x_i · x_j · [f_i(x̄) - f_j(x̄)]_+
//! ```
//!
//! where `x` is the current profile and `x̄` the kernel-weighted average of
//! the last `m + 1` profiles. Counts are kept as integers so conservation is
//! exact; the history is a ring buffer of count vectors.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{GameSpec, ResolvedKernel};
use crate::simplex::SimplexVector;
use crate::{Error, Result, Trajectory};

/// Current counts plus the ring buffer of the last `m + 1` count vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationState {
    n: u32,
    dim: usize,
    depth: usize,
    ring: Vec<u32>,
    head: usize,
    tau: u64,
}

impl PopulationState {
    fn from_history(n: u32, entries: &[Vec<u32>]) -> Self {
        let dim = entries[0].len();
        let depth = entries.len() - 1;
        PopulationState {
            n,
            dim,
            depth,
            ring: entries.iter().flatten().copied().collect(),
            head: depth,
            tau: 0,
        }
    }

    pub fn population(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// History depth `m` in steps.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Steps taken since time 0.
    pub fn tau(&self) -> u64 {
        self.tau
    }

    pub fn time(&self) -> f64 {
        self.tau as f64 / self.n as f64
    }

    pub fn counts(&self) -> &[u32] {
        self.counts_at_lag(0)
    }

    /// Counts `k` steps in the past, `k <= m`.
    pub fn counts_at_lag(&self, k: usize) -> &[u32] {
        assert!(
            k <= self.depth,
            "lag {k} beyond history depth {}",
            self.depth
        );
        let slots = self.depth + 1;
        let slot = (self.head + slots - k) % slots;
        &self.ring[slot * self.dim..(slot + 1) * self.dim]
    }

    pub fn frequencies(&self) -> SimplexVector {
        SimplexVector::from_raw(to_frequencies(self.counts(), self.n))
    }

    /// Strategy held by everyone, if any.
    pub fn absorbed_vertex(&self) -> Option<usize> {
        self.counts().iter().position(|&c| c == self.n)
    }

    /// Pushes `counts` as the newest history entry.
    fn advance(&mut self, counts: &[u32]) {
        self.head = (self.head + 1) % (self.depth + 1);
        self.ring[self.head * self.dim..(self.head + 1) * self.dim].copy_from_slice(counts);
        self.tau += 1;
    }
}

fn to_frequencies(counts: &[u32], n: u32) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// Largest-remainder rounding of `x` onto the `1/N` grid.
///
/// Components are floored, then the missing units go to the largest
/// fractional parts, ties to the lowest index. The result sums to `N`.
pub fn round_to_grid(x: &SimplexVector, n: u32) -> Vec<u32> {
    let scaled: Vec<f64> = x
        .as_slice()
        .iter()
        .map(|v| {
            let q = v.max(0.0) * n as f64;
            let k = q.round();
            if (q - k).abs() < 1e-9 {
                k
            } else {
                q
            }
        })
        .collect();
    let mut counts: Vec<u32> = scaled.iter().map(|q| q.floor() as u32).collect();
    let assigned: u32 = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    // Stable sort keeps lower indices first among equal remainders.
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.partial_cmp(&ra).expect("finite remainders")
    });
    if assigned <= n {
        for &i in order.iter().cycle().take((n - assigned) as usize) {
            counts[i] += 1;
        }
    } else {
        // Only reachable through roundoff in an input that sums slightly above 1.
        for &i in order.iter().rev().cycle().take((assigned - n) as usize) {
            counts[i] = counts[i].saturating_sub(1);
        }
    }
    counts
}

fn check_population(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::Config(format!(
            "population size must be >= 2, got {n}"
        )));
    }
    Ok(())
}

/// History of `m + 1` identical entries at the grid rounding of `initial`.
pub fn init_constant_history(initial: &SimplexVector, n: u32, m: usize) -> Result<PopulationState> {
    check_population(n)?;
    let counts = round_to_grid(initial, n);
    Ok(PopulationState::from_history(n, &vec![counts; m + 1]))
}

/// History from an initial function sampled at lags `-m δ, …, 0` (oldest first).
///
/// Consecutive rounded entries may differ by at most `2δ` in max norm;
/// anything faster could not have been produced by single imitations.
pub fn init_from_function(phi: &[SimplexVector], n: u32) -> Result<PopulationState> {
    check_population(n)?;
    if phi.is_empty() {
        return Err(Error::InvalidHistory(
            "initial function has no samples".into(),
        ));
    }
    let dim = phi[0].dim();
    if phi.iter().any(|p| p.dim() != dim) {
        return Err(Error::InvalidHistory(
            "initial samples differ in dimension".into(),
        ));
    }
    let entries: Vec<Vec<u32>> = phi.iter().map(|p| round_to_grid(p, n)).collect();
    for (k, pair) in entries.windows(2).enumerate() {
        let jump = pair[0]
            .iter()
            .zip(&pair[1])
            .map(|(a, b)| a.abs_diff(*b))
            .max()
            .unwrap_or(0);
        if jump > 2 {
            return Err(Error::InvalidHistory(format!(
                "entries {k} and {} differ by {jump}/N, more than 2/N",
                k + 1
            )));
        }
    }
    Ok(PopulationState::from_history(n, &entries))
}

/// Result of a single update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// One `from`-strategist switched to `to`.
    Imitation {
        from: usize,
        to: usize,
    },
    NoChange,
    /// The state was already a vertex; nothing can change.
    Absorbed {
        vertex: usize,
    },
}

/// Imitation process bound to a game and population size.
///
/// Holds the kernel resolved on the `1/N` grid and scratch buffers, so one
/// value should be used per worker thread.
#[derive(Debug, Clone)]
pub struct ImitationProcess {
    game: GameSpec,
    kernel: ResolvedKernel,
    n: u32,
    scale: f64,
    xbar: Vec<f64>,
    fit: Vec<f64>,
    next: Vec<u32>,
}

impl ImitationProcess {
    pub fn new(game: &GameSpec, n: u32) -> Result<Self> {
        Self::with_scale(game, n, 1.0)
    }

    /// Multiplies every imitation probability by `scale`, which only
    /// rescales time.
    pub fn with_scale(game: &GameSpec, n: u32, scale: f64) -> Result<Self> {
        check_population(n)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Config(format!(
                "probability scale must be > 0, got {scale}"
            )));
        }
        let bound = scale * worst_case_mass(game);
        if bound > 1.0 {
            return Err(Error::PayoffScale {
                bound,
                max_scale: scale / bound,
            });
        }
        let kernel = game.kernel.resolve(1.0 / n as f64)?;
        let d = game.dim();
        Ok(ImitationProcess {
            game: game.clone(),
            kernel,
            n,
            scale,
            xbar: vec![0.0; d],
            fit: vec![0.0; d],
            next: vec![0; d],
        })
    }

    pub fn population(&self) -> u32 {
        self.n
    }

    /// History depth `m` the kernel needs, in steps.
    pub fn required_depth(&self) -> usize {
        self.kernel.depth()
    }

    fn check_state(&self, state: &PopulationState) {
        assert_eq!(state.n, self.n, "state population does not match process");
        assert_eq!(
            state.dim,
            self.game.dim(),
            "state dimension does not match game"
        );
        assert!(
            state.depth >= self.kernel.depth(),
            "state history depth {} shorter than kernel depth {}",
            state.depth,
            self.kernel.depth()
        );
    }

    fn evaluate_fitness(&mut self, state: &PopulationState) {
        self.xbar.iter_mut().for_each(|v| *v = 0.0);
        for (&lag, &w) in self.kernel.lags().iter().zip(self.kernel.weights()) {
            for (o, &c) in self.xbar.iter_mut().zip(state.counts_at_lag(lag)) {
                *o += w * c as f64;
            }
        }
        let n = self.n as f64;
        self.xbar.iter_mut().for_each(|v| *v /= n);
        self.game.payoffs.apply(&self.xbar, &mut self.fit);
    }

    #[inline]
    fn pair_probability(&self, counts: &[u32], i: usize, j: usize) -> f64 {
        let n = self.n as f64;
        let gap = self.fit[i] - self.fit[j];
        if gap > 0.0 && counts[j] > 0 {
            self.scale * (counts[i] as f64 / n) * (counts[j] as f64 / n) * gap
        } else {
            0.0
        }
    }

    /// Probabilities of every ordered switch `(to, from)` with nonzero mass.
    pub fn probabilities(&mut self, state: &PopulationState) -> BTreeMap<(usize, usize), f64> {
        self.check_state(state);
        self.evaluate_fitness(state);
        let d = self.game.dim();
        let counts = state.counts();
        let mut out = BTreeMap::new();
        for i in 0..d {
            for j in (0..d).filter(|&j| j != i) {
                out.insert((i, j), self.pair_probability(counts, i, j));
            }
        }
        out
    }

    /// Advances `state` by one step using the uniform variate `u ∈ [0, 1)`.
    ///
    /// The switch `(i, j)` pairs are laid out in lexicographic order on
    /// `[0, 1)`; the leftover mass means no change.
    pub fn step_with_uniform(&mut self, state: &mut PopulationState, u: f64) -> StepOutcome {
        self.check_state(state);
        if let Some(vertex) = state.absorbed_vertex() {
            self.next.copy_from_slice(state.counts());
            state.advance(&self.next);
            return StepOutcome::Absorbed { vertex };
        }
        self.evaluate_fitness(state);
        let d = self.game.dim();
        let mut outcome = StepOutcome::NoChange;
        let mut cumulative = 0.0;
        'pairs: for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                cumulative += self.pair_probability(state.counts(), i, j);
                if u < cumulative {
                    outcome = StepOutcome::Imitation { from: j, to: i };
                    break 'pairs;
                }
            }
        }
        self.next.copy_from_slice(state.counts());
        if let StepOutcome::Imitation { from, to } = outcome {
            self.next[from] -= 1;
            self.next[to] += 1;
        }
        state.advance(&self.next);
        outcome
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        state: &mut PopulationState,
        rng: &mut R,
    ) -> StepOutcome {
        let u: f64 = rng.random();
        self.step_with_uniform(state, u)
    }

    /// Runs `⌈T·N⌉` steps and records every grid state, history included.
    ///
    /// After absorption the remaining points repeat the vertex; the step at
    /// which it was reached is recorded on the trajectory.
    pub fn run<R: Rng + ?Sized>(
        &mut self,
        state: &mut PopulationState,
        rng: &mut R,
        horizon: f64,
    ) -> Result<Trajectory> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Config(format!("horizon must be > 0, got {horizon}")));
        }
        self.check_state(state);
        let steps = (horizon * self.n as f64 - 1e-9).ceil() as u64;
        let n = self.n;
        let mut traj = Trajectory::with_capacity(
            state.tau as i64 - state.depth as i64,
            1.0 / n as f64,
            state.dim,
            steps as usize + state.depth + 1,
        );
        traj.set_population(n);
        for k in (0..=state.depth).rev() {
            traj.push(&to_frequencies(state.counts_at_lag(k), n));
        }
        let mut absorbed_at = state.absorbed_vertex().map(|_| state.tau);
        for _ in 0..steps {
            if absorbed_at.is_some() {
                let last = traj.last().expect("non-empty").to_vec();
                traj.push(&last);
                continue;
            }
            self.step(state, rng);
            traj.push(&to_frequencies(state.counts(), n));
            if state.absorbed_vertex().is_some() {
                absorbed_at = Some(state.tau);
            }
        }
        traj.set_absorbed_at(absorbed_at);
        Ok(traj)
    }

    /// Steps until every agent plays the same strategy, or `cap` steps pass.
    pub fn fixation_time<R: Rng + ?Sized>(
        &mut self,
        state: &mut PopulationState,
        rng: &mut R,
        cap: u64,
    ) -> FixationOutcome {
        self.check_state(state);
        let mut steps = 0u64;
        loop {
            if let Some(vertex) = state.absorbed_vertex() {
                return FixationOutcome::Absorbed {
                    steps,
                    n: self.n,
                    vertex,
                };
            }
            if steps >= cap {
                return FixationOutcome::TimedOut { steps };
            }
            self.step(state, rng);
            steps += 1;
        }
    }
}

/// Upper bound on `Σ p_ij` over all states: `d(d-1)/2 · 1/4 · spread`.
pub fn worst_case_mass(game: &GameSpec) -> f64 {
    let d = game.dim() as f64;
    d * (d - 1.0) / 2.0 * 0.25 * game.max_payoff_spread()
}

/// Outcome of a fixation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixationOutcome {
    Absorbed { steps: u64, n: u32, vertex: usize },
    TimedOut { steps: u64 },
}

impl FixationOutcome {
    /// Fixation time in process units (steps × δ).
    pub fn time(&self) -> Option<f64> {
        match self {
            FixationOutcome::Absorbed { steps, n, .. } => Some(*steps as f64 / *n as f64),
            FixationOutcome::TimedOut { .. } => None,
        }
    }
}

/// Imitation probabilities for `state` under `game`, keyed by `(to, from)`.
pub fn imitation_probabilities(
    state: &PopulationState,
    game: &GameSpec,
) -> Result<BTreeMap<(usize, usize), f64>> {
    Ok(ImitationProcess::new(game, state.population())?.probabilities(state))
}

/// One step of the process driven by `rng`.
pub fn step<R: Rng + ?Sized>(
    state: &mut PopulationState,
    game: &GameSpec,
    rng: &mut R,
) -> Result<StepOutcome> {
    Ok(ImitationProcess::new(game, state.population())?.step(state, rng))
}

pub fn run<R: Rng + ?Sized>(
    state: &mut PopulationState,
    game: &GameSpec,
    rng: &mut R,
    horizon: f64,
) -> Result<Trajectory> {
    ImitationProcess::new(game, state.population())?.run(state, rng, horizon)
}

pub fn fixation_time<R: Rng + ?Sized>(
    state: &mut PopulationState,
    game: &GameSpec,
    rng: &mut R,
    cap: u64,
) -> Result<FixationOutcome> {
    Ok(ImitationProcess::new(game, state.population())?.fixation_time(state, rng, cap))
}

/// Linear interpolation of a path between its grid states.
pub fn interpolate(trajectory: &Trajectory, t: f64) -> Result<SimplexVector> {
    trajectory.interpolate(t)
}

/// Seed of replicate `index` in a batch started from `base`.
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index)
}

/// Independent generator for replicate `index` of a batch.
pub fn replicate_rng(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replicate_seed(base, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{DelayKernel, PayoffMatrix};

    fn sv(v: &[f64]) -> SimplexVector {
        SimplexVector::new(v.to_vec()).unwrap()
    }

    fn hawk_dove(r: f64) -> GameSpec {
        GameSpec::new(PayoffMatrix::hawk_dove(), DelayKernel::dirac(r).unwrap())
    }

    /// Brute force: all count vectors summing to `n`, minimal L1 distance,
    /// ties to the lexicographically largest vector (lowest index rounds up).
    fn rounding_oracle(x: &[f64], n: u32) -> Vec<u32> {
        fn compositions(n: u32, d: usize) -> Vec<Vec<u32>> {
            if d == 1 {
                return vec![vec![n]];
            }
            (0..=n)
                .flat_map(|k| {
                    compositions(n - k, d - 1).into_iter().map(move |mut rest| {
                        rest.insert(0, k);
                        rest
                    })
                })
                .collect()
        }
        let mut best: Option<(f64, Vec<u32>)> = None;
        for c in compositions(n, x.len()) {
            let dist: f64 = c
                .iter()
                .zip(x)
                .map(|(&k, v)| (k as f64 / n as f64 - v).abs())
                .sum();
            let better = match &best {
                None => true,
                Some((bd, bc)) => dist < bd - 1e-12 || ((dist - bd).abs() <= 1e-12 && c > *bc),
            };
            if better {
                best = Some((dist, c));
            }
        }
        best.unwrap().1
    }

    #[test]
    fn rounding_matches_brute_force() {
        let cases: &[(&[f64], u32)] = &[
            (&[0.34, 0.66], 10),
            (&[1.0 / 3.0, 2.0 / 3.0], 9),
            (&[0.5, 0.5], 3),
            (&[0.2, 0.3, 0.5], 7),
            (&[0.15, 0.15, 0.7], 10),
            (&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 5),
            (&[0.05, 0.05, 0.05, 0.85], 6),
        ];
        for (x, n) in cases {
            assert_eq!(
                round_to_grid(&sv(x), *n),
                rounding_oracle(x, *n),
                "x={x:?}, n={n}"
            );
        }
        assert_eq!(round_to_grid(&sv(&[0.34, 0.66]), 10), vec![3, 7]);
    }

    #[test]
    fn constant_history_init() {
        let s = init_constant_history(&sv(&[1.0 / 3.0, 2.0 / 3.0]), 9, 3).unwrap();
        assert_eq!(s.counts(), &[3, 6]);
        for k in 0..=3 {
            assert_eq!(s.counts_at_lag(k), &[3, 6]);
        }
        let v = init_constant_history(&sv(&[1.0, 0.0]), 17, 2).unwrap();
        assert_eq!(v.absorbed_vertex(), Some(0));
        assert!(init_constant_history(&sv(&[0.5, 0.5]), 1, 0).is_err());
    }

    #[test]
    fn history_from_function() {
        let n = 100;
        let phi: Vec<SimplexVector> = (-4..=0)
            .map(|k| {
                let z = 0.5 + k as f64 / n as f64 / 2.0;
                sv(&[z, 1.0 - z])
            })
            .collect();
        let s = init_from_function(&phi, n).unwrap();
        for k in 0..4 {
            let a = s.counts_at_lag(k)[0] as i64;
            let b = s.counts_at_lag(k + 1)[0] as i64;
            assert!((a - b).abs() <= 1);
        }
        assert_eq!(s.counts(), &[50, 50]);

        let constant = vec![sv(&[0.25, 0.75]); 4];
        assert_eq!(
            init_from_function(&constant, 8).unwrap(),
            init_constant_history(&sv(&[0.25, 0.75]), 8, 3).unwrap()
        );

        let jumpy = vec![sv(&[0.5, 0.5]), sv(&[0.55, 0.45])];
        assert!(matches!(
            init_from_function(&jumpy, 100),
            Err(Error::InvalidHistory(_))
        ));
    }

    #[test]
    fn hawk_dove_probabilities_at_half() {
        let s = init_constant_history(&sv(&[0.5, 0.5]), 10, 0).unwrap();
        let p = imitation_probabilities(&s, &hawk_dove(0.0)).unwrap();
        // f_A = 0.5, f_B = 0.75: only B gains, 0.25 * 0.25.
        assert_eq!(p[&(0, 1)], 0.0);
        assert!((p[&(1, 0)] - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn absorbed_state_has_zero_probabilities() {
        let s = init_constant_history(&sv(&[0.0, 1.0]), 10, 0).unwrap();
        let p = imitation_probabilities(&s, &hawk_dove(0.0)).unwrap();
        assert!(p.values().all(|&v| v == 0.0));
    }

    #[test]
    fn lagged_equalizer_freezes_probabilities() {
        // Lagged state at e = 1/3, current state elsewhere.
        let n = 9;
        let game = hawk_dove(2.0 / 9.0);
        let phi = vec![
            sv(&[1.0 / 3.0, 2.0 / 3.0]),
            sv(&[4.0 / 9.0, 5.0 / 9.0]),
            sv(&[5.0 / 9.0, 4.0 / 9.0]),
        ];
        let s = init_from_function(&phi, n).unwrap();
        let p = imitation_probabilities(&s, &game).unwrap();
        assert!(p.values().all(|&v| v.abs() < 1e-15), "{p:?}");
    }

    #[test]
    fn single_draw_layout() {
        // A game with p_AB = 0.3 from the A-gains pair requires
        // x(1-x)(f_A - f_B) = 0.3 at x = 1/2: f_A - f_B = 1.2.
        let game = GameSpec::new(
            PayoffMatrix::two_by_two(1.2, 1.2, 0.0, 0.0).unwrap(),
            DelayKernel::dirac(0.0).unwrap(),
        );
        let mut proc = ImitationProcess::new(&game, 10).unwrap();
        let mut s = init_constant_history(&sv(&[0.5, 0.5]), 10, 0).unwrap();
        let p = proc.probabilities(&s);
        assert!((p[&(0, 1)] - 0.3).abs() < 1e-12);
        assert_eq!(
            proc.step_with_uniform(&mut s, 0.25),
            StepOutcome::Imitation { from: 1, to: 0 }
        );
        assert_eq!(s.counts(), &[6, 4]);

        // Reverse gap: B gains 0.1 at x = 1/2 needs f_B - f_A = 0.4.
        let game = GameSpec::new(
            PayoffMatrix::two_by_two(0.0, 0.0, 0.4, 0.4).unwrap(),
            DelayKernel::dirac(0.0).unwrap(),
        );
        let mut proc = ImitationProcess::new(&game, 10).unwrap();
        let mut s = init_constant_history(&sv(&[0.5, 0.5]), 10, 0).unwrap();
        assert_eq!(
            proc.step_with_uniform(&mut s, 0.05),
            StepOutcome::Imitation { from: 0, to: 1 }
        );
        assert_eq!(proc.step_with_uniform(&mut s, 0.35), StepOutcome::NoChange);
    }

    #[test]
    fn lexicographic_order_with_both_directions() {
        // Three strategies where pairs (0,1), (0,2) and (1,2) all carry mass.
        let game = GameSpec::new(
            PayoffMatrix::new(vec![vec![1.0; 3], vec![0.5; 3], vec![0.0; 3]]).unwrap(),
            DelayKernel::dirac(0.0).unwrap(),
        );
        let mut proc = ImitationProcess::new(&game, 9).unwrap();
        let base = init_constant_history(&sv(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]), 9, 0).unwrap();
        let p = proc.probabilities(&base);
        let (p01, p02, p12) = (p[&(0, 1)], p[&(0, 2)], p[&(1, 2)]);
        assert!((p01 - 0.5 / 9.0).abs() < 1e-15);
        assert!((p02 - 1.0 / 9.0).abs() < 1e-15);
        assert!((p12 - 0.5 / 9.0).abs() < 1e-15);
        let cases = [
            (0.5 * p01, StepOutcome::Imitation { from: 1, to: 0 }),
            (p01 + 0.5 * p02, StepOutcome::Imitation { from: 2, to: 0 }),
            (
                p01 + p02 + 0.5 * p12,
                StepOutcome::Imitation { from: 2, to: 1 },
            ),
            (p01 + p02 + p12 + 1e-9, StepOutcome::NoChange),
        ];
        for (u, expected) in cases {
            let mut s = base.clone();
            assert_eq!(proc.step_with_uniform(&mut s, u), expected, "u={u}");
        }
    }

    #[test]
    fn absorbed_state_self_loops() {
        let mut proc = ImitationProcess::new(&hawk_dove(0.0), 10).unwrap();
        let mut s = init_constant_history(&sv(&[1.0, 0.0]), 10, 0).unwrap();
        for u in [0.0, 0.3, 0.999] {
            assert_eq!(
                proc.step_with_uniform(&mut s, u),
                StepOutcome::Absorbed { vertex: 0 }
            );
            assert_eq!(s.counts(), &[10, 0]);
        }
        assert_eq!(s.tau(), 3);
    }

    #[test]
    fn payoff_scale_is_checked() {
        let big = GameSpec::new(
            PayoffMatrix::two_by_two(0.0, 10.0, 10.0, 0.0).unwrap(),
            DelayKernel::dirac(0.0).unwrap(),
        );
        match ImitationProcess::new(&big, 10) {
            Err(Error::PayoffScale { bound, max_scale }) => {
                assert_eq!(bound, 2.5);
                assert!((max_scale - 0.4).abs() < 1e-15);
            }
            other => panic!("expected payoff-scale error, got {other:?}"),
        }
        assert!(ImitationProcess::with_scale(&big, 10, 0.4).is_ok());
    }

    #[test]
    fn misaligned_delay_is_config_error() {
        let game = hawk_dove(0.15);
        assert!(matches!(
            ImitationProcess::new(&game, 10),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn run_lengths() {
        let game = hawk_dove(0.4);
        let mut proc = ImitationProcess::new(&game, 10).unwrap();
        assert_eq!(proc.required_depth(), 4);
        let mut s = init_constant_history(&sv(&[0.5, 0.5]), 10, 4).unwrap();
        let mut rng = replicate_rng(7, 0);
        let t = proc.run(&mut s, &mut rng, 3.0).unwrap();
        assert_eq!(t.len(), 30 + 1 + 4);
        assert_eq!(t.start_time(), -0.4);
        assert!((t.end_time() - 3.0).abs() < 1e-12);

        let t = proc
            .run(
                &mut init_constant_history(&sv(&[0.5, 0.5]), 10, 4).unwrap(),
                &mut rng,
                2.95,
            )
            .unwrap();
        assert_eq!(t.len(), 30 + 1 + 4);
    }

    #[test]
    fn absorbed_start_gives_constant_path() {
        let mut proc = ImitationProcess::new(&hawk_dove(0.0), 5).unwrap();
        let mut s = init_constant_history(&sv(&[0.0, 1.0]), 5, 0).unwrap();
        let t = proc.run(&mut s, &mut replicate_rng(1, 0), 2.0).unwrap();
        assert_eq!(t.len(), 11);
        assert!(t.points().all(|p| p == [0.0, 1.0]));
        assert_eq!(t.absorbed_at(), Some(0));
    }

    #[test]
    fn fixation_from_vertex_is_immediate() {
        let mut proc = ImitationProcess::new(&hawk_dove(0.0), 5).unwrap();
        let mut s = init_constant_history(&sv(&[1.0, 0.0]), 5, 0).unwrap();
        let out = proc.fixation_time(&mut s, &mut replicate_rng(1, 0), 10);
        assert_eq!(
            out,
            FixationOutcome::Absorbed {
                steps: 0,
                n: 5,
                vertex: 0
            }
        );
        assert_eq!(out.time(), Some(0.0));
    }

    #[test]
    fn frozen_state_times_out() {
        // Entire history pinned at e = 1/3: every probability is zero.
        let mut proc = ImitationProcess::new(&hawk_dove(0.5), 6).unwrap();
        let mut s = init_constant_history(&sv(&[1.0 / 3.0, 2.0 / 3.0]), 6, 3).unwrap();
        let out = proc.fixation_time(&mut s, &mut replicate_rng(3, 0), 1000);
        assert_eq!(out, FixationOutcome::TimedOut { steps: 1000 });
        assert_eq!(out.time(), None);
        assert_eq!(s.counts(), &[2, 4]);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let game = hawk_dove(0.5);
        let run_once = || {
            let mut proc = ImitationProcess::new(&game, 20).unwrap();
            let mut s = init_constant_history(&sv(&[0.5, 0.5]), 20, 10).unwrap();
            proc.run(&mut s, &mut replicate_rng(99, 4), 10.0).unwrap()
        };
        assert_eq!(run_once(), run_once());
    }
}
