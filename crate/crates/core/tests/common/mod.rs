//! Independent reference implementations shared by the integration tests.
//!
//! Everything here is written for two strategies straight from the model
//! definition, without using the library's internals.

#![allow(dead_code)]

use std::collections::BTreeMap;

use memrep::game::{DelayKernel, GameSpec, PayoffMatrix};
use memrep::stochastic::{init_from_function, ImitationProcess};
use memrep::SimplexVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy)]
pub struct Game2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub const HAWK_DOVE: Game2 = Game2 {
    a: 0.5,
    b: 0.5,
    c: 1.5,
    d: 0.0,
};

impl Game2 {
    pub fn payoffs(&self) -> PayoffMatrix {
        PayoffMatrix::two_by_two(self.a, self.b, self.c, self.d).unwrap()
    }

    pub fn spec(&self, r: f64) -> GameSpec {
        GameSpec::new(self.payoffs(), DelayKernel::dirac(r).unwrap())
    }

    /// `(f_1, f_2)` against the profile `(z, 1 - z)`.
    pub fn fitness(&self, z0: f64, z1: f64) -> (f64, f64) {
        (self.a * z0 + self.b * z1, self.c * z0 + self.d * z1)
    }
}

/// `(P[h → h+1], P[h → h-1])` where `h` counts strategy-1 players now and
/// `lagged` is the count the fitness is computed from.
pub fn switch_probabilities(g: Game2, n: u32, h: u32, lagged: u32) -> (f64, f64) {
    let nf = n as f64;
    let (f0, f1) = g.fitness(lagged as f64 / nf, (n - lagged) as f64 / nf);
    let x0 = h as f64 / nf;
    let x1 = (n - h) as f64 / nf;
    let up = if f0 - f1 > 0.0 && h < n {
        x0 * x1 * (f0 - f1)
    } else {
        0.0
    };
    let down = if f1 - f0 > 0.0 && h > 0 {
        x1 * x0 * (f1 - f0)
    } else {
        0.0
    };
    (up, down)
}

/// Exact law of the history window (oldest first, `m + 1` counts of
/// strategy 1) after `steps` transitions.
pub fn enumerate_paths(g: Game2, n: u32, history: &[u32], steps: usize) -> BTreeMap<Vec<u32>, f64> {
    let mut law = BTreeMap::from([(history.to_vec(), 1.0)]);
    for _ in 0..steps {
        let mut next = BTreeMap::new();
        for (window, p) in law {
            let h = *window.last().unwrap();
            let (up, down) = switch_probabilities(g, n, h, window[0]);
            for (target, q) in [(h + 1, up), (h.wrapping_sub(1), down), (h, 1.0 - up - down)] {
                if q > 0.0 {
                    let mut w = window[1..].to_vec();
                    w.push(target);
                    *next.entry(w).or_insert(0.0) += p * q;
                }
            }
        }
        law = next;
    }
    law
}

/// Monte Carlo law of the same window using the library engine.
pub fn simulate_windows(
    g: Game2,
    n: u32,
    history: &[u32],
    steps: usize,
    runs: usize,
    seed: u64,
) -> BTreeMap<Vec<u32>, usize> {
    let m = history.len() - 1;
    let game = g.spec(m as f64 / n as f64);
    let phi: Vec<SimplexVector> = history
        .iter()
        .map(|&h| SimplexVector::binary(h as f64 / n as f64).unwrap())
        .collect();
    let start = init_from_function(&phi, n).unwrap();
    let mut process = ImitationProcess::new(&game, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..runs {
        let mut state = start.clone();
        for _ in 0..steps {
            process.step(&mut state, &mut rng);
        }
        let window: Vec<u32> = (0..=m).rev().map(|k| state.counts_at_lag(k)[0]).collect();
        *counts.entry(window).or_insert(0) += 1;
    }
    counts
}

/// Pearson chi-square of `observed` against `expected` probabilities, with
/// cells of expected count below 5 pooled. Returns `(statistic, 99% critical value)`.
pub fn chi_square(
    expected: &BTreeMap<Vec<u32>, f64>,
    observed: &BTreeMap<Vec<u32>, usize>,
    runs: usize,
) -> (f64, f64) {
    let total = runs as f64;
    for key in observed.keys() {
        assert!(
            expected.contains_key(key),
            "engine reached impossible window {key:?}"
        );
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pooled_e, mut pooled_o) = (0.0, 0.0);
    for (key, &p) in expected {
        let e = p * total;
        let o = *observed.get(key).unwrap_or(&0) as f64;
        if e < 5.0 {
            pooled_e += e;
            pooled_o += o;
        } else {
            stat += (o - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_e > 0.0 {
        stat += (pooled_o - pooled_e).powi(2) / pooled_e;
        cells += 1;
    }
    let df = cells.saturating_sub(1).max(1) as f64;
    (stat, ChiSquared::new(df).unwrap().inverse_cdf(0.99))
}

/// Memoryless imitation chain driven by a fixed stream of uniforms.
pub fn memoryless_chain(g: Game2, n: u32, h0: u32, uniforms: &[f64]) -> Vec<u32> {
    let mut h = h0;
    let mut path = vec![h];
    for &u in uniforms {
        let (up, down) = switch_probabilities(g, n, h, h);
        if u < up {
            h += 1;
        } else if u < up + down {
            h -= 1;
        }
        path.push(h);
    }
    path
}

/// Explicit Euler for the undelayed replicator equation, renormalized each step.
pub fn euler_oracle(g: Game2, z0: f64, dt: f64, steps: usize) -> Vec<[f64; 2]> {
    let mut x = [z0, 1.0 - z0];
    let mut out = vec![x];
    for _ in 0..steps {
        let (f0, f1) = g.fitness(x[0], x[1]);
        let mean = x[0] * f0 + x[1] * f1;
        let mut next = [
            x[0] + dt * (x[0] * (f0 - mean)),
            x[1] + dt * (x[1] * (f1 - mean)),
        ];
        for v in &mut next {
            *v = v.max(0.0);
        }
        let s = next[0] + next[1];
        x = [next[0] / s, next[1] / s];
        out.push(x);
    }
    out
}
