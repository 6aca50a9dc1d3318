use memrep::config::{parse_config, validate};
use memrep::dde::{integrate, integrate_with, DdeProblem, InitialHistory, Replicator};
use memrep::game::{fitness, interior_equilibrium_2x2, DelayKernel, GameSpec, PayoffMatrix};
use memrep::io::{read_initial_function, read_trajectory};
use memrep::stochastic::{
    init_constant_history, replicate_rng, round_to_grid, ImitationProcess, StepOutcome,
};
use memrep::SimplexVector;
use proptest::prelude::*;

fn simplex(dim: usize) -> impl Strategy<Value = SimplexVector> {
    prop::collection::vec(0.0f64..1.0, dim).prop_filter_map("zero mass", |v| {
        let s: f64 = v.iter().sum();
        (s > 1e-3).then(|| SimplexVector::new(v.iter().map(|x| x / s).collect()).unwrap())
    })
}

/// Payoff matrices whose worst-case switching mass stays below one.
fn payoffs(dim: usize) -> impl Strategy<Value = PayoffMatrix> {
    let bound = 4.0 / (dim * (dim - 1)) as f64;
    prop::collection::vec(prop::collection::vec(0.0..bound, dim), dim)
        .prop_map(|rows| PayoffMatrix::new(rows).unwrap())
}

fn game_and_population() -> impl Strategy<Value = (GameSpec, u32, SimplexVector)> {
    (2usize..=4, 2u32..60, 0usize..30).prop_flat_map(|(dim, n, m)| {
        (payoffs(dim), simplex(dim)).prop_map(move |(p, x)| {
            let kernel = DelayKernel::dirac(m as f64 / n as f64).unwrap();
            (GameSpec::new(p, kernel), n, x)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rounding_preserves_population(x in simplex(3), n in 1u32..500) {
        let c = round_to_grid(&x, n);
        prop_assert_eq!(c.iter().sum::<u32>(), n);
        for (ci, xi) in c.iter().zip(x.as_slice()) {
            prop_assert!((*ci as f64 - xi * n as f64).abs() < 1.0);
        }
    }

    #[test]
    fn fitness_is_linear(p in payoffs(3), x in simplex(3), y in simplex(3), t in 0.0f64..1.0) {
        let mix = SimplexVector::new(
            x.as_slice().iter().zip(y.as_slice()).map(|(a, b)| t * a + (1.0 - t) * b).collect(),
        ).unwrap();
        let fx = fitness(&x, &p).unwrap();
        let fy = fitness(&y, &p).unwrap();
        let fm = fitness(&mix, &p).unwrap();
        for i in 0..3 {
            prop_assert!((fm[i] - (t * fx[i] + (1.0 - t) * fy[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_equilibrium_equalizes_payoffs(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0) {
        let p = PayoffMatrix::two_by_two(a, b, c, d).unwrap();
        if let Ok(Some(e)) = interior_equilibrium_2x2(&p) {
            prop_assert!(e > 0.0 && e < 1.0);
            let f = fitness(&SimplexVector::binary(e).unwrap(), &p).unwrap();
            prop_assert!((f[0] - f[1]).abs() < 1e-9 * (1.0 + a.abs() + b.abs() + c.abs() + d.abs()));
        }
    }

    #[test]
    fn stochastic_steps_conserve_and_move_one_agent((game, n, x) in game_and_population(), seed in any::<u64>()) {
        let mut process = ImitationProcess::new(&game, n).unwrap();
        let mut state = init_constant_history(&x, n, process.required_depth()).unwrap();
        let mut rng = replicate_rng(seed, 0);
        let delta = 1.0 / n as f64;
        for _ in 0..300 {
            let before = state.frequencies();
            let outcome = process.step(&mut state, &mut rng);
            prop_assert_eq!(state.counts().iter().sum::<u32>(), n);
            let after = state.frequencies();
            let l1: f64 = before.as_slice().iter().zip(after.as_slice()).map(|(a, b)| (a - b).abs()).sum();
            prop_assert!(l1 <= 2.0 * delta + 1e-15);
            if let StepOutcome::Imitation { from, to } = outcome {
                prop_assert_ne!(from, to);
            }
        }
    }

    #[test]
    fn absorption_is_permanent((game, n, _x) in game_and_population(), vertex in 0usize..4, seed in any::<u64>()) {
        let dim = game.dim();
        let v = SimplexVector::vertex(dim, vertex % dim);
        let mut process = ImitationProcess::new(&game, n).unwrap();
        let mut state = init_constant_history(&v, n, process.required_depth()).unwrap();
        let mut rng = replicate_rng(seed, 1);
        for _ in 0..100 {
            let outcome = process.step(&mut state, &mut rng);
            prop_assert_eq!(outcome, StepOutcome::Absorbed { vertex: vertex % dim });
            prop_assert_eq!(state.absorbed_vertex(), Some(vertex % dim));
        }
    }

    #[test]
    fn same_seed_same_path((game, n, x) in game_and_population(), seed in any::<u64>()) {
        let mut process = ImitationProcess::new(&game, n).unwrap();
        let start = init_constant_history(&x, n, process.required_depth()).unwrap();
        let run = |process: &mut ImitationProcess| {
            let mut state = start.clone();
            process.run(&mut state, &mut replicate_rng(seed, 3), 2.0).unwrap()
        };
        prop_assert_eq!(run(&mut process), run(&mut process));
    }

    #[test]
    fn dde_sum_drift_is_roundoff(p in payoffs(3), x in simplex(3), lag in 0usize..200) {
        let game = GameSpec::new(p.clone(), DelayKernel::dirac(lag as f64 * 0.01).unwrap());
        let problem = DdeProblem::new(game, InitialHistory::Constant(x), 0.01, 10.0);
        let out = integrate_with(&problem, &Replicator::new(p)).unwrap();
        prop_assert!(out.max_sum_drift <= 1e-14, "{}", out.max_sum_drift);
        for point in out.trajectory.points() {
            prop_assert!(point.iter().all(|v| *v >= 0.0));
            prop_assert!((point.iter().sum::<f64>() - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn dde_is_deterministic(x in simplex(2), lag in 0usize..500) {
        let game = GameSpec::new(PayoffMatrix::hawk_dove(), DelayKernel::dirac(lag as f64 * 0.01).unwrap());
        let problem = DdeProblem::new(game, InitialHistory::Constant(x), 0.01, 5.0);
        prop_assert_eq!(integrate(&problem).unwrap(), integrate(&problem).unwrap());
    }

    #[test]
    fn parsers_never_panic(text in ".{0,200}") {
        let _ = read_trajectory(text.as_bytes());
        let _ = read_initial_function(text.as_bytes());
        if let Ok(raw) = parse_config(&text) {
            let _ = validate(&raw, std::path::Path::new("."));
        }
    }

    #[test]
    fn csv_like_inputs_never_panic(rows in prop::collection::vec(prop::collection::vec("-?[0-9.e]{0,6}", 1..4), 0..6)) {
        let mut text = String::from("t,x_1,x_2\n");
        for r in rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        let _ = read_trajectory(text.as_bytes());
        let _ = read_initial_function(text.as_bytes());
    }
}
