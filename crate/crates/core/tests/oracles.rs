mod common;

use common::{
    chi_square, enumerate_paths, euler_oracle, memoryless_chain, simulate_windows, Game2, HAWK_DOVE,
};
use memrep::analysis::{characteristic_residual, characteristic_root, ROOT_RESIDUAL_TOL};
use memrep::dde::{convergence_check, integrate, step_doubling_error, DdeProblem, InitialHistory};
use memrep::game::{critical_delay_2x2, feedback_gain_2x2, DelayKernel};
use memrep::stochastic::{init_constant_history, replicate_rng, FixationOutcome, ImitationProcess};
use memrep::SimplexVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SNOWDRIFT_3: Game2 = Game2 {
    a: 0.0,
    b: 3.0,
    c: 3.0,
    d: 0.0,
};

#[test]
fn path_enumeration_matches_monte_carlo() {
    let cases: [(Game2, u32, &[u32]); 4] = [
        (SNOWDRIFT_3, 5, &[1, 2, 2]),
        (SNOWDRIFT_3, 4, &[4, 3]),
        (HAWK_DOVE, 5, &[5, 4, 4]),
        (SNOWDRIFT_3, 3, &[1]),
    ];
    for (k, (g, n, history)) in cases.into_iter().enumerate() {
        let runs = 100_000;
        let exact = enumerate_paths(g, n, history, 6);
        let total: f64 = exact.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let observed = simulate_windows(g, n, history, 6, runs, 1000 + k as u64);
        let (stat, critical) = chi_square(&exact, &observed, runs);
        assert!(
            stat < critical,
            "case {k}: chi-square {stat} exceeds {critical}"
        );
    }
}

#[test]
fn two_agent_fixation_time() {
    // From (1, 1) only Hawk -> Dove is possible, with probability 1/16 per step.
    let game = HAWK_DOVE.spec(0.0);
    let start = init_constant_history(&SimplexVector::binary(0.5).unwrap(), 2, 0).unwrap();
    let mut process = ImitationProcess::new(&game, 2).unwrap();
    let runs = 20_000;
    let mut total = 0.0;
    for rep in 0..runs {
        let mut state = start.clone();
        let mut rng = replicate_rng(77, rep);
        match process.fixation_time(&mut state, &mut rng, 1_000_000) {
            FixationOutcome::Absorbed { steps, vertex, .. } => {
                assert_eq!(vertex, 1);
                total += steps as f64 / 2.0;
            }
            other => panic!("unexpected {other:?}"),
        }
    }
    let mean = total / runs as f64;
    // Geometric(1/16) steps, halved: mean 8, standard error about 0.055.
    assert!((mean - 8.0).abs() < 0.25, "mean fixation time {mean}");
}

#[test]
fn memoryless_stochastic_matches_oracle_exactly() {
    for (g, n, h0) in [(HAWK_DOVE, 10, 9), (SNOWDRIFT_3, 7, 1), (HAWK_DOVE, 50, 40)] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let uniforms: Vec<f64> = (0..500).map(|_| rng.random()).collect();
        let expected = memoryless_chain(g, n, h0, &uniforms);
        let game = g.spec(0.0);
        let mut state =
            init_constant_history(&SimplexVector::binary(h0 as f64 / n as f64).unwrap(), n, 0)
                .unwrap();
        let mut process = ImitationProcess::new(&game, n).unwrap();
        let mut got = vec![state.counts()[0]];
        for &u in &uniforms {
            process.step_with_uniform(&mut state, u);
            got.push(state.counts()[0]);
        }
        assert_eq!(got, expected);
    }
}

#[test]
fn undelayed_dde_matches_euler_oracle_bitwise() {
    for (g, z0) in [(HAWK_DOVE, 0.5), (HAWK_DOVE, 0.9), (SNOWDRIFT_3, 0.05)] {
        let problem = DdeProblem::new(
            g.spec(0.0),
            InitialHistory::Constant(SimplexVector::binary(z0).unwrap()),
            0.01,
            20.0,
        );
        let traj = integrate(&problem).unwrap();
        let oracle = euler_oracle(g, z0, 0.01, 2000);
        assert_eq!(traj.len(), oracle.len());
        for (i, expected) in oracle.iter().enumerate() {
            assert_eq!(traj.point(i), expected.as_slice(), "step {i}");
        }
    }
}

#[test]
fn euler_is_first_order() {
    for r in [4.0, 5.0] {
        let problem = DdeProblem::new(
            HAWK_DOVE.spec(r),
            InitialHistory::Constant(SimplexVector::binary(0.5).unwrap()),
            0.02,
            50.0,
        );
        let check = convergence_check(&problem, 0.001).unwrap();
        assert!((1.5..=2.5).contains(&check.ratio), "r={r}: {check:?}");
        let doubling = step_doubling_error(&problem).unwrap();
        assert!(doubling > 0.0 && doubling < 0.05, "r={r}: {doubling}");
    }
}

#[test]
fn characteristic_roots_change_sign_at_critical_delay() {
    let hd = HAWK_DOVE.payoffs();
    let beta = feedback_gain_2x2(&hd).unwrap();
    let r_star = critical_delay_2x2(&hd).unwrap();
    for r in [
        0.0,
        0.5,
        1.0,
        2.0,
        3.0,
        4.0,
        r_star - 0.01,
        r_star + 0.01,
        5.0,
        6.0,
        8.0,
    ] {
        let kernel = DelayKernel::dirac(r).unwrap();
        let root = characteristic_root(beta, &kernel).unwrap();
        assert!(
            characteristic_residual(root, beta, &kernel) <= ROOT_RESIDUAL_TOL,
            "r={r}"
        );
        assert_eq!(root.re < 0.0, r < r_star, "r={r}: {root}");
    }
    let at = characteristic_root(beta, &DelayKernel::dirac(r_star).unwrap()).unwrap();
    assert!(at.re.abs() < 1e-9, "{at}");
    assert!((at.im - beta).abs() < 1e-9, "{at}");
}

#[test]
fn uniform_kernel_is_more_stable_than_dirac() {
    // Spreading the same maximal lag lowers the average delay, so the
    // loss of stability needs a longer window.
    let hd = HAWK_DOVE.payoffs();
    let beta = feedback_gain_2x2(&hd).unwrap();
    let dirac = characteristic_root(beta, &DelayKernel::dirac(6.0).unwrap()).unwrap();
    let uniform = characteristic_root(beta, &DelayKernel::uniform(6.0, 0.01).unwrap()).unwrap();
    assert!(dirac.re > 0.0);
    assert!(uniform.re < 0.0, "{uniform}");
}
