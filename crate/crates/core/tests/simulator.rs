use nalgebra::{DMatrix, DVector};
use subnet_core::datagen::{AgentEnsemble, SampleBatch, SampleStream};
use subnet_core::design::CombinationMatrix;
use subnet_core::graph::NeighborhoodMask;
use subnet_core::simulator::{
    run_monte_carlo, step_centralized, step_distributed, Combiner, MonteCarloConfig, Projection, SimState,
    StrategySpec,
};
use subnet_core::subspace::SubspaceBasis;
use subnet_core::theory::{limit_point, to_db};

fn ensemble() -> AgentEnsemble {
    AgentEnsemble::new(
        vec![1.0, 0.6, 1.7, 1.2],
        vec![0.3, 0.4, 0.5, 0.2],
        vec![0.5, -0.2, 0.1, 0.4, -0.3, 0.8, 0.2, 0.0],
        2,
    )
    .unwrap()
}

fn consensus(n: usize, l: usize) -> SubspaceBasis {
    SubspaceBasis::from_graph_factor(DMatrix::from_element(n, 1, 1.0 / (n as f64).sqrt()), l).unwrap()
}

fn batches(ens: &AgentEnsemble, seed: u64, count: usize) -> Vec<SampleBatch> {
    let mut stream = SampleStream::new(seed, 0, ens.n_agents);
    (0..count)
        .map(|_| {
            let mut b = SampleBatch::zeros(ens.n_agents, ens.block_size);
            stream.next_batch(ens, &mut b);
            b
        })
        .collect()
}

#[test]
fn identity_combination_is_independent_lms() {
    let ens = ensemble();
    let mu = 0.02;
    let mut state = SimState::zeros(8, mu);
    let mut reference = vec![vec![0.0; 2]; 4];
    for b in batches(&ens, 1, 200) {
        step_distributed(&mut state, &Combiner::identity(4, 2), &ens, &b).unwrap();
        for (k, w) in reference.iter_mut().enumerate() {
            let u = &b.regressors[k * 2..k * 2 + 2];
            let e = b.observations[k] - u[0] * w[0] - u[1] * w[1];
            w[0] += mu * e * u[0];
            w[1] += mu * e * u[1];
        }
    }
    for k in 0..4 {
        for d in 0..2 {
            assert!((state.estimates[k * 2 + d] - reference[k][d]).abs() <= 1e-12);
        }
    }
}

#[test]
fn projector_combination_equals_centralized_step() {
    let ens = ensemble();
    let basis = consensus(4, 2);
    let a = CombinationMatrix::projector(&basis);
    let combiner = Combiner::new(&a);
    let projection = Projection::new(&basis);
    let mut dist = SimState::zeros(8, 0.05);
    let mut cent = SimState::zeros(8, 0.05);
    for b in batches(&ens, 2, 300) {
        step_distributed(&mut dist, &combiner, &ens, &b).unwrap();
        step_centralized(&mut cent, &projection, &ens, &b).unwrap();
    }
    for (x, y) in dist.estimates.iter().zip(&cent.estimates) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn identity_projection_is_noncooperative() {
    let ens = ensemble();
    let full = SubspaceBasis::from_matrix(DMatrix::identity(8, 8), 2).unwrap();
    let projection = Projection::new(&full);
    let mut a = SimState::zeros(8, 0.03);
    let mut b = SimState::zeros(8, 0.03);
    for batch in batches(&ens, 3, 100) {
        step_centralized(&mut a, &projection, &ens, &batch).unwrap();
        step_distributed(&mut b, &Combiner::identity(4, 2), &ens, &batch).unwrap();
    }
    for (x, y) in a.estimates.iter().zip(&b.estimates) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn zero_step_from_subspace_is_fixed() {
    let ens = ensemble();
    let basis = consensus(4, 2);
    let mut state = SimState::zeros(8, 0.0);
    state.estimates = vec![0.3, -0.1, 0.3, -0.1, 0.3, -0.1, 0.3, -0.1];
    let before = state.estimates.clone();
    for b in batches(&ens, 4, 5) {
        step_centralized(&mut state, &Projection::new(&basis), &ens, &b).unwrap();
    }
    for (x, y) in state.estimates.iter().zip(&before) {
        assert!((x - y).abs() < 1e-15);
    }
}

#[test]
fn combiner_ignores_entries_outside_the_support() {
    let basis = consensus(3, 1);
    let mask = NeighborhoodMask::from_fn(3, |k, l| k.abs_diff(l) <= 1);
    // Projector has nonzero (0, 2) entries; the mask forbids them.
    let a = CombinationMatrix::certify(basis.projector().clone(), &basis, mask, 0.01).unwrap();
    let combiner = Combiner::new(&a);
    let psi = [3.0, 0.0, 0.0];
    let mut out = [0.0f64; 3];
    combiner.apply(&psi, &mut out);
    assert!((out[0] - 1.0).abs() < 1e-15 && (out[1] - 1.0).abs() < 1e-15);
    assert_eq!(out[2], 0.0);
}

#[test]
fn divergence_is_reported_with_run_index() {
    let ens = ensemble();
    let strategies = [StrategySpec::noncooperative("nc", &ens)];
    let cfg = MonteCarloConfig {
        mu: 10.0,
        iterations: 5000,
        n_runs: 2,
        burn_in_fraction: 0.5,
        seed: 1,
    };
    let err = run_monte_carlo(&ens, &strategies, &cfg).unwrap_err();
    assert!(matches!(err, subnet_core::Error::Divergence { run: 0, .. }), "{err:?}");
}

#[test]
fn single_run_curve_is_raw_squared_error() {
    let ens = ensemble();
    let strategies = [StrategySpec::noncooperative("nc", &ens)];
    let cfg = MonteCarloConfig {
        mu: 0.01,
        iterations: 50,
        n_runs: 1,
        burn_in_fraction: 0.5,
        seed: 9,
    };
    let curve = &run_monte_carlo(&ens, &strategies, &cfg).unwrap()[0];
    let mut stream = SampleStream::new(9, 0, 4);
    let mut batch = SampleBatch::zeros(4, 2);
    let mut state = SimState::zeros(8, 0.01);
    for i in 0..50 {
        stream.next_batch(&ens, &mut batch);
        step_distributed(&mut state, &Combiner::identity(4, 2), &ens, &batch).unwrap();
        assert_eq!(curve.msd_wstar[i], state.squared_distance(&ens.w_star) / 4.0);
    }
}

#[test]
fn monte_carlo_is_deterministic_and_thread_independent() {
    let ens = ensemble();
    let basis = consensus(4, 2);
    let w_o = limit_point(&basis, &ens).unwrap();
    let strategies = [
        StrategySpec::centralized("c", &basis, &w_o),
        StrategySpec::noncooperative("nc", &ens),
    ];
    let cfg = MonteCarloConfig {
        mu: 0.01,
        iterations: 400,
        n_runs: 40,
        burn_in_fraction: 0.8,
        seed: 3,
    };
    let a = run_monte_carlo(&ens, &strategies, &cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let b = pool.install(|| run_monte_carlo(&ens, &strategies, &cfg).unwrap());
    assert_eq!(a, b);
    let tail = &a[0].msd_wo[a[0].tail_start..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    assert_eq!(a[0].steady_state_db, to_db(mean));
}

#[test]
fn noiseless_run_reaches_a_target_inside_the_subspace() {
    // W★ ∈ range(U) and no observation noise: W° = W★, there is no bias and
    // no gradient noise at the target, so the error vanishes.
    let ens = AgentEnsemble::new(vec![1.0, 0.7, 1.6], vec![0.0; 3], vec![0.3, -0.5, 0.3, -0.5, 0.3, -0.5], 2).unwrap();
    let basis = consensus(3, 2);
    let w_o = limit_point(&basis, &ens).unwrap();
    assert!((&w_o - DVector::from_column_slice(&ens.w_star)).norm() < 1e-12);
    let strategies = [StrategySpec::centralized("c", &basis, &w_o)];
    let cfg = MonteCarloConfig {
        mu: 0.05,
        iterations: 3000,
        n_runs: 4,
        burn_in_fraction: 0.8,
        seed: 1,
    };
    let curve = &run_monte_carlo(&ens, &strategies, &cfg).unwrap()[0];
    assert!(*curve.msd_wstar.last().unwrap() < 1e-20);
    assert!(curve.steady_state_db < -150.0);
}

#[test]
fn doubling_runs_halves_the_estimator_variance() {
    let ens = ensemble();
    let strategies = [StrategySpec::noncooperative("nc", &ens)];
    let estimate = |n_runs: usize, seed: u64| {
        let cfg = MonteCarloConfig {
            mu: 0.05,
            iterations: 200,
            n_runs,
            burn_in_fraction: 0.95,
            seed,
        };
        let c = &run_monte_carlo(&ens, &strategies, &cfg).unwrap()[0];
        c.msd_wo[c.tail_start..].iter().sum::<f64>() / (200 - c.tail_start) as f64
    };
    let variance = |n_runs: usize| {
        let xs: Vec<f64> = (0..300).map(|s| estimate(n_runs, 1000 + s)).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let ratio = variance(4) / variance(8);
    assert!((1.5..2.6).contains(&ratio), "variance ratio {ratio}");
}

#[test]
fn config_validation() {
    let ens = ensemble();
    let strategies = [StrategySpec::noncooperative("nc", &ens)];
    let bad = MonteCarloConfig {
        mu: 0.01,
        iterations: 10,
        n_runs: 0,
        burn_in_fraction: 0.5,
        seed: 0,
    };
    assert!(run_monte_carlo(&ens, &strategies, &bad).is_err());
    let bad = MonteCarloConfig {
        n_runs: 1,
        burn_in_fraction: 1.0,
        ..bad
    };
    assert!(run_monte_carlo(&ens, &strategies, &bad).is_err());
}
