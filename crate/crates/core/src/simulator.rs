//! Adapt-then-combine simulation of the distributed, centralized and
//! non-cooperative strategies, and the Monte-Carlo learning-curve harness.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::datagen::{AgentEnsemble, SampleBatch, SampleStream};
use crate::design::CombinationMatrix;
use crate::error::{Error, Result};
use crate::subspace::SubspaceBasis;
use crate::theory::to_db;

/// Runs evaluated together before their curves are accumulated. Fixed so
/// that the reduction order never depends on the thread count.
const RUN_CHUNK: usize = 16;

/// Estimates and intermediate estimates of all agents.
#[derive(Clone, Debug)]
pub struct SimState {
    /// col{w_k,i}
    pub estimates: Vec<f64>,
    /// col{ψ_k,i}
    pub intermediates: Vec<f64>,
    pub iteration: usize,
    pub step_size: f64,
}

impl SimState {
    /// W_0 = 0
    pub fn zeros(dim: usize, step_size: f64) -> Self {
        SimState {
            estimates: vec![0.0; dim],
            intermediates: vec![0.0; dim],
            iteration: 0,
            step_size,
        }
    }

    /// ψ_k = w_k + μ u_k (d_k − u_kᵀ w_k)
    fn adapt(&mut self, batch: &SampleBatch, block_size: usize) {
        let mu = self.step_size;
        for (k, d) in batch.observations.iter().enumerate() {
            let range = k * block_size..(k + 1) * block_size;
            let u = &batch.regressors[range.clone()];
            let w = &self.estimates[range.clone()];
            let err = d - u.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
            let psi = &mut self.intermediates[range];
            for ((p, w), u) in psi.iter_mut().zip(w).zip(u) {
                *p = w + mu * err * u;
            }
        }
    }

    fn finish_step(&mut self) -> Result<()> {
        self.iteration += 1;
        if self.estimates.iter().sum::<f64>().is_finite() {
            Ok(())
        } else {
            Err(Error::Divergence {
                run: 0,
                iteration: self.iteration,
            })
        }
    }

    pub fn squared_distance(&self, target: &[f64]) -> f64 {
        self.estimates.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

#[derive(Clone, Debug)]
enum Block {
    Scalar(f64),
    /// Row-major L×L.
    Dense(Vec<f64>),
}

/// Block-sparse combination operator restricted to the neighborhood mask.
#[derive(Clone, Debug)]
pub struct Combiner {
    block_size: usize,
    rows: Vec<Vec<(usize, Block)>>,
}

impl Combiner {
    /// Keeps only the blocks A_kℓ allowed by the matrix support; blocks equal
    /// to c·I_L are stored as scalars.
    pub fn new(a: &CombinationMatrix) -> Self {
        let n = a.n_agents();
        let l = a.block_size;
        let rows = (0..n)
            .map(|k| {
                a.support
                    .neighbors(k)
                    .filter_map(|j| {
                        let block = match &a.graph_matrix {
                            Some(g) => Block::Scalar(g[(k, j)]),
                            None => dense_or_scalar(&a.a, k, j, l),
                        };
                        match block {
                            Block::Scalar(0.0) => None,
                            b => Some((j, b)),
                        }
                    })
                    .collect()
            })
            .collect();
        Combiner { block_size: l, rows }
    }

    pub fn identity(n_agents: usize, block_size: usize) -> Self {
        Combiner {
            block_size,
            rows: (0..n_agents).map(|k| vec![(k, Block::Scalar(1.0))]).collect(),
        }
    }

    /// output = A·input over the support blocks.
    pub fn apply(&self, input: &[f64], output: &mut [f64]) {
        let l = self.block_size;
        for (k, row) in self.rows.iter().enumerate() {
            let out = &mut output[k * l..(k + 1) * l];
            out.fill(0.0);
            for (j, block) in row {
                let src = &input[j * l..(j + 1) * l];
                match block {
                    Block::Scalar(c) => {
                        for (o, s) in out.iter_mut().zip(src) {
                            *o += c * s;
                        }
                    }
                    Block::Dense(m) => {
                        for (r, o) in out.iter_mut().enumerate() {
                            *o += m[r * l..(r + 1) * l].iter().zip(src).map(|(a, b)| a * b).sum::<f64>();
                        }
                    }
                }
            }
        }
    }
}

fn dense_or_scalar(a: &DMatrix<f64>, k: usize, j: usize, l: usize) -> Block {
    let view = a.view((k * l, j * l), (l, l));
    let c = view[(0, 0)];
    let scalar = (0..l).all(|r| (0..l).all(|s| view[(r, s)] == if r == s { c } else { 0.0 }));
    if scalar {
        Block::Scalar(c)
    } else {
        Block::Dense((0..l * l).map(|i| view[(i / l, i % l)]).collect())
    }
}

/// Dense projector P_U = U Uᵀ applied as U(Uᵀx).
#[derive(Clone, Debug)]
pub struct Projection {
    dim: usize,
    rank: usize,
    /// Row-major M×P.
    u: Vec<f64>,
}

impl Projection {
    pub fn new(basis: &SubspaceBasis) -> Self {
        let (dim, rank) = basis.u.shape();
        let u = (0..dim * rank).map(|i| basis.u[(i / rank, i % rank)]).collect();
        Projection { dim, rank, u }
    }

    /// output = U Uᵀ input
    pub fn apply(&self, input: &[f64], output: &mut [f64]) {
        let mut coords = vec![0.0; self.rank];
        for (i, x) in input.iter().enumerate() {
            let row = &self.u[i * self.rank..(i + 1) * self.rank];
            for (c, u) in coords.iter_mut().zip(row) {
                *c += u * x;
            }
        }
        for (i, o) in output.iter_mut().enumerate().take(self.dim) {
            let row = &self.u[i * self.rank..(i + 1) * self.rank];
            *o = row.iter().zip(&coords).map(|(a, b)| a * b).sum();
        }
    }
}

/// Adapt locally, then combine ψ over the neighborhoods with the blocks of A.
pub fn step_distributed(
    state: &mut SimState,
    combiner: &Combiner,
    ens: &AgentEnsemble,
    batch: &SampleBatch,
) -> Result<()> {
    state.adapt(batch, ens.block_size);
    combiner.apply(&state.intermediates, &mut state.estimates);
    state.finish_step()
}

/// W_i = P_U(W_{i−1} − μ·col{∇̂J_k})
pub fn step_centralized(
    state: &mut SimState,
    projection: &Projection,
    ens: &AgentEnsemble,
    batch: &SampleBatch,
) -> Result<()> {
    state.adapt(batch, ens.block_size);
    projection.apply(&state.intermediates, &mut state.estimates);
    state.finish_step()
}

/// How a strategy turns intermediate estimates into new estimates.
#[derive(Clone, Debug)]
pub enum Update {
    Combine(Combiner),
    Project(Projection),
}

/// One strategy tracked by the Monte-Carlo harness.
#[derive(Clone, Debug)]
pub struct StrategySpec {
    pub label: String,
    pub update: Update,
    /// Limit point W° the MSD is measured against.
    pub w_o: Vec<f64>,
}

impl StrategySpec {
    pub fn distributed(label: impl Into<String>, a: &CombinationMatrix, w_o: &DVector<f64>) -> Self {
        StrategySpec {
            label: label.into(),
            update: Update::Combine(Combiner::new(a)),
            w_o: w_o.as_slice().to_vec(),
        }
    }

    pub fn centralized(label: impl Into<String>, basis: &SubspaceBasis, w_o: &DVector<f64>) -> Self {
        StrategySpec {
            label: label.into(),
            update: Update::Project(Projection::new(basis)),
            w_o: w_o.as_slice().to_vec(),
        }
    }

    /// A = I; each agent runs its own LMS filter towards w★_k.
    pub fn noncooperative(label: impl Into<String>, ens: &AgentEnsemble) -> Self {
        StrategySpec {
            label: label.into(),
            update: Update::Combine(Combiner::identity(ens.n_agents, ens.block_size)),
            w_o: ens.w_star.clone(),
        }
    }

    fn step(&self, state: &mut SimState, ens: &AgentEnsemble, batch: &SampleBatch) -> Result<()> {
        match &self.update {
            Update::Combine(c) => step_distributed(state, c, ens, batch),
            Update::Project(p) => step_centralized(state, p, ens, batch),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MonteCarloConfig {
    pub mu: f64,
    pub iterations: usize,
    pub n_runs: usize,
    /// Fraction of iterations discarded before steady-state averaging.
    pub burn_in_fraction: f64,
    pub seed: u64,
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0) {
            return Err(Error::InvalidParameter(format!("step size must be >= 0, got {}", self.mu)));
        }
        if self.iterations == 0 || self.n_runs == 0 {
            return Err(Error::InvalidParameter("iterations and n_runs must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::InvalidParameter(format!(
                "burn-in fraction must lie in [0, 1), got {}",
                self.burn_in_fraction
            )));
        }
        Ok(())
    }

    /// First iteration index (0-based into the curve) of the averaging window.
    pub fn tail_start(&self) -> usize {
        ((self.burn_in_fraction * self.iterations as f64).floor() as usize).min(self.iterations - 1)
    }
}

/// Run-averaged network MSD per iteration, in the linear domain.
#[derive(Clone, Debug, PartialEq)]
pub struct LearningCurve {
    pub label: String,
    /// (1/N)·E‖W★ − W_i‖², i = 1..=iterations
    pub msd_wstar: Vec<f64>,
    /// (1/N)·E‖W° − W_i‖²
    pub msd_wo: Vec<f64>,
    pub n_runs: usize,
    pub tail_start: usize,
    /// Tail average of `msd_wo`, in dB.
    pub steady_state_db: f64,
    /// Tail average of `msd_wstar`, in dB.
    pub steady_state_wstar_db: f64,
}

impl LearningCurve {
    pub fn msd_wstar_db(&self) -> Vec<f64> {
        self.msd_wstar.iter().map(|v| to_db(*v)).collect()
    }

    pub fn msd_wo_db(&self) -> Vec<f64> {
        self.msd_wo.iter().map(|v| to_db(*v)).collect()
    }
}

struct RunTrace {
    wstar: Vec<Vec<f64>>,
    wo: Vec<Vec<f64>>,
}

fn simulate_run(
    ens: &AgentEnsemble,
    strategies: &[StrategySpec],
    cfg: &MonteCarloConfig,
    run: usize,
) -> Result<RunTrace> {
    let dim = ens.dim();
    let n = ens.n_agents as f64;
    let mut stream = SampleStream::new(cfg.seed, run, ens.n_agents);
    let mut batch = SampleBatch::zeros(ens.n_agents, ens.block_size);
    let mut states: Vec<SimState> = strategies.iter().map(|_| SimState::zeros(dim, cfg.mu)).collect();
    let mut trace = RunTrace {
        wstar: strategies.iter().map(|_| Vec::with_capacity(cfg.iterations)).collect(),
        wo: strategies.iter().map(|_| Vec::with_capacity(cfg.iterations)).collect(),
    };
    for _ in 0..cfg.iterations {
        // Every strategy sees the same samples.
        stream.next_batch(ens, &mut batch);
        for (s, (spec, state)) in strategies.iter().zip(states.iter_mut()).enumerate() {
            spec.step(state, ens, &batch).map_err(|e| match e {
                Error::Divergence { iteration, .. } => Error::Divergence { run, iteration },
                other => other,
            })?;
            trace.wstar[s].push(state.squared_distance(&ens.w_star) / n);
            trace.wo[s].push(state.squared_distance(&spec.w_o) / n);
        }
    }
    Ok(trace)
}

/// Averages the learning curves of every strategy over independent runs.
///
/// Runs are simulated in parallel; curves are summed in run order so the
/// result is identical for any thread count.
pub fn run_monte_carlo(
    ens: &AgentEnsemble,
    strategies: &[StrategySpec],
    cfg: &MonteCarloConfig,
) -> Result<Vec<LearningCurve>> {
    cfg.validate()?;
    for spec in strategies {
        if spec.w_o.len() != ens.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("limit point of length {}", ens.dim()),
                got: format!("length {} for strategy {}", spec.w_o.len(), spec.label),
            });
        }
    }
    let mut sum_wstar = vec![vec![0.0; cfg.iterations]; strategies.len()];
    let mut sum_wo = vec![vec![0.0; cfg.iterations]; strategies.len()];
    let runs: Vec<usize> = (0..cfg.n_runs).collect();
    for chunk in runs.chunks(RUN_CHUNK) {
        let traces: Vec<Result<RunTrace>> = chunk
            .par_iter()
            .map(|&run| simulate_run(ens, strategies, cfg, run))
            .collect();
        for trace in traces {
            let trace = trace?;
            for s in 0..strategies.len() {
                for (acc, v) in sum_wstar[s].iter_mut().zip(&trace.wstar[s]) {
                    *acc += v;
                }
                for (acc, v) in sum_wo[s].iter_mut().zip(&trace.wo[s]) {
                    *acc += v;
                }
            }
        }
    }
    let runs = cfg.n_runs as f64;
    let tail_start = cfg.tail_start();
    Ok(strategies
        .iter()
        .zip(sum_wstar.into_iter().zip(sum_wo))
        .map(|(spec, (mut wstar, mut wo))| {
            wstar.iter_mut().for_each(|v| *v /= runs);
            wo.iter_mut().for_each(|v| *v /= runs);
            let steady_state_db = to_db(tail_mean(&wo[tail_start..]));
            let steady_state_wstar_db = to_db(tail_mean(&wstar[tail_start..]));
            LearningCurve {
                label: spec.label.clone(),
                msd_wstar: wstar,
                msd_wo: wo,
                n_runs: cfg.n_runs,
                tail_start,
                steady_state_db,
                steady_state_wstar_db,
            }
        })
        .collect())
}

fn tail_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::stream_sample;
    use crate::graph::NeighborhoodMask;

    fn ensemble() -> AgentEnsemble {
        AgentEnsemble::new(
            vec![1.0, 0.6, 1.7],
            vec![0.3, 0.0, 0.5],
            vec![0.5, -0.2, 0.1, 0.4, -0.3, 0.8],
            2,
        )
        .unwrap()
    }

    fn batch_for(ens: &AgentEnsemble, seed: u64) -> SampleBatch {
        let mut stream = SampleStream::new(seed, 0, ens.n_agents);
        let mut batch = SampleBatch::zeros(ens.n_agents, ens.block_size);
        stream.next_batch(ens, &mut batch);
        batch
    }

    #[test]
    fn zero_step_keeps_state() {
        let ens = ensemble();
        let mut state = SimState::zeros(6, 0.0);
        state.estimates = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let before = state.estimates.clone();
        step_distributed(&mut state, &Combiner::identity(3, 2), &ens, &batch_for(&ens, 1)).unwrap();
        assert_eq!(state.estimates, before);
        assert_eq!(state.iteration, 1);
    }

    #[test]
    fn gradient_vanishes_at_noiseless_target() {
        let ens = AgentEnsemble::new(vec![1.0, 2.0], vec![0.0, 0.0], vec![0.3, 0.1, -0.5, 0.9], 2).unwrap();
        let mut state = SimState::zeros(4, 0.1);
        state.estimates = ens.w_star.clone();
        step_distributed(&mut state, &Combiner::identity(2, 2), &ens, &batch_for(&ens, 2)).unwrap();
        assert_eq!(state.estimates, ens.w_star);
    }

    #[test]
    fn first_step_from_zero() {
        let ens = ensemble();
        let mu = 0.05;
        let batch = batch_for(&ens, 3);
        let mut state = SimState::zeros(6, mu);
        step_distributed(&mut state, &Combiner::identity(3, 2), &ens, &batch).unwrap();
        for k in 0..3 {
            for d in 0..2 {
                let want = mu * batch.regressors[k * 2 + d] * batch.observations[k];
                assert!((state.intermediates[k * 2 + d] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn identity_projection_is_lms() {
        let ens = ensemble();
        let full = SubspaceBasis::from_graph_factor(DMatrix::identity(3, 3), 2).unwrap();
        let proj = Projection::new(&full);
        let combiner = Combiner::identity(3, 2);
        let mut a = SimState::zeros(6, 0.02);
        let mut b = SimState::zeros(6, 0.02);
        let mut stream = SampleStream::new(9, 0, 3);
        let mut batch = SampleBatch::zeros(3, 2);
        for _ in 0..200 {
            stream.next_batch(&ens, &mut batch);
            step_centralized(&mut a, &proj, &ens, &batch).unwrap();
            step_distributed(&mut b, &combiner, &ens, &batch).unwrap();
        }
        for (x, y) in a.estimates.iter().zip(&b.estimates) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn projector_combiner_matches_centralized() {
        let ens = ensemble();
        let g = DMatrix::from_element(3, 1, 1.0 / 3f64.sqrt());
        let basis = SubspaceBasis::from_graph_factor(g, 2).unwrap();
        let a = CombinationMatrix::projector(&basis);
        assert!(a.mask == NeighborhoodMask::complete(3));
        let combiner = Combiner::new(&a);
        let proj = Projection::new(&basis);
        let mut x = SimState::zeros(6, 0.01);
        let mut y = SimState::zeros(6, 0.01);
        let mut stream = SampleStream::new(4, 0, 3);
        let mut batch = SampleBatch::zeros(3, 2);
        for _ in 0..500 {
            stream.next_batch(&ens, &mut batch);
            step_distributed(&mut x, &combiner, &ens, &batch).unwrap();
            step_centralized(&mut y, &proj, &ens, &batch).unwrap();
        }
        for (p, q) in x.estimates.iter().zip(&y.estimates) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn centralized_fixed_point_at_zero_step() {
        let ens = ensemble();
        let g = DMatrix::from_element(3, 1, 1.0 / 3f64.sqrt());
        let basis = SubspaceBasis::from_graph_factor(g, 2).unwrap();
        let mut state = SimState::zeros(6, 0.0);
        state.estimates = vec![0.7, -0.1, 0.7, -0.1, 0.7, -0.1];
        let before = state.estimates.clone();
        step_centralized(&mut state, &Projection::new(&basis), &ens, &batch_for(&ens, 5)).unwrap();
        for (a, b) in state.estimates.iter().zip(&before) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn noncooperative_matches_scalar_lms() {
        let ens = ensemble();
        let mu = 0.03;
        let spec = StrategySpec::noncooperative("nc", &ens);
        let mut state = SimState::zeros(6, mu);
        let mut stream = SampleStream::new(11, 0, 3);
        let mut reference = SampleStream::new(11, 0, 3);
        let mut manual = [[0.0f64; 2]; 3];
        let mut batch = SampleBatch::zeros(3, 2);
        for _ in 0..300 {
            stream.next_batch(&ens, &mut batch);
            spec.step(&mut state, &ens, &batch).unwrap();
            for (k, w) in manual.iter_mut().enumerate() {
                let s = stream_sample(&ens, k, reference.agent_rng(k));
                let e = s.observation - (s.regressor[0] * w[0] + s.regressor[1] * w[1]);
                w[0] += mu * e * s.regressor[0];
                w[1] += mu * e * s.regressor[1];
            }
        }
        for k in 0..3 {
            for d in 0..2 {
                assert!((state.estimates[k * 2 + d] - manual[k][d]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_blocks_are_applied() {
        let mut a = DMatrix::zeros(4, 4);
        a[(0, 0)] = 0.5;
        a[(0, 3)] = 0.25;
        a[(1, 1)] = 0.5;
        a[(2, 2)] = 1.0;
        a[(3, 3)] = 1.0;
        a[(3, 0)] = 0.25;
        let basis = SubspaceBasis::from_graph_factor(DMatrix::identity(2, 2), 2).unwrap();
        let cm = CombinationMatrix::certify(a.clone(), &basis, NeighborhoodMask::complete(2), 1.0).unwrap();
        let c = Combiner::new(&cm);
        let x = [1.0, 2.0, 3.0, 4.0];
        let mut y = [0.0; 4];
        c.apply(&x, &mut y);
        let want = &a * DVector::from_column_slice(&x);
        for i in 0..4 {
            assert!((y[i] - want[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let ens = ensemble();
        let spec = StrategySpec::noncooperative("nc", &ens);
        let cfg = MonteCarloConfig {
            mu: 50.0,
            iterations: 5000,
            n_runs: 2,
            burn_in_fraction: 0.5,
            seed: 1,
        };
        let err = run_monte_carlo(&ens, &[spec], &cfg).unwrap_err();
        assert!(matches!(err, Error::Divergence { run: 0, .. }));
    }

    #[test]
    fn single_run_curve_is_raw_error() {
        let ens = ensemble();
        let spec = StrategySpec::noncooperative("nc", &ens);
        let cfg = MonteCarloConfig {
            mu: 0.01,
            iterations: 50,
            n_runs: 1,
            burn_in_fraction: 0.8,
            seed: 6,
        };
        let curves = run_monte_carlo(&ens, std::slice::from_ref(&spec), &cfg).unwrap();
        let mut state = SimState::zeros(6, 0.01);
        let mut stream = SampleStream::new(6, 0, 3);
        let mut batch = SampleBatch::zeros(3, 2);
        for i in 0..50 {
            stream.next_batch(&ens, &mut batch);
            spec.step(&mut state, &ens, &batch).unwrap();
            assert_eq!(curves[0].msd_wstar[i], state.squared_distance(&ens.w_star) / 3.0);
        }
    }

    #[test]
    fn config_validation() {
        let base = MonteCarloConfig {
            mu: 0.01,
            iterations: 10,
            n_runs: 1,
            burn_in_fraction: 0.8,
            seed: 0,
        };
        assert!(base.validate().is_ok());
        assert_eq!(base.tail_start(), 8);
        assert!(MonteCarloConfig { burn_in_fraction: 1.0, ..base.clone() }.validate().is_err());
        assert!(MonteCarloConfig { n_runs: 0, ..base.clone() }.validate().is_err());
        assert!(MonteCarloConfig { mu: -1.0, ..base }.validate().is_err());
    }
}
