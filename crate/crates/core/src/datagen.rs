//! Synthetic mean-square-error network: agent statistics, a graph-smooth
//! target signal and streaming linear-regression samples.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LaplacianEigenbasis;
use crate::seeds::{derive_seed, tag};

pub const SIGMA2_U_RANGE: (f64, f64) = (0.5, 2.0);
pub const SIGMA2_V_RANGE: (f64, f64) = (0.2, 0.8);
/// Mean of every entry of the unsmoothed signal.
pub const SIGNAL_MEAN: f64 = 0.1;

/// Per-agent regression models d = uᵀw★_k + v with R_u,k = σ²_u,k I_L.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentEnsemble {
    pub n_agents: usize,
    pub block_size: usize,
    pub sigma2_u: Vec<f64>,
    pub sigma2_v: Vec<f64>,
    /// W★ = col{w★_1, …, w★_N}
    pub w_star: Vec<f64>,
}

impl AgentEnsemble {
    pub fn new(sigma2_u: Vec<f64>, sigma2_v: Vec<f64>, w_star: Vec<f64>, block_size: usize) -> Result<Self> {
        let n = sigma2_u.len();
        if block_size == 0 || sigma2_v.len() != n || w_star.len() != n * block_size {
            return Err(Error::DimensionMismatch {
                expected: format!("{n} variances of each kind and {} targets", n * block_size),
                got: format!("{} noise variances, {} targets", sigma2_v.len(), w_star.len()),
            });
        }
        if sigma2_u.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidParameter("regressor variances must be positive".into()));
        }
        if sigma2_v.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidParameter("noise variances must be nonnegative".into()));
        }
        Ok(AgentEnsemble {
            n_agents: n,
            block_size,
            sigma2_u,
            sigma2_v,
            w_star,
        })
    }

    /// M = N·L
    pub fn dim(&self) -> usize {
        self.n_agents * self.block_size
    }

    pub fn w_star_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.w_star)
    }

    pub fn target(&self, agent: usize) -> &[f64] {
        let l = self.block_size;
        &self.w_star[agent * l..(agent + 1) * l]
    }
}

/// W★ = [(V e^{−τΛ} Vᵀ) ⊗ I_L]·W_o with W_o ~ N(0.1·1, I).
pub fn smooth_signal(basis: &LaplacianEigenbasis, tau: f64, block_size: usize, seed: u64) -> Result<DVector<f64>> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("diffusion time must be >= 0, got {tau}")));
    }
    let n = basis.n_nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n * block_size)
        .map(|_| SIGNAL_MEAN + Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect();
    Ok(diffuse(basis, tau, block_size, &raw))
}

/// Applies (V e^{−τΛ} Vᵀ) ⊗ I_L to a stacked signal.
pub fn diffuse(basis: &LaplacianEigenbasis, tau: f64, block_size: usize, signal: &[f64]) -> DVector<f64> {
    let n = basis.n_nodes();
    let kernel = basis.diffusion_kernel(tau);
    let mut out = DVector::zeros(n * block_size);
    for k in 0..n {
        for l in 0..n {
            let w = kernel[(k, l)];
            for d in 0..block_size {
                out[k * block_size + d] += w * signal[l * block_size + d];
            }
        }
    }
    out
}

/// Draws σ²_u,k ~ U(0.5, 2), σ²_v,k ~ U(0.2, 0.8) and a smooth W★.
pub fn sample_agent_models(
    n: usize,
    block_size: usize,
    basis: &LaplacianEigenbasis,
    tau: f64,
    seed: u64,
) -> Result<AgentEnsemble> {
    if basis.n_nodes() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("eigenbasis over {n} nodes"),
            got: format!("eigenbasis over {} nodes", basis.n_nodes()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tag::VARIANCES));
    let du = Uniform::new_inclusive(SIGMA2_U_RANGE.0, SIGMA2_U_RANGE.1).expect("valid range");
    let dv = Uniform::new_inclusive(SIGMA2_V_RANGE.0, SIGMA2_V_RANGE.1).expect("valid range");
    let sigma2_u: Vec<f64> = (0..n).map(|_| du.sample(&mut rng)).collect();
    let sigma2_v: Vec<f64> = (0..n).map(|_| dv.sample(&mut rng)).collect();
    let w_star = smooth_signal(basis, tau, block_size, derive_seed(seed, tag::SIGNAL))?;
    AgentEnsemble::new(sigma2_u, sigma2_v, w_star.as_slice().to_vec(), block_size)
}

/// One regression observation at one agent.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub regressor: Vec<f64>,
    pub observation: f64,
}

/// Draws u ~ N(0, σ²_u,k I_L), v ~ N(0, σ²_v,k) and returns (u, uᵀw★_k + v).
pub fn stream_sample<R: Rng + ?Sized>(ens: &AgentEnsemble, agent: usize, rng: &mut R) -> Sample {
    assert!(agent < ens.n_agents, "agent {agent} out of range");
    let mut regressor = vec![0.0; ens.block_size];
    let observation = draw_into(ens, agent, rng, &mut regressor);
    Sample { regressor, observation }
}

#[inline]
fn draw_into<R: Rng + ?Sized>(ens: &AgentEnsemble, agent: usize, rng: &mut R, regressor: &mut [f64]) -> f64 {
    let su = ens.sigma2_u[agent].sqrt();
    let sv = ens.sigma2_v[agent].sqrt();
    let target = ens.target(agent);
    let mut d = 0.0;
    for (u, w) in regressor.iter_mut().zip(target) {
        let z: f64 = StandardNormal.sample(rng);
        *u = su * z;
        d += *u * w;
    }
    let z: f64 = StandardNormal.sample(rng);
    d + sv * z
}

/// Samples of every agent at one iteration, stored contiguously.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    /// N·L regressor entries, agent-major.
    pub regressors: Vec<f64>,
    pub observations: Vec<f64>,
}

impl SampleBatch {
    pub fn zeros(n_agents: usize, block_size: usize) -> Self {
        SampleBatch {
            regressors: vec![0.0; n_agents * block_size],
            observations: vec![0.0; n_agents],
        }
    }
}

/// Independent per-agent generators for one Monte-Carlo run.
///
/// Agent k of run r draws from the ChaCha stream `k` keyed by
/// `derive_seed(seed, r)`, so runs and agents never share a stream.
#[derive(Clone, Debug)]
pub struct SampleStream {
    agents: Vec<ChaCha8Rng>,
}

impl SampleStream {
    pub fn new(seed: u64, run: usize, n_agents: usize) -> Self {
        let key = derive_seed(seed, run as u64);
        let agents = (0..n_agents)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(key);
                rng.set_stream(k as u64);
                rng
            })
            .collect();
        SampleStream { agents }
    }

    pub fn agent_rng(&mut self, agent: usize) -> &mut ChaCha8Rng {
        &mut self.agents[agent]
    }

    pub fn next_batch(&mut self, ens: &AgentEnsemble, batch: &mut SampleBatch) {
        let l = ens.block_size;
        for (k, rng) in self.agents.iter_mut().enumerate() {
            batch.observations[k] = draw_into(ens, k, rng, &mut batch.regressors[k * l..(k + 1) * l]);
        }
    }
}
