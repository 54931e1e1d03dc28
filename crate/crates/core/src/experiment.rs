//! Experiment configuration and the pipeline shared by the command-line
//! tool and the acceptance runs: topology, ensemble, designed matrices,
//! Monte-Carlo curves and the matching theory.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::datagen::{sample_agent_models, AgentEnsemble};
use crate::design::{douglas_rachford, CombinationMatrix, DesignConfig};
use crate::error::{Error, Result};
use crate::graph::{generate_geometric, laplacian_eigenbasis, LaplacianEigenbasis, NeighborhoodMask, Topology};
use crate::seeds::{derive_seed, tag};
use crate::simulator::{run_monte_carlo, Combiner, LearningCurve, MonteCarloConfig, Projection, StrategySpec, Update};
use crate::subspace::{build_subspace, SubspaceBasis};
use crate::theory::{limit_point, predict, TheorySummary, DEFAULT_TAIL_TOL};

/// Which links the combination matrix may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Communication {
    /// Edges of the kernel graph.
    Kernel,
    /// Every pair of agents may communicate.
    Complete,
    /// No links at all.
    Isolated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub n: usize,
    pub sigma: f64,
    pub kappa: f64,
    pub communication: Communication,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            n: 50,
            sigma: 0.12,
            kappa: 0.33,
            communication: Communication::Kernel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubspaceConfig {
    /// Numbers of leading Laplacian eigenvectors; one subspace per entry.
    pub p: Vec<usize>,
    pub block_size: usize,
    /// Diffusion time of the smoothing kernel.
    pub tau: f64,
}

impl Default for SubspaceConfig {
    fn default() -> Self {
        SubspaceConfig {
            p: vec![4],
            block_size: 5,
            tau: 30.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Distributed,
    Centralized,
    Noncooperative,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Distributed => "distributed",
            StrategyKind::Centralized => "centralized",
            StrategyKind::Noncooperative => "noncooperative",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub mu: Vec<f64>,
    /// Fixed iteration count; when absent, ceil(iteration_horizon / μ).
    pub iterations: Option<usize>,
    pub iteration_horizon: f64,
    pub n_runs: usize,
    pub burn_in_fraction: f64,
    pub strategies: Vec<StrategyKind>,
    /// Write every `curve_stride`-th iteration to the curve files.
    pub curve_stride: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            mu: vec![1e-3],
            iterations: None,
            iteration_horizon: 20.0,
            n_runs: 200,
            burn_in_fraction: 0.8,
            strategies: vec![StrategyKind::Distributed, StrategyKind::Centralized],
            curve_stride: 1,
        }
    }
}

impl SimulationConfig {
    pub fn iterations_for(&self, mu: f64) -> usize {
        self.iterations
            .unwrap_or_else(|| (self.iteration_horizon / mu).ceil().max(1.0) as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub subspace: SubspaceConfig,
    #[serde(default)]
    pub design: DesignConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            master_seed: 0,
            output_dir: default_output_dir(),
            graph: GraphConfig::default(),
            subspace: SubspaceConfig::default(),
            design: DesignConfig::default(),
            simulation: SimulationConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.graph;
        if g.n < 2 || !(g.sigma > 0.0) || !(g.kappa > 0.0 && g.kappa <= std::f64::consts::SQRT_2) {
            return Err(Error::Config(format!(
                "graph needs n >= 2, sigma > 0 and 0 < kappa <= sqrt 2 (got n={}, sigma={}, kappa={})",
                g.n, g.sigma, g.kappa
            )));
        }
        let s = &self.subspace;
        if s.p.is_empty() || s.p.iter().any(|&p| p == 0 || p > g.n) {
            return Err(Error::Config(format!("every p must lie in 1..={}, got {:?}", g.n, s.p)));
        }
        if s.block_size == 0 || !(s.tau >= 0.0) {
            return Err(Error::Config("block_size must be positive and tau nonnegative".into()));
        }
        self.design.validate().map_err(|e| Error::Config(e.to_string()))?;
        let sim = &self.simulation;
        if sim.mu.is_empty() || sim.mu.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::Config(format!("step sizes must be positive, got {:?}", sim.mu)));
        }
        if sim.iterations == Some(0) || sim.n_runs == 0 || sim.curve_stride == 0 || !(sim.iteration_horizon > 0.0) {
            return Err(Error::Config(
                "iterations, n_runs, curve_stride and iteration_horizon must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&sim.burn_in_fraction) {
            return Err(Error::Config(format!(
                "burn_in_fraction must lie in [0, 1), got {}",
                sim.burn_in_fraction
            )));
        }
        if sim.strategies.is_empty() {
            return Err(Error::Config("at least one strategy is required".into()));
        }
        Ok(())
    }

    pub fn monte_carlo(&self, mu: f64) -> MonteCarloConfig {
        MonteCarloConfig {
            mu,
            iterations: self.simulation.iterations_for(mu),
            n_runs: self.simulation.n_runs,
            burn_in_fraction: self.simulation.burn_in_fraction,
            seed: derive_seed(self.master_seed, tag::MONTE_CARLO),
        }
    }
}

/// Realized network and agent models for one master seed.
#[derive(Clone, Debug)]
pub struct Setup {
    pub topology: Topology,
    pub eigenbasis: LaplacianEigenbasis,
    pub mask: NeighborhoodMask,
    pub ensemble: AgentEnsemble,
}

pub fn build_setup(cfg: &ExperimentConfig) -> Result<Setup> {
    let g = &cfg.graph;
    let topology = generate_geometric(g.n, g.sigma, g.kappa, derive_seed(cfg.master_seed, tag::TOPOLOGY))?;
    let eigenbasis = laplacian_eigenbasis(&topology)?;
    let mask = match g.communication {
        Communication::Kernel => topology.mask(),
        Communication::Complete => NeighborhoodMask::complete(g.n),
        Communication::Isolated => NeighborhoodMask::isolated(g.n),
    };
    let ensemble = sample_agent_models(
        g.n,
        cfg.subspace.block_size,
        &eigenbasis,
        cfg.subspace.tau,
        derive_seed(cfg.master_seed, tag::ENSEMBLE),
    )?;
    Ok(Setup {
        topology,
        eigenbasis,
        mask,
        ensemble,
    })
}

impl Setup {
    pub fn subspace(&self, p: usize) -> Result<SubspaceBasis> {
        build_subspace(&self.eigenbasis, p, self.ensemble.block_size)
    }

    pub fn design(&self, basis: &SubspaceBasis, cfg: &DesignConfig) -> Result<CombinationMatrix> {
        douglas_rachford(basis, &self.mask, cfg)
    }

    /// U = I: every agent estimates its own w★_k.
    pub fn full_basis(&self) -> SubspaceBasis {
        let n = self.ensemble.n_agents;
        SubspaceBasis::from_graph_factor(DMatrix::identity(n, n), self.ensemble.block_size)
            .expect("identity is orthonormal")
    }
}

/// A strategy with everything needed to simulate it and predict its MSD.
#[derive(Clone, Debug)]
pub struct PreparedStrategy {
    pub label: String,
    pub kind: StrategyKind,
    /// Subspace rank; `None` for the non-cooperative baseline.
    pub p: Option<usize>,
    pub basis: SubspaceBasis,
    pub a: CombinationMatrix,
    pub w_o: DVector<f64>,
}

impl PreparedStrategy {
    pub fn spec(&self) -> StrategySpec {
        StrategySpec {
            label: self.label.clone(),
            update: match self.kind {
                StrategyKind::Centralized => Update::Project(Projection::new(&self.basis)),
                _ => Update::Combine(Combiner::new(&self.a)),
            },
            w_o: self.w_o.as_slice().to_vec(),
        }
    }

    pub fn theory(&self, ens: &AgentEnsemble, mu: f64) -> Result<TheorySummary> {
        predict(&self.basis, ens, &self.a.a, mu, DEFAULT_TAIL_TOL)
    }
}

/// Builds every configured strategy: one distributed and one centralized
/// entry per p, plus a single non-cooperative baseline.
pub fn prepare_strategies(cfg: &ExperimentConfig, setup: &Setup) -> Result<Vec<PreparedStrategy>> {
    let ens = &setup.ensemble;
    let kinds = &cfg.simulation.strategies;
    let mut out = Vec::new();
    for &p in &cfg.subspace.p {
        let basis = setup.subspace(p)?;
        let w_o = limit_point(&basis, ens)?;
        for &kind in kinds.iter().filter(|k| **k != StrategyKind::Noncooperative) {
            let a = match kind {
                StrategyKind::Distributed => setup.design(&basis, &cfg.design)?,
                _ => CombinationMatrix::projector(&basis),
            };
            out.push(PreparedStrategy {
                label: format!("{}_p{p}", kind.name()),
                kind,
                p: Some(p),
                basis: basis.clone(),
                a,
                w_o: w_o.clone(),
            });
        }
    }
    if kinds.contains(&StrategyKind::Noncooperative) {
        out.push(PreparedStrategy {
            label: StrategyKind::Noncooperative.name().to_string(),
            kind: StrategyKind::Noncooperative,
            p: None,
            basis: setup.full_basis(),
            a: CombinationMatrix::identity(ens.n_agents, ens.block_size),
            w_o: ens.w_star_vector(),
        });
    }
    Ok(out)
}

/// Steady-state measurement of one strategy at one step size, next to both
/// theoretical predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub strategy: StrategyKind,
    pub p: Option<usize>,
    pub mu: f64,
    pub iterations: usize,
    pub n_runs: usize,
    pub steady_state_db: f64,
    pub steady_state_wstar_db: f64,
    pub msd_closed_db: f64,
    pub msd_series_db: f64,
    #[serde(rename = "rho_B")]
    pub rho_b: f64,
    pub tail_bound: f64,
    pub n_terms: usize,
}

/// Curves and summary rows for one step size.
#[derive(Clone, Debug)]
pub struct StepSizeResult {
    pub mu: f64,
    pub curves: Vec<LearningCurve>,
    pub rows: Vec<SummaryRow>,
}

pub fn simulate_step_size(
    cfg: &ExperimentConfig,
    setup: &Setup,
    strategies: &[PreparedStrategy],
    mu: f64,
) -> Result<StepSizeResult> {
    let mc = cfg.monte_carlo(mu);
    let specs: Vec<StrategySpec> = strategies.iter().map(PreparedStrategy::spec).collect();
    let curves = run_monte_carlo(&setup.ensemble, &specs, &mc)?;
    let rows = strategies
        .iter()
        .zip(&curves)
        .map(|(s, curve)| {
            let theory = s.theory(&setup.ensemble, mu)?;
            Ok(SummaryRow {
                label: s.label.clone(),
                strategy: s.kind,
                p: s.p,
                mu,
                iterations: mc.iterations,
                n_runs: mc.n_runs,
                steady_state_db: curve.steady_state_db,
                steady_state_wstar_db: curve.steady_state_wstar_db,
                msd_closed_db: theory.msd_closed_db,
                msd_series_db: theory.msd_series_db,
                rho_b: theory.rho_b,
                tail_bound: theory.tail_bound,
                n_terms: theory.n_terms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StepSizeResult { mu, curves, rows })
}
