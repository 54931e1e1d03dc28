//! Random geometric networks, their kernel-weighted Laplacian and its
//! eigenbasis.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{serde_rows, sym_eigen_sorted};

/// Maximum number of placements tried before giving up on connectivity.
pub const MAX_CONNECTIVITY_ATTEMPTS: usize = 100;

/// Seed offset between successive placement attempts.
const RETRY_SEED_STRIDE: u64 = 1 << 20;

/// Weighted undirected network of agents placed in the unit square.
///
/// `weights` holds the kernel weight c_kℓ for k ≠ ℓ and zero on the
/// diagonal; every agent is treated as a member of its own neighborhood.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub n_nodes: usize,
    /// Node positions; empty for topologies built directly from weights.
    pub coords: Vec<[f64; 2]>,
    #[serde(with = "serde_rows")]
    pub weights: DMatrix<f64>,
    /// Connection radius κ.
    pub threshold: f64,
    /// Gaussian kernel width σ.
    pub kernel_width: f64,
}

/// Thresholded Gaussian kernel: exp(−d²/(2σ²)) if d ≤ κ, else 0.
pub fn kernel_weight(distance: f64, sigma: f64, kappa: f64) -> f64 {
    if distance <= kappa {
        (-distance * distance / (2.0 * sigma * sigma)).exp()
    } else {
        0.0
    }
}

/// Places `n` agents uniformly in [0,1]² and connects them with the
/// thresholded Gaussian kernel, resampling until the graph is connected.
///
/// Attempt `a` uses seed `seed + a·2²⁰`, so the result depends only on `seed`.
pub fn generate_geometric(n: usize, sigma: f64, kappa: f64, seed: u64) -> Result<Topology> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 nodes, got {n}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("kernel width must be positive, got {sigma}")));
    }
    if !(kappa > 0.0 && kappa <= std::f64::consts::SQRT_2) {
        return Err(Error::InvalidParameter(format!("threshold must lie in (0, sqrt 2], got {kappa}")));
    }
    for attempt in 0..MAX_CONNECTIVITY_ATTEMPTS {
        let attempt_seed = seed.wrapping_add(RETRY_SEED_STRIDE.wrapping_mul(attempt as u64));
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed);
        let coords: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let topo = Topology::from_coords(coords, sigma, kappa);
        if topo.is_connected() {
            return Ok(topo);
        }
    }
    Err(Error::Disconnected {
        attempts: MAX_CONNECTIVITY_ATTEMPTS,
        n,
        kappa,
    })
}

impl Topology {
    /// Builds the kernel-weighted graph for fixed node positions.
    pub fn from_coords(coords: Vec<[f64; 2]>, sigma: f64, kappa: f64) -> Self {
        let n = coords.len();
        let mut weights = DMatrix::zeros(n, n);
        for k in 0..n {
            for l in (k + 1)..n {
                let dx = coords[k][0] - coords[l][0];
                let dy = coords[k][1] - coords[l][1];
                let w = kernel_weight((dx * dx + dy * dy).sqrt(), sigma, kappa);
                weights[(k, l)] = w;
                weights[(l, k)] = w;
            }
        }
        Topology {
            n_nodes: n,
            coords,
            weights,
            threshold: kappa,
            kernel_width: sigma,
        }
    }

    /// Wraps an explicit symmetric weight matrix (diagonal is ignored).
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::DimensionMismatch {
                expected: "square weight matrix".into(),
                got: format!("{}x{}", weights.nrows(), weights.ncols()),
            });
        }
        let mut weights = weights;
        weights.fill_diagonal(0.0);
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be finite and nonnegative".into()));
        }
        let residual = crate::linalg::symmetry_residual(&weights);
        if residual > 1e-12 {
            return Err(Error::Asymmetric { residual });
        }
        Ok(Topology {
            n_nodes: weights.nrows(),
            coords: Vec::new(),
            weights,
            threshold: 0.0,
            kernel_width: 0.0,
        })
    }

    pub fn is_edge(&self, k: usize, l: usize) -> bool {
        k != l && self.weights[(k, l)] > 0.0
    }

    /// N_k, including k itself, in increasing order.
    pub fn neighborhood(&self, k: usize) -> Vec<usize> {
        (0..self.n_nodes).filter(|&l| l == k || self.is_edge(k, l)).collect()
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n_nodes;
        (0..n).map(|k| ((k + 1)..n).filter(|&l| self.is_edge(k, l)).count()).sum()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_nodes;
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut visited = 1;
        while let Some(k) = queue.pop_front() {
            for l in 0..n {
                if !seen[l] && self.is_edge(k, l) {
                    seen[l] = true;
                    visited += 1;
                    queue.push_back(l);
                }
            }
        }
        visited == n
    }

    /// L_c = diag(C·1) − C
    pub fn laplacian(&self) -> DMatrix<f64> {
        let degrees: DVector<f64> = self.weights.column_sum();
        DMatrix::from_diagonal(&degrees) - &self.weights
    }

    pub fn mask(&self) -> NeighborhoodMask {
        NeighborhoodMask::from_fn(self.n_nodes, |k, l| k == l || self.is_edge(k, l))
    }
}

/// N×N pattern of admissible combination blocks; the diagonal is always set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodMask {
    n: usize,
    allowed: Vec<bool>,
}

impl NeighborhoodMask {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut allowed = vec![false; n * n];
        for k in 0..n {
            for l in 0..n {
                allowed[k * n + l] = k == l || f(k, l);
            }
        }
        NeighborhoodMask { n, allowed }
    }

    /// Every pair may communicate.
    pub fn complete(n: usize) -> Self {
        Self::from_fn(n, |_, _| true)
    }

    /// No communication links; only self-blocks are admissible.
    pub fn isolated(n: usize) -> Self {
        Self::from_fn(n, |_, _| false)
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    /// Whether block (k, ℓ) may be nonzero, i.e. ℓ ∈ N_k or ℓ = k.
    #[inline]
    pub fn allows(&self, k: usize, l: usize) -> bool {
        self.allowed[k * self.n + l]
    }

    pub fn neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&l| self.allows(k, l))
    }
}

/// Eigendecomposition of the graph Laplacian with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct LaplacianEigenbasis {
    pub laplacian: DMatrix<f64>,
    /// Orthonormal columns v_1 … v_N.
    pub eigenvectors: DMatrix<f64>,
    pub eigenvalues: DVector<f64>,
}

impl LaplacianEigenbasis {
    pub fn n_nodes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// V e^{−τΛ} Vᵀ
    pub fn diffusion_kernel(&self, tau: f64) -> DMatrix<f64> {
        let decay = self.eigenvalues.map(|lambda| (-tau * lambda).exp());
        &self.eigenvectors * DMatrix::from_diagonal(&decay) * self.eigenvectors.transpose()
    }
}

/// Computes the Laplacian eigenbasis of a connected topology.
///
/// Eigenvector signs are fixed so that the first non-negligible entry is
/// positive; with a connected graph this makes v_1 = 1/√N · 1.
pub fn laplacian_eigenbasis(topo: &Topology) -> Result<LaplacianEigenbasis> {
    if !topo.is_connected() {
        return Err(Error::InvalidParameter("Laplacian eigenbasis requires a connected topology".into()));
    }
    let laplacian = topo.laplacian();
    let (eigenvalues, eigenvectors) = sym_eigen_sorted(&laplacian);
    Ok(LaplacianEigenbasis {
        laplacian,
        eigenvectors,
        eigenvalues,
    })
}
