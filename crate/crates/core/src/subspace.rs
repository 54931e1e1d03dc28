//! Constraint subspaces U = U_graph ⊗ I_L and the conditions a combination
//! matrix must meet to converge to their projector.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LaplacianEigenbasis, NeighborhoodMask};
use crate::linalg::{kron_identity, spectral_norm, symmetry_residual};

/// Default tolerance for declaring the equality conditions satisfied.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-6;

/// Semi-unitary basis of the constraint subspace and its projector.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    /// M×P matrix with orthonormal columns.
    pub u: DMatrix<f64>,
    pub n_agents: usize,
    pub block_size: usize,
    /// Number of graph-level basis vectors p (P = p·L).
    pub graph_rank: usize,
    /// U Uᵀ
    pub projector: DMatrix<f64>,
    /// N×p factor when U = U_graph ⊗ I_L.
    graph_factor: Option<DMatrix<f64>>,
}

/// U = [v_1 … v_p] ⊗ I_L from the leading Laplacian eigenvectors.
pub fn build_subspace(basis: &LaplacianEigenbasis, p: usize, block_size: usize) -> Result<SubspaceBasis> {
    let n = basis.n_nodes();
    if p == 0 || p > n {
        return Err(Error::InvalidParameter(format!("subspace rank p={p} must lie in 1..={n}")));
    }
    let graph_u = basis.eigenvectors.columns(0, p).into_owned();
    SubspaceBasis::from_graph_factor(graph_u, block_size)
}

impl SubspaceBasis {
    /// U = graph_u ⊗ I_L for an N×p matrix with orthonormal columns.
    pub fn from_graph_factor(graph_u: DMatrix<f64>, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidParameter("block size must be positive".into()));
        }
        let (n, p) = graph_u.shape();
        let u = kron_identity(&graph_u, block_size);
        let mut basis = Self::from_matrix(u, block_size)?;
        basis.n_agents = n;
        basis.graph_rank = p;
        basis.graph_factor = Some(graph_u);
        Ok(basis)
    }

    /// General semi-unitary M×P basis; M must be a multiple of the block size.
    pub fn from_matrix(u: DMatrix<f64>, block_size: usize) -> Result<Self> {
        let (m, cols) = u.shape();
        if block_size == 0 || m % block_size != 0 {
            return Err(Error::InvalidParameter(format!(
                "row count {m} is not a multiple of block size {block_size}"
            )));
        }
        if cols == 0 || cols > m {
            return Err(Error::InvalidParameter(format!("basis has {cols} columns for {m} rows")));
        }
        let gram_err = (u.transpose() * &u - DMatrix::identity(cols, cols)).norm();
        if gram_err > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "basis columns are not orthonormal (‖UᵀU − I‖_F = {gram_err:.3e})"
            )));
        }
        let projector = &u * u.transpose();
        Ok(SubspaceBasis {
            n_agents: m / block_size,
            block_size,
            graph_rank: cols.div_ceil(block_size),
            projector,
            u,
            graph_factor: None,
        })
    }

    /// M = N·L
    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// P
    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    pub fn graph_factor(&self) -> Option<&DMatrix<f64>> {
        self.graph_factor.as_ref()
    }

    /// The same subspace at block size 1, when U has Kronecker structure.
    pub fn graph_level(&self) -> Option<SubspaceBasis> {
        self.graph_factor
            .as_ref()
            .map(|g| SubspaceBasis::from_graph_factor(g.clone(), 1).expect("graph factor already validated"))
    }

    /// Uᵀ x
    pub fn coordinates(&self, x: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        self.u.tr_mul(x)
    }
}

/// Residuals of the conditions AU = U, UᵀA = Uᵀ, A = Aᵀ, ρ(A − P_U) ≤ 1 − ε
/// and the block-sparsity pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// ‖AU − U‖_F
    pub right_eig_residual: f64,
    /// ‖UᵀA − Uᵀ‖_F
    pub left_eig_residual: f64,
    /// ‖A − Aᵀ‖_F
    pub symmetry_residual: f64,
    /// ρ(A − P_U), measured by the spectral norm for asymmetric input.
    pub contraction: f64,
    /// Entrywise ℓ₁ mass of blocks outside the neighborhoods.
    pub sparsity_violation: f64,
    pub eps: f64,
    pub tol: f64,
    pub feasible: bool,
}

pub fn check_conditions(
    a: &DMatrix<f64>,
    basis: &SubspaceBasis,
    mask: &NeighborhoodMask,
    eps: f64,
) -> Result<FeasibilityReport> {
    check_conditions_with_tol(a, basis, mask, eps, DEFAULT_FEASIBILITY_TOL)
}

pub fn check_conditions_with_tol(
    a: &DMatrix<f64>,
    basis: &SubspaceBasis,
    mask: &NeighborhoodMask,
    eps: f64,
    tol: f64,
) -> Result<FeasibilityReport> {
    let m = basis.dim();
    if a.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            expected: format!("{m}x{m}"),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    if mask.n_agents() != basis.n_agents {
        return Err(Error::DimensionMismatch {
            expected: format!("mask over {} agents", basis.n_agents),
            got: format!("mask over {} agents", mask.n_agents()),
        });
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")));
    }
    let u = &basis.u;
    let right = (a * u - u).norm();
    let left = (u.transpose() * a - u.transpose()).norm();
    let sym = symmetry_residual(a);
    let contraction = spectral_norm(&(a - basis.projector()));
    let sparsity = off_mask_l1(a, mask, basis.block_size);
    let feasible = right <= tol
        && left <= tol
        && sym <= tol
        && sparsity <= tol
        && contraction <= 1.0 - eps + tol;
    Ok(FeasibilityReport {
        right_eig_residual: right,
        left_eig_residual: left,
        symmetry_residual: sym,
        contraction,
        sparsity_violation: sparsity,
        eps,
        tol,
        feasible,
    })
}

/// Σ_{k} Σ_{ℓ∉N_k, ℓ≠k} |||A_kℓ|||₁
pub fn off_mask_l1(a: &DMatrix<f64>, mask: &NeighborhoodMask, block_size: usize) -> f64 {
    let n = mask.n_agents();
    let mut total = 0.0;
    for k in 0..n {
        for l in 0..n {
            if mask.allows(k, l) {
                continue;
            }
            total += a.view((k * block_size, l * block_size), (block_size, block_size)).abs().sum();
        }
    }
    total
}

/// Decay of ‖Aⁱ − P_U‖₂ over successive powers.
#[derive(Clone, Debug)]
pub struct PowerConvergence {
    /// `norms[i - 1]` = ‖Aⁱ − P_U‖₂ for i = 1..=iterations.
    pub norms: Vec<f64>,
    /// ρ(A − P_U)
    pub rate: f64,
    /// ‖A − P_U‖₂
    pub constant: f64,
}

impl PowerConvergence {
    /// Spectral bound rateⁱ⁻¹ · constant on ‖Aⁱ − P_U‖₂.
    pub fn bound(&self, i: usize) -> f64 {
        self.rate.powi(i.saturating_sub(1) as i32) * self.constant
    }
}

/// Tracks ‖Aⁱ − P_U‖₂ by repeated multiplication.
pub fn power_convergence(a: &DMatrix<f64>, basis: &SubspaceBasis, iterations: usize) -> Result<PowerConvergence> {
    let m = basis.dim();
    if a.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            expected: format!("{m}x{m}"),
            got: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    let p = basis.projector();
    let deviation = a - p;
    let constant = spectral_norm(&deviation);
    let rate = if symmetry_residual(&deviation) <= crate::linalg::SYMMETRY_TOL {
        crate::linalg::sym_spectral_radius(&deviation)
    } else {
        constant
    };
    let mut norms = Vec::with_capacity(iterations);
    let mut power = a.clone();
    for i in 1..=iterations {
        if i > 1 {
            power = &power * a;
        }
        norms.push(spectral_norm(&(&power - p)));
    }
    Ok(PowerConvergence { norms, rate, constant })
}
