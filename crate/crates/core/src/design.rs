//! Sparse combination-matrix design by Douglas-Rachford splitting.
//!
//! The design problem is
//!
//! ```text
//! minimize   Σ_k Σ_{ℓ∉N_k} |||A_kℓ|||₁ + (γ/2)‖A‖²_F
//! subject to A U = U,  A = Aᵀ,  ‖A − P_U‖₂ ≤ 1 − ε
//! ```
//!
//! The objective has a closed-form proximal operator (block-wise soft
//! thresholding) and the constraint set Ω = Ω₁ ∩ Ω₂ is projected onto by
//! composing the projection onto the affine set Ω₁ = {AU = U, A = Aᵀ} with the
//! eigenvalue clipping that projects onto the ball Ω₂ = {‖A − P_U‖₂ ≤ 1 − ε}.
//! The clipping keeps eigenvectors, so its output stays in Ω₁ and the
//! composition is the exact projection onto the intersection.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NeighborhoodMask;
use crate::linalg::{kron_identity, symmetrize, symmetry_residual};
use crate::subspace::{check_conditions, off_mask_l1, FeasibilityReport, SubspaceBasis};

/// Symmetry tolerance accepted by [`project_omega2`].
const OMEGA2_SYMMETRY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignConfig {
    /// Douglas-Rachford step η.
    pub eta: f64,
    /// Frobenius regularization weight γ.
    pub reg_gamma: f64,
    /// Contraction margin ε: the design enforces ρ(A − P_U) ≤ 1 − ε.
    pub eps: f64,
    pub max_iters: usize,
    pub stop_tol: f64,
    /// Emit the minimizer even when it needs links outside the topology.
    pub allow_added_edges: bool,
    /// Try to polish the iterate into an exactly sparse feasible matrix every
    /// this many iterations (0 disables the periodic attempts).
    pub polish_every: usize,
    /// Alternating-projection budget of one polishing attempt.
    pub polish_iters: usize,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            eta: 0.003,
            reg_gamma: 0.0,
            eps: 0.01,
            max_iters: 50_000,
            stop_tol: 1e-7,
            allow_added_edges: false,
            polish_every: 1000,
            polish_iters: 300,
        }
    }
}

impl DesignConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.reg_gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("reg_gamma must be >= 0, got {}", self.reg_gamma)));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {}", self.eps)));
        }
        if !(self.stop_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("stop_tol must be positive, got {}", self.stop_tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// A designed (or prescribed) combination matrix together with its
/// feasibility certificate.
#[derive(Clone, Debug)]
pub struct CombinationMatrix {
    /// M×M symmetric matrix.
    pub a: DMatrix<f64>,
    /// N×N factor when `a = graph_matrix ⊗ I_L`.
    pub graph_matrix: Option<DMatrix<f64>>,
    /// Neighborhoods of the communication topology.
    pub mask: NeighborhoodMask,
    /// Agent pairs whose blocks may be nonzero: the topology plus any links
    /// the design had to add.
    pub support: NeighborhoodMask,
    pub block_size: usize,
    pub eps: f64,
    pub certificate: FeasibilityReport,
    /// f(A_i) per Douglas-Rachford iteration; empty for prescribed matrices.
    pub objective_trace: Vec<f64>,
}

impl CombinationMatrix {
    /// Wraps an externally supplied matrix and certifies it.
    pub fn certify(
        a: DMatrix<f64>,
        basis: &SubspaceBasis,
        mask: NeighborhoodMask,
        eps: f64,
    ) -> Result<Self> {
        let certificate = check_conditions(&a, basis, &mask, eps)?;
        Ok(CombinationMatrix {
            a,
            graph_matrix: None,
            support: mask.clone(),
            mask,
            block_size: basis.block_size,
            eps,
            certificate,
            objective_trace: Vec::new(),
        })
    }

    /// A = P_U over a fully connected network (centralized projection).
    pub fn projector(basis: &SubspaceBasis) -> Self {
        let mask = NeighborhoodMask::complete(basis.n_agents);
        let graph_matrix = basis.graph_factor().map(|g| g * g.transpose());
        let mut out = Self::certify(basis.projector().clone(), basis, mask, 1.0)
            .expect("projector dimensions match its basis");
        out.graph_matrix = graph_matrix;
        out
    }

    /// A = I_M with no links (non-cooperative agents).
    pub fn identity(n_agents: usize, block_size: usize) -> Self {
        let m = n_agents * block_size;
        let certificate = FeasibilityReport {
            right_eig_residual: 0.0,
            left_eig_residual: 0.0,
            symmetry_residual: 0.0,
            contraction: 0.0,
            sparsity_violation: 0.0,
            eps: 1.0,
            tol: crate::subspace::DEFAULT_FEASIBILITY_TOL,
            feasible: true,
        };
        CombinationMatrix {
            a: DMatrix::identity(m, m),
            graph_matrix: Some(DMatrix::identity(n_agents, n_agents)),
            mask: NeighborhoodMask::isolated(n_agents),
            support: NeighborhoodMask::isolated(n_agents),
            block_size,
            eps: 1.0,
            certificate,
            objective_trace: Vec::new(),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.mask.n_agents()
    }

    /// Off-neighborhood pairs (k < ℓ) whose block carries more than `tol` ℓ₁ mass.
    pub fn added_edges(&self, tol: f64) -> Vec<(usize, usize)> {
        let n = self.n_agents();
        let l = self.block_size;
        let mut out = Vec::new();
        for k in 0..n {
            for j in (k + 1)..n {
                if self.mask.allows(k, j) {
                    continue;
                }
                let mass = self.a.view((k * l, j * l), (l, l)).abs().sum();
                if mass > tol {
                    out.push((k, j));
                }
            }
        }
        out
    }
}

/// f(A) = Σ_k Σ_{ℓ∉N_k} |||A_kℓ|||₁ + (γ/2)‖A‖²_F
pub fn objective_f(a: &DMatrix<f64>, mask: &NeighborhoodMask, block_size: usize, reg_gamma: f64) -> f64 {
    let sparsity = off_mask_l1(a, mask, block_size);
    if reg_gamma == 0.0 {
        sparsity
    } else {
        sparsity + 0.5 * reg_gamma * a.norm_squared()
    }
}

#[inline]
fn soft_threshold(x: f64, t: f64) -> f64 {
    if x >= t {
        x - t
    } else if x <= -t {
        x + t
    } else {
        0.0
    }
}

/// Proximal operator of η·f: soft-threshold the off-neighborhood entries at η,
/// then scale everything by 1/(1 + ηγ).
pub fn prox_f(
    c: &DMatrix<f64>,
    eta: f64,
    reg_gamma: f64,
    mask: &NeighborhoodMask,
    block_size: usize,
) -> DMatrix<f64> {
    let scale = 1.0 / (1.0 + eta * reg_gamma);
    DMatrix::from_fn(c.nrows(), c.ncols(), |i, j| {
        let v = c[(i, j)];
        if mask.allows(i / block_size, j / block_size) {
            scale * v
        } else {
            scale * soft_threshold(v, eta)
        }
    })
}

/// Π_Ω₁(D) = (I − P_U)·((D + Dᵀ)/2)·(I − P_U) + P_U
pub fn project_omega1(d: &DMatrix<f64>, p_u: &DMatrix<f64>) -> DMatrix<f64> {
    let s = symmetrize(d);
    let t = &s - p_u * &s;
    let deflated = &t - &t * p_u;
    symmetrize(&deflated) + p_u
}

/// Π_Ω₂(C) for symmetric C: clip the eigenvalues of C − P_U to [−1+ε, 1−ε].
pub fn project_omega2(c: &DMatrix<f64>, p_u: &DMatrix<f64>, eps: f64) -> Result<DMatrix<f64>> {
    let residual = symmetry_residual(c);
    if residual > OMEGA2_SYMMETRY_TOL * c.norm().max(1.0) {
        return Err(Error::Asymmetric { residual });
    }
    let radius = 1.0 - eps;
    let eig = SymmetricEigen::new(symmetrize(&(c - p_u)));
    if eig.eigenvalues.iter().all(|l| l.abs() <= radius) {
        return Ok(c.clone());
    }
    let clipped = eig.eigenvalues.map(|l| l.clamp(-radius, radius));
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, beta) in clipped.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*beta);
    }
    Ok(symmetrize(&(scaled * v.transpose())) + p_u)
}

/// Π_Ω = Π_Ω₂ ∘ Π_Ω₁
pub fn project_omega(d: &DMatrix<f64>, p_u: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    let affine = project_omega1(d, p_u);
    project_omega2(&affine, p_u, eps).expect("Ω₁ projection is symmetric")
}

/// Frobenius projection onto the affine set of symmetric matrices that are
/// supported on the mask and satisfy AU = U.
///
/// The free entries are the upper-triangular entries of allowed blocks; the
/// constraint AU = U is linear in them, so the projection is a weighted
/// least-norm correction computed once through a pseudo-inverse.
#[derive(Clone, Debug)]
pub struct SparseAffineProjection {
    dim: usize,
    /// (row, col) with row ≤ col for every free entry.
    entries: Vec<(usize, usize)>,
    /// Constraint matrix C of C·x = b.
    c: DMatrix<f64>,
    b: DVector<f64>,
    /// W⁻¹Cᵀ(CW⁻¹Cᵀ)⁺
    correction: DMatrix<f64>,
}

impl SparseAffineProjection {
    pub fn new(basis: &SubspaceBasis, mask: &NeighborhoodMask) -> Self {
        let m = basis.dim();
        let l = basis.block_size;
        let u = &basis.u;
        let p = u.ncols();
        let entries: Vec<(usize, usize)> = (0..m)
            .flat_map(|i| (i..m).map(move |j| (i, j)))
            .filter(|&(i, j)| mask.allows(i / l, j / l))
            .collect();
        // Row (r, c) of C·x = b reads Σ_j a_rj U_jc = U_rc.
        let mut c = DMatrix::zeros(m * p, entries.len());
        for (v, &(i, j)) in entries.iter().enumerate() {
            for col in 0..p {
                c[(i * p + col, v)] += u[(j, col)];
                if i != j {
                    c[(j * p + col, v)] += u[(i, col)];
                }
            }
        }
        let b = DVector::from_fn(m * p, |r, _| u[(r / p, r % p)]);
        // Off-diagonal entries appear twice in ‖A − D‖²_F.
        let w_inv = DVector::from_fn(entries.len(), |v, _| if entries[v].0 == entries[v].1 { 1.0 } else { 0.5 });
        let mut scaled_ct = c.transpose();
        for (v, mut row) in scaled_ct.row_iter_mut().enumerate() {
            row *= w_inv[v];
        }
        let gram = &c * &scaled_ct;
        let correction = scaled_ct * pseudo_inverse_psd(&gram);
        SparseAffineProjection {
            dim: m,
            entries,
            c,
            b,
            correction,
        }
    }

    pub fn project(&self, d: &DMatrix<f64>) -> DMatrix<f64> {
        let x = DVector::from_iterator(
            self.entries.len(),
            self.entries.iter().map(|&(i, j)| 0.5 * (d[(i, j)] + d[(j, i)])),
        );
        let x = &x - &self.correction * (&self.c * &x - &self.b);
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (&(i, j), v) in self.entries.iter().zip(x.iter()) {
            out[(i, j)] = *v;
            out[(j, i)] = *v;
        }
        out
    }
}

fn pseudo_inverse_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let cutoff = 1e-10 * eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let inv = eig.eigenvalues.map(|l| if l > cutoff { 1.0 / l } else { 0.0 });
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, s) in inv.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*s);
    }
    scaled * v.transpose()
}

/// Radius reduction used while polishing so that the affine iterate lands
/// strictly inside the contraction ball after finitely many steps.
const POLISH_MARGIN: f64 = 1e-6;

/// Alternates between the sparse affine set and the contraction ball,
/// starting from `a`. Returns a matrix that is supported on the mask, lies in
/// Ω₁ and has ρ(A − P_U) ≤ 1 − ε, or `None` if the budget runs out.
pub fn polish(
    a: &DMatrix<f64>,
    affine: &SparseAffineProjection,
    p_u: &DMatrix<f64>,
    eps: f64,
    iters: usize,
) -> Option<DMatrix<f64>> {
    let radius = 1.0 - eps;
    let inner_eps = (eps + POLISH_MARGIN).min(1.0);
    let mut current = a.clone();
    for _ in 0..iters {
        let x = affine.project(&current);
        let eig = SymmetricEigen::new(&x - p_u);
        let omega1_ok = (&x * p_u - p_u).norm() <= 1e-9 * p_u.norm().max(1.0);
        if !omega1_ok {
            return None;
        }
        if eig.eigenvalues.amax() <= radius {
            return Some(x);
        }
        current = project_omega2(&x, p_u, inner_eps).ok()?;
    }
    None
}

struct DrOutcome {
    a: DMatrix<f64>,
    support: NeighborhoodMask,
    trace: Vec<f64>,
}

/// Pairs allowed by `mask` plus every pair whose block of `a` has an entry
/// larger than `threshold` in magnitude.
fn support_of(a: &DMatrix<f64>, mask: &NeighborhoodMask, block_size: usize, threshold: f64) -> NeighborhoodMask {
    let l = block_size;
    let used = |k: usize, j: usize| a.view((k * l, j * l), (l, l)).iter().any(|v| v.abs() > threshold);
    NeighborhoodMask::from_fn(mask.n_agents(), |k, j| mask.allows(k, j) || used(k, j) || used(j, k))
}

/// Relative magnitudes at which off-neighborhood entries of the snapped
/// matrix are turned into added links, tried from the sparsest support.
const ADDED_LINK_THRESHOLDS: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Turns a Douglas-Rachford iterate into the emitted matrix: snap onto Ω,
/// then try to remove the residual off-neighborhood mass by polishing. With
/// `allow_added_edges`, links used by the iterate are added to the support
/// when the topology alone is not enough.
fn settle(
    a: &DMatrix<f64>,
    basis: &SubspaceBasis,
    mask: &NeighborhoodMask,
    affine: &SparseAffineProjection,
    cfg: &DesignConfig,
) -> (DMatrix<f64>, NeighborhoodMask) {
    let p_u = basis.projector();
    let l = basis.block_size;
    let snapped = project_omega(a, p_u, cfg.eps);
    if off_mask_l1(&snapped, mask, l) == 0.0 {
        return (snapped, mask.clone());
    }
    if let Some(sparse) = polish(&snapped, affine, p_u, cfg.eps, cfg.polish_iters) {
        return (sparse, mask.clone());
    }
    if cfg.allow_added_edges {
        let off_max = (0..snapped.nrows())
            .flat_map(|i| (0..snapped.ncols()).map(move |j| (i, j)))
            .filter(|&(i, j)| !mask.allows(i / l, j / l))
            .map(|(i, j)| snapped[(i, j)].abs())
            .fold(0.0, f64::max);
        let candidates = std::iter::once(support_of(a, mask, l, 0.0))
            .chain(ADDED_LINK_THRESHOLDS.iter().map(|t| support_of(&snapped, mask, l, t * off_max)));
        for support in candidates {
            let widened = SparseAffineProjection::new(basis, &support);
            if let Some(sparse) = polish(&snapped, &widened, p_u, cfg.eps, 10 * cfg.polish_iters) {
                return (sparse, support);
            }
        }
        let support = support_of(&snapped, mask, l, 0.0);
        return (snapped, support);
    }
    (snapped, mask.clone())
}

/// Douglas-Rachford iteration at the resolution of `basis` (no Kronecker
/// reduction).
fn run_douglas_rachford(basis: &SubspaceBasis, mask: &NeighborhoodMask, cfg: &DesignConfig) -> Result<DrOutcome> {
    cfg.validate()?;
    if mask.n_agents() != basis.n_agents {
        return Err(Error::DimensionMismatch {
            expected: format!("mask over {} agents", basis.n_agents),
            got: format!("mask over {} agents", mask.n_agents()),
        });
    }
    let p_u = basis.projector();
    let l = basis.block_size;
    let affine = SparseAffineProjection::new(basis, mask);
    let mut c = p_u.clone();
    let mut prev: Option<DMatrix<f64>> = None;
    let mut trace = Vec::new();
    let mut step_residual = f64::INFINITY;
    let mut omega_residual = f64::INFINITY;

    for iter in 0..cfg.max_iters {
        let a = prox_f(&c, cfg.eta, cfg.reg_gamma, mask, l);
        let reflected = &a * 2.0 - &c;
        let z = project_omega(&reflected, p_u, cfg.eps);
        trace.push(objective_f(&a, mask, l, cfg.reg_gamma));

        // z ∈ Ω, so ‖z − A‖ bounds the distance of A to Ω.
        omega_residual = (&z - &a).norm();
        if let Some(prev) = &prev {
            step_residual = (&a - prev).norm();
        }
        c += &z - &a;

        if step_residual <= cfg.stop_tol * a.norm().max(1.0) && omega_residual <= cfg.stop_tol {
            let (a, support) = settle(&a, basis, mask, &affine, cfg);
            return Ok(DrOutcome { a, support, trace });
        }
        // With γ = 0 a feasible matrix without off-neighborhood mass attains
        // the minimum f = 0, so the iteration can stop there.
        if cfg.reg_gamma == 0.0 && cfg.polish_every > 0 && (iter + 1) % cfg.polish_every == 0 {
            if let Some(sparse) = polish(&project_omega(&a, p_u, cfg.eps), &affine, p_u, cfg.eps, cfg.polish_iters) {
                trace.push(objective_f(&sparse, mask, l, cfg.reg_gamma));
                return Ok(DrOutcome {
                    a: sparse,
                    support: mask.clone(),
                    trace,
                });
            }
        }
        if iter + 1 == cfg.max_iters && cfg.allow_added_edges {
            let (a, support) = settle(&a, basis, mask, &affine, cfg);
            return Ok(DrOutcome { a, support, trace });
        }
        prev = Some(a);
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iters,
        step_residual,
        omega_residual,
    })
}

fn finish(
    a: DMatrix<f64>,
    support: NeighborhoodMask,
    graph_matrix: Option<DMatrix<f64>>,
    trace: Vec<f64>,
    basis: &SubspaceBasis,
    mask: &NeighborhoodMask,
    cfg: &DesignConfig,
) -> Result<CombinationMatrix> {
    let certificate = check_conditions(&a, basis, mask, cfg.eps)?;
    if !certificate.feasible && !cfg.allow_added_edges {
        return Err(Error::Infeasible {
            report: Box::new(certificate),
        });
    }
    Ok(CombinationMatrix {
        a,
        graph_matrix,
        mask: mask.clone(),
        support,
        block_size: basis.block_size,
        eps: cfg.eps,
        certificate,
        objective_trace: trace,
    })
}

/// Designs A directly on the M×M matrix space.
pub fn douglas_rachford_dense(
    basis: &SubspaceBasis,
    mask: &NeighborhoodMask,
    cfg: &DesignConfig,
) -> Result<CombinationMatrix> {
    let out = run_douglas_rachford(basis, mask, cfg)?;
    let graph = (basis.block_size == 1).then(|| out.a.clone());
    finish(out.a, out.support, graph, out.trace, basis, mask, cfg)
}

/// Designs the combination matrix for `basis` under the neighborhood `mask`.
///
/// When U = U_graph ⊗ I_L the problem is solved for the N×N matrix A and
/// lifted to A ⊗ I_L, which keeps the cost of each eigendecomposition at N³.
/// The lifted matrix meets every constraint of the M×M problem and its
/// objective is L times the N×N objective.
pub fn douglas_rachford(
    basis: &SubspaceBasis,
    mask: &NeighborhoodMask,
    cfg: &DesignConfig,
) -> Result<CombinationMatrix> {
    let graph_basis = match basis.graph_level() {
        Some(g) if basis.block_size > 1 => g,
        _ => return douglas_rachford_dense(basis, mask, cfg),
    };
    let out = run_douglas_rachford(&graph_basis, mask, cfg)?;
    let l = basis.block_size as f64;
    let lifted = kron_identity(&out.a, basis.block_size);
    let trace = out.trace.into_iter().map(|f| f * l).collect();
    finish(lifted, out.support, Some(out.a), trace, basis, mask, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_pair_disconnected() -> NeighborhoodMask {
        // two agents, no link
        NeighborhoodMask::isolated(2)
    }

    #[test]
    fn objective_examples() {
        let mask = NeighborhoodMask::isolated(2);
        assert_eq!(objective_f(&DMatrix::zeros(4, 4), &mask, 2, 0.0), 0.0);
        assert_eq!(objective_f(&DMatrix::identity(4, 4), &mask, 2, 0.0), 0.0);
        let mut a = DMatrix::zeros(4, 4);
        a[(0, 2)] = 0.5;
        a[(0, 3)] = -0.25;
        assert!((objective_f(&a, &mask, 2, 0.0) - 0.75).abs() < 1e-15);
        assert!((objective_f(&a, &mask, 2, 2.0) - (0.75 + 0.3125)).abs() < 1e-15);
    }

    #[test]
    fn prox_examples() {
        let mask = mask_pair_disconnected();
        let c = DMatrix::from_row_slice(2, 2, &[0.7, 0.005, -0.002, 1.0]);
        let out = prox_f(&c, 0.003, 0.0, &mask, 1);
        assert_eq!(out[(0, 0)], 0.7);
        assert!((out[(0, 1)] - 0.002).abs() < 1e-15);
        assert_eq!(out[(1, 0)], 0.0);
        let out = prox_f(&c, 0.5, 2.0, &mask, 1);
        assert!((out[(1, 1)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn omega2_clips_single_direction() {
        // U = e1 in R^3; v = e2 is orthogonal to range(U).
        let mut p = DMatrix::zeros(3, 3);
        p[(0, 0)] = 1.0;
        let mut vvt = DMatrix::zeros(3, 3);
        vvt[(1, 1)] = 1.0;
        let out = project_omega2(&(&p + &vvt * 2.0), &p, 0.01).unwrap();
        assert!((out - (&p + &vvt * 0.99)).norm() < 1e-12);
        let out = project_omega2(&(&p - &vvt * 3.0), &p, 0.25).unwrap();
        assert!((out - (&p - &vvt * 0.75)).norm() < 1e-12);
    }

    #[test]
    fn omega2_rejects_asymmetric() {
        let p = DMatrix::zeros(2, 2);
        let c = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(project_omega2(&c, &p, 0.1), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(DesignConfig::default().validate().is_ok());
        let bad = DesignConfig { eta: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = DesignConfig { eps: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = DesignConfig { reg_gamma: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
