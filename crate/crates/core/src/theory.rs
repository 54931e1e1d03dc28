//! Steady-state mean-square-deviation predictions for MSE networks.
//!
//! For the real-data case the limit point, Hessian and gradient-noise
//! covariances are available in closed form, which gives two predictions of
//! the network MSD relative to W°:
//!
//! * the first-order closed form (μ/2N)·Tr((UᵀH°U)⁻¹ UᵀSU), which does not
//!   depend on the combination matrix, and
//! * the series (1/N)·Σ_n Tr(Bⁿ Y (Bᵀ)ⁿ) with B = A(I − μH°) and
//!   Y = μ² A S Aᵀ, which does.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::datagen::AgentEnsemble;
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::subspace::SubspaceBasis;

/// dB value reported for a zero MSD; smaller values are clamped to it.
pub const DB_FLOOR: f64 = -300.0;
/// Default relative-increment threshold for the series.
pub const DEFAULT_TAIL_TOL: f64 = 1e-9;
/// The series is never summed beyond this many terms.
pub const MAX_SERIES_TERMS: usize = 1 << 20;

pub fn to_db(linear: f64) -> f64 {
    if linear > 0.0 {
        (10.0 * linear.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// H = diag{σ²_u,k I_L}; for MSE costs the Hessian is the same everywhere.
pub fn hessian(ens: &AgentEnsemble) -> DMatrix<f64> {
    let l = ens.block_size;
    DMatrix::from_diagonal(&DVector::from_fn(ens.dim(), |i, _| ens.sigma2_u[i / l]))
}

fn check_dims(basis: &SubspaceBasis, ens: &AgentEnsemble) -> Result<()> {
    if basis.dim() != ens.dim() || basis.block_size != ens.block_size {
        return Err(Error::DimensionMismatch {
            expected: format!("basis of dimension {} with blocks of {}", ens.dim(), ens.block_size),
            got: format!("basis of dimension {} with blocks of {}", basis.dim(), basis.block_size),
        });
    }
    Ok(())
}

/// W° = U (UᵀHU)⁻¹ UᵀH W★, the minimizer of Σ_k J_k over range(U).
pub fn limit_point(basis: &SubspaceBasis, ens: &AgentEnsemble) -> Result<DVector<f64>> {
    check_dims(basis, ens)?;
    let h = hessian(ens);
    let hu = &h * &basis.u;
    let reduced = basis.u.transpose() * &hu;
    let chol = reduced
        .cholesky()
        .ok_or_else(|| Error::Singular("UᵀHU is not positive definite".into()))?;
    let rhs = hu.transpose() * ens.w_star_vector();
    Ok(&basis.u * chol.solve(&rhs))
}

/// R°_k = R_u W_k R_u + R_u Tr(R_u W_k) + σ²_v,k R_u with
/// W_k = (w★_k − w°_k)(w★_k − w°_k)ᵀ and R_u = σ²_u,k I_L.
pub fn noise_covariance(ens: &AgentEnsemble, k: usize, w_o: &DVector<f64>) -> DMatrix<f64> {
    let l = ens.block_size;
    let su = ens.sigma2_u[k];
    let delta = DVector::from_fn(l, |d, _| ens.w_star[k * l + d] - w_o[k * l + d]);
    let outer = &delta * delta.transpose();
    let trace_term = su * su * delta.norm_squared();
    let mut r = outer * (su * su);
    for d in 0..l {
        r[(d, d)] += trace_term + ens.sigma2_v[k] * su;
    }
    r
}

/// MSD = (μ / 2N)·Tr((UᵀH°U)⁻¹ UᵀSU), in dB.
pub fn msd_closed_form(basis: &SubspaceBasis, h_o: &DMatrix<f64>, s: &DMatrix<f64>, mu: f64, n: usize) -> Result<f64> {
    Ok(to_db(msd_closed_form_linear(basis, h_o, s, mu, n)?))
}

pub fn msd_closed_form_linear(
    basis: &SubspaceBasis,
    h_o: &DMatrix<f64>,
    s: &DMatrix<f64>,
    mu: f64,
    n: usize,
) -> Result<f64> {
    let u = &basis.u;
    let reduced_h = u.transpose() * h_o * u;
    let reduced_s = u.transpose() * s * u;
    let chol = reduced_h
        .cholesky()
        .ok_or_else(|| Error::Singular("UᵀH°U is not positive definite".into()))?;
    Ok(mu / (2.0 * n as f64) * chol.solve(&reduced_s).trace())
}

/// ρ(B), measured by the largest singular value when B is not symmetric.
pub fn stability_margin(b: &DMatrix<f64>) -> f64 {
    spectral_norm(b)
}

/// Outcome of the series evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesMsd {
    pub db: f64,
    pub linear: f64,
    /// Number of series terms summed.
    pub n_terms: usize,
    /// Upper bound on the omitted tail, in the same (linear, per-agent) units.
    pub tail_bound: f64,
    pub rho_b: f64,
    /// Partial sums (1/N)·Σ_{n<2^j} Tr(BⁿY(Bᵀ)ⁿ), j = 0, 1, …
    pub partial_sums: Vec<f64>,
}

/// (1/N)·Σ_n Tr(Bⁿ Y (Bᵀ)ⁿ) with B = A(I − μH°) and Y = μ² A S Aᵀ.
///
/// Terms are accumulated in doubling blocks, S_{2n} = S_n + Bⁿ S_n (Bⁿ)ᵀ,
/// until a block adds at most `tail_tol` relative to the running sum or
/// [`MAX_SERIES_TERMS`] terms are reached. The remaining tail is bounded by
/// Tr(S_n)·q/(1 − q) with q = ‖Bⁿ‖₂².
pub fn msd_series(
    a: &DMatrix<f64>,
    h_o: &DMatrix<f64>,
    s: &DMatrix<f64>,
    mu: f64,
    n: usize,
    tail_tol: f64,
) -> Result<SeriesMsd> {
    let m = a.nrows();
    if a.shape() != h_o.shape() || a.shape() != s.shape() || !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: format!("three {m}x{m} matrices"),
            got: format!("{:?}, {:?}, {:?}", a.shape(), h_o.shape(), s.shape()),
        });
    }
    let b = a * (DMatrix::identity(m, m) - h_o * mu);
    let rho_b = stability_margin(&b);
    if rho_b >= 1.0 {
        return Err(Error::Unstable { rho: rho_b });
    }
    let y = a * s * a.transpose() * (mu * mu);
    let scale = 1.0 / n as f64;

    let mut sum = y;
    let mut total = sum.trace();
    let mut partial_sums = vec![total * scale];
    if total <= 0.0 {
        return Ok(SeriesMsd {
            db: DB_FLOOR,
            linear: 0.0,
            n_terms: 1,
            tail_bound: 0.0,
            rho_b,
            partial_sums,
        });
    }
    let mut power = b;
    let mut n_terms = 1usize;
    while n_terms < MAX_SERIES_TERMS {
        let block = &power * &sum * power.transpose();
        let increment = block.trace();
        sum += block;
        total += increment;
        n_terms *= 2;
        power = &power * &power;
        partial_sums.push(total * scale);
        if increment <= tail_tol * total {
            break;
        }
    }
    let q = spectral_norm(&power).powi(2);
    let tail_bound = if q < 1.0 { total * q / (1.0 - q) * scale } else { f64::INFINITY };
    let linear = total * scale;
    Ok(SeriesMsd {
        db: to_db(linear),
        linear,
        n_terms,
        tail_bound,
        rho_b,
        partial_sums,
    })
}

/// Everything needed to predict the steady-state MSD of one strategy.
#[derive(Clone, Debug)]
pub struct TheoryContext {
    /// H° = diag{R_u,k}
    pub h_o: DMatrix<f64>,
    pub w_o: DVector<f64>,
    /// R°_k for each agent.
    pub noise_cov: Vec<DMatrix<f64>>,
    /// S = diag{R°_1, …, R°_N}
    pub s: DMatrix<f64>,
    /// B = A(I − μH°)
    pub b: DMatrix<f64>,
    /// Y = μ² A S Aᵀ
    pub y: DMatrix<f64>,
    /// col{∇J_k(w°_k)} = H°(W° − W★)
    pub bias: DVector<f64>,
    pub mu: f64,
    pub rho_b: f64,
    /// ρ(B) < 1
    pub stable: bool,
}

impl TheoryContext {
    pub fn new(basis: &SubspaceBasis, ens: &AgentEnsemble, a: &DMatrix<f64>, mu: f64) -> Result<Self> {
        check_dims(basis, ens)?;
        let m = ens.dim();
        if a.shape() != (m, m) {
            return Err(Error::DimensionMismatch {
                expected: format!("{m}x{m}"),
                got: format!("{}x{}", a.nrows(), a.ncols()),
            });
        }
        let h_o = hessian(ens);
        let w_o = limit_point(basis, ens)?;
        let l = ens.block_size;
        let noise_cov: Vec<DMatrix<f64>> = (0..ens.n_agents).map(|k| noise_covariance(ens, k, &w_o)).collect();
        let mut s = DMatrix::zeros(m, m);
        for (k, r) in noise_cov.iter().enumerate() {
            s.view_mut((k * l, k * l), (l, l)).copy_from(r);
        }
        let b = a * (DMatrix::identity(m, m) - &h_o * mu);
        let y = a * &s * a.transpose() * (mu * mu);
        let bias = &h_o * (&w_o - ens.w_star_vector());
        let rho_b = stability_margin(&b);
        Ok(TheoryContext {
            h_o,
            w_o,
            noise_cov,
            s,
            b,
            y,
            bias,
            mu,
            rho_b,
            stable: rho_b < 1.0,
        })
    }

    /// ‖Uᵀ b‖, zero at the constrained optimum.
    pub fn optimality_residual(&self, basis: &SubspaceBasis) -> f64 {
        basis.coordinates(&self.bias).norm()
    }
}

/// Both predictions for one (strategy, μ) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheorySummary {
    pub msd_closed_db: f64,
    pub msd_series_db: f64,
    #[serde(rename = "rho_B")]
    pub rho_b: f64,
    pub tail_bound: f64,
    pub n_terms: usize,
}

pub fn predict(
    basis: &SubspaceBasis,
    ens: &AgentEnsemble,
    a: &DMatrix<f64>,
    mu: f64,
    tail_tol: f64,
) -> Result<TheorySummary> {
    let ctx = TheoryContext::new(basis, ens, a, mu)?;
    let closed = msd_closed_form(basis, &ctx.h_o, &ctx.s, mu, ens.n_agents)?;
    let series = msd_series(a, &ctx.h_o, &ctx.s, mu, ens.n_agents, tail_tol)?;
    Ok(TheorySummary {
        msd_closed_db: closed,
        msd_series_db: series.db,
        rho_b: series.rho_b,
        tail_bound: series.tail_bound,
        n_terms: series.n_terms,
    })
}
