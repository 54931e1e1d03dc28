//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random M×P matrix with orthonormal columns (QR of a Gaussian matrix).
pub fn random_semi_unitary(m: usize, p: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = gaussian_matrix(m, p, rng);
    g.qr().q().columns(0, p).into_owned()
}

// nalgebra's SVD loses accuracy on rank-deficient input, so the oracles are
// built on the symmetric eigensolver only.

/// Pseudo-inverse of a symmetric positive semidefinite matrix.
fn pinv_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let cutoff = 1e-12 * eig.eigenvalues.amax();
    let inv = eig.eigenvalues.map(|l| if l > cutoff { 1.0 / l } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

/// K⁺ = Kᵀ(KKᵀ)⁺
fn pinv(k: &DMatrix<f64>) -> DMatrix<f64> {
    k.transpose() * pinv_psd(&(k * k.transpose()))
}

/// Projection onto {A : AU = U, A = Aᵀ} as the least-norm correction of
/// vec(D) under the stacked linear constraints, computed with a
/// pseudo-inverse.
pub struct AffineOracle {
    m: usize,
    /// I − K⁺K
    null_proj: DMatrix<f64>,
    /// K⁺c
    offset: DVector<f64>,
}

impl AffineOracle {
    pub fn new(u: &DMatrix<f64>) -> Self {
        Self::with_zeros(u, &[])
    }

    /// Adds the constraints A[(i, j)] = 0 for every listed entry.
    pub fn with_zeros(u: &DMatrix<f64>, zeros: &[(usize, usize)]) -> Self {
        let (m, p) = u.shape();
        let n = m * m;
        // vec is column-major: A[(i, j)] ↦ i + j·m.
        let rows = m * p + m * m + zeros.len();
        let mut k = DMatrix::zeros(rows, n);
        let mut c = DVector::zeros(rows);
        let mut r = 0;
        for i in 0..m {
            for col in 0..p {
                for j in 0..m {
                    k[(r, i + j * m)] = u[(j, col)];
                }
                c[r] = u[(i, col)];
                r += 1;
            }
        }
        for i in 0..m {
            for j in 0..m {
                k[(r, i + j * m)] += 1.0;
                k[(r, j + i * m)] -= 1.0;
                r += 1;
            }
        }
        for &(i, j) in zeros {
            k[(r, i + j * m)] = 1.0;
            r += 1;
        }
        let kp = pinv(&k);
        let null_proj = DMatrix::identity(n, n) - &kp * &k;
        let offset = &kp * c;
        AffineOracle { m, null_proj, offset }
    }

    pub fn project(&self, d: &DMatrix<f64>) -> DMatrix<f64> {
        let x = DVector::from_column_slice(d.as_slice());
        let y = &self.null_proj * x + &self.offset;
        DMatrix::from_column_slice(self.m, self.m, y.as_slice())
    }
}

/// Projection onto {A : ‖A − P‖₂ ≤ r} for an arbitrary square matrix by
/// clipping singular values. The singular triplets of M = A − P come from the
/// eigenpairs (σ, [u; v]/√2) of the symmetric embedding [[0, M], [Mᵀ, 0]].
pub fn project_spectral_ball(a: &DMatrix<f64>, p: &DMatrix<f64>, radius: f64) -> DMatrix<f64> {
    let m = a - p;
    let n = m.nrows();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, n), (n, n)).copy_from(&m);
    h.view_mut((n, 0), (n, n)).copy_from(&m.transpose());
    let eig = SymmetricEigen::new(h);
    let mut excess = DMatrix::zeros(n, n);
    for (j, sigma) in eig.eigenvalues.iter().enumerate() {
        if *sigma > radius {
            let w = eig.eigenvectors.column(j);
            let top = w.rows(0, n);
            let bottom = w.rows(n, n);
            excess += (top * bottom.transpose()) * (2.0 * (sigma - radius));
        }
    }
    a - excess
}

/// Dykstra's alternating projections onto Ω₁ ∩ Ω₂, stopped once the two
/// set iterates agree and stall.
pub fn dykstra(d: &DMatrix<f64>, u: &DMatrix<f64>, eps: f64, max_iters: usize) -> DMatrix<f64> {
    let affine = AffineOracle::new(u);
    let p = u * u.transpose();
    let radius = 1.0 - eps;
    let mut x = d.clone();
    let mut p1 = DMatrix::zeros(d.nrows(), d.ncols());
    let mut p2 = DMatrix::zeros(d.nrows(), d.ncols());
    for _ in 0..max_iters {
        let y = affine.project(&(&x + &p1));
        p1 = &x + &p1 - &y;
        let next = project_spectral_ball(&(&y + &p2), &p, radius);
        p2 = &y + &p2 - &next;
        let gap = (&next - &y).norm();
        let step = (&next - &x).norm();
        x = next;
        if gap < 1e-13 && step < 1e-13 {
            break;
        }
    }
    x
}

/// Σ_{n=0}^{terms−1} Tr(BⁿY(Bᵀ)ⁿ) / N by direct summation.
pub fn naive_series(b: &DMatrix<f64>, y: &DMatrix<f64>, n_agents: usize, terms: usize) -> Vec<f64> {
    let mut partial = Vec::with_capacity(terms);
    let mut term = y.clone();
    let mut total = 0.0;
    for _ in 0..terms {
        total += term.trace() / n_agents as f64;
        partial.push(total);
        term = b * term * b.transpose();
    }
    partial
}

/// Exact optimum of the same problem. With a₁₃ = 1/3 + ⟨G, X⟩ and
/// G = sym(q₁q₃ᵀ), the range of ⟨G, X⟩ over the spectral ball of radius r is
/// ±r‖G‖_* (nuclear norm), so min 2|a₁₃| = 2·max(0, 1/3 − r‖G‖_*).
pub fn path_graph_exact_minimum(eps: f64) -> f64 {
    let s2 = 2f64.sqrt();
    let s6 = 6f64.sqrt();
    let q1 = nalgebra::Vector2::new(1.0 / s2, 1.0 / s6);
    let q3 = nalgebra::Vector2::new(-1.0 / s2, 1.0 / s6);
    let g = (q1 * q3.transpose() + q3 * q1.transpose()) * 0.5;
    let nuclear: f64 = g.symmetric_eigenvalues().iter().map(|v| v.abs()).sum();
    2.0 * (1.0 / 3.0 - (1.0 - eps) * nuclear).max(0.0)
}

/// 3-node path graph 1 – 2 – 3, consensus subspace, block size 1: grid
/// search of min 2|a₁₃| over A = P + QXQᵀ with X symmetric and ‖X‖₂ ≤ 1 − ε,
/// where Q spans the complement of 1/√3.
pub fn path_graph_grid_minimum(eps: f64, steps: usize) -> f64 {
    let s3 = 3f64.sqrt();
    let s2 = 2f64.sqrt();
    let s6 = 6f64.sqrt();
    let q = DMatrix::from_row_slice(3, 2, &[1.0 / s2, 1.0 / s6, 0.0, -2.0 / s6, -1.0 / s2, 1.0 / s6]);
    let ones = DMatrix::from_element(3, 1, 1.0 / s3);
    let p = &ones * ones.transpose();
    let r = 1.0 - eps;
    let mut best = f64::INFINITY;
    let grid = |i: usize| -r + 2.0 * r * i as f64 / (steps - 1) as f64;
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                let (x1, x2, x3) = (grid(i), grid(j), grid(k));
                // Eigenvalues of [[x1, x2], [x2, x3]].
                let mean = 0.5 * (x1 + x3);
                let rad = (0.25 * (x1 - x3).powi(2) + x2 * x2).sqrt();
                if (mean + rad).abs() > r || (mean - rad).abs() > r {
                    continue;
                }
                let x = DMatrix::from_row_slice(2, 2, &[x1, x2, x2, x3]);
                let a = &p + &q * x * q.transpose();
                best = best.min(2.0 * a[(0, 2)].abs());
            }
        }
    }
    best
}

/// Sample covariance of the gradient noise s = ∇J(w) − ∇̂J(w) of one agent
/// with regressor variance σ²_u, noise variance σ²_v and target w★.
pub fn empirical_noise_covariance(
    sigma2_u: f64,
    sigma2_v: f64,
    w_star: &DVector<f64>,
    w: &DVector<f64>,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    let l = w_star.len();
    let su = sigma2_u.sqrt();
    let sv = sigma2_v.sqrt();
    let true_grad = (w - w_star) * sigma2_u;
    let mut acc = DMatrix::zeros(l, l);
    let mut mean = DVector::zeros(l);
    for _ in 0..samples {
        let u = DVector::from_fn(l, |_, _| su * rng.sample::<f64, _>(StandardNormal));
        let d = u.dot(w_star) + sv * rng.sample::<f64, _>(StandardNormal);
        let inst = &u * -(d - u.dot(w));
        let s = &true_grad - inst;
        acc += &s * s.transpose();
        mean += s;
    }
    let n = samples as f64;
    mean /= n;
    acc / n - &mean * mean.transpose()
}
