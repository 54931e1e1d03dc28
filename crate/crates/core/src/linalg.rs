//! Small dense linear-algebra helpers shared by the modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Entries with magnitude below this are skipped when fixing eigenvector signs.
const SIGN_EPS: f64 = 1e-12;

/// Symmetry tolerance below which a matrix is treated as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Symmetric eigendecomposition with ascending eigenvalues.
///
/// Each eigenvector is flipped so that its first entry of non-negligible
/// magnitude is positive, which makes the basis reproducible.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        if let Some(first) = col.iter().find(|x| x.abs() > SIGN_EPS) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// ‖M − Mᵀ‖_F
pub fn symmetry_residual(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).norm()
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn sym_spectral_radius(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(symmetrize(m));
    eig.eigenvalues.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Spectral norm (largest singular value).
///
/// Symmetric inputs use the eigenvalues directly; otherwise the largest
/// eigenvalue of MᵀM is taken.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_square() && symmetry_residual(m) <= SYMMETRY_TOL {
        return sym_spectral_radius(m);
    }
    let gram = m.transpose() * m;
    let eig = SymmetricEigen::new(symmetrize(&gram));
    eig.eigenvalues.max().max(0.0).sqrt()
}

/// A ⊗ I_l
pub fn kron_identity(a: &DMatrix<f64>, l: usize) -> DMatrix<f64> {
    if l == 1 {
        return a.clone();
    }
    let (r, c) = a.shape();
    let mut out = DMatrix::zeros(r * l, c * l);
    for i in 0..r {
        for j in 0..c {
            let v = a[(i, j)];
            if v != 0.0 {
                for d in 0..l {
                    out[(i * l + d, j * l + d)] = v;
                }
            }
        }
    }
    out
}

/// Frobenius inner product ⟨X, Y⟩ = Tr(XᵀY).
pub fn frobenius_inner(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Serde adapter storing a matrix as a dense array of rows.
pub mod serde_rows {
    use nalgebra::DMatrix;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        super::to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        super::from_rows(&rows).ok_or_else(|| D::Error::custom("ragged matrix rows"))
    }
}
