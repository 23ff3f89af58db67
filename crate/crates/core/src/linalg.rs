//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Matrices and vectors are plain `nalgebra` dynamic containers over
//! [`Complex64`]. Tensor products follow the row-major Kronecker convention:
//! the first factor carries the most significant index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance for Hermiticity and PSD checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative floor below which a negative eigenvalue is clamped to zero.
pub const PSD_FLOOR: f64 = 1e-10;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn basis(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = re(1.0);
    v
}

/// Frobenius norm.
pub fn norm(m: &CMatrix) -> f64 {
    m.norm()
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

/// `⟨a|M|b⟩`.
pub fn sandwich(a: &CVector, m: &CMatrix, b: &CVector) -> Complex64 {
    a.dotc(&(m * b))
}

/// `|a⟩⟨b|`.
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Rank-one projector `|v⟩⟨v|` (not normalized).
pub fn projector(v: &CVector) -> CMatrix {
    outer(v, v)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.trace()
}

/// Normalize a vector; returns `None` for a zero vector.
pub fn normalized(v: &CVector) -> Option<CVector> {
    let n = v.norm();
    (n > 0.0).then(|| v / re(n))
}

/// `‖M − M†‖`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(())
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    check_square(m)?;
    let residual = hermiticity_residual(m);
    if residual > HERMITIAN_TOL * m.norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    /// `V f(Λ) V†`.
    pub fn apply<F: Fn(f64) -> Complex64>(&self, f: F) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fj = f(lambda);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= fj;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(re)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Hermitian eigendecomposition with ascending real eigenvalues.
pub fn herm_eig(m: &CMatrix) -> Result<HermitianEigen> {
    check_hermitian(m)?;
    let dim = m.nrows();
    if dim == 0 {
        return Ok(HermitianEigen {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let sym = (m + m.adjoint()) * re(0.5);
    let eig = nalgebra::SymmetricEigen::try_new(sym, EIG_EPS, EIG_MAX_ITER)
        .ok_or(Error::EigenNoConvergence { dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-10·‖M‖, 0)` are clamped to zero; anything more
/// negative is rejected. Positive eigenvalues at the rounding level
/// (`≤ 1e-13·λ_max`) are also treated as zero, otherwise the square root
/// would lift them to `~1e-8` and pollute the numerical null space.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(m)?;
    let floor = -PSD_FLOOR * m.norm().max(1.0);
    let min = eig.min_eigenvalue();
    if min < floor {
        return Err(Error::NotPsd { eigenvalue: min });
    }
    let cutoff = RANK_CUTOFF * eig.max_eigenvalue().max(0.0);
    Ok(eig.apply(|l| if l <= cutoff { re(0.0) } else { re(l.sqrt()) }))
}

/// Relative eigenvalue level below which `psd_sqrt` treats a direction as null.
pub const RANK_CUTOFF: f64 = 1e-13;

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(herm_eig(m)?.min_eigenvalue())
}

/// `exp(-i t H)` for Hermitian `H`, via the precomputed spectrum.
pub fn unitary_evolution(eig: &HermitianEigen, t: f64) -> CMatrix {
    eig.apply(|l| Complex64::from_polar(1.0, -l * t))
}

/// Kronecker product of two matrices (first factor most significant).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Ordered list of tensor factor dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpace {
    factor_dims: Vec<usize>,
}

impl TensorSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "tensor factors must be positive, got {factor_dims:?}"
            )));
        }
        Ok(Self { factor_dims })
    }

    pub fn bipartite(d_a: usize, d_b: usize) -> Result<Self> {
        Self::new(vec![d_a, d_b])
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Split a flat index into per-factor digits.
    fn digits(&self, mut index: usize, out: &mut [usize]) {
        for (slot, &d) in out.iter_mut().zip(&self.factor_dims).rev() {
            *slot = index % d;
            index /= d;
        }
    }
}

/// Trace out every factor not listed in `keep`. Kept factors retain their
/// original order.
pub fn partial_trace(m: &CMatrix, space: &TensorSpace, keep: &[usize]) -> Result<CMatrix> {
    let dim = space.dim();
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    let n = space.factor_dims.len();
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::InvalidParameter(format!(
            "factor index {bad} out of range for {n} factors"
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| space.factor_dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();

    let flatten_kept = |digits: &[usize]| -> usize {
        kept.iter()
            .zip(&kept_dims)
            .fold(0, |acc, (&k, &d)| acc * d + digits[k])
    };

    let mut out = CMatrix::zeros(out_dim, out_dim);
    let mut row_digits = vec![0usize; n];
    let mut col_digits = vec![0usize; n];
    for i in 0..dim {
        space.digits(i, &mut row_digits);
        for j in 0..dim {
            space.digits(j, &mut col_digits);
            let traced_match = (0..n)
                .filter(|f| !kept.contains(f))
                .all(|f| row_digits[f] == col_digits[f]);
            if traced_match {
                out[(flatten_kept(&row_digits), flatten_kept(&col_digits))] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// `Tr_B` of an operator on `A ⊗ B`.
pub fn trace_out_b(m: &CMatrix, d_a: usize, d_b: usize) -> Result<CMatrix> {
    partial_trace(m, &TensorSpace::bipartite(d_a, d_b)?, &[0])
}

/// `Tr_A` of an operator on `A ⊗ B`.
pub fn trace_out_a(m: &CMatrix, d_a: usize, d_b: usize) -> Result<CMatrix> {
    partial_trace(m, &TensorSpace::bipartite(d_a, d_b)?, &[1])
}

/// Orthonormal completion of a set of orthonormal vectors by Gram-Schmidt
/// against the computational basis.
pub fn complete_basis(vectors: &[CVector], dim: usize) -> CMatrix {
    let mut cols: Vec<CVector> = vectors.to_vec();
    for k in 0..dim {
        if cols.len() == dim {
            break;
        }
        let mut v = basis(dim, k);
        for _ in 0..2 {
            for u in &cols {
                let proj = inner(u, &v);
                v -= u * proj;
            }
        }
        if v.norm() > 1e-8 {
            cols.push(&v / re(v.norm()));
        }
    }
    CMatrix::from_columns(&cols)
}
