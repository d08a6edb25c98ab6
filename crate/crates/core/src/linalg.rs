//! Dense helpers: Hermitian spectral propagators and singular-value norms.
//! Storage is nalgebra; eigen and singular value decompositions go through
//! faer, whose solvers stay finite on the very sparse matrices that
//! projected operators produce.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operators::{DenseMatrix, C64};

pub const DEFAULT_DENSE_THRESHOLD: usize = 2048;

/// Eigendecomposition `H = V diag(λ) V^†` of a Hermitian matrix, used to
/// apply `e^{-itH}` for any `t`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    vectors: DenseMatrix,
    values: DVector<f64>,
}

impl SpectralPropagator {
    pub fn new(h: DenseMatrix) -> Self {
        let (values, vectors) = hermitian_eigen(&h);
        SpectralPropagator { vectors, values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    /// `e^{-itH}`.
    pub fn unitary(&self, t: f64) -> DenseMatrix {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::from_polar(1.0, -t * self.values[k]);
        }
        scaled * self.vectors.adjoint()
    }

    /// `e^{-itH} ψ`.
    pub fn apply(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut coeffs = self.vectors.adjoint() * psi;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= C64::from_polar(1.0, -t * self.values[k]);
        }
        &self.vectors * coeffs
    }

    /// Heisenberg picture `e^{itH} A e^{-itH}`.
    pub fn heisenberg(&self, a: &DenseMatrix, t: f64) -> DenseMatrix {
        let u = self.unitary(t);
        u.adjoint() * a * u
    }

    /// Schrödinger picture for a density matrix, `e^{-itH} ρ e^{itH}`.
    pub fn evolve_density(&self, rho: &DenseMatrix, t: f64) -> DenseMatrix {
        let u = self.unitary(t);
        &u * rho * u.adjoint()
    }
}

fn to_faer<T: Copy>(m: &DMatrix<T>) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian
/// matrix. Only the lower triangle is read.
pub fn hermitian_eigen(h: &DenseMatrix) -> (DVector<f64>, DenseMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (DVector::zeros(0), DenseMatrix::zeros(0, 0));
    }
    let eig = to_faer(h)
        .self_adjoint_eigen(Side::Lower)
        .expect("Hermitian eigensolver failed to converge");
    let (u, s) = (eig.U(), eig.S());
    let values = DVector::from_fn(n, |k, _| s[k].re);
    let vectors = DenseMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    (values, vectors)
}

/// Real symmetric counterpart of [`hermitian_eigen`].
pub fn symmetric_eigen(h: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = h.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let eig = to_faer(h)
        .self_adjoint_eigen(Side::Lower)
        .expect("symmetric eigensolver failed to converge");
    let (u, s) = (eig.U(), eig.S());
    (
        DVector::from_fn(n, |k, _| s[k]),
        DMatrix::from_fn(n, n, |i, j| u[(i, j)]),
    )
}

pub fn hermitian_eigenvalues(h: &DenseMatrix) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    to_faer(h)
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("Hermitian eigensolver failed to converge")
}

pub fn check_dense(dim: usize, threshold: usize) -> Result<()> {
    if dim > threshold {
        Err(Error::DimensionTooLarge { dim, threshold })
    } else {
        Ok(())
    }
}

pub fn singular_values(m: &DenseMatrix) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(0);
    }
    let sv = to_faer(m)
        .singular_values()
        .expect("singular value decomposition failed to converge");
    DVector::from_vec(sv)
}

/// `‖M‖₁ = Tr sqrt(M^† M)`.
pub fn trace_norm(m: &DenseMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Largest singular value.
pub fn operator_norm(m: &DenseMatrix) -> f64 {
    singular_values(m).iter().copied().fold(0.0, f64::max)
}

pub fn max_abs(m: &DenseMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a * b - b * a
}

pub fn real_diag(values: &[f64]) -> DenseMatrix {
    DMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| C64::new(v, 0.0)),
    ))
}
