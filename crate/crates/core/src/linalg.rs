//! Dense Hermitian helpers: eigendecomposition, spectral matrix functions,
//! and a dense operator type over a Fock basis.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::FockBasis;
use crate::sparse::{same_basis, HermitianAction, SparseHermitian};
use crate::C64;

/// Default largest dimension handled by dense routines.
pub const DEFAULT_DENSE_CAP: usize = 6000;

/// Eigen-decomposition `H = V diag(values) V^dag` with orthonormal columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// Decompose a Hermitian matrix. A purely real input takes the cheaper
    /// real-symmetric path.
    pub fn new(m: &DMatrix<C64>) -> Self {
        assert!(m.is_square());
        if m.iter().all(|z| z.im == 0.0) {
            let re = m.map(|z| z.re);
            let eig = re.symmetric_eigen();
            HermitianEigen {
                values: eig.eigenvalues,
                vectors: eig.eigenvectors.map(|x| C64::new(x, 0.0)),
            }
        } else {
            let eig = m.clone().symmetric_eigen();
            HermitianEigen {
                values: eig.eigenvalues,
                vectors: eig.eigenvectors,
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(-i H t) v`
    pub fn evolve(&self, v: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut coeff = self.vectors.ad_mul(v);
        for (c, &e) in coeff.iter_mut().zip(self.values.iter()) {
            *c *= C64::from_polar(1.0, -e * t);
        }
        &self.vectors * coeff
    }

    /// `f(H)` for a real function of the eigenvalues.
    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (k, &e) in self.values.iter().enumerate() {
            let fe = C64::new(f(e), 0.0);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= fe);
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i H t)` as a dense matrix.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (k, &e) in self.values.iter().enumerate() {
            let ph = C64::from_polar(1.0, -e * t);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= ph);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut v: Vec<f64> = if m.iter().all(|z| z.im == 0.0) {
        m.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    v.sort_by(f64::total_cmp);
    v
}

/// Largest pairwise gap between two sorted multisets of equal size.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Dense Hermitian operator over a Fock basis.
#[derive(Debug, Clone)]
pub struct DenseHermitian {
    basis: Arc<FockBasis>,
    mat: DMatrix<C64>,
}

impl DenseHermitian {
    /// Wrap `mat`, symmetrizing it after checking it is within `tol` of
    /// Hermitian.
    pub fn new(basis: Arc<FockBasis>, mat: DMatrix<C64>, tol: f64) -> Result<Self> {
        if mat.nrows() != basis.dim() || mat.ncols() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{}x{} matrix for basis of dimension {}",
                mat.nrows(),
                mat.ncols(),
                basis.dim()
            )));
        }
        let dev = hermitian_deviation(&mat);
        if dev > tol {
            return Err(Error::Numerical(format!(
                "dense operator deviates from Hermitian by {dev:e}"
            )));
        }
        let mat = (&mat + mat.adjoint()) * C64::new(0.5, 0.0);
        Ok(DenseHermitian { basis, mat })
    }

    pub fn from_sparse(op: &SparseHermitian, cap: usize) -> Result<Self> {
        if op.dim() > cap {
            return Err(Error::Capacity {
                dim: op.dim(),
                cap,
            });
        }
        Ok(DenseHermitian {
            basis: op.basis().clone(),
            mat: op.to_dense(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn eigen(&self) -> HermitianEigen {
        HermitianEigen::new(&self.mat)
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn check_basis(&self, other: &FockBasis) -> Result<()> {
        same_basis(&self.basis, other)
    }
}

impl HermitianAction for DenseHermitian {
    fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }
    fn act(&self, x: &DVector<C64>) -> DVector<C64> {
        &self.mat * x
    }
}
