//! Phase-space foundations: covariance matrices, the symplectic form, and
//! physicality checks.
//!
//! Conventions used throughout the crate:
//! * quadrature ordering `(x1, p1, ..., xN, pN)`,
//! * vacuum variance `1/2`, so the vacuum covariance matrix is `I/2`,
//! * symplectic eigenvalues reported in *normalized* form `2*nu`, which puts
//!   the physicality and separability boundary exactly at one.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum tolerated asymmetry before an input matrix is rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Margin below which a state is declared unphysical.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Relative tolerance when collapsing the `+i nu` / `-i nu` eigenvalue pairs.
const PAIR_DEDUP_RTOL: f64 = 1e-8;
/// Condition number beyond which inversion is refused.
const MAX_CONDITION: f64 = 1e14;
/// Serialized quadrature-ordering tag.
const ORDERING_TAG: &str = "x1p1...";

/// Block-diagonal symplectic form with 2x2 blocks `[[0, 1], [-1, 0]]`.
#[derive(Debug, Clone)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
        for k in 0..n_modes {
            m[(2 * k, 2 * k + 1)] = 1.0;
            m[(2 * k + 1, 2 * k)] = -1.0;
        }
        Self { n_modes, matrix: m }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// The symplectic form matrix for `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    SymplecticForm::new(n_modes).matrix
}

/// Real phase-space direction `g`; the quadrature it defines is `g . r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceDirection {
    coeffs: DVector<f64>,
}

impl PhaseSpaceDirection {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self {
            coeffs: DVector::from_vec(coeffs),
        }
    }

    pub fn from_vector(coeffs: DVector<f64>) -> Self {
        Self { coeffs }
    }

    /// Normalize to a unit vector; fails on a numerically zero input.
    pub fn unit(coeffs: Vec<f64>) -> Result<Self> {
        let v = DVector::from_vec(coeffs);
        let n = v.norm();
        if n < 1e-300 {
            return Err(Error::ZeroDirection);
        }
        Ok(Self { coeffs: v / n })
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    /// Flip the overall sign so the first component with |c| > 1e-10 is
    /// positive. The criteria do not depend on the sign of `g`.
    pub fn canonicalize_sign(mut self) -> Self {
        for c in self.coeffs.iter() {
            if c.abs() > 1e-10 {
                if *c < 0.0 {
                    self.coeffs = -self.coeffs;
                }
                break;
            }
        }
        self
    }

    /// Indices of components with |c| above `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > threshold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Outcome of a physicality check: the normalized symplectic-eigenvalue
/// margin `min(2 nu) - 1` and the resulting verdict.
#[derive(Debug, Clone, Copy)]
pub struct Physicality {
    pub physical: bool,
    pub margin: f64,
}

/// Serialized form of a covariance matrix.
#[derive(Debug, Serialize, Deserialize)]
struct CovarianceJson {
    n_modes: usize,
    ordering: String,
    vacuum_variance: f64,
    matrix: Vec<Vec<f64>>,
}

/// Symmetric 2N x 2N matrix of quadrature second moments.
///
/// Construction symmetrizes inputs whose asymmetry is below [`SYMMETRY_TOL`]
/// and rejects anything worse. Physicality is *checked*, not enforced, so
/// marginally unphysical reconstructed matrices can still be represented.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    mat: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(n_modes: usize, mat: DMatrix<f64>) -> Result<Self> {
        if mat.nrows() != 2 * n_modes || mat.ncols() != 2 * n_modes {
            return Err(Error::ShapeMismatch {
                rows: mat.nrows(),
                cols: mat.ncols(),
                n_modes,
            });
        }
        let mut max_asym = 0.0f64;
        for i in 0..mat.nrows() {
            for j in (i + 1)..mat.ncols() {
                max_asym = max_asym.max((mat[(i, j)] - mat[(j, i)]).abs());
            }
        }
        if max_asym > SYMMETRY_TOL {
            return Err(Error::NonSymmetric {
                max_asymmetry: max_asym,
            });
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        Ok(Self { n_modes, mat: sym })
    }

    /// The N-mode vacuum, `I/2`.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            n_modes,
            mat: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    /// Normalized symplectic spectrum `{2 nu_i}`, descending. The vacuum maps
    /// to all ones and physical states satisfy `2 nu_i >= 1`.
    ///
    /// The spectrum is obtained from the eigenvalues of `Omega Gamma`, which
    /// come in pairs `+/- i nu`; the pairs are collapsed by averaging.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        if self.mat.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        let omega = symplectic_form(self.n_modes);
        let og = &omega * &self.mat;
        let eig = og.complex_eigenvalues();
        let mut moduli: Vec<f64> = eig.iter().map(|z| z.im.abs()).collect();
        moduli.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut out = Vec::with_capacity(self.n_modes);
        for k in 0..self.n_modes {
            let a = moduli[2 * k];
            let b = moduli[2 * k + 1];
            let scale = a.abs().max(1e-300);
            debug_assert!(
                (a - b).abs() / scale < PAIR_DEDUP_RTOL * 1e4,
                "symplectic eigenvalue pair mismatch: {a} vs {b}"
            );
            let _ = PAIR_DEDUP_RTOL;
            out.push(a + b); // 2 * mean of the pair = normalized eigenvalue
        }
        Ok(out)
    }

    /// Physicality verdict with margin `min(2 nu) - 1`.
    ///
    /// For indefinite matrices (which cannot be physical) the margin falls
    /// back to the ordinary-eigenvalue bound `2 lambda_min - 1`, which is a
    /// lower bound on the symplectic margin.
    pub fn check_physical(&self) -> Physicality {
        let margin = match self.symplectic_eigenvalues() {
            Ok(nus) => nus.last().copied().unwrap_or(1.0) - 1.0,
            Err(_) => {
                let eig = self.mat.clone().symmetric_eigenvalues();
                2.0 * eig.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0
            }
        };
        Physicality {
            physical: margin >= -PHYSICALITY_TOL,
            margin,
        }
    }

    /// Inverse via symmetric eigendecomposition, so the result is symmetric
    /// by construction. Refuses matrices with condition number above 1e14.
    pub fn invert(&self) -> Result<DMatrix<f64>> {
        let eig = self.mat.clone().symmetric_eigen();
        let mut max_abs = 0.0f64;
        let mut min_abs = f64::INFINITY;
        for v in eig.eigenvalues.iter() {
            max_abs = max_abs.max(v.abs());
            min_abs = min_abs.min(v.abs());
        }
        let condition = max_abs / min_abs.max(1e-300);
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(Error::SingularMatrix { condition });
        }
        let inv_vals = DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().map(|v| 1.0 / v),
        );
        let v = &eig.eigenvectors;
        let inv = v * DMatrix::from_diagonal(&inv_vals) * v.transpose();
        Ok((&inv + inv.transpose()) * 0.5)
    }

    /// Congruence transform `S Gamma S^T`.
    pub fn congruence(&self, s: &DMatrix<f64>) -> Result<Self> {
        let m = s * &self.mat * s.transpose();
        Self::new(self.n_modes, m)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.mat[(i, j)]).collect())
            .collect();
        let doc = CovarianceJson {
            n_modes: self.n_modes,
            ordering: ORDERING_TAG.to_string(),
            vacuum_variance: 0.5,
            matrix: rows,
        };
        serde_json::to_string_pretty(&doc).expect("covariance serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CovarianceJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidCovarianceFile(e.to_string()))?;
        if doc.ordering != ORDERING_TAG {
            return Err(Error::InvalidCovarianceFile(format!(
                "unsupported quadrature ordering {:?}",
                doc.ordering
            )));
        }
        if (doc.vacuum_variance - 0.5).abs() > 1e-15 {
            return Err(Error::InvalidCovarianceFile(format!(
                "unsupported vacuum variance {}",
                doc.vacuum_variance
            )));
        }
        let dim = 2 * doc.n_modes;
        if doc.matrix.len() != dim || doc.matrix.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidCovarianceFile(
                "matrix shape does not match n_modes".to_string(),
            ));
        }
        let mat = DMatrix::from_fn(dim, dim, |i, j| doc.matrix[i][j]);
        Self::new(doc.n_modes, mat)
    }
}
