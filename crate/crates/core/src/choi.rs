use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-10;

/// Choi matrix `C = Σᵢⱼ |i⟩⟨j| ⊗ Λ[|i⟩⟨j|]` of a map on `d`-dimensional states.
///
/// Row index `i·d + k` pairs input index `i` with output index `k`, so
/// `C[(i·d + k, j·d + l)] = Λ[|i⟩⟨j|]_{kl}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    data: CMatrix,
}

impl ChoiMatrix {
    pub fn new(data: CMatrix) -> Result<Self> {
        let n = data.nrows();
        let dim = (n as f64).sqrt().round() as usize;
        if !data.is_square() || dim * dim != n || dim == 0 {
            return Err(Error::Dimension(format!(
                "Choi matrix must be d²×d², got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("Choi matrix"));
        }
        Ok(Self { dim, data })
    }

    /// Dimension `d` of the input (and output) space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    /// Λ[|i⟩⟨j|] as a `d×d` matrix.
    pub fn output(&self, i: usize, j: usize) -> CMatrix {
        let d = self.dim;
        CMatrix::from_fn(d, d, |k, l| self.data[(i * d + k, j * d + l)])
    }

    /// Applies the map to an operator on the input space.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let xij = x[(i, j)];
                if xij == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..d {
                    for l in 0..d {
                        out[(k, l)] += xij * self.data[(i * d + k, j * d + l)];
                    }
                }
            }
        }
        out
    }

    /// Trace over the output factor; the identity for trace-preserving maps.
    pub fn trace_output(&self) -> CMatrix {
        let d = self.dim;
        CMatrix::from_fn(d, d, |i, j| (0..d).map(|k| self.data[(i * d + k, j * d + k)]).sum())
    }

    /// Λ[1], obtained by tracing over the input factor.
    pub fn trace_input(&self) -> CMatrix {
        let d = self.dim;
        CMatrix::from_fn(d, d, |k, l| (0..d).map(|i| self.data[(i * d + k, i * d + l)]).sum())
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.data - self.data.adjoint()).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.data + self.data.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.min()
    }

    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim;
        (self.trace_output() - CMatrix::identity(d, d)).norm()
    }

    pub fn unitality_error(&self) -> f64 {
        let d = self.dim;
        (self.trace_input() - CMatrix::identity(d, d)).norm()
    }

    /// Checks Hermiticity, positivity and trace preservation.
    pub fn check_cptp(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidParams(format!("Choi matrix not Hermitian ({herm:.3e})")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidParams(format!(
                "Choi matrix not positive semi-definite (eigenvalue {min:.3e})"
            )));
        }
        let tp = self.trace_preservation_error();
        if tp > TRACE_TOL {
            return Err(Error::InvalidParams(format!("map not trace preserving ({tp:.3e})")));
        }
        Ok(())
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_error() <= tol
    }
}
