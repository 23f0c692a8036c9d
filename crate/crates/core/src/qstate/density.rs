use alloc::format;
use alloc::vec::Vec;

use crate::eigen;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::qstate::space::{same_space, HilbertSpace, Space};
use crate::qstate::StateVector;
use crate::{PSD_FLOOR, TOL};

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: Space,
    mat: CMatrix,
}

impl DensityMatrix {
    /// `Σ w_k |ψ_k⟩⟨ψ_k|`; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(f64, StateVector)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::BadWeights("empty mixture".into()))?;
        let space = first.space().clone();
        let mut total = 0.0;
        let mut mat = CMatrix::zeros(space.dim());
        for (w, psi) in parts {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::BadWeights(format!("weight {w} is negative or not finite")));
            }
            psi.check_space(&space)?;
            total += w;
            let amps = psi.amplitudes();
            for i in 0..amps.len() {
                for j in 0..amps.len() {
                    mat[(i, j)] += amps[i] * amps[j].conj() * *w;
                }
            }
        }
        if (total - 1.0).abs() > TOL {
            return Err(Error::BadWeights(format!("weights sum to {total}, not 1")));
        }
        Self::from_matrix(&space, mat)
    }

    pub fn pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        DensityMatrix { space: psi.space().clone(), mat: CMatrix::outer(a, a) }
    }

    /// Validates Hermiticity, unit trace and positive semidefiniteness.
    pub fn from_matrix(space: &Space, mat: CMatrix) -> Result<Self> {
        if mat.dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: mat.dim() });
        }
        let dm = DensityMatrix { space: space.clone(), mat };
        dm.validate()?;
        Ok(dm)
    }

    pub(crate) fn from_parts(space: Space, mat: CMatrix) -> Self {
        DensityMatrix { space, mat }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mat.is_finite() {
            return Err(Error::NonFinite);
        }
        if !self.mat.is_hermitian(TOL) {
            return Err(Error::NotHermitian);
        }
        let tr = self.mat.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::NotDensityMatrix(format!("trace is {tr}, not 1")));
        }
        let min = eigen::min_eigenvalue(&self.mat);
        if min < PSD_FLOOR {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigen::hermitian_eigenvalues(&self.mat)
    }

    /// `⟨ψ|ρ|ψ⟩`; zero for a state on another space.
    pub fn fidelity(&self, psi: &StateVector) -> f64 {
        if !same_space(&self.space, psi.space()) {
            return 0.0;
        }
        self.mat.sandwich(psi.amplitudes(), psi.amplitudes()).re.clamp(0.0, 1.0)
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let space = HilbertSpace::tensor(&self.space, &other.space)?;
        Ok(DensityMatrix { space, mat: self.mat.kron(&other.mat) })
    }

    /// Reduced state of factor `keep`, tracing out every other factor.
    pub fn partial_trace(&self, keep: usize) -> Result<DensityMatrix> {
        if !self.space.is_product() {
            return Err(Error::NotProductSpace);
        }
        let dims = self.space.factor_dims();
        if keep >= dims.len() {
            return Err(Error::InvalidArgument(format!(
                "factor {keep} out of range for a {}-factor space",
                dims.len()
            )));
        }
        let kept = dims[keep];
        // Strides in the row-major multi-index, first factor most significant.
        let stride: usize = dims[keep + 1..].iter().product();
        let outer: usize = dims[..keep].iter().product();
        let mut out = CMatrix::zeros(kept);
        for a in 0..kept {
            for b in 0..kept {
                let mut acc = C64::new(0.0, 0.0);
                for hi in 0..outer {
                    for lo in 0..stride {
                        let row = (hi * kept + a) * stride + lo;
                        let col = (hi * kept + b) * stride + lo;
                        acc += self.mat[(row, col)];
                    }
                }
                out[(a, b)] = acc;
            }
        }
        Ok(DensityMatrix { space: self.space.factor_space(keep)?, mat: out })
    }

    /// Reduced state on the factor whose labels include `label`.
    pub fn keep_factor_with(&self, label: &str) -> Result<DensityMatrix> {
        let k = self
            .space
            .factors()
            .iter()
            .position(|f| f.iter().any(|l| l.as_str() == label))
            .ok_or_else(|| Error::UnknownName(label.into()))?;
        self.partial_trace(k)
    }
}
