use alloc::format;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::qstate::space::{same_space, HilbertSpace, Space};
use crate::TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Projector,
    Unitary,
    General,
}

/// Square matrix on a Hilbert space, tagged with the property it was validated for.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: Space,
    mat: CMatrix,
    kind: OperatorKind,
}

impl Operator {
    /// Checks `M² = M` and `M = M†`.
    pub fn projector(space: &Space, mat: CMatrix) -> Result<Self> {
        check_shape(space, &mat)?;
        if !mat.is_hermitian(TOL) {
            return Err(Error::NotProjector("matrix is not Hermitian".into()));
        }
        let dev = (&mat * &mat).max_abs_diff(&mat);
        if dev > TOL {
            return Err(Error::NotProjector(format!("not idempotent (|M²-M| = {dev:e})")));
        }
        Ok(Operator { space: space.clone(), mat, kind: OperatorKind::Projector })
    }

    /// Checks `M†M = I`.
    pub fn unitary(space: &Space, mat: CMatrix) -> Result<Self> {
        check_shape(space, &mat)?;
        let dev = (&mat.adjoint() * &mat).max_abs_diff(&CMatrix::identity(space.dim()));
        if dev > TOL {
            return Err(Error::NotUnitary(format!("|M†M - I| = {dev:e}")));
        }
        Ok(Operator { space: space.clone(), mat, kind: OperatorKind::Unitary })
    }

    pub fn general(space: &Space, mat: CMatrix) -> Result<Self> {
        check_shape(space, &mat)?;
        Ok(Operator { space: space.clone(), mat, kind: OperatorKind::General })
    }

    pub fn identity(space: &Space) -> Self {
        Operator { space: space.clone(), mat: CMatrix::identity(space.dim()), kind: OperatorKind::Projector }
    }

    pub(crate) fn from_parts(space: Space, mat: CMatrix, kind: OperatorKind) -> Self {
        Operator { space, mat, kind }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn is_projector(&self) -> bool {
        self.kind == OperatorKind::Projector
    }

    pub fn adjoint(&self) -> Operator {
        Operator { space: self.space.clone(), mat: self.mat.adjoint(), kind: self.kind }
    }

    /// `I - P` for a projector.
    pub fn complement(&self) -> Result<Operator> {
        if !self.is_projector() {
            return Err(Error::NotProjector("complement of a non-projector".into()));
        }
        let mat = &CMatrix::identity(self.space.dim()) - &self.mat;
        Ok(Operator { space: self.space.clone(), mat, kind: OperatorKind::Projector })
    }

    /// Rank of a projector, read off its trace.
    pub fn rank(&self) -> usize {
        libm::round(self.mat.trace().re).max(0.0) as usize
    }

    pub fn tensor(&self, other: &Operator) -> Result<Operator> {
        let space = HilbertSpace::tensor(&self.space, &other.space)?;
        let kind = if self.kind == other.kind { self.kind } else { OperatorKind::General };
        Ok(Operator { space, mat: self.mat.kron(&other.mat), kind })
    }

    /// `M·v` on raw amplitudes.
    pub fn apply(&self, v: &[C64]) -> alloc::vec::Vec<C64> {
        self.mat.mul_vec(v)
    }

    pub(crate) fn check_space(&self, other: &Space) -> Result<()> {
        if same_space(&self.space, other) {
            Ok(())
        } else if self.space.dim() != other.dim() {
            Err(Error::DimensionMismatch { expected: self.space.dim(), found: other.dim() })
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

fn check_shape(space: &Space, mat: &CMatrix) -> Result<()> {
    if mat.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: mat.dim() });
    }
    if !mat.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::StateVector;
    use alloc::vec;

    fn q() -> Space {
        HilbertSpace::new(["0", "1"]).unwrap()
    }

    #[test]
    fn projector_validation() {
        let s = q();
        let p = StateVector::from_real(&s, &[1., 1.]).unwrap().projector();
        assert!(Operator::projector(&s, p.matrix().clone()).is_ok());
        let not_idem = CMatrix::from_diagonal(&[C64::new(0.5, 0.), C64::new(1., 0.)]);
        assert!(matches!(Operator::projector(&s, not_idem), Err(Error::NotProjector(_))));
        let wrong = CMatrix::identity(3);
        assert!(matches!(Operator::projector(&s, wrong), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn unitary_validation() {
        let s = q();
        let h = 0.5f64.sqrt();
        let rot = CMatrix::from_row_major(2, vec![C64::new(h, 0.), C64::new(-h, 0.), C64::new(h, 0.), C64::new(h, 0.)]).unwrap();
        let u = Operator::unitary(&s, rot).unwrap();
        let back = u.adjoint();
        let prod = &back.matrix().clone() * u.matrix();
        assert!(prod.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        let bad = CMatrix::from_diagonal(&[C64::new(1., 0.), C64::new(2., 0.)]);
        assert!(matches!(Operator::unitary(&s, bad), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn complement_and_rank() {
        let dev = HilbertSpace::new(["u", "d"]).unwrap();
        let both = HilbertSpace::tensor(&dev, &q()).unwrap();
        let p = StateVector::from_real(&both, &[1., 0., 0., 1.]).unwrap().projector();
        let c = p.complement().unwrap();
        assert_eq!(p.rank(), 1);
        assert_eq!(c.rank(), 3);
        let sum = p.matrix() + c.matrix();
        assert!(sum.max_abs_diff(&CMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn tensor_keeps_kind() {
        let s = q();
        let p = StateVector::basis(&s, "0").unwrap().projector();
        let i = Operator::identity(&s);
        let pi = p.tensor(&i).unwrap();
        assert_eq!(pi.kind(), OperatorKind::Projector);
        assert_eq!(pi.rank(), 2);
    }
}
