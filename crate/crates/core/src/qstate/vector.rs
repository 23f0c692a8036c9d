use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::qstate::space::{same_space, HilbertSpace, Space};
use crate::qstate::{Operator, OperatorKind};

/// Amplitudes below this modulus count as zero when fixing the global phase.
pub const PHASE_ZERO: f64 = 1e-12;

const UNIT_SLACK: f64 = 1e-14;

/// Normalized pure state over a labeled basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: Space,
    amps: Vec<C64>,
}

impl StateVector {
    /// Normalizes `raw` into a state on `space`, keeping relative phases.
    pub fn new(space: &Space, raw: Vec<C64>) -> Result<Self> {
        if raw.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: raw.len() });
        }
        if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n2 = linalg::norm_sqr(&raw);
        if n2 < 1e-20 {
            return Err(Error::ZeroVector);
        }
        // already unit norm to rounding: keep the bits, so serialized states reload exactly
        if (n2 - 1.0).abs() <= UNIT_SLACK {
            return Ok(StateVector { space: space.clone(), amps: raw });
        }
        let inv = 1.0 / libm::sqrt(n2);
        Ok(StateVector { space: space.clone(), amps: raw.into_iter().map(|z| z * inv).collect() })
    }

    /// Real amplitudes, convenience for tests and catalogs.
    pub fn from_real(space: &Space, raw: &[f64]) -> Result<Self> {
        Self::new(space, raw.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn basis(space: &Space, label: &str) -> Result<Self> {
        let idx = space
            .index_of(label)
            .ok_or_else(|| Error::UnknownName(label.into()))?;
        Ok(Self::basis_index(space, idx))
    }

    pub(crate) fn basis_index(space: &Space, idx: usize) -> Self {
        let mut amps = alloc::vec![linalg::ZERO; space.dim()];
        amps[idx] = linalg::ONE;
        StateVector { space: space.clone(), amps }
    }

    /// Wraps amplitudes already known to be unit norm.
    pub(crate) fn from_normalized(space: Space, amps: Vec<C64>) -> Self {
        debug_assert_eq!(space.dim(), amps.len());
        StateVector { space, amps }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.amps)
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_space(other.space())?;
        Ok(linalg::inner(&self.amps, &other.amps))
    }

    /// `|⟨self|other⟩|²`; zero for states on different spaces.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        if !same_space(&self.space, &other.space) {
            return 0.0;
        }
        linalg::inner(&self.amps, &other.amps).norm_sqr()
    }

    /// Same ray up to global phase, within [`MATCH_TOL`](crate::MATCH_TOL).
    pub fn same_ray(&self, other: &StateVector) -> bool {
        self.fidelity(other) > 1.0 - crate::MATCH_TOL
    }

    /// Representative with the first non-negligible amplitude real and positive.
    pub fn canonical(&self) -> StateVector {
        match self.amps.iter().find(|z| z.norm() > PHASE_ZERO) {
            Some(pivot) => {
                let rot = pivot.conj() / pivot.norm();
                let mut amps: Vec<C64> = self.amps.iter().map(|z| z * rot).collect();
                let k = self.amps.iter().position(|z| z.norm() > PHASE_ZERO).unwrap_or(0);
                amps[k] = C64::new(amps[k].norm(), 0.0);
                StateVector { space: self.space.clone(), amps }
            }
            None => self.clone(),
        }
    }

    /// Kronecker product; the result lives on the product space.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let space = HilbertSpace::tensor(&self.space, &other.space)?;
        Ok(StateVector { space, amps: linalg::kron_vec(&self.amps, &other.amps) })
    }

    /// Rank-1 projector `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> Operator {
        Operator::from_parts(self.space.clone(), CMatrix::outer(&self.amps, &self.amps), OperatorKind::Projector)
    }

    /// Unit state in `span(basis)` orthogonal to `self`, canonical phase.
    ///
    /// `basis` must be orthonormal and `self` must lie in its span.
    pub fn orthogonal_in_span(&self, basis: (&StateVector, &StateVector)) -> Result<StateVector> {
        let (e1, e2) = basis;
        self.check_space(e1.space())?;
        self.check_space(e2.space())?;
        if e1.inner(e2)?.norm() > crate::MATCH_TOL {
            return Err(Error::NotOrthogonal { first: 0, second: 1, overlap: e1.inner(e2)?.norm() });
        }
        let c1 = linalg::inner(&e1.amps, &self.amps);
        let c2 = linalg::inner(&e2.amps, &self.amps);
        let residual: f64 = self
            .amps
            .iter()
            .zip(e1.amps.iter().zip(&e2.amps))
            .map(|(s, (a, b))| (s - c1 * a - c2 * b).norm_sqr())
            .sum::<f64>();
        let residual = libm::sqrt(residual);
        if residual > crate::MATCH_TOL {
            return Err(Error::NotInSpan { residual });
        }
        let raw: Vec<C64> = e1
            .amps
            .iter()
            .zip(&e2.amps)
            .map(|(a, b)| -c2.conj() * a + c1.conj() * b)
            .collect();
        Ok(StateVector::new(&self.space, raw)?.canonical())
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
