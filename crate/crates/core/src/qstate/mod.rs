//! Dense complex linear algebra over small labeled Hilbert spaces.

mod density;
mod operator;
mod space;
mod vector;

use alloc::vec::Vec;
use core::fmt;

pub use density::DensityMatrix;
pub use operator::{Operator, OperatorKind};
pub use space::{same_space, BasisLabel, HilbertSpace, Space, TENSOR_SEP};
pub use vector::{StateVector, PHASE_ZERO};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::PRUNE;

/// Complex probability amplitude.
pub type Amplitude = linalg::C64;

/// Resolution of the hash grid used to identify states during search and
/// histogramming; the exact amplitudes are kept for arithmetic.
pub const KEY_GRID: f64 = 1e6;

/// Hashable identity of a state up to global phase, on a `1/KEY_GRID` grid.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateKey {
    mixed: bool,
    cells: Vec<i64>,
}

fn grid(x: f64) -> i64 {
    let r = libm::round(x * KEY_GRID) as i64;
    // -0 and 0 land in the same cell
    if r == 0 { 0 } else { r }
}

/// Operations shared by pure and mixed states, so measurement, search and
/// enumeration can be written once.
pub trait QuantumState: Clone + fmt::Debug + Send + Sync {
    fn space(&self) -> &Space;

    /// Born probability `tr(Pρ)` of a projector matrix, clamped to `[0, 1]`.
    fn born(&self, projector: &CMatrix) -> f64;

    /// Lüders update: probability of the outcome and the renormalized post
    /// state, or `None` when the probability is below [`PRUNE`].
    fn project(&self, projector: &CMatrix) -> (f64, Option<Self>);

    /// `U|ψ⟩` or `UρU†`.
    fn evolve(&self, unitary: &CMatrix) -> Self;

    /// `|⟨t|ψ⟩|²` or `⟨t|ρ|t⟩`.
    fn fidelity(&self, target: &StateVector) -> f64;

    fn canonical(&self) -> Self;

    fn key(&self) -> StateKey;

    /// Checks the normalization (and for mixed states Hermiticity and PSD) invariants.
    fn validate(&self) -> Result<()>;

    fn to_density(&self) -> DensityMatrix;
}

impl QuantumState for StateVector {
    fn space(&self) -> &Space {
        StateVector::space(self)
    }

    fn born(&self, projector: &CMatrix) -> f64 {
        projector.sandwich(self.amplitudes(), self.amplitudes()).re.clamp(0.0, 1.0)
    }

    fn project(&self, projector: &CMatrix) -> (f64, Option<Self>) {
        let v = projector.mul_vec(self.amplitudes());
        let p = linalg::norm_sqr(&v);
        if p < PRUNE {
            return (p.clamp(0.0, 1.0), None);
        }
        let inv = 1.0 / libm::sqrt(p);
        let post = StateVector::from_normalized(self.space().clone(), v.into_iter().map(|z| z * inv).collect());
        (p.clamp(0.0, 1.0), Some(post))
    }

    fn evolve(&self, unitary: &CMatrix) -> Self {
        StateVector::from_normalized(self.space().clone(), unitary.mul_vec(self.amplitudes()))
    }

    fn fidelity(&self, target: &StateVector) -> f64 {
        StateVector::fidelity(self, target)
    }

    fn canonical(&self) -> Self {
        StateVector::canonical(self)
    }

    fn key(&self) -> StateKey {
        let amps = self.amplitudes();
        let pivot = amps.iter().find(|z| z.norm() > 1.0 / KEY_GRID);
        let rot = pivot.map_or(linalg::ONE, |p| p.conj() / p.norm());
        let cells = amps.iter().flat_map(|z| {
            let w = z * rot;
            [grid(w.re), grid(w.im)]
        });
        StateKey { mixed: false, cells: cells.collect() }
    }

    fn validate(&self) -> Result<()> {
        let n = self.norm_sqr();
        if !n.is_finite() {
            return Err(Error::NonFinite);
        }
        if (n - 1.0).abs() > crate::TOL {
            return Err(Error::InvalidArgument(alloc::format!("state norm² is {n}, not 1")));
        }
        Ok(())
    }

    fn to_density(&self) -> DensityMatrix {
        DensityMatrix::pure(self)
    }
}

impl QuantumState for DensityMatrix {
    fn space(&self) -> &Space {
        DensityMatrix::space(self)
    }

    fn born(&self, projector: &CMatrix) -> f64 {
        (projector * self.matrix()).trace().re.clamp(0.0, 1.0)
    }

    fn project(&self, projector: &CMatrix) -> (f64, Option<Self>) {
        let m = &(projector * self.matrix()) * projector;
        let p = m.trace().re;
        if p < PRUNE {
            return (p.clamp(0.0, 1.0), None);
        }
        let post = DensityMatrix::from_parts(self.space().clone(), m.scale(linalg::C64::new(1.0 / p, 0.0)));
        (p.clamp(0.0, 1.0), Some(post))
    }

    fn evolve(&self, unitary: &CMatrix) -> Self {
        let m = &(unitary * self.matrix()) * &unitary.adjoint();
        DensityMatrix::from_parts(self.space().clone(), m)
    }

    fn fidelity(&self, target: &StateVector) -> f64 {
        DensityMatrix::fidelity(self, target)
    }

    fn canonical(&self) -> Self {
        self.clone()
    }

    fn key(&self) -> StateKey {
        let cells = self.matrix().as_slice().iter().flat_map(|z| [grid(z.re), grid(z.im)]);
        StateKey { mixed: true, cells: cells.collect() }
    }

    fn validate(&self) -> Result<()> {
        DensityMatrix::validate(self)
    }

    fn to_density(&self) -> DensityMatrix {
        self.clone()
    }
}

/// Either kind of state, for inputs whose kind is only known at run time
/// (scenario files, the command line).
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl From<StateVector> for State {
    fn from(s: StateVector) -> Self {
        State::Pure(s)
    }
}

impl From<DensityMatrix> for State {
    fn from(s: DensityMatrix) -> Self {
        State::Mixed(s)
    }
}

impl State {
    pub fn as_pure(&self) -> Option<&StateVector> {
        match self {
            State::Pure(s) => Some(s),
            State::Mixed(_) => None,
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, State::Pure(_))
    }
}

impl QuantumState for State {
    fn space(&self) -> &Space {
        match self {
            State::Pure(s) => QuantumState::space(s),
            State::Mixed(s) => QuantumState::space(s),
        }
    }

    fn born(&self, projector: &CMatrix) -> f64 {
        match self {
            State::Pure(s) => s.born(projector),
            State::Mixed(s) => s.born(projector),
        }
    }

    fn project(&self, projector: &CMatrix) -> (f64, Option<Self>) {
        match self {
            State::Pure(s) => {
                let (p, post) = s.project(projector);
                (p, post.map(State::Pure))
            }
            State::Mixed(s) => {
                let (p, post) = s.project(projector);
                (p, post.map(State::Mixed))
            }
        }
    }

    fn evolve(&self, unitary: &CMatrix) -> Self {
        match self {
            State::Pure(s) => State::Pure(s.evolve(unitary)),
            State::Mixed(s) => State::Mixed(s.evolve(unitary)),
        }
    }

    fn fidelity(&self, target: &StateVector) -> f64 {
        match self {
            State::Pure(s) => QuantumState::fidelity(s, target),
            State::Mixed(s) => QuantumState::fidelity(s, target),
        }
    }

    fn canonical(&self) -> Self {
        match self {
            State::Pure(s) => State::Pure(QuantumState::canonical(s)),
            State::Mixed(s) => State::Mixed(s.clone()),
        }
    }

    fn key(&self) -> StateKey {
        match self {
            State::Pure(s) => s.key(),
            State::Mixed(s) => s.key(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            State::Pure(s) => QuantumState::validate(s),
            State::Mixed(s) => QuantumState::validate(s),
        }
    }

    fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(s) => s.to_density(),
            State::Mixed(s) => s.clone(),
        }
    }
}

/// `⟨ψ|P|ψ⟩` or `tr(Pρ)`, clamped to `[0, 1]`.
pub fn overlap_probability<S: QuantumState>(x: &S, projector: &Operator) -> Result<f64> {
    if !projector.is_projector() {
        return Err(Error::NotProjector("overlap_probability needs a projector".into()));
    }
    projector.check_space(x.space())?;
    Ok(x.born(projector.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_probability_examples() {
        let s = HilbertSpace::new(["L", "D"]).unwrap();
        let l = StateVector::basis(&s, "L").unwrap();
        let d = StateVector::basis(&s, "D").unwrap();
        let p_s = StateVector::from_real(&s, &[1., 1.]).unwrap().projector();
        assert!((overlap_probability(&d, &p_s).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(overlap_probability(&l, &l.projector()).unwrap(), 1.0);

        let other = HilbertSpace::new(["a", "b", "c"]).unwrap();
        let p3 = StateVector::basis(&other, "a").unwrap().projector();
        assert!(matches!(overlap_probability(&l, &p3), Err(Error::DimensionMismatch { .. })));
        let u = Operator::general(&s, CMatrix::identity(2)).unwrap();
        assert!(matches!(overlap_probability(&l, &u), Err(Error::NotProjector(_))));
    }

    #[test]
    fn keys_ignore_global_phase() {
        let s = HilbertSpace::new(["L", "D"]).unwrap();
        let a = StateVector::new(&s, alloc::vec![Amplitude::new(0.6, 0.), Amplitude::new(0., 0.8)]).unwrap();
        let b = StateVector::new(&s, alloc::vec![Amplitude::new(0., 0.6), Amplitude::new(-0.8, 0.)]).unwrap();
        assert_eq!(a.key(), b.key());
        let c = StateVector::from_real(&s, &[0.6, 0.8]).unwrap();
        assert_ne!(a.key(), c.key());
        assert_ne!(c.key(), DensityMatrix::pure(&c).key());
    }

    #[test]
    fn mixed_projection_is_luders() {
        let s = HilbertSpace::new(["L", "D"]).unwrap();
        let rho = DensityMatrix::mixture(&[
            (0.5, StateVector::basis(&s, "L").unwrap()),
            (0.5, StateVector::basis(&s, "D").unwrap()),
        ])
        .unwrap();
        let plus = StateVector::from_real(&s, &[1., 1.]).unwrap();
        let (p, post) = rho.project(plus.projector().matrix());
        assert!((p - 0.5).abs() < 1e-15);
        let post = post.unwrap();
        assert!(post.matrix().max_abs_diff(plus.projector().matrix()) < 1e-15);
        assert!(QuantumState::validate(&post).is_ok());
    }
}
