//! JSON forms of states, density matrices and operators.
//!
//! Every form carries the basis `labels` (plus `factors` for product spaces)
//! and `re`/`im` arrays, row-major for matrices. Floats are written in
//! shortest round-trip form, so decoding reproduces the encoded bits.

use catlab_core::linalg::{CMatrix, C64};
use catlab_core::qstate::{DensityMatrix, HilbertSpace, Operator, OperatorKind, Space, State, StateVector};
use catlab_core::{Error, OutcomeRecord, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<String>>>,
}

impl Basis {
    pub fn of(space: &Space) -> Self {
        let labels = space.labels().iter().map(|l| l.as_str().to_owned()).collect();
        let factors = space
            .is_product()
            .then(|| space.factors().iter().map(|f| f.iter().map(|l| l.as_str().to_owned()).collect()).collect());
        Basis { labels, factors }
    }

    pub fn to_space(&self) -> Result<Space> {
        match &self.factors {
            Some(f) => {
                let space = HilbertSpace::product(f.clone())?;
                let same = space.labels().iter().map(|l| l.as_str()).eq(self.labels.iter().map(String::as_str));
                if !same {
                    return Err(Error::InvalidSpace("labels disagree with the factors".into()));
                }
                Ok(space)
            }
            None => HilbertSpace::new(self.labels.clone()),
        }
    }
}

fn split(values: &[C64]) -> (Vec<f64>, Vec<f64>) {
    values.iter().map(|z| (z.re, z.im)).unzip()
}

fn join(re: &[f64], im: &[f64]) -> Result<Vec<C64>> {
    if re.len() != im.len() {
        return Err(Error::DimensionMismatch { expected: re.len(), found: im.len() });
    }
    Ok(re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect())
}

fn square(space: &Space, values: Vec<C64>) -> Result<CMatrix> {
    let dim = space.dim();
    if values.len() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, found: values.len() });
    }
    Ok(CMatrix::from_row_major(dim, values).expect("length checked"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    #[serde(flatten)]
    pub basis: Basis,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&StateVector> for VectorJson {
    fn from(psi: &StateVector) -> Self {
        let (re, im) = split(psi.amplitudes());
        VectorJson { basis: Basis::of(psi.space()), re, im }
    }
}

impl VectorJson {
    pub fn decode(&self) -> Result<StateVector> {
        StateVector::new(&self.basis.to_space()?, join(&self.re, &self.im)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(flatten)]
    pub basis: Basis,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn new(space: &Space, m: &CMatrix) -> Self {
        let (re, im) = split(m.as_slice());
        MatrixJson { basis: Basis::of(space), re, im }
    }

    pub fn decode(&self) -> Result<(Space, CMatrix)> {
        let space = self.basis.to_space()?;
        let m = square(&space, join(&self.re, &self.im)?)?;
        Ok((space, m))
    }

    pub fn decode_density(&self) -> Result<DensityMatrix> {
        let (space, m) = self.decode()?;
        DensityMatrix::from_matrix(&space, m)
    }
}

impl From<&DensityMatrix> for MatrixJson {
    fn from(rho: &DensityMatrix) -> Self {
        MatrixJson::new(rho.space(), rho.matrix())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateJson {
    Pure(VectorJson),
    Mixed(MatrixJson),
}

impl From<&State> for StateJson {
    fn from(s: &State) -> Self {
        match s {
            State::Pure(p) => StateJson::Pure(p.into()),
            State::Mixed(m) => StateJson::Mixed(m.into()),
        }
    }
}

impl StateJson {
    pub fn decode(&self) -> Result<State> {
        Ok(match self {
            StateJson::Pure(v) => State::Pure(v.decode()?),
            StateJson::Mixed(m) => State::Mixed(m.decode_density()?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindJson {
    Projector,
    Unitary,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub kind: KindJson,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

impl From<&Operator> for OperatorJson {
    fn from(op: &Operator) -> Self {
        let kind = match op.kind() {
            OperatorKind::Projector => KindJson::Projector,
            OperatorKind::Unitary => KindJson::Unitary,
            OperatorKind::General => KindJson::General,
        };
        OperatorJson { kind, matrix: MatrixJson::new(op.space(), op.matrix()) }
    }
}

impl OperatorJson {
    /// Rebuilds the operator, re-checking the invariant its kind promises.
    pub fn decode(&self) -> Result<Operator> {
        let (space, m) = self.matrix.decode()?;
        match self.kind {
            KindJson::Projector => Operator::projector(&space, m),
            KindJson::Unitary => Operator::unitary(&space, m),
            KindJson::General => Operator::general(&space, m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeJson {
    pub label: String,
    pub probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_state: Option<StateJson>,
}

impl From<&OutcomeRecord<State>> for OutcomeJson {
    fn from(r: &OutcomeRecord<State>) -> Self {
        OutcomeJson { label: r.label.clone(), probability: r.probability, post_state: r.post_state.as_ref().map(Into::into) }
    }
}
