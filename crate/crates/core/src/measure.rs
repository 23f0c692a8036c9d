//! Projective measurements: Born-rule distributions, Lüders post states and
//! seeded sampling.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::qstate::{Operator, OperatorKind, QuantumState, Space, StateVector};
use crate::rng::RandomStream;
use crate::{MATCH_TOL, PRUNE};

/// Label of the outcome appended when the declared projectors do not resolve the identity.
pub const COMPLEMENT_LABEL: &str = "⊥";

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub projector: Operator,
}

/// Complete set of mutually orthogonal projectors with outcome labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    space: Space,
    outcomes: Vec<Outcome>,
}

impl ProjectiveMeasurement {
    /// Validates orthogonality and appends a `⊥` outcome for `I - ΣP` when the
    /// projectors are incomplete.
    pub fn new(space: &Space, outcomes: Vec<(String, Operator)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidArgument("a measurement needs at least one outcome".into()));
        }
        let mut seen: Vec<&str> = Vec::new();
        for (label, p) in &outcomes {
            if label.is_empty() {
                return Err(Error::InvalidArgument("empty outcome label".into()));
            }
            if seen.contains(&label.as_str()) {
                return Err(Error::DuplicateName(label.clone()));
            }
            seen.push(label);
            p.check_space(space)?;
            if p.kind() != OperatorKind::Projector {
                return Err(Error::NotProjector(format!("outcome `{label}` is not a projector")));
            }
        }
        for i in 0..outcomes.len() {
            for j in (i + 1)..outcomes.len() {
                let prod = outcomes[i].1.matrix() * outcomes[j].1.matrix();
                let worst = prod.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
                if worst > MATCH_TOL {
                    return Err(Error::NotOrthogonal { first: i, second: j, overlap: worst });
                }
            }
        }
        let mut sum = CMatrix::zeros(space.dim());
        for (_, p) in &outcomes {
            sum = &sum + p.matrix();
        }
        let covered = libm::round(sum.trace().re) as usize;
        let mut outcomes: Vec<Outcome> =
            outcomes.into_iter().map(|(label, projector)| Outcome { label, projector }).collect();
        if covered < space.dim() {
            if outcomes.iter().any(|o| o.label == COMPLEMENT_LABEL) {
                return Err(Error::DuplicateName(COMPLEMENT_LABEL.into()));
            }
            let rest = Operator::projector(space, &CMatrix::identity(space.dim()) - &sum)?;
            outcomes.push(Outcome { label: COMPLEMENT_LABEL.into(), projector: rest });
        } else if sum.max_abs_diff(&CMatrix::identity(space.dim())) > MATCH_TOL {
            return Err(Error::NotProjector("projectors over-cover the identity".into()));
        }
        Ok(ProjectiveMeasurement { space: space.clone(), outcomes })
    }

    /// One rank-1 projector per state, completed with `⊥` if needed.
    pub fn from_states(states: &[StateVector], labels: &[&str]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidArgument("no states given".into()))?;
        if states.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} states but {} labels",
                states.len(),
                labels.len()
            )));
        }
        let space = first.space().clone();
        if states.len() > space.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} states exceed dimension {}",
                states.len(),
                space.dim()
            )));
        }
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate().skip(i + 1) {
                let overlap = a.inner(b)?.norm();
                if overlap > MATCH_TOL {
                    return Err(Error::NotOrthogonal { first: i, second: j, overlap });
                }
            }
        }
        let outcomes = states
            .iter()
            .zip(labels)
            .map(|(s, l)| (l.to_string(), s.projector()))
            .collect();
        Self::new(&space, outcomes)
    }

    /// Measurement in the declared basis, outcomes named after the basis labels.
    pub fn basis(space: &Space) -> Self {
        let outcomes = (0..space.dim())
            .map(|i| Outcome {
                label: space.labels()[i].as_str().into(),
                projector: StateVector::basis_index(space, i).projector(),
            })
            .collect();
        ProjectiveMeasurement { space: space.clone(), outcomes }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.outcomes.iter().map(|o| o.label.as_str())
    }

    pub fn projector(&self, label: &str) -> Option<&Operator> {
        self.outcomes.iter().find(|o| o.label == label).map(|o| &o.projector)
    }
}

/// One outcome of a measurement applied to a state.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord<S> {
    pub label: String,
    pub probability: f64,
    /// Absent when the probability is below [`PRUNE`].
    pub post_state: Option<S>,
}

/// Born probabilities and Lüders post states for every outcome, in declaration order.
pub fn outcome_distribution<S: QuantumState>(m: &ProjectiveMeasurement, x: &S) -> Result<Vec<OutcomeRecord<S>>> {
    if !crate::qstate::same_space(m.space(), x.space()) {
        return Err(if m.space().dim() != x.space().dim() {
            Error::DimensionMismatch { expected: m.space().dim(), found: x.space().dim() }
        } else {
            Error::SpaceMismatch
        });
    }
    Ok(m.outcomes
        .iter()
        .map(|o| {
            let (probability, post_state) = x.project(o.projector.matrix());
            OutcomeRecord { label: o.label.clone(), probability, post_state }
        })
        .collect())
}

/// Inverse-CDF pick of an index with probability at least [`PRUNE`].
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p < PRUNE {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Draws one outcome using the stream's next uniform; returns the index into
/// `m.outcomes()`, the label and the post state.
pub fn sample_outcome<S: QuantumState>(
    m: &ProjectiveMeasurement,
    x: &S,
    rng: &mut RandomStream,
) -> Result<(usize, String, S)> {
    let dist = outcome_distribution(m, x)?;
    let probs: Vec<f64> = dist.iter().map(|r| r.probability).collect();
    let idx = sample_index(&probs, rng.uniform());
    let rec = dist.into_iter().nth(idx).expect("index from distribution");
    let post = rec
        .post_state
        .ok_or_else(|| Error::InvalidArgument("state has no outcome with nonzero probability".into()))?;
    Ok((idx, rec.label, post))
}
