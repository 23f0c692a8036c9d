//! Laboratories (declared operations plus forbidden transitions) and the
//! executable no-go check.
//!
//! A [`Laboratory`] lists the measurements and unitaries that can be
//! performed and the evolutions `from → to` that are known to be impossible.
//! [`find_steering_path`] searches the outcome graph generated by the lab's
//! operations for a sequence of outcomes that carries one state to another.
//! [`nogo_verdict`] adjoins a candidate projector to the lab and reports
//! whether doing so makes a forbidden transition reachable.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::measure::{outcome_distribution, ProjectiveMeasurement};
use crate::protocols::{enumerate, leaf_mass, ProtocolSpec};
use crate::qstate::{same_space, Operator, OperatorKind, QuantumState, Space, StateKey, StateVector};
use crate::{MATCH_TOL, PRUNE};

pub const DEFAULT_MAX_DEPTH: usize = 8;
pub const DEFAULT_MIN_PROB: f64 = 1e-12;

/// Relative slack under which two path probabilities count as tied.
const TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ForbiddenTransition {
    pub from: StateVector,
    pub to: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LabOperation {
    Measurement { name: String, measurement: ProjectiveMeasurement },
    Unitary { name: String, unitary: Operator },
}

impl LabOperation {
    pub fn name(&self) -> &str {
        match self {
            LabOperation::Measurement { name, .. } | LabOperation::Unitary { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Laboratory {
    space: Space,
    operations: Vec<LabOperation>,
    forbidden: Vec<ForbiddenTransition>,
}

impl Laboratory {
    pub fn new(space: &Space) -> Self {
        Laboratory { space: space.clone(), operations: Vec::new(), forbidden: Vec::new() }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn add_measurement(&mut self, name: impl Into<String>, m: ProjectiveMeasurement) -> Result<()> {
        let name = name.into();
        self.check_new(&name, m.space())?;
        self.operations.push(LabOperation::Measurement { name, measurement: m });
        Ok(())
    }

    pub fn add_unitary(&mut self, name: impl Into<String>, u: Operator) -> Result<()> {
        let name = name.into();
        self.check_new(&name, u.space())?;
        if u.kind() != OperatorKind::Unitary {
            return Err(Error::NotUnitary(format!("`{name}` was not validated as unitary")));
        }
        self.operations.push(LabOperation::Unitary { name, unitary: u });
        Ok(())
    }

    /// Declares `from → to` impossible; the two states must be orthogonal.
    pub fn forbid(&mut self, from: StateVector, to: StateVector) -> Result<()> {
        from.check_space(&self.space)?;
        to.check_space(&self.space)?;
        let overlap = from.inner(&to)?.norm();
        if overlap >= MATCH_TOL {
            return Err(Error::InvalidTransition(format!(
                "forbidden endpoints must be orthogonal (overlap {overlap:e})"
            )));
        }
        self.forbidden.push(ForbiddenTransition { from, to });
        Ok(())
    }

    pub fn with_measurement(mut self, name: impl Into<String>, m: ProjectiveMeasurement) -> Result<Self> {
        self.add_measurement(name, m)?;
        Ok(self)
    }

    pub fn with_unitary(mut self, name: impl Into<String>, u: Operator) -> Result<Self> {
        self.add_unitary(name, u)?;
        Ok(self)
    }

    pub fn with_forbidden(mut self, from: StateVector, to: StateVector) -> Result<Self> {
        self.forbid(from, to)?;
        Ok(self)
    }

    /// Copy of the lab with one more measurement appended.
    pub fn adjoin(&self, name: impl Into<String>, m: ProjectiveMeasurement) -> Result<Self> {
        self.clone().with_measurement(name, m)
    }

    pub fn operations(&self) -> &[LabOperation] {
        &self.operations
    }

    pub fn forbidden(&self) -> &[ForbiddenTransition] {
        &self.forbidden
    }

    pub fn measurement(&self, name: &str) -> Option<&ProjectiveMeasurement> {
        self.operations.iter().find_map(|op| match op {
            LabOperation::Measurement { name: n, measurement } if n == name => Some(measurement),
            _ => None,
        })
    }

    pub fn unitary(&self, name: &str) -> Option<&Operator> {
        self.operations.iter().find_map(|op| match op {
            LabOperation::Unitary { name: n, unitary } if n == name => Some(unitary),
            _ => None,
        })
    }

    pub fn is_forbidden(&self, from: &StateVector, to: &StateVector) -> bool {
        self.forbidden.iter().any(|t| t.from.same_ray(from) && t.to.same_ray(to))
    }

    /// Some declared outcome projector accepts `l` with certainty and rejects `d`.
    pub fn discriminates(&self, l: &StateVector, d: &StateVector) -> bool {
        self.operations.iter().any(|op| match op {
            LabOperation::Measurement { measurement, .. } => measurement.outcomes().iter().any(|o| {
                let p = o.projector.matrix();
                l.born(p) > 1.0 - MATCH_TOL && d.born(p) < MATCH_TOL
            }),
            LabOperation::Unitary { .. } => false,
        })
    }

    fn check_new(&self, name: &str, space: &Space) -> Result<()> {
        if name.is_empty() {
            return Err(Error::InvalidArgument("operation name must be nonempty".into()));
        }
        if self.operations.iter().any(|op| op.name() == name) {
            return Err(Error::DuplicateName(name.into()));
        }
        if !same_space(&self.space, space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }
}

/// Conditions of the no-go argument: `L ⊥ D`, the lab can tell them apart,
/// and `D → L` is declared forbidden.
pub fn check_conditions(lab: &Laboratory, l: &StateVector, d: &StateVector) -> Result<bool> {
    l.check_space(lab.space())?;
    d.check_space(lab.space())?;
    let orthogonal = l.inner(d)?.norm() < MATCH_TOL;
    Ok(orthogonal && lab.discriminates(l, d) && lab.is_forbidden(d, l))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub operation: String,
    /// Outcome label; `None` for a unitary step.
    pub outcome: Option<String>,
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Some(o) => write!(f, "{}:{}", self.operation, o),
            None => f.write_str(&self.operation),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringPath {
    pub steps: Vec<PathStep>,
    /// Product of the branch probabilities along `steps`.
    pub probability: f64,
    pub final_state: StateVector,
}

impl SteeringPath {
    pub fn depth(&self) -> usize {
        self.steps.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub path: Option<SteeringPath>,
    /// The depth limit stopped the search while unexplored states remained.
    pub bound_reached: bool,
    /// Distinct canonical states expanded.
    pub states_visited: usize,
}

struct Node {
    state: StateVector,
    probability: f64,
    parent: Option<usize>,
    step: Option<PathStep>,
}

/// Breadth-first search for a minimal-depth outcome sequence taking `from`
/// to `to` with probability at least `min_prob`.
///
/// States are identified up to global phase on a `1e-6` amplitude grid; for
/// each identity only the most probable path is expanded. Among hits at the
/// minimal depth the most probable wins, ties going to the first found in
/// declaration order of operations and outcomes.
pub fn find_steering_path(
    lab: &Laboratory,
    from: &StateVector,
    to: &StateVector,
    max_depth: usize,
    min_prob: f64,
) -> Result<SearchResult> {
    if max_depth == 0 {
        return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
    }
    if !(min_prob > 0.0 && min_prob <= 1.0) {
        return Err(Error::InvalidArgument(format!("min_prob {min_prob} outside (0, 1]")));
    }
    from.check_space(lab.space())?;
    to.check_space(lab.space())?;

    let mut arena = alloc::vec![Node { state: from.canonical(), probability: 1.0, parent: None, step: None }];
    if from.same_ray(to) {
        return Ok(SearchResult { path: Some(rebuild(&arena, 0)), bound_reached: false, states_visited: 1 });
    }
    let mut best: BTreeMap<StateKey, (f64, usize)> = BTreeMap::new();
    best.insert(arena[0].state.key(), (1.0, 0));
    let mut frontier = alloc::vec![0usize];

    for _depth in 1..=max_depth {
        let mut next: Vec<usize> = Vec::new();
        let mut hit: Option<usize> = None;
        for &parent in &frontier {
            for op in lab.operations() {
                for (step, prob, child) in expand(op, &arena[parent].state)? {
                    let probability = arena[parent].probability * prob;
                    if probability < min_prob {
                        continue;
                    }
                    let is_hit = child.same_ray(to);
                    if !is_hit {
                        if let Some(&(b, _)) = best.get(&child.key()) {
                            if probability <= b * (1.0 + TIE) {
                                continue;
                            }
                        }
                    }
                    let idx = arena.len();
                    arena.push(Node { state: child, probability, parent: Some(parent), step: Some(step) });
                    if is_hit {
                        let better = hit.is_none_or(|h| probability > arena[h].probability * (1.0 + TIE));
                        if better {
                            hit = Some(idx);
                        }
                    } else {
                        best.insert(arena[idx].state.key(), (probability, idx));
                        next.push(idx);
                    }
                }
            }
        }
        if let Some(h) = hit {
            return Ok(SearchResult { path: Some(rebuild(&arena, h)), bound_reached: false, states_visited: best.len() });
        }
        // Only the most probable representative of each state survives.
        next.retain(|&i| best.get(&arena[i].state.key()).is_some_and(|&(_, owner)| owner == i));
        if next.is_empty() {
            return Ok(SearchResult { path: None, bound_reached: false, states_visited: best.len() });
        }
        frontier = next;
    }
    Ok(SearchResult { path: None, bound_reached: true, states_visited: best.len() })
}

fn expand(op: &LabOperation, state: &StateVector) -> Result<Vec<(PathStep, f64, StateVector)>> {
    match op {
        LabOperation::Measurement { name, measurement } => Ok(outcome_distribution(measurement, state)?
            .into_iter()
            .filter(|r| r.probability >= PRUNE)
            .filter_map(|r| {
                let post = r.post_state?.canonical();
                Some((PathStep { operation: name.clone(), outcome: Some(r.label) }, r.probability, post))
            })
            .collect()),
        LabOperation::Unitary { name, unitary } => Ok(alloc::vec![(
            PathStep { operation: name.clone(), outcome: None },
            1.0,
            state.evolve(unitary.matrix()).canonical(),
        )]),
    }
}

fn rebuild(arena: &[Node], leaf: usize) -> SteeringPath {
    let mut steps = Vec::new();
    let mut cur = leaf;
    while let Some(parent) = arena[cur].parent {
        steps.push(arena[cur].step.clone().expect("non-root node has a step"));
        cur = parent;
    }
    steps.reverse();
    SteeringPath { steps, probability: arena[leaf].probability, final_state: arena[leaf].state.clone() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoGoVerdict {
    pub operator_name: String,
    /// Adjoining the candidate makes the forbidden `D → L` reachable.
    pub violated: bool,
    pub witness: Option<SteeringPath>,
    /// No witness was found but the depth bound cut the search short.
    pub bound_reached: bool,
}

/// Adjoins `{candidate, I - candidate}` (outcomes `S` and `⊥`) and searches for `D → L`.
pub fn nogo_verdict(
    lab: &Laboratory,
    name: &str,
    candidate: &Operator,
    l: &StateVector,
    d: &StateVector,
    max_depth: usize,
) -> Result<NoGoVerdict> {
    if !candidate.is_projector() {
        return Err(Error::NotProjector(format!("candidate `{name}` is not a projector")));
    }
    let m = ProjectiveMeasurement::new(candidate.space(), alloc::vec![("S".into(), candidate.clone())])?;
    nogo_verdict_for_measurement(lab, name, &m, l, d, max_depth)
}

/// As [`nogo_verdict`], adjoining a whole measurement.
pub fn nogo_verdict_for_measurement(
    lab: &Laboratory,
    name: &str,
    candidate: &ProjectiveMeasurement,
    l: &StateVector,
    d: &StateVector,
    max_depth: usize,
) -> Result<NoGoVerdict> {
    if !check_conditions(lab, l, d)? {
        return Err(Error::PreconditionFailed(
            "L and D must be orthogonal, discriminated by the lab, and D -> L must be forbidden".into(),
        ));
    }
    // a candidate the lab already owns is searched as is
    let extended = match lab.measurement(name) {
        Some(own) if own == candidate => lab.clone(),
        _ => lab.adjoin(name, candidate.clone())?,
    };
    let search = find_steering_path(&extended, d, l, max_depth, DEFAULT_MIN_PROB)?;
    Ok(NoGoVerdict {
        operator_name: name.into(),
        violated: search.path.is_some(),
        witness: search.path,
        bound_reached: search.bound_reached,
    })
}

/// Exact probability of ending in `to`, summed over all leaves of the protocol's outcome tree.
pub fn total_reach_probability(
    lab: &Laboratory,
    from: &StateVector,
    to: &StateVector,
    protocol: &ProtocolSpec,
) -> Result<f64> {
    let tree = enumerate(protocol, lab, from)?;
    Ok(leaf_mass(&tree, to))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::Step;
    use crate::qstate::HilbertSpace;

    fn cat() -> Space {
        HilbertSpace::new(["alive", "dead"]).unwrap()
    }

    fn basis_lab(s: &Space) -> Laboratory {
        let l = StateVector::basis(s, "alive").unwrap();
        let d = StateVector::basis(s, "dead").unwrap();
        Laboratory::new(s)
            .with_measurement("P_L", ProjectiveMeasurement::basis(s))
            .unwrap()
            .with_forbidden(d, l)
            .unwrap()
    }

    fn ps_lab(s: &Space, a: f64, b: f64) -> Laboratory {
        let ps = StateVector::from_real(s, &[a, b]).unwrap();
        let l = StateVector::basis(s, "alive").unwrap();
        Laboratory::new(s)
            .with_measurement("P_S", ProjectiveMeasurement::from_states(&[ps], &["S"]).unwrap())
            .unwrap()
            .with_measurement("P_L", ProjectiveMeasurement::from_states(&[l], &["L"]).unwrap())
            .unwrap()
    }

    #[test]
    fn conditions_examples() {
        let s = cat();
        let lab = basis_lab(&s);
        let l = StateVector::basis(&s, "alive").unwrap();
        let d = StateVector::basis(&s, "dead").unwrap();
        assert!(check_conditions(&lab, &l, &d).unwrap());
        assert!(!check_conditions(&lab, &l, &l).unwrap());
        let plus = StateVector::from_real(&s, &[1., 1.]).unwrap();
        let minus = StateVector::from_real(&s, &[1., -1.]).unwrap();
        assert!(!check_conditions(&lab, &plus, &minus).unwrap());
        // reversed roles: alive -> dead is not declared forbidden
        assert!(!check_conditions(&lab, &d, &l).unwrap());
    }

    #[test]
    fn forbid_requires_orthogonal_endpoints() {
        let s = cat();
        let l = StateVector::basis(&s, "alive").unwrap();
        let plus = StateVector::from_real(&s, &[1., 1.]).unwrap();
        assert!(matches!(Laboratory::new(&s).forbid(plus, l), Err(Error::InvalidTransition(_))));
    }

    #[test]
    fn duplicate_operation_names_rejected() {
        let s = cat();
        let lab = basis_lab(&s);
        assert!(matches!(lab.adjoin("P_L", ProjectiveMeasurement::basis(&s)), Err(Error::DuplicateName(_))));
    }

    #[test]
    fn symmetric_path_has_quarter_probability() {
        let s = cat();
        let h = 0.5f64.sqrt();
        let lab = ps_lab(&s, h, h);
        let d = StateVector::basis(&s, "dead").unwrap();
        let l = StateVector::basis(&s, "alive").unwrap();
        let res = find_steering_path(&lab, &d, &l, 2, DEFAULT_MIN_PROB).unwrap();
        let path = res.path.unwrap();
        let shown: Vec<String> = path.steps.iter().map(|s| alloc::format!("{s}")).collect();
        assert_eq!(shown, ["P_S:S", "P_L:L"]);
        assert!((path.probability - 0.25).abs() < 1e-12);
        assert!(path.final_state.same_ray(&l));
    }

    #[test]
    fn asymmetric_path_probability() {
        let s = cat();
        let lab = ps_lab(&s, 0.6, 0.8);
        let d = StateVector::basis(&s, "dead").unwrap();
        let l = StateVector::basis(&s, "alive").unwrap();
        let path = find_steering_path(&lab, &d, &l, 2, 0.2).unwrap().path.unwrap();
        // |b|²·|a|² = 0.64 · 0.36
        assert!((path.probability - 0.2304).abs() < 1e-12);
        assert_eq!(path.depth(), 2);
        // min_prob above the only reachable mass at depth 2
        let none = find_steering_path(&lab, &d, &l, 2, 0.3).unwrap();
        assert!(none.path.is_none());
    }

    #[test]
    fn diagonal_lab_never_resurrects() {
        let s = cat();
        let lab = basis_lab(&s);
        let d = StateVector::basis(&s, "dead").unwrap();
        let l = StateVector::basis(&s, "alive").unwrap();
        for depth in 1..=8 {
            let res = find_steering_path(&lab, &d, &l, depth, DEFAULT_MIN_PROB).unwrap();
            assert!(res.path.is_none());
            assert!(!res.bound_reached);
        }
    }

    #[test]
    fn verdicts() {
        let s = cat();
        let lab = basis_lab(&s);
        let d = StateVector::basis(&s, "dead").unwrap();
        let l = StateVector::basis(&s, "alive").unwrap();
        let p_cat = StateVector::from_real(&s, &[1., 1.]).unwrap().projector();
        let v = nogo_verdict(&lab, "P_cat+", &p_cat, &l, &d, DEFAULT_MAX_DEPTH).unwrap();
        assert!(v.violated);
        let w = v.witness.unwrap();
        assert_eq!(w.depth(), 2);
        assert!((w.probability - 0.25).abs() < 1e-12);

        let v = nogo_verdict(&lab, "P_dead", &d.projector(), &l, &d, 6).unwrap();
        assert!(!v.violated && v.witness.is_none() && !v.bound_reached);

        let err = nogo_verdict(&lab, "P_cat+", &p_cat, &d, &l, 2).unwrap_err();
        assert!(matches!(err, Error::PreconditionFailed(_)));
    }

    #[test]
    fn unitary_steps_are_single_branch() {
        let s = HilbertSpace::new(["0", "1"]).unwrap();
        let h = 0.5f64.sqrt();
        let rot = crate::linalg::CMatrix::from_row_major(
            2,
            alloc::vec![h.into(), (-h).into(), h.into(), h.into()],
        )
        .unwrap();
        let lab = Laboratory::new(&s)
            .with_unitary("rot45", Operator::unitary(&s, rot).unwrap())
            .unwrap();
        let zero = StateVector::basis(&s, "0").unwrap();
        let one = StateVector::basis(&s, "1").unwrap();
        let path = find_steering_path(&lab, &zero, &one, 4, DEFAULT_MIN_PROB).unwrap().path.unwrap();
        assert_eq!(path.depth(), 2);
        assert!(path.steps.iter().all(|s| s.outcome.is_none()));
        assert!((path.probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reach_probability_one_round() {
        let s = cat();
        let h = 0.5f64.sqrt();
        let lab = ps_lab(&s, h, h);
        let d = StateVector::basis(&s, "dead").unwrap();
        let l = StateVector::basis(&s, "alive").unwrap();
        let round = ProtocolSpec::new(alloc::vec![Step::measure("P_S"), Step::measure("P_L")]);
        assert!((total_reach_probability(&lab, &d, &l, &round).unwrap() - 0.5).abs() < 1e-12);
        let empty = ProtocolSpec::new(alloc::vec![]);
        assert_eq!(total_reach_probability(&lab, &d, &l, &empty).unwrap(), 0.0);
        let bad = ProtocolSpec::new(alloc::vec![Step::measure("P_X")]);
        assert!(matches!(total_reach_probability(&lab, &d, &l, &bad), Err(Error::DisallowedOperation(_))));
    }
}
