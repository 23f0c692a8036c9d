//! Built-in scenarios: the cat, the cat with its decay device, polarized
//! photons, and stones and bread.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lab::{LabOperation, Laboratory};
use crate::linalg::{CMatrix, C64};
use crate::measure::ProjectiveMeasurement;
use crate::protocols::spec::{ProtocolSpec, Step};
use crate::qstate::{DensityMatrix, HilbertSpace, Operator, Space, State, StateVector};

pub const SCENARIO_NAMES: [&str; 4] = ["cat", "composite", "photon", "stone-bread"];

/// A protocol plus the hypothetical measurements it needs beyond the lab's own.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioProtocol {
    pub spec: ProtocolSpec,
    /// Declared measurements adjoined to the lab for this protocol only.
    pub assume: Vec<String>,
    /// Default initial state name.
    pub initial: Option<String>,
}

/// A laboratory together with every named object declared alongside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub space: Space,
    pub states: Vec<(String, State)>,
    /// All declared measurements, including ones the lab does not allow.
    pub measurements: Vec<(String, ProjectiveMeasurement)>,
    pub unitaries: Vec<(String, Operator)>,
    pub lab: Laboratory,
    pub protocols: Vec<(String, ScenarioProtocol)>,
}

fn lookup<'a, T>(items: &'a [(String, T)], name: &str) -> Option<&'a T> {
    items.iter().find(|(n, _)| n == name).map(|(_, t)| t)
}

impl Scenario {
    pub fn state(&self, name: &str) -> Result<&State> {
        lookup(&self.states, name).ok_or_else(|| Error::UnknownName(name.into()))
    }

    pub fn pure_state(&self, name: &str) -> Result<&StateVector> {
        self.state(name)?
            .as_pure()
            .ok_or_else(|| Error::InvalidArgument(format!("`{name}` is a mixture, a pure state is required")))
    }

    pub fn measurement(&self, name: &str) -> Result<&ProjectiveMeasurement> {
        lookup(&self.measurements, name).ok_or_else(|| Error::UnknownName(name.into()))
    }

    pub fn unitary(&self, name: &str) -> Result<&Operator> {
        lookup(&self.unitaries, name).ok_or_else(|| Error::UnknownName(name.into()))
    }

    pub fn protocol(&self, name: &str) -> Result<&ScenarioProtocol> {
        lookup(&self.protocols, name).ok_or_else(|| Error::UnknownName(name.into()))
    }

    /// Name of the first declared pure state matching `psi` up to phase.
    pub fn name_of(&self, psi: &StateVector) -> Option<&str> {
        self.states.iter().find_map(|(n, s)| match s {
            State::Pure(p) if p.same_ray(psi) => Some(n.as_str()),
            _ => None,
        })
    }

    /// The lab extended with the protocol's assumed measurements.
    pub fn lab_for(&self, protocol: &ScenarioProtocol) -> Result<Laboratory> {
        let mut lab = self.lab.clone();
        for name in &protocol.assume {
            if lab.measurement(name).is_none() {
                lab.add_measurement(name.clone(), self.measurement(name)?.clone())?;
            }
        }
        Ok(lab)
    }
}

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn cat_space() -> Space {
    HilbertSpace::new(["alive", "dead"]).expect("valid labels")
}

pub fn device_space() -> Space {
    HilbertSpace::new(["undecayed", "decayed"]).expect("valid labels")
}

pub fn composite_space() -> Space {
    HilbertSpace::tensor(&device_space(), &cat_space()).expect("dimension 4")
}

pub fn photon_space() -> Space {
    HilbertSpace::new(["0", "1"]).expect("valid labels")
}

pub fn stone_bread_space() -> Space {
    HilbertSpace::new(["stone", "bread"]).expect("valid labels")
}

/// `½|alive⟩⟨alive| + ½|dead⟩⟨dead|`
pub fn cat_mixture() -> DensityMatrix {
    let s = cat_space();
    DensityMatrix::mixture(&[
        (0.5, StateVector::basis(&s, "alive").expect("label")),
        (0.5, StateVector::basis(&s, "dead").expect("label")),
    ])
    .expect("valid mixture")
}

/// `(|alive⟩ ± |dead⟩)/√2`
pub fn cat_plus_minus() -> (StateVector, StateVector) {
    let s = cat_space();
    (
        StateVector::from_real(&s, &[1.0, 1.0]).expect("nonzero"),
        StateVector::from_real(&s, &[1.0, -1.0]).expect("nonzero"),
    )
}

/// `(|undecayed⟩ ± |decayed⟩)/√2`
pub fn device_plus_minus() -> (StateVector, StateVector) {
    let s = device_space();
    (
        StateVector::from_real(&s, &[1.0, 1.0]).expect("nonzero"),
        StateVector::from_real(&s, &[1.0, -1.0]).expect("nonzero"),
    )
}

/// `(|undecayed⟩|alive⟩ + |decayed⟩|dead⟩)/√2`
pub fn schroedinger_cat() -> StateVector {
    StateVector::from_real(&composite_space(), &[1.0, 0.0, 0.0, 1.0]).expect("nonzero")
}

/// `(|undecayed⟩|alive⟩ - |decayed⟩|dead⟩)/√2`
pub fn schroedinger_cat_minus() -> StateVector {
    StateVector::from_real(&composite_space(), &[1.0, 0.0, 0.0, -1.0]).expect("nonzero")
}

/// Equal-weight ensemble of chambers holding either `|undecayed⟩|alive⟩` or `|decayed⟩|dead⟩`.
pub fn chamber_ensemble() -> DensityMatrix {
    let s = composite_space();
    DensityMatrix::mixture(&[
        (0.5, StateVector::basis(&s, "undecayed⊗alive").expect("label")),
        (0.5, StateVector::basis(&s, "decayed⊗dead").expect("label")),
    ])
    .expect("valid mixture")
}

/// `(|0⟩ ± |1⟩)/√2`, the 45° and 135° polarizations.
pub fn photon_diagonal() -> (StateVector, StateVector) {
    let s = photon_space();
    (
        StateVector::from_real(&s, &[1.0, 1.0]).expect("nonzero"),
        StateVector::from_real(&s, &[1.0, -1.0]).expect("nonzero"),
    )
}

/// Unpolarized light, `½|0⟩⟨0| + ½|1⟩⟨1|`.
pub fn photon_mixture() -> DensityMatrix {
    let s = photon_space();
    DensityMatrix::mixture(&[
        (0.5, StateVector::basis(&s, "0").expect("label")),
        (0.5, StateVector::basis(&s, "1").expect("label")),
    ])
    .expect("valid mixture")
}

/// Polarization rotation by `degrees`, mapping `|0⟩` to `cos θ|0⟩ + sin θ|1⟩`.
pub fn polarization_rotation(degrees: f64) -> Operator {
    let t = degrees.to_radians();
    let (s, c) = (libm::sin(t), libm::cos(t));
    let m = CMatrix::from_row_major(2, vec![r(c), r(-s), r(s), r(c)]).expect("2x2");
    Operator::unitary(&photon_space(), m).expect("rotation is unitary")
}

/// Coefficients of the superposition projector used in the shipped stone/bread scenario.
pub const STONE_BREAD_AMPLITUDES: (f64, f64) = (0.6, 0.8);

/// Builds one of [`SCENARIO_NAMES`].
pub fn build_scenario(name: &str) -> Result<Scenario> {
    match name {
        "cat" => cat_scenario(),
        "composite" | "schroedinger-cat" => composite_scenario(),
        "photon" => photon_scenario(),
        "stone-bread" => stone_bread_scenario(),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

fn named<T>(items: Vec<(&str, T)>) -> Vec<(String, T)> {
    items.into_iter().map(|(n, t)| (n.to_string(), t)).collect()
}

fn lab_from(space: &Space, measurements: &[(String, ProjectiveMeasurement)], unitaries: &[(String, Operator)], allowed: &[&str]) -> Result<Laboratory> {
    let mut lab = Laboratory::new(space);
    for name in allowed {
        if let Some(m) = lookup(measurements, name) {
            lab.add_measurement(*name, m.clone())?;
        } else if let Some(u) = lookup(unitaries, name) {
            lab.add_unitary(*name, u.clone())?;
        } else {
            return Err(Error::UnknownName(name.to_string()));
        }
    }
    Ok(lab)
}

fn protocol(steps: Vec<Step>, assume: &[&str], initial: Option<&str>) -> ScenarioProtocol {
    ScenarioProtocol {
        spec: ProtocolSpec::new(steps),
        assume: assume.iter().map(|s| s.to_string()).collect(),
        initial: initial.map(String::from),
    }
}

fn resurrection(candidate: &str, check: &str, label: &str, rounds: usize, initial: &str) -> ScenarioProtocol {
    ScenarioProtocol {
        spec: ProtocolSpec::resurrection(candidate, check, label, rounds),
        assume: vec![candidate.to_string()],
        initial: Some(initial.to_string()),
    }
}

fn cat_scenario() -> Result<Scenario> {
    let space = cat_space();
    let alive = StateVector::basis(&space, "alive")?;
    let dead = StateVector::basis(&space, "dead")?;
    let (plus, minus) = cat_plus_minus();
    let measurements = named(vec![
        ("P_L", ProjectiveMeasurement::basis(&space)),
        ("pm", ProjectiveMeasurement::from_states(&[plus.clone(), minus.clone()], &["+", "-"])?),
        ("P_cat+", ProjectiveMeasurement::from_states(core::slice::from_ref(&plus), &["S"])?),
    ]);
    let mut lab = lab_from(&space, &measurements, &[], &["P_L"])?;
    lab.forbid(dead.clone(), alive.clone())?;
    let states = named(vec![
        ("alive", State::Pure(alive)),
        ("dead", State::Pure(dead)),
        ("psi_cat_plus", State::Pure(plus)),
        ("psi_cat_minus", State::Pure(minus)),
        ("rho_cat", State::Mixed(cat_mixture())),
    ]);
    let protocols = named(vec![
        ("observe", protocol(vec![Step::measure("P_L")], &[], Some("psi_cat_plus"))),
        ("resurrect1", resurrection("P_cat+", "P_L", "alive", 1, "dead")),
        ("resurrect3", resurrection("P_cat+", "P_L", "alive", 3, "dead")),
        ("resurrect10", resurrection("P_cat+", "P_L", "alive", 10, "dead")),
    ]);
    Ok(Scenario { name: "cat".into(), space, states, measurements, unitaries: Vec::new(), lab, protocols })
}

fn composite_scenario() -> Result<Scenario> {
    let space = composite_space();
    let ua = StateVector::basis(&space, "undecayed⊗alive")?;
    let dd = StateVector::basis(&space, "decayed⊗dead")?;
    let psi_plus = schroedinger_cat();
    let psi_minus = schroedinger_cat_minus();
    let (dev_plus, dev_minus) = device_plus_minus();
    let cat_id = Operator::identity(&cat_space());
    let device_pm = ProjectiveMeasurement::new(
        &space,
        vec![
            ("φ+".into(), dev_plus.projector().tensor(&cat_id)?),
            ("φ-".into(), dev_minus.projector().tensor(&cat_id)?),
        ],
    )?;
    let measurements = named(vec![
        ("basis", ProjectiveMeasurement::basis(&space)),
        ("device_pm", device_pm),
        ("P_Sch+", ProjectiveMeasurement::from_states(core::slice::from_ref(&psi_plus), &["S"])?),
        ("bell", ProjectiveMeasurement::from_states(&[psi_plus.clone(), psi_minus.clone()], &["Ψ+", "Ψ-"])?),
    ]);
    let mut lab = lab_from(&space, &measurements, &[], &["basis", "device_pm"])?;
    lab.forbid(dd.clone(), ua.clone())?;
    let mut states = Vec::new();
    for (short, label) in [("ua", "undecayed⊗alive"), ("ud", "undecayed⊗dead"), ("da", "decayed⊗alive"), ("dd", "decayed⊗dead")] {
        states.push((short.to_string(), State::Pure(StateVector::basis(&space, label)?)));
    }
    states.extend(named(vec![
        ("psi_s_plus", State::Pure(psi_plus)),
        ("psi_s_minus", State::Pure(psi_minus)),
        ("rho_s", State::Mixed(chamber_ensemble())),
    ]));
    let protocols = named(vec![
        ("observe", protocol(vec![Step::measure("basis")], &[], Some("psi_s_plus"))),
        ("device_then_basis", protocol(vec![Step::measure("device_pm"), Step::measure("basis")], &[], Some("psi_s_plus"))),
        ("resurrect1", resurrection("P_Sch+", "basis", "undecayed⊗alive", 1, "dd")),
        ("resurrect4", resurrection("P_Sch+", "basis", "undecayed⊗alive", 4, "dd")),
    ]);
    Ok(Scenario { name: "composite".into(), space, states, measurements, unitaries: Vec::new(), lab, protocols })
}

fn photon_scenario() -> Result<Scenario> {
    let space = photon_space();
    let (xp, xm) = photon_diagonal();
    let rot = polarization_rotation(45.0);
    let unitaries = named(vec![("rot45", rot.clone()), ("rot45_inv", rot.adjoint())]);
    let measurements = named(vec![
        ("polarizer_0", ProjectiveMeasurement::basis(&space)),
        ("polarizer_45", ProjectiveMeasurement::from_states(&[xp.clone(), xm.clone()], &["+", "-"])?),
    ]);
    let lab = lab_from(&space, &measurements, &unitaries, &["polarizer_0", "polarizer_45", "rot45", "rot45_inv"])?;
    let states = named(vec![
        ("zero", State::Pure(StateVector::basis(&space, "0")?)),
        ("one", State::Pure(StateVector::basis(&space, "1")?)),
        ("x_plus", State::Pure(xp)),
        ("x_minus", State::Pure(xm)),
        ("rho_ph", State::Mixed(photon_mixture())),
    ]);
    let protocols = named(vec![
        ("polarize_0", protocol(vec![Step::measure("polarizer_0")], &[], Some("x_plus"))),
        ("polarize_45", protocol(vec![Step::measure("polarizer_45")], &[], Some("rho_ph"))),
        ("rotate_then_polarize", protocol(vec![Step::unitary("rot45"), Step::measure("polarizer_45")], &[], Some("zero"))),
        ("filter_then_polarize", protocol(vec![Step::measure("polarizer_45"), Step::measure("polarizer_0")], &[], Some("zero"))),
    ]);
    Ok(Scenario { name: "photon".into(), space, states, measurements, unitaries, lab, protocols })
}

fn stone_bread_scenario() -> Result<Scenario> {
    let space = stone_bread_space();
    let stone = StateVector::basis(&space, "stone")?;
    let bread = StateVector::basis(&space, "bread")?;
    let (a, b) = STONE_BREAD_AMPLITUDES;
    let loaf = StateVector::from_real(&space, &[a, b])?;
    let measurements = named(vec![
        ("inspect", ProjectiveMeasurement::basis(&space)),
        ("P_SB", ProjectiveMeasurement::from_states(core::slice::from_ref(&loaf), &["S"])?),
    ]);
    let mut lab = lab_from(&space, &measurements, &[], &["inspect"])?;
    lab.forbid(stone.clone(), bread.clone())?;
    lab.forbid(bread.clone(), stone.clone())?;
    let states = named(vec![("stone", State::Pure(stone)), ("bread", State::Pure(bread)), ("loaf", State::Pure(loaf))]);
    let protocols = named(vec![
        ("to_bread", resurrection("P_SB", "inspect", "bread", 2, "stone")),
        ("to_stone", resurrection("P_SB", "inspect", "stone", 2, "bread")),
    ]);
    Ok(Scenario { name: "stone-bread".into(), space, states, measurements, unitaries: Vec::new(), lab, protocols })
}

/// Every operation name the lab allows, in declaration order.
pub fn allowed_names(lab: &Laboratory) -> Vec<&str> {
    lab.operations().iter().map(LabOperation::name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::QuantumState;

    #[test]
    fn every_catalog_object_is_valid() {
        for name in SCENARIO_NAMES {
            let sc = build_scenario(name).unwrap();
            for (_, s) in &sc.states {
                s.validate().unwrap();
            }
            for (pname, p) in &sc.protocols {
                let lab = sc.lab_for(p).unwrap();
                p.spec.compile(&lab).unwrap_or_else(|e| panic!("{name}/{pname}: {e}"));
            }
        }
        assert_eq!(build_scenario("unicorn").unwrap_err(), Error::UnknownScenario("unicorn".into()));
    }

    #[test]
    fn scenario_labs() {
        let cat = build_scenario("cat").unwrap();
        assert_eq!(allowed_names(&cat.lab), ["P_L"]);
        assert_eq!(cat.lab.forbidden().len(), 1);
        assert!(cat.lab.is_forbidden(cat.pure_state("dead").unwrap(), cat.pure_state("alive").unwrap()));

        let photon = build_scenario("photon").unwrap();
        assert!(photon.lab.forbidden().is_empty());
        assert!(photon.lab.measurement("polarizer_45").is_some());
        assert!(photon.lab.unitary("rot45").is_some());

        let sb = build_scenario("stone-bread").unwrap();
        assert_eq!(sb.lab.forbidden().len(), 2);
    }

    #[test]
    fn superposition_rewritten_in_plus_minus_bases() {
        // (φ+ψ+ + φ-ψ-)/√2 equals (|undecayed,alive⟩ + |decayed,dead⟩)/√2
        let (dp, dm) = device_plus_minus();
        let (cp, cm) = cat_plus_minus();
        let a = dp.tensor(&cp).unwrap();
        let b = dm.tensor(&cm).unwrap();
        let h = 0.5f64.sqrt();
        let sum: Vec<C64> = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x + y) * h).collect();
        let target = schroedinger_cat();
        for (x, y) in sum.iter().zip(target.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn rotation_maps_zero_to_diagonal_and_back() {
        let s = photon_space();
        let rot = polarization_rotation(45.0);
        let zero = StateVector::basis(&s, "0").unwrap();
        let (xp, _) = photon_diagonal();
        let there = zero.evolve(rot.matrix());
        assert!((there.fidelity(&xp) - 1.0).abs() < 1e-10);
        let back = there.evolve(rot.adjoint().matrix());
        assert!((back.fidelity(&zero) - 1.0).abs() < 1e-10);
    }
}
