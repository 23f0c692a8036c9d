use alloc::collections::BTreeMap;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::lab::Laboratory;
use crate::measure::sample_outcome;
use crate::protocols::spec::{FlatStep, ProtocolSpec};
use crate::qstate::{QuantumState, StateKey, StateVector};
use crate::rng::RandomStream;
use crate::MATCH_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct Bin<S> {
    pub state: S,
    pub count: u64,
}

/// Final-state counts keyed by canonical state.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<S> {
    pub bins: BTreeMap<StateKey, Bin<S>>,
    pub trials: u64,
}

impl<S> Default for Histogram<S> {
    fn default() -> Self {
        Histogram { bins: BTreeMap::new(), trials: 0 }
    }
}

impl<S: QuantumState> Histogram<S> {
    pub fn record(&mut self, state: S) {
        self.trials += 1;
        self.bins.entry(state.key()).or_insert(Bin { state, count: 0 }).count += 1;
    }

    /// Adds another histogram's counts; associative and commutative up to
    /// which representative state a bin keeps.
    pub fn merge(&mut self, other: Histogram<S>) {
        self.trials += other.trials;
        for (key, bin) in other.bins {
            match self.bins.get_mut(&key) {
                Some(b) => b.count += bin.count,
                None => {
                    self.bins.insert(key, bin);
                }
            }
        }
    }

    pub fn count(&self, key: &StateKey) -> u64 {
        self.bins.get(key).map_or(0, |b| b.count)
    }

    /// Fraction of trials ending in `target` up to phase.
    pub fn frequency(&self, target: &StateVector) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let hits: u64 = self
            .bins
            .values()
            .filter(|b| b.state.fidelity(target) > 1.0 - MATCH_TOL)
            .map(|b| b.count)
            .sum();
        hits as f64 / self.trials as f64
    }
}

/// Runs trials `range` of a Monte Carlo experiment; trial `i` draws from
/// stream `(seed, i)`, so any partition of the trial range merges to the
/// same histogram.
pub fn run_trials<S: QuantumState>(
    protocol: &ProtocolSpec,
    lab: &Laboratory,
    initial: &S,
    seed: u64,
    range: Range<u64>,
) -> Result<Histogram<S>> {
    let steps = protocol.compile(lab)?;
    if !crate::qstate::same_space(lab.space(), initial.space()) {
        return Err(Error::SpaceMismatch);
    }
    let mut hist = Histogram::default();
    for trial in range {
        let mut rng = RandomStream::new(seed, trial);
        hist.record(walk(&steps, initial, &mut rng)?);
    }
    Ok(hist)
}

/// `n` seeded walks of the protocol.
pub fn run_monte_carlo<S: QuantumState>(
    protocol: &ProtocolSpec,
    lab: &Laboratory,
    initial: &S,
    n: u64,
    seed: u64,
) -> Result<Histogram<S>> {
    if n == 0 {
        return Err(Error::InvalidArgument("trial count must be at least 1".into()));
    }
    run_trials(protocol, lab, initial, seed, 0..n)
}

fn walk<S: QuantumState>(steps: &[FlatStep<'_>], initial: &S, rng: &mut RandomStream) -> Result<S> {
    let mut state = initial.clone();
    let mut last: Option<alloc::string::String> = None;
    for step in steps {
        match step {
            FlatStep::Measure(_, m) => {
                let (_, label, post) = sample_outcome(m, &state, rng)?;
                state = post;
                last = Some(label);
            }
            FlatStep::Unitary(_, u) => state = state.evolve(u.matrix()),
            FlatStep::StopIf(label) => {
                if last.as_deref() == Some(*label) {
                    break;
                }
            }
        }
    }
    Ok(state.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::ProjectiveMeasurement;
    use crate::protocols::{enumerate, Step};
    use crate::qstate::{HilbertSpace, Space};

    fn lab(s: &Space) -> Laboratory {
        let h = 0.5f64.sqrt();
        let ps = StateVector::from_real(s, &[h, h]).unwrap();
        let l = StateVector::basis(s, "alive").unwrap();
        Laboratory::new(s)
            .with_measurement("P_S", ProjectiveMeasurement::from_states(&[ps], &["S"]).unwrap())
            .unwrap()
            .with_measurement("P_L", ProjectiveMeasurement::from_states(&[l], &["L"]).unwrap())
            .unwrap()
    }

    #[test]
    fn one_round_frequency_and_determinism() {
        let s = HilbertSpace::new(["alive", "dead"]).unwrap();
        let lab = lab(&s);
        let dead = StateVector::basis(&s, "dead").unwrap();
        let alive = StateVector::basis(&s, "alive").unwrap();
        let p = ProtocolSpec::resurrection("P_S", "P_L", "L", 1);
        let n = 100_000;
        let h = run_monte_carlo(&p, &lab, &dead, n, 7).unwrap();
        assert!((h.frequency(&alive) - 0.5).abs() < 0.006);
        assert_eq!(h, run_monte_carlo(&p, &lab, &dead, n, 7).unwrap());
        assert_ne!(h, run_monte_carlo(&p, &lab, &dead, n, 8).unwrap());

        // keys line up with the exact leaf classes
        let tree = enumerate(&p, &lab, &dead).unwrap();
        for class in tree.leaf_classes() {
            assert!(h.count(&class.key) > 0);
        }
    }

    #[test]
    fn partitioned_runs_merge_to_the_same_histogram() {
        let s = HilbertSpace::new(["alive", "dead"]).unwrap();
        let lab = lab(&s);
        let dead = StateVector::basis(&s, "dead").unwrap();
        let p = ProtocolSpec::resurrection("P_S", "P_L", "L", 3);
        let whole = run_trials(&p, &lab, &dead, 3, 0..3000).unwrap();
        let mut parts = run_trials(&p, &lab, &dead, 3, 2000..3000).unwrap();
        parts.merge(run_trials(&p, &lab, &dead, 3, 0..700).unwrap());
        parts.merge(run_trials(&p, &lab, &dead, 3, 700..2000).unwrap());
        assert_eq!(whole.trials, parts.trials);
        for (k, b) in &whole.bins {
            assert_eq!(b.count, parts.count(k));
        }
    }

    #[test]
    fn deterministic_protocol_single_bin() {
        let s = HilbertSpace::new(["alive", "dead"]).unwrap();
        let lab = Laboratory::new(&s).with_measurement("P_L", ProjectiveMeasurement::basis(&s)).unwrap();
        let alive = StateVector::basis(&s, "alive").unwrap();
        let h = run_monte_carlo(&ProtocolSpec::new(alloc::vec![Step::measure("P_L")]), &lab, &alive, 1000, 1).unwrap();
        assert_eq!(h.bins.len(), 1);
        assert_eq!(h.frequency(&alive), 1.0);
    }

    #[test]
    fn zero_trials_rejected() {
        let s = HilbertSpace::new(["alive", "dead"]).unwrap();
        let lab = lab(&s);
        let dead = StateVector::basis(&s, "dead").unwrap();
        assert!(run_monte_carlo(&ProtocolSpec::default(), &lab, &dead, 0, 1).is_err());
    }
}
