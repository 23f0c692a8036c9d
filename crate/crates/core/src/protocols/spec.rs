use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lab::Laboratory;
use crate::measure::ProjectiveMeasurement;
use crate::qstate::Operator;

/// Most operation steps a protocol may unroll to.
pub const MAX_PROTOCOL_STEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Measure(String),
    Unitary(String),
    Repeat { count: usize, block: Vec<Step> },
    /// Ends the branch when the most recent measurement outcome has this label.
    StopIf(String),
}

impl Step {
    pub fn measure(name: impl Into<String>) -> Self {
        Step::Measure(name.into())
    }

    pub fn unitary(name: impl Into<String>) -> Self {
        Step::Unitary(name.into())
    }

    pub fn repeat(count: usize, block: Vec<Step>) -> Self {
        Step::Repeat { count, block }
    }

    pub fn stop_if(label: impl Into<String>) -> Self {
        Step::StopIf(label.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProtocolSpec {
    pub steps: Vec<Step>,
}

impl ProtocolSpec {
    pub fn new(steps: Vec<Step>) -> Self {
        ProtocolSpec { steps }
    }

    /// `rounds` repetitions of `measure candidate; measure target_measurement; stop if target_label`.
    pub fn resurrection(candidate: &str, target_measurement: &str, target_label: &str, rounds: usize) -> Self {
        ProtocolSpec::new(alloc::vec![Step::repeat(
            rounds,
            alloc::vec![
                Step::measure(candidate),
                Step::measure(target_measurement),
                Step::stop_if(target_label)
            ],
        )])
    }

    /// Number of measurement and unitary steps after unrolling repeats.
    pub fn unrolled_len(&self) -> usize {
        fn count(steps: &[Step]) -> usize {
            steps.iter().fold(0usize, |acc, s| {
                acc.saturating_add(match s {
                    Step::Measure(_) | Step::Unitary(_) => 1,
                    Step::StopIf(_) => 0,
                    Step::Repeat { count: n, block } => n.saturating_mul(count(block)),
                })
            })
        }
        count(&self.steps)
    }

    /// Names of every operation referenced, in order of first appearance.
    pub fn operation_names(&self) -> Vec<&str> {
        fn walk<'a>(steps: &'a [Step], out: &mut Vec<&'a str>) {
            for s in steps {
                match s {
                    Step::Measure(n) | Step::Unitary(n) => {
                        if !out.contains(&n.as_str()) {
                            out.push(n);
                        }
                    }
                    Step::Repeat { block, .. } => walk(block, out),
                    Step::StopIf(_) => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.steps, &mut out);
        out
    }

    /// Fails as [`enumerate`](crate::protocols::enumerate) would on an
    /// unknown or disallowed name, a wrong operation kind, or too many steps.
    pub fn check(&self, lab: &Laboratory) -> Result<()> {
        self.compile(lab).map(|_| ())
    }

    /// Resolves names against the lab and unrolls repeats.
    pub(crate) fn compile<'a>(&'a self, lab: &'a Laboratory) -> Result<Vec<FlatStep<'a>>> {
        let steps = self.unrolled_len();
        if steps > MAX_PROTOCOL_STEPS {
            return Err(Error::DepthCeiling { steps });
        }
        let mut out = Vec::new();
        flatten(&self.steps, lab, &mut out)?;
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum FlatStep<'a> {
    Measure(&'a str, &'a ProjectiveMeasurement),
    Unitary(&'a str, &'a Operator),
    StopIf(&'a str),
}

fn flatten<'a>(steps: &'a [Step], lab: &'a Laboratory, out: &mut Vec<FlatStep<'a>>) -> Result<()> {
    for s in steps {
        match s {
            Step::Measure(name) => match lab.measurement(name) {
                Some(m) => out.push(FlatStep::Measure(name, m)),
                None if lab.unitary(name).is_some() => {
                    return Err(Error::InvalidArgument(format!("`{name}` is a unitary, not a measurement")))
                }
                None => return Err(Error::DisallowedOperation(name.clone())),
            },
            Step::Unitary(name) => match lab.unitary(name) {
                Some(u) => out.push(FlatStep::Unitary(name, u)),
                None if lab.measurement(name).is_some() => {
                    return Err(Error::InvalidArgument(format!("`{name}` is a measurement, not a unitary")))
                }
                None => return Err(Error::DisallowedOperation(name.clone())),
            },
            Step::StopIf(label) => out.push(FlatStep::StopIf(label)),
            Step::Repeat { count, block } => {
                for _ in 0..*count {
                    flatten(block, lab, out)?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::HilbertSpace;

    #[test]
    fn unrolled_length_counts_operations_only() {
        let p = ProtocolSpec::resurrection("P_S", "P_L", "L", 12);
        assert_eq!(p.unrolled_len(), 24);
        let huge = ProtocolSpec::new(alloc::vec![Step::repeat(usize::MAX, alloc::vec![Step::measure("x"); 2])]);
        assert_eq!(huge.unrolled_len(), usize::MAX);
    }

    #[test]
    fn compile_rejects_deep_and_unknown() {
        let s = HilbertSpace::new(["a", "b"]).unwrap();
        let lab = Laboratory::new(&s).with_measurement("M", ProjectiveMeasurement::basis(&s)).unwrap();
        let deep = ProtocolSpec::new(alloc::vec![Step::repeat(65, alloc::vec![Step::measure("M")])]);
        assert_eq!(deep.compile(&lab).unwrap_err(), Error::DepthCeiling { steps: 65 });
        let ok = ProtocolSpec::new(alloc::vec![Step::repeat(64, alloc::vec![Step::measure("M")])]);
        assert_eq!(ok.compile(&lab).unwrap().len(), 64);
        let unknown = ProtocolSpec::new(alloc::vec![Step::measure("N")]);
        assert_eq!(unknown.compile(&lab).unwrap_err(), Error::DisallowedOperation("N".into()));
        let wrong_kind = ProtocolSpec::new(alloc::vec![Step::unitary("M")]);
        assert!(matches!(wrong_kind.compile(&lab), Err(Error::InvalidArgument(_))));
    }
}
