use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Result;
use crate::lab::Laboratory;
use crate::measure::outcome_distribution;
use crate::protocols::spec::{FlatStep, ProtocolSpec};
use crate::qstate::{QuantumState, StateKey, StateVector};
use crate::MATCH_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode<S> {
    /// `measurement:outcome` or the unitary name; empty for the root.
    pub label: String,
    /// Probability of this branch given its parent.
    pub step_probability: f64,
    /// Probability of reaching this node from the root.
    pub probability: f64,
    pub state: S,
    pub children: Vec<TreeNode<S>>,
}

impl<S> TreeNode<S> {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Exact branching record of a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTree<S> {
    pub root: TreeNode<S>,
    /// Probability carried by outcomes whose step probability fell below [`PRUNE`](crate::PRUNE).
    pub pruned_mass: f64,
}

/// Leaves sharing one canonical state.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafClass<S> {
    pub key: StateKey,
    pub state: S,
    pub probability: f64,
    pub leaves: usize,
}

impl<S: QuantumState> OutcomeTree<S> {
    /// Leaves in depth-first, declaration order.
    pub fn leaves(&self) -> Vec<&TreeNode<S>> {
        fn walk<'a, S>(n: &'a TreeNode<S>, out: &mut Vec<&'a TreeNode<S>>) {
            if n.is_leaf() {
                out.push(n);
            }
            for c in &n.children {
                walk(c, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    pub fn node_count(&self) -> usize {
        fn count<S>(n: &TreeNode<S>) -> usize {
            1 + n.children.iter().map(count).sum::<usize>()
        }
        count(&self.root)
    }

    pub fn depth(&self) -> usize {
        fn depth<S>(n: &TreeNode<S>) -> usize {
            n.children.iter().map(|c| 1 + depth(c)).max().unwrap_or(0)
        }
        depth(&self.root)
    }

    pub fn leaf_total(&self) -> f64 {
        self.leaves().iter().fold(0.0, |acc, l| acc + l.probability)
    }

    /// Leaves grouped by canonical state key, ordered by key.
    pub fn leaf_classes(&self) -> Vec<LeafClass<S>> {
        let mut classes: BTreeMap<StateKey, LeafClass<S>> = BTreeMap::new();
        for leaf in self.leaves() {
            let key = leaf.state.key();
            classes
                .entry(key.clone())
                .and_modify(|c| {
                    c.probability += leaf.probability;
                    c.leaves += 1;
                })
                .or_insert(LeafClass { key, state: leaf.state.clone(), probability: leaf.probability, leaves: 1 });
        }
        classes.into_values().collect()
    }
}

/// Total probability of leaves whose state matches `target` up to phase.
pub fn leaf_mass<S: QuantumState>(tree: &OutcomeTree<S>, target: &StateVector) -> f64 {
    tree.leaves()
        .iter()
        .filter(|l| l.state.fidelity(target) > 1.0 - MATCH_TOL)
        .fold(0.0, |acc, l| acc + l.probability)
}

/// Largest outcome tree [`enumerate`] will build.
pub const MAX_TREE_NODES: usize = 1 << 20;

/// Exact outcome tree of `protocol` run on `initial` inside `lab`.
///
/// An outcome is dropped (its mass added to `pruned_mass`) when its step
/// probability is below [`PRUNE`](crate::PRUNE), the same rule the sampler uses, so both
/// see the same support.
pub fn enumerate<S: QuantumState>(protocol: &ProtocolSpec, lab: &Laboratory, initial: &S) -> Result<OutcomeTree<S>> {
    let steps = protocol.compile(lab)?;
    if !crate::qstate::same_space(lab.space(), initial.space()) {
        return Err(crate::Error::SpaceMismatch);
    }
    let mut budget = Budget { pruned: 0.0, nodes: 1 };
    let mut root = TreeNode {
        label: String::new(),
        step_probability: 1.0,
        probability: 1.0,
        state: initial.clone(),
        children: Vec::new(),
    };
    grow(&mut root, &steps, None, &mut budget)?;
    Ok(OutcomeTree { root, pruned_mass: budget.pruned })
}

struct Budget {
    pruned: f64,
    nodes: usize,
}

impl Budget {
    fn take(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > MAX_TREE_NODES {
            return Err(crate::Error::InvalidArgument(format!(
                "outcome tree exceeds {MAX_TREE_NODES} nodes; use sampling instead"
            )));
        }
        Ok(())
    }
}

fn grow<S: QuantumState>(
    node: &mut TreeNode<S>,
    steps: &[FlatStep<'_>],
    last_outcome: Option<&str>,
    budget: &mut Budget,
) -> Result<()> {
    let mut rest = steps;
    loop {
        match rest.split_first() {
            None => {
                node.state = node.state.canonical();
                return Ok(());
            }
            Some((FlatStep::StopIf(label), tail)) => {
                if last_outcome == Some(*label) {
                    node.state = node.state.canonical();
                    return Ok(());
                }
                rest = tail;
            }
            Some((FlatStep::Unitary(name, u), tail)) => {
                budget.take()?;
                let state = node.state.evolve(u.matrix());
                let mut child = TreeNode {
                    label: String::from(*name),
                    step_probability: 1.0,
                    probability: node.probability,
                    state,
                    children: Vec::new(),
                };
                grow(&mut child, tail, last_outcome, budget)?;
                node.children.push(child);
                return Ok(());
            }
            Some((FlatStep::Measure(name, m), tail)) => {
                for rec in outcome_distribution(m, &node.state)? {
                    let probability = node.probability * rec.probability;
                    match rec.post_state {
                        Some(state) => {
                            budget.take()?;
                            let mut child = TreeNode {
                                label: format!("{name}:{}", rec.label),
                                step_probability: rec.probability,
                                probability,
                                state,
                                children: Vec::new(),
                            };
                            grow(&mut child, tail, Some(&rec.label), budget)?;
                            node.children.push(child);
                        }
                        None => budget.pruned += probability,
                    }
                }
                return Ok(());
            }
        }
    }
}
