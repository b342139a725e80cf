use std::collections::{BTreeSet, HashSet, VecDeque};

use super::{describe, CheckError, Verdict};
use crate::ioext::is_input_enabled;
use crate::lts::{Lts, StateSet, Trace};
use crate::model::{Automaton, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    /// Longest suspension trace `σ·x` whose final output is compared.
    pub depth: usize,
    /// Also stimulate with composite input labels such as `{?A,?B}`.
    pub composite_inputs: bool,
}

impl CheckOptions {
    pub fn new(depth: usize) -> Self {
        CheckOptions {
            depth,
            composite_inputs: false,
        }
    }
}

pub fn ioco_check(imp: &Automaton, spec: &Automaton, depth: usize) -> Result<Verdict, CheckError> {
    ioco_check_with(imp, spec, &CheckOptions::new(depth))
}

/// Observable successors of a spec state set that the checker explores:
/// stimuli first, then pure outputs, then `Delta`, in canonical label order.
pub(crate) fn trace_labels(lts: &Lts<'_>, set: &StateSet, composite_inputs: bool) -> Vec<Label> {
    let mut labels: BTreeSet<Label> = lts
        .enabled(set)
        .into_iter()
        .filter(|l| l.is_input_only() && (composite_inputs || l.actions().len() == 1))
        .collect();
    for x in lts.out(set) {
        if x == Label::Delta || !lts.step(set, &x).is_empty() {
            labels.insert(x);
        }
    }
    labels.into_iter().collect()
}

/// Bounded ioco: for every suspension trace `σ` of `spec` with `|σ| < depth`,
/// `out(imp after σ) ⊆ out(spec after σ)`.
///
/// Traces are visited shortest first and in canonical label order, so the
/// returned witness is the least violating trace in that order.
pub fn ioco_check_with(imp: &Automaton, spec: &Automaton, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    if imp.inputs != spec.inputs {
        return Err(CheckError::AlphabetMismatch(format!(
            "inputs {} vs {}",
            describe(&imp.inputs),
            describe(&spec.inputs)
        )));
    }
    if imp.outputs != spec.outputs {
        return Err(CheckError::AlphabetMismatch(format!(
            "outputs {} vs {}",
            describe(&imp.outputs),
            describe(&spec.outputs)
        )));
    }
    is_input_enabled(imp).map_err(CheckError::NotInputEnabled)?;
    if opts.depth == 0 {
        return Ok(Verdict::Pass);
    }
    let s_lts = Lts::new(spec);
    let i_lts = Lts::new(imp);
    let mut seen: HashSet<(StateSet, StateSet)> = HashSet::new();
    let mut queue: VecDeque<(StateSet, StateSet, Trace)> = VecDeque::new();
    let start = (s_lts.initial_set(), i_lts.initial_set());
    seen.insert(start.clone());
    queue.push_back((start.0, start.1, Vec::new()));
    while let Some((s, i, sigma)) = queue.pop_front() {
        let expected = s_lts.out(&s);
        if let Some(x) = i_lts.out(&i).into_iter().find(|x| !expected.contains(x)) {
            return Ok(Verdict::Fail {
                witness: sigma,
                expected,
                observed: x,
            });
        }
        if sigma.len() + 1 >= opts.depth {
            continue;
        }
        for label in trace_labels(&s_lts, &s, opts.composite_inputs) {
            let i2 = i_lts.step(&i, &label);
            if i2.is_empty() {
                continue;
            }
            let s2 = s_lts.step(&s, &label);
            if seen.insert((s2.clone(), i2.clone())) {
                let mut next = sigma.clone();
                next.push(label);
                queue.push_back((s2, i2, next));
            }
        }
    }
    Ok(Verdict::Pass)
}
