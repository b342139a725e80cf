//! Labelled transition system algorithms over [`Automaton`]s.
//!
//! Traces are tau-abstracted sequences of observable labels. Labels are
//! matched exactly: `{?A,!B}` is a different step from `{!B}`.

mod aut;
mod equiv;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::{Automaton, Label, StateId};

pub use aut::{read_aut, write_aut, AutError};
pub use equiv::{equivalent, isomorphism, Counterexample, Equivalence, Relation};

pub type StateSet = BTreeSet<StateId>;
pub type Trace = Vec<Label>;

/// An automaton with its adjacency precomputed, for repeated queries.
#[derive(Debug, Clone)]
pub struct Lts<'a> {
    aut: &'a Automaton,
    adj: Vec<Vec<usize>>,
    quiet: Vec<bool>,
}

impl<'a> Lts<'a> {
    pub fn new(aut: &'a Automaton) -> Self {
        let mut lts = Lts {
            aut,
            adj: aut.adjacency(),
            quiet: Vec::new(),
        };
        lts.quiet = (0..aut.num_states)
            .map(|s| {
                lts.tau_closure(&StateSet::from([s]))
                    .iter()
                    .all(|&q| lts.edges(q).all(|(l, _)| !l.has_output()))
            })
            .collect();
        lts
    }

    pub fn automaton(&self) -> &'a Automaton {
        self.aut
    }

    pub fn edges(&self, s: StateId) -> impl Iterator<Item = (&'a Label, StateId)> + '_ {
        let aut = self.aut;
        self.adj[s].iter().map(move |&i| {
            let t = &aut.transitions[i];
            (&t.label, t.to)
        })
    }

    pub fn tau_closure(&self, states: &StateSet) -> StateSet {
        let mut closed = states.clone();
        let mut stack: Vec<StateId> = states.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for (label, to) in self.edges(s) {
                if label.is_tau() && closed.insert(to) {
                    stack.push(to);
                }
            }
        }
        closed
    }

    /// Tau-closure of the initial state.
    pub fn initial_set(&self) -> StateSet {
        self.tau_closure(&StateSet::from([self.aut.initial]))
    }

    /// No state in the tau-closure of `s` has an outgoing output label.
    pub fn is_quiescent(&self, s: StateId) -> bool {
        self.quiet[s]
    }

    /// One observable step from an arbitrary set, closed under tau afterwards.
    ///
    /// `Delta` keeps the quiescent members, which is the effect of the
    /// suspension self-loops without materialising them.
    pub fn step(&self, states: &StateSet, label: &Label) -> StateSet {
        let closed = self.tau_closure(states);
        let mut next = StateSet::new();
        for &s in &closed {
            for (l, to) in self.edges(s) {
                if l == label {
                    next.insert(to);
                }
            }
            if *label == Label::Delta && self.is_quiescent(s) {
                next.insert(s);
            }
        }
        self.tau_closure(&next)
    }

    pub fn after(&self, from: &StateSet, sigma: &[Label]) -> StateSet {
        let mut current = self.tau_closure(from);
        for label in sigma {
            if current.is_empty() {
                break;
            }
            current = self.step(&current, label);
        }
        current
    }

    /// Output projections of the output-carrying labels leaving the closure of
    /// `states`, plus `Delta` if some member is quiescent.
    pub fn out(&self, states: &StateSet) -> BTreeSet<Label> {
        let closed = self.tau_closure(states);
        let mut outs = BTreeSet::new();
        for &s in &closed {
            for (l, _) in self.edges(s) {
                if let Some(p) = l.output_projection() {
                    outs.insert(p);
                }
            }
            if self.is_quiescent(s) {
                outs.insert(Label::Delta);
            }
        }
        outs
    }

    /// Observable labels leaving the closure of `states`.
    pub fn enabled(&self, states: &StateSet) -> BTreeSet<Label> {
        let closed = self.tau_closure(states);
        closed
            .iter()
            .flat_map(|&s| self.edges(s).map(|(l, _)| l.clone()))
            .filter(|l| l.is_observable())
            .collect()
    }

    /// Some member can neither move silently nor take any label in `refused`.
    pub fn refuses(&self, states: &StateSet, refused: &BTreeSet<Label>) -> bool {
        states
            .iter()
            .any(|&s| self.edges(s).all(|(l, _)| !l.is_tau() && !refused.contains(l)))
    }

    /// States reachable from `s` by any sequence of transitions.
    pub fn der(&self, s: StateId) -> StateSet {
        let mut seen = StateSet::from([s]);
        let mut stack = vec![s];
        while let Some(q) = stack.pop() {
            for (_, to) in self.edges(q) {
                if seen.insert(to) {
                    stack.push(to);
                }
            }
        }
        seen
    }
}

pub fn after(a: &Automaton, from: &StateSet, sigma: &[Label]) -> StateSet {
    Lts::new(a).after(from, sigma)
}

pub fn out(a: &Automaton, states: &StateSet) -> BTreeSet<Label> {
    Lts::new(a).out(states)
}

pub fn quiescent(a: &Automaton, s: StateId) -> bool {
    Lts::new(a).is_quiescent(s)
}

/// `P refuses A`.
pub fn refuses(a: &Automaton, states: &StateSet, refused: &BTreeSet<Label>) -> bool {
    Lts::new(a).refuses(states, refused)
}

/// Adds a `Delta` self-loop on every quiescent state.
pub fn suspension(a: &Automaton) -> Automaton {
    let lts = Lts::new(a);
    let mut out = a.clone();
    for s in 0..a.num_states {
        if lts.is_quiescent(s) {
            out.add(s, Label::Delta, s);
        }
    }
    out.normalized()
}

/// All suspension traces of length at most `max_depth`, including the empty trace.
pub fn straces(a: &Automaton, max_depth: usize) -> BTreeSet<Trace> {
    let lts = Lts::new(a);
    let mut result = BTreeSet::new();
    let mut frontier: Vec<(Trace, StateSet)> = vec![(Vec::new(), lts.initial_set())];
    result.insert(Vec::new());
    for _ in 0..max_depth {
        let mut next = Vec::new();
        for (trace, states) in frontier {
            let mut labels = lts.enabled(&states);
            if lts.out(&states).contains(&Label::Delta) {
                labels.insert(Label::Delta);
            }
            for label in labels {
                let succ = lts.step(&states, &label);
                let mut t = trace.clone();
                t.push(label);
                result.insert(t.clone());
                next.push((t, succ));
            }
        }
        frontier = next;
    }
    result
}

/// Subset construction over the observable labels, closing under tau.
///
/// States are numbered in discovery order; state 0 is the closure of the
/// initial state.
pub fn determinize(a: &Automaton) -> Automaton {
    let (det, _) = determinize_with_subsets(a);
    det
}

/// As [`determinize`], also returning the subset behind each new state.
pub fn determinize_with_subsets(a: &Automaton) -> (Automaton, Vec<StateSet>) {
    let lts = Lts::new(a);
    let mut index: BTreeMap<StateSet, StateId> = BTreeMap::new();
    let mut subsets = Vec::new();
    let mut queue = VecDeque::new();
    let init = lts.initial_set();
    index.insert(init.clone(), 0);
    subsets.push(init.clone());
    queue.push_back(init);
    let mut transitions = Vec::new();
    while let Some(set) = queue.pop_front() {
        let from = index[&set];
        let mut moves: BTreeMap<&Label, StateSet> = BTreeMap::new();
        for &s in &set {
            for (l, to) in lts.edges(s) {
                if l.is_observable() {
                    moves.entry(l).or_default().insert(to);
                }
            }
        }
        for (label, targets) in moves {
            let target = lts.tau_closure(&targets);
            let to = match index.get(&target) {
                Some(&id) => id,
                None => {
                    let id = subsets.len();
                    index.insert(target.clone(), id);
                    subsets.push(target.clone());
                    queue.push_back(target);
                    id
                }
            };
            transitions.push((from, label.clone(), to));
        }
    }
    let mut det = Automaton::new(subsets.len(), 0);
    det.inputs = a.inputs.clone();
    det.outputs = a.outputs.clone();
    for (f, l, t) in transitions {
        det.add(f, l, t);
    }
    (det.normalized(), subsets)
}
