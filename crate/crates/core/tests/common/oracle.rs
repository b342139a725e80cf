//! Brute-force ioco written directly against the transition list: no
//! adjacency, no memoisation, no library trace functions.

use std::collections::BTreeSet;

use reoco::{ActionKind, Automaton, Label, StateId};

type Set = BTreeSet<StateId>;

fn closure(a: &Automaton, set: &Set) -> Set {
    let mut out = set.clone();
    loop {
        let before = out.len();
        for t in &a.transitions {
            if t.label == Label::Tau && out.contains(&t.from) {
                out.insert(t.to);
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

fn emits(l: &Label) -> bool {
    l.actions().iter().any(|x| x.kind == ActionKind::Observe)
}

fn quiet(a: &Automaton, s: StateId) -> bool {
    let c = closure(a, &Set::from([s]));
    !a.transitions.iter().any(|t| c.contains(&t.from) && emits(&t.label))
}

fn outs(a: &Automaton, set: &Set) -> BTreeSet<Label> {
    let c = closure(a, set);
    let mut res = BTreeSet::new();
    for t in &a.transitions {
        if c.contains(&t.from) && emits(&t.label) {
            let only: Vec<_> = t.label.actions().iter().filter(|x| x.kind == ActionKind::Observe).cloned().collect();
            res.insert(Label::from_actions(only));
        }
    }
    if c.iter().any(|&s| quiet(a, s)) {
        res.insert(Label::Delta);
    }
    res
}

fn after(a: &Automaton, set: &Set, l: &Label) -> Set {
    let c = closure(a, set);
    let mut next = Set::new();
    for t in &a.transitions {
        if c.contains(&t.from) && &t.label == l {
            next.insert(t.to);
        }
    }
    if *l == Label::Delta {
        next.extend(c.iter().copied().filter(|&s| quiet(a, s)));
    }
    closure(a, &next)
}

/// Labels a suspension trace may be built from: single requests, labels made
/// only of observations, and delta.
fn letters(a: &Automaton) -> Vec<Label> {
    let mut ls: BTreeSet<Label> = a
        .transitions
        .iter()
        .map(|t| t.label.clone())
        .filter(|l| {
            let acts = l.actions();
            let single_request = acts.len() == 1 && acts[0].kind == ActionKind::Request;
            let all_observe = !acts.is_empty() && acts.iter().all(|x| x.kind == ActionKind::Observe);
            single_request || all_observe
        })
        .collect();
    ls.insert(Label::Delta);
    ls.into_iter().collect()
}

/// `true` iff `out(imp after σ) ⊆ out(spec after σ)` for every suspension
/// trace `σ` of `spec` shorter than `depth`.
pub fn conforms(imp: &Automaton, spec: &Automaton, depth: usize) -> bool {
    let alphabet = letters(spec);
    fn dfs(imp: &Automaton, spec: &Automaton, alphabet: &[Label], i: Set, s: Set, left: usize) -> bool {
        if left == 0 || i.is_empty() {
            return true;
        }
        if !outs(imp, &i).is_subset(&outs(spec, &s)) {
            return false;
        }
        alphabet.iter().all(|l| {
            let s2 = after(spec, &s, l);
            s2.is_empty() || dfs(imp, spec, alphabet, after(imp, &i, l), s2, left - 1)
        })
    }
    dfs(
        imp,
        spec,
        &alphabet,
        closure(imp, &Set::from([imp.initial])),
        closure(spec, &Set::from([spec.initial])),
        depth,
    )
}

/// Whether `σ·x` is a genuine violation: `σ` is a suspension trace of `spec`
/// and `x ∈ out(imp after σ) \ out(spec after σ)`.
pub fn violates(imp: &Automaton, spec: &Automaton, sigma: &[Label], x: &Label) -> bool {
    let mut i = closure(imp, &Set::from([imp.initial]));
    let mut s = closure(spec, &Set::from([spec.initial]));
    for l in sigma {
        i = after(imp, &i, l);
        s = after(spec, &s, l);
        if s.is_empty() {
            return false;
        }
    }
    outs(imp, &i).contains(x) && !outs(spec, &s).contains(x)
}
