//! Equivalence checks between automata: strong bisimilarity, bounded trace
//! equivalence and exact isomorphism.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use super::{Lts, StateSet, Trace};
use crate::model::{Automaton, Label, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    StrongBisim,
    /// Same tau-abstracted traces up to the given length.
    TraceToDepth(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    /// The trace is accepted by exactly one of the two automata.
    Trace(Trace),
    /// The initial states lie in different bisimulation blocks because `label`
    /// leads to blocks on one side that the other side cannot reach.
    Split { label: Label },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equivalence {
    pub equivalent: bool,
    pub counterexample: Option<Counterexample>,
}

impl Equivalence {
    fn yes() -> Self {
        Equivalence {
            equivalent: true,
            counterexample: None,
        }
    }

    fn no(c: Counterexample) -> Self {
        Equivalence {
            equivalent: false,
            counterexample: Some(c),
        }
    }
}

/// Block of a state together with the blocks its labels lead to.
type Signature<'a> = (usize, BTreeSet<(&'a Label, usize)>);
type PairSignature<'a> = (usize, Vec<(&'a Label, usize)>, Vec<(&'a Label, usize)>);

pub fn equivalent(a: &Automaton, b: &Automaton, relation: Relation) -> Equivalence {
    match relation {
        Relation::TraceToDepth(k) => match distinguishing_trace(a, b, Some(k)) {
            Some(t) => Equivalence::no(Counterexample::Trace(t)),
            None => Equivalence::yes(),
        },
        Relation::StrongBisim => {
            let (blocks, edges) = bisim_partition(a, b);
            let ia = a.initial;
            let ib = a.num_states + b.initial;
            if blocks[ia] == blocks[ib] {
                return Equivalence::yes();
            }
            if let Some(t) = distinguishing_trace(a, b, None) {
                return Equivalence::no(Counterexample::Trace(t));
            }
            let sig = |s: StateId| -> BTreeSet<(&Label, usize)> {
                edges[s].iter().map(|(l, t)| (*l, blocks[*t])).collect()
            };
            let (sa, sb) = (sig(ia), sig(ib));
            let label = sa
                .symmetric_difference(&sb)
                .next()
                .map(|(l, _)| (*l).clone())
                .unwrap_or(Label::Tau);
            Equivalence::no(Counterexample::Split { label })
        }
    }
}

type Edges<'a> = Vec<Vec<(&'a Label, StateId)>>;

/// Coarsest strong bisimulation on the disjoint union of `a` and `b`; states
/// of `b` are offset by `a.num_states`.
fn bisim_partition<'a>(a: &'a Automaton, b: &'a Automaton) -> (Vec<usize>, Edges<'a>) {
    let n = a.num_states + b.num_states;
    let mut edges: Edges<'a> = vec![Vec::new(); n];
    for t in &a.transitions {
        edges[t.from].push((&t.label, t.to));
    }
    for t in &b.transitions {
        edges[a.num_states + t.from].push((&t.label, a.num_states + t.to));
    }
    let mut blocks = vec![0usize; n];
    let mut count = 1;
    loop {
        let mut ids: BTreeMap<Signature<'_>, usize> = BTreeMap::new();
        let next: Vec<usize> = (0..n)
            .map(|s| {
                let sig: BTreeSet<(&Label, usize)> =
                    edges[s].iter().map(|(l, t)| (*l, blocks[*t])).collect();
                let fresh = ids.len();
                *ids.entry((blocks[s], sig)).or_insert(fresh)
            })
            .collect();
        let new_count = ids.len();
        blocks = next;
        if new_count == count {
            return (blocks, edges);
        }
        count = new_count;
    }
}

/// Shortest tau-abstracted trace of exactly one of the automata, searching
/// up to `limit` labels (unbounded when `None`).
fn distinguishing_trace(a: &Automaton, b: &Automaton, limit: Option<usize>) -> Option<Trace> {
    let (la, lb) = (Lts::new(a), Lts::new(b));
    let start = (la.initial_set(), lb.initial_set());
    let mut seen: HashSet<(StateSet, StateSet)> = HashSet::from([start.clone()]);
    let mut queue: VecDeque<(StateSet, StateSet, Trace)> = VecDeque::from([(start.0, start.1, Vec::new())]);
    while let Some((sa, sb, trace)) = queue.pop_front() {
        if limit.is_some_and(|k| trace.len() >= k) {
            continue;
        }
        let labels: BTreeSet<Label> = la.enabled(&sa).union(&lb.enabled(&sb)).cloned().collect();
        for label in labels {
            let na = la.step(&sa, &label);
            let nb = lb.step(&sb, &label);
            let mut t = trace.clone();
            t.push(label);
            if na.is_empty() != nb.is_empty() {
                return Some(t);
            }
            if seen.insert((na.clone(), nb.clone())) {
                queue.push_back((na, nb, t));
            }
        }
    }
    None
}

/// A bijection `map` from states of `a` to states of `b` preserving the
/// initial state and the transition relation exactly, if one exists.
pub fn isomorphism(a: &Automaton, b: &Automaton) -> Option<Vec<StateId>> {
    let ea: BTreeSet<(StateId, &Label, StateId)> =
        a.transitions.iter().map(|t| (t.from, &t.label, t.to)).collect();
    let eb: BTreeSet<(StateId, &Label, StateId)> =
        b.transitions.iter().map(|t| (t.from, &t.label, t.to)).collect();
    if a.num_states != b.num_states || ea.len() != eb.len() {
        return None;
    }
    let n = a.num_states;
    let colors = refine_colors(a, b, &ea, &eb);
    if colors[a.initial] != colors[n + b.initial] {
        return None;
    }

    let mut out_a: Vec<Vec<(&Label, StateId)>> = vec![Vec::new(); n];
    let mut in_a: Vec<Vec<(&Label, StateId)>> = vec![Vec::new(); n];
    for &(f, l, t) in &ea {
        out_a[f].push((l, t));
        in_a[t].push((l, f));
    }

    // Assign in breadth-first order from the initial state so that
    // neighbours of already-mapped states come early and prune well.
    let mut order = a.bfs_order();
    let mut placed = vec![false; n];
    for &s in &order {
        placed[s] = true;
    }
    order.extend((0..n).filter(|&s| !placed[s]));

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    map[a.initial] = b.initial;
    used[b.initial] = true;
    let ok = consistent(a.initial, &map, &out_a, &in_a, &eb);
    if ok && assign(&order, 0, &mut map, &mut used, &colors, &out_a, &in_a, &eb, n) {
        Some(map)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn assign(
    order: &[StateId],
    i: usize,
    map: &mut Vec<StateId>,
    used: &mut Vec<bool>,
    colors: &[usize],
    out_a: &[Vec<(&Label, StateId)>],
    in_a: &[Vec<(&Label, StateId)>],
    eb: &BTreeSet<(StateId, &Label, StateId)>,
    n: usize,
) -> bool {
    let Some(&s) = order.get(i) else {
        return true;
    };
    if map[s] != usize::MAX {
        return assign(order, i + 1, map, used, colors, out_a, in_a, eb, n);
    }
    for c in 0..n {
        if used[c] || colors[n + c] != colors[s] {
            continue;
        }
        map[s] = c;
        used[c] = true;
        if consistent(s, map, out_a, in_a, eb) && assign(order, i + 1, map, used, colors, out_a, in_a, eb, n) {
            return true;
        }
        map[s] = usize::MAX;
        used[c] = false;
    }
    false
}

fn consistent(
    s: StateId,
    map: &[StateId],
    out_a: &[Vec<(&Label, StateId)>],
    in_a: &[Vec<(&Label, StateId)>],
    eb: &BTreeSet<(StateId, &Label, StateId)>,
) -> bool {
    let ms = map[s];
    out_a[s]
        .iter()
        .all(|&(l, t)| map[t] == usize::MAX || eb.contains(&(ms, l, map[t])))
        && in_a[s]
            .iter()
            .all(|&(l, f)| map[f] == usize::MAX || eb.contains(&(map[f], l, ms)))
}

/// Joint colour refinement on the disjoint union; isomorphic states always
/// share a colour.
fn refine_colors(
    a: &Automaton,
    b: &Automaton,
    ea: &BTreeSet<(StateId, &Label, StateId)>,
    eb: &BTreeSet<(StateId, &Label, StateId)>,
) -> Vec<usize> {
    let n = a.num_states;
    let mut out: Vec<Vec<(&Label, usize)>> = vec![Vec::new(); 2 * n];
    let mut inc: Vec<Vec<(&Label, usize)>> = vec![Vec::new(); 2 * n];
    for &(f, l, t) in ea {
        out[f].push((l, t));
        inc[t].push((l, f));
    }
    for &(f, l, t) in eb {
        out[n + f].push((l, n + t));
        inc[n + t].push((l, n + f));
    }
    let mut colors: Vec<usize> = (0..2 * n)
        .map(|s| usize::from(s == a.initial || s == n + b.initial))
        .collect();
    let mut count = 0;
    loop {
        let mut ids: BTreeMap<PairSignature<'_>, usize> = BTreeMap::new();
        let next: Vec<usize> = (0..2 * n)
            .map(|s| {
                let mut o: Vec<(&Label, usize)> = out[s].iter().map(|&(l, t)| (l, colors[t])).collect();
                let mut i: Vec<(&Label, usize)> = inc[s].iter().map(|&(l, f)| (l, colors[f])).collect();
                o.sort();
                i.sort();
                let fresh = ids.len();
                *ids.entry((colors[s], o, i)).or_insert(fresh)
            })
            .collect();
        colors = next;
        if ids.len() == count {
            return colors;
        }
        count = ids.len();
    }
}
