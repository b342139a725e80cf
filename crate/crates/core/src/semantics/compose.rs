//! Synchronised product and hiding.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::model::{Action, ActionKind, Automaton, Label, PortName, StateId};

use super::SemanticsError;

/// Kind of the fused action when `x` (left) meets `y` (right), or `None` if
/// the two cannot synchronise.
pub type Compat<'a> = &'a dyn Fn(&Action, &Action) -> Option<ActionKind>;

/// Canonical name of the internal port joining `a` and `b`.
pub fn fused_name(a: &PortName, b: &PortName) -> PortName {
    let (x, y) = if a.as_str() <= b.as_str() { (a, b) } else { (b, a) };
    PortName::new(format!("{x}~{y}"))
}

/// Equal data, and equal kinds or matching colours: flow meets flow, and a
/// no-flow end that gives a reason meets one that requires or gives one.
pub fn default_compat(x: &Action, y: &Action) -> Option<ActionKind> {
    use ActionKind::{ColorFlow as W, ColorGiveReason as G, ColorRequireReason as R};
    if x.data != y.data {
        return None;
    }
    match (x.kind, y.kind) {
        (W, W) => Some(W),
        (G, G) => Some(G),
        (G, R) | (R, G) => Some(R),
        (k1, k2) if k1 == k2 && !k1.is_color() => Some(k1),
        _ => None,
    }
}

/// Per-label view of the synchronised ports: for each pair index, the
/// actions of the label on that pair's port.
#[derive(Clone)]
struct Split {
    touched: Vec<(usize, Vec<Action>)>,
    rest: Vec<Action>,
}

fn split(label: &Label, side: &HashMap<&PortName, usize>) -> Split {
    let mut touched: Vec<(usize, Vec<Action>)> = Vec::new();
    let mut rest = Vec::new();
    for a in label.actions() {
        match side.get(&a.port) {
            Some(&i) => match touched.iter_mut().find(|(j, _)| *j == i) {
                Some((_, v)) => v.push(a.clone()),
                None => touched.push((i, vec![a.clone()])),
            },
            None => rest.push(a.clone()),
        }
    }
    touched.sort_by_key(|(i, _)| *i);
    Split { touched, rest }
}

fn declared_ports(a: &Automaton) -> BTreeSet<PortName> {
    a.ports()
        .into_iter()
        .chain(a.inputs.iter().chain(&a.outputs).map(|x| x.port.clone()))
        .collect()
}

/// Synchronised product fusing each `(left, right)` port pair with
/// [`default_compat`].
pub fn product(a: &Automaton, b: &Automaton, sync: &[(PortName, PortName)]) -> Result<Automaton, SemanticsError> {
    product_with(a, b, sync, &default_compat, None)
}

/// Synchronised product of `a` and `b`.
///
/// A joint step fires a label of `a` and a label of `b` together when every
/// synchronised pair is used by both or by neither; fused actions are
/// renamed to [`fused_name`]. A label touching no synchronised port may also
/// fire alone; tau always moves alone. Only the part reachable from
/// `(a.initial, b.initial)` is built; `ceiling` bounds its state count.
pub fn product_with(
    a: &Automaton,
    b: &Automaton,
    sync: &[(PortName, PortName)],
    compat: Compat<'_>,
    ceiling: Option<usize>,
) -> Result<Automaton, SemanticsError> {
    let (pa, pb) = (declared_ports(a), declared_ports(b));
    for (x, y) in sync {
        if !pa.contains(x) {
            return Err(SemanticsError::UnknownSyncPort(x.clone()));
        }
        if !pb.contains(y) {
            return Err(SemanticsError::UnknownSyncPort(y.clone()));
        }
    }
    let left: HashMap<&PortName, usize> = sync.iter().enumerate().map(|(i, (x, _))| (x, i)).collect();
    let right: HashMap<&PortName, usize> = sync.iter().enumerate().map(|(i, (_, y))| (y, i)).collect();
    let names: Vec<PortName> = sync.iter().map(|(x, y)| fused_name(x, y)).collect();

    let edges = |aut: &Automaton, side: &HashMap<&PortName, usize>| -> Vec<Vec<(Label, Option<Split>, StateId)>> {
        let mut out = vec![Vec::new(); aut.num_states];
        for t in &aut.transitions {
            let s = if t.label.is_tau() { None } else { Some(split(&t.label, side)) };
            out[t.from].push((t.label.clone(), s, t.to));
        }
        out
    };
    let ea = edges(a, &left);
    let eb = edges(b, &right);

    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut result = Automaton::new(1, 0);
    index.insert((a.initial, b.initial), 0);
    queue.push_back((a.initial, b.initial));

    while let Some((sa, sb)) = queue.pop_front() {
        let from = index[&(sa, sb)];
        let mut moves: Vec<(Label, (StateId, StateId))> = Vec::new();
        for (la, split_a, ta) in &ea[sa] {
            match split_a {
                None => moves.push((Label::Tau, (*ta, sb))),
                Some(s) if s.touched.is_empty() => moves.push((la.clone(), (*ta, sb))),
                _ => {}
            }
        }
        for (lb, split_b, tb) in &eb[sb] {
            match split_b {
                None => moves.push((Label::Tau, (sa, *tb))),
                Some(s) if s.touched.is_empty() => moves.push((lb.clone(), (sa, *tb))),
                _ => {}
            }
        }
        for (_, split_a, ta) in &ea[sa] {
            let Some(xa) = split_a else { continue };
            for (_, split_b, tb) in &eb[sb] {
                let Some(xb) = split_b else { continue };
                if let Some(label) = joint(xa, xb, &names, compat) {
                    moves.push((label, (*ta, *tb)));
                }
            }
        }
        for (label, target) in moves {
            let next = index.len();
            let to = *index.entry(target).or_insert_with(|| {
                queue.push_back(target);
                next
            });
            if let Some(max) = ceiling {
                if index.len() > max {
                    return Err(SemanticsError::StateExplosion { ceiling: max });
                }
            }
            result.add(from, label, to);
        }
    }
    result.num_states = index.len();
    let fused: BTreeSet<&PortName> = left.keys().chain(right.keys()).copied().collect();
    let keep = |x: &&Action| !fused.contains(&x.port);
    result.inputs = a.inputs.iter().chain(&b.inputs).filter(keep).cloned().collect();
    result.outputs = a.outputs.iter().chain(&b.outputs).filter(keep).cloned().collect();
    Ok(result.normalized())
}

fn joint(xa: &Split, xb: &Split, names: &[PortName], compat: Compat<'_>) -> Option<Label> {
    if xa.touched.len() != xb.touched.len() {
        return None;
    }
    let mut actions: Vec<Action> = xa.rest.iter().chain(&xb.rest).cloned().collect();
    for ((i, va), (j, vb)) in xa.touched.iter().zip(&xb.touched) {
        if i != j || va.len() != vb.len() {
            return None;
        }
        for (x, y) in va.iter().zip(vb) {
            let kind = compat(x, y)?;
            actions.push(Action::new(names[*i].clone(), kind, x.data.clone()));
        }
    }
    Some(Label::from_actions(actions))
}

/// Remove the given actions from every label; emptied labels become tau.
pub fn hide(a: &Automaton, internal: &BTreeSet<Action>) -> Automaton {
    hide_where(a, |x| internal.contains(x))
}

/// Remove every action on one of `ports`.
pub fn hide_ports(a: &Automaton, ports: &BTreeSet<PortName>) -> Automaton {
    hide_where(a, |x| ports.contains(&x.port))
}

fn hide_where(a: &Automaton, hidden: impl Fn(&Action) -> bool) -> Automaton {
    let mut out = Automaton::new(a.num_states, a.initial);
    for t in &a.transitions {
        let label = match &t.label {
            Label::Actions(set) => Label::from_actions(set.iter().filter(|x| !hidden(x)).cloned()),
            other => other.clone(),
        };
        out.add(t.from, label, t.to);
    }
    out.inputs = a.inputs.iter().filter(|x| !hidden(x)).cloned().collect();
    out.outputs = a.outputs.iter().filter(|x| !hidden(x)).cloned().collect();
    out.normalized()
}
