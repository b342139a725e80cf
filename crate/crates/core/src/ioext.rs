//! Input/output extensions: request strategies, angelic completion,
//! input-enabledness and composition of input/output automata.
//!
//! A boundary port `P` has a request action `?P` (an input offered by the
//! environment) and observation actions `!P(d)` (outputs). Which requests
//! are pending is tracked by a per-port counter woven into the state space.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lts::{Lts, StateSet};
use crate::model::{Action, ActionKind, Automaton, Label, PortName, StateId};
use crate::semantics::{default_compat, fused_name, hide_ports, product_with, SemanticsError, DEFAULT_STATE_CEILING};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Overflow {
    #[default]
    Ignore,
    Overwrite,
}

/// What happens to a request `?P` while earlier ones are pending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RequestStrategy {
    /// A repeated request is dropped.
    #[default]
    Ignore,
    /// A repeated request replaces the pending one.
    Overwrite,
    /// Up to `bound` requests stay pending.
    Queue { bound: usize, overflow: Overflow },
}

impl RequestStrategy {
    pub const DEFAULT_QUEUE_BOUND: usize = 2;

    /// Maximum number of pending requests per port.
    pub fn bound(&self) -> usize {
        match self {
            RequestStrategy::Ignore | RequestStrategy::Overwrite => 1,
            RequestStrategy::Queue { bound, .. } => *bound,
        }
    }
}

impl fmt::Display for RequestStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RequestStrategy::Ignore => f.write_str("ignore"),
            RequestStrategy::Overwrite => f.write_str("overwrite"),
            RequestStrategy::Queue {
                bound,
                overflow: Overflow::Ignore,
            } => write!(f, "queue:{bound}"),
            RequestStrategy::Queue {
                bound,
                overflow: Overflow::Overwrite,
            } => write!(f, "queue:{bound}:overwrite"),
        }
    }
}

/// Parses `ignore`, `overwrite`, `queue`, `queue:N` and `queue:N:overwrite`.
impl FromStr for RequestStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bound = |text: &str| match text.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!("queue bound must be a positive integer, got `{text}`")),
        };
        match parts[..] {
            ["ignore"] => Ok(RequestStrategy::Ignore),
            ["overwrite"] => Ok(RequestStrategy::Overwrite),
            ["queue"] => Ok(RequestStrategy::Queue {
                bound: Self::DEFAULT_QUEUE_BOUND,
                overflow: Overflow::Ignore,
            }),
            ["queue", n] => Ok(RequestStrategy::Queue {
                bound: bound(n)?,
                overflow: Overflow::Ignore,
            }),
            ["queue", n, o] => {
                let overflow = match o {
                    "ignore" => Overflow::Ignore,
                    "overwrite" => Overflow::Overwrite,
                    _ => return Err(format!("unknown overflow policy `{o}`")),
                };
                Ok(RequestStrategy::Queue {
                    bound: bound(n)?,
                    overflow,
                })
            }
            _ => Err(format!("unknown strategy `{s}` (expected ignore, overwrite or queue:N)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoExtError {
    #[error("automaton has no request actions")]
    NotIo,
    #[error("queue bound must be at least 1")]
    ZeroBound,
    #[error("state space exceeds the ceiling of {ceiling} states")]
    StateExplosion { ceiling: usize },
    #[error("port `{port}` is not an {expected} port of its automaton")]
    DirectionMismatch { port: PortName, expected: &'static str },
}

/// Weave pending-request counters (0..=bound per port) into `a`, without
/// any handling of requests beyond the bound.
///
/// A label observing `!P` needs a pending request at `P` and consumes it.
/// Any set of ports below the bound may be requested in the same step,
/// alone or together with an observation on other ports.
pub fn pending_requests(a: &Automaton, bound: usize, ceiling: usize) -> Result<Automaton, IoExtError> {
    Ok(weave(a, bound, ceiling)?.0.reachable())
}

/// [`pending_requests`] before renumbering, with the saturated ports of each state.
fn weave(a: &Automaton, bound: usize, ceiling: usize) -> Result<(Automaton, Vec<Vec<PortName>>), IoExtError> {
    if bound == 0 {
        return Err(IoExtError::ZeroBound);
    }
    let ports: Vec<PortName> = a
        .inputs
        .iter()
        .filter(|x| x.kind == ActionKind::Request)
        .map(|x| x.port.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if ports.is_empty() {
        return Err(IoExtError::NotIo);
    }
    let port_index: HashMap<&PortName, usize> = ports.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let adj = a.adjacency();

    type Key = (StateId, Vec<usize>);
    let start: Key = (a.initial, vec![0; ports.len()]);
    let mut index: HashMap<Key, StateId> = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start]);
    let mut out = Automaton::new(1, 0);
    while let Some((s, counts)) = queue.pop_front() {
        let from = index[&(s, counts.clone())];
        let mut moves: Vec<(Label, Key)> = Vec::new();
        // base step: stay idle (None) or take an observation transition
        let mut bases: Vec<Option<(&Label, StateId, Vec<usize>)>> = vec![None];
        for &ti in &adj[s] {
            let t = &a.transitions[ti];
            if t.label.is_tau() {
                moves.push((Label::Tau, (t.to, counts.clone())));
                continue;
            }
            let mut next = counts.clone();
            let mut ok = true;
            for act in t.label.actions().iter().filter(|x| x.kind == ActionKind::Observe) {
                match port_index.get(&act.port) {
                    Some(&i) if next[i] >= 1 => next[i] -= 1,
                    _ => ok = false,
                }
            }
            if ok {
                bases.push(Some((&t.label, t.to, next)));
            }
        }
        for base in bases {
            let (to, base_counts, base_actions, used): (StateId, Vec<usize>, Vec<Action>, BTreeSet<usize>) = match &base {
                None => (s, counts.clone(), Vec::new(), BTreeSet::new()),
                Some((label, to, next)) => {
                    let used = label
                        .actions()
                        .iter()
                        .filter_map(|x| port_index.get(&x.port).copied())
                        .collect();
                    (*to, next.clone(), label.actions().to_vec(), used)
                }
            };
            let eligible: Vec<usize> = (0..ports.len())
                .filter(|i| !used.contains(i) && counts[*i] < bound)
                .collect();
            for mask in 0u64..(1u64 << eligible.len()) {
                if mask == 0 && base.is_none() {
                    continue;
                }
                let mut next = base_counts.clone();
                let mut actions = base_actions.clone();
                for (bit, &i) in eligible.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        next[i] += 1;
                        actions.push(Action::request(ports[i].as_str()));
                    }
                }
                moves.push((Label::from_actions(actions), (to, next)));
            }
        }
        for (label, key) in moves {
            let fresh = index.len();
            let to = *index.entry(key.clone()).or_insert_with(|| {
                queue.push_back(key);
                fresh
            });
            if index.len() > ceiling {
                return Err(IoExtError::StateExplosion { ceiling });
            }
            out.add(from, label, to);
        }
    }
    out.num_states = index.len();
    out.inputs = a.inputs.clone();
    out.outputs = a.outputs.clone();
    let mut saturated = vec![Vec::new(); out.num_states];
    for ((_, counts), &id) in &index {
        saturated[id] = (0..ports.len()).filter(|&i| counts[i] == bound).map(|i| ports[i].clone()).collect();
    }
    Ok((out, saturated))
}

pub fn apply_strategy(a: &Automaton, strategy: &RequestStrategy) -> Result<Automaton, IoExtError> {
    apply_strategy_bounded(a, strategy, DEFAULT_STATE_CEILING)
}

/// Weave the strategy's request bookkeeping into an observation automaton.
///
/// Requests carry no data, so overwriting a pending request is
/// indistinguishable from ignoring the new one: every strategy adds a `{?P}`
/// self-loop wherever port `P` is saturated.
pub fn apply_strategy_bounded(a: &Automaton, strategy: &RequestStrategy, ceiling: usize) -> Result<Automaton, IoExtError> {
    let (mut woven, saturated) = weave(a, strategy.bound(), ceiling)?;
    for (s, ports) in saturated.iter().enumerate() {
        for p in ports {
            woven.add(s, Label::single(Action::request(p.as_str())), s);
        }
    }
    Ok(woven.normalized().reachable())
}

/// Add a self-loop for every atomic input that a reachable state cannot take.
pub fn angelic_completion(a: &Automaton) -> Automaton {
    let lts = Lts::new(a);
    let mut out = a.clone();
    for s in a.bfs_order() {
        for input in a.atomic_inputs() {
            if lts.step(&StateSet::from([s]), &input).is_empty() {
                out.add(s, input, s);
            }
        }
    }
    out.normalized()
}

/// A reachable state that cannot accept an atomic input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingInput {
    pub state: StateId,
    pub input: Label,
}

/// `Ok` iff every reachable state accepts every atomic input `{?P}`
/// (possibly after tau steps).
pub fn is_input_enabled(a: &Automaton) -> Result<(), MissingInput> {
    let lts = Lts::new(a);
    for s in a.bfs_order() {
        for input in a.atomic_inputs() {
            if lts.step(&StateSet::from([s]), &input).is_empty() {
                return Err(MissingInput { state: s, input });
            }
        }
    }
    Ok(())
}

/// Parallel composition connecting each port pair `(p, q)`: port `p` of `a`
/// and port `q` of `b` are joined into one internal node, so their requests
/// and observations synchronise (equal data) and are hidden.
pub fn compose_systems(a: &Automaton, b: &Automaton, shared: &[(PortName, PortName)]) -> Result<Automaton, SemanticsError> {
    for (p, q) in shared {
        if !a.outputs.iter().any(|x| &x.port == p) {
            return Err(IoExtError::DirectionMismatch {
                port: p.clone(),
                expected: "output",
            }
            .into());
        }
        if !b.inputs.iter().any(|x| &x.port == q) {
            return Err(IoExtError::DirectionMismatch {
                port: q.clone(),
                expected: "input",
            }
            .into());
        }
    }
    let joined = product_with(a, b, shared, &default_compat, Some(DEFAULT_STATE_CEILING))?;
    let fused: BTreeSet<PortName> = shared.iter().map(|(p, q)| fused_name(p, q)).collect();
    Ok(hide_ports(&joined, &fused).reachable())
}
