//! Shared automaton representation: actions, labels and ground automata.
//!
//! One [`Automaton`] type serves every semantic mode (constraint automata,
//! action constraint automata, colorings and the input/output extension).
//! Labels are ground: data constraints have already been expanded over the
//! finite data domain, so a label is just a set of concrete actions.

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

pub type StateId = usize;

/// Name of a port or channel end.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortName(Arc<str>);

impl PortName {
    pub fn new(name: impl AsRef<str>) -> Self {
        PortName(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// User-level identifier: a letter followed by letters, digits or `_`.
    pub fn is_identifier(name: &str) -> bool {
        let mut chars = name.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }
}

impl fmt::Display for PortName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for PortName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for PortName {
    fn from(s: &str) -> Self {
        PortName::new(s)
    }
}

/// A value of the circuit's finite data domain.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

impl Atom {
    pub fn new(name: impl AsRef<str>) -> Self {
        Atom(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_valid(text: &str) -> bool {
        !text.is_empty()
            && text
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '*')
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Self {
        Atom::new(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Flow,
    Request,
    Observe,
    Block,
    Start,
    Finish,
    Unblock,
    ColorFlow,
    ColorGiveReason,
    ColorRequireReason,
}

impl ActionKind {
    pub const ALL: [ActionKind; 10] = [
        ActionKind::Flow,
        ActionKind::Request,
        ActionKind::Observe,
        ActionKind::Block,
        ActionKind::Start,
        ActionKind::Finish,
        ActionKind::Unblock,
        ActionKind::ColorFlow,
        ActionKind::ColorGiveReason,
        ActionKind::ColorRequireReason,
    ];

    /// Prefix used in the canonical label syntax.
    pub fn marker(self) -> &'static str {
        match self {
            ActionKind::Flow => "",
            ActionKind::Request => "?",
            ActionKind::Observe => "!",
            ActionKind::Block => "b:",
            ActionKind::Start => "s:",
            ActionKind::Finish => "f:",
            ActionKind::Unblock => "u:",
            ActionKind::ColorFlow => "w:",
            ActionKind::ColorGiveReason => "g:",
            ActionKind::ColorRequireReason => "r:",
        }
    }

    pub fn is_color(self) -> bool {
        matches!(
            self,
            ActionKind::ColorFlow | ActionKind::ColorGiveReason | ActionKind::ColorRequireReason
        )
    }

    pub fn is_aca(self) -> bool {
        matches!(
            self,
            ActionKind::Block | ActionKind::Start | ActionKind::Finish | ActionKind::Unblock
        )
    }
}

impl PartialOrd for ActionKind {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ActionKind {
    fn cmp(&self, other: &Self) -> Ordering {
        self.marker().cmp(other.marker())
    }
}

/// A single ground action: a port, what happens on it, and the data value.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub port: PortName,
    pub kind: ActionKind,
    pub data: Option<Atom>,
}

impl Action {
    pub fn new(port: impl Into<PortName>, kind: ActionKind, data: Option<Atom>) -> Self {
        Action {
            port: port.into(),
            kind,
            data,
        }
    }

    pub fn flow(port: &str) -> Self {
        Action::new(port, ActionKind::Flow, None)
    }

    pub fn request(port: &str) -> Self {
        Action::new(port, ActionKind::Request, None)
    }

    pub fn observe(port: &str) -> Self {
        Action::new(port, ActionKind::Observe, None)
    }

    pub fn with_kind(&self, kind: ActionKind) -> Self {
        Action {
            port: self.port.clone(),
            kind,
            data: self.data.clone(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.marker(), self.port)?;
        if let Some(d) = &self.data {
            write!(f, "({d})")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Nonempty, sorted set of actions firing together.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ActionSet(Vec<Action>);

impl ActionSet {
    /// Returns `None` for an empty set.
    pub fn new(actions: impl IntoIterator<Item = Action>) -> Option<Self> {
        let mut v: Vec<Action> = actions.into_iter().collect();
        v.sort();
        v.dedup();
        if v.is_empty() {
            None
        } else {
            Some(ActionSet(v))
        }
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Action> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, action: &Action) -> bool {
        self.0.binary_search(action).is_ok()
    }

    /// At most one action per (port, kind) pair.
    pub fn is_well_formed(&self) -> bool {
        self.0
            .windows(2)
            .all(|w| (&w[0].port, w[0].kind) != (&w[1].port, w[1].kind))
    }
}

/// Transition label.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Actions(ActionSet),
    Tau,
    Delta,
    Theta,
}

impl Label {
    pub fn from_actions(actions: impl IntoIterator<Item = Action>) -> Label {
        match ActionSet::new(actions) {
            Some(set) => Label::Actions(set),
            None => Label::Tau,
        }
    }

    pub fn single(action: Action) -> Label {
        Label::from_actions([action])
    }

    pub fn actions(&self) -> &[Action] {
        match self {
            Label::Actions(set) => set.actions(),
            _ => &[],
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau)
    }

    pub fn is_observable(&self) -> bool {
        !self.is_tau()
    }

    /// True when the label contains at least one output (observe) action.
    pub fn has_output(&self) -> bool {
        self.actions().iter().any(|a| a.kind == ActionKind::Observe)
    }

    pub fn has_input(&self) -> bool {
        self.actions().iter().any(|a| a.kind == ActionKind::Request)
    }

    /// Nonempty and made of request actions only.
    pub fn is_input_only(&self) -> bool {
        let acts = self.actions();
        !acts.is_empty() && acts.iter().all(|a| a.kind == ActionKind::Request)
    }

    /// Nonempty and made of observe actions only.
    pub fn is_output_only(&self) -> bool {
        let acts = self.actions();
        !acts.is_empty() && acts.iter().all(|a| a.kind == ActionKind::Observe)
    }

    /// The output part of a label, if it has one.
    pub fn output_projection(&self) -> Option<Label> {
        let outs: Vec<Action> = self
            .actions()
            .iter()
            .filter(|a| a.kind == ActionKind::Observe)
            .cloned()
            .collect();
        ActionSet::new(outs).map(Label::Actions)
    }

    fn rank(&self) -> u8 {
        match self {
            Label::Tau => 0,
            Label::Actions(_) if self.is_input_only() => 1,
            Label::Actions(_) if !self.has_output() => 2,
            Label::Actions(_) => 3,
            Label::Delta => 4,
            Label::Theta => 5,
        }
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Stimuli sort before observations, quiescence last.
impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank()
            .cmp(&other.rank())
            .then_with(|| self.actions().cmp(other.actions()))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => f.write_str("tau"),
            Label::Delta => f.write_str("delta"),
            Label::Theta => f.write_str("theta"),
            Label::Actions(set) => {
                f.write_str("{")?;
                for (i, a) in set.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse label `{text}`: {reason}")]
pub struct LabelParseError {
    pub text: String,
    pub reason: String,
}

fn is_port_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '~' | '#' | '@')
}

fn parse_action(text: &str) -> Result<Action, String> {
    let kind = ActionKind::ALL
        .iter()
        .copied()
        .filter(|k| *k != ActionKind::Flow)
        .find(|k| text.starts_with(k.marker()))
        .unwrap_or(ActionKind::Flow);
    let rest = &text[kind.marker().len()..];
    let (port, data) = match rest.find('(') {
        Some(open) => {
            if !rest.ends_with(')') {
                return Err(format!("unterminated data in `{text}`"));
            }
            let atom = &rest[open + 1..rest.len() - 1];
            if !Atom::is_valid(atom) {
                return Err(format!("bad data value `{atom}`"));
            }
            (&rest[..open], Some(Atom::new(atom)))
        }
        None => (rest, None),
    };
    if port.is_empty() || !port.chars().all(is_port_char) {
        return Err(format!("bad port name `{port}`"));
    }
    Ok(Action::new(port, kind, data))
}

impl FromStr for Label {
    type Err = LabelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: String| LabelParseError {
            text: s.to_string(),
            reason,
        };
        let t = s.trim();
        match t {
            "tau" => return Ok(Label::Tau),
            "delta" => return Ok(Label::Delta),
            "theta" => return Ok(Label::Theta),
            _ => {}
        }
        let inner = t
            .strip_prefix('{')
            .and_then(|x| x.strip_suffix('}'))
            .ok_or_else(|| err("expected `{...}`, `tau`, `delta` or `theta`".into()))?;
        if inner.trim().is_empty() {
            return Err(err("empty action set".into()));
        }
        let mut actions = Vec::new();
        for part in inner.split(',') {
            actions.push(parse_action(part.trim()).map_err(err)?);
        }
        let n = actions.len();
        let set = ActionSet::new(actions).ok_or_else(|| err("empty action set".into()))?;
        if set.len() != n {
            return Err(err("duplicate action".into()));
        }
        if !set.is_well_formed() {
            return Err(err("two actions share a port and kind".into()));
        }
        Ok(Label::Actions(set))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: StateId,
    pub label: Label,
    pub to: StateId,
}

impl Transition {
    pub fn new(from: StateId, label: Label, to: StateId) -> Self {
        Transition { from, label, to }
    }
}

impl fmt::Debug for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.from, self.label, self.to)
    }
}

/// A finite automaton over ground labels.
///
/// States are `0..num_states`. `inputs` and `outputs` are the declared
/// input/output action alphabets; both are empty outside IO mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    pub num_states: usize,
    pub initial: StateId,
    pub transitions: Vec<Transition>,
    pub inputs: BTreeSet<Action>,
    pub outputs: BTreeSet<Action>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("initial state {0} out of range")]
    InitialOutOfRange(StateId),
    #[error("transition {0:?} references a missing state")]
    DanglingTransition(Transition),
    #[error("action {0} is both an input and an output")]
    OverlappingAlphabets(Action),
    #[error("action {0} is not declared in the input/output alphabet")]
    UndeclaredAction(Action),
}

impl Automaton {
    /// An automaton with `num_states` states and no transitions.
    pub fn new(num_states: usize, initial: StateId) -> Self {
        Automaton {
            num_states,
            initial,
            transitions: Vec::new(),
            inputs: BTreeSet::new(),
            outputs: BTreeSet::new(),
        }
    }

    pub fn add(&mut self, from: StateId, label: Label, to: StateId) {
        self.transitions.push(Transition::new(from, label, to));
    }

    /// Sort transitions and drop duplicates.
    pub fn normalize(&mut self) {
        self.transitions
            .sort_by(|a, b| (a.from, &a.label, a.to).cmp(&(b.from, &b.label, b.to)));
        self.transitions.dedup();
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn is_io(&self) -> bool {
        !self.inputs.is_empty() || !self.outputs.is_empty()
    }

    /// Every action occurring on some transition.
    pub fn alphabet(&self) -> BTreeSet<Action> {
        self.transitions
            .iter()
            .flat_map(|t| t.label.actions().iter().cloned())
            .collect()
    }

    pub fn ports(&self) -> BTreeSet<PortName> {
        self.alphabet().into_iter().map(|a| a.port).collect()
    }

    /// Distinct labels, in canonical order.
    pub fn labels(&self) -> BTreeSet<Label> {
        self.transitions.iter().map(|t| t.label.clone()).collect()
    }

    /// Singleton request labels `{?P}`, one per declared input action.
    pub fn atomic_inputs(&self) -> Vec<Label> {
        self.inputs.iter().cloned().map(Label::single).collect()
    }

    pub fn is_input_label(&self, label: &Label) -> bool {
        let acts = label.actions();
        !acts.is_empty() && acts.iter().all(|a| self.inputs.contains(a))
    }

    pub fn is_output_label(&self, label: &Label) -> bool {
        label.actions().iter().any(|a| self.outputs.contains(a))
    }

    /// Outgoing transition indices per state.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_states];
        for (i, t) in self.transitions.iter().enumerate() {
            if t.from < self.num_states {
                adj[t.from].push(i);
            }
        }
        adj
    }

    pub fn outgoing(&self, state: StateId) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.from == state)
    }

    pub fn check(&self) -> Result<(), AutomatonError> {
        if self.initial >= self.num_states {
            return Err(AutomatonError::InitialOutOfRange(self.initial));
        }
        for t in &self.transitions {
            if t.from >= self.num_states || t.to >= self.num_states {
                return Err(AutomatonError::DanglingTransition(t.clone()));
            }
        }
        if let Some(a) = self.inputs.intersection(&self.outputs).next() {
            return Err(AutomatonError::OverlappingAlphabets(a.clone()));
        }
        if self.is_io() {
            for t in &self.transitions {
                for a in t.label.actions() {
                    if !self.inputs.contains(a) && !self.outputs.contains(a) {
                        return Err(AutomatonError::UndeclaredAction(a.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    /// States reachable from the initial state, in canonical breadth-first
    /// order (outgoing edges visited in label order).
    pub fn bfs_order(&self) -> Vec<StateId> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.num_states];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        if self.initial < self.num_states {
            seen[self.initial] = true;
            queue.push_back(self.initial);
        }
        while let Some(s) = queue.pop_front() {
            order.push(s);
            let mut edges: Vec<&Transition> = adj[s].iter().map(|&i| &self.transitions[i]).collect();
            edges.sort_by(|a, b| (&a.label, a.to).cmp(&(&b.label, b.to)));
            for t in edges {
                if !seen[t.to] {
                    seen[t.to] = true;
                    queue.push_back(t.to);
                }
            }
        }
        order
    }

    /// Drop unreachable states and renumber in canonical BFS order, initial = 0.
    pub fn reachable(&self) -> Automaton {
        let order = self.bfs_order();
        let mut map = vec![usize::MAX; self.num_states];
        for (new, &old) in order.iter().enumerate() {
            map[old] = new;
        }
        let mut out = Automaton {
            num_states: order.len(),
            initial: 0,
            transitions: Vec::new(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
        };
        for t in &self.transitions {
            if map[t.from] != usize::MAX {
                out.add(map[t.from], t.label.clone(), map[t.to]);
            }
        }
        out.normalized()
    }

    /// Reachable states in breadth-first order, then the unreachable ones.
    pub fn canonical_order(&self) -> Vec<StateId> {
        let mut order = self.bfs_order();
        let mut seen = vec![false; self.num_states];
        for &s in &order {
            seen[s] = true;
        }
        order.extend((0..self.num_states).filter(|&s| !seen[s]));
        order
    }

    /// Renumber so that state `order[i]` becomes `i`, keeping every state.
    /// Returns the renumbered automaton and the old-to-new map.
    pub fn renumber(&self, order: &[StateId]) -> (Automaton, Vec<StateId>) {
        let mut map = vec![0; self.num_states];
        for (new, &old) in order.iter().enumerate() {
            map[old] = new;
        }
        let mut out = Automaton {
            num_states: self.num_states,
            initial: map[self.initial],
            transitions: Vec::new(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
        };
        for t in &self.transitions {
            out.add(map[t.from], t.label.clone(), map[t.to]);
        }
        (out.normalized(), map)
    }

    /// Each (state, label) pair has at most one successor and there is no tau.
    pub fn is_deterministic(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.transitions
            .iter()
            .all(|t| !t.label.is_tau() && seen.insert((t.from, &t.label)))
    }

    /// Rename ports with `f`; labels whose actions merge are left as is.
    pub fn map_actions(&self, f: impl Fn(&Action) -> Action) -> Automaton {
        let relabel = |l: &Label| match l {
            Label::Actions(set) => Label::from_actions(set.iter().map(&f)),
            other => other.clone(),
        };
        let mut out = Automaton {
            num_states: self.num_states,
            initial: self.initial,
            transitions: self
                .transitions
                .iter()
                .map(|t| Transition::new(t.from, relabel(&t.label), t.to))
                .collect(),
            inputs: self.inputs.iter().map(&f).collect(),
            outputs: self.outputs.iter().map(&f).collect(),
        };
        out.normalize();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_text_is_canonical() {
        let l: Label = "{!C,?A, B(1)}".parse().unwrap();
        assert_eq!(l.to_string(), "{?A,B(1),!C}");
        let l: Label = "{?A,!B(1),C}".parse().unwrap();
        assert_eq!(l.to_string(), "{?A,!B(1),C}");
        assert_eq!("tau".parse::<Label>().unwrap(), Label::Tau);
        assert_eq!("{b:A,b:B}".parse::<Label>().unwrap().to_string(), "{b:A,b:B}");
    }

    #[test]
    fn malformed_labels_are_rejected() {
        for bad in ["{}", "A", "{A,A}", "{A(}", "{?}", "{A(x y)}", "{A(0),A(1)}"] {
            assert!(bad.parse::<Label>().is_err(), "{bad}");
        }
    }

    #[test]
    fn inputs_sort_before_outputs() {
        let b: Label = "{?B}".parse().unwrap();
        let a: Label = "{!A}".parse().unwrap();
        assert!(b < a);
        assert!(a < Label::Delta);
        assert!(Label::Tau < b);
    }

    #[test]
    fn output_projection_drops_requests() {
        let l: Label = "{!C,!A,?B}".parse().unwrap();
        assert_eq!(l.output_projection().unwrap().to_string(), "{!A,!C}");
        let l: Label = "{?B}".parse().unwrap();
        assert!(l.output_projection().is_none());
    }

    #[test]
    fn reachable_renumbers_from_initial() {
        let mut a = Automaton::new(4, 2);
        a.add(2, "{A}".parse().unwrap(), 3);
        a.add(3, "{B}".parse().unwrap(), 2);
        a.add(0, "{C}".parse().unwrap(), 1);
        let r = a.reachable();
        assert_eq!(r.num_states, 2);
        assert_eq!(r.initial, 0);
        assert_eq!(format!("{:?}", r.transitions), "[0 -{A}-> 1, 1 -{B}-> 0]");
    }

    #[test]
    fn check_catches_undeclared_io_actions() {
        let mut a = Automaton::new(1, 0);
        a.inputs.insert(Action::request("A"));
        a.add(0, "{!A}".parse().unwrap(), 0);
        assert!(matches!(a.check(), Err(AutomatonError::UndeclaredAction(_))));
    }
}
