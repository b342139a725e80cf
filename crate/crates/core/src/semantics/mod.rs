//! Compilation of circuits into ground automata.
//!
//! Every channel and node becomes a small automaton; the circuit is their
//! synchronised product with coinciding channel/node ends fused and then
//! hidden. A channel end meeting node `X` is called `ch{k}.X` on the channel
//! side and `X.ch{k}` on the node side. A boundary node with a single
//! channel end needs no automaton of its own: that end is simply named `X`.

mod compose;
mod primitives;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::circuit::{validate_circuit, Circuit, ChannelSpec, Diagnostic, NodeSpec};
use crate::ioext::{apply_strategy_bounded, IoExtError, RequestStrategy};
use crate::model::{Action, ActionKind, Automaton, PortName};

pub use compose::{default_compat, fused_name, hide, hide_ports, product, product_with, Compat};
pub use primitives::{channel_automaton, node_automaton};

/// Default bound on the number of states of any intermediate product.
pub const DEFAULT_STATE_CEILING: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    /// Constraint automata: ports fire with ground data.
    #[default]
    Ca,
    /// Action constraint automata: block/start/finish/unblock per port.
    Aca,
    /// Colouring: flow or no-flow (giving or requiring a reason) per port.
    Coloring,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ca => "ca",
            Mode::Aca => "aca",
            Mode::Coloring => "coloring",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("invalid circuit: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidCircuit(Vec<Diagnostic>),
    #[error("{what} is not supported in {mode} mode")]
    Unsupported { mode: Mode, what: String },
    #[error("input/output mode requires ca semantics, not {0}")]
    IoNeedsCa(Mode),
    #[error("synchronised port `{0}` does not occur in its automaton")]
    UnknownSyncPort(PortName),
    #[error("state space exceeds the ceiling of {ceiling} states")]
    StateExplosion { ceiling: usize },
    #[error(transparent)]
    Io(#[from] IoExtError),
}

pub fn channel_side_name(channel: usize, port: &PortName) -> PortName {
    PortName::new(format!("ch{channel}.{port}"))
}

pub fn node_side_name(port: &PortName, channel: usize) -> PortName {
    PortName::new(format!("{port}.ch{channel}"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileOptions {
    pub mode: Mode,
    /// Compile to an input/output automaton using this request strategy.
    pub io: Option<RequestStrategy>,
    pub ceiling: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            mode: Mode::Ca,
            io: None,
            ceiling: DEFAULT_STATE_CEILING,
        }
    }
}

/// Compile with the default state ceiling.
pub fn compile_circuit(c: &Circuit, mode: Mode, io: Option<RequestStrategy>) -> Result<Automaton, SemanticsError> {
    compile_circuit_with(
        c,
        &CompileOptions {
            mode,
            io,
            ..CompileOptions::default()
        },
    )
}

pub fn compile_circuit_with(c: &Circuit, opts: &CompileOptions) -> Result<Automaton, SemanticsError> {
    match &opts.io {
        None => compose_circuit(c, opts.mode, false, opts.ceiling),
        Some(strategy) => {
            if opts.mode != Mode::Ca {
                return Err(SemanticsError::IoNeedsCa(opts.mode));
            }
            let observed = observation_automaton_bounded(c, opts.ceiling)?;
            Ok(apply_strategy_bounded(&observed, strategy, opts.ceiling)?)
        }
    }
}

/// The plain CA compile with every boundary port action turned into an
/// observation `!P`; inputs are the requests `?P`, but none is used yet.
pub fn observation_automaton(c: &Circuit) -> Result<Automaton, SemanticsError> {
    observation_automaton_bounded(c, DEFAULT_STATE_CEILING)
}

fn observation_automaton_bounded(c: &Circuit, ceiling: usize) -> Result<Automaton, SemanticsError> {
    let plain = compose_circuit(c, Mode::Ca, false, ceiling)?;
    let boundary = c.boundary_ports();
    let mut observed = plain.map_actions(|a| {
        if a.kind == ActionKind::Flow && boundary.contains(&a.port) {
            a.with_kind(ActionKind::Observe)
        } else {
            a.clone()
        }
    });
    declare_io(&mut observed, c);
    Ok(observed)
}

fn declare_io(a: &mut Automaton, c: &Circuit) {
    a.inputs = c
        .boundary_ports()
        .iter()
        .map(|p| Action::request(p.as_str()))
        .collect();
    a.outputs = c
        .boundary_ports()
        .iter()
        .flat_map(|p| {
            c.domain
                .values()
                .into_iter()
                .map(move |d| Action::new(p.clone(), ActionKind::Observe, d))
        })
        .collect();
}

/// Input/output compile in which every boundary node is the two-phase
/// request/fire node automaton, so at most one request per port is ever
/// pending and further requests are refused.
pub fn compile_with_request_nodes(c: &Circuit) -> Result<Automaton, SemanticsError> {
    let mut a = compose_circuit(c, Mode::Ca, true, DEFAULT_STATE_CEILING)?;
    declare_io(&mut a, c);
    Ok(a)
}

struct Component {
    automaton: Automaton,
    ports: BTreeSet<PortName>,
    is_node: bool,
}

fn compose_circuit(c: &Circuit, mode: Mode, request_nodes: bool, ceiling: usize) -> Result<Automaton, SemanticsError> {
    let diags = validate_circuit(c);
    if !diags.is_empty() {
        return Err(SemanticsError::InvalidCircuit(diags));
    }
    let has_automaton = |n: &NodeSpec| request_nodes || !n.is_boundary() || n.degree() > 1;

    let mut components = Vec::new();
    for (k, ch) in c.channels.iter().enumerate() {
        let side = |p: &PortName| match c.node(p) {
            Some(n) if has_automaton(n) => channel_side_name(k, p),
            _ => p.clone(),
        };
        let renamed = ChannelSpec {
            kind: ch.kind.clone(),
            ends: (side(&ch.ends.0), side(&ch.ends.1)),
        };
        let automaton = channel_automaton(&renamed, mode, &c.domain)?;
        components.push(Component {
            ports: [renamed.ends.0, renamed.ends.1].into(),
            automaton,
            is_node: false,
        });
    }
    let mut junctions: Vec<(PortName, PortName)> = Vec::new();
    for node in c.nodes.iter().filter(|n| has_automaton(n)) {
        let automaton = node_automaton(node, mode, &c.domain, request_nodes)?;
        let mut ports = BTreeSet::new();
        for e in node.sink_ends_in.iter().chain(&node.source_ends_out) {
            let inner = node_side_name(&node.port, e.channel);
            junctions.push((channel_side_name(e.channel, &node.port), inner.clone()));
            ports.insert(inner);
        }
        components.push(Component {
            automaton,
            ports,
            is_node: true,
        });
    }

    // Fold order: start from the first channel and keep adding the first
    // component (nodes before channels) connected to what is built so far,
    // so fusion happens early. The result is renumbered canonically at the
    // end, so the order only affects intermediate sizes.
    let mut used = vec![false; components.len()];
    let mut acc: Option<(Automaton, BTreeSet<PortName>)> = None;
    let mut fused = BTreeSet::new();
    for _ in 0..components.len() {
        let next = match &acc {
            None => 0,
            Some((_, ports)) => {
                let connected = |i: usize| {
                    junctions.iter().any(|(x, y)| {
                        (ports.contains(x) && components[i].ports.contains(y))
                            || (ports.contains(y) && components[i].ports.contains(x))
                    })
                };
                let candidates = || (0..components.len()).filter(|&i| !used[i]);
                candidates()
                    .find(|&i| components[i].is_node && connected(i))
                    .or_else(|| candidates().find(|&i| connected(i)))
                    .or_else(|| candidates().next())
                    .expect("a component is left")
            }
        };
        used[next] = true;
        let comp = &components[next];
        acc = Some(match acc.take() {
            None => (comp.automaton.clone(), comp.ports.clone()),
            Some((built, mut ports)) => {
                let sync: Vec<(PortName, PortName)> = junctions
                    .iter()
                    .filter_map(|(x, y)| {
                        if ports.contains(x) && comp.ports.contains(y) {
                            Some((x.clone(), y.clone()))
                        } else if ports.contains(y) && comp.ports.contains(x) {
                            Some((y.clone(), x.clone()))
                        } else {
                            None
                        }
                    })
                    .collect();
                let joined = product_with(&built, &comp.automaton, &sync, &default_compat, Some(ceiling))?;
                for (x, y) in &sync {
                    ports.remove(x);
                    fused.insert(fused_name(x, y));
                }
                ports.extend(comp.ports.iter().filter(|p| !sync.iter().any(|(_, y)| y == *p)).cloned());
                (joined, ports)
            }
        });
    }
    let (built, _) = acc.unwrap_or_else(|| (Automaton::new(1, 0), BTreeSet::new()));
    Ok(hide_ports(&built, &fused).reachable())
}
