//! Automata for single channels and nodes.

use crate::circuit::{ChannelKind, ChannelSpec, DataDomain, NodeKind, NodeSpec, Routing};
use crate::model::{Action, ActionKind, Atom, Automaton, Label, PortName};

use super::{node_side_name, Mode, SemanticsError};

fn act(port: &PortName, kind: ActionKind, data: &Option<Atom>) -> Action {
    Action::new(port.clone(), kind, data.clone())
}

fn label_of(actions: impl IntoIterator<Item = Action>) -> Label {
    Label::from_actions(actions)
}

/// Same-kind actions on every port in `ports`.
fn all(ports: &[&PortName], kind: ActionKind) -> Label {
    label_of(ports.iter().map(|p| act(p, kind, &None)))
}

/// Append a `b · s · f · u` cycle over `ports` leaving from and returning to `home`.
fn four_phase(a: &mut Automaton, home: usize, back: usize, ports: &[&PortName]) {
    let base = a.num_states;
    a.num_states += 3;
    a.add(home, all(ports, ActionKind::Block), base);
    a.add(base, all(ports, ActionKind::Start), base + 1);
    a.add(base + 1, all(ports, ActionKind::Finish), base + 2);
    a.add(base + 2, all(ports, ActionKind::Unblock), back);
}

fn unsupported(mode: Mode, what: &str) -> SemanticsError {
    SemanticsError::Unsupported {
        mode,
        what: what.to_string(),
    }
}

/// The ground automaton of one channel, with ports named by its ends.
pub fn channel_automaton(spec: &ChannelSpec, mode: Mode, dom: &DataDomain) -> Result<Automaton, SemanticsError> {
    let (pa, pb) = (&spec.ends.0, &spec.ends.1);
    match mode {
        Mode::Ca => Ok(ca_channel(spec, pa, pb, dom)),
        Mode::Aca => aca_channel(&spec.kind, pa, pb),
        Mode::Coloring => coloring_channel(&spec.kind, pa, pb),
    }
}

fn ca_channel(spec: &ChannelSpec, pa: &PortName, pb: &PortName, dom: &DataDomain) -> Automaton {
    use ActionKind::Flow;
    let values = dom.values();
    let mut a = Automaton::new(1, 0);
    match &spec.kind {
        ChannelKind::Sync => {
            for d in &values {
                a.add(0, label_of([act(pa, Flow, d), act(pb, Flow, d)]), 0);
            }
        }
        ChannelKind::LossySync => {
            for d in &values {
                a.add(0, label_of([act(pa, Flow, d), act(pb, Flow, d)]), 0);
                a.add(0, label_of([act(pa, Flow, d)]), 0);
            }
        }
        ChannelKind::Fifo => {
            // state 0 is empty, state 1 + i holds the i-th value
            a.num_states = 1 + values.len();
            for (i, d) in values.iter().enumerate() {
                a.add(0, label_of([act(pa, Flow, d)]), 1 + i);
                a.add(1 + i, label_of([act(pb, Flow, d)]), 0);
            }
        }
        ChannelKind::SyncDrain => {
            for d1 in &values {
                for d2 in &values {
                    a.add(0, label_of([act(pa, Flow, d1), act(pb, Flow, d2)]), 0);
                }
            }
        }
        ChannelKind::AsyncDrain => {
            for d in &values {
                a.add(0, label_of([act(pa, Flow, d)]), 0);
                a.add(0, label_of([act(pb, Flow, d)]), 0);
            }
        }
        ChannelKind::Filter(accept) => {
            for d in &values {
                let passes = match d {
                    Some(atom) => accept.contains(atom),
                    None => dom.atoms().iter().any(|x| accept.contains(x)),
                };
                if passes {
                    a.add(0, label_of([act(pa, Flow, d), act(pb, Flow, d)]), 0);
                } else {
                    a.add(0, label_of([act(pa, Flow, d)]), 0);
                }
            }
        }
        ChannelKind::Transform(table) => {
            for d in &values {
                let image = d.as_ref().and_then(|x| table.get(x)).cloned();
                a.add(0, label_of([act(pa, Flow, d), act(pb, Flow, &image)]), 0);
            }
        }
    }
    a.normalized()
}

fn aca_channel(kind: &ChannelKind, pa: &PortName, pb: &PortName) -> Result<Automaton, SemanticsError> {
    use ActionKind::*;
    let mut a = Automaton::new(1, 0);
    match kind {
        ChannelKind::Sync => four_phase(&mut a, 0, 0, &[pa, pb]),
        ChannelKind::LossySync => {
            four_phase(&mut a, 0, 0, &[pa, pb]);
            four_phase(&mut a, 0, 0, &[pa]);
        }
        ChannelKind::AsyncDrain => {
            four_phase(&mut a, 0, 0, &[pa]);
            four_phase(&mut a, 0, 0, &[pb]);
        }
        ChannelKind::Fifo => {
            // 0 empty, 1 full
            a.num_states = 2;
            four_phase(&mut a, 0, 1, &[pa]);
            four_phase(&mut a, 1, 0, &[pb]);
        }
        ChannelKind::SyncDrain => {
            // After the joint block, each end independently goes through
            // start then finish; any nonempty set of ends may step together.
            // Phase state (x, y) with x, y in 0..3 is numbered 1 + 3x + y.
            a.num_states = 10;
            let id = |x: usize, y: usize| 1 + 3 * x + y;
            a.add(0, all(&[pa, pb], Block), id(0, 0));
            let phase_kind = [Start, Finish];
            for x in 0..3 {
                for y in 0..3 {
                    for (dx, dy) in [(1, 0), (0, 1), (1, 1)] {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx > 2 || ny > 2 {
                            continue;
                        }
                        let mut acts = Vec::new();
                        if dx == 1 {
                            acts.push(act(pa, phase_kind[x], &None));
                        }
                        if dy == 1 {
                            acts.push(act(pb, phase_kind[y], &None));
                        }
                        a.add(id(x, y), label_of(acts), id(nx, ny));
                    }
                }
            }
            a.add(id(2, 2), all(&[pa, pb], Unblock), 0);
        }
        ChannelKind::Filter(_) => return Err(unsupported(Mode::Aca, "filter channel")),
        ChannelKind::Transform(_) => return Err(unsupported(Mode::Aca, "transform channel")),
    }
    Ok(a.normalized())
}

fn colored(rows: &[[(ActionKind, &PortName); 2]]) -> Vec<Label> {
    rows.iter()
        .map(|row| label_of(row.iter().map(|(k, p)| act(p, *k, &None))))
        .collect()
}

fn coloring_channel(kind: &ChannelKind, pa: &PortName, pb: &PortName) -> Result<Automaton, SemanticsError> {
    use ActionKind::{ColorFlow as W, ColorGiveReason as G, ColorRequireReason as R};
    let mut a = Automaton::new(1, 0);
    let loops = |a: &mut Automaton, labels: Vec<Label>| {
        for l in labels {
            a.add(0, l, 0);
        }
    };
    match kind {
        ChannelKind::Sync | ChannelKind::SyncDrain => loops(
            &mut a,
            colored(&[[(W, pa), (W, pb)], [(R, pa), (G, pb)], [(G, pa), (R, pb)], [(G, pa), (G, pb)]]),
        ),
        ChannelKind::LossySync => loops(
            &mut a,
            colored(&[[(W, pa), (W, pb)], [(W, pa), (G, pb)], [(G, pa), (R, pb)], [(G, pa), (G, pb)]]),
        ),
        ChannelKind::AsyncDrain => loops(
            &mut a,
            colored(&[
                [(W, pa), (G, pb)],
                [(G, pa), (W, pb)],
                [(R, pa), (W, pb)],
                [(W, pa), (R, pb)],
                [(G, pa), (G, pb)],
            ]),
        ),
        ChannelKind::Fifo => {
            // 0 empty, 1 full
            a.num_states = 2;
            for l in colored(&[[(W, pa), (R, pb)], [(W, pa), (G, pb)]]) {
                a.add(0, l, 1);
            }
            for l in colored(&[[(G, pa), (R, pb)], [(G, pa), (G, pb)]]) {
                a.add(0, l, 0);
            }
            for l in colored(&[[(R, pa), (W, pb)], [(G, pa), (W, pb)]]) {
                a.add(1, l, 0);
            }
            for l in colored(&[[(R, pa), (G, pb)], [(G, pa), (G, pb)]]) {
                a.add(1, l, 1);
            }
        }
        ChannelKind::Filter(_) => return Err(unsupported(Mode::Coloring, "filter channel")),
        ChannelKind::Transform(_) => return Err(unsupported(Mode::Coloring, "transform channel")),
    }
    Ok(a.normalized())
}

/// Port names on the node side: data enters through `ins` and leaves through
/// `outs`. A boundary port counts as an in-port of a source node and as an
/// out-port of a sink node.
fn node_ports(node: &NodeSpec) -> (Vec<PortName>, Vec<PortName>) {
    let mut ins: Vec<PortName> = node
        .sink_ends_in
        .iter()
        .map(|e| node_side_name(&node.port, e.channel))
        .collect();
    let mut outs: Vec<PortName> = node
        .source_ends_out
        .iter()
        .map(|e| node_side_name(&node.port, e.channel))
        .collect();
    match node.kind {
        NodeKind::Source => ins.push(node.port.clone()),
        NodeKind::Sink => outs.push(node.port.clone()),
        NodeKind::Mixed => {}
    }
    (ins, outs)
}

/// The automaton of one node; its channel ends are named with
/// [`node_side_name`]. With `io`, a boundary node first takes a request
/// `?P` and then fires with the observation `!P`.
pub fn node_automaton(node: &NodeSpec, mode: Mode, dom: &DataDomain, io: bool) -> Result<Automaton, SemanticsError> {
    if io && mode != Mode::Ca {
        return Err(SemanticsError::IoNeedsCa(mode));
    }
    if node.routing == Routing::Router && mode != Mode::Ca {
        return Err(unsupported(mode, "router node"));
    }
    let (ins, outs) = node_ports(node);
    match mode {
        Mode::Ca => Ok(ca_node(node, &ins, &outs, dom, io)),
        Mode::Aca => Ok(aca_node(&ins, &outs)),
        Mode::Coloring => Ok(coloring_node(&ins, &outs)),
    }
}

fn ca_node(node: &NodeSpec, ins: &[PortName], outs: &[PortName], dom: &DataDomain, io: bool) -> Automaton {
    let boundary_io = io && node.is_boundary();
    let fire_kind = |p: &PortName| {
        if boundary_io && *p == node.port {
            ActionKind::Observe
        } else {
            ActionKind::Flow
        }
    };
    let (mut a, fire_from) = if boundary_io {
        let mut a = Automaton::new(2, 0);
        a.add(0, Label::single(Action::request(node.port.as_str())), 1);
        (a, 1)
    } else {
        (Automaton::new(1, 0), 0)
    };
    let groups: Vec<Vec<&PortName>> = match node.routing {
        Routing::MergeReplicate => ins
            .iter()
            .map(|e| std::iter::once(e).chain(outs.iter()).collect())
            .collect(),
        Routing::Router => ins
            .iter()
            .flat_map(|e| outs.iter().map(move |o| vec![e, o]))
            .collect(),
    };
    for d in dom.values() {
        for group in &groups {
            let label = label_of(group.iter().map(|p| act(p, fire_kind(p), &d)));
            a.add(fire_from, label, 0);
        }
    }
    if boundary_io {
        a.inputs.insert(Action::request(node.port.as_str()));
        for d in dom.values() {
            a.outputs.insert(Action::new(node.port.clone(), ActionKind::Observe, d));
        }
    }
    a.normalized()
}

fn aca_node(ins: &[PortName], outs: &[PortName]) -> Automaton {
    use ActionKind::*;
    let mut a = Automaton::new(1, 0);
    if ins.len() == 1 {
        let ports: Vec<&PortName> = ins.iter().chain(outs).collect();
        four_phase(&mut a, 0, 0, &ports);
    } else {
        // merger: block, start and finish together, unblock
        for e in ins {
            let ports: Vec<&PortName> = std::iter::once(e).chain(outs).collect();
            let base = a.num_states;
            a.num_states += 2;
            a.add(0, all(&ports, Block), base);
            let flow = ports
                .iter()
                .flat_map(|p| [act(p, Start, &None), act(p, Finish, &None)]);
            a.add(base, label_of(flow), base + 1);
            a.add(base + 1, all(&ports, Unblock), 0);
        }
    }
    a.normalized()
}

fn coloring_node(ins: &[PortName], outs: &[PortName]) -> Automaton {
    use ActionKind::{ColorFlow as W, ColorGiveReason as G, ColorRequireReason as R};
    let mut a = Automaton::new(1, 0);
    let mut row = |colors: Vec<Action>| a.add(0, label_of(colors), 0);
    // flow: one input fires, the others give a reason, all outputs fire
    for e in ins {
        row(ins
            .iter()
            .map(|i| act(i, if i == e { W } else { G }, &None))
            .chain(outs.iter().map(|o| act(o, W, &None)))
            .collect());
    }
    // no flow, reason supplied by one output
    for o in outs {
        row(ins
            .iter()
            .map(|i| act(i, R, &None))
            .chain(outs.iter().map(|x| act(x, if x == o { G } else { R }, &None)))
            .collect());
    }
    // no flow, reason supplied by the inputs
    let out_color = if outs.len() == 1 { R } else { G };
    row(ins
        .iter()
        .map(|i| act(i, G, &None))
        .chain(outs.iter().map(|o| act(o, out_color, &None)))
        .collect());
    a.normalized()
}
