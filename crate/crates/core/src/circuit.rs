//! Reo circuit description: the textual DSL, node inference and validation.
//!
//! ```text
//! circuit example1 {
//!   sync A -> X1
//!   fifo X1 -> X2
//!   sync X1 -> X3
//!   sync X2 -> B
//!   sync X3 -> C
//! }
//! ```
//!
//! Nodes are implicit: channel ends that name the same port meet at one node.
//! `node X : router` switches a node with two or more outgoing ends from
//! replicate to exclusive routing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{Atom, PortName};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDomain {
    atoms: Vec<Atom>,
}

impl DataDomain {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Option<Self> {
        let atoms: Vec<Atom> = atoms.into_iter().collect();
        let distinct: BTreeSet<&Atom> = atoms.iter().collect();
        if atoms.is_empty() || distinct.len() != atoms.len() {
            return None;
        }
        Some(DataDomain { atoms })
    }

    /// The data-agnostic domain `{*}`.
    pub fn singleton() -> Self {
        DataDomain {
            atoms: vec![Atom::new("*")],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.atoms.len() == 1
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    /// Data values as they appear on ground actions: `None` for a singleton
    /// domain, one `Some` per atom otherwise.
    pub fn values(&self) -> Vec<Option<Atom>> {
        if self.is_singleton() {
            vec![None]
        } else {
            self.atoms.iter().cloned().map(Some).collect()
        }
    }
}

impl Default for DataDomain {
    fn default() -> Self {
        DataDomain::singleton()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelKind {
    Sync,
    LossySync,
    Fifo,
    SyncDrain,
    AsyncDrain,
    /// Passes values in the accept set, loses the rest.
    Filter(BTreeSet<Atom>),
    /// Applies a lookup table to every value.
    Transform(BTreeMap<Atom, Atom>),
}

impl ChannelKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            ChannelKind::Sync => "sync",
            ChannelKind::LossySync => "lossysync",
            ChannelKind::Fifo => "fifo",
            ChannelKind::SyncDrain => "syncdrain",
            ChannelKind::AsyncDrain => "asyncdrain",
            ChannelKind::Filter(_) => "filter",
            ChannelKind::Transform(_) => "transform",
        }
    }

    /// Drains have two source ends; every other kind is directed.
    pub fn is_drain(&self) -> bool {
        matches!(self, ChannelKind::SyncDrain | ChannelKind::AsyncDrain)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub ends: (PortName, PortName),
}

impl ChannelSpec {
    pub fn new(kind: ChannelKind, from: &str, to: &str) -> Self {
        ChannelSpec {
            kind,
            ends: (PortName::new(from), PortName::new(to)),
        }
    }

    pub fn end_role(&self, end: usize) -> EndRole {
        if end == 0 || self.kind.is_drain() {
            EndRole::Source
        } else {
            EndRole::Sink
        }
    }

    pub fn end_port(&self, end: usize) -> &PortName {
        if end == 0 {
            &self.ends.0
        } else {
            &self.ends.1
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = &self.ends;
        match &self.kind {
            k if k.is_drain() => write!(f, "{} {a} {b}", k.keyword()),
            ChannelKind::Filter(accept) => {
                let atoms: Vec<String> = accept.iter().map(|x| x.to_string()).collect();
                write!(f, "filter {a} -> {b} when {{{}}}", atoms.join(", "))
            }
            ChannelKind::Transform(table) => {
                let pairs: Vec<String> = table.iter().map(|(k, v)| format!("{k}: {v}")).collect();
                write!(f, "transform {a} -> {b} map {{{}}}", pairs.join(", "))
            }
            k => write!(f, "{} {a} -> {b}", k.keyword()),
        }
    }
}

/// Source ends accept data into a channel; sink ends dispense it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EndRole {
    Source,
    Sink,
}

/// End `end` (0 or 1) of channel number `channel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EndRef {
    pub channel: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Source,
    Sink,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Routing {
    #[default]
    MergeReplicate,
    Router,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub port: PortName,
    /// Channel sink ends delivering into the node.
    pub sink_ends_in: Vec<EndRef>,
    /// Channel source ends taking data out of the node.
    pub source_ends_out: Vec<EndRef>,
    pub kind: NodeKind,
    pub routing: Routing,
}

impl NodeSpec {
    pub fn is_boundary(&self) -> bool {
        self.kind != NodeKind::Mixed
    }

    pub fn degree(&self) -> usize {
        self.sink_ends_in.len() + self.source_ends_out.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub name: String,
    pub domain: DataDomain,
    pub channels: Vec<ChannelSpec>,
    /// Derived from `channels`, sorted by port name.
    pub nodes: Vec<NodeSpec>,
    pub boundary_inputs: BTreeSet<PortName>,
    pub boundary_outputs: BTreeSet<PortName>,
    /// Ports named by `node X : router` declarations.
    pub router_decls: Vec<PortName>,
}

/// Group channel ends by port name.
pub fn infer_nodes(channels: &[ChannelSpec]) -> Vec<NodeSpec> {
    let mut by_port: BTreeMap<PortName, (Vec<EndRef>, Vec<EndRef>)> = BTreeMap::new();
    for (ci, ch) in channels.iter().enumerate() {
        for end in 0..2 {
            let entry = by_port.entry(ch.end_port(end).clone()).or_default();
            let r = EndRef { channel: ci, end };
            match ch.end_role(end) {
                EndRole::Sink => entry.0.push(r),
                EndRole::Source => entry.1.push(r),
            }
        }
    }
    by_port
        .into_iter()
        .map(|(port, (ins, outs))| {
            let kind = match (ins.is_empty(), outs.is_empty()) {
                (true, _) => NodeKind::Source,
                (false, true) => NodeKind::Sink,
                (false, false) => NodeKind::Mixed,
            };
            NodeSpec {
                port,
                sink_ends_in: ins,
                source_ends_out: outs,
                kind,
                routing: Routing::MergeReplicate,
            }
        })
        .collect()
}

impl Circuit {
    /// Build a circuit from channels, inferring nodes and boundary ports.
    pub fn from_channels(name: &str, domain: DataDomain, channels: Vec<ChannelSpec>) -> Self {
        let nodes = infer_nodes(&channels);
        let boundary_inputs = nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Source)
            .map(|n| n.port.clone())
            .collect();
        let boundary_outputs = nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Sink)
            .map(|n| n.port.clone())
            .collect();
        Circuit {
            name: name.to_string(),
            domain,
            channels,
            nodes,
            boundary_inputs,
            boundary_outputs,
            router_decls: Vec::new(),
        }
    }

    pub fn node(&self, port: &PortName) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| &n.port == port)
    }

    pub fn boundary_ports(&self) -> BTreeSet<PortName> {
        self.boundary_inputs
            .union(&self.boundary_outputs)
            .cloned()
            .collect()
    }
}

/// Pretty-prints back into the DSL accepted by [`parse_circuit`].
impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "circuit {} {{", self.name)?;
        if self.domain != DataDomain::singleton() {
            let atoms: Vec<String> = self.domain.atoms().iter().map(|a| a.to_string()).collect();
            writeln!(f, "  domain {{{}}}", atoms.join(", "))?;
        }
        for ch in &self.channels {
            writeln!(f, "  {ch}")?;
        }
        for p in &self.router_decls {
            writeln!(f, "  node {p} : router")?;
        }
        writeln!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: duplicate channel declaration `{channel}`")]
    DuplicateChannel {
        line: usize,
        col: usize,
        channel: String,
    },
    #[error("{line}:{col}: unknown atom `{atom}` (not in the data domain)")]
    UnknownAtom { line: usize, col: usize, atom: String },
    #[error("{line}:{col}: transform table is not total: no entry for `{missing}`")]
    TransformNotTotal {
        line: usize,
        col: usize,
        missing: String,
    },
    #[error("{line}:{col}: node `{node}` has {out_degree} outgoing end(s); a router needs at least 2")]
    RouterDegree {
        line: usize,
        col: usize,
        node: String,
        out_degree: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    LBrace,
    RBrace,
    Comma,
    Colon,
    Arrow,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, CircuitError> {
    let mut out = Vec::new();
    for (li, raw_line) in text.lines().enumerate() {
        let line = li + 1;
        let code = raw_line.split('#').next().unwrap_or("");
        let chars: Vec<char> = code.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let single = match c {
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                ',' => Some(Tok::Comma),
                ':' => Some(Tok::Colon),
                _ => None,
            };
            if c.is_whitespace() {
                i += 1;
            } else if let Some(tok) = single {
                out.push(Spanned { tok, line, col });
                i += 1;
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                out.push(Spanned {
                    tok: Tok::Arrow,
                    line,
                    col,
                });
                i += 2;
            } else if c.is_ascii_alphanumeric() || c == '_' || c == '*' {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '*')
                {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Word(chars[start..i].iter().collect()),
                    line,
                    col,
                });
            } else {
                return Err(CircuitError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.col)).unwrap_or(self.eof)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, CircuitError> {
        let (line, col) = self.here();
        Err(CircuitError::Syntax {
            line,
            col,
            message: message.into(),
        })
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), CircuitError> {
        match self.peek() {
            Some(t) if t.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, usize, usize), CircuitError> {
        match self.peek().cloned() {
            Some(Spanned {
                tok: Tok::Word(w),
                line,
                col,
            }) => {
                self.pos += 1;
                Ok((w, line, col))
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), CircuitError> {
        match self.peek() {
            Some(Spanned {
                tok: Tok::Word(w), ..
            }) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{kw}`")),
        }
    }

    fn port(&mut self) -> Result<PortName, CircuitError> {
        let (w, line, col) = self.word("a port name")?;
        if !PortName::is_identifier(&w) {
            return Err(CircuitError::Syntax {
                line,
                col,
                message: format!("`{w}` is not a valid port name"),
            });
        }
        Ok(PortName::new(w))
    }

    /// `{ item ("," item)* }`
    fn braced_list<T>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T, CircuitError>,
    ) -> Result<Vec<T>, CircuitError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut items = vec![item(self)?];
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Comma) => {
                    self.pos += 1;
                    items.push(item(self)?);
                }
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    return Ok(items);
                }
                _ => return self.err("expected `,` or `}`"),
            }
        }
    }

    fn atom(&mut self) -> Result<(Atom, usize, usize), CircuitError> {
        let (w, line, col) = self.word("a data atom")?;
        Ok((Atom::new(w), line, col))
    }
}

struct PendingAtomCheck {
    atom: Atom,
    line: usize,
    col: usize,
}

/// Parse circuit DSL text.
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let toks = lex(text)?;
    let eof = toks
        .last()
        .map(|t| (t.line, t.col + 1))
        .unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, eof };

    p.keyword("circuit")?;
    let (name, line, col) = p.word("a circuit name")?;
    if !PortName::is_identifier(&name) {
        return Err(CircuitError::Syntax {
            line,
            col,
            message: format!("`{name}` is not a valid circuit name"),
        });
    }
    p.expect(Tok::LBrace, "`{`")?;

    let mut domain: Option<DataDomain> = None;
    let mut channels: Vec<ChannelSpec> = Vec::new();
    let mut positions: Vec<(usize, usize)> = Vec::new();
    let mut atom_checks: Vec<PendingAtomCheck> = Vec::new();
    let mut totality_checks: Vec<(usize, usize, usize)> = Vec::new();
    let mut routers: Vec<(PortName, usize, usize)> = Vec::new();

    loop {
        let (kw, line, col) = match p.peek() {
            Some(Spanned {
                tok: Tok::RBrace, ..
            }) => {
                p.pos += 1;
                break;
            }
            Some(Spanned {
                tok: Tok::Word(w),
                line,
                col,
            }) => (w.clone(), *line, *col),
            Some(_) => return p.err("expected a declaration or `}`"),
            None => return p.err("unexpected end of input, missing `}`"),
        };
        p.pos += 1;
        match kw.as_str() {
            "domain" => {
                if domain.is_some() {
                    return Err(CircuitError::Syntax {
                        line,
                        col,
                        message: "duplicate domain clause".into(),
                    });
                }
                let atoms = p.braced_list(|p| p.atom())?;
                let list: Vec<Atom> = atoms.into_iter().map(|(a, _, _)| a).collect();
                domain = Some(DataDomain::new(list).ok_or(CircuitError::Syntax {
                    line,
                    col,
                    message: "domain atoms must be distinct".into(),
                })?);
            }
            "sync" | "lossysync" | "fifo" | "filter" | "transform" => {
                let from = p.port()?;
                p.expect(Tok::Arrow, "`->`")?;
                let to = p.port()?;
                let kind = match kw.as_str() {
                    "sync" => ChannelKind::Sync,
                    "lossysync" => ChannelKind::LossySync,
                    "fifo" => ChannelKind::Fifo,
                    "filter" => {
                        p.keyword("when")?;
                        let atoms = p.braced_list(|p| p.atom())?;
                        let mut accept = BTreeSet::new();
                        for (atom, line, col) in atoms {
                            accept.insert(atom.clone());
                            atom_checks.push(PendingAtomCheck { atom, line, col });
                        }
                        ChannelKind::Filter(accept)
                    }
                    _ => {
                        p.keyword("map")?;
                        let pairs = p.braced_list(|p| {
                            let k = p.atom()?;
                            p.expect(Tok::Colon, "`:`")?;
                            let v = p.atom()?;
                            Ok((k, v))
                        })?;
                        let mut table = BTreeMap::new();
                        for ((k, kl, kc), (v, vl, vc)) in pairs {
                            if table.insert(k.clone(), v.clone()).is_some() {
                                return Err(CircuitError::Syntax {
                                    line: kl,
                                    col: kc,
                                    message: format!("duplicate map key `{k}`"),
                                });
                            }
                            atom_checks.push(PendingAtomCheck { atom: k, line: kl, col: kc });
                            atom_checks.push(PendingAtomCheck { atom: v, line: vl, col: vc });
                        }
                        totality_checks.push((channels.len(), line, col));
                        ChannelKind::Transform(table)
                    }
                };
                push_channel(&mut channels, &mut positions, ChannelSpec { kind, ends: (from, to) }, line, col)?;
            }
            "syncdrain" | "asyncdrain" => {
                let a = p.port()?;
                let b = p.port()?;
                let kind = if kw == "syncdrain" {
                    ChannelKind::SyncDrain
                } else {
                    ChannelKind::AsyncDrain
                };
                push_channel(&mut channels, &mut positions, ChannelSpec { kind, ends: (a, b) }, line, col)?;
            }
            "node" => {
                let port = p.port()?;
                p.expect(Tok::Colon, "`:`")?;
                p.keyword("router")?;
                routers.push((port, line, col));
            }
            other => {
                return Err(CircuitError::Syntax {
                    line,
                    col,
                    message: format!("unknown declaration `{other}`"),
                })
            }
        }
    }
    if let Some(extra) = p.next() {
        return Err(CircuitError::Syntax {
            line: extra.line,
            col: extra.col,
            message: "trailing input after circuit".into(),
        });
    }

    let domain = domain.unwrap_or_default();
    for check in &atom_checks {
        if !domain.contains(&check.atom) {
            return Err(CircuitError::UnknownAtom {
                line: check.line,
                col: check.col,
                atom: check.atom.to_string(),
            });
        }
    }
    for &(ci, line, col) in &totality_checks {
        if let ChannelKind::Transform(table) = &channels[ci].kind {
            if let Some(missing) = domain.atoms().iter().find(|a| !table.contains_key(*a)) {
                return Err(CircuitError::TransformNotTotal {
                    line,
                    col,
                    missing: missing.to_string(),
                });
            }
        }
    }

    let mut circuit = Circuit::from_channels(&name, domain, channels);
    for (port, line, col) in routers {
        if let Some(node) = circuit.nodes.iter_mut().find(|n| n.port == port) {
            if node.source_ends_out.len() < 2 {
                return Err(CircuitError::RouterDegree {
                    line,
                    col,
                    node: port.to_string(),
                    out_degree: node.source_ends_out.len(),
                });
            }
            node.routing = Routing::Router;
        }
        circuit.router_decls.push(port);
    }
    Ok(circuit)
}

fn push_channel(
    channels: &mut Vec<ChannelSpec>,
    positions: &mut Vec<(usize, usize)>,
    spec: ChannelSpec,
    line: usize,
    col: usize,
) -> Result<(), CircuitError> {
    if spec.ends.0 == spec.ends.1 {
        return Err(CircuitError::Syntax {
            line,
            col,
            message: format!("channel ends must be distinct, got `{}` twice", spec.ends.0),
        });
    }
    if channels.contains(&spec) {
        return Err(CircuitError::DuplicateChannel {
            line,
            col,
            channel: spec.to_string(),
        });
    }
    channels.push(spec);
    positions.push((line, col));
    Ok(())
}

/// One violated circuit invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// The offending port or channel.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

/// Check every circuit invariant; an empty result means the circuit is well formed.
pub fn validate_circuit(c: &Circuit) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut diag = |subject: String, message: String| diags.push(Diagnostic { subject, message });

    let distinct: BTreeSet<&Atom> = c.domain.atoms().iter().collect();
    if c.domain.is_empty() || distinct.len() != c.domain.len() {
        diag("domain".into(), "data domain must be nonempty with distinct atoms".into());
    }

    for (i, ch) in c.channels.iter().enumerate() {
        let subject = format!("channel {i} `{ch}`");
        for p in [&ch.ends.0, &ch.ends.1] {
            if !PortName::is_identifier(p.as_str()) {
                diag(subject.clone(), format!("`{p}` is not a valid port name"));
            }
        }
        if ch.ends.0 == ch.ends.1 {
            diag(subject.clone(), "channel ends must be distinct ports".into());
        }
        if c.channels[..i].contains(ch) {
            diag(subject.clone(), "duplicate channel declaration".into());
        }
        match &ch.kind {
            ChannelKind::Filter(accept) => {
                for a in accept.iter().filter(|a| !c.domain.contains(a)) {
                    diag(subject.clone(), format!("unknown atom `{a}` in filter"));
                }
            }
            ChannelKind::Transform(table) => {
                for (k, v) in table {
                    for a in [k, v] {
                        if !c.domain.contains(a) {
                            diag(subject.clone(), format!("unknown atom `{a}` in transform"));
                        }
                    }
                }
                for a in c.domain.atoms().iter().filter(|a| !table.contains_key(*a)) {
                    diag(subject.clone(), format!("transform table has no entry for `{a}`"));
                }
            }
            _ => {}
        }
    }

    let derived = infer_nodes(&c.channels);
    let mut seen_ports = BTreeSet::new();
    for node in &c.nodes {
        if !seen_ports.insert(node.port.clone()) {
            diag(format!("port {}", node.port), "port appears in more than one node".into());
        }
    }
    for d in &derived {
        match c.nodes.iter().find(|n| n.port == d.port) {
            None => diag(format!("port {}", d.port), "channel end has no node".into()),
            Some(n) => {
                let mut ins = n.sink_ends_in.clone();
                let mut outs = n.source_ends_out.clone();
                ins.sort();
                outs.sort();
                if ins != d.sink_ends_in || outs != d.source_ends_out {
                    diag(format!("node {}", n.port), "node ends disagree with the channel list".into());
                }
                if n.kind != d.kind {
                    diag(
                        format!("node {}", n.port),
                        format!("node kind is {:?} but its ends make it {:?}", n.kind, d.kind),
                    );
                }
                if n.routing == Routing::Router && n.source_ends_out.len() < 2 {
                    diag(
                        format!("node {}", n.port),
                        "router needs at least two outgoing ends".into(),
                    );
                }
            }
        }
    }
    for n in &c.nodes {
        if !derived.iter().any(|d| d.port == n.port) {
            diag(format!("node {}", n.port), "node has no channel ends".into());
        }
    }
    for p in &c.router_decls {
        if !derived.iter().any(|d| &d.port == p) {
            diag(format!("node {p}"), "unknown node in router declaration".into());
        }
    }

    let sources: BTreeSet<PortName> = derived
        .iter()
        .filter(|n| n.kind == NodeKind::Source)
        .map(|n| n.port.clone())
        .collect();
    let sinks: BTreeSet<PortName> = derived
        .iter()
        .filter(|n| n.kind == NodeKind::Sink)
        .map(|n| n.port.clone())
        .collect();
    for p in c.boundary_inputs.intersection(&c.boundary_outputs) {
        diag(
            format!("port {p}"),
            "boundary port is both an input and an output; boundary inputs and outputs must be disjoint".into(),
        );
    }
    for p in c.boundary_inputs.symmetric_difference(&sources) {
        diag(format!("port {p}"), "boundary inputs must be exactly the source nodes".into());
    }
    for p in c.boundary_outputs.symmetric_difference(&sinks) {
        diag(format!("port {p}"), "boundary outputs must be exactly the sink nodes".into());
    }
    diags
}
