use std::fmt;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::str::FromStr;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, TryRecvError};
use std::thread;
use std::time::{Duration, Instant};

use super::{Simulator, Sut, SutError, DEFAULT_EMISSION_DELAY};
use crate::model::{Automaton, Label, LabelParseError};

pub const DEFAULT_ACK_TIMEOUT: Duration = Duration::from_secs(5);

/// One line of the adapter protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireMessage {
    Input(Label),
    Output(Label),
    Reset,
    Ack,
    Error(String),
}

impl fmt::Display for WireMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WireMessage::Input(l) => write!(f, "INPUT {l}"),
            WireMessage::Output(l) => write!(f, "OUTPUT {l}"),
            WireMessage::Reset => f.write_str("RESET"),
            WireMessage::Ack => f.write_str("ACK"),
            WireMessage::Error(text) => write!(f, "ERROR {}", text.replace('\n', " ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireParseError {
    #[error("unknown message `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Label(#[from] LabelParseError),
}

impl FromStr for WireMessage {
    type Err = WireParseError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let line = line.trim();
        let (head, rest) = match line.split_once(' ') {
            Some((h, r)) => (h, r.trim()),
            None => (line, ""),
        };
        match (head, rest.is_empty()) {
            ("INPUT", false) => Ok(WireMessage::Input(rest.parse()?)),
            ("OUTPUT", false) => Ok(WireMessage::Output(rest.parse()?)),
            ("RESET", true) => Ok(WireMessage::Reset),
            ("ACK", true) => Ok(WireMessage::Ack),
            ("ERROR", _) => Ok(WireMessage::Error(rest.to_string())),
            _ => Err(WireParseError::Unknown(line.to_string())),
        }
    }
}

fn spawn_reader(stream: TcpStream) -> Receiver<Result<WireMessage, String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(stream).lines() {
            let Ok(line) = line else { break };
            if line.trim().is_empty() {
                continue;
            }
            let msg = line.parse::<WireMessage>().map_err(|e| e.to_string());
            if tx.send(msg).is_err() {
                break;
            }
        }
    });
    rx
}

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub seed: u64,
    pub emission_delay: Duration,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions {
            seed: 0,
            emission_delay: DEFAULT_EMISSION_DELAY,
        }
    }
}

/// Serve one client session over `listener`, animating `aut`.
///
/// An output is emitted once the simulator has sat for `emission_delay`
/// in a state that can emit; inputs and resets restart that clock.
pub fn serve_sut(listener: &TcpListener, aut: Automaton, opts: &ServeOptions) -> io::Result<()> {
    let (stream, _) = listener.accept()?;
    stream.set_nodelay(true)?;
    let rx = spawn_reader(stream.try_clone()?);
    let mut out = stream;
    let result = serve_session(&rx, &mut out, aut, opts);
    let _ = out.shutdown(std::net::Shutdown::Both);
    result
}

fn serve_session(
    rx: &Receiver<Result<WireMessage, String>>,
    out: &mut TcpStream,
    aut: Automaton,
    opts: &ServeOptions,
) -> io::Result<()> {
    let mut sim = Simulator::new(aut, opts.seed);
    let mut changed = Instant::now();
    loop {
        let msg = if sim.can_emit() {
            let wait = (changed + opts.emission_delay).saturating_duration_since(Instant::now());
            match rx.recv_timeout(wait) {
                Ok(m) => m,
                Err(RecvTimeoutError::Timeout) => {
                    if let Some(l) = sim.emit() {
                        writeln!(out, "{}", WireMessage::Output(l))?;
                    }
                    changed = Instant::now();
                    continue;
                }
                Err(RecvTimeoutError::Disconnected) => return Ok(()),
            }
        } else {
            match rx.recv() {
                Ok(m) => m,
                Err(_) => return Ok(()),
            }
        };
        let reply = match msg {
            Ok(WireMessage::Input(l)) => sim.send(&l).err().map(|e| WireMessage::Error(e.to_string())),
            Ok(WireMessage::Reset) => {
                sim.reset();
                Some(WireMessage::Ack)
            }
            Ok(other) => Some(WireMessage::Error(format!("unexpected message `{other}`"))),
            Err(e) => Some(WireMessage::Error(e)),
        };
        if let Some(r) = reply {
            writeln!(out, "{r}")?;
        }
        changed = Instant::now();
    }
}

/// Bind `addr`, report the bound address through `on_bound`, then serve one
/// session.
pub fn serve_sut_on(
    addr: impl ToSocketAddrs,
    aut: Automaton,
    opts: &ServeOptions,
    on_bound: impl FnOnce(std::net::SocketAddr),
) -> io::Result<()> {
    let listener = TcpListener::bind(addr)?;
    on_bound(listener.local_addr()?);
    serve_sut(&listener, aut, opts)
}

/// Client side of the adapter protocol.
pub struct TcpSut {
    out: TcpStream,
    rx: Receiver<Result<WireMessage, String>>,
    ack_timeout: Duration,
}

impl TcpSut {
    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        Self::connect_with(addr, DEFAULT_ACK_TIMEOUT)
    }

    pub fn connect_with(addr: impl ToSocketAddrs, ack_timeout: Duration) -> io::Result<Self> {
        let out = TcpStream::connect(addr)?;
        out.set_nodelay(true)?;
        let rx = spawn_reader(out.try_clone()?);
        Ok(TcpSut { out, rx, ack_timeout })
    }

    fn write(&mut self, msg: &WireMessage) -> Result<(), SutError> {
        writeln!(self.out, "{msg}").map_err(|e| SutError::Connection(e.to_string()))
    }

    fn received(msg: Result<WireMessage, String>) -> Result<Option<Label>, SutError> {
        match msg {
            Ok(WireMessage::Output(l)) => Ok(Some(l)),
            Ok(WireMessage::Error(text)) => Err(SutError::Protocol(text)),
            Ok(other) => Err(SutError::Protocol(format!("unexpected message `{other}`"))),
            Err(e) => Err(SutError::Protocol(e)),
        }
    }
}

impl Drop for TcpSut {
    fn drop(&mut self) {
        let _ = self.out.shutdown(std::net::Shutdown::Both);
    }
}

impl Sut for TcpSut {
    fn send(&mut self, input: &Label) -> Result<(), SutError> {
        self.write(&WireMessage::Input(input.clone()))
    }

    fn await_output(&mut self, timeout: Duration) -> Result<Option<Label>, SutError> {
        let disconnected = || SutError::Connection("connection closed".into());
        if timeout.is_zero() {
            return match self.rx.try_recv() {
                Ok(m) => Self::received(m),
                Err(TryRecvError::Empty) => Ok(None),
                Err(TryRecvError::Disconnected) => Err(disconnected()),
            };
        }
        match self.rx.recv_timeout(timeout) {
            Ok(m) => Self::received(m),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(disconnected()),
        }
    }

    fn reset(&mut self) -> Result<(), SutError> {
        self.write(&WireMessage::Reset)?;
        let deadline = Instant::now() + self.ack_timeout;
        loop {
            let wait = deadline.saturating_duration_since(Instant::now());
            match self.rx.recv_timeout(wait) {
                Ok(Ok(WireMessage::Ack)) => return Ok(()),
                Ok(Ok(WireMessage::Output(_))) | Ok(Ok(WireMessage::Error(_))) => {}
                Ok(Ok(other)) => return Err(SutError::Protocol(format!("unexpected message `{other}`"))),
                Ok(Err(e)) => return Err(SutError::Protocol(e)),
                Err(RecvTimeoutError::Timeout) => return Err(SutError::AckTimeout(self.ack_timeout)),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(SutError::Connection("connection closed".into()))
                }
            }
        }
    }
}
