#![allow(dead_code)]

pub mod oracle;
pub mod random;

use std::path::PathBuf;

use reoco::circuit::{parse_circuit, Circuit};
use reoco::ioext::RequestStrategy;
use reoco::lts::read_aut;
use reoco::semantics::{compile_circuit, Mode};
use reoco::Automaton;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn circuit(name: &str) -> Circuit {
    parse_circuit(&fixture_text(&format!("{name}.reo"))).unwrap()
}

pub fn aut(name: &str) -> Automaton {
    read_aut(&fixture_text(&format!("{name}.aut"))).unwrap()
}

pub fn ca(name: &str) -> Automaton {
    compile_circuit(&circuit(name), Mode::Ca, None).unwrap()
}

pub fn ioca(name: &str) -> Automaton {
    compile_circuit(&circuit(name), Mode::Ca, Some(RequestStrategy::Ignore)).unwrap()
}

pub const EXAMPLES: [&str; 4] = ["example1-spec", "example1-impl", "example2-spec", "example2-impl"];

/// Serve `a` on an ephemeral loopback port for one session.
pub fn spawn_server(
    a: Automaton,
    seed: u64,
) -> (std::net::SocketAddr, std::thread::JoinHandle<std::io::Result<()>>) {
    use reoco::adapter::{serve_sut, ServeOptions};
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let opts = ServeOptions {
        seed,
        ..ServeOptions::default()
    };
    let handle = std::thread::spawn(move || serve_sut(&listener, a, &opts));
    (addr, handle)
}
