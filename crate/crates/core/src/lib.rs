//! Model-based conformance testing of Reo connectors.

pub mod adapter;
pub mod circuit;
pub mod ioco;
pub mod ioext;
pub mod lts;
pub mod model;
pub mod semantics;

pub use circuit::{parse_circuit, validate_circuit, Circuit, CircuitError};
pub use model::{Action, ActionKind, ActionSet, Atom, Automaton, Label, PortName, StateId, Transition};
