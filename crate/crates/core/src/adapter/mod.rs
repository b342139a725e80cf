//! Systems under test: the [`Sut`] interface, an in-process simulator that
//! animates an automaton, and a line-based TCP transport.

mod sim;
mod wire;

use std::time::Duration;

use thiserror::Error;

use crate::model::Label;

pub use sim::{LtsSut, Simulator, DEFAULT_EMISSION_DELAY};
pub use wire::{serve_sut, serve_sut_on, ServeOptions, TcpSut, WireMessage, WireParseError, DEFAULT_ACK_TIMEOUT};

/// Default time an executor waits before concluding quiescence.
pub const DEFAULT_QUIESCENCE_TIMEOUT: Duration = Duration::from_millis(2000);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SutError {
    #[error("the system refused input {0}")]
    Refused(Label),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("connection error: {0}")]
    Connection(String),
    #[error("no acknowledgement within {0:?}")]
    AckTimeout(Duration),
}

/// A system under test as seen by the test executor.
pub trait Sut {
    /// Offer an input.
    fn send(&mut self, input: &Label) -> Result<(), SutError>;
    /// The next output, or `None` if nothing arrives within `timeout`.
    fn await_output(&mut self, timeout: Duration) -> Result<Option<Label>, SutError>;
    /// Return to the initial state and discard buffered outputs.
    fn reset(&mut self) -> Result<(), SutError>;
}

impl<S: Sut + ?Sized> Sut for &mut S {
    fn send(&mut self, input: &Label) -> Result<(), SutError> {
        (**self).send(input)
    }

    fn await_output(&mut self, timeout: Duration) -> Result<Option<Label>, SutError> {
        (**self).await_output(timeout)
    }

    fn reset(&mut self) -> Result<(), SutError> {
        (**self).reset()
    }
}
