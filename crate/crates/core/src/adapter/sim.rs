use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Sut, SutError};
use crate::model::{Automaton, Label, StateId};

pub const DEFAULT_EMISSION_DELAY: Duration = Duration::from_millis(10);

/// Automaton animation shared by the in-process SUT and the TCP server.
///
/// Nondeterminism (several matching transitions, tau steps) is resolved with
/// a seeded RNG that is reseeded from `(seed, reset count)` on every reset,
/// so each test run is reproducible on its own.
#[derive(Debug, Clone)]
pub struct Simulator {
    aut: Automaton,
    adj: Vec<Vec<usize>>,
    state: StateId,
    seed: u64,
    resets: u64,
    rng: ChaCha8Rng,
}

fn run_seed(seed: u64, resets: u64) -> u64 {
    seed ^ resets.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

impl Simulator {
    pub fn new(aut: Automaton, seed: u64) -> Self {
        let adj = aut.adjacency();
        Simulator {
            state: aut.initial,
            adj,
            aut,
            seed,
            resets: 0,
            rng: ChaCha8Rng::seed_from_u64(run_seed(seed, 0)),
        }
    }

    pub fn automaton(&self) -> &Automaton {
        &self.aut
    }

    pub fn state(&self) -> StateId {
        self.state
    }

    pub fn reset(&mut self) {
        self.resets += 1;
        self.state = self.aut.initial;
        self.rng = ChaCha8Rng::seed_from_u64(run_seed(self.seed, self.resets));
    }

    /// Transitions `(label, target)` available from the current state or
    /// after some tau steps, each paired with the tau path's end state.
    fn reachable_moves(&self, wanted: impl Fn(&Label) -> bool) -> Vec<(StateId, StateId)> {
        let mut seen = vec![false; self.aut.num_states];
        let mut stack = vec![self.state];
        seen[self.state] = true;
        let mut moves = Vec::new();
        while let Some(s) = stack.pop() {
            for &i in &self.adj[s] {
                let t = &self.aut.transitions[i];
                if t.label.is_tau() {
                    if !seen[t.to] {
                        seen[t.to] = true;
                        stack.push(t.to);
                    }
                } else if wanted(&t.label) {
                    moves.push((s, i));
                }
            }
        }
        moves.sort_unstable();
        moves
    }

    /// Take an `input` transition, possibly after tau steps.
    pub fn send(&mut self, input: &Label) -> Result<(), SutError> {
        let moves = self.reachable_moves(|l| l == input);
        if moves.is_empty() {
            return Err(SutError::Refused(input.clone()));
        }
        let (_, i) = moves[self.rng.gen_range(0..moves.len())];
        self.state = self.aut.transitions[i].to;
        Ok(())
    }

    /// Whether some pure-output transition is reachable through tau steps.
    pub fn can_emit(&self) -> bool {
        !self.reachable_moves(Label::is_output_only).is_empty()
    }

    /// Fire one pure-output transition, if any.
    pub fn emit(&mut self) -> Option<Label> {
        let moves = self.reachable_moves(Label::is_output_only);
        if moves.is_empty() {
            return None;
        }
        let (_, i) = moves[self.rng.gen_range(0..moves.len())];
        let t = &self.aut.transitions[i];
        self.state = t.to;
        Some(t.label.clone())
    }
}

/// In-process SUT. Emission takes `emission_delay` of simulated time, so an
/// output is delivered exactly when the caller waits at least that long; a
/// quiescent SUT answers at once, with no real waiting.
#[derive(Debug, Clone)]
pub struct LtsSut {
    sim: Simulator,
    emission_delay: Duration,
}

impl LtsSut {
    pub fn new(aut: Automaton, seed: u64) -> Self {
        Self::with_delay(aut, seed, DEFAULT_EMISSION_DELAY)
    }

    pub fn with_delay(aut: Automaton, seed: u64, emission_delay: Duration) -> Self {
        LtsSut {
            sim: Simulator::new(aut, seed),
            emission_delay,
        }
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }
}

impl Sut for LtsSut {
    fn send(&mut self, input: &Label) -> Result<(), SutError> {
        self.sim.send(input)
    }

    fn await_output(&mut self, timeout: Duration) -> Result<Option<Label>, SutError> {
        if timeout >= self.emission_delay && !timeout.is_zero() {
            Ok(self.sim.emit())
        } else {
            Ok(None)
        }
    }

    fn reset(&mut self) -> Result<(), SutError> {
        self.sim.reset();
        Ok(())
    }
}
