use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::testcase::{output_labels, TestCase};
use crate::lts::{Lts, StateSet};
use crate::model::{Automaton, Label, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    #[default]
    Random,
    Exhaustive,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Random => "random",
            Policy::Exhaustive => "exhaustive",
        })
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Policy::Random),
            "exhaustive" => Ok(Policy::Exhaustive),
            _ => Err(format!("unknown policy `{s}` (expected random or exhaustive)")),
        }
    }
}

/// Singleton inputs the spec accepts from `set`.
fn stimuli(lts: &Lts<'_>, set: &StateSet) -> Vec<Label> {
    lts.enabled(set)
        .into_iter()
        .filter(|l| l.is_input_only() && l.actions().len() == 1)
        .collect()
}

struct Builder<'a> {
    lts: Lts<'a>,
    outs: Vec<Label>,
    aut: Automaton,
    pass: StateId,
    fail: StateId,
}

impl<'a> Builder<'a> {
    fn new(spec: &'a Automaton) -> Self {
        let mut aut = Automaton::new(2, 0);
        aut.inputs = spec.inputs.clone();
        aut.outputs = spec.outputs.clone();
        Builder {
            lts: Lts::new(spec),
            outs: output_labels(spec),
            aut,
            pass: 0,
            fail: 1,
        }
    }

    fn fresh(&mut self) -> StateId {
        self.aut.num_states += 1;
        self.aut.num_states - 1
    }

    fn finish(mut self, root: StateId) -> TestCase {
        for sink in [self.pass, self.fail] {
            for l in self.outs.iter().cloned().chain([Label::Theta]) {
                self.aut.add(sink, l, sink);
            }
        }
        self.aut.initial = root;
        let (automaton, map) = self.aut.renumber(&self.aut.canonical_order());
        TestCase {
            automaton,
            pass: map[self.pass],
            fail: map[self.fail],
        }
    }

    /// Output edges of a node whose continuation is `next(ℓ)` for allowed
    /// outputs; disallowed outputs lead to fail.
    fn output_edges(&mut self, node: StateId, allowed: &std::collections::BTreeSet<Label>, mut next: impl FnMut(&mut Self, &Label) -> StateId) {
        for l in self.outs.clone() {
            let to = if allowed.contains(&l) { next(self, &l) } else { self.fail };
            self.aut.add(node, l, to);
        }
    }

    fn random_node(&mut self, set: &StateSet, remaining: usize, rng: &mut ChaCha8Rng) -> StateId {
        if remaining == 0 {
            return self.pass;
        }
        let node = self.fresh();
        let allowed = self.lts.out(set);
        let inputs = stimuli(&self.lts, set);
        if !inputs.is_empty() && rng.gen_bool(0.5) {
            let a = inputs[rng.gen_range(0..inputs.len())].clone();
            let after = self.lts.step(set, &a);
            let to = self.random_node(&after, remaining - 1, rng);
            self.aut.add(node, a, to);
        } else {
            let to = if allowed.contains(&Label::Delta) {
                let after = self.lts.step(set, &Label::Delta);
                self.random_node(&after, remaining - 1, rng)
            } else {
                self.fail
            };
            self.aut.add(node, Label::Theta, to);
        }
        self.output_edges(node, &allowed, |b, l| {
            let after = b.lts.step(set, l);
            if after.is_empty() {
                b.pass
            } else {
                b.random_node(&after, remaining - 1, rng)
            }
        });
        node
    }
}

/// A random test of the given depth: each node stimulates a random enabled
/// input with probability 1/2, otherwise observes; every allowed output is
/// followed further.
pub fn gen_random(spec: &Automaton, depth: usize, rng: &mut ChaCha8Rng) -> TestCase {
    let mut b = Builder::new(spec);
    let init = b.lts.initial_set();
    let root = b.random_node(&init, depth, rng);
    b.finish(root)
}

pub fn gen_test(spec: &Automaton, depth: usize, seed: u64) -> TestCase {
    gen_random(spec, depth, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Move {
    Stimulate(Label),
    Observe(Label),
}

/// Every tester move sequence of length `depth` the spec permits, in
/// canonical order (stimuli before observations, labels in label order).
fn move_sequences(lts: &Lts<'_>, depth: usize, limit: usize) -> Vec<Vec<Move>> {
    fn go(lts: &Lts<'_>, set: &StateSet, left: usize, path: &mut Vec<Move>, acc: &mut Vec<Vec<Move>>, limit: usize) {
        if acc.len() >= limit {
            return;
        }
        if left == 0 {
            acc.push(path.clone());
            return;
        }
        let mut moves: Vec<Move> = stimuli(lts, set).into_iter().map(Move::Stimulate).collect();
        for x in lts.out(set) {
            if !lts.step(set, &x).is_empty() {
                moves.push(Move::Observe(x));
            }
        }
        for m in moves {
            let label = match &m {
                Move::Stimulate(l) | Move::Observe(l) => l.clone(),
            };
            let next = lts.step(set, &label);
            path.push(m);
            go(lts, &next, left - 1, path, acc, limit);
            path.pop();
        }
    }
    let mut acc = Vec::new();
    go(lts, &lts.initial_set(), depth, &mut Vec::new(), &mut acc, limit);
    acc
}

fn linear_test(spec: &Automaton, moves: &[Move]) -> TestCase {
    let mut b = Builder::new(spec);
    let mut set = b.lts.initial_set();
    let root = if moves.is_empty() { b.pass } else { b.fresh() };
    let mut node = root;
    for (k, m) in moves.iter().enumerate() {
        let next = if k + 1 == moves.len() { b.pass } else { b.fresh() };
        let allowed = b.lts.out(&set);
        let (pass, fail) = (b.pass, b.fail);
        match m {
            Move::Stimulate(a) => {
                b.aut.add(node, a.clone(), next);
                b.output_edges(node, &allowed, |_, _| pass);
                set = b.lts.step(&set, a);
            }
            Move::Observe(x) => {
                b.output_edges(node, &allowed, |_, l| if l == x { next } else { pass });
                let theta = if *x == Label::Delta {
                    next
                } else if allowed.contains(&Label::Delta) {
                    pass
                } else {
                    fail
                };
                b.aut.add(node, Label::Theta, theta);
                set = b.lts.step(&set, x);
            }
        }
        node = next;
    }
    b.finish(root)
}

/// One linear test per tester move sequence of length `depth`.
pub fn gen_exhaustive(spec: &Automaton, depth: usize) -> Vec<TestCase> {
    gen_exhaustive_limited(spec, depth, usize::MAX)
}

fn gen_exhaustive_limited(spec: &Automaton, depth: usize, limit: usize) -> Vec<TestCase> {
    let lts = Lts::new(spec);
    move_sequences(&lts, depth, limit)
        .iter()
        .map(|moves| linear_test(spec, moves))
        .collect()
}

/// `n` tests: random ones drawn from a single seeded stream, or the first
/// `n` exhaustive ones.
pub fn gen_suite(spec: &Automaton, depth: usize, n: usize, seed: u64, policy: Policy) -> Vec<TestCase> {
    match policy {
        Policy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| gen_random(spec, depth, &mut rng)).collect()
        }
        Policy::Exhaustive => gen_exhaustive_limited(spec, depth, n),
    }
}
