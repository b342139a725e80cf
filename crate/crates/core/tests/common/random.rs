//! Random IOCA generation for property tests.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use reoco::ioext::angelic_completion;
use reoco::{Action, Automaton, Label};

pub struct Ports {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

/// Two or three ports, at least one of each direction.
pub fn random_ports(rng: &mut ChaCha8Rng) -> Ports {
    let names = ["A", "B", "C"];
    let k = rng.gen_range(2..=3);
    let n_in = rng.gen_range(1..k);
    Ports {
        inputs: names[..n_in].iter().map(|s| s.to_string()).collect(),
        outputs: names[n_in..k].iter().map(|s| s.to_string()).collect(),
    }
}

fn random_label(rng: &mut ChaCha8Rng, ports: &Ports) -> Label {
    let req = |rng: &mut ChaCha8Rng| Action::request(ports.inputs.choose(rng).unwrap());
    let obs = |rng: &mut ChaCha8Rng| {
        let mut acts: Vec<Action> = ports.outputs.iter().filter(|_| rng.gen_bool(0.5)).map(|p| Action::observe(p)).collect();
        if acts.is_empty() {
            acts.push(Action::observe(ports.outputs.choose(rng).unwrap()));
        }
        acts
    };
    match rng.gen_range(0..100) {
        0..=39 => Label::single(req(rng)),
        40..=74 => Label::from_actions(obs(rng)),
        75..=84 => {
            let mut acts = obs(rng);
            acts.push(req(rng));
            Label::from_actions(acts)
        }
        _ => Label::Tau,
    }
}

fn with_alphabet(mut a: Automaton, ports: &Ports) -> Automaton {
    a.inputs = ports.inputs.iter().map(|p| Action::request(p)).collect();
    a.outputs = ports.outputs.iter().map(|p| Action::observe(p)).collect();
    angelic_completion(&a)
}

/// A random input-enabled automaton with `1..=max_states` states.
pub fn random_ioca(rng: &mut ChaCha8Rng, ports: &Ports, max_states: usize) -> Automaton {
    let n = rng.gen_range(1..=max_states);
    let mut a = Automaton::new(n, 0);
    for s in 0..n {
        for _ in 0..rng.gen_range(1..=3) {
            let l = random_label(rng, ports);
            a.add(s, l, rng.gen_range(0..n));
        }
    }
    with_alphabet(a, ports)
}

/// A small random edit of `spec`: drop, add or redirect a few transitions.
pub fn mutate(rng: &mut ChaCha8Rng, spec: &Automaton, ports: &Ports) -> Automaton {
    let mut a = spec.clone();
    for _ in 0..rng.gen_range(0..=2) {
        let n = a.num_states;
        match rng.gen_range(0..3) {
            0 if !a.transitions.is_empty() => {
                let k = rng.gen_range(0..a.transitions.len());
                a.transitions.remove(k);
            }
            1 => {
                let l = random_label(rng, ports);
                a.add(rng.gen_range(0..n), l, rng.gen_range(0..n));
            }
            _ if !a.transitions.is_empty() => {
                let k = rng.gen_range(0..a.transitions.len());
                a.transitions[k].to = rng.gen_range(0..n);
            }
            _ => {}
        }
    }
    with_alphabet(a.normalized(), ports)
}

/// A spec/impl pair over the same alphabet: the impl is the spec itself, an
/// edit of it, or unrelated.
pub fn random_pair(rng: &mut ChaCha8Rng, max_states: usize) -> (Automaton, Automaton) {
    let ports = random_ports(rng);
    let spec = random_ioca(rng, &ports, max_states);
    let imp = match rng.gen_range(0..10) {
        0 => spec.clone(),
        1..=7 => mutate(rng, &spec, &ports),
        _ => random_ioca(rng, &ports, max_states),
    };
    (imp, spec)
}
