use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lts::{read_aut, write_aut, AutError};
use crate::model::{Action, Automaton, Label, StateId};

/// A finite, deterministic, tree-shaped test with `pass` and `fail` sinks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub automaton: Automaton,
    pub pass: StateId,
    pub fail: StateId,
}

/// Every nonempty output label with at most one action per port, in
/// canonical order.
pub fn output_labels(a: &Automaton) -> Vec<Label> {
    let mut by_port: BTreeMap<_, Vec<&Action>> = BTreeMap::new();
    for x in &a.outputs {
        by_port.entry(&x.port).or_default().push(x);
    }
    let mut sets: Vec<Vec<Action>> = vec![Vec::new()];
    for choices in by_port.values() {
        let mut next = Vec::new();
        for s in &sets {
            next.push(s.clone());
            for &c in choices {
                let mut t = s.clone();
                t.push(c.clone());
                next.push(t);
            }
        }
        sets = next;
    }
    let mut labels: Vec<Label> = sets
        .into_iter()
        .filter(|s| !s.is_empty())
        .map(Label::from_actions)
        .collect();
    labels.sort();
    labels
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TestCaseViolation {
    #[error("pass and fail are the same state")]
    SinksCoincide,
    #[error("sink state {0} is out of range")]
    SinkOutOfRange(StateId),
    #[error("the test case is not deterministic")]
    NotDeterministic,
    #[error("state {0} lies on a cycle")]
    Cycle(StateId),
    #[error("state {state} offers {found}, which is neither one input plus all outputs nor all outputs plus theta")]
    BadInit { state: StateId, found: String },
}

/// Check a test case against the definition: deterministic, distinct sinks,
/// acyclic apart from sink self-loops, and every state offering exactly
/// `{a} ∪ L_U` for one input `a`, or `L_U ∪ {theta}`.
pub fn validate_testcase(t: &TestCase) -> Result<(), TestCaseViolation> {
    let a = &t.automaton;
    for s in [t.pass, t.fail] {
        if s >= a.num_states {
            return Err(TestCaseViolation::SinkOutOfRange(s));
        }
    }
    if t.pass == t.fail {
        return Err(TestCaseViolation::SinksCoincide);
    }
    if !a.is_deterministic() {
        return Err(TestCaseViolation::NotDeterministic);
    }
    let adj = a.adjacency();
    // colour: 0 unvisited, 1 on stack, 2 done
    let mut colour = vec![0u8; a.num_states];
    for root in 0..a.num_states {
        if colour[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour[root] = 1;
        while let Some(&mut (s, ref mut next)) = stack.last_mut() {
            if let Some(&i) = adj[s].get(*next) {
                *next += 1;
                let to = a.transitions[i].to;
                if to == s && (s == t.pass || s == t.fail) {
                    continue;
                }
                match colour[to] {
                    0 => {
                        colour[to] = 1;
                        stack.push((to, 0));
                    }
                    1 => return Err(TestCaseViolation::Cycle(to)),
                    _ => {}
                }
            } else {
                colour[s] = 2;
                stack.pop();
            }
        }
    }
    let outs: BTreeSet<Label> = output_labels(a).into_iter().collect();
    for (s, edges) in adj.iter().enumerate() {
        let init: BTreeSet<Label> = edges.iter().map(|&i| a.transitions[i].label.clone()).collect();
        let rest: BTreeSet<Label> = init.difference(&outs).cloned().collect();
        let ok = outs.is_subset(&init)
            && rest.len() == 1
            && rest.iter().all(|l| *l == Label::Theta || a.is_input_label(l));
        if !ok {
            let found: Vec<String> = init.iter().map(Label::to_string).collect();
            return Err(TestCaseViolation::BadInit {
                state: s,
                found: format!("[{}]", found.join(", ")),
            });
        }
    }
    Ok(())
}

/// One line of the suite sidecar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub file: String,
    pub pass: StateId,
    pub fail: StateId,
}

pub const SUITE_INDEX: &str = "suite.jsonl";

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Aut { path: String, source: AutError },
    #[error("{path} line {line}: {source}")]
    Index {
        path: String,
        line: usize,
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SuiteError + '_ {
    move |source| SuiteError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write `tests` into `dir` as `test_NNNN.aut` files plus a `suite.jsonl`
/// index naming each file's pass and fail states.
pub fn write_suite(dir: &Path, tests: &[TestCase]) -> Result<(), SuiteError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let index_path = dir.join(SUITE_INDEX);
    let mut index = Vec::new();
    for (k, t) in tests.iter().enumerate() {
        let file = format!("test_{k:04}.aut");
        let path = dir.join(&file);
        fs::write(&path, write_aut(&t.automaton)).map_err(io_err(&path))?;
        let entry = SuiteEntry {
            file,
            pass: t.pass,
            fail: t.fail,
        };
        let line = serde_json::to_string(&entry).expect("suite entries serialise");
        writeln!(index, "{line}").map_err(io_err(&index_path))?;
    }
    fs::write(&index_path, index).map_err(io_err(&index_path))
}

/// Read a suite written by [`write_suite`]; `path` is the directory or the
/// index file itself. The test automata take their alphabets from `spec`,
/// since `.aut` files do not record which actions are inputs.
pub fn read_suite(path: &Path, spec: &Automaton) -> Result<Vec<TestCase>, SuiteError> {
    let (dir, index_path) = if path.is_dir() {
        (path.to_path_buf(), path.join(SUITE_INDEX))
    } else {
        (path.parent().unwrap_or(Path::new(".")).to_path_buf(), path.to_path_buf())
    };
    let file = fs::File::open(&index_path).map_err(io_err(&index_path))?;
    let mut tests = Vec::new();
    for (n, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(&index_path))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: SuiteEntry = serde_json::from_str(&line).map_err(|source| SuiteError::Index {
            path: index_path.display().to_string(),
            line: n + 1,
            source,
        })?;
        let aut_path = dir.join(&entry.file);
        let text = fs::read_to_string(&aut_path).map_err(io_err(&aut_path))?;
        let mut automaton = read_aut(&text).map_err(|source| SuiteError::Aut {
            path: aut_path.display().to_string(),
            source,
        })?;
        automaton.inputs = spec.inputs.clone();
        automaton.outputs = spec.outputs.clone();
        tests.push(TestCase {
            automaton,
            pass: entry.pass,
            fail: entry.fail,
        });
    }
    Ok(tests)
}
