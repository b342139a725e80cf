use std::collections::BTreeSet;
use std::time::Duration;

use super::generate::{gen_exhaustive, gen_random, Policy};
use super::testcase::TestCase;
use super::Verdict;
use crate::adapter::{Sut, DEFAULT_QUIESCENCE_TIMEOUT};
use crate::model::{Automaton, Label};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Execute one test against a reset SUT.
///
/// At a stimulating node an output that is already waiting takes priority
/// over the stimulus. At an observing node the executor waits up to
/// `timeout`; silence is recorded as `theta`.
pub fn run_test(t: &TestCase, sut: &mut dyn Sut, timeout: Duration) -> Verdict {
    let a = &t.automaton;
    let adj = a.adjacency();
    let mut state = a.initial;
    let mut trace = Vec::new();
    loop {
        if state == t.pass {
            return Verdict::Pass;
        }
        if state == t.fail {
            // only reachable when the root itself is fail
            return Verdict::Fail {
                witness: trace,
                expected: BTreeSet::new(),
                observed: Label::Theta,
            };
        }
        let edges: Vec<_> = adj[state].iter().map(|&i| &a.transitions[i]).collect();
        let stimulus = edges.iter().find(|e| a.is_input_label(&e.label));
        let observed = match stimulus {
            Some(e) => match sut.await_output(Duration::ZERO) {
                Ok(Some(o)) => o,
                Ok(None) => {
                    if let Err(err) = sut.send(&e.label) {
                        return Verdict::ExecError(err.to_string());
                    }
                    trace.push(e.label.clone());
                    state = e.to;
                    continue;
                }
                Err(err) => return Verdict::ExecError(err.to_string()),
            },
            None => match sut.await_output(timeout) {
                Ok(Some(o)) => o,
                Ok(None) => Label::Theta,
                Err(err) => return Verdict::ExecError(err.to_string()),
            },
        };
        let Some(edge) = edges.iter().find(|e| e.label == observed) else {
            return Verdict::ExecError(format!("output {observed} is outside the declared alphabet"));
        };
        if edge.to == t.fail {
            let expected = edges
                .iter()
                .filter(|e| e.to != t.fail && !a.is_input_label(&e.label))
                .map(|e| e.label.clone())
                .collect();
            return Verdict::Fail {
                witness: trace,
                expected,
                observed,
            };
        }
        trace.push(observed);
        state = edge.to;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignConfig {
    pub tests: usize,
    pub depth: usize,
    pub seed: u64,
    pub policy: Policy,
    pub timeout: Duration,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            tests: 100,
            depth: 4,
            seed: 0,
            policy: Policy::Random,
            timeout: DEFAULT_QUIESCENCE_TIMEOUT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CampaignSummary {
    pub tests_run: usize,
    pub passed: usize,
    pub failed: usize,
    /// Index and verdict of the first failing test.
    pub first_failure: Option<(usize, Verdict)>,
    pub seed: u64,
    /// Set when an execution error stopped the campaign early.
    pub exec_error: Option<String>,
    pub verdicts: Vec<Verdict>,
}

impl CampaignSummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0 && self.exec_error.is_none()
    }
}

/// Run `tests` against `sut`, resetting it before each one. An execution
/// error stops the campaign; the summary covers the tests run so far.
pub fn run_tests(tests: impl IntoIterator<Item = TestCase>, sut: &mut dyn Sut, timeout: Duration, seed: u64) -> CampaignSummary {
    let mut summary = CampaignSummary {
        seed,
        ..CampaignSummary::default()
    };
    for t in tests {
        if let Err(e) = sut.reset() {
            summary.exec_error = Some(e.to_string());
            break;
        }
        let v = run_test(&t, sut, timeout);
        summary.tests_run += 1;
        match &v {
            Verdict::Pass => summary.passed += 1,
            Verdict::Fail { .. } => {
                summary.failed += 1;
                if summary.first_failure.is_none() {
                    summary.first_failure = Some((summary.tests_run - 1, v.clone()));
                }
            }
            Verdict::ExecError(reason) => summary.exec_error = Some(reason.clone()),
        }
        summary.verdicts.push(v);
        if summary.exec_error.is_some() {
            break;
        }
    }
    summary
}

/// Generate and run `cfg.tests` tests from `spec` against `sut`.
pub fn run_campaign(spec: &Automaton, sut: &mut dyn Sut, cfg: &CampaignConfig) -> CampaignSummary {
    match cfg.policy {
        Policy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let tests = (0..cfg.tests).map(move |_| gen_random(spec, cfg.depth, &mut rng));
            run_tests(tests, sut, cfg.timeout, cfg.seed)
        }
        Policy::Exhaustive => {
            let mut tests = gen_exhaustive(spec, cfg.depth);
            tests.truncate(cfg.tests);
            run_tests(tests, sut, cfg.timeout, cfg.seed)
        }
    }
}
