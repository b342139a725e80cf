//! ioco conformance: bounded checking, test generation and test execution.

mod check;
mod generate;
mod run;
mod testcase;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::ioext::MissingInput;
use crate::lts::Trace;
use crate::model::{Action, Label};

pub use check::{ioco_check, ioco_check_with, CheckOptions};
pub use generate::{gen_exhaustive, gen_random, gen_suite, gen_test, Policy};
pub use run::{run_campaign, run_test, run_tests, CampaignConfig, CampaignSummary};
pub use testcase::{
    output_labels, read_suite, validate_testcase, write_suite, SuiteEntry, SuiteError, TestCase,
    TestCaseViolation,
};

/// Outcome of a check or of a test run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// After `witness`, the observed output `observed` is not among `expected`.
    Fail {
        witness: Trace,
        expected: BTreeSet<Label>,
        observed: Label,
    },
    ExecError(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }

    /// The witness trace extended with the offending output.
    pub fn failing_trace(&self) -> Option<Trace> {
        match self {
            Verdict::Fail { witness, observed, .. } => {
                let mut t = witness.clone();
                t.push(observed.clone());
                Some(t)
            }
            _ => None,
        }
    }
}

/// Render a trace as `{?A}·{!B}·delta`; the empty trace is `ε`.
pub fn format_trace(trace: &[Label]) -> String {
    if trace.is_empty() {
        return "ε".to_string();
    }
    trace.iter().map(Label::to_string).collect::<Vec<_>>().join("·")
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Fail {
                witness,
                expected,
                observed,
            } => {
                let exp: Vec<String> = expected.iter().map(Label::to_string).collect();
                write!(
                    f,
                    "fail after {}: observed {observed}, expected one of [{}]",
                    format_trace(witness),
                    exp.join(", ")
                )
            }
            Verdict::ExecError(reason) => write!(f, "execution error: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("implementation is not input-enabled: state {} refuses {}", .0.state, .0.input)]
    NotInputEnabled(MissingInput),
    #[error("alphabets differ: {0}")]
    AlphabetMismatch(String),
}

fn describe(actions: &BTreeSet<Action>) -> String {
    let v: Vec<String> = actions.iter().map(Action::to_string).collect();
    format!("{{{}}}", v.join(","))
}
