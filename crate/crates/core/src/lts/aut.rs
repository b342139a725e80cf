//! Aldebaran `.aut` reading and writing.
//!
//! ```text
//! des (0,2,2)
//! (0,"{A,C}",1)
//! (1,"{B}",0)
//! ```
//!
//! Labels are always quoted on write. On read, quoted and bare labels are
//! both accepted, and bare multiaction labels such as `iA|iB` are converted
//! to `{?A,?B}` (`oX` becomes `!X`).

use thiserror::Error;

use crate::model::{ActionKind, Automaton, Label, LabelParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutError {
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: malformed transition: {reason}")]
    Transition { line: usize, reason: String },
    #[error("line {line}: state {state} is out of range (the header declares {declared} states)")]
    StateOutOfRange {
        line: usize,
        state: usize,
        declared: usize,
    },
    #[error("line {line}: unparseable label: {source}")]
    Label {
        line: usize,
        #[source]
        source: LabelParseError,
    },
}

/// Render in canonical form: reachable states in breadth-first order from
/// the initial state (which becomes 0), then any unreachable states.
pub fn write_aut(a: &Automaton) -> String {
    let (canon, _) = a.renumber(&a.canonical_order());
    let mut text = format!("des ({},{},{})\n", canon.initial, canon.transitions.len(), canon.num_states);
    for t in &canon.transitions {
        text.push_str(&format!("({},\"{}\",{})\n", t.from, t.label, t.to));
    }
    text
}

fn parse_numbers(inner: &str) -> Option<Vec<usize>> {
    inner.split(',').map(|p| p.trim().parse().ok()).collect()
}

/// Translate an mCRL2-style multiaction (`iA|oB`) to canonical label syntax.
fn multiaction_label(text: &str) -> String {
    match text {
        "tau" | "delta" | "theta" => return text.to_string(),
        _ => {}
    }
    let parts: Vec<String> = text
        .split('|')
        .map(|raw| {
            let a = raw.trim();
            let mut chars = a.chars();
            match (chars.next(), chars.next()) {
                (Some('i'), Some(c)) if c.is_ascii_uppercase() => format!("?{}", &a[1..]),
                (Some('o'), Some(c)) if c.is_ascii_uppercase() => format!("!{}", &a[1..]),
                _ => a.to_string(),
            }
        })
        .collect();
    format!("{{{}}}", parts.join(","))
}

/// Parse `.aut` text. Request actions become the input alphabet and observe
/// actions the output alphabet.
pub fn read_aut(text: &str) -> Result<Automaton, AutError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(AutError::Header {
        line: 1,
        reason: "empty input".into(),
    })?;
    let header_err = |reason: &str| AutError::Header {
        line: hline,
        reason: reason.into(),
    };
    let inner = header
        .strip_prefix("des")
        .map(str::trim)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| header_err("expected `des (<initial>,<transitions>,<states>)`"))?;
    let nums = parse_numbers(inner).ok_or_else(|| header_err("expected three numbers"))?;
    let [initial, count, states] = nums[..] else {
        return Err(header_err("expected three numbers"));
    };
    if initial >= states {
        return Err(header_err("initial state is out of range"));
    }

    let mut a = Automaton::new(states, initial);
    for (line, raw) in lines {
        let terr = |reason: &str| AutError::Transition {
            line,
            reason: reason.into(),
        };
        let body = raw
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| terr("expected `(<from>,<label>,<to>)`"))?;
        let first = body.find(',').ok_or_else(|| terr("missing fields"))?;
        let last = body.rfind(',').filter(|&i| i > first).ok_or_else(|| terr("missing fields"))?;
        let from: usize = body[..first].trim().parse().map_err(|_| terr("bad source state"))?;
        let to: usize = body[last + 1..].trim().parse().map_err(|_| terr("bad target state"))?;
        let raw_label = body[first + 1..last].trim();
        let label_text = match raw_label.strip_prefix('"').and_then(|r| r.strip_suffix('"')) {
            Some(q) => q.to_string(),
            None => raw_label.to_string(),
        };
        let label_text = if label_text.starts_with('{') {
            label_text
        } else {
            multiaction_label(&label_text)
        };
        let label: Label = label_text
            .parse()
            .map_err(|source| AutError::Label { line, source })?;
        for state in [from, to] {
            if state >= states {
                return Err(AutError::StateOutOfRange {
                    line,
                    state,
                    declared: states,
                });
            }
        }
        for act in label.actions() {
            match act.kind {
                ActionKind::Request => {
                    a.inputs.insert(act.clone());
                }
                ActionKind::Observe => {
                    a.outputs.insert(act.clone());
                }
                _ => {}
            }
        }
        a.add(from, label, to);
    }
    if a.transitions.len() != count {
        return Err(header_err(&format!(
            "header declares {count} transitions, found {}",
            a.transitions.len()
        )));
    }
    a.normalize();
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_plain_ca() {
        let a = read_aut("des (0,2,2)\n(0,\"{A,C}\",1)\n(1,\"{B}\",0)\n").unwrap();
        assert_eq!(a.num_states, 2);
        assert_eq!(a.transitions.len(), 2);
        assert!(!a.is_io());
        assert_eq!(a.transitions[0].label.to_string(), "{A,C}");
    }

    #[test]
    fn tau_is_quoted_on_write() {
        let mut a = Automaton::new(2, 0);
        a.add(0, Label::Tau, 1);
        let text = write_aut(&a);
        assert_eq!(text, "des (0,1,2)\n(0,\"tau\",1)\n");
        assert_eq!(read_aut("des (0,1,2)\n(0,tau,1)\n").unwrap(), a);
    }

    #[test]
    fn multiactions_become_requests_and_observations() {
        let a = read_aut("des (0,2,2)\n(0,iA|iB,1)\n(1,\"oC\",0)\n").unwrap();
        assert_eq!(a.transitions[0].label.to_string(), "{?A,?B}");
        assert_eq!(a.transitions[1].label.to_string(), "{!C}");
        assert_eq!(a.inputs.len(), 2);
        assert_eq!(a.outputs.len(), 1);
    }

    #[test]
    fn write_renumbers_breadth_first() {
        let mut a = Automaton::new(3, 2);
        a.add(2, "{A}".parse().unwrap(), 0);
        a.add(0, "{B}".parse().unwrap(), 1);
        assert_eq!(write_aut(&a), "des (0,2,3)\n(0,\"{A}\",1)\n(1,\"{B}\",2)\n");
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(read_aut(""), Err(AutError::Header { .. })));
        assert!(matches!(read_aut("des 0,1,2\n"), Err(AutError::Header { .. })));
        assert!(matches!(
            read_aut("des (0,1,2)\n(0,\"{A}\",5)\n"),
            Err(AutError::StateOutOfRange { state: 5, line: 2, .. })
        ));
        assert!(matches!(
            read_aut("des (0,1,2)\n(0,\"{A,}\",1)\n"),
            Err(AutError::Label { line: 2, .. })
        ));
        assert!(matches!(read_aut("des (0,2,2)\n(0,\"{A}\",1)\n"), Err(AutError::Header { .. })));
    }
}
