mod common;

use common::{aut, ca, circuit, ioca};
use reoco::ioext::{angelic_completion, is_input_enabled};
use reoco::lts::{equivalent, isomorphism, Relation};
use reoco::semantics::compile_with_request_nodes;

#[test]
fn example_circuits_match_their_automata() {
    for (circ, fig) in [
        ("example1-spec", "fig3a"),
        ("example1-impl", "fig3b"),
        ("example2-spec", "fig4a"),
        ("example2-impl", "fig4b"),
    ] {
        let got = ca(circ);
        let want = aut(fig);
        let eq = equivalent(&got, &want, Relation::StrongBisim);
        assert!(eq.equivalent, "{circ} vs {fig}: {:?}", eq.counterexample);
        assert_eq!(got.num_states, want.num_states, "{circ}");
        assert!(isomorphism(&got, &want).is_some(), "{circ}");
    }
}

#[test]
fn swapped_channels_are_distinguished_by_a_first_step() {
    let eq = equivalent(&aut("fig3a"), &aut("fig3b"), Relation::StrongBisim);
    assert!(!eq.equivalent);
    assert_eq!(
        eq.counterexample,
        Some(reoco::lts::Counterexample::Trace(vec!["{A,B}".parse().unwrap()]))
    );
}

#[test]
fn request_nodes_reproduce_the_io_figure() {
    let fig = aut("fig6a");
    assert_eq!(fig.num_states, 16);
    assert_eq!(fig.transitions.len(), 50);
    let raw = compile_with_request_nodes(&circuit("example1-spec")).unwrap();
    assert!(isomorphism(&raw, &fig).is_some());
}

#[test]
fn ignore_strategy_is_the_completed_io_figure() {
    let fig = aut("fig6a");
    let compiled = ioca("example1-spec");
    assert_eq!(compiled.num_states, 16);
    assert!(is_input_enabled(&compiled).is_ok());
    assert!(is_input_enabled(&fig).is_err());
    let completed = angelic_completion(&fig);
    assert_eq!(completed.transitions.len(), 74);
    assert!(isomorphism(&compiled, &completed).is_some());
}
