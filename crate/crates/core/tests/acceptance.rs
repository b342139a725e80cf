//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::thread;
use std::time::{Duration, Instant};

use common::random::random_pair;
use common::{aut, ca, circuit, ioca, oracle, spawn_server, EXAMPLES};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reoco::adapter::{LtsSut, TcpSut};
use reoco::circuit::parse_circuit;
use reoco::ioco::{gen_exhaustive, gen_suite, ioco_check, run_campaign, run_tests, CampaignConfig, Policy, Verdict};
use reoco::ioext::{angelic_completion, compose_systems, is_input_enabled};
use reoco::lts::{equivalent, isomorphism, read_aut, write_aut, Relation};
use reoco::semantics::{compile_circuit, compile_with_request_nodes, Mode};
use reoco::{Action, ActionKind, Atom, Automaton, Label, PortName};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn l(t: &str) -> Label {
    t.parse().unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn bisimilar_and_isomorphic(a: &Automaton, b: &Automaton, what: &str) -> Result<(), String> {
    ensure(equivalent(a, b, Relation::StrongBisim).equivalent, format!("{what}: not bisimilar"))?;
    ensure(isomorphism(a, b).is_some(), format!("{what}: not isomorphic"))
}

fn c1_example1() -> Outcome {
    bisimilar_and_isomorphic(&ca("example1-spec"), &aut("fig3a"), "spec vs fig3a")?;
    bisimilar_and_isomorphic(&ca("example1-impl"), &aut("fig3b"), "impl vs fig3b")?;
    Ok("spec ~ fig3a, impl ~ fig3b".into())
}

fn c2_example2() -> Outcome {
    let spec = ca("example2-spec");
    let imp = ca("example2-impl");
    bisimilar_and_isomorphic(&spec, &aut("fig4a"), "spec vs fig4a")?;
    bisimilar_and_isomorphic(&imp, &aut("fig4b"), "impl vs fig4b")?;
    Ok(format!("spec {} states ~ fig4a, impl {} states ~ fig4b", spec.num_states, imp.num_states))
}

fn c3_ioca() -> Outcome {
    let io = ioca("example1-spec");
    ensure(io.num_states == 16, format!("ignore strategy gives {} states", io.num_states))?;
    let fig = aut("fig6a");
    let raw = compile_with_request_nodes(&circuit("example1-spec")).map_err(|e| e.to_string())?;
    ensure(isomorphism(&raw, &fig).is_some(), "request-node compile not isomorphic to fig6a")?;
    ensure(isomorphism(&io, &angelic_completion(&fig)).is_some(), "ignore IOCA not isomorphic to completed fig6a")?;
    Ok(format!("16 states; {} transitions match fig6a", fig.transitions.len()))
}

fn c4_verdicts() -> Outcome {
    let v2 = ioco_check(&ioca("example2-impl"), &ioca("example2-spec"), 4).map_err(|e| e.to_string())?;
    let want = vec![l("{?A}"), l("{?B}"), l("{!A}"), Label::Delta];
    ensure(v2.failing_trace() == Some(want), format!("example 2: {v2}"))?;
    let v1 = ioco_check(&ioca("example1-impl"), &ioca("example1-spec"), 3).map_err(|e| e.to_string())?;
    ensure(v1.is_fail(), format!("example 1: {v1}"))?;
    for name in EXAMPLES {
        let a = ioca(name);
        let v = ioco_check(&a, &a, 4).map_err(|e| e.to_string())?;
        ensure(v.is_pass(), format!("{name} vs itself: {v}"))?;
    }
    Ok("example 2 witness {?A}·{?B}·{!A}·delta; example 1 fails at depth 3; self-checks pass".into())
}

fn c5_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut pass, mut fail) = (0, 0);
    for round in 0..200 {
        let (imp, spec) = random_pair(&mut rng, 12);
        let depth = rng.gen_range(1..=5);
        let v = ioco_check(&imp, &spec, depth).map_err(|e| e.to_string())?;
        let o = oracle::conforms(&imp, &spec, depth);
        ensure(v.is_pass() == o, format!("pair {round} depth {depth}: engine {v}, oracle conforms={o}"))?;
        if v.is_pass() {
            pass += 1;
        } else {
            fail += 1;
        }
    }
    Ok(format!("200/200 agree ({pass} pass, {fail} fail)"))
}

fn c6_testgen() -> Outcome {
    let mut run = 0;
    for (k, name) in EXAMPLES.iter().enumerate() {
        let spec = ioca(name);
        let tests = gen_suite(&spec, 4, 125, 600 + k as u64, Policy::Random);
        let mut sut = LtsSut::new(spec.clone(), k as u64);
        let s = run_tests(tests, &mut sut, Duration::from_millis(2000), 0);
        ensure(s.tests_run == 125 && s.passed == 125, format!("{name} vs itself: {s:?}"))?;
        run += s.tests_run;
    }
    let mut found = Vec::new();
    for (spec, imp, depth) in [("example1-spec", "example1-impl", 3), ("example2-spec", "example2-impl", 4)] {
        let tests = gen_exhaustive(&ioca(spec), depth);
        let n = tests.len();
        let mut sut = LtsSut::new(ioca(imp), 1);
        let s = run_tests(tests, &mut sut, Duration::from_millis(2000), 0);
        ensure(s.exec_error.is_none(), format!("{imp}: {:?}", s.exec_error))?;
        ensure(s.failed > 0, format!("{imp}: no failing test among {n} exhaustive tests"))?;
        found.push(format!("{imp} {}/{n} fail", s.failed));
    }
    Ok(format!("{run} random tests pass on conforming SUTs; exhaustive: {}", found.join(", ")))
}

fn rename(a: &Automaton, suffix: &str) -> Automaton {
    let f = |x: &Action| Action::new(PortName::new(format!("{}{suffix}", x.port.as_str())), x.kind, x.data.clone());
    let mut r = a.map_actions(f);
    r.inputs = a.inputs.iter().map(f).collect();
    r.outputs = a.outputs.iter().map(f).collect();
    r
}

fn c7_composition() -> Outcome {
    let mut pool: Vec<(Automaton, Automaton)> = EXAMPLES.iter().map(|n| (ioca(n), ioca(n))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    while pool.len() < 24 {
        let (imp, spec) = random_pair(&mut rng, 5);
        if ioco_check(&imp, &spec, 4).map_err(|e| e.to_string())?.is_pass() {
            pool.push((imp, spec));
        }
    }
    for q in 0..50 {
        let (i1, s1) = pool.choose(&mut rng).unwrap().clone();
        let (i2, s2) = pool.choose(&mut rng).unwrap().clone();
        let (i2, s2) = (rename(&i2, "x"), rename(&s2, "x"));
        let ic = compose_systems(&i1, &i2, &[]).map_err(|e| e.to_string())?;
        let sc = compose_systems(&s1, &s2, &[]).map_err(|e| e.to_string())?;
        let v = ioco_check(&ic, &sc, 4).map_err(|e| e.to_string())?;
        ensure(v.is_pass(), format!("quadruple {q}: {v}"))?;
    }
    Ok("50/50 composed pairs pass at depth 4".into())
}

fn c8_parity() -> Outcome {
    let pairs = [
        ("example1-spec", "example1-impl"),
        ("example1-spec", "example1-spec"),
        ("example2-spec", "example2-impl"),
        ("example2-spec", "example2-spec"),
    ];
    let timeout = Duration::from_millis(2000);
    let mut jobs = Vec::new();
    let cfg_for = move |seed| CampaignConfig {
        tests: 2,
        depth: 4,
        seed,
        policy: Policy::Random,
        timeout,
    };
    for (spec, imp) in pairs {
        // for nonconforming pairs, prefer seeds whose campaign records a failure
        let seeds: Vec<u64> = if spec == imp {
            vec![1, 2, 3]
        } else {
            (0..500u64)
                .filter(|&seed| run_campaign(&ioca(spec), &mut LtsSut::new(ioca(imp), seed), &cfg_for(seed)).failed > 0)
                .take(3)
                .collect()
        };
        for seed in seeds {
            jobs.push(thread::spawn(move || -> Result<bool, String> {
                let s = ioca(spec);
                let cfg = cfg_for(seed);
                let local = run_campaign(&s, &mut LtsSut::new(ioca(imp), seed), &cfg);
                let (addr, server) = spawn_server(ioca(imp), seed);
                let mut tcp = TcpSut::connect(addr).map_err(|e| e.to_string())?;
                let wire = run_campaign(&s, &mut tcp, &cfg);
                drop(tcp);
                server.join().unwrap().map_err(|e| e.to_string())?;
                ensure(local == wire, format!("{imp} seed {seed}: {local:?} vs {wire:?}"))?;
                Ok(local.failed > 0)
            }));
        }
    }
    // the example 2 scenario over the wire
    let scenario = thread::spawn(move || -> Result<Verdict, String> {
        let spec = ioca("example2-spec");
        let test = gen_exhaustive(&spec, 4)
            .into_iter()
            .find(|t| {
                let mut sut = LtsSut::new(ioca("example2-impl"), 0);
                reoco::ioco::run_test(t, &mut sut, timeout).failing_trace()
                    == Some(vec![l("{?A}"), l("{?B}"), l("{!A}"), Label::Theta])
            })
            .ok_or("no scenario test")?;
        let (addr, server) = spawn_server(ioca("example2-impl"), 0);
        let mut tcp = TcpSut::connect(addr).map_err(|e| e.to_string())?;
        let wire = run_tests([test], &mut tcp, timeout, 0);
        drop(tcp);
        server.join().unwrap().map_err(|e| e.to_string())?;
        Ok(wire.verdicts.into_iter().next().unwrap_or(Verdict::Pass))
    });
    let mut failing = 0;
    for j in jobs {
        if j.join().map_err(|_| "campaign thread panicked".to_string())?? {
            failing += 1;
        }
    }
    let v = scenario.join().map_err(|_| "scenario thread panicked".to_string())??;
    ensure(
        v.failing_trace() == Some(vec![l("{?A}"), l("{?B}"), l("{!A}"), Label::Theta]),
        format!("scenario over TCP: {v}"),
    )?;
    Ok(format!("12 campaigns identical ({failing} with failures); theta failure reproduced over TCP"))
}

fn c9_tables() -> Outcome {
    let c = parse_circuit("circuit c { sync A -> B }").map_err(|e| e.to_string())?;
    let aca = compile_circuit(&c, Mode::Aca, None).map_err(|e| e.to_string())?;
    let mut cycle = Automaton::new(4, 0);
    for (k, t) in ["{b:A,b:B}", "{s:A,s:B}", "{f:A,f:B}", "{u:A,u:B}"].iter().enumerate() {
        cycle.add(k, l(t), (k + 1) % 4);
    }
    ensure(isomorphism(&aca, &cycle).is_some(), format!("ACA sync: {aca:?}"))?;
    let col = compile_circuit(&c, Mode::Coloring, None).map_err(|e| e.to_string())?;
    let mut rows = Automaton::new(1, 0);
    for t in ["{w:A,w:B}", "{g:A,r:B}", "{r:A,g:B}", "{g:A,g:B}"] {
        rows.add(0, l(t), 0);
    }
    ensure(isomorphism(&col, &rows).is_some(), format!("coloring sync: {col:?}"))?;
    Ok("ACA 4-phase cycle; coloring single state with 4 rows".into())
}

fn random_label(rng: &mut ChaCha8Rng) -> Label {
    match rng.gen_range(0..10) {
        0 => return Label::Tau,
        1 => return Label::Delta,
        2 => return Label::Theta,
        _ => {}
    }
    let mut acts = Vec::new();
    let mut used = BTreeSet::new();
    for _ in 0..rng.gen_range(1..=4) {
        let kind = *ActionKind::ALL.choose(rng).unwrap();
        let len = rng.gen_range(1..=4);
        let mut port: String = (0..len)
            .map(|i| {
                let pool: &[u8] = if i == 0 { b"ABCXYZ" } else { b"abz09_" };
                *pool.choose(rng).unwrap() as char
            })
            .collect();
        if rng.gen_bool(0.2) {
            port.push_str(".ch1");
        }
        if !used.insert((port.clone(), kind)) {
            continue;
        }
        let data = rng.gen_bool(0.3).then(|| Atom::new(["0", "1", "x", "red"].choose(rng).unwrap()));
        acts.push(Action::new(PortName::new(port), kind, data));
    }
    Label::from_actions(acts)
}

fn c10_format() -> Outcome {
    let mut checked = 0;
    let fixtures: Vec<(String, Automaton)> = ["fig3a", "fig3b", "fig4a", "fig4b", "fig6a"]
        .iter()
        .map(|n| (n.to_string(), aut(n)))
        .chain(EXAMPLES.iter().map(|n| (format!("{n} (IOCA)"), ioca(n))))
        .chain(EXAMPLES.iter().map(|n| (format!("{n} (CA)"), ca(n))))
        .collect();
    for (name, a) in &fixtures {
        let back = read_aut(&write_aut(a)).map_err(|e| format!("{name}: {e}"))?;
        ensure(equivalent(a, &back, Relation::StrongBisim).equivalent, format!("{name}: round trip differs"))?;
        checked += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..1000 {
        let label = random_label(&mut rng);
        let text = label.to_string();
        let back: Label = text.parse().map_err(|e| format!("{text}: {e}"))?;
        ensure(back == label, format!("{text} parsed as {back}"))?;
    }
    ensure(is_input_enabled(&ioca("example1-spec")).is_ok(), "example 1 IOCA not input-enabled")?;
    Ok(format!("{checked} automata round-trip; 1000/1000 labels round-trip"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("figure fidelity, example 1", Duration::from_secs(1), c1_example1),
        ("figure fidelity, example 2", Duration::from_secs(1), c2_example2),
        ("IOCA construction", Duration::from_secs(5), c3_ioca),
        ("conformance verdicts", Duration::from_secs(5), c4_verdicts),
        ("oracle equivalence", Duration::from_secs(60), c5_oracle),
        ("test generation soundness/exhaustiveness", Duration::from_secs(60), c6_testgen),
        ("compositionality at desk scale", Duration::from_secs(60), c7_composition),
        ("transport parity", Duration::from_secs(30), c8_parity),
        ("ACA and coloring tables", Duration::from_secs(1), c9_tables),
        ("formats", Duration::from_secs(10), c10_format),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > *limit => Err(format!("{detail}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({took:.2?}): {detail}", k + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name} ({took:.2?}): {why}", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
