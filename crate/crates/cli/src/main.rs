//! `reoco`: compile Reo circuits, check ioco, generate and run tests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reoco::adapter::{serve_sut_on, LtsSut, ServeOptions, Sut, TcpSut, DEFAULT_EMISSION_DELAY};
use reoco::circuit::{parse_circuit, validate_circuit};
use reoco::ioco::{format_trace, gen_suite, ioco_check, read_suite, run_tests, write_suite, CheckError, Policy, Verdict};
use reoco::ioext::{is_input_enabled, RequestStrategy};
use reoco::lts::{equivalent, read_aut, write_aut, Counterexample, Relation};
use reoco::semantics::{compile_circuit, Mode};
use reoco::Automaton;

const EXIT_FAIL: u8 = 4;

#[derive(Parser)]
#[command(name = "reoco", version, about = "Reo circuits to constraint automata, ioco checking and testing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Clone)]
struct Opts {
    /// Semantic model for `compile`.
    #[arg(long, global = true, value_enum, default_value_t = Semantics::Ca)]
    semantics: Semantics,
    /// Compile with boundary request/observe actions.
    #[arg(long, global = true)]
    io: bool,
    /// Request handling: ignore, overwrite, queue:N or queue:N:overwrite.
    #[arg(long, global = true, default_value = "ignore")]
    strategy: RequestStrategy,
    /// Trace depth for checking and test generation.
    #[arg(long, global = true, default_value_t = 4)]
    depth: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Quiescence timeout when running tests.
    #[arg(long = "timeout-ms", global = true, default_value_t = 2000)]
    timeout_ms: u64,
    /// Delay before a simulated SUT emits an output.
    #[arg(long = "emission-delay-ms", global = true)]
    emission_delay_ms: Option<u64>,
    /// Print state and transition counts.
    #[arg(long, global = true)]
    stats: bool,
    /// Output file (compile) or directory (testgen).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Semantics {
    Ca,
    Aca,
    Coloring,
}

impl From<Semantics> for Mode {
    fn from(s: Semantics) -> Mode {
        match s {
            Semantics::Ca => Mode::Ca,
            Semantics::Aca => Mode::Aca,
            Semantics::Coloring => Mode::Coloring,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compile a circuit to an .aut automaton.
    Compile { circuit: PathBuf },
    /// Bounded ioco check of an implementation against a specification.
    Ioco { spec: PathBuf, implementation: PathBuf },
    /// Generate a test suite (.aut files plus suite.jsonl) from a specification.
    Testgen {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = PolicyArg::Random)]
        policy: PolicyArg,
        /// Number of tests (random) or upper limit (exhaustive).
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Run a test suite against a served SUT or a simulated implementation.
    Testrun {
        spec: PathBuf,
        suite: PathBuf,
        #[arg(long, conflicts_with = "implementation", required_unless_present = "implementation")]
        connect: Option<String>,
        #[arg(long = "impl")]
        implementation: Option<PathBuf>,
    },
    /// Serve an implementation over TCP for one test session.
    Serve {
        implementation: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7890")]
        listen: String,
    },
    /// Compare two automata for strong bisimilarity or trace equivalence.
    Compare {
        left: PathBuf,
        right: PathBuf,
        /// Compare traces up to this depth instead of bisimilarity.
        #[arg(long)]
        traces: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Random,
    Exhaustive,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(3, format!("{}: {e}", path.display())))
}

/// Load an automaton from `.aut`, or compile a `.reo` circuit; `io` forces
/// the request/observe extension for circuits.
fn load(path: &Path, opts: &Opts, io: bool) -> Result<Automaton, Failure> {
    let text = read_text(path)?;
    if path.extension().is_some_and(|e| e == "reo") {
        let c = parse_circuit(&text).map_err(|e| fail(1, format!("{}: {e}", path.display())))?;
        let diags = validate_circuit(&c);
        if !diags.is_empty() {
            let lines: Vec<String> = diags.iter().map(|d| format!("{}: {d}", path.display())).collect();
            return Err(fail(1, lines.join("\n")));
        }
        let mode = Mode::from(opts.semantics);
        let strategy = (io || opts.io).then_some(opts.strategy);
        compile_circuit(&c, mode, strategy).map_err(|e| fail(2, format!("{}: {e}", path.display())))
    } else {
        read_aut(&text).map_err(|e| fail(1, format!("{}: {e}", path.display())))
    }
}

/// `.aut` files only list the actions they use; give both sides the union.
fn unify_alphabets(a: &mut Automaton, b: &mut Automaton) {
    let inputs: std::collections::BTreeSet<_> = a.inputs.union(&b.inputs).cloned().collect();
    let outputs: std::collections::BTreeSet<_> = a.outputs.union(&b.outputs).cloned().collect();
    for x in [a, b] {
        x.inputs = inputs.clone();
        x.outputs = outputs.clone();
    }
}

fn write_output(opts: &Opts, text: &str) -> Result<(), Failure> {
    match &opts.out {
        Some(p) => fs::write(p, text).map_err(|e| fail(3, format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| fail(3, format!("stdout: {e}"))),
    }
}

fn stats(a: &Automaton) {
    eprintln!("states: {}, transitions: {}", a.num_states, a.transitions.len());
}

fn emission_delay(opts: &Opts) -> Duration {
    opts.emission_delay_ms.map(Duration::from_millis).unwrap_or(DEFAULT_EMISSION_DELAY)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let opts = &cli.opts;
    if opts.io && !matches!(opts.semantics, Semantics::Ca) {
        return Err(fail(1, "--io requires --semantics ca"));
    }
    match &cli.command {
        Command::Compile { circuit } => {
            let a = load(circuit, opts, false)?;
            if opts.stats {
                stats(&a);
            }
            write_output(opts, &write_aut(&a))?;
            Ok(0)
        }
        Command::Ioco { spec, implementation } => {
            let mut s = load(spec, opts, true)?;
            let mut i = load(implementation, opts, true)?;
            unify_alphabets(&mut s, &mut i);
            match ioco_check(&i, &s, opts.depth) {
                Ok(Verdict::Pass) => {
                    println!("pass (depth {})", opts.depth);
                    Ok(0)
                }
                Ok(v @ Verdict::Fail { .. }) => {
                    println!("fail: witness {}", format_trace(&v.failing_trace().unwrap_or_default()));
                    println!("{v}");
                    Ok(EXIT_FAIL)
                }
                Ok(Verdict::ExecError(e)) => Err(fail(2, e)),
                Err(e @ CheckError::NotInputEnabled(_)) => Err(fail(2, e.to_string())),
                Err(e) => Err(fail(2, e.to_string())),
            }
        }
        Command::Testgen { spec, policy, count } => {
            let s = load(spec, opts, true)?;
            let policy = match policy {
                PolicyArg::Random => Policy::Random,
                PolicyArg::Exhaustive => Policy::Exhaustive,
            };
            let tests = gen_suite(&s, opts.depth, *count, opts.seed, policy);
            let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("tests-out"));
            write_suite(&dir, &tests).map_err(|e| fail(3, e.to_string()))?;
            println!("wrote {} tests to {}", tests.len(), dir.display());
            Ok(0)
        }
        Command::Testrun {
            spec,
            suite,
            connect,
            implementation,
        } => {
            let s = load(spec, opts, true)?;
            let tests = read_suite(suite, &s).map_err(|e| fail(3, e.to_string()))?;
            let timeout = Duration::from_millis(opts.timeout_ms);
            let mut sut: Box<dyn Sut> = match (connect, implementation) {
                (Some(addr), _) => {
                    Box::new(TcpSut::connect(addr.as_str()).map_err(|e| fail(3, format!("{addr}: {e}")))?)
                }
                (None, Some(p)) => {
                    let i = load(p, opts, true)?;
                    Box::new(LtsSut::with_delay(i, opts.seed, emission_delay(opts)))
                }
                (None, None) => return Err(fail(1, "give --connect or --impl")),
            };
            let summary = run_tests(tests, sut.as_mut(), timeout, opts.seed);
            for (k, v) in summary.verdicts.iter().enumerate() {
                println!("test {k:04}: {v}");
            }
            println!(
                "{} run, {} passed, {} failed (seed {})",
                summary.tests_run, summary.passed, summary.failed, summary.seed
            );
            if let Some(e) = summary.exec_error {
                return Err(fail(3, format!("execution error: {e}")));
            }
            Ok(if summary.failed > 0 { EXIT_FAIL } else { 0 })
        }
        Command::Serve { implementation, listen } => {
            let i = load(implementation, opts, true)?;
            if let Err(missing) = is_input_enabled(&i) {
                eprintln!(
                    "warning: implementation refuses {} in state {}",
                    missing.input, missing.state
                );
            }
            let serve_opts = ServeOptions {
                seed: opts.seed,
                emission_delay: emission_delay(opts),
            };
            serve_sut_on(listen.as_str(), i, &serve_opts, |addr| {
                println!("listening on {addr}");
                let _ = std::io::stdout().flush();
            })
            .map_err(|e| fail(3, format!("{listen}: {e}")))?;
            Ok(0)
        }
        Command::Compare { left, right, traces } => {
            let a = load(left, opts, false)?;
            let b = load(right, opts, false)?;
            if opts.stats {
                stats(&a);
                stats(&b);
            }
            let (relation, name) = match traces {
                Some(k) => (Relation::TraceToDepth(*k), format!("trace equivalent up to depth {k}")),
                None => (Relation::StrongBisim, "strongly bisimilar".to_string()),
            };
            let eq = equivalent(&a, &b, relation);
            if eq.equivalent {
                println!("{name}");
                return Ok(0);
            }
            match eq.counterexample {
                Some(Counterexample::Trace(t)) => println!("not {name}: trace {}", format_trace(&t)),
                Some(Counterexample::Split { label }) => println!("not {name}: states differ on {label}"),
                None => println!("not {name}"),
            }
            Ok(EXIT_FAIL)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
