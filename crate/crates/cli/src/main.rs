//! `phifix` command line: axioms, verification, solving and demos.
//!
//! Exit codes: 0 success, 1 runtime or verification failure, 2 usage or
//! config error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use phifix::algebra::OrderTolerance;
use phifix::contractions::{check_f_axioms, Verification};
use phifix::demo::{self, DemoOptions};
use phifix::partial::{reduce, solve_partial, verify_corollary_hypothesis};
use phifix::registry::{self, Config};
use phifix::report::{AxiomReport, Verdict};
use phifix::solver::{bound_audit, picard_solve, SolveConfig};
use phifix::Error;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "phifix",
    version,
    about = "Fixed points in C*-algebra valued (partial) metric spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Solver stopping tolerance.
    #[arg(long, global = true, default_value_t = SolveConfig::DEFAULT_TOL)]
    tol: f64,
    /// Relative slack of the order relation.
    #[arg(long, global = true, default_value_t = 1e-9)]
    order_eps: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the axioms of a space (and of its F-function, if any).
    Axioms { input: String },
    /// Sample the contraction or corollary hypothesis.
    Verify { input: String },
    /// Run Picard iteration.
    Solve { input: String },
    /// Run a built-in example end to end.
    Demo { id: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Structured,
    Csv,
}

/// A finished command: text to emit and whether it counts as success.
struct Outcome {
    text: String,
    ok: bool,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_)
            | Error::InvalidConstants(_)
            | Error::InvalidTolerance(_)
            | Error::Unknown { .. } => Failure::Usage(e.to_string()),
            e => Failure::Runtime(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli, &out.text) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!(
                "{}",
                json!({ "error": e.to_string(), "detail": format!("{e:?}") })
            );
            ExitCode::from(1)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn options(cli: &Cli) -> Result<DemoOptions, Failure> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(Failure::Usage(format!(
            "--tol must be positive, got {}",
            cli.tol
        )));
    }
    Ok(DemoOptions {
        seed: cli.seed,
        samples: cli.samples as usize,
        tol: cli.tol,
        order: OrderTolerance::new(cli.order_eps)?,
    })
}

/// A demo id or a path to a config file.
fn load(input: &str) -> Result<Config, Failure> {
    if let Some(c) = demo::config_for(input) {
        return Ok(c);
    }
    let text = std::fs::read_to_string(input).map_err(|e| {
        Failure::Usage(format!(
            "cannot read `{input}`: {e} (demo ids: {})",
            demo::DEMO_IDS.join(", ")
        ))
    })?;
    Ok(Config::parse(&text)?)
}

fn structured<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn no_csv(cli: &Cli, what: &str) -> Result<(), Failure> {
    if cli.format == Format::Csv {
        return Err(Failure::Usage(format!(
            "csv output is not available for {what}"
        )));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let opts = options(cli)?;
    match &cli.command {
        Command::Axioms { input } => axioms(cli, &opts, &load(input)?),
        Command::Verify { input } => verify(cli, &opts, &load(input)?),
        Command::Solve { input } => solve(cli, &opts, &load(input)?),
        Command::Demo { id } => {
            no_csv(cli, "demo")?;
            let report = demo::run_demo(id, &opts).map_err(|e| match e {
                Error::Unknown { .. } => {
                    Failure::Usage(format!("{e}\nregistered demos:\n{}", demo::listing()))
                }
                e => e.into(),
            })?;
            let text = match cli.format {
                Format::Structured => structured(&report),
                _ => report.to_human(),
            };
            Ok(Outcome {
                text,
                ok: report.all_match,
            })
        }
    }
}

fn axioms(cli: &Cli, opts: &DemoOptions, config: &Config) -> Result<Outcome, Failure> {
    let space = config.space()?;
    let mut reports = vec![demo::space_axioms(&space.distance, &space.domain, opts)];
    if let Some(f) = config.f_function()? {
        reports.push(check_f_axioms(
            &f,
            space.distance.shape(),
            opts.samples,
            opts.seed,
            opts.order,
        ));
    }
    let text = match cli.format {
        Format::Structured => structured(&reports),
        Format::Csv => {
            let mut s = String::from("subject,axiom,verdict,samples_used\n");
            for r in &reports {
                for e in &r.entries {
                    let _ = writeln!(
                        s,
                        "{},{},{},{}",
                        r.subject,
                        e.axiom,
                        verdict_word(e.verdict),
                        e.samples_used
                    );
                }
            }
            s
        }
        Format::Human => reports.iter().map(human_axioms).collect(),
    };
    Ok(Outcome { text, ok: true })
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn human_axioms(r: &AxiomReport) -> String {
    let mut s = format!(
        "{} (seed {}, {} samples)\n",
        r.subject, r.seed, r.sample_count
    );
    for e in &r.entries {
        let _ = write!(s, "  {:<6} {}", verdict_word(e.verdict), e.axiom);
        if let Some(w) = &e.witness {
            let pts: Vec<String> = w.points.iter().map(|p| p.to_string()).collect();
            let _ = write!(
                s,
                "  witness [{}] {} = {}",
                pts.join(", "),
                w.detail,
                w.element
            );
        }
        s.push('\n');
    }
    s
}

fn verify(cli: &Cli, opts: &DemoOptions, config: &Config) -> Result<Outcome, Failure> {
    no_csv(cli, "verify")?;
    let v = match config {
        Config::Problem(pc) => pc.build()?.0.verify(opts.samples, opts.seed, opts.order)?,
        Config::Partial(pc) => {
            verify_corollary_hypothesis(&pc.build()?.0, opts.samples, opts.seed, opts.order)?
        }
        Config::Axioms(_) => {
            return Err(Failure::Usage(
                "verify needs a contraction or corollary".into(),
            ))
        }
    };
    let text = match cli.format {
        Format::Structured => structured(&v),
        _ => match &v {
            Verification::Certificate(c) => format!(
                "{}: certified, no counterexample in {} samples (seed {}), max slack {:e}\n",
                c.inequality, c.sample_count, c.seed, c.max_slack_norm
            ),
            Verification::Counterexample(c) => {
                let pts: Vec<String> = c.points.iter().map(|p| p.to_string()).collect();
                let mut s = format!(
                    "{}: counterexample at sample {} [{}]",
                    c.inequality,
                    c.sample_index,
                    pts.join(", ")
                );
                if let (Some(l), Some(r)) = (&c.lhs, &c.rhs) {
                    let _ = write!(s, "\n  lhs = {l}\n  rhs = {r}");
                }
                s.push('\n');
                s
            }
        },
    };
    Ok(Outcome {
        ok: v.is_certificate(),
        text,
    })
}

fn solve(cli: &Cli, opts: &DemoOptions, config: &Config) -> Result<Outcome, Failure> {
    match config {
        Config::Problem(pc) => {
            let (problem, x0) = pc.build()?;
            let cert = picard_solve(&problem, &SolveConfig::new(x0).with_tol(opts.tol))?;
            let audit = bound_audit(&cert, &problem.distance);
            let text = match cli.format {
                Format::Csv => cert.to_csv(),
                Format::Structured => structured(&json!({ "certificate": cert, "bound_audit": audit })),
                Format::Human => format!(
                    "z = {} after {} iterations ({:?})\n  |d(z, Tz)| = {:e}\n  |phi(z)| = {:e}\n  converged: {}\n  bound audit: {}\n",
                    cert.z,
                    cert.iterations,
                    cert.stop,
                    cert.residual_fixed,
                    cert.residual_phi,
                    cert.converged,
                    if audit.passes { "pass" } else { "fail" }
                ),
            };
            Ok(Outcome {
                ok: cert.converged,
                text,
            })
        }
        Config::Partial(pc) => {
            let (problem, x0) = pc.build()?;
            let sol = solve_partial(&problem, &SolveConfig::new(x0).with_tol(opts.tol))?;
            let audit = bound_audit(&sol.certificate, &reduce(&problem).distance);
            let text = match cli.format {
                Format::Csv => sol.certificate.to_csv(),
                Format::Structured => structured(&json!({ "solution": sol, "bound_audit": audit })),
                Format::Human => format!(
                    "u = {} after {} iterations\n  |p(u, u)| = {:e}\n  certified: {}\n",
                    sol.certificate.z, sol.certificate.iterations, sol.self_distance, sol.certified
                ),
            };
            Ok(Outcome {
                ok: sol.certified,
                text,
            })
        }
        Config::Axioms(_) => Err(Failure::Usage(format!(
            "solve needs an operator and a contraction\n{}",
            registry::listing()
        ))),
    }
}
