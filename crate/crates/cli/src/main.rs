use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;

use flowsat::egraph::{EGraph, Limits, SaturationReport};
use flowsat::interp::{UdfRegistry, Verdict};
use flowsat::optimize::{optimize_program, random_check, OptimizeConfig, Optimized};
use flowsat::{CostModel, ProgramFile};

const EXIT_LIMIT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "flowsat",
    version,
    about = "Equality-saturation optimizer for stateful dataflow terms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a program and print the result.
    Optimize {
        /// Program file, or `-` for stdin.
        file: PathBuf,
        #[command(flatten)]
        sat: SatArgs,
        #[command(flatten)]
        trace: TraceArgs,
        /// Size threshold for hoisting repeated subterms into defs.
        #[arg(long, default_value_t = 2)]
        cse_min_size: usize,
        /// Check the result against the input on N random traces.
        #[arg(long, value_name = "N", default_value_t = 0)]
        check: usize,
        /// Treat hitting a saturation limit as an error.
        #[arg(long)]
        strict: bool,
        /// Write the optimized program here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare two programs on random traces.
    Check {
        left: PathBuf,
        right: PathBuf,
        /// Number of random traces.
        #[arg(long, visible_alias = "check", value_name = "N", default_value_t = 10)]
        traces: usize,
        #[command(flatten)]
        trace: TraceArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Saturate a program and print the e-graph and report.
    Dump {
        file: PathBuf,
        #[command(flatten)]
        sat: SatArgs,
        /// Keep only rules whose names start with one of these prefixes.
        #[arg(long, value_name = "PREFIX")]
        only: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct SatArgs {
    /// Rule sets: core, join, unary, diamond, all or none.
    #[arg(long, value_delimiter = ',', default_value = "core")]
    rules: Vec<String>,
    #[arg(long, default_value_t = Limits::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value_t = Limits::default().max_nodes)]
    max_nodes: usize,
    #[arg(long, default_value_t = Limits::default().max_millis)]
    max_millis: u64,
    /// Operator weight override, e.g. `persist=1`.
    #[arg(long, value_name = "OP=N")]
    weight: Vec<String>,
    /// File of `op = weight` lines, applied before `--weight`.
    #[arg(long, value_name = "PATH")]
    weights_file: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long, default_value_t = 10)]
    ticks: usize,
    #[arg(long, env = "FLOWSAT_SEED", default_value_t = 0)]
    seed: u64,
    /// Largest batch per source per tick.
    #[arg(long, default_value_t = 3)]
    batch_max: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Lines,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        msg: msg.to_string(),
    }
}

fn read_program(path: &Path) -> Result<ProgramFile, Failure> {
    let text = if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin()).map_err(|e| usage(format!("stdin: {e}")))?
    } else {
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?
    };
    ProgramFile::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl SatArgs {
    fn limits(&self) -> Result<Limits, Failure> {
        if self.max_iters == 0 || self.max_nodes == 0 || self.max_millis == 0 {
            return Err(usage("saturation limits must be positive"));
        }
        Ok(Limits {
            max_iters: self.max_iters,
            max_nodes: self.max_nodes,
            max_millis: self.max_millis,
        })
    }

    fn cost_model(&self) -> Result<CostModel, Failure> {
        let mut m = CostModel::default();
        if let Some(path) = &self.weights_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            m.apply_config(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
        }
        for w in &self.weight {
            m.apply_override(w)
                .map_err(|e| usage(format!("--weight {w}: {e}")))?;
        }
        Ok(m)
    }
}

fn verdict_lines(verdicts: &[Verdict], seed: u64, format: Format, out: &mut String) -> usize {
    let mut passed = 0;
    for (i, v) in verdicts.iter().enumerate() {
        let s = seed.wrapping_add(i as u64);
        match (v, format) {
            (Verdict::Equivalent, Format::Text) => {
                writeln!(out, "trace {i} (seed {s}): equivalent")
            }
            (Verdict::Equivalent, Format::Lines) => writeln!(out, "trace.{i}=equivalent"),
            (Verdict::Diverged(d), Format::Text) => {
                writeln!(out, "trace {i} (seed {s}): diverged at {d}")
            }
            (Verdict::Diverged(d), Format::Lines) => {
                writeln!(out, "trace.{i}=diverged tick={} sink={}", d.tick, d.sink)
            }
        }
        .unwrap();
        passed += usize::from(v.is_equivalent());
    }
    passed
}

/// Rounds away float noise from summing fractional weights.
fn cost(c: f64) -> f64 {
    (c * 1e6).round() / 1e6
}

fn optimize_report(o: &Optimized, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Text => {
            for (name, s) in &o.sinks {
                writeln!(
                    out,
                    "sink {name}: cost {} -> {}",
                    cost(s.cost_before),
                    cost(s.cost_after)
                )
                .unwrap();
            }
            let r = &o.report;
            writeln!(
                out,
                "saturation: {} iterations, {} e-nodes, {} e-classes, stopped: {} ({} ms)",
                r.iterations,
                r.nodes,
                r.classes,
                r.stop_reason,
                r.elapsed.as_millis()
            )
            .unwrap();
        }
        Format::Lines => {
            for (name, s) in &o.sinks {
                writeln!(out, "sink.{name}.cost_before={}", cost(s.cost_before)).unwrap();
                writeln!(out, "sink.{name}.cost_after={}", cost(s.cost_after)).unwrap();
            }
            writeln!(out, "cost_before={}", cost(o.cost_before())).unwrap();
            writeln!(out, "cost_after={}", cost(o.cost_after())).unwrap();
            out.push_str(&o.report.to_string());
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_optimize(
    file: &Path,
    sat: &SatArgs,
    trace: &TraceArgs,
    cse_min_size: usize,
    check: usize,
    strict: bool,
    output: Option<&Path>,
    format: Format,
) -> Result<(), Failure> {
    let input = read_program(file)?;
    let cfg = OptimizeConfig {
        rule_sets: sat.rules.clone(),
        limits: sat.limits()?,
        cost: sat.cost_model()?,
        cse_min_size,
        check_traces: check,
        ticks: trace.ticks,
        seed: trace.seed,
        batch_max: trace.batch_max,
    };
    let o = optimize_program(&input, &cfg).map_err(usage)?;
    let program = o.program.to_string();
    match output {
        Some(path) => {
            std::fs::write(path, &program).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => print!("{program}"),
    }
    eprint!("{}", optimize_report(&o, format));

    if o.hit_limit() {
        let msg = format!("saturation stopped early: {}", o.report.stop_reason);
        if strict {
            return Err(Failure {
                code: EXIT_LIMIT,
                msg,
            });
        }
        eprintln!("warning: {msg}");
    }

    if cfg.check_traces > 0 {
        let udfs = UdfRegistry::standard();
        let verdicts = random_check(
            &input,
            &o.program,
            cfg.check_traces,
            cfg.ticks,
            cfg.seed,
            cfg.batch_max,
            &udfs,
        )
        .map_err(usage)?;
        let mut out = String::new();
        let passed = verdict_lines(&verdicts, cfg.seed, format, &mut out);
        eprint!("{out}");
        if passed < verdicts.len() {
            return Err(Failure {
                code: EXIT_DIVERGED,
                msg: format!(
                    "check failed: {passed}/{} traces equivalent",
                    verdicts.len()
                ),
            });
        }
    }
    Ok(())
}

fn cmd_check(
    left: &Path,
    right: &Path,
    traces: usize,
    trace: &TraceArgs,
    format: Format,
) -> Result<(), Failure> {
    if trace.ticks == 0 {
        return Err(usage("--ticks must be positive"));
    }
    let a = read_program(left)?;
    let b = read_program(right)?;
    let udfs = UdfRegistry::standard();
    let verdicts = random_check(
        &a,
        &b,
        traces,
        trace.ticks,
        trace.seed,
        trace.batch_max,
        &udfs,
    )
    .map_err(usage)?;
    let mut out = String::new();
    let passed = verdict_lines(&verdicts, trace.seed, format, &mut out);
    match format {
        Format::Text => writeln!(out, "{passed}/{} traces equivalent", verdicts.len()),
        Format::Lines => writeln!(out, "equivalent={passed}\ntraces={}", verdicts.len()),
    }
    .unwrap();
    print!("{out}");
    if passed < verdicts.len() {
        return Err(Failure {
            code: EXIT_DIVERGED,
            msg: "programs diverge".into(),
        });
    }
    Ok(())
}

fn cmd_dump(file: &Path, sat: &SatArgs, only: &[String], format: Format) -> Result<(), Failure> {
    let input = read_program(file)?;
    let limits = sat.limits()?;
    let cfg = OptimizeConfig {
        rule_sets: sat.rules.clone(),
        ..OptimizeConfig::default()
    };
    let mut rules = cfg.rules().map_err(usage)?;
    if !only.is_empty() {
        let prefixes: Vec<&str> = only.iter().map(String::as_str).collect();
        rules = rules.only(&prefixes);
    }
    let mut g = EGraph::new();
    let roots: IndexMap<String, _> = input
        .flatten()
        .into_iter()
        .map(|(name, t)| (name, g.add(&t)))
        .collect();
    let report: SaturationReport = g.saturate(&rules.rules, &limits);
    let mut out = String::new();
    for (name, id) in &roots {
        match format {
            Format::Text => writeln!(out, "(root {name} {})", g.find(*id)),
            Format::Lines => writeln!(out, "root.{name}={}", g.find(*id)),
        }
        .unwrap();
    }
    out.push_str(&g.dump());
    print!("{out}");
    eprint!("{report}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Optimize {
            file,
            sat,
            trace,
            cse_min_size,
            check,
            strict,
            output,
            format,
        } => cmd_optimize(
            file,
            sat,
            trace,
            *cse_min_size,
            *check,
            *strict,
            output.as_deref(),
            *format,
        ),
        Command::Check {
            left,
            right,
            traces,
            trace,
            format,
        } => cmd_check(left, right, *traces, trace, *format),
        Command::Dump {
            file,
            sat,
            only,
            format,
        } => cmd_dump(file, sat, only, *format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
