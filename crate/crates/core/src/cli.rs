//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{rational_string, AlgebraError, Monomial, ProbAssignment};
use crate::geometry::GeometryError;
use crate::infer::{
    analyze_detailed, solve_i1, solve_i2, AnalysisConfig, AnalysisReport, InferError, ReportFile, RELATIVE_NOTE,
};
use crate::lang::{check_ground, enumerate_trajectories, parse, ParseError, Program, ReduceError, TypeError};
use crate::typesys::{derivation_json, SearchConfig, SearchError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "tropinf", version, about = "Most likely reductions of parametric probabilistic PCF programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Numeral whose reductions are analyzed (default 1); filters the listing of `enumerate`.
    #[arg(long, global = true)]
    pub target: Option<u64>,
    /// Rounds with an unchanged polynomial needed to call the search stable.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub window: u64,
    #[arg(long, global = true, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_rounds: u64,
    /// Step budget of the reduction oracle.
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub oracle_budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Output::Text)]
    pub output: Output,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and type-check a program.
    Check { file: PathBuf },
    /// List the reductions of a program up to a step budget.
    Enumerate {
        file: PathBuf,
        /// Step budget; defaults to the oracle budget.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Compute the minimal polynomial, trace words and normal cones.
    Analyze {
        file: PathBuf,
        /// Also write the final derivation as JSON to this path.
        #[arg(long)]
        derivation: Option<PathBuf>,
    },
    /// Most likely trajectory under the given probabilities.
    I1 {
        file: PathBuf,
        /// Comma separated probabilities, as decimals or fractions.
        #[arg(long)]
        probs: String,
    },
    /// Parameter region where a trajectory is most likely.
    I2 {
        file: PathBuf,
        /// Exponent vector of the trajectory, e.g. `0,3`.
        #[arg(long)]
        traj: String,
        /// Also test whether these probabilities lie in the region.
        #[arg(long)]
        probs: Option<String>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{0}", path = .1)]
    Parse(ParseError, String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 for problems with the input, 2 for violated internal invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Reduce(ReduceError::Stuck(_)) => 2,
            CliError::Infer(InferError::Search(SearchError::Schema { .. })) => 2,
            CliError::Infer(InferError::Geometry(GeometryError::DimensionMismatch(..))) => 2,
            _ => 1,
        }
    }
}

fn load(path: &PathBuf) -> Result<(Program, String), CliError> {
    let source =
        std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    let prog = parse(&source).map_err(|e| CliError::Parse(e, path.display().to_string()))?;
    Ok((prog, source))
}

fn target(cli: &Cli) -> u64 {
    cli.target.unwrap_or(1)
}

fn config(cli: &Cli) -> AnalysisConfig {
    AnalysisConfig {
        window: cli.window as usize,
        max_rounds: cli.max_rounds as usize,
        search: SearchConfig { replay_steps: cli.oracle_budget as usize, ..SearchConfig::default() },
    }
}

fn parse_monomial(text: &str, params: u32) -> Result<Monomial, CliError> {
    let exps = text
        .split(',')
        .map(|s| s.trim().parse::<u32>())
        .collect::<Result<Vec<u32>, _>>()
        .map_err(|_| CliError::Usage(format!("bad exponent vector `{text}`")))?;
    if exps.len() != 2 * params as usize {
        return Err(CliError::Usage(format!(
            "exponent vector `{text}` has {} entries, expected {}",
            exps.len(),
            2 * params
        )));
    }
    Ok(Monomial::new(exps))
}

fn f64_json(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("inf")
    }
}

fn write_json(out: &mut dyn Write, v: &impl serde::Serialize) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("serializable output"))
}

fn warn_report(err: &mut dyn Write, report: &AnalysisReport) -> std::io::Result<()> {
    if report.selected.is_empty() {
        writeln!(err, "warning: no reduction to {} found within the explored bounds", report.target)?;
    }
    if !report.stable {
        writeln!(err, "warning: the polynomial did not stabilize; answers are {RELATIVE_NOTE}")?;
    }
    Ok(())
}

fn print_report(out: &mut dyn Write, report: &AnalysisReport) -> std::io::Result<()> {
    writeln!(out, "target: {}", report.target)?;
    writeln!(out, "polynomial: {}", report.polynomial)?;
    writeln!(out, "degree estimate: {}", report.degree_estimate)?;
    let rounds: Vec<String> = report.schedule.iter().map(|b| format!("({},{})", b.n, b.p)).collect();
    let status = match (report.stable, report.exhausted) {
        (true, _) => "stable".to_string(),
        (false, Some(b)) => format!("not stable (budget exhausted at n={}, p={}), {RELATIVE_NOTE},", b.n, b.p),
        (false, None) => format!("not stable, {RELATIVE_NOTE},"),
    };
    writeln!(out, "status: {status} after rounds {}", rounds.join(" "))?;
    for s in &report.selected {
        writeln!(out, "trajectory {}  word {}", s.monomial, s.word)?;
        let ineqs = s.cone.system.inequalities();
        if ineqs.is_empty() {
            writeln!(out, "  always most likely")?;
        }
        for row in ineqs {
            writeln!(out, "  {row}")?;
        }
    }
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io { path: "<output>".into(), source: e };
    match &cli.command {
        Command::Check { file } => {
            let (prog, _) = load(file)?;
            let typing = check_ground(&prog.term)?;
            match cli.output {
                Output::Text => writeln!(out, "{}", typing.ty).map_err(io)?,
                Output::Json => write_json(out, &json!({ "type": typing.ty.to_string(), "params": prog.params })).map_err(io)?,
            }
        }
        Command::Enumerate { file, budget } => {
            let (prog, _) = load(file)?;
            check_ground(&prog.term)?;
            let budget = budget.unwrap_or(cli.oracle_budget) as usize;
            let mut trajs = enumerate_trajectories(&prog.term, prog.params, budget)?;
            let open = trajs.iter().filter(|t| !t.is_terminated()).count();
            trajs.retain(|t| t.is_terminated() && cli.target.is_none_or(|v| t.value() == Some(v)));
            trajs.sort_by(|a, b| a.monomial.degree().cmp(&b.monomial.degree()).then_with(|| a.word.cmp(&b.word)));
            match cli.output {
                Output::Text => {
                    for t in &trajs {
                        let nf = t.normal_form.as_ref().map(|n| n.to_string()).unwrap_or_default();
                        writeln!(out, "{}  {}  -> {}", t.monomial, t.word, nf).map_err(io)?;
                    }
                    if open > 0 {
                        writeln!(out, "truncated: {open} path(s) still running after {budget} steps").map_err(io)?;
                    }
                }
                Output::Json => {
                    let rows: Vec<Value> = trajs
                        .iter()
                        .map(|t| json!({ "monomial": t.monomial, "word": t.word, "value": t.value(), "steps": t.steps }))
                        .collect();
                    write_json(out, &json!({ "trajectories": rows, "truncated": open, "budget": budget })).map_err(io)?;
                }
            }
        }
        Command::Analyze { file, derivation } => {
            let (prog, source) = load(file)?;
            let (report, st) = analyze_detailed(&prog, target(cli), &config(cli))?;
            if let Some(path) = derivation {
                let text = serde_json::to_string_pretty(&derivation_json(&st.result.derivation)).expect("json");
                std::fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
            }
            warn_report(err, &report).map_err(io)?;
            match cli.output {
                Output::Text => print_report(out, &report).map_err(io)?,
                Output::Json => write_json(out, &ReportFile::new(report, &source)).map_err(io)?,
            }
        }
        Command::I1 { file, probs } => {
            let (prog, _) = load(file)?;
            let p = ProbAssignment::parse(probs)?;
            if p.params() != prog.params as usize {
                return Err(CliError::Usage(format!("expected {} probabilities, got {}", prog.params, p.params())));
            }
            let (report, _) = analyze_detailed(&prog, target(cli), &config(cli))?;
            warn_report(err, &report).map_err(io)?;
            let a = solve_i1(&report, &p)?;
            match cli.output {
                Output::Text => {
                    writeln!(out, "value: {}", a.value).map_err(io)?;
                    writeln!(out, "probability: {}", rational_string(&a.probability)).map_err(io)?;
                    for w in &a.winners {
                        writeln!(out, "winner: {}  word {}", w.monomial, w.word).map_err(io)?;
                    }
                    if a.relative {
                        writeln!(out, "note: {RELATIVE_NOTE}").map_err(io)?;
                    }
                }
                Output::Json => write_json(
                    out,
                    &json!({
                        "value": f64_json(a.value),
                        "probability": rational_string(&a.probability),
                        "winners": a.winners,
                        "relative": a.relative,
                    }),
                )
                .map_err(io)?,
            }
        }
        Command::I2 { file, traj, probs } => {
            let (prog, _) = load(file)?;
            let mu = parse_monomial(traj, prog.params)?;
            let probs = probs.as_deref().map(ProbAssignment::parse).transpose()?;
            let (report, _) = analyze_detailed(&prog, target(cli), &config(cli))?;
            warn_report(err, &report).map_err(io)?;
            let a = solve_i2(&report, &mu)?;
            let member = match &probs {
                Some(p) if p.params() != prog.params as usize => {
                    return Err(CliError::Usage(format!("expected {} probabilities, got {}", prog.params, p.params())))
                }
                Some(p) => Some(a.test(p)),
                None => None,
            };
            let witness: Option<Vec<String>> = a.witness().map(|w| w.iter().map(rational_string).collect());
            match cli.output {
                Output::Text => {
                    writeln!(out, "trajectory {}  word {}", a.selected.monomial, a.selected.word).map_err(io)?;
                    let ineqs = a.inequalities();
                    if ineqs.is_empty() {
                        writeln!(out, "always most likely").map_err(io)?;
                    }
                    for row in ineqs {
                        writeln!(out, "{row}").map_err(io)?;
                    }
                    if let Some(w) = &witness {
                        writeln!(out, "witness: ({})", w.join(", ")).map_err(io)?;
                    }
                    if let Some(m) = member {
                        writeln!(out, "probabilities in region: {}", if m { "yes" } else { "no" }).map_err(io)?;
                    }
                    if a.relative {
                        writeln!(out, "note: {RELATIVE_NOTE}").map_err(io)?;
                    }
                }
                Output::Json => write_json(
                    out,
                    &json!({
                        "monomial": a.selected.monomial,
                        "word": a.selected.word,
                        "inequalities": a.inequalities(),
                        "cone": a.cone,
                        "witness": witness,
                        "strict": a.selected.cone.strict,
                        "member": member,
                        "relative": a.relative,
                    }),
                )
                .map_err(io)?,
            }
        }
    }
    Ok(())
}

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{}", e.render());
            } else {
                let _ = write!(err, "{}", e.render());
            }
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}
