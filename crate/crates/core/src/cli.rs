//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::consistency::sac_nodes;
use crate::driver::{graph_density, labelwise_ilp_fraction, solve, Method, SolverConfig};
use crate::dual::{dual_phase, AscentConfig};
use crate::error::{Error, Result};
use crate::io::{emit_report, BoundReport, Format, ReportDocument};
use crate::model::GraphicalModel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "combilp", version, about = "Exact MAP inference for pairwise graphical models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a model to optimality.
    Solve(SolveArgs),
    /// Run the dual phase only and print the bound after every iteration.
    Bound(BoundArgs),
    /// Print model dimensions and graph density.
    Stats(InputArgs),
    /// Check that a model file parses and is well-formed.
    Validate(InputArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Native,
    UaiLg,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Native => Format::Native,
            FormatArg::UaiLg => Format::UaiLg,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Dclp,
    Clp,
    Bb,
    Brute,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dclp => Method::Dclp,
            MethodArg::Clp => Method::Clp,
            MethodArg::Bb => Method::Bb,
            MethodArg::Brute => Method::Brute,
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "native")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct AscentArgs {
    #[arg(long = "max-iters", default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long = "post-sweeps", default_value_t = 10)]
    post_sweeps: usize,
}

impl AscentArgs {
    fn config(&self) -> AscentConfig {
        AscentConfig {
            max_iterations: self.max_iters,
            lambda: self.lambda,
            postprocess_sweeps: self.post_sweeps,
            ..AscentConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "dclp")]
    method: MethodArg,
    #[command(flatten)]
    ascent: AscentArgs,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Accepted for reproducible scripts; every method is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON statistics document here.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Write the labeling here, one label per node on a single line.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    ascent: AscentArgs,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    stats: Option<PathBuf>,
}

fn load(input: &InputArgs) -> Result<GraphicalModel<f64>> {
    let text = fs::read_to_string(&input.input)?;
    Format::from(input.format).parse(&text)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn run_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let model = load(&args.input)?;
    let config = SolverConfig {
        ascent: args.ascent.config(),
        tolerance: args.tol,
        ..SolverConfig::default()
    };
    let report = solve(&model, args.method.into(), &config)?;
    if let Some(path) = &args.stats {
        write_file(path, &emit_report(&(&report).into()))?;
    }
    writeln!(out, "method {}", report.method)?;
    if report.infeasible {
        writeln!(out, "infeasible")?;
        return Ok(EXIT_INFEASIBLE);
    }
    writeln!(out, "energy {}", report.energy)?;
    writeln!(out, "dual_bound {}", report.dual_bound)?;
    writeln!(out, "optimal {}", report.optimal)?;
    writeln!(out, "ilp_iterations {}", report.iterations.len())?;
    writeln!(out, "labelwise_ilp_fraction {}", report.labelwise_ilp_fraction_final)?;
    if let Some(path) = &args.solution {
        let labels = report.labeling.as_ref().and_then(|x| x.to_vec()).expect("solved run has a full labeling");
        let line: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        write_file(path, &format!("{}\n", line.join(" ")))?;
    }
    Ok(EXIT_OK)
}

fn run_bound(args: &BoundArgs, out: &mut dyn Write) -> Result<i32> {
    let model = load(&args.input)?;
    let density = graph_density(&model);
    let report = match dual_phase(&model, &args.ascent.config()) {
        Ok(dual) => {
            let sac = sac_nodes(&model, &dual.costs, args.tol);
            BoundReport {
                infeasible: false,
                bound_trace: dual.bound_trace,
                density,
                labelwise_ilp_fraction: labelwise_ilp_fraction(&model, &sac.nodes),
            }
        }
        Err(Error::InfeasibleNode(_)) | Err(Error::InfeasibleEdge(_)) => BoundReport {
            infeasible: true,
            bound_trace: Vec::new(),
            density,
            labelwise_ilp_fraction: 1.0,
        },
        Err(e) => return Err(e),
    };
    if let Some(path) = &args.stats {
        write_file(path, &emit_report(&ReportDocument::from(&report)))?;
    }
    if report.infeasible {
        writeln!(out, "infeasible")?;
        return Ok(EXIT_INFEASIBLE);
    }
    for (k, d) in report.bound_trace.iter().enumerate() {
        writeln!(out, "{k} {d}")?;
    }
    Ok(EXIT_OK)
}

fn run_stats(args: &InputArgs, out: &mut dyn Write) -> Result<i32> {
    let model = load(args)?;
    let labels: usize = model.label_counts().iter().sum();
    writeln!(out, "nodes {}", model.node_count())?;
    writeln!(out, "edges {}", model.edge_count())?;
    writeln!(out, "labels {labels}")?;
    writeln!(out, "max_labels {}", model.label_counts().iter().max().copied().unwrap_or(0))?;
    writeln!(out, "density {}", graph_density(&model))?;
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code: 0 on success, 1 for an infeasible model, 2 for bad
/// input or usage.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_INPUT
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => run_solve(a, out),
        Command::Bound(a) => run_bound(a, out),
        Command::Stats(a) => run_stats(a, out),
        Command::Validate(a) => load(a).and_then(|m| {
            writeln!(out, "ok: {} nodes, {} edges", m.node_count(), m.edge_count())?;
            Ok(EXIT_OK)
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}
