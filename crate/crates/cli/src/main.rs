use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jrp_cli::bench::{self, BenchmarkParams};
use jrp_cli::format::{self, FormatError};
use jrp_core::generate::{self, GeneratorParams};
use jrp_core::heuristics;
use jrp_core::model::{JrpInstance, PriorityMode};
use jrp_core::pipeline::{self, PipelineReport};
use jrp_core::qubo;
use jrp_core::solvers::{SolverConfig, SolverKind};

/// Reassigns agents from low-priority jobs to vacant high-priority ones by
/// minimizing a QUBO cost function, band by band.
#[derive(Parser)]
#[command(name = "jrp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and print the reassignment report.
    Solve(SolveArgs),
    /// Write a random instance file.
    Generate(GenerateArgs),
    /// Sweep instance sizes and band counts; print and optionally save a table.
    Benchmark(BenchmarkArgs),
    /// Write the pruned full-problem QUBO as a plain coefficient file.
    QuboExport(ExportArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// Minimizer for each subproblem. Solve and export default to exact,
    /// benchmark to anneal.
    #[arg(long, value_enum)]
    solver: Option<SolverChoice>,
    /// Metropolis sweeps per annealing restart.
    #[arg(long)]
    sweeps: Option<u32>,
    /// Annealing restarts.
    #[arg(long)]
    restarts: Option<u32>,
    /// Variable cap for the exhaustive solver.
    #[arg(long)]
    max_exact_vars: Option<usize>,
    /// Seed for all randomized steps.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverChoice {
    Exact,
    Anneal,
}

impl SolverArgs {
    fn config(&self, default: SolverChoice) -> SolverConfig {
        let mut config = SolverConfig {
            kind: match self.solver.unwrap_or(default) {
                SolverChoice::Exact => SolverKind::Exact,
                SolverChoice::Anneal => SolverKind::Anneal,
            },
            seed: self.seed,
            ..SolverConfig::default()
        };
        if let Some(sweeps) = self.sweeps {
            config.sweeps = sweeps;
        }
        if let Some(restarts) = self.restarts {
            config.restarts = restarts;
        }
        if let Some(cap) = self.max_exact_vars {
            config.max_exact_vars = cap;
        }
        config
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file to solve.
    #[arg(long)]
    instance: PathBuf,
    /// Number of priority bands. Defaults to one band per distinct vacant
    /// priority (discrete instances) or a single band (continuous).
    #[arg(long)]
    bands: Option<usize>,
    /// Solve the whole pruned problem as one QUBO: no segmentation, no
    /// vacancy rollover.
    #[arg(long)]
    full: bool,
    /// Write the full report as JSON to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct GenerateArgs {
    /// Total number of jobs K; round(p*K) become vacant.
    #[arg(long)]
    total_jobs: usize,
    /// Fraction p of jobs that are vacant, in (0, 1).
    #[arg(long)]
    vacancy_fraction: f64,
    /// Priority layout of the generated jobs.
    #[arg(long, value_enum, default_value_t = ModeChoice::Continuous)]
    mode: ModeChoice,
    /// Number of equispaced priority values in discrete mode.
    #[arg(long, default_value_t = 4)]
    levels: u32,
    /// Largest historical count drawn for any (job, agent) pair.
    #[arg(long, default_value_t = 3)]
    max_count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the instance here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeChoice {
    Continuous,
    Discrete,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Total job counts K to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [8usize, 12, 16])]
    sizes: Vec<usize>,
    /// Band counts D to sweep.
    #[arg(long = "bands-list", value_delimiter = ',', default_values_t = [1usize, 2, 4])]
    bands_list: Vec<usize>,
    #[arg(long, default_value_t = 0.4)]
    vacancy_fraction: f64,
    /// Instances per (K, D) cell.
    #[arg(long, default_value_t = 20)]
    reps: u32,
    /// Write the table as CSV to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ExportArgs {
    /// Instance file to build the QUBO from.
    #[arg(long)]
    instance: PathBuf,
    /// Write the coefficient file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with the process exit code it maps to: 2 for input problems,
/// 3 for solver capacity, 4 for internal invariant violations.
struct CliError {
    code: u8,
    message: String,
}

impl From<jrp_core::Error> for CliError {
    fn from(e: jrp_core::Error) -> Self {
        use jrp_core::Error::*;
        let code = match e {
            Validation(_) | UnknownJob(_) | Parameter(_) => 2,
            Capacity { .. } => 3,
            DuplicateVariable(_, _) | LengthMismatch { .. } | InfeasibleMoves(_) | Internal(_) => 4,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError {
            code: 2,
            message: e.to_string(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::QuboExport(args) => cmd_qubo_export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load_instance(path: &Path) -> Result<JrpInstance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    format::parse_instance(&text).map_err(|e| CliError {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let instance = load_instance(&args.instance)?;
    let config = args.solver.config(SolverChoice::Exact);

    let (report, bands) = if args.full {
        (pipeline::run_full(&instance, &config)?, 1)
    } else {
        let bands = args
            .bands
            .unwrap_or_else(|| heuristics::default_band_count(&instance).max(1));
        (pipeline::run(&instance, bands, &config)?, bands)
    };

    print_summary(&instance, &report, bands, args.full);

    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        fs::write(path, json).map_err(|e| io_error(path, e))?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn print_summary(instance: &JrpInstance, report: &PipelineReport, bands: usize, full: bool) {
    println!(
        "instance: {} assigned, {} vacant ({} priorities)",
        instance.num_assigned(),
        instance.num_vacant(),
        match instance.priority_mode() {
            PriorityMode::Discrete => "discrete",
            PriorityMode::Continuous => "continuous",
        }
    );
    if full {
        println!("mode: full problem, no segmentation");
    } else {
        println!("mode: {bands} priority band(s)");
    }
    println!();
    println!("band  vacants  agents  vars  pruned  energy      moves");
    for b in &report.bands {
        println!(
            "{:>4}  {:>7}  {:>6}  {:>4}  {:>6}  {:>10}  {:>5}{}",
            b.band,
            b.vacants_considered,
            b.agents_considered,
            b.variables,
            b.pruned_nonpositive_score + b.pruned_nonpositive_gain,
            b.solver_energy
                .map_or_else(|| "-".to_owned(), |e| format!("{e:.4}")),
            b.moves_applied,
            if b.repaired { "  (repaired)" } else { "" },
        );
    }
    println!();
    if report.moves.is_empty() {
        println!("no reassignments; the current allocation stands");
    } else {
        println!("reassignments:");
        for m in &report.moves {
            println!(
                "  band {}: agent {} leaves {} for {}  (score {:.4}, priority gain {:.4})",
                m.band, m.agent, m.vacated, m.vacant, m.score, m.priority_gain
            );
        }
    }
    println!();
    println!("final assignment:");
    for a in &report.final_assigned {
        println!("  {}  <-  {}", a.job, a.agent);
    }
    if !report.final_unfilled.is_empty() {
        let jobs: Vec<&str> = report.final_unfilled.iter().map(|j| j.as_str()).collect();
        println!("unfilled: {}", jobs.join(", "));
    }
    if !report.dropped_vacants.is_empty() {
        let jobs: Vec<&str> = report.dropped_vacants.iter().map(|j| j.as_str()).collect();
        println!("dropped vacancies (no later band could retry them): {}", jobs.join(", "));
    }
    println!();
    println!(
        "alpha: {:.4}   total variables: {}   total applied score: {:.4}",
        report.alpha_estimate, report.total_variables, report.total_score
    );
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let instance = generate::generate(&GeneratorParams {
        total_jobs: args.total_jobs,
        vacancy_fraction: args.vacancy_fraction,
        priority_levels: args.levels,
        priority_mode: match args.mode {
            ModeChoice::Continuous => PriorityMode::Continuous,
            ModeChoice::Discrete => PriorityMode::Discrete,
        },
        affinity_count_max: args.max_count,
        seed: args.seed,
    })?;
    let text = format::render_instance(&instance);
    match &args.out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| io_error(path, e))?;
            eprintln!(
                "wrote {} assigned and {} vacant jobs to {}",
                instance.num_assigned(),
                instance.num_vacant(),
                path.display()
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<(), CliError> {
    // Full problems at benchmark sizes usually exceed the exhaustive budget,
    // so annealing is the default here.
    let solver = args.solver.config(SolverChoice::Anneal);
    let params = BenchmarkParams {
        sizes: args.sizes,
        band_counts: args.bands_list,
        vacancy_fraction: args.vacancy_fraction,
        reps: args.reps,
        seed: args.solver.seed,
        solver,
        ..BenchmarkParams::default()
    };
    let rows = bench::run_benchmark(&params)?;
    let csv = bench::render_csv(&rows);
    print!("{csv}");
    if let Some(path) = &args.out {
        fs::write(path, &csv).map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

fn cmd_qubo_export(args: ExportArgs) -> Result<(), CliError> {
    let instance = load_instance(&args.instance)?;
    let candidates =
        heuristics::enumerate_candidates(&instance, instance.vacants(), instance.assigned())?;
    let lambda = qubo::default_penalty(candidates.pairs.iter().map(|c| c.score));
    let variables: Vec<_> = candidates
        .pairs
        .iter()
        .map(|c| (c.vacant.clone(), c.agent_job.clone()))
        .collect();
    let problem = qubo::build_qubo(&instance, &variables, lambda, lambda)?;
    let mut buffer = Vec::new();
    problem
        .write_coefficients(&mut buffer)
        .expect("writing to memory cannot fail");
    match &args.out {
        Some(path) => {
            fs::write(path, &buffer).map_err(|e| io_error(path, e))?;
            eprintln!(
                "wrote {} variables ({} quadratic terms) to {}",
                problem.num_vars(),
                problem.quadratic().len(),
                path.display()
            );
        }
        None => print!("{}", String::from_utf8_lossy(&buffer)),
    }
    Ok(())
}
