//! `logrecon`: command-line harness for the reconciliation solvers.
//!
//! Exit codes: 0 success, 1 `check` found violations, 2 input error,
//! 3 optimality not proved within the limits while `--prove` was demanded,
//! 4 internal invariant failure.

mod bench;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logrecon::cp::{branch_and_bound, CpConfig};
use logrecon::gen::{generate, GenSpec};
use logrecon::ls::{self, LsMode, LsParams, DEFAULT_TABU_MAX};
use logrecon::oracle;
use logrecon::satenc::{self, CnfFormula, ReductionMap};
use logrecon::{check_schedule, objective, Problem, Schedule};
use serde::Serialize;
use serde_json::json;

use crate::bench::{BenchConfig, BenchError, Method};
use crate::report::{
    parse_schedule, schedule_entries, schedule_lines, stats_block, Clock, StatsJson,
};

#[derive(Parser)]
#[command(name = "logrecon", version, about = "Log-based reconciliation solvers")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Print every time as 0 so repeated runs are byte-identical.
    #[arg(long, global = true)]
    redact_times: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact branch-and-bound.
    Solve(SolveArgs),
    /// Descent or Tabu local search (precedence-only instances).
    Ls(LsArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Encode a DIMACS CNF file as an instance plus a mapping file.
    Encode(EncodeArgs),
    /// Read a valuation off a schedule of an encoded instance.
    Decode(DecodeArgs),
    /// Validate a schedule against an instance.
    Check(CheckArgs),
    /// Exhaustive optimum of a small instance.
    Oracle(OracleArgs),
    /// Run a benchmark family and tabulate the results.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Time limit in milliseconds.
    #[arg(long)]
    timeout: Option<u64>,
    /// Search node limit
    #[arg(long)]
    node_limit: Option<u64>,
    /// Fail with exit code 3 unless optimality is proved.
    #[arg(long)]
    prove: bool,
    /// Stop at the first solution.
    #[arg(long, conflicts_with = "prove")]
    first_only: bool,
    /// Print the incumbent trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Descent,
    Tabu,
}

#[derive(Args)]
struct LsArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "tabu")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Move budget; defaults to 10·n² for Tabu and unlimited sweeps for descent.
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_TABU_MAX)]
    tabu_max: u32,
    /// Time limit in milliseconds.
    #[arg(long)]
    timeout: Option<u64>,
    /// Start from the order of the instance's recorded logs.
    #[arg(long)]
    warm_start_logs: bool,
    /// Print one line per improvement of the best cost.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Number of actions
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 1.5)]
    dep_density: f64,
    #[arg(long, default_value_t = 1.5)]
    prec_density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    cnf: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    map: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    map: PathBuf,
    schedule: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    schedule: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = oracle::DEFAULT_CAP)]
    cap: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [40usize, 50])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    dep_density: f64,
    #[arg(long, default_value_t = 1.5)]
    prec_density: f64,
    /// Instances per size.
    #[arg(long, default_value_t = 4)]
    seeds: u64,
    /// First generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "cp,descent,tabu")]
    methods: Vec<Method>,
    /// Per-run time limit in milliseconds.
    #[arg(long, default_value_t = 10_000)]
    timeout: u64,
    /// Tabu move budget; 10·n² when absent.
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_TABU_MAX)]
    tabu_max: u32,
    /// Also write the rows as CSV to this file (`-` for stdout).
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Unproved(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Unproved(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Unproved(m) | Failure::Internal(m) => m,
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Problem, Failure> {
    Problem::from_json(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

/// Solver output must validate; anything else is a bug.
fn validated(problem: &Problem, schedule: &Schedule) -> Result<(), Failure> {
    let violations =
        check_schedule(problem, schedule).map_err(|e| Failure::Internal(e.to_string()))?;
    match violations.first() {
        None => Ok(()),
        Some(v) => Err(Failure::Internal(format!(
            "solver produced an invalid schedule: {v}"
        ))),
    }
}

fn cmd_solve(args: &SolveArgs, json_out: bool, clock: Clock) -> CmdResult {
    let problem = load_instance(&args.instance)?;
    let config = CpConfig {
        time_limit: args.timeout.map(Duration::from_millis),
        node_limit: args.node_limit,
        prove_optimality: !args.first_only,
        cancel: None,
    };
    let sol = branch_and_bound(&problem, &config).map_err(|e| Failure::Input(e.to_string()))?;
    validated(&problem, &sol.schedule)?;
    let trace: Vec<String> = sol
        .trace
        .iter()
        .map(|inc| {
            let mut inc = *inc;
            if clock.redact {
                inc.elapsed = Duration::ZERO;
            }
            inc.to_string()
        })
        .collect();
    if json_out {
        print_json(&json!({
            "instance": problem.name(),
            "method": "cp",
            "value": objective(&sol.schedule),
            "schedule": schedule_entries(&problem, &sol.schedule),
            "stats": StatsJson::new(&sol.stats, clock),
            "trace": trace,
        }));
    } else {
        print!("{}", schedule_lines(&problem, &sol.schedule));
        print!("{}", stats_block(&sol.stats, clock, "value"));
        if args.trace {
            for line in &trace {
                println!("# trace {line}");
            }
        }
    }
    if args.prove && !sol.stats.proved_optimal {
        return Err(Failure::Unproved(format!(
            "optimality not proved within limits; best value {}",
            sol.stats.best_value
        )));
    }
    Ok(0)
}

fn cmd_ls(args: &LsArgs, json_out: bool, clock: Clock) -> CmdResult {
    let problem = load_instance(&args.instance)?;
    let mode = match args.mode {
        ModeArg::Descent => LsMode::Descent,
        ModeArg::Tabu => LsMode::Tabu,
    };
    let warm_start = if args.warm_start_logs {
        Some(ls::warm_start_from_logs(&problem).ok_or_else(|| {
            Failure::Input(format!(
                "{}: instance records no logs",
                args.instance.display()
            ))
        })?)
    } else {
        None
    };
    let params = LsParams {
        tabu_max: args.tabu_max,
        max_iterations: args.iters.unwrap_or(match mode {
            LsMode::Tabu => LsParams::budget_for(problem.len()),
            LsMode::Descent => u64::MAX,
        }),
        rng_seed: args.seed,
        mode,
        warm_start,
        time_limit: args.timeout.map(Duration::from_millis),
    };
    let out = ls::run(&problem, &params).map_err(|e| Failure::Input(e.to_string()))?;
    validated(&problem, &out.schedule)?;
    let trace: Vec<String> = out
        .trace
        .iter()
        .map(|line| {
            let mut line = *line;
            if clock.redact {
                line.elapsed = Duration::ZERO;
            }
            line.to_string()
        })
        .collect();
    let tag = match mode {
        LsMode::Descent => "descent",
        LsMode::Tabu => "tabu",
    };
    if json_out {
        print_json(&json!({
            "instance": problem.name(),
            "method": tag,
            "seed": args.seed,
            "value": objective(&out.schedule),
            "schedule": schedule_entries(&problem, &out.schedule),
            "stats": StatsJson::new(&out.stats, clock),
            "trace": trace,
        }));
    } else {
        print!("{}", schedule_lines(&problem, &out.schedule));
        print!("{}", stats_block(&out.stats, clock, "cost"));
        if args.trace {
            for line in &trace {
                println!("{line}");
            }
        }
    }
    Ok(0)
}

fn cmd_gen(args: &GenArgs, json_out: bool) -> CmdResult {
    let spec = GenSpec::new(args.size, args.dep_density, args.prec_density, args.seed);
    let problem = generate(&spec).map_err(|e| Failure::Input(e.to_string()))?;
    let text = problem.to_json();
    match &args.output {
        Some(path) => {
            write(path, &text)?;
            if json_out {
                print_json(&json!({
                    "name": problem.name(),
                    "n": problem.len(),
                    "deps": problem.deps().len(),
                    "precs": problem.precs().len(),
                    "path": path.display().to_string(),
                }));
            } else {
                println!(
                    "{}: {} actions, {} dependencies, {} precedences -> {}",
                    problem.name(),
                    problem.len(),
                    problem.deps().len(),
                    problem.precs().len(),
                    path.display()
                );
            }
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_encode(args: &EncodeArgs, json_out: bool) -> CmdResult {
    let text = read(&args.cnf)?;
    let cnf = CnfFormula::parse_dimacs(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.cnf.display())))?;
    let (problem, map) = satenc::encode(&cnf);
    write(&args.output, &problem.to_json())?;
    write(&args.map, &map.to_json())?;
    if json_out {
        print_json(&json!({
            "num_vars": cnf.num_vars(),
            "num_clauses": cnf.num_clauses(),
            "actions": problem.len(),
            "precs": problem.precs().len(),
            "target_value": cnf.num_vars() * cnf.num_clauses(),
        }));
    } else {
        println!(
            "{} variables, {} clauses -> {} actions, {} precedences; satisfiable iff optimum = {}",
            cnf.num_vars(),
            cnf.num_clauses(),
            problem.len(),
            problem.precs().len(),
            cnf.num_vars() * cnf.num_clauses()
        );
    }
    Ok(0)
}

fn cmd_decode(args: &DecodeArgs, json_out: bool) -> CmdResult {
    let map = ReductionMap::from_json(&read(&args.map)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.map.display())))?;
    let cnf = CnfFormula::from_signed(map.num_vars, &map.clauses)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.map.display())))?;
    let (problem, _) = satenc::encode(&cnf);
    let schedule = parse_schedule(&problem, &read(&args.schedule)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.schedule.display())))?;
    let violations =
        check_schedule(&problem, &schedule).map_err(|e| Failure::Input(e.to_string()))?;
    if let Some(v) = violations.first() {
        return Err(Failure::Input(format!(
            "schedule is not valid for the encoding: {v}"
        )));
    }
    let valuation =
        satenc::decode(&map, &schedule).map_err(|e| Failure::Internal(e.to_string()))?;
    if let Some(v) = &valuation {
        if !cnf.is_satisfied_by(v) {
            return Err(Failure::Internal(
                "decoded valuation falsifies the formula".into(),
            ));
        }
    }
    if json_out {
        print_json(&json!({ "satisfiable": valuation.is_some(), "valuation": valuation }));
    } else {
        match valuation {
            Some(v) => {
                let lits: Vec<String> = v
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| {
                        if b {
                            format!("{}", i + 1)
                        } else {
                            format!("-{}", i + 1)
                        }
                    })
                    .collect();
                println!("v {} 0", lits.join(" "));
            }
            None => println!(
                "NONE: schedule accepts {} of {} actions needed",
                objective(&schedule),
                map.num_vars * map.num_clauses
            ),
        }
    }
    Ok(0)
}

fn cmd_check(args: &CheckArgs, json_out: bool) -> CmdResult {
    let problem = load_instance(&args.instance)?;
    let schedule = parse_schedule(&problem, &read(&args.schedule)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.schedule.display())))?;
    let violations =
        check_schedule(&problem, &schedule).map_err(|e| Failure::Input(e.to_string()))?;
    if json_out {
        print_json(&json!({
            "value": objective(&schedule),
            "valid": violations.is_empty(),
            "violations": violations,
        }));
    } else if violations.is_empty() {
        println!("valid: {} actions accepted", objective(&schedule));
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
    }
    Ok(if violations.is_empty() { 0 } else { 1 })
}

fn cmd_oracle(args: &OracleArgs, json_out: bool) -> CmdResult {
    let problem = load_instance(&args.instance)?;
    let result = oracle::brute_force_capped(&problem, args.cap)
        .map_err(|e| Failure::Input(e.to_string()))?;
    let accepted: Vec<usize> = (0..problem.len()).filter(|&i| result.accepted[i]).collect();
    if json_out {
        print_json(&json!({ "value": result.value, "accepted": accepted }));
    } else {
        let names: Vec<String> = accepted.iter().map(|&i| problem.action_name(i)).collect();
        println!("optimum: {}", result.value);
        println!("witness: {}", names.join(" "));
    }
    Ok(0)
}

fn cmd_bench(args: &BenchArgs, json_out: bool, clock: Clock) -> CmdResult {
    if args.sizes.is_empty() || args.methods.is_empty() {
        return Err(Failure::Input(
            "need at least one size and one method".into(),
        ));
    }
    if args.timeout == 0 {
        return Err(Failure::Input("timeout must be positive".into()));
    }
    let config = BenchConfig {
        sizes: args.sizes.clone(),
        dep_density: args.dep_density,
        prec_density: args.prec_density,
        seeds: args.seeds,
        seed_base: args.seed,
        methods: args.methods.clone(),
        timeout: Duration::from_millis(args.timeout),
        ls_iters: args.iters,
        tabu_max: args.tabu_max,
    };
    let rows = bench::run(&config, clock).map_err(|e| match e {
        BenchError::Config(m) => Failure::Input(m),
        BenchError::Invalid(m) => Failure::Internal(m),
    })?;
    let aggs = bench::aggregate(&rows);
    if let Some(path) = &args.csv {
        let csv = bench::to_csv(&rows).map_err(Failure::Internal)?;
        if path.as_os_str() == "-" {
            print!("{csv}");
        } else {
            write(path, &csv)?;
        }
    }
    if json_out {
        print_json(&json!({ "rows": rows, "aggregates": aggs }));
    } else if args.csv.as_deref().is_none_or(|p| p.as_os_str() != "-") {
        if rows.iter().any(|r| r.method == "cp") {
            println!("{}", bench::cp_table(&rows));
        }
        if rows.iter().any(|r| r.method != "cp") {
            println!("{}", bench::ls_table(&rows));
        }
        print!("{}", bench::aggregate_table(&aggs));
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let clock = Clock {
        redact: cli.redact_times,
    };
    let json_out = cli.json;
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, json_out, clock),
        Command::Ls(a) => cmd_ls(a, json_out, clock),
        Command::Gen(a) => cmd_gen(a, json_out),
        Command::Encode(a) => cmd_encode(a, json_out),
        Command::Decode(a) => cmd_decode(a, json_out),
        Command::Check(a) => cmd_check(a, json_out),
        Command::Oracle(a) => cmd_oracle(a, json_out),
        Command::Bench(a) => cmd_bench(a, json_out, clock),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
