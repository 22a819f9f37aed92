//! `tdpmc`: projected model counting on tree decompositions.
//!
//! Exit codes: 0 success, 1 unreadable or malformed input, 2 refused by a
//! width or table guard, 3 internal error or oracle mismatch.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use log::info;
use tdpmc::decomposition::{read_td, Heuristic};
use tdpmc::oracle::brute_force;
use tdpmc::pipeline::{decide, solve, Config, PipelineError, Solution, DEFAULT_MAX_WIDTH};
use tdpmc::proj::{Strategy, DEFAULT_TABLE_CAP};
use tdpmc::{parse_dimacs, BigCount, Instance, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Projected model count.
    Pmc,
    /// Satisfiability only (first pass).
    Sat,
    /// Decomposition statistics without counting.
    StatsOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HeuristicArg {
    MinFill,
    MinDegree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Transform,
    Recurrence,
}

#[derive(Debug, Parser)]
#[command(
    name = "tdpmc",
    version,
    about = "Exact projected model counting on tree decompositions"
)]
struct Args {
    /// DIMACS CNF file; projection read from `c p show ... 0` lines.
    input: PathBuf,

    /// Comma-separated projection variables. Overrides show lines.
    #[arg(long, value_delimiter = ',', conflicts_with = "projection_file")]
    projection: Option<Vec<u32>>,

    /// File with whitespace-separated projection variables (a trailing 0 is ignored).
    #[arg(long)]
    projection_file: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "min-fill")]
    heuristic: HeuristicArg,

    /// Seed for tie-breaking in the elimination heuristic.
    #[arg(long)]
    seed: Option<u64>,

    /// Tree decomposition in PACE `.td` format, used instead of the heuristic.
    #[arg(long)]
    td: Option<PathBuf>,

    #[arg(long, default_value_t = DEFAULT_MAX_WIDTH)]
    max_width: usize,

    /// Maximum number of sub-buckets per node table.
    #[arg(long)]
    table_cap: Option<u64>,

    /// Ignore the width guard, and the table cap unless given explicitly.
    #[arg(long)]
    force: bool,

    #[arg(long, value_enum, default_value = "pmc")]
    mode: Mode,

    /// Compare against brute-force enumeration (small instances only).
    #[arg(long)]
    check_oracle: bool,

    /// Print all tables to stderr.
    #[arg(long)]
    dump_tables: bool,

    #[arg(long, value_enum, default_value = "transform")]
    proj_strategy: StrategyArg,
}

enum Failure {
    Input(String),
    Guard(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Guard(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Guard(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_guard() {
            Failure::Guard(e.to_string())
        } else if let PipelineError::InvalidDecomposition(_) = e {
            Failure::Input(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_projection(text: &str) -> Result<Vec<u32>, Failure> {
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        let v: u32 = tok
            .parse()
            .map_err(|_| Failure::Input(format!("invalid projection variable `{tok}`")))?;
        if v != 0 {
            out.push(v);
        }
    }
    Ok(out)
}

fn load_instance(args: &Args) -> Result<Instance, Failure> {
    let inst = parse_dimacs(&read(&args.input)?).map_err(|e| Failure::Input(e.to_string()))?;
    let ids = match (&args.projection, &args.projection_file) {
        (Some(ids), _) => Some(ids.clone()),
        (None, Some(path)) => Some(parse_projection(&read(path)?)?),
        (None, None) => None,
    };
    match ids {
        Some(ids) => {
            if ids.contains(&0) {
                return Err(Failure::Input("projection variables start at 1".into()));
            }
            inst.with_projection(ids.into_iter().map(Var::new))
                .map_err(|e| Failure::Input(e.to_string()))
        }
        None => Ok(inst),
    }
}

fn config(args: &Args) -> Result<Config, Failure> {
    let td = match &args.td {
        Some(path) => Some(
            read_td(&read(path)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let table_cap = match (args.table_cap, args.force) {
        (Some(cap), _) => cap,
        (None, true) => u64::MAX,
        (None, false) => DEFAULT_TABLE_CAP,
    };
    Ok(Config {
        heuristic: match args.heuristic {
            HeuristicArg::MinFill => Heuristic::MinFill,
            HeuristicArg::MinDegree => Heuristic::MinDegree,
        },
        seed: args.seed,
        td,
        max_width: (!args.force).then_some(args.max_width),
        table_cap,
        strategy: match args.proj_strategy {
            StrategyArg::Transform => Strategy::Transform,
            StrategyArg::Recurrence => Strategy::Recurrence,
        },
        ..Config::default()
    })
}

fn dump(solution: &Solution<BigCount>) {
    let ntd = &solution.decomposition.ntd;
    for (id, node) in ntd.nodes().iter().enumerate() {
        eprintln!(
            "t{} {} bag {:?} children {:?}",
            id + 1,
            node.kind,
            node.bag,
            node.children
        );
        eprint!("sat:\n{}", solution.sat[id]);
        eprint!("purged:\n{}", solution.purged[id]);
        if let Some(proj) = &solution.proj {
            eprint!("proj:\n{}", proj[id].dump(&solution.purged[id]));
        }
    }
}

fn run(args: &Args) -> Result<(), Failure> {
    let instance = load_instance(args)?;
    let config = config(args)?;
    info!(
        "{} variables, {} clauses, {} projected",
        instance.formula().num_vars(),
        instance.formula().clauses().len(),
        instance.projection().len()
    );

    match args.mode {
        Mode::StatsOnly => {
            let d = tdpmc::pipeline::decompose_instance(&instance, &config)?;
            println!("c o width {}", d.width);
            println!("c o nodes {}", d.ntd.len());
            println!("c o heuristic {}", d.source);
        }
        Mode::Sat => {
            let (d, satisfiable, stats) = decide(&instance, &config)?;
            println!("c o width {}", d.width);
            println!("c o nodes {}", d.ntd.len());
            println!("c o heuristic {}", d.source);
            println!("c o time-sat {}", stats.time_sat.as_millis());
            println!("c o time-proj 0");
            if args.check_oracle {
                let oracle =
                    brute_force(&instance).map_err(|e| Failure::Internal(e.to_string()))?;
                let expected = oracle.model_count != BigCount::from(0);
                if expected != satisfiable {
                    return Err(Failure::Internal(format!(
                        "oracle mismatch: dp says {satisfiable}, brute force says {expected}"
                    )));
                }
            }
            println!(
                "s {}",
                if satisfiable {
                    "SATISFIABLE"
                } else {
                    "UNSATISFIABLE"
                }
            );
        }
        Mode::Pmc => {
            let solution = solve::<BigCount>(&instance, &config)?;
            if args.dump_tables {
                dump(&solution);
            }
            let d = &solution.decomposition;
            println!("c o width {}", d.width);
            println!("c o nodes {}", d.ntd.len());
            println!("c o heuristic {}", d.source);
            println!("c o time-sat {}", solution.stats.time_sat.as_millis());
            println!("c o time-proj {}", solution.stats.time_proj.as_millis());
            info!(
                "largest SAT table {} rows, largest PROJ table {} entries",
                solution.stats.max_sat_rows, solution.stats.max_proj_entries
            );
            if args.check_oracle {
                let oracle =
                    brute_force(&instance).map_err(|e| Failure::Internal(e.to_string()))?;
                if oracle.projected_count != solution.count {
                    return Err(Failure::Internal(format!(
                        "oracle mismatch: dp {} brute force {}",
                        solution.count, oracle.projected_count
                    )));
                }
                info!("oracle agrees");
            }
            println!("s pmc {}", solution.count);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
