//! `mec`: couple, bound, and exactly solve minimum-entropy coupling
//! instances from the command line.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 invalid input, 3 refusal
//! (instance over a solver's size cap, or an exact solve that hit its
//! timeout and returned only the incumbent).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mec_core::*;

#[derive(Parser)]
#[command(name = "mec", version, about = "Minimum-entropy couplings: greedy coupler, lower bounds, exact solvers, guarantees, benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the greedy coupler on an instance file
    Couple(CoupleArgs),
    /// Evaluate lower bounds on the optimal coupling entropy
    Bound(BoundArgs),
    /// Solve a pair instance exactly
    Exact(ExactArgs),
    /// Print approximation-guarantee constants
    Constants(ConstantsArgs),
    /// Time solvers on random pair instances and emit CSV
    Bench(BenchArgs),
    /// Hill-climb for instances with a large gap between two quantities
    Gaps(GapsArgs),
    /// Run the self-verification suite
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CoupleArgs {
    /// Instance JSON: {"distributions": [[...], ...]}
    instance: PathBuf,
    /// Print the per-step trace (mass, indices, remaining mass)
    #[arg(long)]
    trace: bool,
    /// Write the coupling to a JSON file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scale each distribution to total 1 before validating
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct BoundArgs {
    instance: PathBuf,
    /// Which bound to evaluate
    #[arg(long, value_enum, default_value_t = KindArg::All)]
    kind: KindArg,
    #[arg(long)]
    normalize: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Meet,
    Profile,
    MajorProfile,
    All,
}

#[derive(Args)]
struct ExactArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverArg::Backtrack)]
    solver: SolverArg,
    /// Pruning bound for the backtracking solver
    #[arg(long, value_enum, default_value_t = BoundArgKind::MajorProfile)]
    bound: BoundArgKind,
    /// Per-solve budget in seconds
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    /// Write the optimal coupling to a JSON file
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    normalize: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Backtrack,
    Dp,
    Enum,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundArgKind {
    Zero,
    Meet,
    Profile,
    MajorProfile,
}

impl From<BoundArgKind> for BoundKind {
    fn from(b: BoundArgKind) -> BoundKind {
        match b {
            BoundArgKind::Zero => BoundKind::Zero,
            BoundArgKind::Meet => BoundKind::Meet,
            BoundArgKind::Profile => BoundKind::Profile,
            BoundArgKind::MajorProfile => BoundKind::MajorProfile,
        }
    }
}

#[derive(Args)]
struct ConstantsArgs {
    /// Inclusive range of distribution counts, e.g. 2..11
    #[arg(long, value_parser = parse_range, conflicts_with = "power")]
    m_range: Option<(usize, usize)>,
    /// Power-cost exponent in (0, 1): print its ratio and factors instead
    #[arg(long)]
    power: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated algorithm names, or "all"
    #[arg(long, default_value = "all")]
    algorithms: String,
    /// Comma-separated state counts for the random pair instances
    #[arg(long, default_value = "3,4,5,6", value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    /// Per-run budget in seconds
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GapsArgs {
    /// Objective "<a>-<b>": maximize a minus b, names from
    /// greedy|opt|meet|profile|major-profile
    #[arg(long)]
    objective: String,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 400)]
    steps: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// Random instances per check
    #[arg(long, default_value_t = 50)]
    counts: usize,
}

fn parse_range(text: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = text.split_once("..").ok_or_else(|| "expected a range like 2..11".to_string())?;
    let lo: usize = a.parse().map_err(|_| "range start must be an integer".to_string())?;
    let hi: usize = b.parse().map_err(|_| "range end must be an integer".to_string())?;
    if lo > hi {
        return Err("range start exceeds its end".into());
    }
    Ok((lo, hi))
}

fn parse_timeout(secs: f64) -> Result<Duration> {
    if !(secs >= 0.0 && secs.is_finite()) {
        return Err(MecError::InvalidInput(format!(
            "timeout must be a non-negative number of seconds, got {secs}"
        )));
    }
    Ok(Duration::from_secs_f64(secs))
}

fn main() -> ExitCode {
    // Die quietly when the reader closes the pipe (`mec couple x | head`),
    // like any other filter; the default Rust handler panics instead.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                MecError::Invariant(_) => ExitCode::from(1),
                MecError::SizeLimit(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Couple(args) => couple(args),
        Command::Bound(args) => bound(args),
        Command::Exact(args) => exact(args),
        Command::Constants(args) => constants(args),
        Command::Bench(args) => bench(args),
        Command::Gaps(args) => gaps(args),
        Command::Verify(args) => verify(args),
    }
}

fn joined(indices: &[usize]) -> String {
    indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

fn couple(args: CoupleArgs) -> Result<ExitCode> {
    let s = load_instance_with(&args.instance, args.normalize)?;
    let (coupling, trace) = greedy_coupling(&s);
    if args.trace {
        for (t, step) in trace.steps.iter().enumerate() {
            println!(
                "step {t}: mass {:.12}  indices ({})  remaining {:.12}",
                step.mass,
                joined(&step.indices),
                step.remaining_before
            );
        }
    } else {
        for e in &coupling.entries {
            println!("{:.12}  ({})", e.mass, joined(&e.indices));
        }
    }
    println!("support {}", coupling.support());
    println!("entropy {:.12} bits", coupling_entropy(&coupling));
    if let Some(path) = args.out {
        save_coupling(path, &coupling)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn bound(args: BoundArgs) -> Result<ExitCode> {
    let s = load_instance_with(&args.instance, args.normalize)?;
    let kinds: &[BoundKind] = match args.kind {
        KindArg::Meet => &[BoundKind::Meet],
        KindArg::Profile => &[BoundKind::Profile],
        KindArg::MajorProfile => &[BoundKind::MajorProfile],
        KindArg::All => &[BoundKind::Meet, BoundKind::Profile, BoundKind::MajorProfile],
    };
    for &kind in kinds {
        println!("{} {:.12}", kind.name(), lower_bound(&s, kind));
    }
    Ok(ExitCode::SUCCESS)
}

fn exact(args: ExactArgs) -> Result<ExitCode> {
    let s = load_instance_with(&args.instance, args.normalize)?;
    if s.m() != 2 {
        return Err(MecError::InvalidInput(format!(
            "exact solvers handle pairs, this instance has m={}",
            s.m()
        )));
    }
    let budget = parse_timeout(args.timeout)?;
    let (p, q) = (&s.dists()[0], &s.dists()[1]);
    let result = match args.solver {
        SolverArg::Backtrack => backtrack_exact(p, q, args.bound.into(), Some(budget))?,
        SolverArg::Dp => dp_exact(p, q)?,
        SolverArg::Enum => vertex_enum_exact(p, q, Some(budget))?,
    };
    println!("entropy {:.12} bits", result.entropy);
    println!("support {}", result.coupling.support());
    println!("nodes {}", result.nodes);
    println!("complete {}", result.complete);
    println!("wall {:.6}s", result.wall.as_secs_f64());
    if let Some(path) = args.out {
        save_coupling(path, &result.coupling)?;
    }
    if !result.complete {
        eprintln!("timed out: the reported coupling is the best incumbent, not a proven optimum");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn constants(args: ConstantsArgs) -> Result<ExitCode> {
    if let Some(c) = args.power {
        let f = CostFn::power(c)?;
        let (ratio, pair_factor) = mult_ratio_two(f)?;
        println!("c {c}");
        println!("ratio {ratio:.12}");
        println!("pair-factor {pair_factor:.12}");
        println!("general-factor {:.12}", mult_guarantee_general(c));
        return Ok(ExitCode::SUCCESS);
    }
    let (lo, hi) = args.m_range.unwrap_or((2, 11));
    println!("m  constant");
    for m in lo..=hi {
        println!("{m}  {:.12}", small_m_constant(m)?);
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let algorithms = if args.algorithms == "all" {
        Algorithm::ALL.to_vec()
    } else {
        args.algorithms
            .split(',')
            .map(|name| {
                Algorithm::parse(name.trim()).ok_or_else(|| {
                    MecError::InvalidInput(format!("unknown algorithm \"{name}\""))
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    let cfg = BenchConfig {
        algorithms,
        sizes: args.sizes,
        runs: args.runs,
        timeout: parse_timeout(args.timeout)?,
        seed: args.seed,
    };
    let csv = bench_csv(&bench_runtimes(&cfg)?);
    match args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn gaps(args: GapsArgs) -> Result<ExitCode> {
    let objective = Quantity::parse_objective(&args.objective).ok_or_else(|| {
        MecError::InvalidInput(format!(
            "objective must be \"<a>-<b>\" with names greedy|opt|meet|profile|major-profile, got \"{}\"",
            args.objective
        ))
    })?;
    let cfg = GapSearchConfig {
        objective,
        n: args.n,
        m: args.m,
        restarts: args.restarts,
        steps: args.steps,
        scale: (-1.0, -4.0),
        seed: args.seed,
    };
    let found = local_search_gap(&cfg)?;
    println!("gap {:.12}", found.gap);
    let lists: Vec<&[f64]> = found.instance.dists().iter().map(Dist::masses).collect();
    println!("{}", serde_json::json!({ "distributions": lists }));
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let report = verify_suite(args.seed, args.counts);
    for check in &report.checks {
        let mark = if check.passed { "ok  " } else { "FAIL" };
        println!("{mark} {}: {}", check.name, check.detail);
    }
    if report.passed() {
        println!("all {} checks passed", report.checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        Err(MecError::Invariant("verification suite reported failures".into()))
    }
}
