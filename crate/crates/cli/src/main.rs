//! `gwstack`: compute, tabulate and verify genus-zero invariants of `P(1,b)`.

mod output;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gwstack_core::engine::{Engine, EngineError, EnumerateOptions};
use gwstack_core::golden::{self, MAX_B, MIN_B};
use gwstack_core::records::{self, GWRecord};
use gwstack_core::target::{build_p1b, build_p2, TargetData};
use gwstack_core::Rat;

use output::{Format, TableRow};

#[derive(Parser, Debug)]
#[command(
    name = "gwstack",
    version,
    about = "Genus-zero Gromov-Witten invariants of P(1,b) via WDVV"
)]
struct Cli {
    /// Memo cache file, loaded before and saved after `compute` and `table`.
    #[arg(long, global = true, env = "GWSTACK_CACHE")]
    cache: Option<PathBuf>,

    /// Report recursion statistics on standard error.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute one invariant.
    Compute(ComputeArgs),
    /// Tabulate every nonzero invariant of P(1,b) within the given bounds.
    Table(TableArgs),
    /// Check the engine against the built-in reference tables.
    Verify(VerifyArgs),
    /// Print the quantum product at q = lambda.
    Ring(RingArgs),
    /// Save or load the memo cache.
    #[command(subcommand)]
    Cache(CacheCommand),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
enum TargetChoice {
    /// The weighted projective line P(1,b); needs --b.
    #[default]
    P1b,
    /// The projective plane.
    P2,
}

#[derive(Args, Debug)]
struct TargetArgs {
    /// Weight of P(1,b).
    #[arg(long)]
    b: Option<u32>,

    #[arg(long, value_enum, default_value_t)]
    target: TargetChoice,
}

#[derive(Args, Debug)]
struct ComputeArgs {
    #[command(flatten)]
    target: TargetArgs,

    /// Comma-separated basis exponents, e.g. 1,1,2,2.
    #[arg(long, value_delimiter = ',', required = true)]
    insertions: Vec<usize>,

    /// Curve degree; defaults to the degree forced by the insertions.
    #[arg(long)]
    degree: Option<u64>,

    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    b: u32,

    #[arg(long, default_value_t = 4)]
    min_n: usize,

    #[arg(long)]
    max_n: Option<usize>,

    #[arg(long)]
    max_d: Option<u64>,

    /// Also allow identity and divisor insertions (requires --max-n).
    #[arg(long, requires = "max_n")]
    include_divisor: bool,

    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// A weight in 2..=6, or `all`.
    #[arg(long, value_parser = parse_verify_b)]
    b: VerifyScope,
}

#[derive(Clone, Copy, Debug)]
enum VerifyScope {
    All,
    One(u32),
}

fn parse_verify_b(s: &str) -> Result<VerifyScope, String> {
    if s == "all" {
        return Ok(VerifyScope::All);
    }
    match s.parse::<u32>() {
        Ok(b) if (MIN_B..=MAX_B).contains(&b) => Ok(VerifyScope::One(b)),
        _ => Err(format!("expected `all` or an integer in {MIN_B}..={MAX_B}")),
    }
}

#[derive(Args, Debug)]
struct RingArgs {
    #[command(flatten)]
    target: TargetArgs,

    /// Rational value of q, e.g. 2 or -1/3.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Rat,

    /// Report whether the divisor classes generate the specialized ring.
    #[arg(long)]
    check_generation: bool,
}

#[derive(Subcommand, Debug)]
enum CacheCommand {
    /// Tabulate P(1,b) and write the resulting memo to a cache file.
    Save {
        #[arg(long)]
        b: u32,
        #[arg(long, env = "GWSTACK_CACHE")]
        path: PathBuf,
    },
    /// Parse a cache file and report how many records it holds.
    Load {
        #[arg(long, env = "GWSTACK_CACHE")]
        path: PathBuf,
    },
}

/// Errors carrying the process exit code.
#[derive(Debug)]
enum Failure {
    Mismatch,
    Usage(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn io(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Io(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Mismatch => {}
                Failure::Usage(e) | Failure::Io(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let cache = cli.cache.as_deref();
    match cli.command {
        Command::Compute(args) => compute(args, cache, cli.verbose),
        Command::Table(args) => table(args, cache, cli.verbose),
        Command::Verify(args) => verify(args),
        Command::Ring(args) => ring(args),
        Command::Cache(CacheCommand::Save { b, path }) => cache_save(b, &path, cli.verbose),
        Command::Cache(CacheCommand::Load { path }) => cache_load(&path),
    }
}

fn build_target(args: &TargetArgs) -> Result<TargetData, Failure> {
    match (args.target, args.b) {
        (TargetChoice::P2, None) => Ok(build_p2()),
        (TargetChoice::P2, Some(_)) => Err(usage(anyhow!("--b does not apply to --target p2"))),
        (TargetChoice::P1b, None) => Err(usage(anyhow!("--b is required for P(1,b)"))),
        (TargetChoice::P1b, Some(b)) => p1b(b),
    }
}

fn p1b(b: u32) -> Result<TargetData, Failure> {
    build_p1b(b).map_err(usage)
}

fn read_cache(path: &Path) -> Result<Vec<GWRecord>, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(io)?;
    records::parse_cache(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(io)
}

/// Loads the cache into `engine` if the file exists; returns the records of
/// other targets so a later save keeps them.
fn open_cache(engine: &mut Engine, path: Option<&Path>) -> Result<Vec<GWRecord>, Failure> {
    let Some(path) = path.filter(|p| p.exists()) else {
        return Ok(Vec::new());
    };
    let recs = read_cache(path)?;
    records::preload_records(engine, &recs)
        .with_context(|| format!("loading {}", path.display()))
        .map_err(io)?;
    let own = engine.target().weight();
    Ok(recs.into_iter().filter(|r| Some(r.b) != own).collect())
}

/// Writes the engine's memo plus `others`; returns the number of lines written.
fn write_cache(engine: &Engine, path: &Path, mut others: Vec<GWRecord>) -> Result<usize, Failure> {
    others.extend(records::memo_records(engine));
    let text = records::render_cache(&others);
    fs::write(path, &text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(io)?;
    Ok(text.lines().count())
}

fn report_stats(engine: &Engine, verbose: bool) {
    if verbose {
        eprintln!(
            "solved {} invariants by recursion; memo holds {}",
            engine.solved_count(),
            engine.memo().len()
        );
    }
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::TooFewInsertions(_)
        | EngineError::Degenerate
        | EngineError::IndexOutOfRange(_)
        | EngineError::NotWeightedLine(_)
        | EngineError::Ring(_) => usage(e),
        other => Failure::Io(anyhow!(other).context("internal engine error")),
    }
}

fn compute(args: ComputeArgs, cache: Option<&Path>, verbose: bool) -> Outcome {
    let td = build_target(&args.target)?;
    let mut engine = Engine::new(td);
    let others = open_cache(&mut engine, cache)?;
    let value = match args.degree {
        Some(d) => engine.gw_at(&args.insertions, d),
        None => engine.gw(&args.insertions),
    }
    .map_err(engine_failure)?;
    let mut insertions = args.insertions.clone();
    insertions.sort_unstable();
    let degree = args
        .degree
        .or_else(|| engine.forced_degree(&insertions))
        .unwrap_or(0);
    println!(
        "{}",
        output::single(engine.target(), degree, &insertions, &value, args.format)
    );
    report_stats(&engine, verbose);
    if let Some(path) = cache {
        write_cache(&engine, path, others)?;
    }
    Ok(())
}

fn table(args: TableArgs, cache: Option<&Path>, verbose: bool) -> Outcome {
    let td = p1b(args.b)?;
    let basis = td.basis_size();
    let mut engine = Engine::new(td);
    let others = open_cache(&mut engine, cache)?;
    let opts = EnumerateOptions {
        min_n: args.min_n,
        max_n: args.max_n,
        max_d: args.max_d,
        include_special: args.include_divisor,
    };
    let mut rows = Vec::new();
    for item in engine.enumerate_nonzero(opts).map_err(engine_failure)? {
        let (key, value) = item.map_err(engine_failure)?;
        rows.push(TableRow {
            d: key.degree,
            mults: key.multiplicities(basis, args.include_divisor),
            insertions: key.insertions,
            value,
        });
    }
    rows.sort_by(|x, y| (x.d, &x.mults).cmp(&(y.d, &y.mults)));
    print!("{}", output::table(args.b, &rows, args.format));
    report_stats(&engine, verbose);
    if let Some(path) = cache {
        write_cache(&engine, path, others)?;
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Outcome {
    let bs: Vec<u32> = match args.b {
        VerifyScope::All => (MIN_B..=MAX_B).collect(),
        VerifyScope::One(b) => vec![b],
    };
    let (mut matched, mut total, mut ok) = (0, 0, true);
    for b in bs {
        let report = golden::verify(b).map_err(io)?;
        println!("{report}");
        matched += report.matched();
        total += report.rows.len();
        ok &= report.passed();
    }
    println!("{matched}/{total} rows match");
    if ok {
        Ok(())
    } else {
        Err(Failure::Mismatch)
    }
}

fn ring(args: RingArgs) -> Outcome {
    let td = build_target(&args.target)?;
    let ring = td.specialize(&args.lambda);
    println!("{} at q = {}", td.id(), args.lambda);
    print!("{ring}");
    if args.check_generation {
        println!("generated: {}", ring.is_divisor_generated());
    }
    Ok(())
}

/// Parses the cache and preloads each weight's records into a fresh engine,
/// which rejects conflicting values and degrees the axiom does not allow.
fn cache_load(path: &Path) -> Outcome {
    let recs = read_cache(path)?;
    let weights: BTreeSet<u32> = recs.iter().map(|r| r.b).collect();
    for b in weights {
        let mut engine = Engine::new(p1b(b).map_err(|f| match f {
            Failure::Usage(e) => io(e),
            other => other,
        })?);
        records::preload_records(&mut engine, &recs)
            .with_context(|| format!("loading {}", path.display()))
            .map_err(io)?;
    }
    println!("{} records loaded from {}", recs.len(), path.display());
    Ok(())
}

fn cache_save(b: u32, path: &Path, verbose: bool) -> Outcome {
    let mut engine = Engine::new(p1b(b)?);
    let others = open_cache(&mut engine, Some(path))?;
    for item in engine
        .enumerate_nonzero(EnumerateOptions::default())
        .map_err(engine_failure)?
    {
        item.map_err(engine_failure)?;
    }
    report_stats(&engine, verbose);
    let n = write_cache(&engine, path, others)?;
    println!("{n} records saved to {}", path.display());
    Ok(())
}
