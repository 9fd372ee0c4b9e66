//! `lfourth`: moment comparisons, verification suites and cache upkeep.
//!
//! Exit status is 0 on success, 1 when a tolerance check fails or a
//! computation cannot reach its accuracy target, and 2 on usage errors
//! (bad flags, or a modulus/argument outside a routine's domain).

mod cache;
mod report;

use cache::DiskCache;
use clap::{Args, Parser, Subcommand};
use lfourth::moments::{
    check_modulus, extract_cj, main_term_thm14, moment_report_with, seeded_direction, zero_shift_with, MomentTarget, WeightSpec,
    ZeroShiftOptions, DIRECTION_A,
};
use lfourth::suites::{self, SuiteReport};
use lfourth::{ShiftTuple, C64};
use report::{write_csv, Format, Report};
use serde::Serialize;
use serde_json::{json, Value};
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "lfourth", version, about = "Fourth moments of Dirichlet L-functions at desk scale")]
struct Cli {
    /// Cache root for character tables and L-values
    #[arg(long, env = "LFOURTH_CACHE_DIR", default_value = ".lfourth-cache", global = true)]
    cache_dir: PathBuf,
    /// Neither read nor write the cache
    #[arg(long, global = true)]
    no_cache: bool,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    output: Format,
    /// Write the report to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel maps (default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize, Clone)]
struct ShiftOpts {
    /// Shift scale ε; without it the zero-shift limit is used
    #[arg(long)]
    eps: Option<f64>,
    /// Seed for a random shift direction (default: a fixed direction)
    #[arg(long, requires = "eps")]
    seed: Option<u64>,
}

impl ShiftOpts {
    fn build(&self) -> Result<Option<ShiftTuple>, CliError> {
        let Some(eps) = self.eps else { return Ok(None) };
        let dir = self.seed.map_or(DIRECTION_A, seeded_direction);
        let [a, b, g, d] = dir.map(|z| z * eps);
        Ok(Some(ShiftTuple::new(a, b, g, d)?))
    }
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// List the Dirichlet characters mod q
    Characters {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        primitive_only: bool,
    },
    /// L(σ+it, χ) for the primitive characters mod q, or one character
    Lvalue {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        sigma: f64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// Character index; default is every primitive character
        #[arg(long)]
        index: Option<usize>,
    },
    /// Empirical moment at height t against its main term
    Moment {
        /// Prime moduli, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<u64>,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[command(flatten)]
        shifts: ShiftOpts,
        /// Fail (exit 1) when any rel_err exceeds this
        #[arg(long)]
        max_rel_err: Option<f64>,
    },
    /// Moment integrated against a smooth weight on [T/2, 4T]
    MomentIntegral {
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<u64>,
        #[arg(long = "T", alias = "big-t")]
        big_t: f64,
        /// Ramp width, default T^(3/4)
        #[arg(long)]
        t0: Option<f64>,
        #[command(flatten)]
        shifts: ShiftOpts,
        #[arg(long)]
        max_rel_err: Option<f64>,
    },
    /// Main term alone; zero-shift limit unless --eps is given
    Mainterm {
        #[arg(long)]
        q: u64,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[command(flatten)]
        shifts: ShiftOpts,
        /// Use the parity-split main term instead of its average
        #[arg(long)]
        split_parity: bool,
    },
    /// Fit the polynomial coefficients c_0..c_4 of the zero-shift main term
    ExtractCj {
        #[arg(long)]
        q: u64,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,5,8,12,20")]
        t_grid: Vec<f64>,
    },
    /// Run a verification suite
    Verify {
        #[command(subcommand)]
        suite: Suite,
        /// Override a check threshold, NAME=VALUE; repeatable
        #[arg(long = "tol", global = true, value_parser = parse_tol)]
        tol: Vec<(String, f64)>,
    },
    /// Inspect or empty the cache
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Suite {
    Identities {
        #[arg(long, default_value_t = 60)]
        q_max: u64,
    },
    Afe,
    Estermann,
    Voronoi,
    Qdp {
        /// Also write one CSV row per sweep instance here
        #[arg(long)]
        rows_csv: Option<PathBuf>,
    },
    Bilinear,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CacheAction {
    Clear,
    Stats,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let v: f64 = v.parse().map_err(|e| format!("{v}: {e}"))?;
    if !(v > 0.0) {
        return Err("tolerance must be positive".into());
    }
    Ok((name.to_owned(), v))
}

#[derive(Debug)]
enum CliError {
    Core(lfourth::Error),
    Usage(String),
    Io(io::Error),
}

impl From<lfourth::Error> for CliError {
    fn from(e: lfourth::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        use lfourth::Error::*;
        match self {
            CliError::Usage(_) | CliError::Core(Precondition(_) | Domain(_) | Degenerate(_) | TooLarge(_)) => 2,
            _ => 1,
        }
    }
}

/// A finished run: the report plus the tolerance failure, if any.
struct Outcome {
    results: Vec<Value>,
    failure: Option<String>,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Characters { .. } => "characters".into(),
        Command::Lvalue { .. } => "lvalue".into(),
        Command::Moment { .. } => "moment".into(),
        Command::MomentIntegral { .. } => "moment-integral".into(),
        Command::Mainterm { .. } => "mainterm".into(),
        Command::ExtractCj { .. } => "extract-cj".into(),
        Command::Verify { suite, .. } => {
            let s = to_value(suite);
            let name = s.as_str().map(str::to_owned).or_else(|| s.as_object()?.keys().next().cloned());
            format!("verify {}", name.unwrap_or_default())
        }
        Command::Cache { action: CacheAction::Clear } => "cache clear".into(),
        Command::Cache { action: CacheAction::Stats } => "cache stats".into(),
    }
}

fn rel_err_failure(results: &[Value], max: Option<f64>) -> Option<String> {
    let max = max?;
    results
        .iter()
        .filter_map(|r| Some((r["q"].as_u64()?, r["rel_err"].as_f64()?)))
        .filter(|&(_, e)| !(e <= max))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(q, e)| format!("q = {q}: rel_err {e:e} exceeds {max:e}"))
}

fn suite_outcome(mut rep: SuiteReport, tol: &[(String, f64)]) -> Result<Outcome, CliError> {
    for (name, v) in tol {
        let Some(ch) = rep.checks.iter_mut().find(|c| &c.name == name) else {
            let known: Vec<&str> = rep.checks.iter().map(|c| c.name.as_str()).collect();
            return Err(CliError::Usage(format!("no check named {name}; known: {}", known.join(", "))));
        };
        ch.tol = *v;
        ch.passed = ch.worst <= ch.tol;
    }
    let failure = rep.worst_failure().map(|c| {
        format!("{}: check {} worst {:e} > tol {:e} at {}", rep.suite, c.name, c.worst, c.tol, c.worst_case)
    });
    Ok(Outcome { results: rep.checks.iter().map(to_value).collect(), failure })
}

fn run_moment(
    disk: &DiskCache,
    qs: &[u64],
    target: impl Fn() -> Result<MomentTarget, CliError>,
    shifts: &ShiftOpts,
) -> Result<Vec<Value>, CliError> {
    let shifts = shifts.build()?;
    let target = target()?;
    let mut out = Vec::new();
    for &q in qs {
        // before the character table is built or cached
        check_modulus(q)?;
        let group = disk.group(q)?;
        let rep = if let MomentTarget::Pointwise { .. } = target {
            let file = disk.lvalues(q);
            let rep = moment_report_with(&group, &target, shifts.as_ref(), Some(&file.cache))?;
            disk.store_lvalues(q, &file)?;
            rep
        } else {
            moment_report_with(&group, &target, shifts.as_ref(), None)?
        };
        out.push(to_value(&rep));
    }
    Ok(out)
}

fn dispatch(cli: &Cli, disk: &DiskCache) -> Result<Outcome, CliError> {
    let ok = |results| Ok(Outcome { results, failure: None });
    match &cli.command {
        Command::Characters { q, primitive_only } => {
            let group = disk.group(*q)?;
            let results = group
                .characters
                .iter()
                .filter(|c| !primitive_only || c.is_primitive())
                .map(|c| {
                    json!({
                        "q": c.q,
                        "index": c.index,
                        "parity": c.parity,
                        "conductor": c.conductor,
                        "primitive": c.is_primitive(),
                        "principal": c.is_principal(),
                        "real": c.is_real(),
                    })
                })
                .collect();
            ok(results)
        }
        Command::Lvalue { q, sigma, t, index } => {
            let group = disk.group(*q)?;
            let indices = match index {
                Some(i) if *i < group.characters.len() => vec![*i],
                Some(i) => return Err(CliError::Usage(format!("index {i} out of range for q = {q}"))),
                None => group.primitive_indices.clone(),
            };
            let s = C64::new(*sigma, *t);
            let file = disk.lvalues(*q);
            file.cache.fill(&group, &indices, s)?;
            disk.store_lvalues(*q, &file)?;
            ok(indices.iter().map(|&i| to_value(&file.cache.get(*q, i, s).expect("filled"))).collect())
        }
        Command::Moment { q, t, shifts, max_rel_err } => {
            let results = run_moment(disk, q, || Ok(MomentTarget::Pointwise { t: *t }), shifts)?;
            let failure = rel_err_failure(&results, *max_rel_err);
            Ok(Outcome { results, failure })
        }
        Command::MomentIntegral { q, big_t, t0, shifts, max_rel_err } => {
            let target = || Ok(MomentTarget::Weighted(WeightSpec::smooth(*big_t, t0.unwrap_or(big_t.powf(0.75)))?));
            let results = run_moment(disk, q, target, shifts)?;
            let failure = rel_err_failure(&results, *max_rel_err);
            Ok(Outcome { results, failure })
        }
        Command::Mainterm { q, t, shifts, split_parity } => match shifts.build()? {
            Some(sh) => ok(vec![to_value(&main_term_thm14(*q, *t, &sh, !split_parity)?)]),
            None => {
                if *split_parity {
                    return Err(CliError::Usage("--split-parity needs shifts (--eps)".into()));
                }
                let z = zero_shift_with(*q, &MomentTarget::Pointwise { t: *t }, &ZeroShiftOptions::default())?;
                ok(vec![to_value(&z)])
            }
        },
        Command::ExtractCj { q, t_grid } => ok(vec![to_value(&extract_cj(*q, t_grid)?)]),
        Command::Verify { suite, tol } => match suite {
            Suite::Identities { q_max } => suite_outcome(suites::identities_suite(*q_max)?, tol),
            Suite::Afe => suite_outcome(suites::afe_suite()?, tol),
            Suite::Estermann => suite_outcome(suites::estermann_suite()?, tol),
            Suite::Voronoi => suite_outcome(suites::voronoi_suite()?, tol),
            Suite::Bilinear => suite_outcome(suites::bilinear_suite()?, tol),
            Suite::Qdp { rows_csv } => {
                let (rep, rows) = suites::qdp_suite()?;
                if let Some(path) = rows_csv {
                    let rows: Vec<Value> = rows.iter().map(to_value).collect();
                    write_csv(&rows, &mut File::create(path)?)?;
                }
                suite_outcome(rep, tol)
            }
        },
        Command::Cache { action } => {
            let disk = DiskCache::new(cli.cache_dir.clone(), true);
            match action {
                CacheAction::Stats => ok(vec![to_value(&disk.stats()?)]),
                CacheAction::Clear => ok(vec![json!({ "removed_files": disk.clear()? })]),
            }
        }
    }
}

fn config(cli: &Cli) -> Value {
    let mut v = to_value(&cli.command);
    // unit variants serialize as bare strings
    if !v.is_object() {
        v = json!({ "command": v });
    }
    if let Value::Object(m) = &mut v {
        m.insert("threads".into(), to_value(&cli.threads));
        m.insert("use_cache".into(), (!cli.no_cache).into());
    }
    v
}

fn emit(cli: &Cli, report: &Report) -> io::Result<()> {
    match &cli.out {
        Some(path) => {
            let mut f = io::BufWriter::new(File::create(path)?);
            report.write(cli.output, &mut f)?;
            f.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            report.write(cli.output, &mut lock)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let disk = DiskCache::new(cli.cache_dir.clone(), !cli.no_cache);
    let start = Instant::now();
    let outcome = match dispatch(&cli, &disk) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    };
    let report = Report::new(command_name(&cli.command), config(&cli), outcome.results, start.elapsed().as_secs_f64());
    if let Err(e) = emit(&cli, &report) {
        eprintln!("error: writing report: {e}");
        return ExitCode::from(1);
    }
    match outcome.failure {
        Some(msg) => {
            eprintln!("FAIL {msg}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}
