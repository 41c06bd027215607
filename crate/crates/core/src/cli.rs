//! The `ctmax` command line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use crate::cnf::dimacs::{write_dimacs, write_wcnf};
use crate::encode::{
    apply_symmetry, build_can_wcnf, build_combined_wcnf, build_mcac_scoped, build_ratio, build_tn_wcnf,
    write_var_map, EncodingVariant, TupleScope, WeightScheme,
};
use crate::opt::{
    incremental_its, solve_can_pipeline, solve_tn_pipeline, tn_sweep, Budget, CanAlgo, CanOptions, ItsOptions,
    ItsStep, MaxSatAlgo, OptimizerResult, TnOptions, TnResult,
};
use crate::sut::{parse_model, SutModel};
use crate::tuples::{build_catalog, compute_bounds, dummy_test};
use crate::verify::{read_suite_csv, verify_suite, write_suite_csv};
use crate::Error;

#[derive(Parser, Debug)]
#[command(name = "ctmax", version, about = "Minimum covering arrays and maximum-coverage test suites via SAT/MaxSAT")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tuple counts, lower bound, and a greedy upper bound.
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Write the greedy suite (the upper-bound witness) as CSV.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write an encoding as DIMACS CNF (mcac) or WCNF, plus a variable map.
    Encode(EncodeArgs),
    /// Minimum covering array.
    Can(CanArgs),
    /// Most tuples covered by N tests, for one N or a sweep.
    Tn(TnArgs),
    /// Incremental test-suite construction.
    Its(ItsArgs),
    /// Check a suite CSV against the model.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        suite: PathBuf,
        /// Exit with status 1 unless the suite is a full covering array.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Args, Debug)]
pub struct Common {
    /// SUT model file.
    #[arg(short, long)]
    pub model: PathBuf,
    /// Strength.
    #[arg(short, default_value_t = 2)]
    pub t: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct Limits {
    /// Seconds per solver call.
    #[arg(long, default_value_t = 60.0)]
    pub per_call: f64,
    /// Seconds for the whole run.
    #[arg(long, env = "CTMAX_BUDGET_S", default_value_t = 600.0)]
    pub budget: f64,
}

impl Limits {
    fn per_call(&self) -> Result<Option<Duration>, Error> {
        secs(self.per_call)
    }

    fn global(&self) -> Result<Option<Duration>, Error> {
        secs(self.budget)
    }
}

fn secs(s: f64) -> Result<Option<Duration>, Error> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::Invalid(format!("time limit {s} must be non-negative")));
    }
    Ok(if s == 0.0 || s.is_infinite() { None } else { Some(Duration::from_secs_f64(s)) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Problem {
    Mcac,
    Can,
    Tn,
    Combined,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scope {
    Allowed,
    All,
}

impl From<Scope> for TupleScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::Allowed => TupleScope::Allowed,
            Scope::All => TupleScope::All,
        }
    }
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = Problem::Can)]
    pub problem: Problem,
    /// Encoding: cx, ccx-a0, ccx-a1, ccx-a2. Defaults to ccx-a2 for tn, ccx-a0 otherwise.
    #[arg(long)]
    pub variant: Option<EncodingVariant>,
    #[arg(long, default_value = "unit")]
    pub weights: WeightScheme,
    /// Fix unused tests to a dummy test.
    #[arg(long)]
    pub nux: bool,
    /// Skip fixed-tuple symmetry breaking (mcac and can).
    #[arg(long)]
    pub no_symmetry: bool,
    /// Number of tests; defaults to the greedy upper bound (required for tn).
    #[arg(short = 'N', long = "tests")]
    pub n: Option<usize>,
    /// Coverage ratio for the ratio problem.
    #[arg(long)]
    pub rt: Option<f64>,
    #[arg(long, value_enum, default_value_t = Scope::Allowed)]
    pub scope: Scope,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Variable map path; defaults to the output path plus `.map`.
    #[arg(long)]
    pub map: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CanArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub limits: Limits,
    #[arg(long, default_value = "calot")]
    pub algo: CanAlgo,
    #[arg(long, default_value = "ccx-a0")]
    pub variant: EncodingVariant,
    #[arg(long, default_value = "unit")]
    pub weights: WeightScheme,
    #[arg(long)]
    pub nux: bool,
    #[arg(long)]
    pub no_symmetry: bool,
    /// Encode this many tests when it exceeds the greedy bound.
    #[arg(long)]
    pub initial_ub: Option<usize>,
    /// Run this many consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Suite CSV of the best run.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Result rows CSV.
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Instance name for result rows; defaults to the model file stem.
    #[arg(long)]
    pub instance: Option<String>,
}

#[derive(Args, Debug)]
pub struct TnArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub limits: Limits,
    #[arg(short = 'N', long = "tests", conflicts_with = "sweep")]
    pub n: Option<usize>,
    /// Range `lo..hi`, inclusive.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, default_value = "linear")]
    pub algo: MaxSatAlgo,
    #[arg(long, default_value = "ccx-a2")]
    pub variant: EncodingVariant,
    #[arg(long, value_enum, default_value_t = Scope::Allowed)]
    pub scope: Scope,
    /// Suite CSV (single N only).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Sweep rows `N,covered,allowed,ratio,time_s`; stdout when absent.
    #[arg(long)]
    pub results: Option<PathBuf>,
    /// Coverage curve rows `N,covered,ratio`.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ItsArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub limits: Limits,
    #[arg(short = 'N', long = "tests")]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub ni: usize,
    #[arg(long, default_value = "maxsat")]
    pub step: ItsStep,
    /// Seconds per maxsat step.
    #[arg(long, default_value_t = 100.0)]
    pub per_iteration: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit code: 0 success, 1 infeasible or invalid input, 2 usage.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    match run(cli.command, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invalid(_) | Error::Strength { .. } => 2,
        _ => 1,
    }
}

pub fn run(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    match cmd {
        Command::Bounds { common, output } => bounds(&common, output.as_deref(), out),
        Command::Encode(a) => encode(&a, out),
        Command::Can(a) => can(&a, out),
        Command::Tn(a) => tn(&a, out),
        Command::Its(a) => its(&a, out),
        Command::Verify { common, suite, strict } => verify(&common, &suite, strict, out, err),
    }
}

fn load_model(path: &Path) -> Result<SutModel, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(parse_model(&text)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn bounds(common: &Common, output: Option<&Path>, out: &mut dyn Write) -> Result<i32, Error> {
    let model = load_model(&common.model)?;
    let catalog = build_catalog(&model, common.t)?;
    let b = compute_bounds(&model, &catalog, common.seed)?;
    writeln!(
        out,
        "lb={} ub={} tuples={} allowed={} forbidden={}",
        b.lb,
        b.ub,
        catalog.len(),
        catalog.allowed_ids().len(),
        catalog.forbidden_ids().len()
    )?;
    if let Some(p) = output {
        write_suite_csv(&model, &b.ub_witness, create(p)?)?;
    }
    Ok(0)
}

fn encode(a: &EncodeArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let model = load_model(&a.common.model)?;
    let catalog = build_catalog(&model, a.common.t)?;
    let b = compute_bounds(&model, &catalog, a.common.seed)?;
    let variant = a.variant.unwrap_or(if a.problem == Problem::Tn {
        EncodingVariant::CcxA2
    } else {
        EncodingVariant::CcxA0
    });
    let n = match (a.problem, a.n) {
        (_, Some(n)) => n,
        (Problem::Tn, None) => return Err(Error::Invalid("--problem tn needs -N".into())),
        (_, None) => b.ub,
    };
    let scope = if matches!(a.problem, Problem::Tn) { a.scope.into() } else { TupleScope::Allowed };
    let mut ctx = build_mcac_scoped(&model, &catalog, n, variant, scope)?;
    let symmetric = !a.no_symmetry && matches!(a.problem, Problem::Mcac | Problem::Can);
    if symmetric {
        apply_symmetry(&mut ctx, &catalog, &b.lb_witness.witness)?;
    }
    let mut sink = create(&a.output)?;
    match a.problem {
        Problem::Mcac => {
            let cnf = ctx.sat_cnf();
            write_dimacs(&cnf, &mut sink)?;
            writeln!(out, "vars={} clauses={}", cnf.num_vars, cnf.clauses.len())?;
        }
        p => {
            let wcnf = match p {
                Problem::Can => {
                    ctx.set_lb(b.lb);
                    let dummy = if a.nux { Some(dummy_test(&model, a.common.seed)?) } else { None };
                    build_can_wcnf(&mut ctx, a.weights, dummy.as_ref())?
                }
                Problem::Tn => build_tn_wcnf(&mut ctx)?,
                Problem::Combined => {
                    ctx.set_lb(b.lb);
                    build_combined_wcnf(&mut ctx, a.weights)?
                }
                Problem::Ratio => {
                    let rt = a.rt.ok_or_else(|| Error::Invalid("--problem ratio needs --rt".into()))?;
                    build_ratio(&mut ctx, rt)?
                }
                Problem::Mcac => unreachable!(),
            };
            write_wcnf(&wcnf, &mut sink)?;
            writeln!(
                out,
                "vars={} hard={} soft={} top={} lb={} n={}",
                wcnf.num_vars,
                wcnf.hard.len(),
                wcnf.soft.len(),
                wcnf.top(),
                b.lb,
                n
            )?;
        }
    }
    sink.flush()?;
    let map_path = a.map.clone().unwrap_or_else(|| {
        let mut s = a.output.clone().into_os_string();
        s.push(".map");
        PathBuf::from(s)
    });
    let mut map = create(&map_path)?;
    write_var_map(&ctx, &model, &catalog, &mut map)?;
    map.flush()?;
    Ok(0)
}

struct SeedRun {
    seed: u64,
    result: OptimizerResult,
    time_s: f64,
}

fn can(a: &CanArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let model = load_model(&a.common.model)?;
    if a.seeds == 0 {
        return Err(Error::Invalid("--seeds must be at least 1".into()));
    }
    let base = CanOptions {
        algo: a.algo,
        variant: a.variant,
        weights: a.weights,
        nux: a.nux,
        symmetry: !a.no_symmetry,
        seed: a.common.seed,
        per_call: a.limits.per_call()?,
        global: a.limits.global()?,
        initial_ub: a.initial_ub,
    };
    let seeds: Vec<u64> = (0..a.seeds).map(|k| a.common.seed + k).collect();
    let runs: Vec<Result<SeedRun, Error>> = std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let (model, mut opts) = (&model, base.clone());
                opts.seed = seed;
                s.spawn(move || {
                    let start = Instant::now();
                    let result = solve_can_pipeline(model, a.common.t, &opts)?;
                    Ok(SeedRun { seed, result, time_s: start.elapsed().as_secs_f64() })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("seed worker panicked")).collect()
    });
    let runs: Vec<SeedRun> = runs.into_iter().collect::<Result<_, _>>()?;

    let instance = a.instance.clone().unwrap_or_else(|| stem(&a.common.model));
    for r in &runs {
        if runs.len() > 1 {
            write!(out, "seed={} ", r.seed)?;
        }
        writeln!(out, "best={} certified={}", r.result.best, r.result.certified)?;
    }
    let best = runs.iter().min_by_key(|r| (r.result.best, !r.result.certified)).unwrap();
    if let Some(p) = &a.output {
        write_suite_csv(&model, &best.result.suite, create(p)?)?;
    }
    if let Some(p) = &a.results {
        let mut w = csv::Writer::from_writer(create(p)?);
        w.write_record(["instance", "algo", "encoding", "weights", "seed", "best", "certified", "time_s"])?;
        let enc = a.variant.to_string();
        let wts = a.weights.to_string();
        for r in &runs {
            w.write_record([
                instance.as_str(),
                &a.algo.to_string(),
                &enc,
                &wts,
                &r.seed.to_string(),
                &r.result.best.to_string(),
                &r.result.certified.to_string(),
                &format!("{:.3}", r.time_s),
            ])?;
        }
        if runs.len() > 1 {
            let k = runs.len() as f64;
            let mean_best = runs.iter().map(|r| r.result.best as f64).sum::<f64>() / k;
            let mean_time = runs.iter().map(|r| r.time_s).sum::<f64>() / k;
            w.write_record([
                instance.as_str(),
                &a.algo.to_string(),
                &enc,
                &wts,
                "mean",
                &format!("{mean_best:.2}"),
                &runs.iter().all(|r| r.result.certified).to_string(),
                &format!("{mean_time:.3}"),
            ])?;
        }
        w.flush()?;
    }
    Ok(0)
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned())
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>, Error> {
    let bad = || Error::Invalid(format!("sweep '{s}' is not of the form lo..hi"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if lo < 1 || hi < lo {
        return Err(Error::Invalid(format!("sweep '{s}' needs 1 <= lo <= hi")));
    }
    Ok(lo..=hi)
}

fn tn(a: &TnArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let model = load_model(&a.common.model)?;
    let opts = TnOptions {
        algo: a.algo,
        variant: a.variant,
        scope: a.scope.into(),
        seed: a.common.seed,
        per_call: a.limits.per_call()?,
        global: a.limits.global()?,
    };
    match (&a.sweep, a.n) {
        (None, Some(n)) => {
            let r = solve_tn_pipeline(&model, a.common.t, n, &opts)?;
            writeln!(
                out,
                "N={} covered={} allowed={} ratio={:?} certified={}",
                r.n,
                r.covered,
                r.allowed,
                r.ratio(),
                r.certified
            )?;
            if let Some(p) = &a.output {
                write_suite_csv(&model, &r.suite, create(p)?)?;
            }
            Ok(0)
        }
        (Some(range), None) => {
            let rows = tn_sweep(&model, a.common.t, parse_range(range)?, &opts)?;
            match &a.results {
                Some(p) => write_sweep(&rows, create(p)?)?,
                None => write_sweep(&rows, &mut *out)?,
            }
            if let Some(p) = &a.curve {
                export_curve(&rows, create(p)?)?;
            }
            Ok(0)
        }
        _ => Err(Error::Invalid("tn needs exactly one of -N or --sweep".into())),
    }
}

fn write_sweep<W: Write>(rows: &[TnResult], sink: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["N", "covered", "allowed", "ratio", "time_s"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.covered.to_string(),
            r.allowed.to_string(),
            format!("{:.6}", r.ratio()),
            format!("{:.3}", r.time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Coverage curve rows `N,covered,ratio`. `covered` is made monotone: a
/// suite of N tests can always be extended by one more test, so a sweep
/// point below its predecessor (possible only for timed-out solves)
/// inherits the predecessor's count.
pub fn export_curve<W: Write>(rows: &[TnResult], sink: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["N", "covered", "ratio"])?;
    let mut running = 0;
    for r in rows {
        running = running.max(r.covered);
        let ratio = if r.allowed == 0 { 1.0 } else { running as f64 / r.allowed as f64 };
        w.write_record([r.n.to_string(), running.to_string(), format!("{ratio:.6}")])?;
    }
    w.flush()?;
    Ok(())
}

fn its(a: &ItsArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let model = load_model(&a.common.model)?;
    let catalog = build_catalog(&model, a.common.t)?;
    let opts = ItsOptions {
        n: a.n,
        ni: a.ni,
        step: a.step,
        seed: a.common.seed,
        per_iteration: secs(a.per_iteration)?,
    };
    let budget = Budget::new(a.limits.per_call()?, a.limits.global()?);
    let suite = incremental_its(&model, &catalog, &opts, &budget)?;
    let r = verify_suite(&model, &catalog, &suite);
    writeln!(out, "tests={} covered={} allowed={} ratio={:?}", suite.len(), r.covered.len(), r.allowed, r.ratio)?;
    if let Some(p) = &a.output {
        write_suite_csv(&model, &suite, create(p)?)?;
    }
    Ok(0)
}

#[derive(serde::Serialize)]
struct TestLine<'a> {
    test: usize,
    valid: bool,
    values: Vec<&'a str>,
}

#[derive(serde::Serialize)]
struct SummaryLine {
    suite_size: usize,
    all_valid: bool,
    covered: usize,
    allowed: usize,
    ratio: f64,
    missing: Vec<String>,
}

fn verify(common: &Common, suite: &Path, strict: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let model = load_model(&common.model)?;
    let catalog = build_catalog(&model, common.t)?;
    let tests = read_suite_csv(&model, File::open(suite)?)?;
    let r = verify_suite(&model, &catalog, &tests);
    for (i, t) in tests.iter().enumerate() {
        let line = TestLine { test: i + 1, valid: r.valid[i], values: model.test_labels(t) };
        writeln!(out, "{}", serde_json::to_string(&line).expect("serializable"))?;
    }
    let summary = SummaryLine {
        suite_size: r.suite_size,
        all_valid: r.all_valid(),
        covered: r.covered.len(),
        allowed: r.allowed,
        ratio: r.ratio,
        missing: r.missing.iter().map(|&id| model.tuple_label(catalog.tuple(id))).collect(),
    };
    writeln!(out, "{}", serde_json::to_string(&summary).expect("serializable"))?;
    writeln!(err, "covered={} allowed={} ratio={:?}", r.covered.len(), r.allowed, r.ratio)?;
    Ok(if strict && !r.is_covering_array() { 1 } else { 0 })
}
