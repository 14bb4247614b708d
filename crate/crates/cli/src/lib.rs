//! `nilcube` command-line front end. [`run`] executes one subcommand and
//! returns the process exit code.
//!
//! Exit codes: 0 PASS or success, 1 FAIL, 2 INCONCLUSIVE, 3 configuration
//! error, 4 runtime error.

pub mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nilcube::cube_index::SideVector;
use nilcube::cube_struct::{
    complete_vertex_rotation, complete_vertex_search, generate_cube, rp_cube_witness, rp_witness_search, XPrime,
};
use nilcube::nilgroup::ReducedPoint;
use nilcube::nilseq_test::{certify, default_schedule, scan, Bounds, TestConfig, DEFAULT_RECORD_CAP};
use nilcube::sequences::{generate, proximality_profile, read_sequence, write_csv, write_jsonl, ComplexSequence};
use nilcube::uniformity::{
    check_dual_bound, check_duality, check_mean_bound, dual_function, seminorm, seminorm_power, CyclicFunction,
    DEFAULT_MAX_N,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment override of the cyclic-group size cap.
pub const MAX_N_ENV: &str = "NILCUBE_MAX_N";

/// `n_max` when neither flag nor spec gives one.
pub const DEFAULT_N_MAX: i64 = 100;

pub const DEFAULT_SEARCH_N_MAX: i64 = 1000;

pub const DEFAULT_HORIZON: i64 = 10_000;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

fn rt<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn conf<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "nilcube", version, about = "Nilsequences, dynamical cubes and finite-window nilsequence tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Generate a sequence and write it as JSONL (or CSV for a .csv path).
    Gen,
    /// Run the finite-window test over an (L, delta) schedule.
    Test,
    /// List the violations of one (L, delta) step.
    Violations,
    /// The uniformity seminorm of a function on Z/N.
    Seminorm,
    /// The dual function of a function on Z/N.
    Dual,
    /// Check the duality identity and the dual and mean bounds.
    DualityCheck,
    /// Regionally proximal witness searches for a pair (x, y).
    Rp,
    /// Generate a cube from a side vector, or complete one from `given` vertices.
    Cube,
    /// Proximality profile of a pair along the orbit.
    Profile,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Test => "test",
            Command::Violations => "violations",
            Command::Seminorm => "seminorm",
            Command::Dual => "dual",
            Command::DualityCheck => "duality-check",
            Command::Rp => "rp",
            Command::Cube => "cube",
            Command::Profile => "profile",
        }
    }
}

#[derive(Debug, Args)]
struct Flags {
    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Index range a:b of the generated sequence.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = config::parse_range)]
    range: Option<(i64, i64)>,
    /// Range a:b of base points k.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = config::parse_range)]
    k_range: Option<(i64, i64)>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sequence file (JSONL or CSV).
    #[arg(long, global = true)]
    seq: Option<PathBuf>,
    /// Function on Z/N as a JSON array of reals or of [re, im] pairs.
    #[arg(long = "fn", global = true)]
    function: Option<PathBuf>,
    #[arg(long, global = true)]
    d: Option<usize>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Window half-width L.
    #[arg(long, global = true)]
    l: Option<i64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    n_max: Option<i64>,
    #[arg(long, global = true)]
    horizon: Option<i64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

impl Flags {
    fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! over {
            ($($f:ident),*) => { $( if self.$f.is_some() { cfg.$f = self.$f.clone(); } )* };
        }
        over!(range, k_range, out, seq, function, d, eps, l, delta, n_max, horizon, threads, seed);
    }
}

/// Runs with the process's standard output and error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit report and diagnostic streams. `argv[0]` is the
/// program name.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = if code == 0 { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok((report, code)) => {
            let text = serde_json::to_string_pretty(&report).expect("reports serialise");
            if let Err(e) = writeln!(out, "{text}") {
                let _ = writeln!(err, "nilcube: {e}");
                return 4;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "nilcube: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(Value, i32), CliError> {
    let mut cfg = match &cli.flags.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| conf(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    let name = cli.command.name();
    if let Some(s) = &cfg.subcommand {
        if s != name {
            return Err(conf(format!("spec is for `{s}`, not `{name}`")));
        }
    }
    cfg.subcommand = Some(name.to_string());
    cli.flags.apply(&mut cfg);

    let pool = match cfg.threads {
        Some(0) => return Err(conf("--threads must be at least 1")),
        Some(k) => Some(rayon::ThreadPoolBuilder::new().num_threads(k).build().map_err(rt)?),
        None => None,
    };
    let mut go = || -> Result<(Value, i32), CliError> {
        let (result, code) = match cli.command {
            Command::Gen => cmd_gen(&mut cfg)?,
            Command::Test => cmd_test(&mut cfg)?,
            Command::Violations => cmd_violations(&mut cfg)?,
            Command::Seminorm => cmd_seminorm(&mut cfg)?,
            Command::Dual => cmd_dual(&mut cfg)?,
            Command::DualityCheck => cmd_duality_check(&mut cfg)?,
            Command::Rp => cmd_rp(&mut cfg)?,
            Command::Cube => cmd_cube(&mut cfg)?,
            Command::Profile => cmd_profile(&mut cfg)?,
        };
        Ok((json!({ "version": VERSION, "config": cfg, "result": result }), code))
    };
    match pool {
        Some(p) => p.install(go),
        None => go(),
    }
}

fn req<T: Clone>(v: &Option<T>, key: &str) -> Result<T, CliError> {
    RunConfig::require(v, key)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| rt(format!("{}: {e}", path.display())))
}

fn write_lines<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut w = create(path)?;
    for r in rows {
        serde_json::to_writer(&mut w, &r).map_err(rt)?;
        writeln!(w).map_err(rt)?;
    }
    w.flush().map_err(rt)
}

fn read_seq(path: &Path) -> Result<ComplexSequence, CliError> {
    let f = File::open(path).map_err(|e| conf(format!("{}: {e}", path.display())))?;
    read_sequence(BufReader::new(f)).map_err(|e| conf(format!("{}: {e}", path.display())))
}

fn cmd_gen(cfg: &mut RunConfig) -> Result<(Value, i32), CliError> {
    cfg.resolve_generator()?;
    let spec = cfg.generator_spec()?;
    let (from, to) = req(&cfg.range, "range")?;
    let path = req(&cfg.out, "out")?;
    let a = generate(&spec, from, to).map_err(rt)?;
    let w = create(&path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        write_csv(&a, w).map_err(rt)?;
    } else {
        write_jsonl(&a, w).map_err(rt)?;
    }
    let result = json!({
        "records": a.len(),
        "first": a.first(),
        "last": a.last(),
        "discontinuous_source": a.discontinuous_source(),
    });
    Ok((result, 0))
}

fn step_configs(cfg: &RunConfig, schedule: &[(i64, f64)]) -> Result<Vec<TestConfig>, CliError> {
    let d = req(&cfg.d, "d")?;
    let eps = req(&cfg.eps, "eps")?;
    let n_max = cfg.n_max.unwrap_or(DEFAULT_N_MAX);
    let k_range = cfg.k_range.unwrap_or((0, 0));
    let metric = cfg.metric.unwrap_or_default();
    let steps: Vec<TestConfig> =
        schedule.iter().map(|&(l, delta)| TestConfig { d, eps, l, delta, k_range, n_max, metric }).collect();
    for s in &steps {
        s.validate().map_err(conf)?;
    }
    Ok(steps)
}

/// Reads `--seq`, or generates over `range` (by default the `k_range`
/// widened by the largest reach). Fills `k_range` from the sequence when
/// absent.
fn tested_sequence(cfg: &mut RunConfig, steps: &[TestConfig]) -> Result<ComplexSequence, CliError> {
    let a = match &cfg.seq {
        Some(path) => read_seq(path)?,
        None => {
            cfg.resolve_generator()?;
            let spec = cfg.generator_spec()?;
            if cfg.range.is_none() {
                let (lo, hi) = cfg.k_range.ok_or_else(|| conf("missing `seq`, `range` or `k_range`"))?;
                let reach = steps.iter().map(TestConfig::reach).max().unwrap_or(0);
                cfg.range = Some((lo - reach, hi + reach));
            }
            let (from, to) = cfg.range.expect("set above");
            generate(&spec, from, to).map_err(rt)?
        }
    };
    cfg.k_range.get_or_insert((a.first(), a.last()));
    Ok(a)
}

fn bounds(cfg: &mut RunConfig) -> Bounds {
    Bounds {
        k_range: cfg.k_range.expect("resolved"),
        n_max: *cfg.n_max.get_or_insert(DEFAULT_N_MAX),
        metric: *cfg.metric.get_or_insert_with(Default::default),
        record_cap: *cfg.record_cap.get_or_insert(DEFAULT_RECORD_CAP),
    }
}

#[derive(Serialize, Deserialize)]
struct ViolationLine {
    step: usize,
    l: i64,
    delta: f64,
    k: i64,
    n: SideVector,
    defect: f64,
}

fn cmd_test(cfg: &mut RunConfig) -> Result<(Value, i32), CliError> {
    let schedule = cfg.schedule.get_or_insert_with(default_schedule).clone();
    let steps = step_configs(cfg, &schedule)?;
    let a = tested_sequence(cfg, &steps)?;
    let b = bounds(cfg);
    let cert = certify(&a, steps[0].d, steps[0].eps, &schedule, &b).map_err(rt)?;
    if let Some(path) = &cfg.out {
        let rows = cert.steps.iter().enumerate().flat_map(|(i, s)| {
            s.violations.iter().map(move |v| ViolationLine {
                step: i,
                l: s.l,
                delta: s.delta,
                k: v.k,
                n: v.n.clone(),
                defect: v.defect,
            })
        });
        write_lines(path, rows)?;
    }
    let code = cert.outcome.exit_code();
    let search_space = cert.search_space();
    let mut result = serde_json::to_value(&cert).map_err(rt)?;
    result["search_space"] = json!(search_space);
    Ok((result, code))
}

fn cmd_violations(cfg: &mut RunConfig) -> Result<(Value, i32), CliError> {
    let (l0, delta0) = default_schedule()[0];
    let l = *cfg.l.get_or_insert(l0);
    let delta = *cfg.delta.get_or_insert(delta0);
    let steps = step_configs(cfg, &[(l, delta)])?;
    let a = tested_sequence(cfg, &steps)?;
    let b = bounds(cfg);
    let tc = TestConfig { k_range: b.k_range, n_max: b.n_max, metric: b.metric, ..steps[0].clone() };
    let result = match scan(&a, &tc, b.record_cap).map_err(rt)? {
        None => json!({ "excluded": true, "summary": null, "violations": [] }),
        Some((violations, summary)) => match &cfg.out {
            Some(path) => {
                write_lines(path, &violations)?;
                json!({ "excluded": false, "summary": summary, "recorded": violations.len() })
            }
            None => json!({ "excluded": false, "summary": summary, "violations": violations }),
        },
    };
    Ok((result, 0))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FunctionFile {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

fn max_n(cfg: &mut RunConfig) -> Result<usize, CliError> {
    let cap = match std::env::var(MAX_N_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|e| conf(format!("{MAX_N_ENV}={v}: {e}")))?,
        Err(std::env::VarError::NotPresent) => DEFAULT_MAX_N,
        Err(e) => return Err(conf(format!("{MAX_N_ENV}: {e}"))),
    };
    cfg.max_n = Some(cap);
    Ok(cap)
}

fn load_function(cfg: &mut RunConfig) -> Result<(CyclicFunction, usize), CliError> {
    let cap = max_n(cfg)?;
    let d = req(&cfg.d, "d")?;
    let path = req(&cfg.function, "fn")?;
    let text = std::fs::read_to_string(&path).map_err(|e| conf(format!("{}: {e}", path.display())))?;
    let parsed: FunctionFile = serde_json::from_str(&text)
        .map_err(|_| conf(format!("{}: expected an array of reals or [re, im] pairs", path.display())))?;
    let values = match parsed {
        FunctionFile::Real(v) => v.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        FunctionFile::Complex(v) => v,
    };
    // Exceeding the cap is a runtime refusal; everything else is bad input.
    let f = CyclicFunction::with_cap(values, cap).map_err(|e| match e {
        nilcube::Error::ModulusCap { .. } => rt(e),
        _ => conf(e),
    })?;
    if d == 0 || d > nilcube::cube_index::MAX_DIM {
        return Err(conf(format!("d = {d} out of range")));
    }
    Ok((f, d))
}

fn cmd_seminorm(cfg: &mut RunConfig) -> Result<(Value, i32), CliError> {
    let (f, d) = load_function(cfg)?;
    let power = seminorm_power(&f, d).map_err(rt)?;
    let value = seminorm(&f, d).map_err(rt)?;
    Ok((json!({ "N": f.modulus(), "d": d, "value": value, "power": power }), 0))
}

fn cmd_dual(cfg: &mut RunConfig) -> Result<(Value, i32), CliError> {
    let (f, d) = load_function(cfg)?;
    let df = dual_function(&f, d).map_err(rt)?;
    let mut result = json!({ "N": f.modulus(), "d": d });
    match &cfg.out {
        Some(path) => {
            let rows = df.values().iter().enumerate().map(|(x, v)| json!({ "x": x, "re": v.re, "im": v.im }));
            write_lines(path, rows)?;
        }
        None => result["values"] = serde_json::to_value(&df).map_err(rt)?,
    }
    Ok((result, 0))
}

fn cmd_duality_check(cfg: &mut RunConfig) -> Result<(Value, i32), CliError> {
    let (f, d) = load_function(cfg)?;
    let reports = vec![
        check_duality(&f, d).map_err(rt)?,
        check_dual_bound(&f, d).map_err(rt)?,
        check_mean_bound(&f, d).map_err(rt)?,
    ];
    let all = reports.iter().all(|r| r.pass);
    Ok((json!({ "pass": all, "checks": reports }), if all { 0 } else { 4 }))
}

fn pair(cfg: &RunConfig) -> Result<(nilcube::nilgroup::NilSystem, ReducedPoint, ReducedPoint), CliError> {
    let sys = cfg.system()?;
    let x = cfg.point(&sys, &req(&cfg.x, "x")?)?;
    let y = cfg.point(&sys, &req(&cfg.y, "y")?)?;
    Ok((sys, x, y))
}

fn cmd_rp(cfg: &mut RunConfig) -> Result<(Value, i32), CliError> {
    let (sys, x, y) = pair(cfg)?;
    let d = req(&cfg.d, "d")?;
    let delta = req(&cfg.delta, "delta")?;
    let nmax = *cfg.n_max.get_or_insert(DEFAULT_SEARCH_N_MAX);
    let mode = *cfg.mode.get_or_insert(XPrime::Orbit);
    let w = rp_witness_search(&sys, &x, &y, d, delta, nmax, mode).map_err(rt)?;
    let c = rp_cube_witness(&sys, &x, &y, d, delta, nmax).map_err(rt)?;
    Ok((json!({ "witness": w, "cube_witness": c }), 0))
}

fn cmd_cube(cfg: &mut RunConfig) -> Result<(Value, i32), CliError> {
    let sys = cfg.system()?;
    match cfg.given.clone() {
        None => {
            let side = SideVector::new(req(&cfg.side, "side` or `given")?);
            let start = cfg.start.get_or_insert_with(|| ReducedPoint::origin(sys.size()).coords().to_vec()).clone();
            let x = cfg.point(&sys, &start)?;
            let cube = generate_cube(&sys, &x, &side).map_err(rt)?;
            Ok((json!({ "cube": cube, "exponents": side.vertex_sums() }), 0))
        }
        Some(given) => {
            let d = req(&cfg.d, "d")?;
            let pts = given.iter().map(|c| cfg.point(&sys, c)).collect::<Result<Vec<_>, _>>()?;
            if sys.size() == 2 {
                let p = complete_vertex_rotation(&sys, &pts, d).map_err(rt)?;
                Ok((json!({ "method": "exact", "point": p }), 0))
            } else {
                let delta = req(&cfg.delta, "delta")?;
                let nmax = *cfg.n_max.get_or_insert(DEFAULT_N_MAX);
                let c = complete_vertex_search(&sys, &pts, d, delta, nmax).map_err(rt)?;
                Ok((json!({ "method": "search", "completion": c }), 0))
            }
        }
    }
}

fn cmd_profile(cfg: &mut RunConfig) -> Result<(Value, i32), CliError> {
    let (sys, x, y) = pair(cfg)?;
    let horizon = *cfg.horizon.get_or_insert(DEFAULT_HORIZON);
    let p = proximality_profile(&sys, &x, &y, horizon).map_err(rt)?;
    Ok((serde_json::to_value(p).map_err(rt)?, 0))
}
