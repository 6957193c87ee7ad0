//! `riesz-lab`: run the conjugate-function checkers from the shell.
//!
//! Each subcommand prints its report as JSON and exits with 0 (pass), 2 (fail),
//! 3 (inconclusive) or 1 (usage, configuration or hypothesis error). `suite`
//! runs a JSON config of checks concurrently and writes one report per check
//! plus `summary.csv`.

pub mod job;
pub mod output;
pub mod suite;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use riesz_lab::{DomainConfig, EngineKind, Result, Scheme};

use job::{config, CheckKind, Defaults, EngineConfig, FnRef, Job, JobSpec, PhiKind};
use output::{exit_code, reports_json, verdict, write_job};

#[derive(Debug, Parser)]
#[command(name = "riesz-lab", version, about = "Numerical checks of conjugate-function inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ||f||_p <= C_p ||Re f||_p over an exhaustion
    Riesz(RieszArgs),
    /// The Riesz inequality for pluriharmonic-measure norms
    RieszPs(RieszArgs),
    /// Uniform bound on the exponential integral of |f| for |Re f| <= 1
    Zygmund(ZygmundArgs),
    /// Growth of the log-denominator integral for the strip map
    ZygmundSharpness(SharpnessArgs),
    /// Kolmogorov-type bound for Re f > 0
    Kolmogorov(KolmogorovArgs),
    /// The Kolmogorov-type bound for pluriharmonic-measure norms
    KolmogorovPs(KolmogorovArgs),
    /// Poisson-Jensen identity on ball levels
    PoissonJensen(JensenArgs),
    /// Lelong-Jensen identity for the pluriharmonic measure
    LelongJensen(JensenArgs),
    /// Finite-difference plurisubharmonicity certificate
    Certificate(CertificateArgs),
    /// Empirical lower bounds on the best Riesz constant
    Sweep(SweepArgs),
    /// Run the checks of a JSON config
    Suite(SuiteArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Dilation,
    Green,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EngineArg {
    Exact,
    Wos,
}

#[derive(Debug, Args)]
pub struct DomainArgs {
    /// disc, ball:N, polydisc:N, annulus:R or a JSON object
    #[arg(long, default_value = "disc")]
    pub domain: String,
    /// Basepoint as re,im pairs
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub z0: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long)]
    pub walks: Option<usize>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub eps_shell: Option<f64>,
    /// Keep the starting node count fixed
    #[arg(long)]
    pub no_adaptive: bool,
}

#[derive(Debug, Args)]
pub struct LevelArgs {
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, env = "RIESZ_LAB_SEED")]
    pub seed: Option<u64>,
    /// Directory for report files
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RieszArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Function spec such as poly:0,1 or strip_exp:+,moebius_log
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long)]
    pub p: f64,
    /// Refuse f with Im f(z0) != 0 instead of subtracting it
    #[arg(long)]
    pub no_renormalize: bool,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ZygmundArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Function spec such as poly:0,1 or strip_exp:+,moebius_log
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Scaling radii r for r f on the r-dilation (ignored with --levels)
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long)]
    pub no_renormalize: bool,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SharpnessArgs {
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub log_power: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct KolmogorovArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Function spec such as poly:0,1 or strip_exp:+,moebius_log
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long)]
    pub no_renormalize: bool,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct JensenArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long = "fn", default_value = "poly:0,1")]
    pub function: String,
    /// phi = |f|^p or phi = Re f
    #[arg(long, value_enum, default_value = "abs-pow")]
    pub phi: PhiKind,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Volume quadrature size
    #[arg(long)]
    pub n_interior: Option<usize>,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CertificateArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Function spec such as poly:0,1 or strip_exp:+,moebius_log
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    /// Replace the multiplier p/(p-1)
    #[arg(long)]
    pub coefficient: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Battery member; repeat for each (default: the built-in battery)
    #[arg(long = "fn")]
    pub functions: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parse `disc`, `ball:2`, `polydisc:2`, `annulus:0.25` or a JSON object.
pub fn parse_domain(s: &str, z0: Option<&[f64]>) -> Result<DomainConfig> {
    let s = s.trim();
    let mut cfg: DomainConfig = if s.starts_with('{') {
        serde_json::from_str(s).map_err(|e| config(format!("domain: {e}")))?
    } else {
        let (kind, arg) = s.split_once(':').map_or((s, None), |(k, a)| (k, Some(a)));
        let arg = arg.map(str::trim);
        let mut c = DomainConfig { kind: kind.to_string(), n: None, r_inner: None, z0: None };
        match (kind, arg) {
            ("disc", None) => {}
            ("ball" | "polydisc", Some(a)) => {
                c.n = Some(a.parse().map_err(|_| config(format!("bad dimension in {s:?}")))?)
            }
            ("ball" | "polydisc", None) => c.n = Some(1),
            ("annulus", Some(a)) => {
                c.r_inner = Some(a.parse().map_err(|_| config(format!("bad inner radius in {s:?}")))?)
            }
            _ => return Err(config(format!("unknown domain {s:?}"))),
        }
        c
    };
    if let Some(z) = z0 {
        if z.len() % 2 != 0 {
            return Err(config("z0 needs re,im pairs"));
        }
        cfg.z0 = Some(z.chunks(2).map(|c| [c[0], c[1]]).collect());
    }
    Ok(cfg)
}

fn engine_config(a: &EngineArgs) -> EngineConfig {
    EngineConfig {
        kind: a.engine.map(|e| match e {
            EngineArg::Exact => EngineKind::Exact,
            EngineArg::Wos => EngineKind::Wos,
        }),
        nodes: a.nodes,
        adaptive: a.no_adaptive.then_some(false),
        walks: a.walks,
        eps_shell: a.eps_shell,
    }
}

fn apply_levels(spec: &mut JobSpec, l: &LevelArgs) {
    spec.levels = l.levels.clone();
    spec.scheme = l.scheme.map(|s| match s {
        SchemeArg::Dilation => Scheme::Dilation,
        SchemeArg::Green => Scheme::GreenSublevel,
    });
}

fn target(kind: CheckKind, d: &DomainArgs, f: Option<&str>) -> Result<JobSpec> {
    let mut s = JobSpec::new(kind.name(), kind);
    s.domain = Some(parse_domain(&d.domain, d.z0.as_deref())?);
    s.function = f.map(|f| FnRef::Text(f.to_string()));
    Ok(s)
}

/// The job behind a single-check subcommand, with its output flags.
fn single(cmd: Command) -> Result<(JobSpec, OutputArgs)> {
    Ok(match cmd {
        Command::Riesz(a) => riesz_job(CheckKind::Riesz, a)?,
        Command::RieszPs(a) => riesz_job(CheckKind::RieszPs, a)?,
        Command::Zygmund(a) => {
            let mut s = target(CheckKind::Zygmund, &a.domain, Some(&a.function))?;
            s.alpha = Some(a.alpha);
            s.radii = a.radii;
            s.renormalize = Some(!a.no_renormalize);
            apply_levels(&mut s, &a.levels);
            s.engine = Some(engine_config(&a.engine));
            (s, a.output)
        }
        Command::ZygmundSharpness(a) => {
            let mut s = JobSpec::new("zygmund-sharpness", CheckKind::ZygmundSharpness);
            s.radii = a.radii;
            s.log_power = Some(a.log_power);
            (s, a.output)
        }
        Command::Kolmogorov(a) => kolmogorov_job(CheckKind::Kolmogorov, a)?,
        Command::KolmogorovPs(a) => kolmogorov_job(CheckKind::KolmogorovPs, a)?,
        Command::PoissonJensen(a) => jensen_job(CheckKind::PoissonJensen, a)?,
        Command::LelongJensen(a) => jensen_job(CheckKind::LelongJensen, a)?,
        Command::Certificate(a) => {
            let mut s = target(CheckKind::Certificate, &a.domain, Some(&a.function))?;
            s.p = Some(a.p);
            s.tau = Some(a.tau);
            s.points = Some(a.points);
            s.h = Some(a.h);
            s.coefficient = a.coefficient;
            (s, a.output)
        }
        Command::Sweep(a) => {
            let mut s = target(CheckKind::Sweep, &a.domain, None)?;
            if !a.functions.is_empty() {
                s.battery = Some(a.functions.iter().map(|f| FnRef::Text(f.clone())).collect());
            }
            s.p_grid = a.p_grid;
            apply_levels(&mut s, &a.levels);
            s.engine = Some(engine_config(&a.engine));
            (s, a.output)
        }
        Command::Suite(_) => unreachable!("handled by run"),
    })
}

fn riesz_job(kind: CheckKind, a: RieszArgs) -> Result<(JobSpec, OutputArgs)> {
    let mut s = target(kind, &a.domain, Some(&a.function))?;
    s.p = Some(a.p);
    s.renormalize = Some(!a.no_renormalize);
    apply_levels(&mut s, &a.levels);
    s.engine = Some(engine_config(&a.engine));
    Ok((s, a.output))
}

fn kolmogorov_job(kind: CheckKind, a: KolmogorovArgs) -> Result<(JobSpec, OutputArgs)> {
    let mut s = target(kind, &a.domain, Some(&a.function))?;
    s.alpha = Some(a.alpha);
    s.renormalize = Some(!a.no_renormalize);
    apply_levels(&mut s, &a.levels);
    s.engine = Some(engine_config(&a.engine));
    Ok((s, a.output))
}

fn jensen_job(kind: CheckKind, a: JensenArgs) -> Result<(JobSpec, OutputArgs)> {
    let mut s = target(kind, &a.domain, Some(&a.function))?;
    s.phi = Some(a.phi);
    s.p = Some(a.p);
    s.n_interior = a.n_interior;
    apply_levels(&mut s, &a.levels);
    s.engine = Some(engine_config(&a.engine));
    Ok((s, a.output))
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    if jobs == Some(0) {
        return Err(config("--jobs must be positive"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| config(format!("thread pool: {e}")))
}

fn run_single(cmd: Command) -> Result<i32> {
    let (spec, out) = single(cmd)?;
    let job = Job::prepare(&spec, &Defaults::default(), out.seed.unwrap_or(0))?;
    let result = pool(out.jobs)?.install(|| job.run())?;
    if let Some(dir) = &out.out {
        write_job(dir, &spec.name, &result).map_err(|e| config(format!("writing to {}: {e}", dir.display())))?;
    }
    print!("{}", reports_json(&result.reports));
    Ok(exit_code(verdict(&result)))
}

fn run_suite(a: SuiteArgs) -> Result<i32> {
    let cfg = suite::SuiteConfig::load(&a.config)?;
    let seed = a.output.seed.or(cfg.seed).unwrap_or(0);
    let jobs = suite::prepare(&cfg, seed)?;
    let out = a.output.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("riesz-lab-out"));
    let threads = a.output.jobs.or(cfg.jobs).unwrap_or(0);
    if a.output.jobs == Some(0) {
        return Err(config("--jobs must be positive"));
    }
    suite::run(&jobs, &out, threads)
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Suite(a) => run_suite(a),
        other => run_single(other),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
