//! `qaskey`: list, verify and evaluate the identity corpus, and dump the
//! limit scheme.
//!
//! Exit codes: 0 success, 1 counterexample found, 2 usage / parse / guard
//! errors and unknown ids, 3 sampling exhausted or time budget exceeded.

mod report;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qaskey::corpus::scheme::{power_ladder, scheme};
use qaskey::corpus::{lookup, registry, verify, Identity, SampleError, SamplePlan, VerificationReport};
use qaskey::expr::{eval_expr, parse_expr, Assignment};
use qaskey::polys::{eval_family, representations, FamilyId, FamilyPoint};
use qaskey::{ExactScalar, FloatScalar, Mode, Scalar};

use report::{Format, Meta};

#[derive(Parser, Debug)]
#[command(name = "qaskey", version, about = "Exact verification of q-series identities for the symmetric Askey-Wilson subfamilies")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
struct Config {
    /// Seed for point sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample points per identity.
    #[arg(long, global = true, default_value_t = 50)]
    trials: usize,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Degrees 0..=N are checked at every point.
    #[arg(long, global = true, default_value_t = 6)]
    n_max: u32,
    /// Sampled rationals p/r have |p|, r at most this.
    #[arg(long, global = true, default_value_t = 16)]
    height_bound: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Leave the timestamp and wall times out of reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Per-identity wall-time budget in seconds for `verify`.
    #[arg(long, global = true)]
    budget: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List registered identities, optionally filtered by a glob on the id.
    List { filter: Option<String> },
    /// Verify identities at sampled points (`all` for the whole registry).
    Verify {
        #[arg(required = true)]
        ids: Vec<String>,
    },
    /// Evaluate a family, a corpus member, or a DSL expression at a point.
    Eval(EvalArgs),
    /// Print the limit scheme as DOT, optionally checking every edge.
    Scheme {
        #[arg(long)]
        check_limits: bool,
        /// `2^lo..2^hi`, or a comma-separated list of rationals.
        #[arg(long, default_value = "2^10..2^20")]
        ladder: String,
    },
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Family name (e.g. `ASC`), member label (e.g. `cor4.3:r2`) or DSL expression.
    target: String,
    /// Family parameters, comma-separated (`1/3,1/5`).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    a: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q: String,
    #[arg(long, default_value_t = 0)]
    n: u32,
    /// 1-based representation index for families.
    #[arg(long)]
    rep: Option<usize>,
    /// Extra bindings `name=value` for members and expressions.
    #[arg(long = "param", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    params: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let cfg = &cli.config;
    let meta = Meta::new(cfg.no_timestamp);
    let mut out: Box<dyn Write> = match &cfg.output {
        Some(path) => Box::new(std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let code = match &cli.command {
        Command::List { filter } => cmd_list(filter.as_deref(), cfg, &meta, &mut out)?,
        Command::Verify { ids } => cmd_verify(ids, cfg, &meta, &mut out)?,
        Command::Eval(args) => cmd_eval(args, cfg, &meta, &mut out)?,
        Command::Scheme { check_limits, ladder } => cmd_scheme(*check_limits, ladder, cfg, &meta, &mut out)?,
    };
    out.flush()?;
    Ok(code)
}

// ---------------------------------------------------------------------------

fn cmd_list(filter: Option<&str>, cfg: &Config, meta: &Meta, out: &mut dyn Write) -> Result<u8> {
    let pattern = match filter {
        Some(f) => Some(glob::Pattern::new(f).with_context(|| format!("bad glob `{f}`"))?),
        None => None,
    };
    let idents: Vec<&Identity> =
        registry().iter().filter(|i| pattern.as_ref().map_or(true, |p| p.matches(&i.id))).collect();
    report::write_list(out, cfg.format, meta, &idents)?;
    Ok(0)
}

fn plan(cfg: &Config) -> SamplePlan {
    SamplePlan {
        seed: cfg.seed,
        trials: cfg.trials,
        n_values: (0..=cfg.n_max).collect(),
        height_bound: cfg.height_bound,
        budget: cfg.budget.map(Duration::from_secs_f64),
        ..SamplePlan::default()
    }
}

fn cmd_verify(ids: &[String], cfg: &Config, meta: &Meta, out: &mut dyn Write) -> Result<u8> {
    let idents: Vec<&Identity> = if ids.iter().any(|i| i == "all") {
        registry().iter().collect()
    } else {
        ids.iter().map(|id| lookup(id).with_context(|| format!("unknown identity `{id}`"))).collect::<Result<_>>()?
    };
    let start = Instant::now();
    let plan = plan(cfg);
    let mut reports: Vec<(&Identity, VerificationReport)> = Vec::new();
    let mut errors: Vec<(String, String)> = Vec::new();
    let mut code = 0u8;
    for ident in idents {
        match verify(ident, &plan, cfg.mode.into()) {
            Ok(mut r) => {
                if r.budget_exceeded() {
                    code = code.max(3);
                } else if !r.passed() {
                    code = code.max(1);
                }
                if meta.timestamp.is_none() {
                    r.wall_time = None;
                }
                reports.push((ident, r));
            }
            Err(e @ SampleError::SamplingExhausted { .. }) => {
                code = code.max(3);
                errors.push((ident.id.clone(), e.to_string()));
            }
            Err(e) => {
                code = code.max(2);
                errors.push((ident.id.clone(), e.to_string()));
            }
        }
    }
    let total = meta.timestamp.is_some().then(|| start.elapsed().as_secs_f64());
    report::write_verify(out, cfg.format, meta, &report::config_of(cfg, &plan), &reports, &errors, total)?;
    Ok(code)
}

// ---------------------------------------------------------------------------

fn parse_scalar(s: &str) -> Result<ExactScalar> {
    s.trim().parse::<ExactScalar>().with_context(|| format!("bad number `{s}` (expected p/r or p/r+s/t i)"))
}

fn cmd_eval(args: &EvalArgs, cfg: &Config, meta: &Meta, out: &mut dyn Write) -> Result<u8> {
    let mode: Mode = cfg.mode.into();
    let q = parse_scalar(&args.q)?;
    let z = args.z.as_deref().map(parse_scalar).transpose()?;
    let a: Vec<ExactScalar> = args.a.iter().map(|s| parse_scalar(s)).collect::<Result<_>>()?;
    let mut bindings: BTreeMap<String, ExactScalar> = BTreeMap::new();
    for p in &args.params {
        let (name, value) = p.split_once('=').with_context(|| format!("bad binding `{p}` (expected NAME=VALUE)"))?;
        bindings.insert(name.trim().to_string(), parse_scalar(value)?);
    }

    let (kind, label, value) = if let Ok(family) = args.target.parse::<FamilyId>() {
        let z = z.context("families need --z")?;
        let count = representations(family).len();
        let rep = match args.rep {
            Some(k) if k == 0 || k > count => bail!("--rep {k}: {family} has representations 1..={count}"),
            Some(k) => Some(k - 1),
            None => None,
        };
        let label = match rep {
            Some(k) => representations(family).get(k).map(|r| r.label.clone()).unwrap_or_default(),
            None => "first admissible".to_string(),
        };
        let value = match mode {
            Mode::Exact => eval_family(family, &FamilyPoint::new(a.clone(), z, q, args.n), rep)?.to_string(),
            Mode::Float => {
                let pt = FamilyPoint::new(a.iter().map(Scalar::to_float).collect(), z.to_float(), q.to_float(), args.n);
                eval_family::<FloatScalar>(family, &pt, rep)?.to_string()
            }
        };
        ("family", format!("{family} ({label})"), value)
    } else {
        let (kind, expr) = match qaskey::corpus::corpus().find_member(&args.target) {
            Some((_, m)) => ("member", m.expr.clone()),
            None => ("expression", parse_expr(&args.target).with_context(|| format!("parsing `{}`", args.target))?),
        };
        let mut assignment = Assignment::new(q.clone(), args.n);
        assignment.z = z.clone();
        match a.len() {
            0 => {}
            1 => assignment = assignment.with("a", a[0].clone()),
            _ => {
                for (i, v) in a.iter().enumerate() {
                    assignment = assignment.with(&format!("a{}", i + 1), v.clone());
                }
            }
        }
        for (name, v) in &bindings {
            assignment = assignment.with(name, v.clone());
        }
        let value = match mode {
            Mode::Exact if !expr.is_float_only() => eval_expr(&expr, &assignment)?.to_string(),
            _ => eval_expr(&expr, &assignment.to_float())?.to_string(),
        };
        (kind, args.target.clone(), value)
    };
    report::write_eval(out, cfg.format, meta, kind, &label, mode, &value)?;
    Ok(0)
}

// ---------------------------------------------------------------------------

fn parse_ladder(s: &str) -> Result<Vec<ExactScalar>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let exp = |t: &str| -> Result<u32> {
            let e = t.trim().strip_prefix("2^").with_context(|| format!("ladder bound `{t}` is not of the form 2^k"))?;
            e.parse::<u32>().with_context(|| format!("bad exponent in `{t}`"))
        };
        let (lo, hi) = (exp(lo)?, exp(hi)?);
        if lo > hi || hi > 62 {
            bail!("ladder 2^{lo}..2^{hi} must be increasing with exponents at most 62");
        }
        return Ok(power_ladder(lo, hi));
    }
    let rungs: Vec<ExactScalar> = s.split(',').map(parse_scalar).collect::<Result<_>>()?;
    if rungs.iter().any(Scalar::is_zero) {
        bail!("ladder rungs must be nonzero");
    }
    Ok(rungs)
}

fn cmd_scheme(check: bool, ladder: &str, cfg: &Config, meta: &Meta, out: &mut dyn Write) -> Result<u8> {
    let ladder = parse_ladder(ladder)?;
    let (graph, limits) = scheme(check, &ladder, cfg.seed);
    report::write_scheme(out, cfg.format, meta, &graph, limits.as_deref())?;
    Ok(0)
}
