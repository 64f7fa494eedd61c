//! `rcbound`: evaluate random-coding error probabilities, sweep rate curves
//! and run the oracle battery from the command line.

mod output;
mod validate;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rcbound::bounds::{evaluate, BoundRequest, ChannelSpec, Flag, Method};
use rcbound::kernel::EnsembleSize;
use rcbound::quadrature::QuadratureConfig;
use rcbound::ratesearch::{sweep, SearchConfig, SweepSpec};

use output::{BoundRow, CheckRow, Format, RateRow, RowWriter};
use validate::Suite;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "rcbound", version, about = "Exact random-coding error probability under minimum-distance decoding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, env = "RCBOUND_FORMAT", default_value = "csv")]
    format: Format,
    /// Write rows to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all available cores.
    #[arg(long, global = true, env = "RCBOUND_JOBS", default_value_t = 0)]
    jobs: usize,
    /// Relative tolerance of the Gaussian-channel quadrature.
    #[arg(long, global = true, env = "RCBOUND_REL_TOL", default_value_t = QuadratureConfig::default().rel_tol)]
    rel_tol: f64,
    /// Absolute tolerance of the Gaussian-channel quadrature.
    #[arg(long, global = true, env = "RCBOUND_ABS_TOL", default_value_t = QuadratureConfig::default().abs_tol)]
    abs_tol: f64,
    /// Probability mass dropped from each infinite tail.
    #[arg(long, global = true, env = "RCBOUND_TAIL_MASS", default_value_t = QuadratureConfig::default().tail_mass)]
    tail_mass: f64,
    /// Bisection depth limit per quadrature cell.
    #[arg(long, global = true, env = "RCBOUND_MAX_DEPTH", default_value_t = QuadratureConfig::default().max_depth)]
    max_depth: u32,
}

impl Common {
    fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_depth: self.max_depth,
            tail_mass: self.tail_mass,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one bound at a fixed blocklength and codebook size.
    Bound(BoundArgs),
    /// Largest rate meeting an error target, over a grid of blocklengths.
    Sweep(SweepArgs),
    /// Check closed forms against direct sums and codebook simulation.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ChannelKind {
    Bsc,
    Bec,
    Awgn,
}

#[derive(Args, Debug)]
struct ChannelArgs {
    #[arg(long, value_enum)]
    channel: ChannelKind,
    /// Crossover (bsc) or erasure (bec) probability.
    #[arg(long)]
    delta: Option<f64>,
    /// Linear signal-to-noise ratio (awgn).
    #[arg(long)]
    gamma: Option<f64>,
}

impl ChannelArgs {
    fn spec(&self) -> anyhow::Result<ChannelSpec> {
        let spec = match (self.channel, self.delta, self.gamma) {
            (ChannelKind::Bsc, Some(delta), None) => ChannelSpec::Bsc { delta },
            (ChannelKind::Bec, Some(delta), None) => ChannelSpec::Bec { delta },
            (ChannelKind::Awgn, None, Some(gamma)) => ChannelSpec::Awgn { gamma },
            (ChannelKind::Awgn, ..) => return Err(domain("the awgn channel takes --gamma and no --delta")),
            _ => return Err(domain("bsc and bec take --delta and no --gamma")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Blocklength.
    #[arg(long)]
    n: u32,
    /// Codebook size as log2 M; need not be an integer.
    #[arg(long, required_unless_present = "rate", conflicts_with = "rate")]
    log2m: Option<f64>,
    /// Rate in bits per channel use; sets log2 M = rate * n.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value = "rc", value_parser = parse_method)]
    method: Method,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Target error probability.
    #[arg(long)]
    epsilon: f64,
    /// Blocklengths: a comma list, or start:stop:step with stop included.
    #[arg(long, value_parser = parse_grid)]
    n_grid: Grid,
    /// Comma list of methods.
    #[arg(long, value_delimiter = ',', default_value = "rc", value_parser = parse_method)]
    methods: Vec<Method>,
    /// Final bracket width in bits per channel use.
    #[arg(long, env = "RCBOUND_RATE_TOL", default_value_t = SearchConfig::default().rate_tol)]
    rate_tol: f64,
    /// Round the final codebook size down to an integer.
    #[arg(long)]
    integer_m: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    /// Trials per simulation check.
    #[arg(long, env = "RCBOUND_TRIALS", default_value_t = 100_000)]
    trials: u64,
    /// Base seed; each check derives its own from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Debug)]
struct Grid(Vec<u32>);

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Method::ALL.iter().map(Method::name).collect();
        format!("unknown method {s:?}; expected one of {}", names.join(", "))
    })
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let num = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("bad blocklength {t:?}: {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(num).collect::<Result<_, _>>().map(Grid),
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step == 0 || start > stop {
                return Err(format!("range {s:?} needs start <= stop and a positive step"));
            }
            Ok(Grid((start..=stop).step_by(step as usize).collect()))
        }
        _ => Err(format!("grid {s:?} is neither a comma list nor start:stop:step")),
    }
}

fn domain(msg: &str) -> anyhow::Error {
    anyhow!(rcbound::Error::Domain(msg.to_string()))
}

fn sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn bound(args: &BoundArgs, common: &Common) -> anyhow::Result<u8> {
    let channel = args.channel.spec()?;
    let log2_m = match (args.log2m, args.rate) {
        (Some(l), _) => l,
        (None, Some(r)) => r * args.n as f64,
        (None, None) => bail!("one of --log2m or --rate is required"),
    };
    let req = BoundRequest { channel, n: args.n, m: EnsembleSize::new(log2_m)?, method: args.method };
    let result = evaluate(&req, &common.quadrature())?;
    RowWriter::new(common.format, sink(&common.out)?).write(&BoundRow::new(&req, &result))?;
    if result.flags.is_empty() {
        Ok(0)
    } else {
        let names: Vec<&str> = result.flags.iter().map(Flag::name).collect();
        eprintln!("warning: result carries flags: {}", names.join(", "));
        Ok(EXIT_NUMERICAL)
    }
}

fn rate_sweep(args: &SweepArgs, common: &Common) -> anyhow::Result<u8> {
    let channel = args.channel.spec()?;
    let spec = SweepSpec {
        channel,
        n_grid: args.n_grid.0.clone(),
        epsilon_target: args.epsilon,
        methods: args.methods.clone(),
        search: SearchConfig { rate_tol: args.rate_tol, integer_m: args.integer_m, quadrature: common.quadrature() },
    };
    let rows = sweep(&spec)?;
    let mut w = RowWriter::new(common.format, sink(&common.out)?);
    let mut code = 0;
    for r in &rows {
        w.write(&RateRow::new(&channel, args.epsilon, r))?;
        let numerical = r.flags.iter().any(|f| *f != Flag::NoFeasibleRate);
        if numerical {
            code = EXIT_NUMERICAL;
            let names: Vec<&str> = r.flags.iter().map(Flag::name).collect();
            eprintln!(
                "warning: n={} {}: {}{}",
                r.n,
                r.method,
                names.join(", "),
                r.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
            );
        }
    }
    Ok(code)
}

fn run_validate(args: &ValidateArgs, common: &Common) -> anyhow::Result<u8> {
    if args.trials == 0 {
        return Err(domain("--trials must be positive"));
    }
    let settings = validate::Settings { trials: args.trials, seed: args.seed, quadrature: common.quadrature() };
    let rows: Vec<CheckRow> = validate::run(args.suite, &settings)?;
    let mut w = RowWriter::new(common.format, sink(&common.out)?);
    let mut failed = 0;
    for r in &rows {
        w.write(r)?;
        if r.status != "pass" {
            failed += 1;
            eprintln!("FAIL {} {}: {:e} > {:e}", r.suite, r.check, r.discrepancy, r.tolerance);
        }
    }
    eprintln!("{} of {} checks passed", rows.len() - failed, rows.len());
    Ok(if failed == 0 { 0 } else { EXIT_CHECK_FAILED })
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<rcbound::Error>() {
        Some(rcbound::Error::Domain(_)) | Some(rcbound::Error::SizeExceeded(_)) => EXIT_DOMAIN,
        Some(_) => EXIT_NUMERICAL,
        // I/O and encoding failures.
        None => EXIT_DOMAIN,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.common.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_DOMAIN);
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Bound(a) => bound(a, &cli.common),
        Command::Sweep(a) => rate_sweep(a, &cli.common),
        Command::Validate(a) => run_validate(a, &cli.common),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
