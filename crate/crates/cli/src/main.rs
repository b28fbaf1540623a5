use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use relay_sg::config::Scenario;
use relay_sg::error::Error as CoreError;
use relay_sg::model::Scheme;
use relay_sg::simulate::{self, McConfig};
use relay_sg::sweep::{self, McSettings, Spacing, SweepSpec, SweepVar, Table};
use relay_sg::validate::{self, ValidateOptions};

/// Outage and capacity of cooperative relay reception in random networks.
#[derive(Parser, Debug)]
#[command(name = "relay-sg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Scenario file of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one scenario key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Range {
    #[arg(long)]
    min: Option<f64>,
    #[arg(long)]
    max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    spacing: Option<SpacingArg>,
    /// Monte Carlo trials per point; 0 leaves the MC columns out.
    #[arg(long, default_value_t = 0)]
    trials: u64,
    /// Outer radius of the simulated disc sector in metres (automatic when absent).
    #[arg(long)]
    r_max: Option<f64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SpacingArg {
    Linear,
    Log,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq)]
enum SweepArg {
    Lambda,
    TxSnr,
    Threshold,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Outage against density, transmit SNR or threshold.
    Outage {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        #[arg(long, value_enum, default_value = "lambda")]
        sweep: SweepArg,
        /// Comma-separated schemes: coherent, incoherent, random_qN.
        #[arg(long, default_value = "coherent,incoherent")]
        schemes: String,
    },
    /// Outage against bandwidth with the tap profile rebuilt per point.
    Bandwidth {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        #[arg(long, default_value = "coherent,incoherent")]
        schemes: String,
    },
    /// Coherent, incoherent and random-code outage on a flat channel.
    Schemes {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        #[arg(long, value_enum, default_value = "lambda")]
        sweep: SweepArg,
        /// Comma-separated channel counts Q.
        #[arg(long, default_value = "2,4,8")]
        channels: String,
    },
    /// Ergodic capacity in bits/s/Hz against density.
    Capacity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        #[arg(long, default_value = "coherent,incoherent")]
        schemes: String,
    },
    /// Per-trial received SNRs as `trial snr` lines.
    Snrs {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value = "coherent")]
        scheme: String,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Run every analytic result against its oracle.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Trials for every Monte Carlo check instead of the stated counts.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn parse_scheme(s: &str) -> Result<Scheme> {
    let s = s.trim();
    match s {
        "coherent" | "coh" => Ok(Scheme::Coherent),
        "incoherent" | "inc" => Ok(Scheme::Incoherent),
        _ => {
            let q = s
                .strip_prefix("random_q")
                .or_else(|| s.strip_prefix('q'))
                .and_then(|q| q.parse::<u32>().ok())
                .filter(|q| *q > 0)
                .ok_or_else(|| anyhow!("config key `schemes`: unknown scheme `{s}`"))?;
            Ok(Scheme::Random { channels: q })
        }
    }
}

fn parse_schemes(list: &str) -> Result<Vec<Scheme>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(parse_scheme).collect()
}

fn parse_channels(list: &str) -> Result<Vec<u32>> {
    list.split(',')
        .map(|q| {
            q.trim()
                .parse::<u32>()
                .map_err(|_| anyhow!("config key `channels`: `{q}` is not a channel count"))
        })
        .collect()
}

fn scenario(common: &Common) -> Result<(Scenario, Vec<String>)> {
    let mut scn = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Scenario::parse(&text)?
        }
        None => Scenario::default(),
    };
    let mut keys = Vec::new();
    for pair in &common.set {
        scn.set_pair(pair)?;
        if let Some((k, _)) = pair.split_once('=') {
            keys.push(k.trim().to_string());
        }
    }
    Ok((scn, keys))
}

fn spec(common: &Common, range: &Range, variable: SweepVar) -> Result<SweepSpec> {
    let (min, max, points, spacing) = match variable {
        SweepVar::Density => (1e-4, 1e-2, 21, Spacing::Log),
        SweepVar::Bandwidth => (1e6, 1e8, 41, Spacing::Log),
        SweepVar::TxSnr => (-10.0, 20.0, 31, Spacing::Linear),
        SweepVar::Threshold => (-130.0, -90.0, 41, Spacing::Linear),
    };
    let (scn, overrides) = scenario(common)?;
    let mut spec = SweepSpec::new(
        variable,
        range.min.unwrap_or(min),
        range.max.unwrap_or(max),
        range.points.unwrap_or(points),
        match range.spacing {
            Some(SpacingArg::Linear) => Spacing::Linear,
            Some(SpacingArg::Log) => Spacing::Log,
            None => spacing,
        },
    );
    spec.scenario = scn;
    spec.overrides = overrides;
    if range.trials > 0 {
        let mut mc = McSettings::new(range.trials, common.seed);
        mc.r_max = range.r_max;
        spec.mc = Some(mc);
    }
    Ok(spec)
}

fn sweep_var(arg: SweepArg) -> SweepVar {
    match arg {
        SweepArg::Lambda => SweepVar::Density,
        SweepArg::TxSnr => SweepVar::TxSnr,
        SweepArg::Threshold => SweepVar::Threshold,
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn table_out(common: &Common, table: Table) -> Result<()> {
    emit(common.out.as_deref(), &table.to_csv())
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("RELAY_SG_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| anyhow!("RELAY_SG_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Outage { common, range, sweep, schemes } => {
            let mut s = spec(&common, &range, sweep_var(sweep))?;
            s.schemes = parse_schemes(&schemes)?;
            table_out(&common, sweep::cmd_outage_vs_density(&s)?)?;
        }
        Command::Bandwidth { common, range, schemes } => {
            let mut s = spec(&common, &range, SweepVar::Bandwidth)?;
            s.schemes = parse_schemes(&schemes)?;
            table_out(&common, sweep::cmd_outage_vs_bandwidth(&s)?)?;
        }
        Command::Schemes { common, range, sweep, channels } => {
            let s = spec(&common, &range, sweep_var(sweep))?;
            table_out(&common, sweep::cmd_outage_vs_scheme(&s, &parse_channels(&channels)?)?)?;
        }
        Command::Capacity { common, range, schemes } => {
            let mut s = spec(&common, &range, SweepVar::Density)?;
            s.schemes = parse_schemes(&schemes)?;
            table_out(&common, sweep::cmd_capacity_vs_density(&s)?)?;
        }
        Command::Snrs { common, trials, scheme, r_max } => {
            let (scn, _) = scenario(&common)?;
            let scheme = parse_scheme(&scheme)?;
            let taps = match scheme {
                Scheme::Random { .. } => relay_sg::model::TapProfile::flat(),
                _ => scn.taps()?,
            };
            let mut config = McConfig::new(trials, common.seed, vec![scn.threshold()], vec![scheme]);
            config.r_max = r_max;
            let (snrs, _) = simulate::simulate_snrs(&config, &scn.params()?, &taps)?;
            let mut buf = Vec::new();
            simulate::write_raw(&mut buf, &snrs)?;
            emit(common.out.as_deref(), &String::from_utf8(buf)?)?;
        }
        Command::Validate { seed, trials, out } => {
            if trials == Some(0) {
                bail!("--trials must be positive");
            }
            let start = Instant::now();
            let report = validate::run_all(&ValidateOptions { seed, trials })?;
            emit(out.as_deref(), &report.render())?;
            eprintln!("validation took {:.1} s", start.elapsed().as_secs_f64());
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .downcast_ref::<CoreError>()
                .is_some_and(|c| matches!(c, CoreError::Config { .. } | CoreError::InvalidParameter { .. }));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
