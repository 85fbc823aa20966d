//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigFile;
use crate::error::HarnessError;
use crate::experiment::{
    parse_grid, run_sweep, ExperimentSpec, LinkParams, ReceiveArray, SweepKind,
};
use crate::report::{create_output, write_csv};
use crate::verify::{run_suite, VerifyOptions};

#[derive(Debug, Parser)]
#[command(
    name = "robust-relay",
    version,
    about = "Worst-case rates of a full-duplex MIMO relay under bounded self-interference"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Monte Carlo sweep over T/Ps or over the relay antenna split; writes CSV.
    Sweep(SweepArgs),
    /// Randomized checks of the matrix identities behind the spectral reduction.
    Verify(VerifyArgs),
}

/// Every option may also come from `--config`; flags win.
#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    #[arg(long = "config")]
    pub config: Option<PathBuf>,
    /// Source antennas.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Relay array facing the source (see --rx-array).
    #[arg(long = "Kt")]
    pub kt: Option<usize>,
    /// Relay array facing the destination (see --rx-array).
    #[arg(long = "Kr")]
    pub kr: Option<usize>,
    /// Destination antennas.
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "Ps")]
    pub ps: Option<f64>,
    #[arg(long = "Pr")]
    pub pr: Option<f64>,
    /// RSI bound for kr-split sweeps [default: 0].
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// t-over-p or kr-split [default: t-over-p].
    #[arg(long)]
    pub sweep: Option<String>,
    /// `start:step:stop` or a comma list.
    #[arg(long)]
    pub grid: Option<String>,
    /// Monte Carlo trials per point [default: 10000].
    #[arg(long)]
    pub trials: Option<usize>,
    /// [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Total variance of each complex channel entry [default: 2].
    #[arg(long = "entry-variance")]
    pub entry_variance: Option<f64>,
    /// Which labelled relay array receives from the source: kt or kr [default: kt].
    #[arg(long = "rx-array")]
    pub rx_array: Option<String>,
    /// Worker threads; 0 uses all cores [default: 0].
    #[arg(long)]
    pub threads: Option<usize>,
    /// Report finished sweep points on stderr.
    #[arg(long)]
    pub progress: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Random matrix pairs per identity.
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    /// Random 2x2 relay instances compared against matrix-level search.
    #[arg(long, default_value_t = 5)]
    pub instances: usize,
    /// Matrix adversaries sampled per instance.
    #[arg(long, default_value_t = relay_core::majorize::EQUIV_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

/// Fully resolved sweep invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub spec: ExperimentSpec,
    pub out: PathBuf,
    pub threads: usize,
    pub progress: bool,
}

fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    file: &ConfigFile,
    key: &str,
) -> Result<Option<T>, HarnessError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

fn required<T>(v: Option<T>, key: &str) -> Result<T, HarnessError> {
    v.ok_or_else(|| HarnessError::Config(format!("missing --{key}")))
}

impl SweepArgs {
    pub fn resolve(self) -> Result<SweepPlan, HarnessError> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let link = LinkParams {
            m: required(pick(self.m, &file, "M")?, "M")?,
            kt: required(pick(self.kt, &file, "Kt")?, "Kt")?,
            kr: required(pick(self.kr, &file, "Kr")?, "Kr")?,
            n: required(pick(self.n, &file, "N")?, "N")?,
            ps: required(pick(self.ps, &file, "Ps")?, "Ps")?,
            pr: required(pick(self.pr, &file, "Pr")?, "Pr")?,
            t: pick(self.t, &file, "T")?.unwrap_or(0.0),
        };
        let sweep: SweepKind = pick(self.sweep, &file, "sweep")?
            .as_deref()
            .unwrap_or("t-over-p")
            .parse()?;
        let grid = parse_grid(&required(pick(self.grid, &file, "grid")?, "grid")?)?;
        let receive_array: ReceiveArray = pick(self.rx_array, &file, "rx-array")?
            .as_deref()
            .unwrap_or("kt")
            .parse()?;
        let spec = ExperimentSpec {
            link,
            sweep,
            grid,
            trials: pick(self.trials, &file, "trials")?.unwrap_or(10_000),
            seed: pick(self.seed, &file, "seed")?.unwrap_or(42),
            entry_variance: pick(self.entry_variance, &file, "entry-variance")?.unwrap_or(2.0),
            receive_array,
        };
        spec.validate()?;
        Ok(SweepPlan {
            spec,
            out: required(pick(self.out, &file, "out")?, "out")?,
            threads: pick(self.threads, &file, "threads")?.unwrap_or(0),
            progress: self.progress || pick(None::<bool>, &file, "progress")?.unwrap_or(false),
        })
    }
}

pub fn run_plan(plan: &SweepPlan) -> Result<(), HarnessError> {
    let file = create_output(&plan.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let progress = plan.progress;
    let report = pool.install(|| {
        run_sweep(&plan.spec, |done, total| {
            if progress {
                eprintln!("{done}/{total} sweep points");
            }
        })
    })?;
    for p in &report.points {
        if p.unconverged > 0 {
            eprintln!(
                "warning: {} of {} trials at {} = {} hit the iteration limit",
                p.unconverged, p.trials, plan.spec.sweep, p.sweep_param
            );
        }
    }
    write_csv(&report, file).map_err(|e| HarnessError::csv(&plan.out, e))
}

/// Runs a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Sweep(args) => args.resolve().and_then(|plan| run_plan(&plan)).map(|()| 0),
        Command::Verify(args) => {
            let opts = VerifyOptions {
                pairs: args.pairs,
                equiv_instances: args.instances,
                equiv_samples: args.samples,
                seed: args.seed,
            };
            let checks = run_suite(&opts);
            for c in &checks {
                println!("{}", c.line());
            }
            Ok(if checks.iter().all(|c| c.passed) {
                0
            } else {
                1
            })
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })
}
