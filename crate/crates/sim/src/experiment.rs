//! Monte Carlo sweeps over the RSI bound or the relay antenna split.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use relay_core::fd::{mode_select, FdProblem};
use relay_core::hd::hd_rate_from_spectra;
use relay_core::{pairwise_sum, sample_channel_scaled, LinkSpectra, SystemConfig};

use crate::error::HarnessError;

/// Which sweep the grid parameterizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Grid values are `T / Ps`; every point reuses the same channel draws.
    TOverP,
    /// Grid values are receive-array sizes `Kr`; `Kt + Kr` stays at its base value.
    KrSplit,
}

impl FromStr for SweepKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "t-over-p" => Ok(Self::TOverP),
            "kr-split" => Ok(Self::KrSplit),
            other => Err(HarnessError::Config(format!(
                "unknown sweep `{other}` (expected t-over-p or kr-split)"
            ))),
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TOverP => "t-over-p",
            Self::KrSplit => "kr-split",
        })
    }
}

/// Which of the two labelled relay arrays faces the source.
///
/// The solver model calls the receive array `Kr`. Published rate curves label the arrays the
/// other way round (`H1` is `Kt x M`), so `Kt` is the default receive array here.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiveArray {
    Kt,
    Kr,
}

impl FromStr for ReceiveArray {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "kt" => Ok(Self::Kt),
            "kr" => Ok(Self::Kr),
            other => Err(HarnessError::Config(format!(
                "unknown receive array `{other}` (expected kt or kr)"
            ))),
        }
    }
}

impl fmt::Display for ReceiveArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Kt => "kt",
            Self::Kr => "kr",
        })
    }
}

/// Antenna counts and budgets as they appear on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub m: usize,
    pub kt: usize,
    pub kr: usize,
    pub n: usize,
    pub ps: f64,
    pub pr: f64,
    /// RSI bound for sweeps that do not set it from the grid.
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub link: LinkParams,
    pub sweep: SweepKind,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Total variance of each complex channel entry.
    pub entry_variance: f64,
    pub receive_array: ReceiveArray,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.to_string()));
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        if !(self.entry_variance.is_finite() && self.entry_variance > 0.0) {
            return bad("entry variance must be positive");
        }
        self.point_config(self.grid.first().copied().unwrap_or(0.0))
            .map(|_| ())?;
        for &g in &self.grid {
            if !g.is_finite() || g < 0.0 {
                return bad("grid values must be finite and non-negative");
            }
            if self.sweep == SweepKind::KrSplit {
                let total = self.link.kt + self.link.kr;
                if g.fract() != 0.0 || g < 1.0 || g as usize >= total {
                    return Err(HarnessError::Config(format!(
                        "kr-split grid values must be integers in [1, {}]",
                        total - 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Solver configuration at one grid value.
    pub fn point_config(&self, value: f64) -> Result<SystemConfig, HarnessError> {
        let l = &self.link;
        let (kt, kr, t) = match self.sweep {
            SweepKind::TOverP => (l.kt, l.kr, value * l.ps),
            SweepKind::KrSplit => {
                let kr = value as usize;
                ((l.kt + l.kr).saturating_sub(kr), kr, l.t)
            }
        };
        let (rx, tx) = match self.receive_array {
            ReceiveArray::Kt => (kt, kr),
            ReceiveArray::Kr => (kr, kt),
        };
        Ok(SystemConfig::new(l.m, tx, rx, l.n, l.ps, l.pr, t)?)
    }
}

/// Aggregates at one grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub sweep_param: f64,
    pub hd_mean: f64,
    pub fd_mean: f64,
    /// Mean of the per-trial better mode.
    pub selected_mean: f64,
    /// Standard error of `fd_mean`.
    pub stderr: f64,
    pub trials: usize,
    /// Trials whose full-duplex solve hit an iteration limit.
    pub unconverged: usize,
    /// Trials where full duplex was selected.
    pub fd_selected: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateReport {
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, Copy, Default)]
struct TrialOutcome {
    hd: f64,
    fd: f64,
    selected: f64,
    fd_mode: bool,
    converged: bool,
}

/// Seed of one trial. Every grid point uses the same trial seeds (common random numbers).
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    splitmix64(seed ^ splitmix64(trial as u64))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs the sweep; `progress` is called after each finished grid point (kr-split) or once at
/// the end (t-over-p, whose points are solved together per trial).
pub fn run_sweep(
    spec: &ExperimentSpec,
    mut progress: impl FnMut(usize, usize),
) -> Result<RateReport, HarnessError> {
    spec.validate()?;
    let configs: Vec<SystemConfig> = spec
        .grid
        .iter()
        .map(|&g| spec.point_config(g))
        .collect::<Result<_, _>>()?;
    let per_point: Vec<Vec<TrialOutcome>> = match spec.sweep {
        SweepKind::TOverP => {
            let by_trial: Vec<Vec<TrialOutcome>> = (0..spec.trials)
                .into_par_iter()
                .map(|trial| shared_channel_trial(spec, &configs, trial))
                .collect::<Result<_, _>>()?;
            progress(configs.len(), configs.len());
            transpose(by_trial, configs.len())
        }
        SweepKind::KrSplit => {
            let mut out = Vec::with_capacity(configs.len());
            for (k, cfg) in configs.iter().enumerate() {
                let trials: Vec<TrialOutcome> = (0..spec.trials)
                    .into_par_iter()
                    .map(|trial| {
                        let ch = sample_channel_scaled(
                            cfg,
                            trial_seed(spec.seed, trial),
                            spec.entry_variance,
                        );
                        let spectra = LinkSpectra::from_channel(&ch)?;
                        Ok(solve_point(&spectra, cfg))
                    })
                    .collect::<Result<_, HarnessError>>()?;
                out.push(trials);
                progress(k + 1, configs.len());
            }
            out
        }
    };
    let points = spec
        .grid
        .iter()
        .zip(per_point)
        .map(|(&g, outcomes)| aggregate(g, &outcomes))
        .collect();
    Ok(RateReport { points })
}

fn shared_channel_trial(
    spec: &ExperimentSpec,
    configs: &[SystemConfig],
    trial: usize,
) -> Result<Vec<TrialOutcome>, HarnessError> {
    let Some(first) = configs.first() else {
        return Ok(Vec::new());
    };
    let ch = sample_channel_scaled(first, trial_seed(spec.seed, trial), spec.entry_variance);
    let spectra = LinkSpectra::from_channel(&ch)?;
    Ok(configs
        .iter()
        .map(|cfg| solve_point(&spectra, cfg))
        .collect())
}

fn solve_point(spectra: &LinkSpectra, cfg: &SystemConfig) -> TrialOutcome {
    let hd = hd_rate_from_spectra(&spectra.source_relay, &spectra.relay_dest, cfg);
    let fd = FdProblem::new(&spectra.source_relay, &spectra.relay_dest, *cfg).solve();
    let choice = mode_select(&hd, &fd);
    TrialOutcome {
        hd: hd.rate,
        fd: fd.rate,
        selected: choice.rate,
        fd_mode: choice.mode == relay_core::RelayMode::FullDuplex,
        converged: fd.converged,
    }
}

fn transpose(by_trial: Vec<Vec<TrialOutcome>>, points: usize) -> Vec<Vec<TrialOutcome>> {
    let mut out: Vec<Vec<TrialOutcome>> = (0..points)
        .map(|_| Vec::with_capacity(by_trial.len()))
        .collect();
    for row in by_trial {
        for (k, o) in row.into_iter().enumerate() {
            out[k].push(o);
        }
    }
    out
}

fn aggregate(sweep_param: f64, outcomes: &[TrialOutcome]) -> SweepPoint {
    let l = outcomes.len();
    let mean = |f: fn(&TrialOutcome) -> f64| {
        let v: Vec<f64> = outcomes.iter().map(f).collect();
        pairwise_sum(&v) / l as f64
    };
    let fd_mean = mean(|o| o.fd);
    let stderr = if l > 1 {
        let dev: Vec<f64> = outcomes.iter().map(|o| (o.fd - fd_mean).powi(2)).collect();
        (pairwise_sum(&dev) / (l - 1) as f64).sqrt() / (l as f64).sqrt()
    } else {
        0.0
    };
    SweepPoint {
        sweep_param,
        hd_mean: mean(|o| o.hd),
        fd_mean,
        selected_mean: mean(|o| o.selected),
        stderr,
        trials: l,
        unconverged: outcomes.iter().filter(|o| !o.converged).count(),
        fd_selected: outcomes.iter().filter(|o| o.fd_mode).count(),
    }
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, HarnessError> {
    let bad = || HarnessError::Config(format!("malformed grid `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if step.is_nan()
                || step <= 0.0
                || !start.is_finite()
                || !stop.is_finite()
                || stop < start
            {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|k| start + k as f64 * step).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sweep: SweepKind, grid: Vec<f64>) -> ExperimentSpec {
        ExperimentSpec {
            link: LinkParams {
                m: 2,
                kt: 2,
                kr: 2,
                n: 2,
                ps: 5.0,
                pr: 5.0,
                t: 1.0,
            },
            sweep,
            grid,
            trials: 4,
            seed: 1,
            entry_variance: 1.0,
            receive_array: ReceiveArray::Kr,
        }
    }

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0:3:9").unwrap(), vec![0.0, 3.0, 6.0, 9.0]);
        assert_eq!(parse_grid("1, 2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_grid("0:0.1:0.3").unwrap().len(), 4);
        assert!(parse_grid("").unwrap().is_empty());
        assert!(parse_grid("0:0:1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn t_over_p_scales_with_source_power() {
        let s = spec(SweepKind::TOverP, vec![3.0]);
        assert_eq!(s.point_config(3.0).unwrap().rsi_bound, 15.0);
    }

    #[test]
    fn kr_split_keeps_total() {
        let mut s = spec(SweepKind::KrSplit, vec![1.0, 3.0]);
        let c = s.point_config(1.0).unwrap();
        assert_eq!((c.relay_rx_antennas, c.relay_tx_antennas), (1, 3));
        s.receive_array = ReceiveArray::Kt;
        let c = s.point_config(1.0).unwrap();
        assert_eq!((c.relay_rx_antennas, c.relay_tx_antennas), (3, 1));
        assert!(spec(SweepKind::KrSplit, vec![4.0]).validate().is_err());
        assert!(spec(SweepKind::KrSplit, vec![1.5]).validate().is_err());
    }

    #[test]
    fn trial_seeds_differ() {
        assert_ne!(trial_seed(1, 0), trial_seed(1, 1));
        assert_ne!(trial_seed(1, 0), trial_seed(2, 0));
    }

    #[test]
    fn hd_is_flat_in_t_with_common_draws() {
        let r = run_sweep(&spec(SweepKind::TOverP, vec![0.0, 1.0, 5.0]), |_, _| {}).unwrap();
        assert!(r.points.iter().all(|p| p.hd_mean == r.points[0].hd_mean));
        assert!(r.points[0].fd_mean >= r.points[2].fd_mean);
    }
}
