//! Full-duplex worst-case rate: best-response alternation between the source allocation and the
//! RSI adversary, wrapped in a bisection on the relay power that balances the two hops.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{ChannelRealization, Spectrum, SystemConfig};
use crate::error::Result;
use crate::hd::HdResult;
use crate::saddle::solve_saddle;
use crate::waterfill::{capped_water_fill, objective, water_fill, Allocation};
use crate::worstcase::{source_relay_rate, worst_case_from_products, RsiSpectrum};
use crate::LinkSpectra;

/// Stopping rules for the two nested loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    /// Max-norm change of the RSI spectrum between sweeps that ends the alternation.
    pub inner_tol: f64,
    pub max_sweeps: usize,
    /// Sweeps after which a stalled alternation is restarted from the directly solved saddle
    /// point.
    pub stall_sweeps: usize,
    /// Bisection tolerance as a fraction of the relay budget.
    pub bisection_rel_tol: f64,
    pub max_bisections: usize,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            inner_tol: 1e-7,
            max_sweeps: 500,
            stall_sweeps: 50,
            bisection_rel_tol: 1e-6,
            max_bisections: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdResult {
    /// `min(r_sr, r_rd)` in bits per channel use.
    pub rate: f64,
    pub r_sr: f64,
    pub r_rd: f64,
    pub relay_power_used: f64,
    pub gamma_s: Allocation,
    pub gamma_r: Allocation,
    pub rsi: RsiSpectrum,
    /// Alternation sweeps spent at the returned relay power.
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
}

impl FdResult {
    /// `r_sr - r_rd` at the returned relay power.
    pub fn gap(&self) -> f64 {
        self.r_sr - self.r_rd
    }
}

const MIN_STEP: f64 = 1.0 / 1024.0;

/// Converged source allocation and adversary for fixed relay powers.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSide {
    pub gamma_s: Allocation,
    pub rsi: RsiSpectrum,
    /// Robust rate of `gamma_s`: the adversary in `rsi` is its exact best response.
    pub r_sr: f64,
    pub sweeps: usize,
    pub converged: bool,
}

/// Relay powers that couple into the source streams: the strongest `source_streams` entries,
/// zero-padded when the relay has fewer streams.
pub fn relay_coupling(gamma_r: &[f64], source_streams: usize) -> Vec<f64> {
    let mut b: Vec<f64> = gamma_r.iter().copied().take(source_streams).collect();
    b.resize(source_streams, 0.0);
    b
}

/// Alternates capped water-filling against the worst-case RSI until the RSI spectrum settles.
///
/// An alternation still unsettled after `stall_sweeps` is restarted from the saddle point found
/// by [`solve_saddle`]; the remaining sweeps then certify it.
pub fn solve_source_side(
    sigma2_1: &[f64],
    coupling: &[f64],
    source_power: f64,
    rsi_bound: f64,
    opts: &FdOptions,
) -> SourceSide {
    let n = sigma2_1.len();
    let first_limit = opts.stall_sweeps.clamp(1, opts.max_sweeps.max(1));
    let first = alternate(
        sigma2_1,
        coupling,
        source_power,
        rsi_bound,
        opts,
        vec![0.0; n],
        first_limit,
        None,
    );
    if first.converged || first_limit >= opts.max_sweeps {
        return first;
    }
    let start = solve_saddle(sigma2_1, coupling, source_power, rsi_bound)
        .rsi
        .sigma2;
    let rest = opts.max_sweeps - first_limit;
    let mut second = alternate(
        sigma2_1,
        coupling,
        source_power,
        rsi_bound,
        opts,
        start,
        rest,
        None,
    );
    second.sweeps += first.sweeps;
    if second.converged || second.r_sr >= first.r_sr {
        second
    } else {
        SourceSide {
            sweeps: second.sweeps,
            ..first
        }
    }
}

/// Plain alternation from zero interference, recording `r_sr` after every half-step: the source
/// update (which can only raise it) followed by the adversary update (which can only lower it).
pub fn solve_source_side_traced(
    sigma2_1: &[f64],
    coupling: &[f64],
    source_power: f64,
    rsi_bound: f64,
    opts: &FdOptions,
) -> (SourceSide, Vec<f64>) {
    let mut trace = Vec::new();
    let n = sigma2_1.len();
    let side = alternate(
        sigma2_1,
        coupling,
        source_power,
        rsi_bound,
        opts,
        vec![0.0; n],
        opts.max_sweeps,
        Some(&mut trace),
    );
    (side, trace)
}

#[allow(clippy::too_many_arguments)]
fn alternate(
    sigma2_1: &[f64],
    coupling: &[f64],
    source_power: f64,
    rsi_bound: f64,
    opts: &FdOptions,
    mut x: Vec<f64>,
    max_sweeps: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> SourceSide {
    let n = sigma2_1.len();
    assert_eq!(
        coupling.len(),
        n,
        "coupling must match the source stream count"
    );
    let mut effective = Vec::with_capacity(n);
    let mut products = Vec::with_capacity(n);
    let mut best: Option<SourceSide> = None;
    let mut step = 1.0f64;
    let mut last_residual: Vec<f64> = Vec::new();
    let mut residual = Vec::with_capacity(n);

    for sweep in 1..=max_sweeps.max(1) {
        effective.clear();
        effective.extend(
            sigma2_1
                .iter()
                .zip(coupling)
                .zip(&x)
                .map(|((s, b), x)| s / (1.0 + b * x)),
        );
        let gamma_s = capped_water_fill(&effective, sigma2_1, source_power);
        if let Some(t) = trace.as_deref_mut() {
            t.push(objective(&effective, &gamma_s.powers));
        }

        products.clear();
        products.extend(sigma2_1.iter().zip(&gamma_s.powers).map(|(s, g)| s * g));
        let response = worst_case_from_products(&products, coupling, rsi_bound);
        let r_sr = source_relay_rate(sigma2_1, &gamma_s.powers, coupling, &response.sigma2);

        residual.clear();
        residual.extend(response.sigma2.iter().zip(&x).map(|(r, x)| r - x));
        let done = residual.iter().all(|r| r.abs() < opts.inner_tol);
        // Plain best response can settle into a two-cycle. Along the dominant direction the
        // residual obeys r' = (1 + step (s - 1)) r for the local slope s of the response map;
        // the ratio of successive residuals gives s, and the step is reset to cancel it.
        if !last_residual.is_empty() {
            let dot: f64 = residual
                .iter()
                .zip(&last_residual)
                .map(|(a, b)| a * b)
                .sum();
            let norm2: f64 = last_residual.iter().map(|b| b * b).sum();
            if norm2 > 0.0 {
                let ratio = dot / norm2;
                step = if ratio < 1.0 {
                    step / (1.0 - ratio)
                } else {
                    step * 0.5
                };
                step = step.clamp(MIN_STEP, 1.0);
            }
        }
        core::mem::swap(&mut last_residual, &mut residual);
        for (xi, ri) in x.iter_mut().zip(&last_residual) {
            *xi += step * ri;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(source_relay_rate(sigma2_1, &gamma_s.powers, coupling, &x));
        }

        let candidate = SourceSide {
            gamma_s,
            rsi: response,
            r_sr,
            sweeps: sweep,
            converged: done,
        };
        if done {
            return candidate;
        }
        if best.as_ref().is_none_or(|b| candidate.r_sr > b.r_sr) {
            best = Some(candidate);
        } else if let Some(b) = best.as_mut() {
            b.sweeps = sweep;
        }
    }
    best.expect("at least one sweep runs")
}

/// Solver for one realization; spectra are computed once and reused across relay powers.
#[derive(Debug, Clone)]
pub struct FdProblem<'a> {
    pub source_relay: &'a Spectrum,
    pub relay_dest: &'a Spectrum,
    pub cfg: SystemConfig,
    pub opts: FdOptions,
}

impl<'a> FdProblem<'a> {
    pub fn new(source_relay: &'a Spectrum, relay_dest: &'a Spectrum, cfg: SystemConfig) -> Self {
        Self {
            source_relay,
            relay_dest,
            cfg,
            opts: FdOptions::default(),
        }
    }

    pub fn with_options(mut self, opts: FdOptions) -> Self {
        self.opts = opts;
        self
    }

    /// `g(P) = r_sr(P) - r_rd(P)` together with the solution at relay power `p`.
    pub fn evaluate(&self, p: f64) -> (f64, FdResult) {
        let gamma_r = water_fill(self.relay_dest, p);
        let r_rd = objective(self.relay_dest, &gamma_r.powers);
        let coupling = relay_coupling(&gamma_r.powers, self.source_relay.len());
        let side = solve_source_side(
            self.source_relay,
            &coupling,
            self.cfg.source_power,
            self.cfg.rsi_bound,
            &self.opts,
        );
        let result = FdResult {
            rate: side.r_sr.min(r_rd),
            r_sr: side.r_sr,
            r_rd,
            relay_power_used: p,
            gamma_s: side.gamma_s,
            gamma_r,
            rsi: side.rsi,
            inner_iterations: side.sweeps,
            outer_iterations: 0,
            converged: side.converged,
        };
        (result.gap(), result)
    }

    /// Balances the hops: full relay power if the source hop still wins there, otherwise the
    /// bisection root of `g` on `[0, Pr]`.
    pub fn solve(&self) -> FdResult {
        let pr = self.cfg.relay_power;
        let (g, probe) = self.evaluate(pr);
        if g >= 0.0 || pr <= 0.0 {
            return probe;
        }
        let eps = self.opts.bisection_rel_tol * pr;
        let (mut lo, mut hi) = (0.0, pr);
        let mut best = probe;
        let mut iterations = 0;
        let mut all_converged = best.converged;
        while hi - lo >= eps / 2.0 && iterations < self.opts.max_bisections {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            let (g, res) = self.evaluate(mid);
            all_converged &= res.converged;
            if res.rate >= best.rate {
                best = res;
            }
            if g > 0.0 {
                lo = mid;
            } else if g < 0.0 {
                hi = mid;
            } else {
                break;
            }
        }
        best.outer_iterations = iterations;
        best.converged = all_converged;
        best
    }
}

/// `g(p)` and the partial solution for one realization.
pub fn evaluate_g(p: f64, ch: &ChannelRealization, cfg: &SystemConfig) -> Result<(f64, FdResult)> {
    ch.check_dimensions(cfg)?;
    let spectra = LinkSpectra::from_channel(ch)?;
    Ok(
        FdProblem::new(&spectra.source_relay, &spectra.relay_dest, *cfg)
            .evaluate(p.clamp(0.0, cfg.relay_power)),
    )
}

pub fn fd_rate(ch: &ChannelRealization, cfg: &SystemConfig) -> Result<FdResult> {
    ch.check_dimensions(cfg)?;
    let spectra = LinkSpectra::from_channel(ch)?;
    Ok(FdProblem::new(&spectra.source_relay, &spectra.relay_dest, *cfg).solve())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelayMode {
    HalfDuplex,
    FullDuplex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeDecision {
    pub mode: RelayMode,
    pub rate: f64,
}

/// Picks the better duplexing mode for a realization; ties go to full duplex.
pub fn mode_select(hd: &HdResult, fd: &FdResult) -> ModeDecision {
    if fd.rate >= hd.rate {
        ModeDecision {
            mode: RelayMode::FullDuplex,
            rate: fd.rate,
        }
    } else {
        ModeDecision {
            mode: RelayMode::HalfDuplex,
            rate: hd.rate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{CMatrix, Complex64};

    fn scalar(h: f64) -> CMatrix {
        CMatrix::from_element(1, 1, Complex64::new(h, 0.0))
    }

    fn scalar_link() -> ChannelRealization {
        ChannelRealization {
            source_relay: scalar(1.0),
            relay_dest: scalar(1.0),
        }
    }

    #[test]
    fn symmetric_scalar_link_without_rsi() {
        let cfg = SystemConfig::new(1, 1, 1, 1, 3.0, 3.0, 0.0).unwrap();
        let (g, _) = evaluate_g(3.0, &scalar_link(), &cfg).unwrap();
        assert!(g.abs() < 1e-12);
        let r = fd_rate(&scalar_link(), &cfg).unwrap();
        assert!((r.r_sr - 2.0).abs() < 1e-12);
        assert!((r.rate - 2.0).abs() < 1e-12);
        assert_eq!(r.relay_power_used, 3.0);
    }

    #[test]
    fn zero_relay_power_silences_rsi() {
        let cfg = SystemConfig::new(1, 1, 1, 1, 3.0, 3.0, 10.0).unwrap();
        let (g, r) = evaluate_g(0.0, &scalar_link(), &cfg).unwrap();
        assert_eq!(r.r_rd, 0.0);
        assert!((g - 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_relay_budget_no_rate() {
        let cfg = SystemConfig::new(1, 1, 1, 1, 3.0, 0.0, 1.0).unwrap();
        assert_eq!(fd_rate(&scalar_link(), &cfg).unwrap().rate, 0.0);
    }

    #[test]
    fn scalar_rsi_forces_balance() {
        // r_sr(P) = log2(1 + 3 / (1 + 2P)), r_rd(P) = log2(1 + P)
        let cfg = SystemConfig::new(1, 1, 1, 1, 3.0, 3.0, 2.0).unwrap();
        let r = fd_rate(&scalar_link(), &cfg).unwrap();
        assert!(r.relay_power_used < 3.0);
        assert!(r.gap().abs() < 1e-4, "{}", r.gap());
        let p = r.relay_power_used;
        assert!((r.r_sr - crate::num::log2_1p(3.0 / (1.0 + 2.0 * p))).abs() < 1e-9);
    }

    #[test]
    fn coupling_truncates_and_pads() {
        assert_eq!(relay_coupling(&[3.0, 2.0, 1.0], 2), vec![3.0, 2.0]);
        assert_eq!(relay_coupling(&[3.0], 3), vec![3.0, 0.0, 0.0]);
    }

    #[test]
    fn ties_go_to_full_duplex() {
        let cfg = SystemConfig::new(1, 1, 1, 1, 3.0, 3.0, 0.0).unwrap();
        let hd = crate::hd::hd_rate(&scalar_link(), &cfg).unwrap();
        let mut fd = fd_rate(&scalar_link(), &cfg).unwrap();
        fd.rate = hd.rate;
        assert_eq!(mode_select(&hd, &fd).mode, RelayMode::FullDuplex);
        fd.rate = hd.rate - 1e-9;
        assert_eq!(mode_select(&hd, &fd).mode, RelayMode::HalfDuplex);
    }
}
