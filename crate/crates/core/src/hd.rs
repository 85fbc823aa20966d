//! Half-duplex decode-and-forward rate with optimal time sharing.

use crate::channel::{ChannelRealization, Spectrum, SystemConfig};
use crate::error::Result;
use crate::waterfill::{objective, water_fill, Allocation};
use crate::LinkSpectra;

#[derive(Debug, Clone, PartialEq)]
pub struct HdResult {
    /// End-to-end rate in bits per channel use.
    pub rate: f64,
    pub r_sr: f64,
    pub r_rd: f64,
    /// Fraction of channel uses given to the source-relay hop.
    pub alpha: f64,
    pub source_alloc: Allocation,
    pub relay_alloc: Allocation,
}

/// `r_sr r_rd / (r_sr + r_rd)`, the rate at the balancing time share; zero if both hops are dead.
pub fn time_shared_rate(r_sr: f64, r_rd: f64) -> (f64, f64) {
    let sum = r_sr + r_rd;
    if sum > 0.0 {
        (r_sr * r_rd / sum, r_rd / sum)
    } else {
        (0.0, 0.5)
    }
}

pub fn hd_rate(ch: &ChannelRealization, cfg: &SystemConfig) -> Result<HdResult> {
    ch.check_dimensions(cfg)?;
    let spectra = LinkSpectra::from_channel(ch)?;
    Ok(hd_rate_from_spectra(
        &spectra.source_relay,
        &spectra.relay_dest,
        cfg,
    ))
}

pub fn hd_rate_from_spectra(
    source_relay: &Spectrum,
    relay_dest: &Spectrum,
    cfg: &SystemConfig,
) -> HdResult {
    let source_alloc = water_fill(source_relay, cfg.source_power);
    let relay_alloc = water_fill(relay_dest, cfg.relay_power);
    let r_sr = objective(source_relay, &source_alloc.powers);
    let r_rd = objective(relay_dest, &relay_alloc.powers);
    let (rate, alpha) = time_shared_rate(r_sr, r_rd);
    HdResult {
        rate,
        r_sr,
        r_rd,
        alpha,
        source_alloc,
        relay_alloc,
    }
}
