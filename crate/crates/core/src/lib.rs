//! Worst-case achievable rates for a full-duplex decode-and-forward MIMO relay whose residual
//! self-interference channel is unknown apart from a bound on its Frobenius norm.
//!
//! Everything works on channel spectra: the source-relay hop sees the squared singular values of
//! `H1`, the relay-destination hop those of `H2`, and the adversarial interference channel is
//! reduced to a non-negative vector of squared singular values summing to the bound `T`.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod channel;
pub mod error;
pub mod fd;
pub mod hd;
pub mod majorize;
mod num;
pub mod saddle;
pub mod waterfill;
pub mod worstcase;

pub use channel::{
    sample_channel, sample_channel_scaled, spectrum, CMatrix, ChannelRealization, Complex64,
    Spectrum, SystemConfig,
};
pub use error::{Error, Result};
pub use fd::{
    evaluate_g, fd_rate, mode_select, FdOptions, FdProblem, FdResult, ModeDecision, RelayMode,
};
pub use hd::{hd_rate, HdResult};
pub use num::{log2_1p, pairwise_sum};
pub use waterfill::{capped_water_fill, water_fill, Allocation};
pub use worstcase::{worst_case_rsi, RsiSpectrum};

/// Spectra of both hops of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpectra {
    pub source_relay: Spectrum,
    pub relay_dest: Spectrum,
}

impl LinkSpectra {
    pub fn from_channel(ch: &ChannelRealization) -> Result<Self> {
        Ok(Self {
            source_relay: spectrum(&ch.source_relay)?,
            relay_dest: spectrum(&ch.relay_dest)?,
        })
    }
}
