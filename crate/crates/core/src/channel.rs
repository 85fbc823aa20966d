//! System configuration, channel sampling and the spectral data the solvers consume.

use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::num::{log2_1p, sqrt};

pub type Complex64 = Complex<f64>;
pub type CMatrix = DMatrix<Complex64>;

/// Squared singular values below this fraction of the largest one are treated as exact zeros.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Antenna counts, power budgets and the RSI uncertainty bound of one relay link.
///
/// Noise at the relay and the destination is unit-variance white.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub source_antennas: usize,
    pub relay_tx_antennas: usize,
    pub relay_rx_antennas: usize,
    pub dest_antennas: usize,
    pub source_power: f64,
    pub relay_power: f64,
    /// Bound on the squared Frobenius norm of the residual self-interference channel.
    pub rsi_bound: f64,
}

impl SystemConfig {
    pub fn new(
        source_antennas: usize,
        relay_tx_antennas: usize,
        relay_rx_antennas: usize,
        dest_antennas: usize,
        source_power: f64,
        relay_power: f64,
        rsi_bound: f64,
    ) -> Result<Self> {
        let cfg = Self {
            source_antennas,
            relay_tx_antennas,
            relay_rx_antennas,
            dest_antennas,
            source_power,
            relay_power,
            rsi_bound,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.source_antennas == 0
            || self.relay_tx_antennas == 0
            || self.relay_rx_antennas == 0
            || self.dest_antennas == 0
        {
            return Err(Error::InvalidConfig("antenna counts must be at least 1"));
        }
        for (v, what) in [
            (
                self.source_power,
                "source power must be finite and non-negative",
            ),
            (
                self.relay_power,
                "relay power must be finite and non-negative",
            ),
            (self.rsi_bound, "RSI bound must be finite and non-negative"),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig(what));
            }
        }
        Ok(())
    }

    /// Parallel streams on the source-relay hop.
    pub fn source_streams(&self) -> usize {
        self.source_antennas.min(self.relay_rx_antennas)
    }

    /// Parallel streams on the relay-destination hop.
    pub fn relay_streams(&self) -> usize {
        self.relay_tx_antennas.min(self.dest_antennas)
    }

    pub fn with_rsi_bound(mut self, rsi_bound: f64) -> Self {
        self.rsi_bound = rsi_bound;
        self
    }
}

/// One draw of the two hop channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Source to relay, `relay_rx_antennas x source_antennas`.
    pub source_relay: CMatrix,
    /// Relay to destination, `dest_antennas x relay_tx_antennas`.
    pub relay_dest: CMatrix,
}

impl ChannelRealization {
    pub fn check_dimensions(&self, cfg: &SystemConfig) -> Result<()> {
        let checks = [
            (self.source_relay.nrows(), cfg.relay_rx_antennas),
            (self.source_relay.ncols(), cfg.source_antennas),
            (self.relay_dest.nrows(), cfg.dest_antennas),
            (self.relay_dest.ncols(), cfg.relay_tx_antennas),
        ];
        for (found, expected) in checks {
            if found != expected {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        Ok(())
    }
}

/// Squared singular values of a channel, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Wraps an already sorted, non-negative vector.
    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite);
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig("spectrum must be sorted descending"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of strictly positive entries.
    pub fn rank(&self) -> usize {
        self.values.iter().take_while(|v| **v > 0.0).count()
    }
}

impl core::ops::Deref for Spectrum {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Eigen-decomposed transmit covariance `V diag(eigvals) V^H`.
#[derive(Debug, Clone)]
pub struct CovarianceDesign {
    /// Orthonormal columns: right singular vectors of the channel, strongest first.
    pub eigvecs: CMatrix,
    pub eigvals: Vec<f64>,
}

impl CovarianceDesign {
    pub fn covariance(&self) -> CMatrix {
        let n = self.eigvecs.nrows();
        let mut q = CMatrix::zeros(n, n);
        for (k, &p) in self.eigvals.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let v = self.eigvecs.column(k);
            q += (v * v.adjoint()) * Complex64::new(p, 0.0);
        }
        q
    }

    pub fn trace(&self) -> f64 {
        self.eigvals.iter().sum()
    }
}

/// Fills a `rows x cols` matrix with i.i.d. circularly-symmetric complex Gaussians of the
/// given total variance, drawing real then imaginary part, column by column.
pub fn complex_gaussian<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> CMatrix {
    let scale = sqrt(variance / 2.0);
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    })
}

/// Draws a channel pair with unit-variance entries.
pub fn sample_channel(cfg: &SystemConfig, seed: u64) -> ChannelRealization {
    sample_channel_scaled(cfg, seed, 1.0)
}

/// Draws a channel pair whose entries have total variance `entry_variance`.
pub fn sample_channel_scaled(
    cfg: &SystemConfig,
    seed: u64,
    entry_variance: f64,
) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source_relay = complex_gaussian(
        &mut rng,
        cfg.relay_rx_antennas,
        cfg.source_antennas,
        entry_variance,
    );
    let relay_dest = complex_gaussian(
        &mut rng,
        cfg.dest_antennas,
        cfg.relay_tx_antennas,
        entry_variance,
    );
    ChannelRealization {
        source_relay,
        relay_dest,
    }
}

fn check_finite(h: &CMatrix) -> Result<()> {
    if h.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn clamp_tail(values: &mut [f64]) {
    let top = values.first().copied().unwrap_or(0.0);
    for v in values.iter_mut() {
        if *v <= RANK_CUTOFF * top {
            *v = 0.0;
        }
    }
}

/// Descending squared singular values of `h`.
pub fn spectrum(h: &CMatrix) -> Result<Spectrum> {
    check_finite(h)?;
    let mut values: Vec<f64> = h.singular_values().iter().map(|s| s * s).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    clamp_tail(&mut values);
    Ok(Spectrum { values })
}

/// Pairs the right singular vectors of `h` (strongest first) with a power allocation.
pub fn reconstruct_covariance(h: &CMatrix, alloc: &[f64]) -> Result<CovarianceDesign> {
    check_finite(h)?;
    let k = h.nrows().min(h.ncols());
    if alloc.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: alloc.len(),
        });
    }
    if alloc.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidConfig(
            "allocation must be finite and non-negative",
        ));
    }
    let svd = h.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut eigvecs = CMatrix::zeros(h.ncols(), k);
    for (dst, &src) in order.iter().enumerate() {
        eigvecs.set_column(dst, &v_t.row(src).adjoint());
    }
    Ok(CovarianceDesign {
        eigvecs,
        eigvals: alloc.to_vec(),
    })
}

/// `log2 det(I + H Q H^H)` evaluated directly on the matrices.
pub fn log_det_rate(h: &CMatrix, q: &CMatrix) -> f64 {
    let n = h.nrows();
    let m = CMatrix::identity(n, n) + h * q * h.adjoint();
    hermitian_log2_det(&m)
}

/// `log2 det(M)` for a Hermitian positive definite `M` via Cholesky.
pub fn hermitian_log2_det(m: &CMatrix) -> f64 {
    // Symmetrize away round-off before factoring.
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    match sym.cholesky() {
        Some(chol) => {
            let l = chol.l_dirty();
            (0..l.nrows()).map(|i| 2.0 * libm::log2(l[(i, i)].re)).sum()
        }
        None => f64::NEG_INFINITY,
    }
}

/// `sum_i log2(1 + gains[i] * powers[i])`.
pub fn diagonal_rate(gains: &[f64], powers: &[f64]) -> f64 {
    gains.iter().zip(powers).map(|(g, p)| log2_1p(g * p)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: usize, kt: usize, kr: usize, n: usize) -> SystemConfig {
        SystemConfig::new(m, kt, kr, n, 5.0, 5.0, 0.0).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let c = cfg(4, 2, 3, 2);
        let a = sample_channel(&c, 7);
        let b = sample_channel(&c, 7);
        assert_eq!(a, b);
        assert_eq!(a.source_relay.shape(), (3, 4));
        assert_eq!(a.relay_dest.shape(), (2, 2));
        assert_ne!(a, sample_channel(&c, 8));
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(SystemConfig::new(0, 1, 1, 1, 1.0, 1.0, 0.0).is_err());
        assert!(SystemConfig::new(1, 1, 1, 1, -1.0, 1.0, 0.0).is_err());
        assert!(SystemConfig::new(1, 1, 1, 1, 1.0, f64::NAN, 0.0).is_err());
        assert!(SystemConfig::new(1, 1, 1, 1, 1.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn spectrum_of_identity_and_diagonal() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(spectrum(&i2).unwrap().values(), &[1.0, 1.0]);
        let mut d = CMatrix::zeros(2, 2);
        d[(0, 0)] = Complex64::new(2.0, 0.0);
        d[(1, 1)] = Complex64::new(3.0, 0.0);
        let s = spectrum(&d).unwrap();
        assert!((s[0] - 9.0).abs() < 1e-12 && (s[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_rejects_nan() {
        let mut h = CMatrix::identity(2, 2);
        h[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(spectrum(&h), Err(Error::NonFinite));
    }

    #[test]
    fn spectrum_clamps_numerical_zeros() {
        // rank one 3x3
        let u = CMatrix::from_fn(3, 1, |i, _| Complex64::new(i as f64 + 1.0, 0.5));
        let h = &u * u.adjoint();
        let s = spectrum(&h).unwrap();
        assert_eq!(s.rank(), 1);
        assert_eq!(&s[1..], &[0.0, 0.0]);
    }

    #[test]
    fn spectrum_lengths_follow_stream_counts() {
        let c = cfg(4, 3, 7, 2);
        let ch = sample_channel(&c, 1);
        assert_eq!(
            spectrum(&ch.source_relay).unwrap().len(),
            c.source_streams()
        );
        assert_eq!(spectrum(&ch.relay_dest).unwrap().len(), c.relay_streams());
    }

    #[test]
    fn covariance_trace_and_zero_allocation() {
        let i2 = CMatrix::identity(2, 2);
        let d = reconstruct_covariance(&i2, &[2.0, 3.0]).unwrap();
        let tr: f64 = d.covariance().trace().re;
        assert!((tr - 5.0).abs() < 1e-12);
        let z = reconstruct_covariance(&i2, &[0.0, 0.0]).unwrap();
        assert!(z.covariance().iter().all(|c| c.re == 0.0 && c.im == 0.0));
    }

    #[test]
    fn covariance_length_mismatch() {
        let h = CMatrix::identity(3, 2);
        assert_eq!(
            reconstruct_covariance(&h, &[1.0]).unwrap_err(),
            Error::DimensionMismatch {
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn covariance_eigvecs_are_orthonormal() {
        let c = cfg(4, 2, 3, 2);
        let h = sample_channel(&c, 11).source_relay;
        let d = reconstruct_covariance(&h, &[1.0, 1.0, 1.0]).unwrap();
        let gram = d.eigvecs.adjoint() * &d.eigvecs;
        let err = (gram - CMatrix::identity(3, 3)).norm();
        assert!(err < 1e-9, "{err}");
    }
}
