//! Worst-case residual self-interference spectrum.
//!
//! For fixed source products `a_i = s_i * gamma_s_i` and relay powers `b_i = gamma_r_i` the
//! adversary solves
//!
//! ```text
//! minimize   sum_i log2(1 + a_i / (1 + b_i x_i))
//! subject to sum_i x_i = T,  x_i >= 0
//! ```
//!
//! Each term is convex and decreasing in `x_i`, so stationarity gives the closed form
//! `x_i(lambda) = [(sqrt(a_i^2 + 4 a_i b_i / lambda) - a_i - 2) / (2 b_i)]^+` and the level
//! `lambda` is matched to the budget by bisection.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::{increasing_root, log2_1p, sqrt};

/// Adversarial squared singular values of the RSI channel, index-paired with the source streams.
#[derive(Debug, Clone, PartialEq)]
pub struct RsiSpectrum {
    pub sigma2: Vec<f64>,
    /// Lagrange level of the budget constraint; zero when the adversary is inactive.
    pub water_level: f64,
    /// Set when `T > 0` but no stream can be hurt (all relay or source powers are zero).
    pub vacuous: bool,
}

impl RsiSpectrum {
    pub fn zeros(n: usize) -> Self {
        Self {
            sigma2: vec![0.0; n],
            water_level: 0.0,
            vacuous: false,
        }
    }

    pub fn total(&self) -> f64 {
        self.sigma2.iter().sum()
    }
}

/// Source-relay rate `sum log2(1 + s_i g_i / (1 + b_i x_i))` under interference `x`.
pub fn source_relay_rate(
    sigma2_1: &[f64],
    gamma_s: &[f64],
    gamma_r: &[f64],
    sigma2_r: &[f64],
) -> f64 {
    sigma2_1
        .iter()
        .zip(gamma_s)
        .zip(gamma_r.iter().zip(sigma2_r))
        .map(|((s, g), (b, x))| log2_1p(s * g / (1.0 + b * x)))
        .sum()
}

/// Interference on one stream at level `lambda`.
#[inline]
pub(crate) fn stationary_point(a: f64, b: f64, lambda: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    let d = 4.0 * a * b / lambda;
    // sqrt(a^2 + d) - a, without cancellation.
    let root_minus_a = d / (sqrt(a * a + d) + a);
    ((root_minus_a - 2.0) / (2.0 * b)).max(0.0)
}

fn allocation_at(a: &[f64], b: &[f64], lambda: f64, out: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for ((x, &ai), &bi) in out.iter_mut().zip(a).zip(b) {
        *x = stationary_point(ai, bi, lambda);
        total += *x;
    }
    total
}

/// Minimizing interference allocation over the `T`-simplex.
///
/// `gamma_s`, `gamma_r` and `sigma2_1` are index-aligned on the descending source stream order.
pub fn worst_case_rsi(
    gamma_s: &[f64],
    gamma_r: &[f64],
    sigma2_1: &[f64],
    t: f64,
) -> Result<RsiSpectrum> {
    let n = sigma2_1.len();
    for len in [gamma_s.len(), gamma_r.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidConfig(
            "RSI bound must be finite and non-negative",
        ));
    }
    let a: Vec<f64> = sigma2_1.iter().zip(gamma_s).map(|(s, g)| s * g).collect();
    Ok(worst_case_from_products(&a, gamma_r, t))
}

/// As [`worst_case_rsi`] with the products `a_i = s_i * gamma_s_i` precomputed.
pub fn worst_case_from_products(a: &[f64], b: &[f64], t: f64) -> RsiSpectrum {
    let n = a.len();
    if t <= 0.0 {
        return RsiSpectrum::zeros(n);
    }
    if !a.iter().zip(b).any(|(ai, bi)| *ai > 0.0 && *bi > 0.0) {
        return RsiSpectrum {
            vacuous: true,
            ..RsiSpectrum::zeros(n)
        };
    }

    let tol = 1e-9 * t.max(1.0);
    let mut x = vec![0.0; n];
    // In `mu = 1 / lambda` the total is increasing and concave, which false position handles well.
    let mut hi = 1.0f64;
    while allocation_at(a, b, 1.0 / hi, &mut x) < t {
        hi *= 4.0;
    }
    let mut lo = hi;
    while lo > 1e-300 && allocation_at(a, b, 1.0 / lo, &mut x) >= t {
        lo *= 0.25;
    }
    let mu = increasing_root(
        |mu| allocation_at(a, b, 1.0 / mu, &mut x) - t,
        lo,
        hi,
        1e-15 * t,
    );
    let lambda = 1.0 / mu;
    let total = allocation_at(a, b, lambda, &mut x);
    debug_assert!((total - t).abs() <= tol || total == 0.0);
    if total > 0.0 {
        // Put the residual mismatch back proportionally so the budget is exact.
        let f = t / total;
        x.iter_mut().for_each(|v| *v *= f);
    }
    RsiSpectrum {
        sigma2: x,
        water_level: lambda,
        vacuous: false,
    }
}

/// Verifies that descending relay powers and descending source products imply the interference
/// ordering `gamma_r_i * sigma2_r_i >= gamma_r_{i+1} * sigma2_r_{i+1}`.
pub fn check_ordering_redundancy(
    gamma_s: &[f64],
    gamma_r: &[f64],
    sigma2_1: &[f64],
    rsi: &RsiSpectrum,
) -> bool {
    let n = sigma2_1.len();
    if gamma_s.len() != n || gamma_r.len() != n || rsi.sigma2.len() != n {
        return false;
    }
    let descending = |v: &[f64]| {
        let scale = v
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        v.windows(2).all(|w| w[0] - w[1] >= -1e-9 * scale)
    };
    let products: Vec<f64> = sigma2_1.iter().zip(gamma_s).map(|(s, g)| s * g).collect();
    let hits: Vec<f64> = gamma_r
        .iter()
        .zip(&rsi.sigma2)
        .map(|(b, x)| b * x)
        .collect();
    descending(gamma_r) && descending(&products) && descending(&hits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_bound_means_no_interference() {
        let r = worst_case_rsi(&[1.0, 1.0], &[1.0, 1.0], &[4.0, 1.0], 0.0).unwrap();
        assert_eq!(r.sigma2, vec![0.0, 0.0]);
        assert!(!r.vacuous);
    }

    #[test]
    fn single_stream_takes_the_whole_budget() {
        let r = worst_case_rsi(&[2.0], &[0.7], &[3.0], 4.5).unwrap();
        assert!((r.sigma2[0] - 4.5).abs() < 1e-9);
    }

    #[test]
    fn all_relay_power_zero_is_vacuous() {
        let r = worst_case_rsi(&[1.0, 1.0], &[0.0, 0.0], &[4.0, 1.0], 3.0).unwrap();
        assert!(r.vacuous);
        assert_eq!(r.sigma2, vec![0.0, 0.0]);
    }

    #[test]
    fn silent_streams_receive_nothing() {
        let r = worst_case_rsi(&[1.0, 0.0], &[1.0, 1.0], &[4.0, 1.0], 2.0).unwrap();
        assert_eq!(r.sigma2[1], 0.0);
        assert!((r.sigma2[0] - 2.0).abs() < 1e-9);
        let r = worst_case_rsi(&[1.0, 1.0], &[1.0, 0.0], &[4.0, 1.0], 2.0).unwrap();
        assert_eq!(r.sigma2[1], 0.0);
    }

    #[test]
    fn budget_is_tight() {
        let r = worst_case_rsi(&[1.375, 0.625], &[1.0, 1.0], &[4.0, 1.0], 2.0).unwrap();
        assert!((r.total() - 2.0).abs() < 1e-9);
        assert!(r.water_level > 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(matches!(
            worst_case_rsi(&[1.0], &[1.0, 1.0], &[1.0, 1.0], 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(worst_case_rsi(&[1.0], &[1.0], &[1.0], -1.0).is_err());
    }

    #[test]
    fn scrambled_order_fails_redundancy_check() {
        let gs = [1.375, 0.625];
        let gr = [1.0, 1.0];
        let s = [4.0, 1.0];
        let r = worst_case_rsi(&gs, &gr, &s, 2.0).unwrap();
        assert!(check_ordering_redundancy(&gs, &gr, &s, &r));
        let mut scrambled = r.clone();
        scrambled.sigma2.reverse();
        assert!(!check_ordering_redundancy(&gs, &gr, &s, &scrambled));
    }
}
