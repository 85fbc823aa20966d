//! Numerical checks of the matrix-to-spectrum reduction: Fiedler's determinant sandwich,
//! majorization predicates, the covariance construction that preserves the received spectrum
//! without using more power, and a brute-force comparison of the scalar problem against full
//! matrix adversaries on small instances.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    complex_gaussian, hermitian_log2_det, reconstruct_covariance, spectrum, CMatrix, Complex64,
    RANK_CUTOFF,
};
use crate::error::{Error, Result};
use crate::fd::{relay_coupling, solve_source_side, FdOptions};
use crate::num::{exp, ln, sqrt};
use crate::waterfill::water_fill;
use crate::worstcase::worst_case_from_products;

/// Relative slack used when comparing prefix sums and products.
pub const MAJORIZATION_TOL: f64 = 1e-9;

/// Eigenvalues of a Hermitian matrix, descending, with matching eigenvector columns.
pub fn sorted_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(m.nrows(), n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn sorted_eigenvalues(m: &CMatrix) -> Vec<f64> {
    sorted_eigen(m).0
}

fn check_square(a: &CMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Fiedler bounds on `det(I + A B^{-1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiedlerBounds {
    /// `prod(1 + a_i / b_i)` with both spectra descending.
    pub lower: f64,
    pub value: f64,
    /// `prod(1 + a_i / b_{n+1-i})`.
    pub upper: f64,
}

impl FiedlerBounds {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lower <= self.value * (1.0 + rel_tol) && self.value <= self.upper * (1.0 + rel_tol)
    }
}

pub fn fiedler_bounds(a: &CMatrix, b: &CMatrix) -> Result<FiedlerBounds> {
    check_square(a)?;
    check_square(b)?;
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let la = sorted_eigenvalues(a);
    let lb = sorted_eigenvalues(b);
    let b_min = lb.last().copied().unwrap_or(1.0);
    if b_min <= 1e-10 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: b_min,
        });
    }
    let a_scale = la.first().copied().unwrap_or(0.0).abs().max(1.0);
    if la.last().is_some_and(|v| *v < -1e-10 * a_scale) {
        return Err(Error::InvalidConfig(
            "first Fiedler argument must be positive semidefinite",
        ));
    }
    let n = la.len();
    let a_pos = |i: usize| la[i].max(0.0);
    let lower = exp((0..n).map(|i| ln(1.0 + a_pos(i) / lb[i])).sum());
    let upper = exp((0..n).map(|i| ln(1.0 + a_pos(i) / lb[n - 1 - i])).sum());
    let log2_value = hermitian_log2_det(&(a + b)) - hermitian_log2_det(b);
    Ok(FiedlerBounds {
        lower,
        value: libm::exp2(log2_value),
        upper,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorizationReport {
    /// Descending prefix sums of `a` never exceed those of `b`.
    pub weakly_majorized: bool,
    /// Weak majorization with equal totals.
    pub majorized: bool,
    /// Descending prefix products of `a` never exceed those of `b`, with equal full products.
    pub multiplicatively_majorized: bool,
    pub prefix_sums_a: Vec<f64>,
    pub prefix_sums_b: Vec<f64>,
}

fn descending(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn prefix(v: &[f64], f: impl Fn(f64, f64) -> f64, init: f64) -> Vec<f64> {
    v.iter()
        .scan(init, |acc, x| {
            *acc = f(*acc, *x);
            Some(*acc)
        })
        .collect()
}

fn le(x: f64, y: f64) -> bool {
    x <= y + MAJORIZATION_TOL * x.abs().max(y.abs()).max(1.0)
}

fn close(x: f64, y: f64) -> bool {
    le(x, y) && le(y, x)
}

/// Compares two equal-length vectors under the additive and multiplicative orders.
///
/// The multiplicative order is defined through logarithms and is reported false unless both
/// vectors are strictly positive.
pub fn majorization_report(a: &[f64], b: &[f64]) -> Result<MajorizationReport> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (da, db) = (descending(a), descending(b));
    let prefix_sums_a = prefix(&da, |s, x| s + x, 0.0);
    let prefix_sums_b = prefix(&db, |s, x| s + x, 0.0);
    let weakly_majorized = prefix_sums_a
        .iter()
        .zip(&prefix_sums_b)
        .all(|(x, y)| le(*x, *y));
    let majorized = weakly_majorized
        && match (prefix_sums_a.last(), prefix_sums_b.last()) {
            (Some(x), Some(y)) => close(*x, *y),
            _ => true,
        };
    let multiplicatively_majorized = if da.iter().chain(&db).all(|v| *v > 0.0) {
        let la: Vec<f64> = da.iter().map(|v| ln(*v)).collect();
        let lb: Vec<f64> = db.iter().map(|v| ln(*v)).collect();
        let pa = prefix(&la, |s, x| s + x, 0.0);
        let pb = prefix(&lb, |s, x| s + x, 0.0);
        pa.iter().zip(&pb).all(|(x, y)| le(*x, *y))
            && match (pa.last(), pb.last()) {
                (Some(x), Some(y)) => close(*x, *y),
                _ => true,
            }
    } else {
        false
    };
    Ok(MajorizationReport {
        weakly_majorized,
        majorized,
        multiplicatively_majorized,
        prefix_sums_a,
        prefix_sums_b,
    })
}

/// Covariance diagonal in the eigenbasis of `H^H H` that reproduces the received spectrum of `Q`.
#[derive(Debug, Clone)]
pub struct SpectralConstruction {
    pub q_prime: CMatrix,
    /// Eigenvalues of `q_prime` in the order of the basis (strongest channel direction first).
    pub eigvals: Vec<f64>,
    /// Eigenvectors of `H^H H`, descending.
    pub basis: CMatrix,
    /// Channel directions kept; the rest carry zero gain and get zero power.
    pub retained_rank: usize,
    /// Set when `H^H H` is singular, so the construction lives on a subspace.
    pub reduced: bool,
}

pub fn spectral_construct(q: &CMatrix, h: &CMatrix) -> Result<SpectralConstruction> {
    check_square(q)?;
    if h.ncols() != q.nrows() {
        return Err(Error::DimensionMismatch {
            expected: q.nrows(),
            found: h.ncols(),
        });
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = q.nrows();
    let (gains, basis) = sorted_eigen(&(h.adjoint() * h));
    let top = gains.first().copied().unwrap_or(0.0);
    let retained_rank = gains
        .iter()
        .take_while(|g| **g > RANK_CUTOFF * top && **g > 0.0)
        .count();
    let received = sorted_eigenvalues(&(h * q * h.adjoint()));
    let mut eigvals = alloc::vec![0.0; n];
    for i in 0..retained_rank {
        eigvals[i] = received[i].max(0.0) / gains[i];
    }
    let mut q_prime = CMatrix::zeros(n, n);
    for (i, &p) in eigvals.iter().enumerate().take(retained_rank) {
        let v = basis.column(i);
        q_prime += (v * v.adjoint()) * Complex64::new(p, 0.0);
    }
    Ok(SpectralConstruction {
        q_prime,
        eigvals,
        basis,
        retained_rank,
        reduced: retained_rank < n,
    })
}

/// A relay link with two antennas at every node.
#[derive(Debug, Clone)]
pub struct SmallInstance {
    pub source_relay: CMatrix,
    pub relay_dest: CMatrix,
    pub source_power: f64,
    pub relay_power: f64,
    pub rsi_bound: f64,
}

impl SmallInstance {
    pub fn random(seed: u64, source_power: f64, relay_power: f64, rsi_bound: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let source_relay = complex_gaussian(&mut rng, 2, 2, 1.0);
        let relay_dest = complex_gaussian(&mut rng, 2, 2, 1.0);
        Self {
            source_relay,
            relay_dest,
            source_power,
            relay_power,
            rsi_bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    /// Robust source-relay rate from the spectral problem.
    pub scalar_rate: f64,
    /// Lowest rate any sampled matrix adversary inflicts on the spectral source design.
    pub sampled_adversary_min: f64,
    /// Highest rate any gridded matrix source covariance keeps against its aligned adversary.
    pub source_grid_max: f64,
    pub holds: bool,
}

/// Margin by which the matrix-level search may beat the spectral solution.
pub const EQUIV_TOL: f64 = 1e-2;
pub const EQUIV_SAMPLES: usize = 100_000;

fn rate_with_interference(signal: &CMatrix, interference: &CMatrix) -> f64 {
    let n = signal.nrows();
    let base = CMatrix::identity(n, n) + interference;
    hermitian_log2_det(&(&base + signal)) - hermitian_log2_det(&base)
}

fn diag_cov(basis: &CMatrix, eigvals: &[f64]) -> CMatrix {
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        eigvals.len(),
        eigvals.iter().map(|v| Complex64::new(*v, 0.0)),
    ));
    basis * d * basis.adjoint()
}

/// Compares the spectral min-max solution with matrix-level search in both directions:
/// random adversaries against the spectral source design, and a grid of source covariances
/// against their spectrally aligned adversary.
pub fn spectral_reduction_check(
    inst: &SmallInstance,
    samples: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    for (m, what) in [
        (&inst.source_relay, "source-relay"),
        (&inst.relay_dest, "relay-destination"),
    ] {
        if m.shape() != (2, 2) {
            return Err(Error::InvalidConfig(if what == "source-relay" {
                "source-relay channel must be 2x2"
            } else {
                "relay-destination channel must be 2x2"
            }));
        }
    }
    let s1 = spectrum(&inst.source_relay)?;
    let s2 = spectrum(&inst.relay_dest)?;
    let gamma_r = water_fill(&s2, inst.relay_power);
    let coupling = relay_coupling(&gamma_r.powers, s1.len());
    let side = solve_source_side(
        &s1,
        &coupling,
        inst.source_power,
        inst.rsi_bound,
        &FdOptions::default(),
    );

    let q_r = reconstruct_covariance(&inst.relay_dest, &gamma_r.powers)?;
    let relay_cov = q_r.covariance();
    let q_s = reconstruct_covariance(&inst.source_relay, &side.gamma_s.powers)?.covariance();
    let signal = &inst.source_relay * q_s * inst.source_relay.adjoint();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled_adversary_min = f64::INFINITY;
    if inst.rsi_bound > 0.0 {
        for _ in 0..samples {
            let mut hr = complex_gaussian(&mut rng, 2, 2, 1.0);
            let norm2 = hr.norm_squared();
            if norm2 == 0.0 {
                continue;
            }
            hr *= Complex64::new(sqrt(inst.rsi_bound / norm2), 0.0);
            let interference = &hr * &relay_cov * hr.adjoint();
            sampled_adversary_min =
                sampled_adversary_min.min(rate_with_interference(&signal, &interference));
        }
    } else {
        sampled_adversary_min = rate_with_interference(&signal, &CMatrix::zeros(2, 2));
    }

    // Source covariances U diag(p, Ps - p) U^H over a grid of powers and unitary rotations.
    const POWER_STEPS: usize = 20;
    const ANGLE_STEPS: usize = 12;
    const PHASE_STEPS: usize = 8;
    let ps = inst.source_power;
    let mut source_grid_max = f64::NEG_INFINITY;
    for ip in 0..=POWER_STEPS {
        let p = ps * ip as f64 / POWER_STEPS as f64;
        for ia in 0..=ANGLE_STEPS {
            let theta = core::f64::consts::FRAC_PI_2 * ia as f64 / ANGLE_STEPS as f64;
            for iph in 0..PHASE_STEPS {
                let phi = core::f64::consts::TAU * iph as f64 / PHASE_STEPS as f64;
                let (c, s) = (libm::cos(theta), libm::sin(theta));
                let e = Complex64::new(libm::cos(phi), libm::sin(phi));
                let u = CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        Complex64::new(c, 0.0),
                        -e.conj() * s,
                        e * s,
                        Complex64::new(c, 0.0),
                    ],
                );
                let q = diag_cov(&u, &[p, ps - p]);
                let sig = &inst.source_relay * q * inst.source_relay.adjoint();
                let rate = aligned_adversary_rate(&sig, &q_r.eigvecs, &coupling, inst.rsi_bound);
                source_grid_max = source_grid_max.max(rate);
            }
        }
    }

    let holds =
        sampled_adversary_min >= side.r_sr - EQUIV_TOL && source_grid_max <= side.r_sr + EQUIV_TOL;
    Ok(EquivalenceReport {
        scalar_rate: side.r_sr,
        sampled_adversary_min,
        source_grid_max,
        holds,
    })
}

/// Rate under the adversary `L diag(sqrt(x)) R^H` that diagonalizes the interference in the
/// signal's eigenbasis `L`, with `R` the relay's transmit directions.
fn aligned_adversary_rate(
    signal: &CMatrix,
    relay_basis: &CMatrix,
    relay_powers: &[f64],
    t: f64,
) -> f64 {
    let (lambda, left) = sorted_eigen(signal);
    let lambda: Vec<f64> = lambda.iter().map(|v| v.max(0.0)).collect();
    let x = worst_case_from_products(&lambda, relay_powers, t);
    let n = signal.nrows();
    let mut sqrt_x = CMatrix::zeros(n, relay_basis.ncols());
    for i in 0..n.min(relay_basis.ncols()) {
        sqrt_x[(i, i)] = Complex64::new(sqrt(x.sigma2[i]), 0.0);
    }
    let hr = left * sqrt_x * relay_basis.adjoint();
    let relay_cov = diag_cov(relay_basis, relay_powers);
    let interference = &hr * relay_cov * hr.adjoint();
    rate_with_interference(signal, &interference)
}

/// [`spectral_reduction_check`] with the default sample budget, reduced to its verdict.
pub fn spectral_reduction_equiv(inst: &SmallInstance) -> bool {
    spectral_reduction_check(inst, EQUIV_SAMPLES, 0x5eed).is_ok_and(|r| r.holds)
}
