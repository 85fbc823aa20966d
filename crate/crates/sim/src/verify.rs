//! Randomized checks of the matrix-level identities behind the spectral reduction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relay_core::channel::complex_gaussian;
use relay_core::majorize::{
    fiedler_bounds, majorization_report, sorted_eigenvalues, spectral_construct,
    spectral_reduction_check, SmallInstance, EQUIV_SAMPLES,
};
use relay_core::{CMatrix, Complex64};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn count(name: &'static str, failures: usize, total: usize) -> Self {
        Self {
            name,
            passed: failures == 0,
            detail: format!("{failures} of {total} failed"),
        }
    }

    /// `PASS name (detail)` or `FAIL ...`.
    pub fn line(&self) -> String {
        format!(
            "{} {} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Random matrix pairs per identity.
    pub pairs: usize,
    /// Random 2x2 relay instances for the matrix-adversary comparison.
    pub equiv_instances: usize,
    /// Matrix adversaries sampled per instance.
    pub equiv_samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            pairs: 1000,
            equiv_instances: 5,
            equiv_samples: EQUIV_SAMPLES,
            seed: 7,
        }
    }
}

/// Random Hermitian PSD matrix `G G^H` of the given rank.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMatrix {
    let g = complex_gaussian(rng, n, rank, 1.0);
    &g * g.adjoint()
}

/// Random Hermitian PD matrix with minimum eigenvalue at least `floor`.
pub fn random_pd(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> CMatrix {
    random_psd(rng, n, n) + CMatrix::identity(n, n) * Complex64::new(floor, 0.0)
}

fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}

pub fn fiedler_sandwich(rng: &mut ChaCha8Rng, pairs: usize) -> Check {
    let mut failures = 0;
    for k in 0..pairs {
        let n = 2 + k % 3;
        let a = random_psd(rng, n, 1 + k % n);
        let b = random_pd(rng, n, 1e-3);
        match fiedler_bounds(&a, &b) {
            Ok(f) if f.holds(1e-8) => {}
            _ => failures += 1,
        }
    }
    Check::count("fiedler sandwich", failures, pairs)
}

/// The covariance construction keeps the received spectrum and does not raise the trace, and
/// each link of the log-majorization chain holds on its own.
pub fn spectral_construction(rng: &mut ChaCha8Rng, pairs: usize) -> Vec<Check> {
    let (mut spectrum_fail, mut trace_fail, mut product_fail) = (0, 0, 0);
    let (mut log_fail, mut mult_fail, mut weak_fail) = (0, 0, 0);
    for _ in 0..pairs {
        let q = random_pd(rng, 3, 1e-2);
        let h = complex_gaussian(rng, 3, 3, 1.0);
        let Ok(c) = spectral_construct(&q, &h) else {
            spectrum_fail += 1;
            continue;
        };
        let want = sorted_eigenvalues(&(&h * &q * h.adjoint()));
        let got = sorted_eigenvalues(&(&h * &c.q_prime * h.adjoint()));
        if want
            .iter()
            .zip(&got)
            .any(|(w, g)| (w - g).abs() > 1e-8 * want[0].max(1.0))
        {
            spectrum_fail += 1;
        }
        let (tq, tp) = (q.trace().re, c.q_prime.trace().re);
        if tp > tq + 1e-9 {
            trace_fail += 1;
        }
        let lq = sorted_eigenvalues(&q);
        let mut lp = c.eigvals.clone();
        lp.sort_by(|x, y| y.total_cmp(x));
        let prod = |v: &[f64]| v.iter().map(|x| x.ln()).sum::<f64>();
        if c.reduced || !rel_close(prod(&lp), prod(&lq), 1e-8) {
            product_fail += 1;
        }
        if lp.iter().chain(&lq).any(|v| *v <= 0.0) {
            log_fail += 1;
            continue;
        }
        let log_p: Vec<f64> = lp.iter().map(|v| v.ln()).collect();
        let log_q: Vec<f64> = lq.iter().map(|v| v.ln()).collect();
        let links = (
            majorization_report(&log_p, &log_q).map(|r| r.majorized),
            majorization_report(&lp, &lq)
                .map(|r| (r.multiplicatively_majorized, r.weakly_majorized)),
        );
        match links {
            (Ok(log), Ok((mult, weak))) => {
                log_fail += usize::from(!log);
                mult_fail += usize::from(!mult);
                weak_fail += usize::from(!weak);
            }
            _ => log_fail += 1,
        }
    }
    vec![
        Check::count("construction keeps received spectrum", spectrum_fail, pairs),
        Check::count("construction trace inequality", trace_fail, pairs),
        Check::count("construction keeps eigenvalue product", product_fail, pairs),
        Check::count("log spectrum majorized", log_fail, pairs),
        Check::count("spectrum multiplicatively majorized", mult_fail, pairs),
        Check::count("spectrum weakly majorized", weak_fail, pairs),
    ]
}

/// `a` is multiplicatively majorized by `b` exactly when `log a` is majorized by `log b`.
/// Half the pairs are built to be log-majorized by averaging log entries.
pub fn multiplicative_equivalence(rng: &mut ChaCha8Rng, pairs: usize) -> Check {
    let mut failures = 0;
    for k in 0..pairs {
        let n = 2 + k % 4;
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..5.0)).collect();
        let a: Vec<f64> = if k % 2 == 0 {
            let mut la: Vec<f64> = b.iter().map(|v| v.ln()).collect();
            for _ in 0..3 {
                let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
                let t: f64 = rng.random_range(0.0..1.0);
                let (x, y) = (la[i], la[j]);
                la[i] = t * x + (1.0 - t) * y;
                la[j] = t * y + (1.0 - t) * x;
            }
            la.iter().map(|v| v.exp()).collect()
        } else {
            (0..n).map(|_| rng.random_range(0.05..5.0)).collect()
        };
        let la: Vec<f64> = a.iter().map(|v| v.ln()).collect();
        let lb: Vec<f64> = b.iter().map(|v| v.ln()).collect();
        match (majorization_report(&a, &b), majorization_report(&la, &lb)) {
            (Ok(m), Ok(l)) if m.multiplicatively_majorized == l.majorized => {
                if k % 2 == 0 && !l.majorized {
                    failures += 1;
                }
            }
            _ => failures += 1,
        }
    }
    Check::count(
        "multiplicative majorization matches log majorization",
        failures,
        pairs,
    )
}

/// `AB` and `BA` share their nonzero spectrum: all power traces agree.
pub fn product_spectra(rng: &mut ChaCha8Rng, pairs: usize) -> Check {
    let mut failures = 0;
    for k in 0..pairs {
        let (m, n) = (2 + k % 3, 1 + (k / 3) % 4);
        let a = complex_gaussian(rng, m, n, 1.0);
        let b = complex_gaussian(rng, n, m, 1.0);
        let (ab, ba) = (&a * &b, &b * &a);
        let (mut pab, mut pba) = (ab.clone(), ba.clone());
        for _ in 0..m.max(n) {
            let (x, y) = (pab.trace(), pba.trace());
            let d = x - y;
            if d.re.hypot(d.im) > 1e-9 * x.re.hypot(x.im).max(1.0) {
                failures += 1;
                break;
            }
            pab = &pab * &ab;
            pba = &pba * &ba;
        }
    }
    Check::count("AB and BA share nonzero spectrum", failures, pairs)
}

/// Matrix adversaries and matrix source designs never beat the spectral solution.
pub fn spectral_equivalence(instances: usize, samples: usize, seed: u64) -> Check {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for k in 0..instances {
        let t = [1.0, 5.0, 20.0][k % 3];
        let inst = SmallInstance::random(seed.wrapping_add(k as u64), 5.0, 5.0, t);
        match spectral_reduction_check(&inst, samples, seed ^ k as u64) {
            Ok(r) => {
                worst = worst
                    .max(r.scalar_rate - r.sampled_adversary_min)
                    .max(r.source_grid_max - r.scalar_rate);
                failures += usize::from(!r.holds);
            }
            Err(_) => failures += 1,
        }
    }
    Check {
        name: "matrix search never beats spectral solution",
        passed: failures == 0,
        detail: format!("{failures} of {instances} failed, worst excess {worst:.2e} bits"),
    }
}

pub fn run_suite(opts: &VerifyOptions) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = vec![fiedler_sandwich(&mut rng, opts.pairs)];
    checks.extend(spectral_construction(&mut rng, opts.pairs));
    checks.push(multiplicative_equivalence(&mut rng, opts.pairs));
    checks.push(product_spectra(&mut rng, opts.pairs));
    checks.push(spectral_equivalence(
        opts.equiv_instances,
        opts.equiv_samples,
        opts.seed,
    ));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let opts = VerifyOptions {
            pairs: 50,
            equiv_instances: 1,
            equiv_samples: 2000,
            seed: 3,
        };
        for c in run_suite(&opts) {
            assert!(c.passed, "{}", c.line());
        }
    }
}
