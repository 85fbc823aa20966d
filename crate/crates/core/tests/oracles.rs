//! Solver outputs against brute-force and matrix-level oracles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relay_core::channel::{complex_gaussian, log_det_rate, reconstruct_covariance};
use relay_core::fd::{relay_coupling, solve_source_side, FdOptions};
use relay_core::majorize::sorted_eigenvalues;
use relay_core::waterfill::objective;
use relay_core::worstcase::source_relay_rate;
use relay_core::{
    capped_water_fill, fd_rate, hd_rate, sample_channel, sample_channel_scaled, spectrum,
    water_fill, worst_case_rsi, SystemConfig,
};

fn log2_rate(gains: &[f64], powers: &[f64]) -> f64 {
    gains
        .iter()
        .zip(powers)
        .map(|(g, p)| (1.0 + g * p).log2())
        .sum()
}

#[test]
fn two_channel_water_fill_matches_simplex_grid() {
    let gains = [2.0, 0.5];
    let a = water_fill(&gains, 1.0);
    assert!((a.powers[0] - 1.0).abs() < 1e-12 && a.powers[1] == 0.0);
    let steps = 100_000;
    let best = (0..=steps)
        .map(|k| {
            let p = k as f64 / steps as f64;
            log2_rate(&gains, &[p, 1.0 - p])
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((objective(&gains, &a.powers) - best).abs() < 1e-6);
}

#[test]
fn single_channel_and_symmetric_water_fill() {
    let a = water_fill(&[1.0], 5.0);
    assert_eq!(a.powers, vec![5.0]);
    assert!((a.water_level - 6.0).abs() < 1e-12);
    let a = water_fill(&[1.0, 1.0], 4.0);
    assert_eq!(a.powers, vec![2.0, 2.0]);
}

/// Maximizes over `p1 + p2 + p3 = budget` with `raw_i p_i` descending.
fn capped_grid(effective: &[f64; 3], raw: &[f64; 3], budget: f64, steps: usize) -> f64 {
    let h = budget / steps as f64;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        for j in 0..=steps - i {
            let p = [i as f64 * h, j as f64 * h, budget - (i + j) as f64 * h];
            if raw[0] * p[0] >= raw[1] * p[1] && raw[1] * p[1] >= raw[2] * p[2] {
                best = best.max(log2_rate(effective, &p));
            }
        }
    }
    best
}

#[test]
fn capped_water_fill_matches_constrained_grid() {
    let raw = [4.0, 3.0, 1.0];
    let effective = [0.5, 3.0, 1.0];
    let budget = 3.0;
    let plain = water_fill(&effective, budget);
    assert!(
        raw[0] * plain.powers[0] < raw[1] * plain.powers[1],
        "instance must violate a cap"
    );
    let capped = capped_water_fill(&effective, &raw, budget);
    let grid = capped_grid(&effective, &raw, budget, 1500);
    let got = objective(&effective, &capped.powers);
    assert!(got >= grid - 1e-9, "{got} below grid {grid}");
    assert!(got - grid < 1e-3, "{got} vs grid {grid}");
}

#[test]
fn interference_free_capped_fill_is_plain() {
    let a = capped_water_fill(&[4.0, 1.0], &[4.0, 1.0], 2.0);
    assert!((a.powers[0] - 1.375).abs() < 1e-12 && (a.powers[1] - 0.625).abs() < 1e-12);
    assert!(4.0 * a.powers[0] >= a.powers[1]);
}

#[test]
fn two_stream_adversary_matches_simplex_grid() {
    let (s, g, b, t) = ([4.0, 1.0], [1.375, 0.625], [1.0, 1.0], 2.0);
    let r = worst_case_rsi(&g, &b, &s, t).unwrap();
    let got = source_relay_rate(&s, &g, &b, &r.sigma2);
    let steps = 200_000;
    let grid = (0..=steps)
        .map(|k| {
            let x = t * k as f64 / steps as f64;
            source_relay_rate(&s, &g, &b, &[x, t - x])
        })
        .fold(f64::INFINITY, f64::min);
    assert!(got <= grid + 1e-9 && grid - got < 1e-3, "{got} vs {grid}");
}

/// Max over capped source splits of the min over interference splits, both on `Sigma = budget`.
fn nested_grid(s: &[f64], b: &[f64], ps: f64, t: f64, steps: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        let g1 = ps * i as f64 / steps as f64;
        let g = [g1, ps - g1];
        if s[0] * g[0] < s[1] * g[1] {
            continue;
        }
        let mut worst = f64::INFINITY;
        for j in 0..=steps {
            let x1 = t * j as f64 / steps as f64;
            worst = worst.min(source_relay_rate(s, &g, b, &[x1, t - x1]));
        }
        best = best.max(worst);
    }
    best
}

#[test]
fn source_side_matches_nested_min_max_grid() {
    let cfg = SystemConfig::new(2, 2, 2, 2, 5.0, 5.0, 0.0).unwrap();
    for (seed, t) in [
        (1u64, 1.0),
        (2, 5.0),
        (3, 20.0),
        (4, 0.3),
        (5, 60.0),
        (6, 5.0),
    ] {
        let ch = sample_channel(&cfg, seed);
        let s1 = spectrum(&ch.source_relay).unwrap();
        let s2 = spectrum(&ch.relay_dest).unwrap();
        for p in [5.0, 1.0] {
            let b = relay_coupling(&water_fill(&s2, p).powers, 2);
            let side = solve_source_side(&s1, &b, 5.0, t, &FdOptions::default());
            let oracle = nested_grid(&s1, &b, 5.0, t, 1500);
            assert!(
                (side.r_sr - oracle).abs() < 1e-2,
                "seed {seed} T {t} P {p}: {} vs {oracle}",
                side.r_sr
            );
        }
    }
}

#[test]
fn spectrum_matches_gram_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (r, c) in [(3, 5), (5, 3), (4, 4), (1, 6)] {
        let h = complex_gaussian(&mut rng, r, c, 1.0);
        let s = spectrum(&h).unwrap();
        let gram = if r <= c {
            &h * h.adjoint()
        } else {
            h.adjoint() * &h
        };
        let eig = sorted_eigenvalues(&gram);
        assert_eq!(s.len(), r.min(c));
        for (a, b) in s.iter().zip(&eig) {
            assert!((a - b).abs() < 1e-10 * eig[0], "{a} vs {b}");
        }
    }
}

#[test]
fn half_duplex_rate_matches_determinant_form() {
    let cfg = SystemConfig::new(4, 3, 7, 4, 5.0, 5.0, 0.0).unwrap();
    for seed in 0..20 {
        let ch = sample_channel(&cfg, seed);
        let hd = hd_rate(&ch, &cfg).unwrap();
        let qs = reconstruct_covariance(&ch.source_relay, &hd.source_alloc.powers)
            .unwrap()
            .covariance();
        let qr = reconstruct_covariance(&ch.relay_dest, &hd.relay_alloc.powers)
            .unwrap()
            .covariance();
        let r_sr = log_det_rate(&ch.source_relay, &qs);
        let r_rd = log_det_rate(&ch.relay_dest, &qr);
        assert!((qs.trace().re - 5.0).abs() < 1e-9 && (qr.trace().re - 5.0).abs() < 1e-9);
        assert!((r_sr - hd.r_sr).abs() < 1e-9 && (r_rd - hd.r_rd).abs() < 1e-9);
        let want = r_sr * r_rd / (r_sr + r_rd);
        assert!((hd.rate - want).abs() < 1e-9);
        assert!((hd.alpha * hd.r_sr - (1.0 - hd.alpha) * hd.r_rd).abs() < 1e-9);
    }
}

#[test]
fn fd_rate_at_zero_bound_matches_determinant_form() {
    let cfg = SystemConfig::new(3, 4, 2, 3, 5.0, 2.0, 0.0).unwrap();
    for seed in 0..10 {
        let ch = sample_channel(&cfg, seed);
        let fd = fd_rate(&ch, &cfg).unwrap();
        let qs = reconstruct_covariance(&ch.source_relay, &fd.gamma_s.powers)
            .unwrap()
            .covariance();
        let qr = reconstruct_covariance(&ch.relay_dest, &fd.gamma_r.powers)
            .unwrap()
            .covariance();
        let r_sr = log_det_rate(&ch.source_relay, &qs);
        let r_rd = log_det_rate(&ch.relay_dest, &qr);
        assert!((fd.rate - r_sr.min(r_rd)).abs() < 1e-9);
    }
}

#[test]
fn channel_entries_have_requested_moments() {
    let cfg = SystemConfig::new(4, 5, 5, 4, 1.0, 1.0, 0.0).unwrap();
    for variance in [1.0, 2.0] {
        let (mut n, mut sum_re, mut sum_im, mut re2, mut im2, mut cross) =
            (0usize, 0.0, 0.0, 0.0, 0.0, 0.0);
        for seed in 0..2500u64 {
            let ch = sample_channel_scaled(&cfg, seed, variance);
            for z in ch.source_relay.iter().chain(ch.relay_dest.iter()) {
                n += 1;
                sum_re += z.re;
                sum_im += z.im;
                re2 += z.re * z.re;
                im2 += z.im * z.im;
                cross += z.re * z.im;
            }
        }
        assert!(n >= 100_000);
        let nf = n as f64;
        let half = variance / 2.0;
        // Five standard errors.
        let mean_tol = 5.0 * (half / nf).sqrt();
        let var_tol = 5.0 * (2.0 * half * half / nf).sqrt();
        assert!((sum_re / nf).abs() < mean_tol && (sum_im / nf).abs() < mean_tol);
        assert!((re2 / nf - half).abs() < var_tol, "{}", re2 / nf);
        assert!((im2 / nf - half).abs() < var_tol, "{}", im2 / nf);
        assert!((cross / nf).abs() < 5.0 * half / nf.sqrt());
    }
}

#[test]
fn symmetric_scalar_link_doubles_half_duplex() {
    let cfg = SystemConfig::new(1, 1, 1, 1, 3.0, 3.0, 0.0).unwrap();
    let s = spectrum(&relay_core::CMatrix::identity(1, 1)).unwrap();
    let fd = relay_core::FdProblem::new(&s, &s, cfg).solve();
    assert!((fd.r_sr - 2.0).abs() < 1e-12 && (fd.rate - 2.0).abs() < 1e-12);
    assert_eq!(fd.relay_power_used, 3.0);
    let hd = relay_core::hd::hd_rate_from_spectra(&s, &s, &cfg);
    assert!((hd.rate - 1.0).abs() < 1e-12);
}

#[test]
fn zero_relay_power_gives_zero_rate() {
    let cfg = SystemConfig::new(2, 2, 2, 2, 5.0, 0.0, 3.0).unwrap();
    let fd = fd_rate(&sample_channel(&cfg, 9), &cfg).unwrap();
    assert_eq!(fd.rate, 0.0);
}
