//! Direct solve of the source-side max-min for fixed relay powers.
//!
//! Dualizing the interference budget with a multiplier `lambda` lets the adversary respond
//! stream by stream, which turns the max-min into a maximization. Its value is concave in
//! `lambda` with slope `sum_i x_i - T`, so `lambda` is found by a bracketing root search. For each `lambda`
//! the source problem is a capped water-fill whose per-stream response has a closed form:
//! with water level `W = raw / nu` in received-power units,
//!
//! ```text
//! u = lambda W^2 / (b + lambda W),  1 + b x = W b / (b + lambda W)   when W (b - lambda) > b
//! u = W - 1,                        x = 0                           otherwise
//! ```
//!
//! where `u = raw * gamma_s` and `b` is the coupled relay power.

use alloc::vec;
use alloc::vec::Vec;

use crate::num::increasing_root;
use crate::waterfill::capped_water_fill;
use crate::worstcase::{stationary_point, worst_case_from_products, RsiSpectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct SaddlePoint {
    pub gamma_s: Vec<f64>,
    /// Exact best response to `gamma_s`.
    pub rsi: RsiSpectrum,
}

/// Saddle point of `sum log(1 + s_i g_i / (1 + b_i x_i))` over the capped source simplex and
/// the `T`-simplex of interference.
pub fn solve_saddle(
    sigma2_1: &[f64],
    coupling: &[f64],
    source_power: f64,
    rsi_bound: f64,
) -> SaddlePoint {
    assert_eq!(
        sigma2_1.len(),
        coupling.len(),
        "coupling must match the source stream count"
    );
    let n = sigma2_1.len();
    let rank = sigma2_1.iter().take_while(|s| **s > 0.0).count();
    let hurtable = (0..rank).any(|i| coupling[i] > 0.0);
    if rsi_bound <= 0.0 || source_power <= 0.0 || !hurtable {
        let gamma_s = capped_water_fill(sigma2_1, sigma2_1, source_power).powers;
        let products: Vec<f64> = sigma2_1.iter().zip(&gamma_s).map(|(s, g)| s * g).collect();
        let rsi = worst_case_from_products(&products, coupling, rsi_bound);
        return SaddlePoint { gamma_s, rsi };
    }

    let game = Game {
        raw: &sigma2_1[..rank],
        b: &coupling[..rank],
        budget: source_power,
    };
    let mut state = State::new(rank);

    // Total interference is increasing in `mu = 1 / lambda`.
    let mut hi = 1.0;
    while game.respond(1.0 / hi, &mut state) < rsi_bound {
        hi *= 4.0;
    }
    let mut lo = hi;
    while lo > 1e-300 && game.respond(1.0 / lo, &mut state) >= rsi_bound {
        lo *= 0.25;
    }
    let mu = increasing_root(
        |mu| game.respond(1.0 / mu, &mut state) - rsi_bound,
        lo,
        hi,
        1e-13 * rsi_bound,
    );
    game.respond(1.0 / mu, &mut state);

    let mut gamma_s = vec![0.0; n];
    for ((g, u), s) in gamma_s.iter_mut().zip(&state.u).zip(game.raw) {
        *g = u / s;
    }
    let spent: f64 = gamma_s.iter().sum();
    if spent > 0.0 {
        let f = source_power / spent;
        gamma_s.iter_mut().for_each(|g| *g *= f);
    }
    let products: Vec<f64> = sigma2_1.iter().zip(&gamma_s).map(|(s, g)| s * g).collect();
    let rsi = worst_case_from_products(&products, coupling, rsi_bound);
    SaddlePoint { gamma_s, rsi }
}

struct Game<'a> {
    raw: &'a [f64],
    b: &'a [f64],
    budget: f64,
}

struct State {
    u: Vec<f64>,
    x: Vec<f64>,
    blocks: Vec<Block>,
}

impl State {
    fn new(n: usize) -> Self {
        Self {
            u: vec![0.0; n],
            x: vec![0.0; n],
            blocks: Vec::with_capacity(n),
        }
    }
}

#[derive(Clone, Copy)]
struct Block {
    start: usize,
    end: usize,
    cost: f64,
    value: f64,
}

/// Received power and interference of one stream at water level `w` and RSI multiplier `lambda`.
fn stream_response(w: f64, b: f64, lambda: f64) -> (f64, f64) {
    if w <= 1.0 {
        return (0.0, 0.0);
    }
    if b > 0.0 && w * (b - lambda) > b {
        let d = b + lambda * w;
        (lambda * w * w / d, (w * b / d - 1.0) / b)
    } else {
        (w - 1.0, 0.0)
    }
}

impl Game<'_> {
    /// Source best response at `lambda` with the budget met; returns the total interference
    /// the adversary would place.
    fn respond(&self, lambda: f64, st: &mut State) -> f64 {
        // Spend is increasing in the water level `1 / nu`.
        let top = self.raw.iter().fold(0.0f64, |m, s| m.max(*s));
        let mut hi = 1.0 / top;
        loop {
            hi *= 2.0;
            if self.fit(1.0 / hi, lambda, st) >= self.budget {
                break;
            }
        }
        let level = increasing_root(
            |l| self.fit(1.0 / l, lambda, st) - self.budget,
            1.0 / top,
            hi,
            1e-15 * self.budget,
        );
        self.fit(1.0 / level, lambda, st);
        st.x.iter().sum()
    }

    /// Capped allocation at budget multiplier `nu`; returns the power spent.
    fn fit(&self, nu: f64, lambda: f64, st: &mut State) -> f64 {
        st.blocks.clear();
        for i in 0..self.raw.len() {
            let cost = 1.0 / self.raw[i];
            let (u, _) = stream_response(self.raw[i] / nu, self.b[i], lambda);
            let mut blk = Block {
                start: i,
                end: i + 1,
                cost,
                value: u,
            };
            while let Some(prev) = st.blocks.last() {
                if prev.value >= blk.value {
                    break;
                }
                let prev = st.blocks.pop().expect("non-empty");
                let cost = prev.cost + blk.cost;
                let value = self.block_value(prev.start, blk.end, cost, nu, lambda);
                blk = Block {
                    start: prev.start,
                    end: blk.end,
                    cost,
                    value,
                };
            }
            st.blocks.push(blk);
        }
        let mut spent = 0.0;
        for blk in &st.blocks {
            for i in blk.start..blk.end {
                st.u[i] = blk.value;
                st.x[i] = stationary_point(blk.value, self.b[i], lambda);
            }
            spent += blk.cost * blk.value;
        }
        spent
    }

    /// Common received power of a pooled block: the sum of marginals `1 / (1 + b x(u) + u)`
    /// matches `nu * cost`.
    fn block_value(&self, start: usize, end: usize, cost: f64, nu: f64, lambda: f64) -> f64 {
        let target = nu * cost;
        let len = (end - start) as f64;
        if len <= target {
            return 0.0;
        }
        let marginal = |u: f64| -> f64 {
            (start..end)
                .map(|i| 1.0 / (1.0 + self.b[i] * stationary_point(u, self.b[i], lambda) + u))
                .sum()
        };
        let (mut lo, mut hi) = (0.0, len / target - 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if !(mid > lo && mid < hi) {
                break;
            }
            if marginal(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worstcase::source_relay_rate;

    #[test]
    fn closed_form_matches_stationarity() {
        let (w, b, lambda) = (30.0, 1.5, 0.02);
        let (u, x) = stream_response(w, b, lambda);
        assert!(x > 0.0);
        assert!((1.0 + b * x + u - w).abs() < 1e-9);
        assert!((stationary_point(u, b, lambda) - x).abs() < 1e-9);
    }

    #[test]
    fn zero_bound_is_plain_water_fill() {
        let s = [4.0, 1.0];
        let p = solve_saddle(&s, &[1.0, 1.0], 2.0, 0.0);
        assert!((p.gamma_s[0] - 1.375).abs() < 1e-12);
        assert!((p.gamma_s[1] - 0.625).abs() < 1e-12);
    }

    #[test]
    fn saddle_beats_unilateral_deviations() {
        let s = [21.98, 5.13, 2.14, 0.046];
        let b = [1.81, 1.74, 1.45, 0.0];
        let p = solve_saddle(&s, &b, 5.0, 400.0);
        let value = source_relay_rate(&s, &p.gamma_s, &b, &p.rsi.sigma2);
        // Best source reply to the saddle interference cannot improve on it.
        let eff: Vec<f64> = s
            .iter()
            .zip(&b)
            .zip(&p.rsi.sigma2)
            .map(|((s, b), x)| s / (1.0 + b * x))
            .collect();
        let reply = capped_water_fill(&eff, &s, 5.0);
        let best = source_relay_rate(&s, &reply.powers, &b, &p.rsi.sigma2);
        assert!(best - value < 1e-6, "{best} vs {value}");
    }
}
