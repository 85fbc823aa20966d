//! Classical water-filling and the multilevel (capped) variant used on the source-relay hop.
//!
//! The capped problem is
//!
//! ```text
//! maximize   sum_i log2(1 + v_i * p_i)
//! subject to sum_i p_i <= budget,  p_i >= 0,
//!            s_i * p_i >= s_{i+1} * p_{i+1}
//! ```
//!
//! where `v_i` are the interference-degraded gains and `s_i` the raw (descending) channel gains.
//! Substituting `u_i = s_i * p_i` turns the caps into a plain ordering `u_1 >= u_2 >= ...`, so for
//! a fixed budget multiplier the problem is a separable concave isotonic fit that
//! pool-adjacent-violators solves exactly. The multiplier is then matched to the budget by
//! bisection.

use alloc::vec;
use alloc::vec::Vec;

use crate::num::{increasing_root, log2_1p};

/// A non-negative power vector together with its water level.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub powers: Vec<f64>,
    /// Water level `1/nu` of the budget multiplier `nu`; for plain water-filling this is the
    /// `tau` in `p_i = [tau - 1/g_i]^+`.
    pub water_level: f64,
    /// Number of channels with strictly positive power.
    pub active_count: usize,
    /// Set when a positive budget could not be spent because no gain was positive.
    pub degenerate: bool,
}

impl Allocation {
    fn zeros(n: usize, water_level: f64, degenerate: bool) -> Self {
        Self {
            powers: vec![0.0; n],
            water_level,
            active_count: 0,
            degenerate,
        }
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }
}

/// `sum_i log2(1 + gains[i] * powers[i])`.
pub fn objective(gains: &[f64], powers: &[f64]) -> f64 {
    gains.iter().zip(powers).map(|(g, p)| log2_1p(g * p)).sum()
}

/// Maximizes `sum log2(1 + g_i p_i)` under `sum p_i <= budget`.
///
/// Gains need not be sorted; ties are resolved by index. Non-positive gains get no power.
pub fn water_fill(gains: &[f64], budget: f64) -> Allocation {
    debug_assert!(gains.iter().all(|g| g.is_finite()), "gains must be finite");
    debug_assert!(budget >= 0.0, "budget must be non-negative");
    let n = gains.len();
    let mut order: Vec<usize> = (0..n).filter(|&i| gains[i] > 0.0).collect();
    if order.is_empty() {
        return Allocation::zeros(n, 0.0, budget > 0.0);
    }
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
    let strongest = gains[order[0]];
    if budget <= 0.0 {
        return Allocation::zeros(n, 1.0 / strongest, false);
    }

    // Largest k whose level clears the k-th floor.
    let mut floor_sum: f64 = order.iter().map(|&i| 1.0 / gains[i]).sum();
    let mut k = order.len();
    let mut level = (budget + floor_sum) / k as f64;
    while k > 1 && level <= 1.0 / gains[order[k - 1]] {
        floor_sum -= 1.0 / gains[order[k - 1]];
        k -= 1;
        level = (budget + floor_sum) / k as f64;
    }

    let mut powers = vec![0.0; n];
    for &i in &order[..k] {
        powers[i] = (level - 1.0 / gains[i]).max(0.0);
    }
    let active_count = powers.iter().filter(|p| **p > 0.0).count();
    Allocation {
        powers,
        water_level: level,
        active_count,
        degenerate: false,
    }
}

/// True when `raw[i] * p[i] >= raw[i+1] * p[i+1]` holds everywhere up to a relative slack.
pub fn caps_satisfied(raw_gains: &[f64], powers: &[f64], rel_tol: f64) -> bool {
    let scale = raw_gains
        .iter()
        .zip(powers)
        .map(|(s, p)| s * p)
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    raw_gains
        .windows(2)
        .zip(powers.windows(2))
        .all(|(s, p)| s[0] * p[0] - s[1] * p[1] >= -rel_tol * scale)
}

/// Multilevel water-filling: maximizes `sum log2(1 + v_i p_i)` under the budget and the
/// ordering caps `raw_i p_i >= raw_{i+1} p_{i+1}`.
///
/// `raw_gains` must be sorted descending and have the same length as `effective_gains`.
/// Streams with a zero raw gain never receive power, and once a stream is switched off every
/// weaker stream is off as well.
pub fn capped_water_fill(effective_gains: &[f64], raw_gains: &[f64], budget: f64) -> Allocation {
    assert_eq!(
        effective_gains.len(),
        raw_gains.len(),
        "effective and raw gains must have equal length"
    );
    debug_assert!(
        raw_gains.windows(2).all(|w| w[0] >= w[1]),
        "raw gains must be descending"
    );
    let n = raw_gains.len();
    let rank = raw_gains.iter().take_while(|s| **s > 0.0).count();

    let plain = water_fill(&effective_gains[..rank], budget);
    if plain.degenerate || budget <= 0.0 {
        return Allocation {
            powers: pad(plain.powers, n),
            ..plain
        };
    }
    if caps_satisfied(&raw_gains[..rank], &plain.powers, 1e-12) {
        return Allocation {
            powers: pad(plain.powers, n),
            ..plain
        };
    }

    let problem = PooledProblem::new(&effective_gains[..rank], &raw_gains[..rank]);
    let (nu, mut powers) = problem.solve(budget);
    // Uniform rescale onto the budget; keeps every cap intact.
    let spent: f64 = powers.iter().sum();
    if spent > 0.0 {
        let f = budget / spent;
        powers.iter_mut().for_each(|p| *p *= f);
    }
    let active_count = powers.iter().filter(|p| **p > 0.0).count();
    Allocation {
        powers: pad(powers, n),
        water_level: 1.0 / nu,
        active_count,
        degenerate: false,
    }
}

fn pad(mut v: Vec<f64>, n: usize) -> Vec<f64> {
    v.resize(n, 0.0);
    v
}

/// The capped problem in `u_i = raw_i * p_i` coordinates:
/// maximize `sum ln(1 + w_i u_i) - nu * sum c_i u_i` over `u_1 >= ... >= u_n >= 0`,
/// with `w_i = v_i / raw_i` and `c_i = 1 / raw_i`.
struct PooledProblem {
    w: Vec<f64>,
    c: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Block {
    start: usize,
    end: usize,
    cost: f64,
    value: f64,
}

impl PooledProblem {
    fn new(effective: &[f64], raw: &[f64]) -> Self {
        let w = effective
            .iter()
            .zip(raw)
            .map(|(v, s)| (v / s).max(0.0))
            .collect();
        let c = raw.iter().map(|s| 1.0 / s).collect();
        Self { w, c }
    }

    /// Best common `u` for the streams in `start..end` at multiplier `nu`.
    fn block_value(&self, start: usize, end: usize, cost: f64, nu: f64) -> f64 {
        let w = &self.w[start..end];
        let target = nu * cost;
        let slope = |u: f64| -> (f64, f64) {
            let mut f = -target;
            let mut df = 0.0;
            for &wi in w {
                let d = 1.0 / (1.0 + wi * u);
                f += wi * d;
                df -= wi * wi * d * d;
            }
            (f, df)
        };
        if end - start == 1 {
            return (1.0 / target - 1.0 / w[0]).max(0.0);
        }
        let (f0, _) = slope(0.0);
        if f0 <= 0.0 {
            return 0.0;
        }
        // The marginal is convex and decreasing, so Newton from the left never overshoots.
        let mut u = 0.0;
        for _ in 0..200 {
            let (f, df) = slope(u);
            if f <= 0.0 || df == 0.0 {
                break;
            }
            let step = -f / df;
            u += step;
            if step <= 1e-15 * u {
                break;
            }
        }
        u
    }

    fn fit(&self, nu: f64, blocks: &mut Vec<Block>) {
        blocks.clear();
        for i in 0..self.w.len() {
            let cost = self.c[i];
            let mut b = Block {
                start: i,
                end: i + 1,
                cost,
                value: self.block_value(i, i + 1, cost, nu),
            };
            while let Some(prev) = blocks.last() {
                if prev.value >= b.value {
                    break;
                }
                let prev = blocks.pop().expect("non-empty");
                let cost = prev.cost + b.cost;
                b = Block {
                    start: prev.start,
                    end: b.end,
                    cost,
                    value: self.block_value(prev.start, b.end, cost, nu),
                };
            }
            blocks.push(b);
        }
    }

    fn spend(blocks: &[Block]) -> f64 {
        blocks.iter().map(|b| b.cost * b.value).sum()
    }

    fn solve(&self, budget: f64) -> (f64, Vec<f64>) {
        let mut blocks = Vec::with_capacity(self.w.len());
        // Spend is increasing in the water level 1/nu and linear between changes of the pooling.
        let top = self
            .w
            .iter()
            .zip(&self.c)
            .map(|(w, c)| w / c)
            .fold(0.0f64, f64::max);
        let mut hi = 1.0 / top;
        loop {
            hi *= 2.0;
            self.fit(1.0 / hi, &mut blocks);
            if Self::spend(&blocks) >= budget {
                break;
            }
        }
        let level = increasing_root(
            |level| {
                self.fit(1.0 / level, &mut blocks);
                Self::spend(&blocks) - budget
            },
            1.0 / top,
            hi,
            1e-15 * budget,
        );
        let lo = 1.0 / level;
        self.fit(lo, &mut blocks);
        let mut powers = vec![0.0; self.w.len()];
        for b in &blocks {
            for (p, c) in powers[b.start..b.end]
                .iter_mut()
                .zip(&self.c[b.start..b.end])
            {
                *p = c * b.value;
            }
        }
        (lo, powers)
    }
}
