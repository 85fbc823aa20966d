//! Scalar helpers over `libm` so the crate stays `no_std`.

pub(crate) const LN_2: f64 = core::f64::consts::LN_2;

/// `log2(1 + x)`, accurate for small `x`.
#[inline]
pub fn log2_1p(x: f64) -> f64 {
    libm::log1p(x) / LN_2
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Pairwise summation; the result does not depend on how the caller chunked the data.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// Root of an increasing function on a bracket with `f(lo) < 0 <= f(hi)`, by the Illinois
/// variant of false position. Stops once `|f| <= ftol` or the bracket stops shrinking, and
/// returns the last point with `f >= 0` in the latter case.
pub(crate) fn increasing_root(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    ftol: f64,
) -> f64 {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo >= 0.0 {
        return lo;
    }
    if fhi <= ftol {
        return hi;
    }
    // Weights on the retained endpoint; halved when the same side moves twice in a row.
    let (mut wlo, mut whi) = (flo, fhi);
    let mut last_side = 0i8;
    for _ in 0..200 {
        let mut x = (lo * whi - hi * wlo) / (whi - wlo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
            if !(x > lo && x < hi) {
                break;
            }
        }
        let fx = f(x);
        if fx.abs() <= ftol {
            return x;
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
            wlo = fx;
            if last_side < 0 {
                whi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = x;
            fhi = fx;
            whi = fx;
            if last_side > 0 {
                wlo *= 0.5;
            }
            last_side = 1;
        }
    }
    let _ = (flo, fhi);
    hi
}
