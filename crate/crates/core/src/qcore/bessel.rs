//! Bessel functions of the first kind for integer order.
//!
//! Values come from Miller's downward recurrence, normalized with the
//! identity `J_0(x) + 2 sum_k J_2k(x) = 1`.

use crate::error::{Error, Result};

pub const MAX_ORDER: i32 = 60;
pub const MAX_ARG: f64 = 100.0;

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// `J_n(x)` for `|n| <= 60`, `|x| <= 100`.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    if n.abs() > MAX_ORDER || !(x.abs() <= MAX_ARG) {
        return Err(Error::BesselRange { order: n, x });
    }
    let order = n.unsigned_abs() as usize;
    // J_{-n} = (-1)^n J_n and J_n(-x) = (-1)^n J_n(x)
    let mut sign = 1.0;
    if n < 0 && order % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && order % 2 == 1 {
        sign = -sign;
    }
    Ok(sign * bessel_j_nonneg(order, x.abs()))
}

/// Bessel values for all orders `0..=max_order` at one argument.
pub fn bessel_j_table(max_order: usize, x: f64) -> Result<Vec<f64>> {
    if max_order > MAX_ORDER as usize || !(x.abs() <= MAX_ARG) {
        return Err(Error::BesselRange {
            order: max_order as i32,
            x,
        });
    }
    let ax = x.abs();
    let mut out = miller(max_order, ax);
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    Ok(out)
}

fn bessel_j_nonneg(order: usize, x: f64) -> f64 {
    miller(order, x)[order]
}

fn start_index(order: usize, x: f64) -> usize {
    let reach = (order as f64).max(x);
    let m = reach.ceil() as usize + 20 + (10.0 * x.cbrt()).ceil() as usize;
    m + m % 2
}

/// Normalized downward recurrence; returns `J_0..=J_order` at `x >= 0`.
fn miller(order: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = start_index(order, x);
    let two_over_x = 2.0 / x;
    let mut above = 0.0; // j_{k+1}
    let mut here = 1e-30; // j_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= order {
            out[k] = here;
        }
        if k % 2 == 0 {
            norm += 2.0 * here;
        }
        let below = k as f64 * two_over_x * here - above;
        above = here;
        here = below;
        if here.abs() > RESCALE_ABOVE {
            here *= RESCALE_BY;
            above *= RESCALE_BY;
            norm *= RESCALE_BY;
            for v in out.iter_mut() {
                *v *= RESCALE_BY;
            }
        }
    }
    out[0] = here;
    norm += here;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Smallest `n >= 0` with `|J_m(x)| < tol` for every `m >= n` up to the
/// supported order.
pub fn truncation_order(x: f64, tol: f64) -> Result<usize> {
    let table = bessel_j_table(MAX_ORDER as usize, x)?;
    // J_m decays monotonically once m exceeds |x|
    let past_peak = x.abs().ceil() as usize;
    for (m, v) in table.iter().enumerate() {
        if m >= past_peak && v.abs() < tol {
            return Ok(m);
        }
    }
    Err(Error::BesselRange {
        order: MAX_ORDER + 1,
        x,
    })
}

/// Positive roots of `J_n` inside `(lo, hi]`, found by scanning for sign
/// changes and bisecting.
pub fn bessel_roots(n: i32, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    if !(hi > lo) {
        return Ok(roots);
    }
    let lo = lo.max(1e-9);
    let step = 0.05;
    let mut a = lo;
    let mut fa = bessel_j(n, a)?;
    while a < hi {
        let b = (a + step).min(hi);
        let fb = bessel_j(n, b)?;
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(bisect(n, a, b, fa)?);
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 && roots.last() != Some(&a) {
        roots.push(a);
    }
    Ok(roots)
}

fn bisect(n: i32, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = bessel_j(n, mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}
