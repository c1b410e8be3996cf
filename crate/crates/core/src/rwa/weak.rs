//! First-order weak-coupling expansion `G = 1 + gamma0 g1(tau)`.
//!
//! With `a = Delta / omega_d`, the first-order correction satisfies
//!
//! ```text
//! g1'(tau) = -1/2 sum_{n,m} J_n(a) J_m(a) / (1 - i n omega_d)
//!            * (exp(-i (n - m) omega_d tau) - exp(-tau) exp(i m omega_d tau))
//! ```
//!
//! and `g1` is its term-wise integral with `g1(0) = 0`. Terms are grouped by
//! `k = n - m` so each sample costs `O(N_B)`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qcore::bessel::{bessel_j_table, truncation_order};
use crate::qcore::SystemParams;

const TAIL_TOL: f64 = 1e-12;

struct Coefficients {
    omega_d: f64,
    /// `J_m(a)` for `m = -nb..=nb`.
    bessel: Vec<f64>,
    /// `B_k = sum_n J_n J_{n-k} / (1 - i n omega_d)` for `k = -2nb..=2nb`.
    by_shift: Vec<C64>,
    /// `S = sum_n J_n / (1 - i n omega_d)`.
    weight: C64,
    nb: i64,
}

impl Coefficients {
    fn new(params: &SystemParams) -> Result<Self> {
        if params.is_static() {
            return Err(Error::InvalidParams(format!(
                "weak-coupling series needs omega_d > 0; use the static closed form ({params})"
            )));
        }
        let a = params.delta / params.omega_d;
        let nb = truncation_order(a, TAIL_TOL)? as i64;
        let table = bessel_j_table(nb as usize, a)?;
        let j = |n: i64| -> f64 {
            let v = table[n.unsigned_abs() as usize];
            if n < 0 && n % 2 != 0 {
                -v
            } else {
                v
            }
        };
        let bessel: Vec<f64> = (-nb..=nb).map(j).collect();
        let denom = |n: i64| C64::new(1.0, -(n as f64) * params.omega_d);
        let weight = (-nb..=nb).map(|n| j(n) / denom(n)).sum();
        let by_shift = (-2 * nb..=2 * nb)
            .map(|k| {
                let lo = (-nb).max(k - nb);
                let hi = nb.min(k + nb);
                (lo..=hi).map(|n| j(n) * j(n - k) / denom(n)).sum()
            })
            .collect();
        Ok(Self {
            omega_d: params.omega_d,
            bessel,
            by_shift,
            weight,
            nb,
        })
    }

    /// `(g1(tau), g1'(tau))`.
    fn eval(&self, tau: f64) -> (C64, C64) {
        let w = self.omega_d;
        let mut shift_part = C64::new(0.0, 0.0);
        let mut shift_rate = C64::new(0.0, 0.0);
        for (idx, b) in self.by_shift.iter().enumerate() {
            let k = idx as i64 - 2 * self.nb;
            let phase = C64::from_polar(1.0, -(k as f64) * w * tau);
            shift_rate += b * phase;
            if k == 0 {
                shift_part += b * tau;
            } else {
                let rate = C64::new(0.0, -(k as f64) * w);
                shift_part += b * (phase - 1.0) / rate;
            }
        }
        let decay = (-tau).exp();
        let mut decay_part = C64::new(0.0, 0.0);
        let mut decay_rate = C64::new(0.0, 0.0);
        for (idx, jm) in self.bessel.iter().enumerate() {
            let m = idx as i64 - self.nb;
            let rate = C64::new(-1.0, m as f64 * w);
            let e = decay * C64::from_polar(1.0, m as f64 * w * tau);
            decay_rate += jm * e;
            decay_part += jm * (e - 1.0) / rate;
        }
        let g1 = -0.5 * (shift_part - self.weight * decay_part);
        let dg1 = -0.5 * (shift_rate - self.weight * decay_rate);
        (g1, dg1)
    }
}

/// `(g1, g1')` sampled at each `tau`.
pub fn weak_coupling_terms(params: &SystemParams, tau: &[f64]) -> Result<Vec<(C64, C64)>> {
    let c = Coefficients::new(params)?;
    Ok(tau.iter().map(|t| c.eval(*t)).collect())
}

/// First-order approximation `1 + gamma0 g1(tau)`.
pub fn weak_coupling_g(params: &SystemParams, tau: &[f64]) -> Result<Vec<C64>> {
    let c = Coefficients::new(params)?;
    Ok(tau
        .iter()
        .map(|t| 1.0 + params.gamma0 * c.eval(*t).0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma0: f64, delta: f64, omega_d: f64) -> SystemParams {
        SystemParams::driven(gamma0, delta, omega_d).unwrap()
    }

    #[test]
    fn undriven_series_reduces_to_single_term() {
        let tau: Vec<f64> = (0..200).map(|i| 0.1 * i as f64).collect();
        let terms = weak_coupling_terms(&params(0.1, 0.0, 1.0), &tau).unwrap();
        for (t, (g1, dg1)) in tau.iter().zip(terms) {
            let want_d = -0.5 * (1.0 - (-t).exp());
            let want = -0.5 * (t - 1.0 + (-t).exp());
            assert!((dg1 - want_d).norm() < 1e-14);
            assert!((g1 - want).norm() < 1e-13, "tau={t}");
        }
    }

    #[test]
    fn derivative_vanishes_at_origin() {
        for &(d, w) in &[(2.0, 1.0), (5.0, 3.0), (17.0, 0.9)] {
            let t = weak_coupling_terms(&params(0.1, d, w), &[0.0]).unwrap();
            assert!(t[0].0.norm() < 1e-14);
            assert!(t[0].1.norm() < 1e-12, "{:?}", t[0].1);
        }
    }

    #[test]
    fn integral_matches_derivative() {
        // Simpson quadrature of g1' against the term-wise integral
        let p = params(0.1, 5.0, 3.0);
        let n = 4000;
        let h = 8.0 / n as f64;
        let tau: Vec<f64> = (0..=n).map(|i| h * i as f64).collect();
        let terms = weak_coupling_terms(&p, &tau).unwrap();
        let mut acc = C64::new(0.0, 0.0);
        for i in (0..n).step_by(2) {
            acc += h / 3.0 * (terms[i].1 + 4.0 * terms[i + 1].1 + terms[i + 2].1);
            assert!((acc - terms[i + 2].0).norm() < 1e-9);
        }
    }

    #[test]
    fn static_drive_is_rejected() {
        assert!(weak_coupling_g(&params(0.1, 2.0, 0.0), &[0.0, 1.0]).is_err());
    }
}
