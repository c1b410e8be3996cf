//! High-frequency rotating-frame reduction and Bessel ridge lines.
//!
//! For `omega_d >> 1` the driven qubit behaves, up to a unitary, like a
//! static resonant qubit whose coupling is rescaled by `J0(Delta/omega_d)^2`.
//! Since the trace distance is unitarily invariant, the reduction is
//! checked on `D(tau)` alone.

use serde::{Deserialize, Serialize};

use crate::engine::{plus_x_trajectory, EngineConfig};
use crate::error::{Error, Result};
use crate::measures::{evaluate, NmResult};
use crate::qcore::bessel::MAX_ARG;
use crate::qcore::{bessel_j, bessel_roots, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighFreqMap {
    /// `J0(Delta / omega_d)`; may be negative, only its square matters.
    pub beta: f64,
    pub gamma_eff: f64,
}

impl HighFreqMap {
    /// The zero-detuning static system with the rescaled coupling.
    pub fn equivalent_params(&self, params: &SystemParams) -> Result<SystemParams> {
        SystemParams::new(self.gamma_eff, 0.0, 0.0, params.omega0)
    }
}

pub fn high_freq_equivalent(params: &SystemParams) -> Result<HighFreqMap> {
    params.validate()?;
    if params.is_static() {
        return Err(Error::Undefined(
            "high-frequency map needs omega_d > 0".into(),
        ));
    }
    let beta = bessel_j(0, params.delta / params.omega_d)?;
    Ok(HighFreqMap {
        beta,
        gamma_eff: beta * beta * params.gamma0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighFreqComparison {
    pub params: SystemParams,
    pub map: HighFreqMap,
    /// `max_tau |D_driven - D_equiv|` over the common horizon.
    pub sup_gap: f64,
    pub driven: NmResult,
    pub equivalent: NmResult,
}

impl HighFreqComparison {
    pub fn n_lr_gap(&self) -> f64 {
        (self.driven.n_lr - self.equivalent.n_lr).abs()
    }

    pub fn n_blp_gap(&self) -> f64 {
        (self.driven.n_blp - self.equivalent.n_blp).abs()
    }
}

/// Run the driven system and its high-frequency equivalent side by side
/// (`|+-x>` pair, same engine and grid).
pub fn compare_high_freq(cfg: &EngineConfig, params: &SystemParams) -> Result<HighFreqComparison> {
    let map = high_freq_equivalent(params)?;
    let driven = plus_x_trajectory(cfg, params)?;
    let equiv = plus_x_trajectory(cfg, &map.equivalent_params(params)?)?;
    let sup_gap = driven
        .distance
        .iter()
        .zip(&equiv.distance)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(HighFreqComparison {
        params: *params,
        map,
        sup_gap,
        driven: evaluate(&driven)?,
        equivalent: evaluate(&equiv)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RidgeSource {
    J0,
    J1,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    pub source: RidgeSource,
    /// 1-based index among the positive roots.
    pub index: usize,
    pub root: f64,
    /// Line position `omega_d / Delta = 1 / root`.
    pub ratio: f64,
}

/// Ridge lines `omega_d / Delta = 1/x_k` for roots `x_k` of `J0` and `J1`
/// with ratio in `[lo, hi]`, sorted by ratio. Roots beyond the supported
/// Bessel argument range are not reported.
pub fn bessel_ridges(lo: f64, hi: f64) -> Result<Vec<Ridge>> {
    if !(lo > 0.0) || !(hi >= lo) {
        return Ok(Vec::new());
    }
    let x_max = (1.0 / lo).min(MAX_ARG);
    let mut out = Vec::new();
    for (source, order) in [(RidgeSource::J0, 0), (RidgeSource::J1, 1)] {
        for (k, root) in bessel_roots(order, 0.0, x_max)?.into_iter().enumerate() {
            let ratio = 1.0 / root;
            if ratio >= lo && ratio <= hi {
                out.push(Ridge {
                    source,
                    index: k + 1,
                    root,
                    ratio,
                });
            }
        }
    }
    out.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    Ok(out)
}

/// Values on a rectangular `(Delta, omega_d)` grid, `Delta` outermost.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub deltas: Vec<f64>,
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(deltas: Vec<f64>, omegas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let increasing = |v: &[f64]| v.len() >= 2 && v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&deltas)
            || !increasing(&omegas)
            || values.len() != deltas.len() * omegas.len()
        {
            return Err(Error::InvalidParams(
                "grid field needs increasing axes of length >= 2 and matching values".into(),
            ));
        }
        Ok(Self {
            deltas,
            omegas,
            values,
        })
    }

    fn cell(axis: &[f64], x: f64) -> Option<(usize, f64)> {
        if x < axis[0] || x > axis[axis.len() - 1] {
            return None;
        }
        let i = axis.partition_point(|v| *v <= x).clamp(1, axis.len() - 1) - 1;
        Some((i, (x - axis[i]) / (axis[i + 1] - axis[i])))
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn at(&self, delta: f64, omega: f64) -> Option<f64> {
        let (i, u) = Self::cell(&self.deltas, delta)?;
        let (j, v) = Self::cell(&self.omegas, omega)?;
        let n = self.omegas.len();
        let f = |a: usize, b: usize| self.values[a * n + b];
        Some(
            (1.0 - u) * (1.0 - v) * f(i, j)
                + u * (1.0 - v) * f(i + 1, j)
                + (1.0 - u) * v * f(i, j + 1)
                + u * v * f(i + 1, j + 1),
        )
    }

    /// Mean along the ray `omega_d = ratio * Delta` for `Delta` in
    /// `[lo, hi]`, over `samples` evenly spaced points inside the grid.
    pub fn ray_mean(&self, ratio: f64, lo: f64, hi: f64, samples: usize) -> Option<f64> {
        let vals: Vec<f64> = (0..samples)
            .filter_map(|k| {
                let d = lo + (hi - lo) * k as f64 / (samples.max(2) - 1) as f64;
                self.at(d, ratio * d)
            })
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

/// Strict interior local maxima of `profile` (plateaus count once, at their
/// first point).
pub fn local_maxima(profile: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < profile.len() {
        if profile[i] > profile[i - 1] {
            let mut j = i;
            while j + 1 < profile.len() && profile[j + 1] == profile[i] {
                j += 1;
            }
            if j + 1 < profile.len() && profile[j + 1] < profile[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Ridge closest to `ratio` in relative terms, with the relative offset.
pub fn nearest_ridge(ridges: &[Ridge], ratio: f64) -> Option<(Ridge, f64)> {
    ridges
        .iter()
        .map(|r| (*r, (ratio - r.ratio) / r.ratio))
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
}
