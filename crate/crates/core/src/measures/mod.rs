//! Non-Markovianity measures on trace-distance trajectories.
//!
//! Both measures work on the discrete rises of `D(tau_i)`: summing every
//! positive increment is the discrete integral of `dD/dtau` over its positive
//! part, and the largest revival is the largest rise above a prior running
//! minimum. No derivative is ever formed and no smoothing is applied.

pub mod pairs;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::SystemParams;

/// Slack allowed above one for sampled trace distances.
pub const DISTANCE_TOL: f64 = 1e-9;
/// Values at or below this are treated as zero non-Markovianity.
pub const NM_ZERO_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Rwa,
    Heom,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Rwa => "rwa",
            Engine::Heom => "heom",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rwa" => Ok(Engine::Rwa),
            "heom" => Ok(Engine::Heom),
            other => Err(Error::InvalidParams(format!(
                "unknown engine '{other}' (expected rwa or heom)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Blp,
    Lr,
}

impl Measure {
    pub const ALL: [Measure; 2] = [Measure::Blp, Measure::Lr];

    pub fn of(&self, r: &NmResult) -> f64 {
        match self {
            Measure::Blp => r.n_blp,
            Measure::Lr => r.n_lr,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Blp => "blp",
            Measure::Lr => "lr",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "blp" | "n_blp" => Ok(Measure::Blp),
            "lr" | "n_lr" => Ok(Measure::Lr),
            other => Err(Error::InvalidParams(format!(
                "unknown measure '{other}' (expected blp or lr)"
            ))),
        }
    }
}

/// Trace distance of a fixed pair sampled on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub tau: Vec<f64>,
    pub distance: Vec<f64>,
    pub engine: Engine,
    pub params: SystemParams,
}

impl Trajectory {
    pub fn new(
        tau: Vec<f64>,
        distance: Vec<f64>,
        engine: Engine,
        params: SystemParams,
    ) -> Result<Self> {
        if tau.len() != distance.len() {
            return Err(Error::Contract(format!(
                "grid has {} points but {} distance samples",
                tau.len(),
                distance.len()
            )));
        }
        if tau.len() >= 2 {
            let step = tau[1] - tau[0];
            if !(step > 0.0) {
                return Err(Error::Contract(
                    "time grid must be strictly increasing".into(),
                ));
            }
            for w in tau.windows(2) {
                let h = w[1] - w[0];
                if !(h > 0.0) || (h - step).abs() > 1e-9 * step.max(1.0) {
                    return Err(Error::Contract(format!(
                        "time grid is not uniform near tau={}",
                        w[0]
                    )));
                }
            }
        }
        if let Some((i, d)) = distance
            .iter()
            .enumerate()
            .find(|(_, d)| !(**d >= 0.0 && **d <= 1.0 + DISTANCE_TOL))
        {
            return Err(Error::Contract(format!(
                "trace distance {d} at tau={} outside [0, 1]",
                tau[i]
            )));
        }
        Ok(Self {
            tau,
            distance,
            engine,
            params,
        })
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.tau.last().copied().unwrap_or(0.0)
    }
}

/// Largest single revival and the window it spans.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Revival {
    pub value: f64,
    pub tau_low: f64,
    pub tau_high: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmResult {
    pub n_blp: f64,
    pub n_lr: f64,
    pub window: (f64, f64),
    pub params: SystemParams,
    pub engine: Engine,
    pub horizon: f64,
}

fn require_samples(d: &[f64]) -> Result<()> {
    if d.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least 2 samples, got {}",
            d.len()
        )));
    }
    Ok(())
}

/// `sum_i max(0, D_{i+1} - D_i)`.
pub fn rise_sum(d: &[f64]) -> Result<f64> {
    require_samples(d)?;
    Ok(d.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum())
}

/// `max_{i <= j} (D_j - D_i)` with the indices `(i, j)` that attain it,
/// found in one pass over a running minimum.
pub fn largest_rise(d: &[f64]) -> Result<(f64, usize, usize)> {
    require_samples(d)?;
    let mut best = (0.0, 0, 0);
    let mut min_idx = 0;
    for j in 1..d.len() {
        if d[j] < d[min_idx] {
            min_idx = j;
        }
        let rise = d[j] - d[min_idx];
        if rise > best.0 {
            best = (rise, min_idx, j);
        }
    }
    Ok(best)
}

/// Total information backflow for the pair that produced `traj`.
pub fn n_blp(traj: &Trajectory) -> Result<f64> {
    rise_sum(&traj.distance)
}

/// Largest revival of `D` above its running minimum.
pub fn n_lr(traj: &Trajectory) -> Result<Revival> {
    let (value, i, j) = largest_rise(&traj.distance)?;
    Ok(Revival {
        value,
        tau_low: traj.tau[i],
        tau_high: traj.tau[j],
    })
}

pub fn evaluate(traj: &Trajectory) -> Result<NmResult> {
    let blp = n_blp(traj)?;
    let lr = n_lr(traj)?;
    Ok(NmResult {
        n_blp: blp,
        n_lr: lr.value,
        window: (lr.tau_low, lr.tau_high),
        params: traj.params,
        engine: traj.engine,
        horizon: traj.horizon(),
    })
}

/// Driven value in units of the best static value at the same coupling.
/// `None` when the static maximum vanishes.
pub fn n_relative(value: f64, static_max: f64) -> Option<f64> {
    if static_max > NM_ZERO_TOL && static_max.is_finite() && value.is_finite() {
        Some(value / static_max)
    } else {
        None
    }
}

/// Largest defined relative value; errors on an empty input.
pub fn max_relative<I: IntoIterator<Item = Option<f64>>>(values: I) -> Result<Option<f64>> {
    let mut seen = false;
    let mut best: Option<f64> = None;
    for v in values {
        seen = true;
        if let Some(x) = v {
            best = Some(best.map_or(x, |b| b.max(x)));
        }
    }
    if !seen {
        return Err(Error::InvalidParams("maximum over an empty grid".into()));
    }
    Ok(best)
}
