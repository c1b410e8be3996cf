//! Uniform entry point over the two dynamics engines.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::heom::{self, HeomConfig};
use crate::measures::{evaluate, Engine, NmResult, Trajectory};
use crate::qcore::{plus_x_pair, DensityMatrix, SystemParams};
use crate::rwa::{self, IntegratorConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "lowercase")]
pub enum EngineConfig {
    Rwa(IntegratorConfig),
    Heom(HeomConfig),
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig::Rwa(IntegratorConfig::default())
    }
}

impl EngineConfig {
    pub fn default_for(engine: Engine) -> Self {
        match engine {
            Engine::Rwa => EngineConfig::Rwa(IntegratorConfig::default()),
            Engine::Heom => EngineConfig::Heom(HeomConfig::default()),
        }
    }

    pub fn engine(&self) -> Engine {
        match self {
            EngineConfig::Rwa(_) => Engine::Rwa,
            EngineConfig::Heom(_) => Engine::Heom,
        }
    }

    /// Truncation depth, for the hierarchy engine only.
    pub fn trunc_n(&self) -> Option<usize> {
        match self {
            EngineConfig::Rwa(_) => None,
            EngineConfig::Heom(c) => Some(c.depth),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EngineConfig::Rwa(c) => c.validate(),
            EngineConfig::Heom(c) => c.validate(),
        }
    }

    pub fn set_horizon(&mut self, tau_max: Option<f64>, dtau: Option<f64>) {
        let (t, d) = match self {
            EngineConfig::Rwa(c) => (&mut c.tau_max, &mut c.dtau),
            EngineConfig::Heom(c) => (&mut c.tau_max, &mut c.dtau),
        };
        if let Some(v) = tau_max {
            *t = v;
        }
        if let Some(v) = dtau {
            *d = v;
        }
    }
}

/// Trace-distance trajectories for several initial pairs at one parameter
/// point. Under the RWA a single amplitude solve serves every pair.
pub fn pair_trajectories(
    cfg: &EngineConfig,
    params: &SystemParams,
    pairs: &[(DensityMatrix, DensityMatrix)],
) -> Result<Vec<Trajectory>> {
    match cfg {
        EngineConfig::Rwa(c) => {
            let amp = rwa::solve_g_auto(params, c)?;
            pairs
                .iter()
                .map(|(a, b)| {
                    Trajectory::new(amp.tau.clone(), amp.distance(a, b)?, Engine::Rwa, *params)
                })
                .collect()
        }
        EngineConfig::Heom(c) => pairs
            .iter()
            .map(|(a, b)| {
                let (d, tau) = heom::pair_distance(a, b, params, c)?;
                Trajectory::new(tau, clamp_distance(d), Engine::Heom, *params)
            })
            .collect(),
    }
}

/// Rounding can push a unit distance a hair above one.
fn clamp_distance(mut d: Vec<f64>) -> Vec<f64> {
    for x in d.iter_mut() {
        if *x > 1.0 && *x <= 1.0 + crate::measures::DISTANCE_TOL {
            *x = 1.0;
        }
    }
    d
}

pub fn distance_trajectory(
    cfg: &EngineConfig,
    params: &SystemParams,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<Trajectory> {
    Ok(pair_trajectories(cfg, params, &[(*rho1, *rho2)])?.remove(0))
}

/// Trajectory of the `|+-x>` pair, the default pair for every measure.
pub fn plus_x_trajectory(cfg: &EngineConfig, params: &SystemParams) -> Result<Trajectory> {
    let (p, m) = plus_x_pair();
    distance_trajectory(cfg, params, &p, &m)
}

/// Both measures for the `|+-x>` pair.
pub fn measure_point(cfg: &EngineConfig, params: &SystemParams) -> Result<NmResult> {
    evaluate(&plus_x_trajectory(cfg, params)?)
}
