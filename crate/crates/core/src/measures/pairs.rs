//! Search over antipodal pure-state pairs for the pair with the largest
//! non-Markovianity.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate, Measure, NmResult};
use crate::engine::{pair_trajectories, EngineConfig};
use crate::error::{Error, Result};
use crate::qcore::{DensityMatrix, SystemParams};

/// Bloch angles of the first state; its partner sits at the antipode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntipodalPair {
    pub theta: f64,
    pub phi: f64,
}

impl AntipodalPair {
    pub fn states(&self) -> (DensityMatrix, DensityMatrix) {
        (
            DensityMatrix::bloch(self.theta, self.phi),
            DensityMatrix::bloch(PI - self.theta, self.phi + PI),
        )
    }

    pub fn is_equatorial(&self) -> bool {
        (self.theta - FRAC_PI_2).abs() < 1e-12
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PairFamily {
    /// `polar` angles evenly spanning `[0, pi/2]` times `azimuthal` angles
    /// evenly spanning `[0, pi)`; the upper hemisphere covers every pair once.
    Grid {
        polar: usize,
        azimuthal: usize,
    },
    /// Uniformly random points on the sphere.
    Random {
        count: usize,
        seed: u64,
    },
    Explicit(Vec<AntipodalPair>),
}

impl Default for PairFamily {
    fn default() -> Self {
        PairFamily::Grid {
            polar: 12,
            azimuthal: 12,
        }
    }
}

impl PairFamily {
    pub fn pairs(&self) -> Vec<AntipodalPair> {
        match self {
            PairFamily::Grid { polar, azimuthal } => {
                let mut out = Vec::with_capacity(polar * azimuthal);
                for i in 0..*polar {
                    let theta = if *polar == 1 {
                        FRAC_PI_2
                    } else {
                        FRAC_PI_2 * (i as f64 / (*polar - 1) as f64)
                    };
                    for j in 0..*azimuthal {
                        out.push(AntipodalPair {
                            theta,
                            phi: PI * j as f64 / *azimuthal as f64,
                        });
                    }
                }
                out
            }
            PairFamily::Random { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| {
                        let z: f64 = rng.gen_range(-1.0..=1.0);
                        AntipodalPair {
                            theta: z.acos(),
                            phi: rng.gen_range(0.0..2.0 * PI),
                        }
                    })
                    .collect()
            }
            PairFamily::Explicit(p) => p.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub pair: AntipodalPair,
    pub result: NmResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairScan {
    pub ranked_by: Measure,
    pub best: PairScore,
    pub all: Vec<PairScore>,
}

/// Relative slack within which a later pair does not displace an earlier one.
const TIE_TOL: f64 = 1e-12;

/// Evaluate every pair of `family` and keep the one maximizing `ranked_by`.
/// Ties resolve to the earliest pair in family order.
pub fn pair_scan(
    cfg: &EngineConfig,
    params: &SystemParams,
    family: &PairFamily,
    ranked_by: Measure,
) -> Result<PairScan> {
    let pairs = family.pairs();
    if pairs.is_empty() {
        return Err(Error::InvalidParams("empty pair family".into()));
    }
    let states: Vec<_> = pairs.iter().map(|p| p.states()).collect();
    let trajs = pair_trajectories(cfg, params, &states)?;
    let all = pairs
        .iter()
        .zip(&trajs)
        .map(|(pair, t)| {
            Ok(PairScore {
                pair: *pair,
                result: evaluate(t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (k, s) in all.iter().enumerate().skip(1) {
        let cur = ranked_by.of(&all[best].result);
        if ranked_by.of(&s.result) > cur + TIE_TOL * cur.abs().max(1e-300) {
            best = k;
        }
    }
    Ok(PairScan {
        ranked_by,
        best: all[best].clone(),
        all,
    })
}
