use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Axis, Param};
use crate::engine::{measure_point, EngineConfig};
use crate::error::Result;
use crate::measures::{Measure, NM_ZERO_TOL};
use crate::qcore::SystemParams;

/// Static detuning grid for the relative denominators: `[0, 20]` in steps of 0.25.
pub const STATIC_DELTA_AXIS: Axis = Axis {
    param: Param::Delta,
    min: 0.0,
    max: 20.0,
    step: 0.25,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticMax {
    pub gamma0: f64,
    pub measure: Measure,
    /// `None` when the static measure vanishes on the whole grid.
    pub max: Option<f64>,
    pub argmax_delta: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StaticMaxTable {
    pub entries: Vec<StaticMax>,
}

impl StaticMaxTable {
    pub fn get(&self, gamma0: f64, measure: Measure) -> Option<&StaticMax> {
        self.entries
            .iter()
            .find(|e| e.gamma0 == gamma0 && e.measure == measure)
    }
}

/// Largest undriven value over `deltas` for every coupling in `gamma0s`.
/// Ties keep the smallest detuning.
pub fn static_max_table(
    engine: &EngineConfig,
    measures: &[Measure],
    gamma0s: &[f64],
    deltas: &Axis,
    omega0: f64,
) -> Result<StaticMaxTable> {
    deltas.validate()?;
    let dv = deltas.values();
    let jobs: Vec<(usize, usize)> = (0..gamma0s.len())
        .flat_map(|g| (0..dv.len()).map(move |d| (g, d)))
        .collect();
    let values = jobs
        .par_iter()
        .map(|&(g, d)| measure_point(engine, &SystemParams::new(gamma0s[g], dv[d], 0.0, omega0)?))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    for (g, &gamma0) in gamma0s.iter().enumerate() {
        let row = &values[g * dv.len()..(g + 1) * dv.len()];
        for &m in measures {
            let mut best: Option<(f64, f64)> = None;
            for (r, &delta) in row.iter().zip(&dv) {
                let v = m.of(r);
                if best.map_or(true, |(b, _)| v > b) {
                    best = Some((v, delta));
                }
            }
            let (max, argmax_delta) = match best {
                Some((v, d)) if v > NM_ZERO_TOL => (Some(v), Some(d)),
                _ => (None, None),
            };
            entries.push(StaticMax {
                gamma0,
                measure: m,
                max,
                argmax_delta,
            });
        }
    }
    Ok(StaticMaxTable { entries })
}
