use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_OMEGA0: f64 = 20.0;

/// Dimensionless model parameters, all in units of the bath width.
///
/// Times are `tau = lambda * t` and every energy `x` is `x_bar / lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// System-bath coupling strength.
    pub gamma0: f64,
    /// Driving amplitude, or static detuning when `omega_d == 0`.
    pub delta: f64,
    /// Driving frequency.
    pub omega_d: f64,
    /// Qubit frequency, which is also the bath peak frequency.
    pub omega0: f64,
}

impl SystemParams {
    pub fn new(gamma0: f64, delta: f64, omega_d: f64, omega0: f64) -> Result<Self> {
        let p = Self {
            gamma0,
            delta,
            omega_d,
            omega0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with the default qubit frequency.
    pub fn driven(gamma0: f64, delta: f64, omega_d: f64) -> Result<Self> {
        Self::new(gamma0, delta, omega_d, DEFAULT_OMEGA0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.gamma0, self.delta, self.omega_d, self.omega0]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams(format!("non-finite value in {self}")));
        }
        if self.gamma0 < 0.0 || self.delta < 0.0 || self.omega_d < 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma0, delta and omega_d must be >= 0 ({self})"
            )));
        }
        if self.omega0 <= 0.0 {
            return Err(Error::InvalidParams(format!("omega0 must be > 0 ({self})")));
        }
        Ok(())
    }

    pub fn is_static(&self) -> bool {
        self.omega_d < STATIC_OMEGA_D
    }

    pub fn with_gamma0(self, gamma0: f64) -> Self {
        Self { gamma0, ..self }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    pub fn with_omega_d(self, omega_d: f64) -> Self {
        Self { omega_d, ..self }
    }
}

/// Below this driving frequency the drive is treated as a static detuning.
pub const STATIC_OMEGA_D: f64 = 1e-12;

impl std::fmt::Display for SystemParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "gamma0={} delta={} omega_d={} omega0={}",
            self.gamma0, self.delta, self.omega_d, self.omega0
        )
    }
}
