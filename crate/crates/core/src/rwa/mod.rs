//! Exact reduced dynamics under the rotating wave approximation.
//!
//! In the single-excitation sector the qubit state is fixed by one complex
//! amplitude `G(tau)` obeying
//!
//! ```text
//! G'' + [1 - i Delta cos(omega_d tau)] G' + (gamma0 / 2) G = 0,   G(0) = 1, G'(0) = 0
//! ```
//!
//! and the populations and coherences follow from `G` and the bare phase
//! `eps(tau)` (see [`reduced_state`]).

mod weak;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate_uniform, OdeSystem, StepControl};
use crate::qcore::{trace_distance, DensityMatrix, Mat2, SystemParams};

pub use weak::{weak_coupling_g, weak_coupling_terms};

/// Largest `|G|` accepted before the amplitude is treated as unphysical.
pub const CONTRACTIVITY_TOL: f64 = 1e-6;
/// Couplings below this get the automatically extended horizon.
pub const WEAK_HORIZON_GAMMA0: f64 = 0.1;
/// Cap on the automatically extended horizon.
pub const MAX_AUTO_HORIZON: f64 = 120.0;
/// `|G|` below which the automatic horizon stops growing.
pub const HORIZON_DECAY: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Output spacing of the uniform grid.
    pub dtau: f64,
    pub tau_max: f64,
    /// Double `tau_max` for weak coupling until `|G|` has decayed.
    pub auto_horizon: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            dtau: 0.005,
            tau_max: 30.0,
            auto_horizon: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        self.step_control().validate()?;
        if !(self.dtau > 0.0) || !(self.tau_max > 0.0) || !self.tau_max.is_finite() {
            return Err(Error::InvalidParams(format!(
                "dtau and tau_max must be > 0 (dtau={}, tau_max={})",
                self.dtau, self.tau_max
            )));
        }
        Ok(())
    }

    pub fn step_control(&self) -> StepControl {
        StepControl::new(self.rtol, self.atol)
    }

    pub fn samples(&self) -> usize {
        grid_samples(self.tau_max, self.dtau)
    }
}

/// Number of points of the uniform grid `0, dtau, ..., tau_max`.
pub fn grid_samples(tau_max: f64, dtau: f64) -> usize {
    (tau_max / dtau).round() as usize + 1
}

/// `G`, `G'` and the bare phase on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeTrajectory {
    pub params: SystemParams,
    pub tau: Vec<f64>,
    pub g: Vec<C64>,
    pub dg: Vec<C64>,
    pub eps: Vec<f64>,
}

impl AmplitudeTrajectory {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.tau.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs_g(&self) -> f64 {
        self.g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Evolved state of `rho0` at every grid point.
    pub fn states(&self, rho0: &DensityMatrix) -> Result<Vec<DensityMatrix>> {
        self.g
            .iter()
            .zip(&self.eps)
            .map(|(g, e)| reduced_state(rho0, *g, *e))
            .collect()
    }

    /// `D(rho1(tau), rho2(tau))` at every grid point.
    pub fn distance(&self, rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<Vec<f64>> {
        self.g
            .iter()
            .zip(&self.eps)
            .map(|(g, e)| {
                Ok(trace_distance(
                    &reduced_state(rho1, *g, *e)?,
                    &reduced_state(rho2, *g, *e)?,
                ))
            })
            .collect()
    }
}

struct AmplitudeEquation {
    params: SystemParams,
}

impl OdeSystem for AmplitudeEquation {
    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, tau: f64, y: &[f64], dy: &mut [f64]) {
        let p = &self.params;
        let g = C64::new(y[0], y[1]);
        let dg = C64::new(y[2], y[3]);
        let detuning = if p.is_static() {
            p.delta
        } else {
            p.delta * (p.omega_d * tau).cos()
        };
        let friction = C64::new(1.0, -detuning);
        let ddg = -friction * dg - 0.5 * p.gamma0 * g;
        dy[0] = dg.re;
        dy[1] = dg.im;
        dy[2] = ddg.re;
        dy[3] = ddg.im;
    }
}

/// Integrate the amplitude equation on `0..=tau_max` with spacing `dtau`.
///
/// The horizon is taken from `cfg` as given; see [`solve_g_auto`] for the
/// weak-coupling horizon extension.
pub fn solve_g(params: &SystemParams, cfg: &IntegratorConfig) -> Result<AmplitudeTrajectory> {
    params.validate()?;
    cfg.validate()?;
    let samples = cfg.samples();
    let mut traj = AmplitudeTrajectory {
        params: *params,
        tau: Vec::with_capacity(samples),
        g: Vec::with_capacity(samples),
        dg: Vec::with_capacity(samples),
        eps: Vec::with_capacity(samples),
    };
    let sys = AmplitudeEquation { params: *params };
    let context = format!("rwa {params}");
    integrate_uniform(
        &sys,
        &[1.0, 0.0, 0.0, 0.0],
        cfg.dtau,
        samples,
        &cfg.step_control(),
        &context,
        |_, tau, y| {
            traj.tau.push(tau);
            traj.g.push(C64::new(y[0], y[1]));
            traj.dg.push(C64::new(y[2], y[3]));
            traj.eps.push(phase_epsilon(params, tau));
        },
    )?;
    let peak = traj.max_abs_g();
    if peak > 1.0 + CONTRACTIVITY_TOL {
        return Err(Error::Contract(format!("|G| reached {peak} ({context})")));
    }
    Ok(traj)
}

/// [`solve_g`] with the weak-coupling horizon rule: for `gamma0 < 0.1` the
/// horizon doubles until `|G(tau_max)| < 1e-3` or `tau_max` reaches 120.
pub fn solve_g_auto(params: &SystemParams, cfg: &IntegratorConfig) -> Result<AmplitudeTrajectory> {
    let mut cfg = *cfg;
    let mut traj = solve_g(params, &cfg)?;
    if !cfg.auto_horizon || params.gamma0 >= WEAK_HORIZON_GAMMA0 {
        return Ok(traj);
    }
    while traj.g.last().map_or(0.0, |g| g.norm()) >= HORIZON_DECAY && cfg.tau_max < MAX_AUTO_HORIZON
    {
        cfg.tau_max = (2.0 * cfg.tau_max).min(MAX_AUTO_HORIZON);
        traj = solve_g(params, &cfg)?;
    }
    Ok(traj)
}

/// Analytic amplitude for a static detuning `delta`.
///
/// With `a = 1 - i delta` and `d = sqrt(a^2 - 2 gamma0)`:
/// `G = exp(-a tau / 2) [cosh(d tau / 2) + (a / d) sinh(d tau / 2)]`.
pub fn static_g_closed_form(gamma0: f64, delta: f64, tau: f64) -> C64 {
    let a = C64::new(1.0, -delta);
    let d = (a * a - 2.0 * gamma0).sqrt();
    let z = 0.5 * d * tau;
    let envelope = (-0.5 * a * tau).exp();
    if z.norm() < 1e-4 {
        // repeated-root limit plus the leading corrections
        let z2 = z * z;
        let cosh = 1.0 + z2 / 2.0 + z2 * z2 / 24.0;
        let sinh_over_d = 0.5 * tau * (1.0 + z2 / 6.0 + z2 * z2 / 120.0);
        return envelope * (cosh + a * sinh_over_d);
    }
    envelope * (z.cosh() + a / d * z.sinh())
}

/// Bare phase `Omega0 tau + (Delta / omega_d) sin(omega_d tau)`, with the
/// static limit `(Omega0 + Delta) tau`.
pub fn phase_epsilon(params: &SystemParams, tau: f64) -> f64 {
    if params.is_static() {
        (params.omega0 + params.delta) * tau
    } else {
        params.omega0 * tau + params.delta / params.omega_d * (params.omega_d * tau).sin()
    }
}

/// Reduced state at amplitude `g` and phase `eps`:
/// `rho00 = rho00(0) |g|^2`, `rho01 = rho01(0) g exp(-i eps)`, `rho11 = 1 - rho00`.
pub fn reduced_state(rho0: &DensityMatrix, g: C64, eps: f64) -> Result<DensityMatrix> {
    let mag = g.norm();
    if mag > 1.0 + CONTRACTIVITY_TOL {
        return Err(Error::Contract(format!("|G| = {mag} exceeds 1")));
    }
    let p00 = rho0.get(0, 0).re * mag * mag;
    let c01 = rho0.get(0, 1) * g * C64::from_polar(1.0, -eps);
    DensityMatrix::new(Mat2::new(
        C64::new(p00, 0.0),
        c01,
        c01.conj(),
        C64::new(rho0.trace() - p00, 0.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::plus_x_pair;

    fn params(gamma0: f64, delta: f64, omega_d: f64) -> SystemParams {
        SystemParams::driven(gamma0, delta, omega_d).unwrap()
    }

    /// Constant-coefficient solution for gamma0 = 2, delta = 0, derived by hand.
    fn underdamped_oracle(tau: f64) -> f64 {
        let w = 3f64.sqrt() / 2.0;
        (-tau / 2.0).exp() * ((w * tau).cos() + (w * tau).sin() / 3f64.sqrt())
    }

    #[test]
    fn initial_condition() {
        let t = solve_g(&params(1.3, 2.0, 4.0), &IntegratorConfig::default()).unwrap();
        assert_eq!(t.g[0], C64::new(1.0, 0.0));
        assert_eq!(t.dg[0], C64::new(0.0, 0.0));
        assert_eq!(t.tau[0], 0.0);
        assert_eq!(t.len(), 6001);
        assert!((t.horizon() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_amplitude_stays_one() {
        let t = solve_g(&params(0.0, 5.0, 3.0), &IntegratorConfig::default()).unwrap();
        assert!(t.g.iter().all(|g| *g == C64::new(1.0, 0.0)));
    }

    #[test]
    fn underdamped_static_solution() {
        let t = solve_g(&params(2.0, 0.0, 0.0), &IntegratorConfig::default()).unwrap();
        for (tau, g) in t.tau.iter().zip(&t.g) {
            assert!((g - C64::new(underdamped_oracle(*tau), 0.0)).norm() < 1e-7);
        }
        for &tau in &[0.0, 0.37, 5.0, 29.9] {
            let c = static_g_closed_form(2.0, 0.0, tau);
            assert!((c.re - underdamped_oracle(tau)).abs() < 1e-13 && c.im.abs() < 1e-13);
        }
    }

    #[test]
    fn closed_form_special_cases() {
        for &tau in &[0.0, 1.0, 10.0] {
            assert!((static_g_closed_form(0.0, 0.0, tau) - 1.0).norm() < 1e-14);
            // repeated root at gamma0 = 1/2
            let want = (-tau / 2.0).exp() * (1.0 + tau / 2.0);
            assert!(
                (static_g_closed_form(0.5, 0.0, tau) - want).norm() < 1e-12,
                "tau={tau}"
            );
        }
        // continuity across the series switch
        let near = static_g_closed_form(0.5 - 1e-12, 0.0, 3.0);
        let at = static_g_closed_form(0.5, 0.0, 3.0);
        assert!((near - at).norm() < 1e-8);
    }

    #[test]
    fn phase_limits() {
        let p = params(0.3, 0.0, 2.0);
        assert_eq!(phase_epsilon(&p, 1.5), 30.0);
        assert_eq!(phase_epsilon(&params(0.3, 3.0, 2.0), 0.0), 0.0);
        let s = params(0.3, 3.0, 0.0);
        assert_eq!(phase_epsilon(&s, 2.0), 46.0);
        let slow = params(0.3, 3.0, 1e-7);
        assert!((phase_epsilon(&slow, 2.0) - 46.0).abs() < 1e-9);
    }

    #[test]
    fn reduced_state_maps() {
        let (p, m) = plus_x_pair();
        let same = reduced_state(&p, C64::new(1.0, 0.0), 0.0).unwrap();
        assert_eq!(same, p);
        let g = C64::from_polar(0.6, 0.4);
        let r = reduced_state(&p, g, 1.1).unwrap();
        assert!((r.get(0, 1).norm() - 0.3).abs() < 1e-15);
        assert!((r.trace() - 1.0).abs() < 1e-15);
        let d = trace_distance(&r, &reduced_state(&m, g, 1.1).unwrap());
        assert!((d - 0.6).abs() < 1e-15);
        assert!(reduced_state(&p, C64::new(1.0 + 2e-6, 0.0), 0.0).is_err());
    }

    #[test]
    fn contractive_amplitude() {
        let cfg = IntegratorConfig::default();
        for &(g0, d, w) in &[
            (0.1, 3.0, 1.0),
            (10.0, 20.0, 20.0),
            (2.0, 12.0, 0.5),
            (0.6, 0.0, 0.0),
        ] {
            let t = solve_g(&params(g0, d, w), &cfg).unwrap();
            assert!(t.max_abs_g() <= 1.0 + CONTRACTIVITY_TOL);
        }
    }

    #[test]
    fn residual_of_amplitude_equation() {
        // integral form over unit windows: G'(b) - G'(a) = int_a^b G'' and
        // G(b) - G(a) = int_a^b G', with composite Simpson on the output grid
        let p = params(1.5, 4.0, 3.0);
        let cfg = IntegratorConfig {
            dtau: 0.001,
            tau_max: 10.0,
            ..Default::default()
        };
        let t = solve_g(&p, &cfg).unwrap();
        let h = cfg.dtau;
        let ddg: Vec<C64> = (0..t.len())
            .map(|i| {
                -C64::new(1.0, -p.delta * (p.omega_d * t.tau[i]).cos()) * t.dg[i]
                    - 0.5 * p.gamma0 * t.g[i]
            })
            .collect();
        let simpson = |v: &[C64], a: usize, b: usize| {
            let mut acc = v[a] + v[b];
            for i in a + 1..b {
                acc += if (i - a) % 2 == 1 {
                    4.0 * v[i]
                } else {
                    2.0 * v[i]
                };
            }
            acc * h / 3.0
        };
        let window = 1000;
        let mut worst: f64 = 0.0;
        for a in (0..t.len() - 1).step_by(window) {
            let b = a + window;
            worst = worst
                .max((t.dg[b] - t.dg[a] - simpson(&ddg, a, b)).norm())
                .max((t.g[b] - t.g[a] - simpson(&t.dg, a, b)).norm());
        }
        assert!(worst <= 10.0 * cfg.rtol, "residual {worst}");
    }

    #[test]
    fn auto_horizon_extends_for_weak_coupling() {
        let cfg = IntegratorConfig::default();
        let t = solve_g_auto(&params(0.05, 0.0, 0.0), &cfg).unwrap();
        assert!(t.horizon() > 30.0);
        assert!(t.horizon() <= MAX_AUTO_HORIZON + 1e-9);
        let t = solve_g_auto(&params(0.5, 0.0, 0.0), &cfg).unwrap();
        assert!((t.horizon() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = IntegratorConfig {
            dtau: 0.0,
            ..Default::default()
        };
        assert!(solve_g(&params(1.0, 0.0, 0.0), &cfg).is_err());
    }
}
