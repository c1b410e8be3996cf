//! Hierarchy equations of motion for the full `sigma_x` coupling, including
//! counter-rotating terms.
//!
//! The bath correlation `C(tau) = (gamma0 / 2) exp(-(1 + i Omega0) tau)` and its
//! conjugate give two exponents `nu = (1 - i Omega0, 1 + i Omega0)`. Auxiliary
//! operators `rho_(n1, n2)` live on the rectangular lattice `0 <= n1, n2 <= N`
//! with zero closure outside it; only `rho_(0,0)` is the physical state.
//!
//! ```text
//! d rho_n / d tau = -(i H_s(tau)^x + n1 nu1 + n2 nu2) rho_n
//!                   - i sum_k sigma_x^x rho_(n + e_k)
//!                   + i (gamma0 / 2) n1 rho_(n - e1) sigma_x
//!                   - i (gamma0 / 2) n2 sigma_x rho_(n - e2)
//! ```
//!
//! with `H_s(tau) = (Omega0 + Delta cos(omega_d tau)) |0><0|`. The two
//! downward terms are `-i (gamma0 / 4) n_k [sigma_x^x + (-1)^k sigma_x^o]`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate_uniform, OdeSystem, StepControl};
use crate::qcore::state::half_trace_norm;
use crate::qcore::{plus_x_pair, DensityMatrix, Mat2, SystemParams};
use crate::rwa::grid_samples;

pub const DEFAULT_DEPTH: usize = 10;
/// Trace drift accepted along a hierarchy trajectory.
pub const HEOM_TRACE_TOL: f64 = 1e-6;
/// Most negative eigenvalue accepted at converged depth.
pub const HEOM_POSITIVITY_TOL: f64 = -1e-5;
/// Supremum-norm change of `D(tau)` between depths regarded as converged.
pub const CONVERGENCE_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeomConfig {
    /// Truncation depth `N`: both lattice indices run over `0..=N`.
    pub depth: usize,
    pub rtol: f64,
    pub atol: f64,
    pub dtau: f64,
    pub tau_max: f64,
}

impl Default for HeomConfig {
    fn default() -> Self {
        Self {
            depth: DEFAULT_DEPTH,
            rtol: 1e-8,
            atol: 1e-10,
            dtau: 0.005,
            tau_max: 30.0,
        }
    }
}

impl HeomConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth < 2 {
            return Err(Error::InvalidParams(format!(
                "truncation depth must be >= 2 (got {})",
                self.depth
            )));
        }
        StepControl::new(self.rtol, self.atol).validate()?;
        if !(self.dtau > 0.0) || !(self.tau_max > 0.0) || !self.tau_max.is_finite() {
            return Err(Error::InvalidParams(format!(
                "dtau and tau_max must be > 0 (dtau={}, tau_max={})",
                self.dtau, self.tau_max
            )));
        }
        Ok(())
    }

    pub fn with_depth(self, depth: usize) -> Self {
        Self { depth, ..self }
    }
}

/// Dense lattice of auxiliary operators at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyState {
    pub depth: usize,
    pub ados: Vec<Mat2>,
    pub tau: f64,
}

impl HierarchyState {
    /// Root set to `rho0`, every other operator zero.
    pub fn initial(rho0: &Mat2, depth: usize) -> Self {
        let side = depth + 1;
        let mut ados = vec![Mat2::zero(); side * side];
        ados[0] = *rho0;
        Self {
            depth,
            ados,
            tau: 0.0,
        }
    }

    #[inline]
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.depth + 1) + n2
    }

    pub fn get(&self, n1: usize, n2: usize) -> &Mat2 {
        &self.ados[self.index(n1, n2)]
    }

    pub fn get_mut(&mut self, n1: usize, n2: usize) -> &mut Mat2 {
        let i = self.index(n1, n2);
        &mut self.ados[i]
    }

    pub fn root(&self) -> &Mat2 {
        &self.ados[0]
    }
}

#[inline]
fn sx_left(m: &Mat2) -> Mat2 {
    let [a, b, c, d] = m.e;
    Mat2::new(c, d, a, b)
}

#[inline]
fn sx_right(m: &Mat2) -> Mat2 {
    let [a, b, c, d] = m.e;
    Mat2::new(b, a, d, c)
}

/// `[sigma_x, m]`
#[inline]
fn sx_comm(m: &Mat2) -> Mat2 {
    sx_left(m) - sx_right(m)
}

/// `-i [E |0><0|, m]` for energy `E`.
#[inline]
fn free_evolution(energy: f64, m: &Mat2) -> Mat2 {
    let [_, b, c, _] = m.e;
    let z = C64::new(0.0, 0.0);
    let w = C64::new(0.0, -energy);
    Mat2::new(z, w * b, -w * c, z)
}

fn energy(params: &SystemParams, tau: f64) -> f64 {
    if params.is_static() {
        params.omega0 + params.delta
    } else {
        params.omega0 + params.delta * (params.omega_d * tau).cos()
    }
}

/// Time derivative of one lattice site given its neighbours.
#[inline]
fn site_derivative(
    params: &SystemParams,
    e: f64,
    n1: usize,
    n2: usize,
    here: &Mat2,
    up1: Option<&Mat2>,
    up2: Option<&Mat2>,
    down1: Option<&Mat2>,
    down2: Option<&Mat2>,
) -> Mat2 {
    let minus_i = C64::new(0.0, -1.0);
    let n_nu = C64::new((n1 + n2) as f64, params.omega0 * (n2 as f64 - n1 as f64));
    let mut d = free_evolution(e, here) - here.scale(n_nu);
    let mut up = Mat2::zero();
    if let Some(u) = up1 {
        up += sx_comm(u);
    }
    if let Some(u) = up2 {
        up += sx_comm(u);
    }
    d += up.scale(minus_i);
    let kappa = 0.5 * params.gamma0;
    if let Some(m) = down1 {
        d += sx_right(m).scale(C64::new(0.0, kappa * n1 as f64));
    }
    if let Some(m) = down2 {
        d += sx_left(m).scale(C64::new(0.0, -kappa * n2 as f64));
    }
    d
}

/// Hierarchy generator applied to a full lattice.
pub fn heom_rhs(state: &HierarchyState, params: &SystemParams, tau: f64) -> HierarchyState {
    let n = state.depth;
    let e = energy(params, tau);
    let mut out = HierarchyState {
        depth: n,
        ados: vec![Mat2::zero(); state.ados.len()],
        tau,
    };
    for n1 in 0..=n {
        for n2 in 0..=n {
            let d = site_derivative(
                params,
                e,
                n1,
                n2,
                state.get(n1, n2),
                (n1 < n).then(|| state.get(n1 + 1, n2)),
                (n2 < n).then(|| state.get(n1, n2 + 1)),
                (n1 > 0).then(|| state.get(n1 - 1, n2)),
                (n2 > 0).then(|| state.get(n1, n2 - 1)),
            );
            *out.get_mut(n1, n2) = d;
        }
    }
    out
}

struct Hierarchy {
    params: SystemParams,
    depth: usize,
}

impl OdeSystem for Hierarchy {
    fn dim(&self) -> usize {
        8 * (self.depth + 1) * (self.depth + 1)
    }

    fn rhs(&self, tau: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.depth;
        let side = n + 1;
        let e = energy(&self.params, tau);
        let at = |n1: usize, n2: usize| Mat2::read_real(&y[8 * (n1 * side + n2)..]);
        for n1 in 0..=n {
            for n2 in 0..=n {
                let here = at(n1, n2);
                let up1 = (n1 < n).then(|| at(n1 + 1, n2));
                let up2 = (n2 < n).then(|| at(n1, n2 + 1));
                let down1 = (n1 > 0).then(|| at(n1 - 1, n2));
                let down2 = (n2 > 0).then(|| at(n1, n2 - 1));
                let d = site_derivative(
                    &self.params,
                    e,
                    n1,
                    n2,
                    &here,
                    up1.as_ref(),
                    up2.as_ref(),
                    down1.as_ref(),
                    down2.as_ref(),
                );
                let k = 8 * (n1 * side + n2);
                d.write_real(&mut dy[k..k + 8]);
            }
        }
    }
}

/// Root operator `rho_(0,0)` on the output grid.
#[derive(Clone, Debug, PartialEq)]
pub struct HeomTrajectory {
    pub params: SystemParams,
    pub depth: usize,
    pub tau: Vec<f64>,
    pub rho: Vec<Mat2>,
}

impl HeomTrajectory {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.rho
            .iter()
            .map(|r| (r.trace() - 1.0).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        self.rho
            .iter()
            .map(|r| r.hermiticity_error())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.rho
            .iter()
            .map(|r| r.hermitian_eigenvalues().0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Half trace norm of each sample; meaningful when the trajectory was
    /// started from a difference of two states.
    pub fn half_trace_norms(&self) -> Vec<f64> {
        self.rho.iter().map(half_trace_norm).collect()
    }

    pub fn states(&self) -> Result<Vec<DensityMatrix>> {
        self.rho.iter().map(|r| DensityMatrix::new(*r)).collect()
    }
}

/// Propagate an arbitrary initial root operator; the map is linear, so a
/// difference of states propagates to the difference of evolved states.
pub fn propagate(x0: &Mat2, params: &SystemParams, cfg: &HeomConfig) -> Result<HeomTrajectory> {
    params.validate()?;
    cfg.validate()?;
    // without coupling the root never sees the upper tiers
    let depth = if params.gamma0 == 0.0 { 0 } else { cfg.depth };
    let sys = Hierarchy {
        params: *params,
        depth,
    };
    let init = HierarchyState::initial(x0, depth);
    let mut y0 = vec![0.0; sys.dim()];
    for (k, m) in init.ados.iter().enumerate() {
        m.write_real(&mut y0[8 * k..8 * k + 8]);
    }
    let samples = grid_samples(cfg.tau_max, cfg.dtau);
    let mut traj = HeomTrajectory {
        params: *params,
        depth: cfg.depth,
        tau: Vec::with_capacity(samples),
        rho: Vec::with_capacity(samples),
    };
    let context = format!("heom {params} N={}", cfg.depth);
    let ctl = StepControl::new(cfg.rtol, cfg.atol);
    integrate_uniform(&sys, &y0, cfg.dtau, samples, &ctl, &context, |_, tau, y| {
        traj.tau.push(tau);
        traj.rho.push(Mat2::read_real(&y[..8]));
    })?;
    Ok(traj)
}

/// Reduced state trajectory starting from `rho0`.
pub fn solve_heom(
    rho0: &DensityMatrix,
    params: &SystemParams,
    cfg: &HeomConfig,
) -> Result<HeomTrajectory> {
    DensityMatrix::physical(*rho0.matrix())?;
    propagate(rho0.matrix(), params, cfg)
}

/// `D(rho1(tau), rho2(tau))` from a single propagation of `rho1 - rho2`.
pub fn pair_distance(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    params: &SystemParams,
    cfg: &HeomConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let diff = *rho1.matrix() - *rho2.matrix();
    let traj = propagate(&diff, params, cfg)?;
    Ok((traj.half_trace_norms(), traj.tau))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub depths: Vec<usize>,
    /// `max_tau |D_N(tau) - D_N'(tau)|` for each consecutive pair of depths.
    pub deltas: Vec<f64>,
    pub converged: bool,
}

/// Truncation study for the `|+-x>` pair over increasing depths.
pub fn convergence_check(
    params: &SystemParams,
    cfg: &HeomConfig,
    depths: &[usize],
) -> Result<ConvergenceReport> {
    let (p, m) = plus_x_pair();
    convergence_check_pair(&p, &m, params, cfg, depths)
}

pub fn convergence_check_pair(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    params: &SystemParams,
    cfg: &HeomConfig,
    depths: &[usize],
) -> Result<ConvergenceReport> {
    if depths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(format!(
            "depth list must be increasing: {depths:?}"
        )));
    }
    let curves = depths
        .iter()
        .map(|&n| pair_distance(rho1, rho2, params, &cfg.with_depth(n)).map(|(d, _)| d))
        .collect::<Result<Vec<_>>>()?;
    let deltas: Vec<f64> = curves
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let converged = deltas.last().map_or(false, |d| *d < CONVERGENCE_TOL);
    Ok(ConvergenceReport {
        depths: depths.to_vec(),
        deltas,
        converged,
    })
}
