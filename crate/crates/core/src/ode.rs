//! Adaptive Dormand-Prince 5(4) integrator with continuous output.
//!
//! Both dynamics engines flatten their complex state into a real vector and
//! sample the solution on a uniform grid through the fourth-order dense
//! output of the scheme, so output spacing never constrains the step size.

use crate::error::{Error, Result};

/// Right-hand side of `dy/dt = f(t, y)` on a real state vector.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            max_steps: 5_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidParams(format!(
                "integrator tolerances must be > 0 (rtol={}, atol={})",
                self.rtol, self.atol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand-Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

struct Workspace {
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    cont: [Vec<f64>; 5],
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            y_stage: vec![0.0; n],
            y_new: vec![0.0; n],
            cont: std::array::from_fn(|_| vec![0.0; n]),
        }
    }
}

fn scaled_norm(v: &[f64], y0: &[f64], ctl: &StepControl) -> f64 {
    let sum: f64 = v
        .iter()
        .zip(y0)
        .map(|(x, y)| {
            let sk = ctl.atol + ctl.rtol * y.abs();
            (x / sk) * (x / sk)
        })
        .sum();
    (sum / v.len() as f64).sqrt()
}

fn initial_step<S: OdeSystem>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    ctl: &StepControl,
    span: f64,
) -> f64 {
    let d0 = scaled_norm(y0, y0, ctl);
    let d1 = scaled_norm(f0, y0, ctl);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    sys.rhs(t0 + h0, &y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled_norm(&diff, y0, ctl) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrate from `y0` at `t = 0` and report the solution at `t_i = i * dt`
/// for `i = 0..samples`. The callback receives `(i, t_i, y(t_i))`.
pub fn integrate_uniform<S, F>(
    sys: &S,
    y0: &[f64],
    dt: f64,
    samples: usize,
    ctl: &StepControl,
    context: &str,
    mut sink: F,
) -> Result<Stats>
where
    S: OdeSystem,
    F: FnMut(usize, f64, &[f64]),
{
    ctl.validate()?;
    let n = sys.dim();
    assert_eq!(y0.len(), n, "state length does not match system dimension");
    let mut stats = Stats::default();
    if samples == 0 {
        return Ok(stats);
    }
    sink(0, 0.0, y0);
    if samples == 1 {
        return Ok(stats);
    }
    let t_end = dt * (samples - 1) as f64;

    let mut ws = Workspace::new(n);
    let mut y = y0.to_vec();
    let mut t = 0.0;
    sys.rhs(t, &y, &mut ws.k[0]);
    stats.evaluations += 1;
    let mut h = initial_step(sys, t, &y, &ws.k[0], ctl, t_end);
    stats.evaluations += 1;
    let mut next_sample = 1usize;
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut out = vec![0.0; n];

    while next_sample < samples {
        if stats.accepted + stats.rejected >= ctl.max_steps {
            return Err(Error::TooManySteps {
                steps: ctl.max_steps,
                tau: t,
                context: context.to_string(),
            });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow {
                tau: t,
                context: context.to_string(),
            });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        dopri_step(sys, t, h, &y, &mut ws);
        stats.evaluations += 6;

        let err = {
            let mut sum = 0.0;
            for i in 0..n {
                let e = h
                    * (E1 * ws.k[0][i]
                        + E3 * ws.k[2][i]
                        + E4 * ws.k[3][i]
                        + E5 * ws.k[4][i]
                        + E6 * ws.k[5][i]
                        + E7 * ws.k[6][i]);
                let sk = ctl.atol + ctl.rtol * y[i].abs().max(ws.y_new[i].abs());
                sum += (e / sk) * (e / sk);
            }
            (sum / n as f64).sqrt()
        };

        if !err.is_finite() {
            h *= FAC_MIN;
            stats.rejected += 1;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(0.2 - BETA * 0.75);
        let mut fac = fac11 / fac_old.powf(BETA);
        fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let h_new = h / fac;

        if err <= 1.0 {
            fac_old = err.max(1e-4);
            stats.accepted += 1;
            // dense output coefficients
            for i in 0..n {
                let ydiff = ws.y_new[i] - y[i];
                let bspl = h * ws.k[0][i] - ydiff;
                ws.cont[0][i] = y[i];
                ws.cont[1][i] = ydiff;
                ws.cont[2][i] = bspl;
                ws.cont[3][i] = ydiff - h * ws.k[6][i] - bspl;
                ws.cont[4][i] = h
                    * (D1 * ws.k[0][i]
                        + D3 * ws.k[2][i]
                        + D4 * ws.k[3][i]
                        + D5 * ws.k[4][i]
                        + D6 * ws.k[5][i]
                        + D7 * ws.k[6][i]);
            }
            let t_new = if last { t_end } else { t + h };
            while next_sample < samples {
                let ts = if next_sample == samples - 1 {
                    t_end
                } else {
                    dt * next_sample as f64
                };
                if ts > t_new {
                    break;
                }
                if ts == t_new {
                    sink(next_sample, ts, &ws.y_new);
                } else {
                    let theta = (ts - t) / h;
                    let theta1 = 1.0 - theta;
                    for i in 0..n {
                        out[i] = ws.cont[0][i]
                            + theta
                                * (ws.cont[1][i]
                                    + theta1
                                        * (ws.cont[2][i]
                                            + theta * (ws.cont[3][i] + theta1 * ws.cont[4][i])));
                    }
                    sink(next_sample, ts, &out);
                }
                next_sample += 1;
            }
            std::mem::swap(&mut y, &mut ws.y_new);
            // first-same-as-last
            let (first, rest) = ws.k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            t = t_new;
            let h_next = if last_rejected { h_new.min(h) } else { h_new };
            last_rejected = false;
            h = h_next;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
    Ok(stats)
}

fn dopri_step<S: OdeSystem>(sys: &S, t: f64, h: f64, y: &[f64], ws: &mut Workspace) {
    let n = y.len();
    let [k1, k2, k3, k4, k5, k6, k7] = &mut ws.k;
    let ys = &mut ws.y_stage;
    for i in 0..n {
        ys[i] = y[i] + h * A21 * k1[i];
    }
    sys.rhs(t + C2 * h, ys, k2);
    for i in 0..n {
        ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    sys.rhs(t + C3 * h, ys, k3);
    for i in 0..n {
        ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    sys.rhs(t + C4 * h, ys, k4);
    for i in 0..n {
        ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    sys.rhs(t + C5 * h, ys, k5);
    for i in 0..n {
        ys[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    sys.rhs(t + h, ys, k6);
    let yn = &mut ws.y_new;
    for i in 0..n {
        yn[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    sys.rhs(t + h, yn, k7);
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -self.0 * y[0];
        }
    }

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    struct Blowup;
    impl OdeSystem for Blowup {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[0] * y[0];
        }
    }

    #[test]
    fn exponential_decay_on_grid() {
        let ctl = StepControl::new(1e-10, 1e-12);
        let mut max_err: f64 = 0.0;
        let mut count = 0;
        integrate_uniform(&Decay(0.7), &[1.0], 0.01, 501, &ctl, "decay", |i, t, y| {
            assert!((t - 0.01 * i as f64).abs() < 1e-12);
            max_err = max_err.max((y[0] - (-0.7 * t).exp()).abs());
            count += 1;
        })
        .unwrap();
        assert_eq!(count, 501);
        assert!(max_err < 1e-9, "max error {max_err}");
    }

    #[test]
    fn dense_output_tracks_fast_oscillation() {
        let ctl = StepControl::new(1e-10, 1e-12);
        let mut max_err: f64 = 0.0;
        // coarse steps, fine output
        integrate_uniform(
            &Oscillator,
            &[1.0, 0.0],
            0.001,
            20001,
            &ctl,
            "osc",
            |_, t, y| {
                max_err = max_err
                    .max((y[0] - t.cos()).abs())
                    .max((y[1] + t.sin()).abs());
            },
        )
        .unwrap();
        assert!(max_err < 1e-8, "max error {max_err}");
    }

    #[test]
    fn finite_time_blowup_reports_failure() {
        let ctl = StepControl::new(1e-8, 1e-10);
        let r = integrate_uniform(&Blowup, &[1.0], 0.1, 21, &ctl, "blowup", |_, _, _| {});
        assert!(matches!(
            r,
            Err(Error::StepUnderflow { .. }) | Err(Error::TooManySteps { .. })
        ));
    }

    #[test]
    fn rejects_bad_tolerances() {
        let ctl = StepControl::new(0.0, 1e-10);
        assert!(integrate_uniform(&Decay(1.0), &[1.0], 0.1, 3, &ctl, "x", |_, _, _| {}).is_err());
    }
}
