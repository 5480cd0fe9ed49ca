//! Adaptive Dormand-Prince 5(4) integration of the Wainwright-Hsu system.
//!
//! The integrated coordinates are `(Sigma_+, Sigma_-, ln|N_1|, ln|N_2|, ln|N_3|, ln theta)`
//! with vanishing `N_i` frozen. Constraint projection moves along the
//! gradient of the constraint in these coordinates, which keeps the sign
//! pattern and every invariant subspace (`N_i = 0`, `N_2 = N_3` with
//! `Sigma_- = 0`, ...) intact.

use super::state::{n_growth, sigma_rate, WHState};
use crate::error::{Error, Result};

const DIMY: usize = 6;

#[cfg(test)]
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed `|d tau|`; `None` for no limit.
    pub max_step: Option<f64>,
    pub initial_step: f64,
    /// Project back onto the constraint surface when the residual exceeds `constraint_tol / 10`.
    pub projection: bool,
    pub constraint_tol: f64,
    /// Residual above which the run is aborted.
    pub hard_cap: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: None,
            initial_step: 1e-3,
            projection: true,
            constraint_tol: 1e-8,
            hard_cap: 1e-6,
            max_steps: 20_000_000,
        }
    }
}

struct System {
    signs: [i8; 3],
}

impl System {
    fn pack(s: &WHState) -> [f64; DIMY] {
        let l = s.raw_log_abs_n();
        [s.sigma_plus, s.sigma_minus, l[0], l[1], l[2], s.log_theta]
    }

    fn unpack(&self, y: &[f64; DIMY], tau: f64) -> WHState {
        WHState::from_log_n(y[0], y[1], self.signs, [y[2], y[3], y[4]], y[5], tau)
    }

    fn n(&self, y: &[f64; DIMY]) -> [f64; 3] {
        let mut n = [0.0; 3];
        for i in 0..3 {
            if self.signs[i] != 0 {
                n[i] = self.signs[i] as f64 * y[2 + i].exp();
            }
        }
        n
    }

    fn rhs(&self, y: &[f64; DIMY]) -> [f64; DIMY] {
        let (sp, sm) = (y[0], y[1]);
        let [dsp, dsm] = sigma_rate(sp, sm, self.n(y));
        let g = n_growth(sp, sm);
        let mut out = [dsp, dsm, 0.0, 0.0, 0.0, -(1.0 + 2.0 * (sp * sp + sm * sm))];
        for i in 0..3 {
            if self.signs[i] != 0 {
                out[2 + i] = g[i];
            }
        }
        out
    }

    fn constraint(&self, y: &[f64; DIMY]) -> f64 {
        self.unpack(y, 0.0).constraint_residual()
    }

    /// Gradient of the constraint in the integrated coordinates.
    fn constraint_grad(&self, y: &[f64; DIMY]) -> [f64; DIMY] {
        let [n1, n2, n3] = self.n(y);
        [
            2.0 * y[0],
            2.0 * y[1],
            1.5 * n1 * (n1 - n2 - n3),
            1.5 * n2 * (n2 - n3 - n1),
            1.5 * n3 * (n3 - n1 - n2),
            0.0,
        ]
    }

    /// Gauss-Newton steps along the constraint gradient. For types VIII and
    /// IX `ln|N1 N2 N3| + 3 ln theta` is affine in tau (the volume law), so the
    /// correction is kept off that direction.
    fn project(&self, y: &mut [f64; DIMY]) {
        let all_active = self.signs.iter().all(|&s| s != 0);
        for _ in 0..8 {
            let g = self.constraint(y);
            if g.abs() <= 1e-15 {
                return;
            }
            let grad = self.constraint_grad(y);
            let mut dir = grad;
            if all_active {
                let mean = (dir[2] + dir[3] + dir[4]) / 3.0;
                for d in &mut dir[2..5] {
                    *d -= mean;
                }
            }
            let slope: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
            if !(slope > 0.0) {
                return;
            }
            for i in 0..DIMY {
                y[i] -= g / slope * dir[i];
            }
        }
    }
}

fn error_norm(
    y0: &[f64; DIMY],
    y1: &[f64; DIMY],
    err: &[f64; DIMY],
    opts: &IntegrateOptions,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..DIMY {
        let scale = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / scale).powi(2);
    }
    (acc / DIMY as f64).sqrt()
}

/// Integrates from `s0` at `tau_span.0` to `tau_span.1` (either direction),
/// returning the initial state followed by every accepted step.
pub fn integrate_wh(
    s0: &WHState,
    tau_span: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<Vec<WHState>> {
    let (tau0, tau1) = tau_span;
    if !(tau0.is_finite() && tau1.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tau_span ({tau0}, {tau1}) is not finite"
        )));
    }
    let sys = System {
        signs: s0.n_signs(),
    };
    let mut y = System::pack(s0);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state"));
    }
    let residual = sys.constraint(&y);
    if !(residual.abs() <= opts.hard_cap) {
        return Err(Error::ConstraintViolation {
            residual,
            tol: opts.hard_cap,
        });
    }
    if opts.projection && residual.abs() > opts.constraint_tol / 10.0 {
        sys.project(&mut y);
    }

    let mut tau = tau0;
    let mut out = vec![sys.unpack(&y, tau)];
    if tau0 == tau1 {
        return Ok(out);
    }
    let dir = if tau1 > tau0 { 1.0 } else { -1.0 };
    let max_step = opts.max_step.unwrap_or(f64::INFINITY).abs();
    let mut h = opts
        .initial_step
        .abs()
        .min(max_step)
        .min((tau1 - tau0).abs());
    let mut k = [[0.0; DIMY]; 7];
    k[0] = sys.rhs(&y);
    let mut steps = 0usize;

    while (tau1 - tau) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepUnderflow {
                step: h,
                tau,
                last: Box::new(sys.unpack(&y, tau)),
            });
        }
        let remaining = (tau1 - tau).abs();
        let last_step = h >= remaining;
        if last_step {
            h = remaining;
        }
        let hs = dir * h;
        for stage in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    for i in 0..DIMY {
                        ys[i] += hs * a * kj[i];
                    }
                }
            }
            k[stage] = sys.rhs(&ys);
        }
        let mut y_new = y;
        let mut err = [0.0; DIMY];
        for i in 0..DIMY {
            let mut inc = 0.0;
            let mut e = 0.0;
            for s in 0..6 {
                inc += A[6][s] * k[s][i];
            }
            for s in 0..7 {
                e += E[s] * k[s][i];
            }
            y_new[i] += hs * inc;
            err[i] = hs * e;
        }
        let en = error_norm(&y, &y_new, &err, opts);
        if !en.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
        } else if en <= 1.0 {
            tau = if last_step { tau1 } else { tau + hs };
            y = y_new;
            let mut projected = false;
            let drift = sys.constraint(&y);
            if opts.projection && drift.abs() > opts.constraint_tol / 10.0 {
                sys.project(&mut y);
                projected = true;
            }
            let drift_after = sys.constraint(&y);
            if drift_after.abs() > opts.hard_cap {
                return Err(Error::ConstraintDrift {
                    drift: drift_after,
                    cap: opts.hard_cap,
                    tau,
                    last: Box::new(*out.last().expect("non-empty")),
                });
            }
            out.push(sys.unpack(&y, tau));
            // FSAL: the last stage is the derivative at the new point unless projected.
            k[0] = if projected { sys.rhs(&y) } else { k[6] };
            let factor = if en == 0.0 {
                5.0
            } else {
                (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(max_step);
            continue;
        } else {
            h *= (0.9 * en.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h < 1e-14 * tau.abs().max(1.0) {
            return Err(Error::StepUnderflow {
                step: h,
                tau,
                last: Box::new(sys.unpack(&y, tau)),
            });
        }
    }
    Ok(out)
}
