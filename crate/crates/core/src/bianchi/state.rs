use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{class_a_ricci, class_a_scalar, codazzi_tensor, RiemannParts, SpatialCurvature};

pub(crate) const SQRT3: f64 = 1.732_050_807_568_877_2;

/// A point of the Wainwright-Hsu state space of vacuum Bianchi class A.
///
/// The structure variables are stored as a sign and `ln|N_i|`, so that the
/// exponentially small values reached near the singularity neither underflow
/// nor lose their sign. A zero sign marks an identically vanishing `N_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WHState {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    n_sign: [i8; 3],
    log_abs_n: [f64; 3],
    /// `ln theta`, `theta = -H > 0`.
    pub log_theta: f64,
    /// Wainwright-Hsu time; the singularity is at `tau -> -inf`.
    pub tau: f64,
}

impl WHState {
    pub fn new(sigma_plus: f64, sigma_minus: f64, n: [f64; 3], log_theta: f64, tau: f64) -> Self {
        let mut n_sign = [0i8; 3];
        let mut log_abs_n = [0.0; 3];
        for i in 0..3 {
            if n[i] != 0.0 {
                n_sign[i] = if n[i] > 0.0 { 1 } else { -1 };
                log_abs_n[i] = n[i].abs().ln();
            }
        }
        WHState {
            sigma_plus,
            sigma_minus,
            n_sign,
            log_abs_n,
            log_theta,
            tau,
        }
    }

    /// Builds a state from signs and `ln|N_i|`; entries with sign 0 are ignored.
    pub fn from_log_n(
        sigma_plus: f64,
        sigma_minus: f64,
        n_sign: [i8; 3],
        log_abs_n: [f64; 3],
        log_theta: f64,
        tau: f64,
    ) -> Self {
        let mut log_abs = log_abs_n;
        for i in 0..3 {
            if n_sign[i] == 0 {
                log_abs[i] = 0.0;
            }
        }
        WHState {
            sigma_plus,
            sigma_minus,
            n_sign: n_sign.map(|s| s.signum()),
            log_abs_n: log_abs,
            log_theta,
            tau,
        }
    }

    /// Kasner-circle point with all `N_i = 0`.
    pub fn kasner(sigma_plus: f64, sigma_minus: f64, log_theta: f64, tau: f64) -> Self {
        WHState::new(sigma_plus, sigma_minus, [0.0; 3], log_theta, tau)
    }

    pub fn n(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            if self.n_sign[i] != 0 {
                out[i] = self.n_sign[i] as f64 * self.log_abs_n[i].exp();
            }
        }
        out
    }

    pub fn n_signs(&self) -> [i8; 3] {
        self.n_sign
    }

    /// `ln|N_i|`, or `-inf` where `N_i` vanishes identically.
    pub fn log_abs_n(&self) -> [f64; 3] {
        let mut out = self.log_abs_n;
        for i in 0..3 {
            if self.n_sign[i] == 0 {
                out[i] = f64::NEG_INFINITY;
            }
        }
        out
    }

    pub(crate) fn raw_log_abs_n(&self) -> [f64; 3] {
        self.log_abs_n
    }

    pub fn theta(&self) -> f64 {
        self.log_theta.exp()
    }

    /// Hubble time `t_H = 3/theta`.
    pub fn hubble_time(&self) -> f64 {
        3.0 * (-self.log_theta).exp()
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_plus * self.sigma_plus + self.sigma_minus * self.sigma_minus
    }

    /// Deceleration parameter `q = 2 (Sigma_+^2 + Sigma_-^2)`.
    pub fn q(&self) -> f64 {
        2.0 * self.sigma_sq()
    }

    /// Vacuum constraint `Sigma^2 + (3/4) B(N) - 1`.
    pub fn constraint_residual(&self) -> f64 {
        self.sigma_sq() + 0.75 * quadratic_form(self.n()) - 1.0
    }

    /// Kasner exponents read off `K`: `p = ((1 - 2S+)/3, (1 + S+ + sqrt3 S-)/3, (1 + S+ - sqrt3 S-)/3)`.
    pub fn exponents(&self) -> [f64; 3] {
        exponents_of(self.sigma_plus, self.sigma_minus)
    }

    /// Distance to the circle point `(sp, sm)` with `N = 0`.
    pub fn distance_to_kasner(&self, sp: f64, sm: f64) -> f64 {
        let n = self.n();
        let ds = (self.sigma_plus - sp).powi(2) + (self.sigma_minus - sm).powi(2);
        (ds + n.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }
}

pub(crate) fn exponents_of(sp: f64, sm: f64) -> [f64; 3] {
    [
        (1.0 - 2.0 * sp) / 3.0,
        (1.0 + sp + SQRT3 * sm) / 3.0,
        (1.0 + sp - SQRT3 * sm) / 3.0,
    ]
}

/// `B(N) = N1^2 + N2^2 + N3^2 - 2 (N1 N2 + N2 N3 + N3 N1)`.
pub(crate) fn quadratic_form(n: [f64; 3]) -> f64 {
    let [a, b, c] = n;
    a * a + b * b + c * c - 2.0 * (a * b + b * c + c * a)
}

/// Time derivative of a [`WHState`] with respect to `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WHRate {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub n: [f64; 3],
    /// `d ln|N_i| / d tau` (zero where `N_i` vanishes).
    pub log_n: [f64; 3],
    pub log_theta: f64,
}

/// Growth rates `d ln|N_i|/d tau` of the structure variables.
pub(crate) fn n_growth(sp: f64, sm: f64) -> [f64; 3] {
    let q = 2.0 * (sp * sp + sm * sm);
    [
        q - 4.0 * sp,
        q + 2.0 * sp + 2.0 * SQRT3 * sm,
        q + 2.0 * sp - 2.0 * SQRT3 * sm,
    ]
}

/// Shear rates `(dSigma_+/dtau, dSigma_-/dtau)`.
pub(crate) fn sigma_rate(sp: f64, sm: f64, n: [f64; 3]) -> [f64; 2] {
    let q = 2.0 * (sp * sp + sm * sm);
    let [n1, n2, n3] = n;
    let s_plus = 0.5 * ((n2 - n3).powi(2) - n1 * (2.0 * n1 - n2 - n3));
    let s_minus = 0.5 * SQRT3 * (n3 - n2) * (n1 - n2 - n3);
    [
        -(2.0 - q) * sp - 3.0 * s_plus,
        -(2.0 - q) * sm - 3.0 * s_minus,
    ]
}

/// Vacuum class-A Wainwright-Hsu vector field.
pub fn wh_rhs(s: &WHState) -> WHRate {
    let n = s.n();
    let [dsp, dsm] = sigma_rate(s.sigma_plus, s.sigma_minus, n);
    let growth = n_growth(s.sigma_plus, s.sigma_minus);
    let mut log_n = [0.0; 3];
    let mut dn = [0.0; 3];
    for i in 0..3 {
        if s.n_sign[i] != 0 {
            log_n[i] = growth[i];
            dn[i] = growth[i] * n[i];
        }
    }
    WHRate {
        sigma_plus: dsp,
        sigma_minus: dsm,
        n: dn,
        log_n,
        log_theta: -(1.0 + s.q()),
    }
}

/// Derivative of the constraint residual along [`wh_rhs`].
pub fn constraint_rate(s: &WHState) -> f64 {
    let r = wh_rhs(s);
    let [n1, n2, n3] = s.n();
    let grad_n = [
        1.5 * (n1 - n2 - n3),
        1.5 * (n2 - n3 - n1),
        1.5 * (n3 - n1 - n2),
    ];
    2.0 * s.sigma_plus * r.sigma_plus
        + 2.0 * s.sigma_minus * r.sigma_minus
        + grad_n[0] * r.n[0]
        + grad_n[1] * r.n[1]
        + grad_n[2] * r.n[2]
}

/// Normalized spatial scalar curvature `R/H^2 = -B(N)/2`.
pub fn wh_scalar_curvature(s: &WHState) -> f64 {
    -0.5 * quadratic_form(s.n())
}

/// Coefficients of `d(H^2 h)/d tau` in units of `H^2 sigma^i (x) sigma^i`.
pub fn wh_growth_coefficients(sp: f64, sm: f64) -> [f64; 3] {
    let s2 = 4.0 * (sp * sp + sm * sm);
    [
        -4.0 * sp - s2,
        2.0 * sp + 2.0 * SQRT3 * sm - s2,
        2.0 * sp - 2.0 * SQRT3 * sm - s2,
    ]
}

/// Signs of the [`wh_growth_coefficients`]; `|c| <= 1e-12` counts as zero.
pub fn wh_growth_sign(s: &WHState) -> [i8; 3] {
    wh_growth_coefficients(s.sigma_plus, s.sigma_minus).map(|c| {
        if c.abs() <= 1e-12 {
            0
        } else if c > 0.0 {
            1
        } else {
            -1
        }
    })
}

/// Scale-free curvature norm `t_H^2 |Rm|_T` evaluated directly in
/// Wainwright-Hsu variables (frame data normalized by `theta`).
pub fn wh_curvature_norm(s: &WHState) -> f64 {
    let lambda = s.n();
    let k = s.exponents().map(|p| -p);
    let ricci = class_a_ricci(lambda);
    let scalar = class_a_scalar(lambda);
    let curv = SpatialCurvature {
        sectional: [
            0.5 * scalar - ricci[0],
            0.5 * scalar - ricci[1],
            0.5 * scalar - ricci[2],
        ],
        ricci,
        scalar,
        lambda: Some(lambda),
    };
    let electric = RiemannParts::vacuum_electric(&curv, k);
    let parts = RiemannParts::assemble(&curv, k, electric);
    debug_assert_eq!(codazzi_tensor(lambda, k), parts.codazzi);
    9.0 * parts.norm_sq().sqrt()
}

/// Checks `|constraint| <= tol`.
pub fn check_constraint(s: &WHState, tol: f64) -> Result<()> {
    let residual = s.constraint_residual();
    if !(residual.abs() <= tol) {
        return Err(Error::ConstraintViolation { residual, tol });
    }
    Ok(())
}
