//! Closed-form and symmetric example flows.
//!
//! Closed-form families are sampled on a [`TimeGrid`]. The NUT families are
//! locally rotationally symmetric Bianchi IX and VIII data integrated toward
//! the singularity.

use serde::{Deserialize, Serialize};

use crate::bianchi::{
    integrate_wh, reconstruct_flow, sigma_to_exponents, IntegrateOptions, KasnerExponents, WHState,
};
use crate::error::{Error, Result};
use crate::flow::{FlowSample, FrameMetric, Gauge, SecondForm, Structure, Trajectory};

pub use crate::flow::hubble_reindex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// Sample times `t_min ..= t_max` in the family's native time coordinate
/// (Hubble time for Hubble-gauge families, Schwarzschild `t` for
/// Kantowski-Sachs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl TimeGrid {
    pub fn log(t_min: f64, t_max: f64, count: usize) -> Self {
        TimeGrid {
            t_min,
            t_max,
            count,
            spacing: Spacing::Log,
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time grid needs 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidArgument(format!(
                "time grid needs at least 2 points, got {}",
                self.count
            )));
        }
        let last = (self.count - 1) as f64;
        let mut out: Vec<f64> = (0..self.count)
            .map(|i| {
                let x = i as f64 / last;
                match self.spacing {
                    Spacing::Log => (self.t_min.ln() + x * (self.t_max / self.t_min).ln()).exp(),
                    Spacing::Linear => self.t_min + x * (self.t_max - self.t_min),
                }
            })
            .collect();
        out[0] = self.t_min;
        out[self.count - 1] = self.t_max;
        Ok(out)
    }
}

/// Initial data of a locally rotationally symmetric NUT run: `Sigma_- = 0`,
/// `N_2 = N_3` fixed by the constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NutParams {
    pub sigma_plus: f64,
    /// `|N_1|` at `tau = 0`.
    pub n1: f64,
    /// Length of the integration toward the singularity.
    pub tau_span: f64,
    /// Largest integration step in `tau`.
    #[serde(default)]
    pub max_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Cone over the hyperbolic 3-space.
    Cone,
    /// Cone over a hyperbolic factor times a flat torus of dimension `flat_dim` (1 or 2).
    ConeTimesTorus {
        flat_dim: usize,
    },
    /// `h = diag(t^{2 p_i})` in Hubble time.
    Kasner {
        exponents: [f64; 3],
    },
    /// Schwarzschild interior of mass `mass`, sliced by `r = const`.
    KantowskiSachs {
        mass: f64,
    },
    TaubNut(NutParams),
    BianchiViiiNut(NutParams),
    /// Per-fiber asymptotic model of a polarized Gowdy spacetime: velocity
    /// `velocity`, offsets `alpha` (for `a`) and `omega` (for `W`).
    GowdyAsymptotic {
        velocity: f64,
        alpha: f64,
        omega: f64,
    },
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Cone => "cone",
            FamilySpec::ConeTimesTorus { .. } => "cone_times_torus",
            FamilySpec::Kasner { .. } => "kasner",
            FamilySpec::KantowskiSachs { .. } => "kantowski_sachs",
            FamilySpec::TaubNut(_) => "taub_nut",
            FamilySpec::BianchiViiiNut(_) => "bianchi_viii_nut",
            FamilySpec::GowdyAsymptotic { .. } => "gowdy_asymptotic",
        }
    }

    pub fn is_integrated(&self) -> bool {
        matches!(self, FamilySpec::TaubNut(_) | FamilySpec::BianchiViiiNut(_))
    }

    /// Wainwright-Hsu states of an integrated family, `None` for closed-form ones.
    ///
    /// Unlike [`generate`] this skips the metric embedding, whose entries leave
    /// the f64 range for tau-spans beyond about 115.
    pub fn integrate_states(&self) -> Result<Option<Vec<WHState>>> {
        let (params, sign1) = match self {
            FamilySpec::TaubNut(p) => (p, 1),
            FamilySpec::BianchiViiiNut(p) => (p, -1),
            _ => return Ok(None),
        };
        let s0 = nut_state(params, sign1)?;
        let opts = IntegrateOptions {
            max_step: params.max_step,
            constraint_tol: 1e-11,
            ..IntegrateOptions::default()
        };
        integrate_wh(&s0, (0.0, -params.tau_span), &opts).map(Some)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FamilySpec::Cone => Ok(()),
            FamilySpec::ConeTimesTorus { flat_dim } => {
                if flat_dim == 1 || flat_dim == 2 {
                    Ok(())
                } else {
                    Err(Error::InvalidFamily(format!(
                        "flat_dim must be 1 or 2, got {flat_dim}"
                    )))
                }
            }
            FamilySpec::Kasner { exponents } => KasnerExponents::checked(exponents).map(|_| ()),
            FamilySpec::KantowskiSachs { mass } => {
                if mass > 0.0 && mass.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidFamily(format!(
                        "mass must be positive, got {mass}"
                    )))
                }
            }
            FamilySpec::TaubNut(p) => nut_state(&p, 1).map(|_| ()),
            FamilySpec::BianchiViiiNut(p) => nut_state(&p, -1).map(|_| ()),
            FamilySpec::GowdyAsymptotic {
                velocity,
                alpha,
                omega,
            } => {
                if [velocity, alpha, omega].iter().all(|x| x.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidFamily(
                        "Gowdy parameters must be finite".into(),
                    ))
                }
            }
        }
    }
}

/// Output of [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRun {
    pub spec: FamilySpec,
    /// Samples in the family's native gauge.
    pub trajectory: Trajectory,
    /// The same slices in Hubble-time gauge.
    pub hubble: Trajectory,
    /// Wainwright-Hsu states of integrated families.
    pub wh_states: Option<Vec<WHState>>,
    /// Exponents of the Kasner model approached toward the singularity.
    pub limit_exponents: Option<KasnerExponents>,
    /// True for asymptotic models that only approximate a solution.
    pub limit_model: bool,
}

fn sample(
    gauge: Gauge,
    t: f64,
    lapse: f64,
    h: [f64; 3],
    k: [f64; 3],
    s: Structure,
) -> Result<FlowSample> {
    FlowSample::new(
        gauge,
        t,
        lapse,
        FrameMetric::new(h, s)?,
        SecondForm::new(k)?,
    )
}

/// `eta - sin(eta)` without cancellation for small `eta`.
fn eta_minus_sin(eta: f64) -> f64 {
    if eta < 0.5 {
        let e2 = eta * eta;
        let mut term = eta * e2 / 6.0;
        let mut acc: f64 = 0.0;
        let mut k = 3.0;
        while term.abs() > 1e-18 * acc.abs().max(f64::MIN_POSITIVE) {
            acc += term;
            term *= -e2 / ((k + 1.0) * (k + 2.0));
            k += 2.0;
        }
        acc
    } else {
        eta - eta.sin()
    }
}

/// Schwarzschild-interior slice `r = t` in proper-time gauge.
fn kantowski_sachs_sample(mass: f64, t: f64) -> Result<FlowSample> {
    if !(t > 0.0 && t < 2.0 * mass) {
        return Err(Error::OutOfDomain {
            t,
            domain: format!("(0, {})", 2.0 * mass),
        });
    }
    let f = 2.0 * mass / t - 1.0;
    let root_f = f.sqrt();
    let eta = 2.0 * (t / (2.0 * mass)).sqrt().asin();
    let proper = mass * eta_minus_sin(eta);
    sample(
        Gauge::ProperTime,
        proper,
        1.0,
        [f, t * t, t * t],
        [mass * root_f / (t * t), -t * root_f, -t * root_f],
        Structure::LineTimesSphere,
    )
}

/// Mean curvature of the Kantowski-Sachs slice `r = t`.
pub fn kantowski_sachs_mean_curvature(mass: f64, t: f64) -> f64 {
    -(3.0 * mass - 2.0 * t) / (t.powf(1.5) * (2.0 * mass - t).sqrt())
}

fn nut_state(p: &NutParams, sign1: i8) -> Result<WHState> {
    let c = (4.0 / 3.0) * (1.0 - p.sigma_plus * p.sigma_plus);
    let n1 = sign1 as f64 * p.n1;
    if !(p.n1 > 0.0 && p.n1.is_finite() && p.sigma_plus.abs() < 1.0) {
        return Err(Error::InvalidFamily(format!(
            "NUT data needs n1 > 0 and |sigma_plus| < 1, got n1 = {}, sigma_plus = {}",
            p.n1, p.sigma_plus
        )));
    }
    if !(p.tau_span > 0.0 && p.tau_span.is_finite()) {
        return Err(Error::InvalidFamily(format!(
            "tau_span must be positive, got {}",
            p.tau_span
        )));
    }
    let n = (n1 * n1 - c) / (4.0 * n1);
    if !(n > 0.0) {
        return Err(Error::InvalidFamily(format!(
            "sigma_plus = {}, n1 = {} gives N2 = N3 = {n} <= 0",
            p.sigma_plus, p.n1
        )));
    }
    Ok(WHState::new(p.sigma_plus, 0.0, [n1, n, n], 0.0, 0.0))
}

/// Exponents of the Kasner model approached by a polarized Gowdy fiber with velocity `v`.
pub fn gowdy_exponents(v: f64) -> KasnerExponents {
    let d = v * v + 3.0;
    KasnerExponents::from_array([(v * v - 1.0) / d, (2.0 - 2.0 * v) / d, (2.0 + 2.0 * v) / d])
}

/// Per-fiber Gowdy model at Hubble time `t_h`. With `t = e^{-tau}`,
/// `e^{2a} = e^{2 alpha} t^{(v^2-1)/2}`, `e^W = e^omega t^{-v}`, and the
/// proper time `T = 4 e^alpha t^{(v^2+3)/4} / (v^2+3)` equals `t_H/3`.
fn gowdy_sample(v: f64, alpha: f64, omega: f64, t_h: f64) -> Result<FlowSample> {
    let d = v * v + 3.0;
    let log_t = (4.0 / d) * ((t_h / 3.0).ln() + (d / 4.0).ln() - alpha);
    let log_h = [
        2.0 * alpha + 0.5 * (v * v - 1.0) * log_t,
        omega + (1.0 - v) * log_t,
        -omega + (1.0 + v) * log_t,
    ];
    let p = gowdy_exponents(v).as_array();
    let h = log_h.map(f64::exp);
    let k = [
        -3.0 * p[0] * h[0] / t_h,
        -3.0 * p[1] * h[1] / t_h,
        -3.0 * p[2] * h[2] / t_h,
    ];
    sample(
        Gauge::HubbleTime,
        t_h,
        1.0 / 3.0,
        h,
        k,
        Structure::BIANCHI_I,
    )
}

/// Samples an example family.
///
/// Closed-form families need `grid`; integrated (NUT) families take their
/// span from their parameters and reject a grid.
pub fn generate(spec: &FamilySpec, grid: Option<&TimeGrid>) -> Result<FamilyRun> {
    spec.validate()?;
    if spec.is_integrated() {
        if grid.is_some() {
            return Err(Error::InvalidArgument(format!(
                "{} is integrated over tau_span and takes no time grid",
                spec.name()
            )));
        }
        let states = spec.integrate_states()?.expect("integrated family");
        let trajectory = reconstruct_flow(&states, 1.0)?;
        let hubble = hubble_reindex(&trajectory)?;
        let last = states
            .last()
            .expect("integration returns the initial state");
        return Ok(FamilyRun {
            spec: *spec,
            trajectory,
            hubble,
            limit_exponents: Some(sigma_to_exponents(last.sigma_plus, last.sigma_minus)),
            wh_states: Some(states),
            limit_model: false,
        });
    }

    let grid =
        grid.ok_or_else(|| Error::InvalidArgument(format!("{} needs a time grid", spec.name())))?;
    let times = grid.points()?;
    let mut samples = Vec::with_capacity(times.len());
    let mut limit = None;
    for &t in &times {
        let s = match *spec {
            FamilySpec::Cone => sample(
                Gauge::HubbleTime,
                t,
                1.0,
                [t * t; 3],
                [-t; 3],
                Structure::Hyperbolic,
            )?,
            FamilySpec::ConeTimesTorus { flat_dim: 1 } => sample(
                Gauge::ProperTime,
                t,
                1.0,
                [t * t, t * t, 1.0],
                [-t, -t, 0.0],
                Structure::HyperbolicPlaneTimesLine,
            )?,
            FamilySpec::ConeTimesTorus { .. } => sample(
                Gauge::ProperTime,
                t,
                1.0,
                [t * t, 1.0, 1.0],
                [-t, 0.0, 0.0],
                Structure::BIANCHI_I,
            )?,
            FamilySpec::Kasner { exponents: p } => {
                let h = p.map(|pi| t.powf(2.0 * pi));
                let k = [
                    -3.0 * p[0] * h[0] / t,
                    -3.0 * p[1] * h[1] / t,
                    -3.0 * p[2] * h[2] / t,
                ];
                limit = Some(KasnerExponents::from_array(p));
                sample(Gauge::HubbleTime, t, 1.0 / 3.0, h, k, Structure::BIANCHI_I)?
            }
            FamilySpec::KantowskiSachs { mass } => {
                limit = Some(KasnerExponents::from_array([
                    -1.0 / 3.0,
                    2.0 / 3.0,
                    2.0 / 3.0,
                ]));
                kantowski_sachs_sample(mass, t)?
            }
            FamilySpec::GowdyAsymptotic {
                velocity,
                alpha,
                omega,
            } => {
                limit = Some(gowdy_exponents(velocity));
                gowdy_sample(velocity, alpha, omega, t)?
            }
            FamilySpec::TaubNut(_) | FamilySpec::BianchiViiiNut(_) => unreachable!(),
        };
        samples.push(s);
    }
    let trajectory = Trajectory::new(samples)?;
    let hubble = hubble_reindex(&trajectory)?;
    Ok(FamilyRun {
        spec: *spec,
        trajectory,
        hubble,
        wh_states: None,
        limit_exponents: limit,
        limit_model: matches!(spec, FamilySpec::GowdyAsymptotic { .. }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GowdyReport {
    pub velocity: f64,
    pub exponents: KasnerExponents,
    pub sum_residual: f64,
    pub square_residual: f64,
    /// `-d ln t_H / d tau` of the model, with `t = e^{-tau}`.
    pub hubble_time_rate: f64,
    /// `d ln dvol / d ln t_H` of the model.
    pub volume_exponent: f64,
    pub limit_model: bool,
}

/// Limit exponents and the modeled Hubble-time and volume laws of a Gowdy fiber.
pub fn gowdy_asymptotic_checks(spec: &FamilySpec) -> Result<GowdyReport> {
    let FamilySpec::GowdyAsymptotic {
        velocity,
        alpha,
        omega,
    } = *spec
    else {
        return Err(Error::InvalidFamily(format!(
            "{} is not a Gowdy model",
            spec.name()
        )));
    };
    spec.validate()?;
    let exponents = gowdy_exponents(velocity);
    let d = velocity * velocity + 3.0;
    // Two model slices one Gowdy time unit apart.
    let (tau_a, tau_b) = (10.0, 11.0);
    let t_h_of = |tau: f64| 3.0 * (4.0 / d) * alpha.exp() * (-(d / 4.0) * tau).exp();
    let (th_a, th_b) = (t_h_of(tau_a), t_h_of(tau_b));
    let sa = gowdy_sample(velocity, alpha, omega, th_a)?;
    let sb = gowdy_sample(velocity, alpha, omega, th_b)?;
    Ok(GowdyReport {
        velocity,
        exponents,
        sum_residual: exponents.sum_residual(),
        square_residual: exponents.square_residual(),
        hubble_time_rate: -(th_b.ln() - th_a.ln()) / (tau_b - tau_a),
        volume_exponent: (sb.metric.log_dvol() - sa.metric.log_dvol()) / (th_b.ln() - th_a.ln()),
        limit_model: true,
    })
}
