use std::io::Write;

use super::state::{exponents_of, WHState, SQRT3};
use crate::error::{Error, Result};
use crate::flow::{
    frame_structure_constants, hubble_reindex, FlowSample, FrameMetric, Gauge, SecondForm,
    Structure, Trajectory,
};

/// Constraint tolerance used by [`wh_embed`].
pub const EMBED_TOL: f64 = 1e-8;

fn dp_dtau(s: &WHState) -> [f64; 3] {
    let r = super::state::wh_rhs(s);
    [
        -2.0 * r.sigma_plus / 3.0,
        (r.sigma_plus + SQRT3 * r.sigma_minus) / 3.0,
        (r.sigma_plus - SQRT3 * r.sigma_minus) / 3.0,
    ]
}

/// Sign pattern shared by all states, or the index of the first change.
pub fn common_sign_pattern(states: &[WHState]) -> Result<[i8; 3]> {
    let first = states
        .first()
        .ok_or_else(|| Error::EmptyTrajectory("no Wainwright-Hsu states".into()))?;
    let signs = first.n_signs();
    if let Some(index) = states.iter().position(|s| s.n_signs() != signs) {
        return Err(Error::SignPatternChanged { index });
    }
    Ok(signs)
}

/// Physical flow in Wainwright-Hsu time (`t = tau`, `L = 3/theta`).
///
/// The volume follows `dvol(tau) = e^{3 (tau - tau_0)} dvol(tau_0)`. Where the
/// structure constants fix the coframe scale (`N_i != 0`) the metric is
/// algebraic, `h_i = |N_i| theta dvol`; the remaining `ln h_i` are integrated
/// from `d ln h_i / d tau = 6 p_i` with an endpoint corrected trapezoid rule
/// and shifted so that `h1 h2 h3 = dvol^2`. `dvol0`, the volume density at
/// the first state, is only used when some `N_i` vanishes (for types VIII and
/// IX the volume is determined by `theta` and `N`).
pub fn reconstruct_flow(states: &[WHState], dvol0: f64) -> Result<Trajectory> {
    let signs = common_sign_pattern(states)?;
    let structure = Structure::class_a(signs)?;
    let first = states[0];
    let all_active = signs.iter().all(|&s| s != 0);
    let log_vol0 = if all_active {
        -first.raw_log_abs_n().iter().sum::<f64>() - 3.0 * first.log_theta
    } else {
        if !(dvol0.is_finite() && dvol0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dvol0 must be positive, got {dvol0}"
            )));
        }
        dvol0.ln()
    };
    let free = signs.iter().filter(|&&s| s == 0).count();

    // Integrated ln h_i of the free axes; the first value is fixed by the
    // shift below.
    let mut log_h = [0.0; 3];
    let mut samples = Vec::with_capacity(states.len());
    let mut prev: Option<(WHState, [f64; 3], [f64; 3])> = None;
    for s in states {
        let p = exponents_of(s.sigma_plus, s.sigma_minus);
        let dp = dp_dtau(s);
        if let Some((sp, pp, dpp)) = prev {
            let d = s.tau - sp.tau;
            if !(d != 0.0) {
                return Err(Error::NonMonotoneTime {
                    index: samples.len(),
                });
            }
            for i in 0..3 {
                log_h[i] += 6.0 * (0.5 * d * (pp[i] + p[i]) + d * d / 12.0 * (dpp[i] - dp[i]));
            }
        }
        let log_vol = log_vol0 + 3.0 * (s.tau - first.tau);
        let mut fixed = 0.0;
        let mut free_sum = 0.0;
        for i in 0..3 {
            if signs[i] != 0 {
                log_h[i] = s.raw_log_abs_n()[i] + s.log_theta + log_vol;
                fixed += log_h[i];
            } else {
                free_sum += log_h[i];
            }
        }
        if free > 0 {
            let shift = (2.0 * log_vol - fixed - free_sum) / free as f64;
            for i in 0..3 {
                if signs[i] == 0 {
                    log_h[i] += shift;
                }
            }
        }
        let theta = s.theta();
        let h = log_h.map(f64::exp);
        if !(theta.is_finite() && h.iter().all(|x| x.is_finite() && *x > 0.0)) {
            return Err(Error::NonFinite("reconstructed metric"));
        }
        let k = [
            -theta * p[0] * h[0],
            -theta * p[1] * h[1],
            -theta * p[2] * h[2],
        ];
        samples.push(FlowSample::new(
            Gauge::WHTime,
            s.tau,
            3.0 / theta,
            FrameMetric::new(h, structure)?,
            SecondForm::new(k)?,
        )?);
        prev = Some((*s, p, dp));
    }
    Trajectory::new(samples)
}

/// [`reconstruct_flow`] followed by Hubble-time reindexing (`t_H = 3/theta`).
pub fn reconstruct_hubble(states: &[WHState], dvol0: f64) -> Result<Trajectory> {
    hubble_reindex(&reconstruct_flow(states, dvol0)?)
}

/// Wainwright-Hsu variables of diagonal class-A data; `tau = ln(dvol)/3`.
pub fn wh_embed(h: &FrameMetric, k: &SecondForm) -> Result<WHState> {
    let Some(pattern) = h.structure().pattern() else {
        return Err(Error::InvalidStructure(format!(
            "{:?} is not a class-A structure",
            h.structure()
        )));
    };
    let eig = k.eigenvalues(h);
    let mean: f64 = eig.iter().sum();
    if !(mean < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mean curvature must be negative, got {mean}"
        )));
    }
    let theta = -mean;
    let p = eig.map(|e| e / mean);
    let lambda = frame_structure_constants(pattern, h.diag());
    let s = WHState::new(
        (1.0 - 3.0 * p[0]) / 2.0,
        SQRT3 * (p[1] - p[2]) / 2.0,
        lambda.map(|l| l / theta),
        theta.ln(),
        h.log_dvol() / 3.0,
    );
    super::state::check_constraint(&s, EMBED_TOL)?;
    Ok(s)
}

pub const WH_CSV_HEADER: &str = "tau,sigma_plus,sigma_minus,n1,n2,n3,log_theta,constraint_residual";

/// One row per state under [`WH_CSV_HEADER`].
pub fn write_wh_csv<W: Write>(states: &[WHState], mut out: W) -> Result<()> {
    writeln!(out, "{WH_CSV_HEADER}")?;
    for s in states {
        let n = s.n();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.tau,
            s.sigma_plus,
            s.sigma_minus,
            n[0],
            n[1],
            n[2],
            s.log_theta,
            s.constraint_residual()
        )?;
    }
    Ok(())
}
