use serde::Serialize;

use super::curvature::spatial_scalar_curvature;
use super::types::{FlowSample, FrameMetric, Gauge, SecondForm, Trajectory, DIM};
use crate::error::{Error, Result};

/// Mean curvature and traceless part of a second fundamental form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSplit {
    pub mean: f64,
    /// `K0 = K - (H/n) h`, coframe components.
    pub traceless: SecondForm,
    /// `|K0|^2 = |K|^2 - H^2/n`.
    pub traceless_norm_sq: f64,
}

pub fn trace_split(k: &SecondForm, h: &FrameMetric) -> TraceSplit {
    let n = DIM as f64;
    let eig = k.eigenvalues(h);
    let mean: f64 = eig.iter().sum();
    let d = h.diag();
    let mut traceless = [0.0; 3];
    let mut norm_sq = 0.0;
    for i in 0..3 {
        let e0 = eig[i] - mean / n;
        traceless[i] = e0 * d[i];
        norm_sq += e0 * e0;
    }
    TraceSplit {
        mean,
        traceless: SecondForm { diag: traceless },
        traceless_norm_sq: norm_sq,
    }
}

/// `|K|^2 = h^{ik} h^{jl} K_ij K_kl`.
pub fn second_form_norm_sq(k: &SecondForm, h: &FrameMetric) -> f64 {
    k.eigenvalues(h).iter().map(|e| e * e).sum()
}

/// Hamiltonian constraint `R - |K0|^2 + (1 - 1/n) H^2`.
///
/// The momentum constraint vanishes identically for diagonal homogeneous data.
pub fn constraint_residual(s: &FlowSample, scalar_curvature: f64) -> f64 {
    let split = trace_split(&s.second_form, &s.metric);
    let n = DIM as f64;
    scalar_curvature - split.traceless_norm_sq + (1.0 - 1.0 / n) * split.mean * split.mean
}

/// Natural scale `|R| + |K0|^2 + H^2` for relative constraint checks.
pub fn constraint_scale(s: &FlowSample, scalar_curvature: f64) -> f64 {
    let split = trace_split(&s.second_form, &s.metric);
    scalar_curvature.abs() + split.traceless_norm_sq + split.mean * split.mean
}

/// Constraint residual with `R` computed from the slice geometry.
pub fn sample_constraint_residual(s: &FlowSample) -> f64 {
    constraint_residual(s, spatial_scalar_curvature(&s.metric))
}

/// Exact CMC lapse of a homogeneous slice in Hubble-time gauge, `L = n / (n^2 + t^2 R)`.
pub fn hubble_lapse_homogeneous(scalar_curvature: f64, t: f64, n: usize) -> Result<f64> {
    let n = n as f64;
    let denom = n * n + t * t * scalar_curvature;
    if !(denom > 0.0) {
        return Err(Error::GaugeBreakdown { value: denom });
    }
    Ok(n / denom)
}

fn rescale_sample(s: &FlowSample, scale: f64) -> FlowSample {
    let h = s.metric.diag();
    let k = s.second_form.diag;
    let inv2 = 1.0 / (scale * scale);
    FlowSample {
        lapse: s.lapse,
        metric: FrameMetric::new(
            [h[0] * inv2, h[1] * inv2, h[2] * inv2],
            s.metric.structure(),
        )
        .expect("positive scaling of a valid metric"),
        second_form: SecondForm {
            diag: [k[0] / scale, k[1] / scale, k[2] / scale],
        },
        t: s.t / scale,
        gauge: s.gauge,
    }
}

fn check_rescalable(traj: &Trajectory, scale: f64) -> Result<()> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidScale(scale));
    }
    if traj.gauge() == Gauge::WHTime {
        return Err(Error::WrongGauge {
            required: "hubble or proper",
            found: "wh",
        });
    }
    Ok(())
}

/// Rescaled flow `E_s`: `u = t/s`, `L_s(u) = L(su)`, `h_s(u) = s^-2 h(su)`,
/// `K_s(u) = s^-1 K(su)`.
///
/// Every sample is mapped exactly (no interpolation). The anchor time `t0`
/// is kept, so logarithmic time on the rescaled flow is shifted by `ln s`.
pub fn rescale_flow(traj: &Trajectory, scale: f64) -> Result<Trajectory> {
    check_rescalable(traj, scale)?;
    let samples = traj
        .samples()
        .iter()
        .map(|s| rescale_sample(s, scale))
        .collect();
    Trajectory::with_anchor(samples, traj.t0())
}

/// [`rescale_flow`] restricted to rescaled times in `[u_min, u_max]`.
pub fn rescale_window(traj: &Trajectory, scale: f64, u_min: f64, u_max: f64) -> Result<Trajectory> {
    check_rescalable(traj, scale)?;
    let samples: Vec<_> = traj
        .samples()
        .iter()
        .map(|s| rescale_sample(s, scale))
        .filter(|s| s.t >= u_min && s.t <= u_max)
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptyTrajectory(format!(
            "no rescaled samples in [{u_min}, {u_max}] for s = {scale}"
        )));
    }
    Trajectory::with_anchor(samples, traj.t0())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityRow {
    pub t: f64,
    /// `ln( t^-n dvol(t) / (ta^-n dvol(ta)) )`.
    pub log_milne_density: f64,
    /// `ln( t^-1 dvol(t) / (ta^-1 dvol(ta)) )`.
    pub log_kasner_density: f64,
    /// `n * int_t^ta (1 - L) dv/v`.
    pub milne_defect: f64,
    /// `n * int_t^ta (L - 1/n) dv/v`.
    pub kasner_defect: f64,
}

impl DensityRow {
    pub fn milne_density(&self) -> f64 {
        self.log_milne_density.exp()
    }

    pub fn kasner_density(&self) -> f64 {
        self.log_kasner_density.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneDensities {
    /// Time of the normalizing sample (the sample closest to `t0` in `ln t`).
    pub anchor_time: f64,
    pub rows: Vec<DensityRow>,
    /// Richardson estimate of the quadrature error of the defect integrals.
    pub quadrature_error: f64,
}

impl MonotoneDensities {
    /// Largest violation of `ln(milne) = milne_defect` and
    /// `ln(kasner) = -kasner_defect`.
    pub fn identity_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                (r.log_milne_density - r.milne_defect)
                    .abs()
                    .max((r.log_kasner_density + r.kasner_defect).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// `int_{x[i]}^{x[i+1]} f` using the cubic through the four nearest samples
/// (fewer near short grids), evaluated by two-point Gauss quadrature.
fn interval_integral(x: &[f64], f: &[f64], i: usize) -> f64 {
    let n = x.len();
    let width = n.min(4);
    let lo = i.saturating_sub(1).min(n - width);
    let nodes = lo..lo + width;
    let interp = |z: f64| -> f64 {
        nodes
            .clone()
            .map(|j| {
                let w: f64 = nodes
                    .clone()
                    .filter(|&m| m != j)
                    .map(|m| (z - x[m]) / (x[j] - x[m]))
                    .product();
                w * f[j]
            })
            .sum()
    };
    let h = x[i + 1] - x[i];
    let mid = 0.5 * (x[i] + x[i + 1]);
    let off = 0.5 * h / 3f64.sqrt();
    0.5 * h * (interp(mid - off) + interp(mid + off))
}

/// `out[i] = int_{x[0]}^{x[i]} f`.
fn cumulative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    for i in 1..f.len() {
        out[i] = out[i - 1] + interval_integral(x, f, i - 1);
    }
    out
}

/// `out[i] = int_{x_i}^{x_anchor} f`.
fn cumulative_from_anchor(x: &[f64], f: &[f64], anchor: usize) -> Vec<f64> {
    let c = cumulative(x, f);
    c.iter().map(|ci| c[anchor] - ci).collect()
}

/// Richardson estimate of the error of [`cumulative`] over the whole grid,
/// from the same rule on every second sample.
fn quadrature_error_estimate(x: &[f64], f: &[f64]) -> f64 {
    if x.len() < 9 {
        return 0.0;
    }
    let last = (x.len() - 1) / 2 * 2;
    let fine = cumulative(&x[..=last], &f[..=last])[last];
    let xs: Vec<f64> = x[..=last].iter().step_by(2).copied().collect();
    let fs: Vec<f64> = f[..=last].iter().step_by(2).copied().collect();
    let coarse = cumulative(&xs, &fs)[xs.len() - 1];
    (fine - coarse).abs() / 15.0
}

/// Pointwise monotone densities and their defect integrals along a
/// Hubble-gauge trajectory.
pub fn monotone_densities(traj: &Trajectory) -> Result<MonotoneDensities> {
    traj.require_gauge(Gauge::HubbleTime)?;
    let n = DIM as f64;
    let samples = traj.samples();
    let log_t: Vec<f64> = samples.iter().map(|s| s.t.ln()).collect();
    let log_t0 = traj.t0().ln();
    let anchor = log_t
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - log_t0).abs().total_cmp(&(b.1 - log_t0).abs()))
        .map(|(i, _)| i)
        .expect("trajectory is non-empty");

    let milne_integrand: Vec<f64> = samples.iter().map(|s| n * (1.0 - s.lapse)).collect();
    let kasner_integrand: Vec<f64> = samples.iter().map(|s| n * (s.lapse - 1.0 / n)).collect();
    let milne_defect = cumulative_from_anchor(&log_t, &milne_integrand, anchor);
    let kasner_defect = cumulative_from_anchor(&log_t, &kasner_integrand, anchor);

    let log_vol: Vec<f64> = samples.iter().map(|s| s.metric.log_dvol()).collect();
    let rows = (0..samples.len())
        .map(|i| DensityRow {
            t: samples[i].t,
            log_milne_density: (log_vol[i] - log_vol[anchor]) - n * (log_t[i] - log_t[anchor]),
            log_kasner_density: (log_vol[i] - log_vol[anchor]) - (log_t[i] - log_t[anchor]),
            milne_defect: milne_defect[i],
            kasner_defect: kasner_defect[i],
        })
        .collect();

    let quadrature_error = quadrature_error_estimate(&log_t, &milne_integrand)
        .max(quadrature_error_estimate(&log_t, &kasner_integrand));

    Ok(MonotoneDensities {
        anchor_time: samples[anchor].t,
        rows,
        quadrature_error,
    })
}

/// Reparametrizes a homogeneous vacuum flow by Hubble time `t_H = -n/H`.
///
/// Slices are unchanged; the lapse becomes `n / (n^2 + t_H^2 R)`, which
/// follows from `dH/dt = L |K|^2` and the constraint.
pub fn hubble_reindex(traj: &Trajectory) -> Result<Trajectory> {
    let n = DIM as f64;
    let mut samples = Vec::with_capacity(traj.len());
    let mut prev: Option<f64> = None;
    let mut direction = 0.0;
    for (i, s) in traj.samples().iter().enumerate() {
        let h = s.mean_curvature();
        if !(h < 0.0 && h.is_finite()) {
            return Err(Error::NonMonotoneMeanCurvature(format!(
                "H = {h} at sample {i} is not strictly negative"
            )));
        }
        let t_h = -n / h;
        if let Some(p) = prev {
            let d = (t_h - p).signum();
            if t_h == p || (direction != 0.0 && d != direction) {
                return Err(Error::NonMonotoneMeanCurvature(format!(
                    "H is not strictly monotone at sample {i}"
                )));
            }
            direction = d;
        }
        prev = Some(t_h);
        let lapse = hubble_lapse_homogeneous(spatial_scalar_curvature(&s.metric), t_h, DIM)?;
        samples.push(FlowSample::new(
            Gauge::HubbleTime,
            t_h,
            lapse,
            s.metric,
            s.second_form,
        )?);
    }
    Trajectory::new(samples)
}
