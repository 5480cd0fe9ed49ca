//! generate / integrate -> reconstruct -> detect, and the artifact files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use kasner_core::bianchi::{
    integrate_wh, reconstruct_hubble, wh_curvature_norm, write_wh_csv, IntegrateOptions,
    KasnerExponents, WHState,
};
use kasner_core::exact::{generate, gowdy_asymptotic_checks, FamilySpec, GowdyReport};
use kasner_core::flow::jsonl::write_jsonl;
use kasner_core::flow::{
    constraint_residual, constraint_scale, monotone_densities, spatial_scalar_curvature,
    vacuum_curvature_norm, FlowSample, Trajectory,
};
use kasner_core::regime::{analyze, kasner_score, milne_score, DetectorConfig, RegimeReport};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::scenario::{Scenario, Source};

/// Slack for the pointwise density monotonicity checks (the densities are
/// computed from `dvol` directly, so only rounding enters).
const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySummary {
    /// Largest violation of the two density/defect log-identities.
    pub identity_residual: f64,
    pub quadrature_error: f64,
    pub milne_nonincreasing: bool,
    /// Checked only between neighbouring samples that both have `R <= 0`.
    pub kasner_nondecreasing_where_r_nonpositive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<&'static str>,
    pub samples: usize,
    pub t0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_exponents: Option<KasnerExponents>,
    pub limit_model: bool,
    /// Largest `|constraint| / (|R| + |K0|^2 + H^2)` over the Hubble-gauge samples.
    pub max_constraint_residual: f64,
    /// `sup t_H^2 |Rm|_T` over the run.
    pub sup_curvature: f64,
    pub densities: DensitySummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gowdy: Option<GowdyReport>,
    pub regime: RegimeReport,
}

pub struct RunOutput {
    pub report: RunReport,
    /// Hubble-gauge trajectory the detectors ran on.
    pub hubble: Trajectory,
    pub wh_states: Option<Vec<WHState>>,
}

struct Sampled {
    hubble: Trajectory,
    wh_states: Option<Vec<WHState>>,
    family: Option<FamilySpec>,
    limit_exponents: Option<KasnerExponents>,
    limit_model: bool,
}

fn integrate(s0: &WHState, tau_span: f64, max_step: Option<f64>) -> Result<Vec<WHState>> {
    let opts = IntegrateOptions {
        max_step,
        ..IntegrateOptions::default()
    };
    integrate_wh(s0, (0.0, -tau_span), &opts).map_err(|e| {
        let last = match &e {
            kasner_core::Error::StepUnderflow { last, .. }
            | kasner_core::Error::ConstraintDrift { last, .. } => Some(last.clone()),
            _ => None,
        };
        CliError::Integration { source: e, last }
    })
}

fn sample(scenario: &Scenario) -> Result<Sampled> {
    match &scenario.source {
        Source::Family { family, grid } => {
            let run = generate(family, grid.as_ref())?;
            Ok(Sampled {
                hubble: run.hubble,
                wh_states: run.wh_states,
                family: Some(*family),
                limit_exponents: run.limit_exponents,
                limit_model: run.limit_model,
            })
        }
        Source::Wh {
            initial,
            tau_span,
            max_step,
            dvol0,
        } => {
            let states = integrate(&initial.state(), *tau_span, *max_step)?;
            Ok(Sampled {
                hubble: reconstruct_hubble(&states, *dvol0)?,
                limit_exponents: None,
                wh_states: Some(states),
                family: None,
                limit_model: false,
            })
        }
        Source::Cycle {
            offset,
            signs,
            tau_span,
            max_step,
            ..
        } => {
            let cycle = scenario.cycle()?.expect("cycle source");
            let s0 = cycle.shadowing_start(*offset, *signs)?;
            let states = integrate(&s0, *tau_span, *max_step)?;
            Ok(Sampled {
                hubble: reconstruct_hubble(&states, 1.0)?,
                wh_states: Some(states),
                family: None,
                limit_exponents: None,
                limit_model: false,
            })
        }
    }
}

fn relative_constraint(s: &FlowSample) -> f64 {
    let r = spatial_scalar_curvature(&s.metric);
    let scale = constraint_scale(s, r);
    if scale > 0.0 {
        constraint_residual(s, r).abs() / scale
    } else {
        0.0
    }
}

fn density_summary(traj: &Trajectory) -> Result<DensitySummary> {
    let d = monotone_densities(traj)?;
    let samples = traj.samples();
    let mut milne = true;
    let mut kasner = true;
    for i in 1..d.rows.len() {
        let (a, b) = (&d.rows[i - 1], &d.rows[i]);
        let slack =
            MONOTONE_SLACK * (1.0 + a.log_milne_density.abs().max(a.log_kasner_density.abs()));
        if b.log_milne_density > a.log_milne_density + slack {
            milne = false;
        }
        let flat = spatial_scalar_curvature(&samples[i - 1].metric) <= 0.0
            && spatial_scalar_curvature(&samples[i].metric) <= 0.0;
        if flat && b.log_kasner_density < a.log_kasner_density - slack {
            kasner = false;
        }
    }
    Ok(DensitySummary {
        identity_residual: d.identity_residual(),
        quadrature_error: d.quadrature_error,
        milne_nonincreasing: milne,
        kasner_nondecreasing_where_r_nonpositive: kasner,
    })
}

/// Largest `t_H^2 |Rm|_T`, from the scale-free Wainwright-Hsu form when states are available.
pub fn sup_curvature(hubble: &Trajectory, wh_states: Option<&[WHState]>) -> Result<f64> {
    if let Some(states) = wh_states {
        return Ok(states.iter().map(wh_curvature_norm).fold(0.0, f64::max));
    }
    let mut sup: f64 = 0.0;
    for s in hubble.samples() {
        sup = sup.max(s.t * s.t * vacuum_curvature_norm(s)?);
    }
    Ok(sup)
}

fn summarize(
    name: &str,
    source: &'static str,
    sampled: Sampled,
    cfg: &DetectorConfig,
) -> Result<RunOutput> {
    let hubble = sampled.hubble;
    let regime = analyze(&hubble, cfg)?;
    let gowdy = match sampled.family {
        Some(spec @ FamilySpec::GowdyAsymptotic { .. }) => Some(gowdy_asymptotic_checks(&spec)?),
        _ => None,
    };
    let report = RunReport {
        scenario: name.to_string(),
        source,
        family: sampled.family.map(|f| f.name()),
        samples: hubble.len(),
        t0: hubble.t0(),
        limit_exponents: sampled.limit_exponents,
        limit_model: sampled.limit_model,
        max_constraint_residual: hubble
            .samples()
            .iter()
            .map(relative_constraint)
            .fold(0.0, f64::max),
        sup_curvature: sup_curvature(&hubble, sampled.wh_states.as_deref())?,
        densities: density_summary(&hubble)?,
        gowdy,
        regime,
    };
    Ok(RunOutput {
        report,
        hubble,
        wh_states: sampled.wh_states,
    })
}

/// Runs a scenario without touching the file system.
pub fn execute(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    let sampled = sample(scenario)?;
    summarize(
        &scenario.name,
        scenario.source.kind(),
        sampled,
        &scenario.detector,
    )
}

/// Detectors on an existing trajectory (reindexed to Hubble time if needed).
pub fn detect(name: &str, traj: &Trajectory, cfg: &DetectorConfig) -> Result<RunOutput> {
    let hubble = match traj.gauge() {
        kasner_core::flow::Gauge::HubbleTime => traj.clone(),
        _ => kasner_core::flow::hubble_reindex(traj)?,
    };
    let sampled = Sampled {
        hubble,
        wh_states: None,
        family: None,
        limit_exponents: None,
        limit_model: false,
    };
    summarize(name, "trajectory", sampled, cfg)
}

fn create(dir: &Path, file: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(file);
    let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    Ok((path, BufWriter::new(f)))
}

fn write_with<F>(dir: &Path, file: &str, written: &mut Vec<PathBuf>, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::result::Result<(), CliError>,
{
    let (path, mut w) = create(dir, file)?;
    body(&mut w)?;
    w.flush().map_err(|e| CliError::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn io_at(dir: &Path, file: &str) -> impl Fn(std::io::Error) -> CliError {
    let path = dir.join(file);
    move |e| CliError::io(&path, e)
}

/// Normalized shear `(Sigma_+, Sigma_-)` of a slice, from `p_i = k_i / H`.
fn sigma_of(s: &FlowSample) -> [f64; 2] {
    let k = s.second_form.eigenvalues(&s.metric);
    let h: f64 = k.iter().sum();
    let c = KasnerExponents::from_array(k.map(|x| x / h)).to_sigma();
    [c.sigma_plus, c.sigma_minus]
}

/// Writes every artifact of a run into `dir` and returns the file paths.
///
/// * `trajectory.jsonl`: Hubble-gauge samples.
/// * `report.json`: [`RunReport`].
/// * `fn_table.csv`: `N, F, F_over_N`.
/// * `scores.csv`: `tau, t_h, kasner_score, milne_score` per sample.
/// * `volume.csv`: `log_t_h, log_dvol` per sample, plus `volume_slopes.csv`.
/// * `orbit.csv`: `tau, sigma_plus, sigma_minus` per sample.
/// * `wh.csv`: Wainwright-Hsu states, for integrated runs.
pub fn write_artifacts(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    let traj = &out.hubble;
    let t0 = traj.t0();

    write_with(dir, "trajectory.jsonl", &mut written, |w| {
        Ok(write_jsonl(traj, w)?)
    })?;
    write_with(dir, "report.json", &mut written, |w| {
        serde_json::to_writer_pretty(&mut *w, &out.report)?;
        writeln!(w).map_err(io_at(dir, "report.json"))
    })?;
    write_with(dir, "fn_table.csv", &mut written, |w| {
        Ok(out.report.regime.write_fn_csv(w)?)
    })?;
    write_with(dir, "scores.csv", &mut written, |w| {
        let err = io_at(dir, "scores.csv");
        writeln!(w, "tau,t_h,kasner_score,milne_score").map_err(&err)?;
        for s in traj.samples().iter().rev() {
            writeln!(
                w,
                "{},{},{},{}",
                (t0 / s.t).ln(),
                s.t,
                kasner_score(s),
                milne_score(s)
            )
            .map_err(&err)?;
        }
        Ok(())
    })?;
    write_with(dir, "volume.csv", &mut written, |w| {
        let err = io_at(dir, "volume.csv");
        writeln!(w, "log_t_h,log_dvol").map_err(&err)?;
        for s in traj.samples() {
            writeln!(w, "{},{}", s.t.ln(), s.metric.log_dvol()).map_err(&err)?;
        }
        Ok(())
    })?;
    write_with(dir, "volume_slopes.csv", &mut written, |w| {
        let err = io_at(dir, "volume_slopes.csv");
        writeln!(w, "log10_t_h,slope,samples").map_err(&err)?;
        for p in &out.report.regime.volume_exponent {
            writeln!(w, "{},{},{}", p.log10_t, p.slope, p.samples).map_err(&err)?;
        }
        Ok(())
    })?;
    write_with(dir, "orbit.csv", &mut written, |w| {
        let err = io_at(dir, "orbit.csv");
        writeln!(w, "tau,sigma_plus,sigma_minus").map_err(&err)?;
        for s in traj.samples().iter().rev() {
            let [sp, sm] = sigma_of(s);
            writeln!(w, "{},{},{}", (t0 / s.t).ln(), sp, sm).map_err(&err)?;
        }
        Ok(())
    })?;
    if let Some(states) = &out.wh_states {
        write_with(dir, "wh.csv", &mut written, |w| {
            Ok(write_wh_csv(states, w)?)
        })?;
    }
    Ok(written)
}

/// [`execute`] followed by [`write_artifacts`].
pub fn run(scenario: &Scenario, dir: &Path) -> Result<RunReport> {
    let out = execute(scenario)?;
    write_artifacts(&out, dir)?;
    Ok(out.report)
}
