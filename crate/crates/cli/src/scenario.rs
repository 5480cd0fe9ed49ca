//! Scenario files: one source of samples plus detector settings.

use std::path::{Path, PathBuf};

use kasner_core::bianchi::{
    build_heteroclinic_cycle, check_constraint, find_periodic_orbits, golden_cycle, CirclePoint,
    HeteroclinicCycle, WHState,
};
use kasner_core::exact::{FamilySpec, TimeGrid};
use kasner_core::regime::DetectorConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Base output directory when neither the scenario nor `KASNER_LAB_OUT` sets one.
pub const DEFAULT_OUT: &str = "kasner-lab-out";

/// Largest constraint residual accepted in `wh` initial data.
pub const INITIAL_CONSTRAINT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub source: Source,
    #[serde(default)]
    pub detector: DetectorConfig,
    /// Base directory; artifacts go to `<output_dir>/<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    /// An example family; closed-form families need `grid`.
    Family {
        family: FamilySpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<TimeGrid>,
    },
    /// Wainwright-Hsu initial data integrated toward the singularity.
    Wh {
        initial: InitialData,
        tau_span: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_step: Option<f64>,
        /// Volume density at `tau = 0`, used only when some `N_i` vanishes.
        #[serde(default = "one")]
        dvol0: f64,
    },
    /// Shadowing run near a heteroclinic cycle of the Kasner map.
    Cycle {
        /// Period of the Kasner-map orbit; omitted for the golden-ratio cycle.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        period: Option<usize>,
        #[serde(default)]
        orbit_index: usize,
        /// Size of the initially inactive `N_i`.
        offset: f64,
        signs: [i8; 3],
        tau_span: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_step: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub n: [f64; 3],
    #[serde(default)]
    pub log_theta: f64,
}

impl InitialData {
    pub fn state(&self) -> WHState {
        WHState::new(
            self.sigma_plus,
            self.sigma_minus,
            self.n,
            self.log_theta,
            0.0,
        )
    }
}

impl Source {
    pub fn kind(&self) -> &'static str {
        match self {
            Source::Family { .. } => "family",
            Source::Wh { .. } => "wh",
            Source::Cycle { .. } => "cycle",
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

impl Scenario {
    /// Parses scenario JSON, reporting schema errors with the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Schema {
                path,
                message: e.into_inner().to_string(),
            }
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Scenario::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
            || self.name.starts_with('.')
        {
            return Err(CliError::Invalid(format!(
                "name `{}` must be non-empty and use only letters, digits, '-', '_' and '.'",
                self.name
            )));
        }
        let d = &self.detector;
        if !(d.eps > 0.0 && d.eps < 1.0) {
            return Err(CliError::Invalid(format!(
                "detector.eps must lie in (0, 1), got {}",
                d.eps
            )));
        }
        positive("detector.slope_tol", d.slope_tol)?;
        positive("detector.beta", d.beta)?;
        positive("detector.volume_window", d.volume_window)?;
        positive("detector.recurrence_gap", d.recurrence_gap)?;
        match &self.source {
            Source::Family { family, grid } => {
                family.validate()?;
                match (family.is_integrated(), grid) {
                    (true, Some(_)) => {
                        return Err(CliError::Invalid(format!(
                            "source.grid: {} takes its span from params.tau_span",
                            family.name()
                        )))
                    }
                    (false, None) => {
                        return Err(CliError::Invalid(format!(
                            "source.grid is required for {}",
                            family.name()
                        )))
                    }
                    (false, Some(g)) => {
                        g.points()?;
                    }
                    (true, None) => {}
                }
            }
            Source::Wh {
                initial,
                tau_span,
                max_step,
                dvol0,
            } => {
                positive("source.tau_span", *tau_span)?;
                positive("source.dvol0", *dvol0)?;
                if let Some(m) = max_step {
                    positive("source.max_step", *m)?;
                }
                let s = initial.state();
                if ![s.sigma_plus, s.sigma_minus, s.log_theta]
                    .iter()
                    .chain(&initial.n)
                    .all(|x| x.is_finite())
                {
                    return Err(CliError::Invalid("source.initial must be finite".into()));
                }
                if check_constraint(&s, INITIAL_CONSTRAINT_TOL).is_err() {
                    return Err(CliError::Invalid(format!(
                        "source.initial is off the constraint surface: residual {:e} (tolerance {INITIAL_CONSTRAINT_TOL:e})",
                        s.constraint_residual()
                    )));
                }
            }
            Source::Cycle {
                offset,
                signs,
                tau_span,
                max_step,
                ..
            } => {
                positive("source.tau_span", *tau_span)?;
                positive("source.offset", *offset)?;
                if let Some(m) = max_step {
                    positive("source.max_step", *m)?;
                }
                if signs.iter().any(|s| !matches!(s, -1 | 1)) {
                    return Err(CliError::Invalid(format!(
                        "source.signs must be +-1, got {signs:?}"
                    )));
                }
                self.cycle()?;
            }
        }
        Ok(())
    }

    /// Heteroclinic cycle of a `cycle` source.
    pub fn cycle(&self) -> Result<Option<HeteroclinicCycle>> {
        let Source::Cycle {
            period,
            orbit_index,
            ..
        } = &self.source
        else {
            return Ok(None);
        };
        let orbit: Vec<CirclePoint> = match period {
            None => golden_cycle(),
            Some(p) => {
                let orbits = find_periodic_orbits(*p)?;
                orbits.get(*orbit_index).cloned().ok_or_else(|| {
                    CliError::Invalid(format!(
                        "source.orbit_index {orbit_index} out of range: period {p} has {} orbits",
                        orbits.len()
                    ))
                })?
            }
        };
        Ok(Some(build_heteroclinic_cycle(&orbit)?))
    }

    /// Artifact directory: `<base>/<name>`, where `base` is `env_out` if set,
    /// else the scenario's `output_dir`, else [`DEFAULT_OUT`].
    pub fn output_dir(&self, env_out: Option<&Path>) -> PathBuf {
        let base = env_out
            .map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        base.join(&self.name)
    }
}
