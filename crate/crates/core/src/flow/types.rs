use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial dimension of every frame-based flow.
pub const DIM: usize = 3;

/// Relative tolerance for the Hubble-gauge identity `H = -n/t`.
pub const HUBBLE_GAUGE_TOL: f64 = 1e-9;

/// Homogeneous spatial geometry carried by a [`FrameMetric`].
///
/// `ClassA` holds the sign pattern `(n1, n2, n3)` of the class-A structure
/// constants `[e2, e3] = n1 e1` (cyclic) of a left-invariant coframe. The
/// remaining variants are locally products of constant-curvature factors,
/// needed by the cone, cone-times-torus and Kantowski-Sachs families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StructureRepr", into = "StructureRepr")]
pub enum Structure {
    ClassA([i8; 3]),
    /// Hyperbolic space with sectional curvature -1 in the coframe metric.
    Hyperbolic,
    /// Hyperbolic plane on axes 1 and 2, flat axis 3.
    HyperbolicPlaneTimesLine,
    /// Flat axis 1, unit round sphere on axes 2 and 3.
    LineTimesSphere,
}

impl Structure {
    pub const BIANCHI_I: Structure = Structure::ClassA([0, 0, 0]);
    pub const BIANCHI_II: Structure = Structure::ClassA([1, 0, 0]);
    pub const BIANCHI_VIII: Structure = Structure::ClassA([-1, 1, 1]);
    pub const BIANCHI_IX: Structure = Structure::ClassA([1, 1, 1]);

    pub fn class_a(pattern: [i8; 3]) -> Result<Self> {
        if pattern.iter().any(|n| !(-1..=1).contains(n)) {
            return Err(Error::InvalidStructure(format!(
                "structure signs must lie in {{-1, 0, 1}}, got {pattern:?}"
            )));
        }
        // Types I, II, VIII and IX; the two-nonzero patterns (VI0, VII0) are not modelled.
        let nonzero = pattern.iter().filter(|&&n| n != 0).count();
        if nonzero == 2 {
            return Err(Error::InvalidStructure(format!(
                "pattern {pattern:?} (Bianchi VI0/VII0) is not supported"
            )));
        }
        Ok(Structure::ClassA(pattern))
    }

    pub fn pattern(&self) -> Option<[i8; 3]> {
        match self {
            Structure::ClassA(p) => Some(*p),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StructureRepr {
    Pattern([i8; 3]),
    Named(NamedGeometry),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum NamedGeometry {
    Hyperbolic,
    HyperbolicPlaneTimesLine,
    LineTimesSphere,
}

impl TryFrom<StructureRepr> for Structure {
    type Error = Error;

    fn try_from(repr: StructureRepr) -> Result<Self> {
        match repr {
            StructureRepr::Pattern(p) => Structure::class_a(p),
            StructureRepr::Named(NamedGeometry::Hyperbolic) => Ok(Structure::Hyperbolic),
            StructureRepr::Named(NamedGeometry::HyperbolicPlaneTimesLine) => {
                Ok(Structure::HyperbolicPlaneTimesLine)
            }
            StructureRepr::Named(NamedGeometry::LineTimesSphere) => Ok(Structure::LineTimesSphere),
        }
    }
}

impl From<Structure> for StructureRepr {
    fn from(s: Structure) -> Self {
        match s {
            Structure::ClassA(p) => StructureRepr::Pattern(p),
            Structure::Hyperbolic => StructureRepr::Named(NamedGeometry::Hyperbolic),
            Structure::HyperbolicPlaneTimesLine => {
                StructureRepr::Named(NamedGeometry::HyperbolicPlaneTimesLine)
            }
            Structure::LineTimesSphere => StructureRepr::Named(NamedGeometry::LineTimesSphere),
        }
    }
}

/// Diagonal spatial metric `h = sum h_i sigma^i (x) sigma^i` in a fixed coframe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMetric {
    diag: [f64; 3],
    structure: Structure,
}

impl FrameMetric {
    pub fn new(diag: [f64; 3], structure: Structure) -> Result<Self> {
        if let Some(bad) = diag.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::InvalidMetric(format!(
                "metric coefficients must be positive and finite, got {bad} in {diag:?}"
            )));
        }
        let equal = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.max(b);
        let ok = match structure {
            Structure::ClassA(_) => true,
            Structure::Hyperbolic => equal(diag[0], diag[1]) && equal(diag[1], diag[2]),
            Structure::HyperbolicPlaneTimesLine => equal(diag[0], diag[1]),
            Structure::LineTimesSphere => equal(diag[1], diag[2]),
        };
        if !ok {
            return Err(Error::InvalidMetric(format!(
                "coefficients {diag:?} are not compatible with {structure:?}"
            )));
        }
        Ok(FrameMetric { diag, structure })
    }

    pub fn diag(&self) -> [f64; 3] {
        self.diag
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    /// Volume density `sqrt(h1 h2 h3)` relative to the coframe.
    pub fn dvol(&self) -> f64 {
        (self.diag[0] * self.diag[1] * self.diag[2]).sqrt()
    }

    pub fn log_dvol(&self) -> f64 {
        0.5 * self.diag.iter().map(|h| h.ln()).sum::<f64>()
    }
}

/// Diagonal second fundamental form `K = sum K_i sigma^i (x) sigma^i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondForm {
    pub diag: [f64; 3],
}

impl SecondForm {
    pub fn new(diag: [f64; 3]) -> Result<Self> {
        if diag.iter().any(|k| !k.is_finite()) {
            return Err(Error::NonFinite("second fundamental form"));
        }
        Ok(SecondForm { diag })
    }

    /// Mixed components `K^i_i = K_i / h_i` (the eigenvalues of the shape operator).
    pub fn eigenvalues(&self, h: &FrameMetric) -> [f64; 3] {
        let d = h.diag();
        [
            self.diag[0] / d[0],
            self.diag[1] / d[1],
            self.diag[2] / d[2],
        ]
    }
}

/// Time derivative of the coframe components of `K`, tagged with the gauge
/// whose time coordinate it differentiates along.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondFormRate {
    pub diag: [f64; 3],
    pub gauge: Gauge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// Time is proper time along the normal geodesics (`L = 1`).
    #[serde(rename = "proper")]
    ProperTime,
    /// Time is the Hubble time `t = -n/H`.
    #[serde(rename = "hubble")]
    HubbleTime,
    /// Time is the dimensionless Wainwright-Hsu time; `L = 3/theta`.
    #[serde(rename = "wh")]
    WHTime,
}

impl Gauge {
    pub fn name(&self) -> &'static str {
        match self {
            Gauge::ProperTime => "proper",
            Gauge::HubbleTime => "hubble",
            Gauge::WHTime => "wh",
        }
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One CMC slice of a homogeneous Einstein flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleRepr", into = "SampleRepr")]
pub struct FlowSample {
    pub lapse: f64,
    pub metric: FrameMetric,
    pub second_form: SecondForm,
    pub t: f64,
    pub gauge: Gauge,
}

impl FlowSample {
    pub fn new(
        gauge: Gauge,
        t: f64,
        lapse: f64,
        metric: FrameMetric,
        second_form: SecondForm,
    ) -> Result<Self> {
        if !(lapse.is_finite() && lapse > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lapse must be positive, got {lapse}"
            )));
        }
        if !t.is_finite() {
            return Err(Error::NonFinite("sample time"));
        }
        let sample = FlowSample {
            lapse,
            metric,
            second_form,
            t,
            gauge,
        };
        if gauge == Gauge::HubbleTime {
            if t <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "Hubble time must be positive, got {t}"
                )));
            }
            let h = sample.mean_curvature();
            let expected = -(DIM as f64) / t;
            if (h - expected).abs() > HUBBLE_GAUGE_TOL * expected.abs() {
                return Err(Error::HubbleGauge { h, expected });
            }
        }
        Ok(sample)
    }

    /// Mean curvature `H = h^{ij} K_ij`.
    pub fn mean_curvature(&self) -> f64 {
        self.second_form.eigenvalues(&self.metric).iter().sum()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRepr {
    gauge: Gauge,
    t: f64,
    #[serde(rename = "L")]
    lapse: f64,
    h: [f64; 3],
    #[serde(rename = "K")]
    k: [f64; 3],
    structure: Structure,
}

impl TryFrom<SampleRepr> for FlowSample {
    type Error = Error;

    fn try_from(r: SampleRepr) -> Result<Self> {
        FlowSample::new(
            r.gauge,
            r.t,
            r.lapse,
            FrameMetric::new(r.h, r.structure)?,
            SecondForm::new(r.k)?,
        )
    }
}

impl From<FlowSample> for SampleRepr {
    fn from(s: FlowSample) -> Self {
        SampleRepr {
            gauge: s.gauge,
            t: s.t,
            lapse: s.lapse,
            h: s.metric.diag(),
            k: s.second_form.diag,
            structure: s.metric.structure(),
        }
    }
}

/// Time-ordered flow samples in a single gauge.
///
/// Samples are stored in increasing time. `t0` is the anchor time used to
/// normalize densities and to define logarithmic time `tau = ln(t0/t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<FlowSample>,
    t0: f64,
    gauge: Gauge,
}

impl Trajectory {
    /// Builds a trajectory anchored at its latest sample.
    pub fn new(samples: Vec<FlowSample>) -> Result<Self> {
        let t0 = samples
            .iter()
            .map(|s| s.t)
            .fold(f64::NEG_INFINITY, f64::max);
        Self::with_anchor(samples, t0)
    }

    pub fn with_anchor(mut samples: Vec<FlowSample>, t0: f64) -> Result<Self> {
        let Some(first) = samples.first() else {
            return Err(Error::EmptyTrajectory("no samples".into()));
        };
        let gauge = first.gauge;
        if let Some(bad) = samples.iter().find(|s| s.gauge != gauge) {
            return Err(Error::GaugeMismatch {
                expected: gauge.name(),
                found: bad.gauge.name(),
            });
        }
        if samples.len() > 1 && samples[1].t < samples[0].t {
            samples.reverse();
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::NonMonotoneTime { index: i + 1 });
        }
        if !t0.is_finite() {
            return Err(Error::NonFinite("anchor time"));
        }
        Ok(Trajectory { samples, t0, gauge })
    }

    pub fn samples(&self) -> &[FlowSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<FlowSample> {
        self.samples
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn n(&self) -> usize {
        DIM
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    pub(crate) fn require_gauge(&self, gauge: Gauge) -> Result<()> {
        if self.gauge != gauge {
            return Err(Error::WrongGauge {
                required: gauge.name(),
                found: self.gauge.name(),
            });
        }
        Ok(())
    }
}
