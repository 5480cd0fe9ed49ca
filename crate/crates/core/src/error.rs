use thiserror::Error;

use crate::bianchi::WHState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid structure for this geometry: {0}")]
    InvalidStructure(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("gauge breakdown: n^2 + t^2 R = {value} <= 0")]
    GaugeBreakdown { value: f64 },

    #[error("gauge mismatch: expected {expected}, found {found}")]
    GaugeMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("operation requires {required} gauge, trajectory is in {found} gauge")]
    WrongGauge {
        required: &'static str,
        found: &'static str,
    },

    #[error("sample times are not strictly monotone at index {index}")]
    NonMonotoneTime { index: usize },

    #[error("empty trajectory: {0}")]
    EmptyTrajectory(String),

    #[error("Hubble-gauge sample violates H = -n/t: H = {h}, -n/t = {expected}")]
    HubbleGauge { h: f64, expected: f64 },

    #[error("mean curvature is not strictly negative and monotone: {0}")]
    NonMonotoneMeanCurvature(String),

    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("constraint violated: residual {residual:e} exceeds {tol:e}")]
    ConstraintViolation { residual: f64, tol: f64 },

    #[error("step size underflow at tau = {tau} (step {step:e})")]
    StepUnderflow {
        step: f64,
        tau: f64,
        last: Box<WHState>,
    },

    #[error("constraint drift {drift:e} exceeds hard cap {cap:e} at tau = {tau}")]
    ConstraintDrift {
        drift: f64,
        cap: f64,
        tau: f64,
        last: Box<WHState>,
    },

    #[error("N sign pattern changed along the trajectory at index {index}")]
    SignPatternChanged { index: usize },

    #[error("Kasner map is undefined at the Taub point {0:?}")]
    TaubPoint([f64; 2]),

    #[error("point ({0}, {1}) is not on the Kasner circle")]
    OffCircle(f64, f64),

    #[error("invalid periodic orbit: {0}")]
    InvalidOrbit(String),

    #[error("invalid Kasner exponents: {0}")]
    InvalidExponents(String),

    #[error("time {t} outside the family domain {domain}")]
    OutOfDomain { t: f64, domain: String },

    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
