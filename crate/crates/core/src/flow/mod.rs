//! CMC Einstein flow data model and gauge-independent diagnostics.

mod curvature;
mod diagnostics;
pub mod jsonl;
mod types;

pub use curvature::{
    class_a_ricci, class_a_scalar, codazzi_tensor, curvature_norm_t, frame_connection,
    frame_structure_constants, second_form_rate, spatial_curvature, spatial_scalar_curvature,
    vacuum_curvature_norm, RiemannParts, SpatialCurvature,
};
pub use diagnostics::{
    constraint_residual, constraint_scale, hubble_lapse_homogeneous, hubble_reindex,
    monotone_densities, rescale_flow, rescale_window, sample_constraint_residual,
    second_form_norm_sq, trace_split, DensityRow, MonotoneDensities, TraceSplit,
};
pub use types::{
    FlowSample, FrameMetric, Gauge, SecondForm, SecondFormRate, Structure, Trajectory, DIM,
    HUBBLE_GAUGE_TOL,
};

/// Scale-invariant scalars of a Hubble-gauge sample: `(L, t^2 R, t^2 |K|^2, t^2 |K0|^2)`.
pub fn scale_invariants(s: &FlowSample) -> [f64; 4] {
    let t2 = s.t * s.t;
    let r = spatial_scalar_curvature(&s.metric);
    let split = trace_split(&s.second_form, &s.metric);
    [
        s.lapse,
        t2 * r,
        t2 * second_form_norm_sq(&s.second_form, &s.metric),
        t2 * split.traceless_norm_sq,
    ]
}
