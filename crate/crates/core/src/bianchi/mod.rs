//! Vacuum Bianchi class A in Wainwright-Hsu variables: the dynamical system,
//! its integration toward the singularity, reconstruction of the physical
//! flow, the Kasner map and heteroclinic cycles.

mod cycle;
mod integrate;
mod kasner;
mod reconstruct;
mod state;

pub use cycle::{
    build_heteroclinic_cycle, kasner_visits, ordered_revolutions, BianchiIIArc, HeteroclinicCycle,
    Visit,
};
pub use integrate::{integrate_wh, IntegrateOptions};
pub use kasner::{
    active_index, circle_to_u, find_periodic_orbit, find_periodic_orbits, golden_cycle, golden_u,
    kasner_map_step, sigma_to_exponents, taub_points, transition_tip, u_map, u_to_circle,
    CirclePoint, KasnerExponents, CIRCLE_TOL, TAUB_TOL,
};
pub use reconstruct::{
    common_sign_pattern, reconstruct_flow, reconstruct_hubble, wh_embed, write_wh_csv, EMBED_TOL,
    WH_CSV_HEADER,
};
pub use state::{
    check_constraint, constraint_rate, wh_curvature_norm, wh_growth_coefficients, wh_growth_sign,
    wh_rhs, wh_scalar_curvature, WHRate, WHState,
};
