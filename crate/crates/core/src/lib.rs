//! Numerical laboratory for vacuum constant-mean-curvature Einstein flows
//! near crushing singularities.
//!
//! * [`flow`]: slices, trajectories, constraints, rescaling, monotone densities
//!   and the curvature norm `|Rm|_T`.
//! * [`bianchi`]: Wainwright-Hsu dynamics of vacuum Bianchi class A, the
//!   Kasner circle and map, heteroclinic cycles.
//! * [`exact`]: closed-form and symmetric example families.
//! * [`regime`]: Milne/Kasner closeness scores, epoch statistics and volume
//!   exponents.

pub mod bianchi;
pub mod error;
pub mod exact;
pub mod flow;
pub mod regime;

pub use error::{Error, Result};
