use serde::Serialize;

use super::kasner::{active_index, kasner_map_step, transition_tip, CirclePoint, CIRCLE_TOL};
use super::state::WHState;
use crate::error::{Error, Result};

/// A Bianchi II orbit with a single active `N_i`: the chord from `from`
/// (its `tau -> +inf` limit) to `to` (its `tau -> -inf` limit) on the line
/// through the transition tip of axis `active`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BianchiIIArc {
    pub from: CirclePoint,
    pub to: CirclePoint,
    pub active: usize,
}

impl BianchiIIArc {
    /// Point on the arc at chord parameter `s in (0, 1)` with `N_active` of
    /// sign `sign`, fixed by the constraint.
    pub fn point(&self, s: f64, sign: f64, log_theta: f64, tau: f64) -> WHState {
        let sp = self.from.sigma_plus + s * (self.to.sigma_plus - self.from.sigma_plus);
        let sm = self.from.sigma_minus + s * (self.to.sigma_minus - self.from.sigma_minus);
        let mut n = [0.0; 3];
        n[self.active] = sign.signum() * ((4.0 / 3.0) * (1.0 - sp * sp - sm * sm)).max(0.0).sqrt();
        WHState::new(sp, sm, n, log_theta, tau)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeteroclinicCycle {
    pub kasner_points: Vec<CirclePoint>,
    pub arcs: Vec<BianchiIIArc>,
}

/// Chains the Bianchi II orbits joining consecutive points of a Kasner-map cycle.
pub fn build_heteroclinic_cycle(orbit: &[CirclePoint]) -> Result<HeteroclinicCycle> {
    if orbit.len() < 2 {
        return Err(Error::InvalidOrbit(format!(
            "needs at least 2 points, got {}",
            orbit.len()
        )));
    }
    let mut arcs = Vec::with_capacity(orbit.len());
    for (k, p) in orbit.iter().enumerate() {
        if !p.on_circle(CIRCLE_TOL) {
            return Err(Error::InvalidOrbit(format!(
                "point {k} is off the Kasner circle"
            )));
        }
        let next = orbit[(k + 1) % orbit.len()];
        let image =
            kasner_map_step(p).map_err(|e| Error::InvalidOrbit(format!("point {k}: {e}")))?;
        let mismatch = image.distance(&next);
        if mismatch > 1e-8 {
            return Err(Error::InvalidOrbit(format!(
                "Kasner map of point {k} misses point {} by {mismatch:e}",
                (k + 1) % orbit.len()
            )));
        }
        let active = active_index(p)?;
        // The chord must pass through the transition tip.
        let tip = transition_tip(active);
        let cross = (p.sigma_plus - tip.sigma_plus) * (next.sigma_minus - tip.sigma_minus)
            - (p.sigma_minus - tip.sigma_minus) * (next.sigma_plus - tip.sigma_plus);
        if cross.abs() > 1e-7 {
            return Err(Error::InvalidOrbit(format!(
                "arc {k} does not pass through its tip"
            )));
        }
        arcs.push(BianchiIIArc {
            from: *p,
            to: next,
            active,
        });
    }
    Ok(HeteroclinicCycle {
        kasner_points: orbit.to_vec(),
        arcs,
    })
}

impl HeteroclinicCycle {
    /// Start for a shadowing run: midpoint of the first arc, inactive
    /// `N_i = signs_i * offset`, active `N` re-solved from the constraint.
    pub fn shadowing_start(&self, offset: f64, signs: [i8; 3]) -> Result<WHState> {
        let arc = self.arcs[0];
        let base = arc.point(0.5, signs[arc.active] as f64, 0.0, 0.0);
        let a = arc.active;
        let (j, k) = ((a + 1) % 3, (a + 2) % 3);
        let nj = signs[j] as f64 * offset;
        let nk = signs[k] as f64 * offset;
        // N_a^2 - 2 (N_j + N_k) N_a + (N_j - N_k)^2 + (4/3)(Sigma^2 - 1) = 0.
        let s = nj + nk;
        let d = (nj - nk).powi(2) + (4.0 / 3.0) * (base.sigma_sq() - 1.0);
        let disc = s * s - d;
        if !(disc >= 0.0) || signs[a] == 0 {
            return Err(Error::InvalidArgument(format!(
                "no constrained shadowing start for offset {offset} and signs {signs:?}"
            )));
        }
        let target = base.n()[a];
        let roots = [s + disc.sqrt(), s - disc.sqrt()];
        let na = if (roots[0] - target).abs() <= (roots[1] - target).abs() {
            roots[0]
        } else {
            roots[1]
        };
        let mut n = [0.0; 3];
        n[a] = na;
        n[j] = nj;
        n[k] = nk;
        Ok(WHState::new(base.sigma_plus, base.sigma_minus, n, 0.0, 0.0))
    }
}

/// A passage of a trajectory close to one of the cycle's Kasner points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Visit {
    /// Index into the list of Kasner points.
    pub point: usize,
    pub tau: f64,
    /// Closest distance in `(Sigma, N)`.
    pub distance: f64,
}

/// Successive passages within `radius` of the `points`, in trajectory order.
pub fn kasner_visits(states: &[WHState], points: &[CirclePoint], radius: f64) -> Vec<Visit> {
    let mut visits = Vec::new();
    let mut current: Option<Visit> = None;
    for s in states {
        let nearest = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, s.distance_to_kasner(p.sigma_plus, p.sigma_minus)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let Some((i, d)) = nearest else { break };
        match current {
            Some(mut v) if v.point == i && d <= radius => {
                if d < v.distance {
                    v.distance = d;
                    v.tau = s.tau;
                }
                current = Some(v);
            }
            _ => {
                if let Some(v) = current.take() {
                    visits.push(v);
                }
                if d <= radius {
                    current = Some(Visit {
                        point: i,
                        tau: s.tau,
                        distance: d,
                    });
                }
            }
        }
    }
    visits.extend(current);
    visits
}

/// Number of complete revolutions in which the visits follow the cycle order
/// `0, 1, ..., len-1` (starting anywhere), counted along the visit list.
pub fn ordered_revolutions(visits: &[Visit], cycle_len: usize) -> usize {
    if visits.is_empty() || cycle_len == 0 {
        return 0;
    }
    let mut in_order = 1usize;
    for w in visits.windows(2) {
        if w[1].point != (w[0].point + 1) % cycle_len {
            break;
        }
        in_order += 1;
    }
    in_order / cycle_len
}
