//! Kasner circle, Kasner exponents and the Kasner map.
//!
//! The map sends the Kasner state before a Bianchi II transition to the one
//! after it, in the direction of the singularity (`tau` decreasing). In the
//! u-parametrization with exponents ordered `p_a < p_b < p_c`,
//! `p_a = -u/(1+u+u^2)`, `p_b = (1+u)/(1+u+u^2)`, `p_c = u(1+u)/(1+u+u^2)`,
//! and `u >= 1`.

use std::f64::consts::PI;

use serde::Serialize;

use super::state::{exponents_of, SQRT3};
use crate::error::{Error, Result};

/// Distance to a Taub point below which the Kasner map is treated as undefined.
pub const TAUB_TOL: f64 = 1e-12;
/// Accepted deviation of `Sigma_+^2 + Sigma_-^2` from 1.
pub const CIRCLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KasnerExponents {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl KasnerExponents {
    pub fn as_array(&self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    pub fn from_array(p: [f64; 3]) -> Self {
        KasnerExponents {
            p1: p[0],
            p2: p[1],
            p3: p[2],
        }
    }

    /// Exponents that satisfy both Kasner identities within `1e-12`.
    pub fn checked(p: [f64; 3]) -> Result<Self> {
        let e = KasnerExponents::from_array(p);
        if p.iter().any(|x| !x.is_finite())
            || e.sum_residual().abs() > 1e-12
            || e.square_residual().abs() > 1e-12
        {
            return Err(Error::InvalidExponents(format!(
                "{p:?} violates p1+p2+p3 = p1^2+p2^2+p3^2 = 1"
            )));
        }
        Ok(e)
    }

    /// `p1 + p2 + p3 - 1`.
    pub fn sum_residual(&self) -> f64 {
        self.p1 + self.p2 + self.p3 - 1.0
    }

    /// `p1^2 + p2^2 + p3^2 - 1`.
    pub fn square_residual(&self) -> f64 {
        self.p1 * self.p1 + self.p2 * self.p2 + self.p3 * self.p3 - 1.0
    }

    /// Distance (max norm) to the nearest permutation of `target`.
    pub fn distance_to_permutation(&self, target: [f64; 3]) -> f64 {
        let mut a = self.as_array();
        let mut b = target;
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }

    /// Inverse of [`sigma_to_exponents`].
    pub fn to_sigma(&self) -> CirclePoint {
        CirclePoint {
            sigma_plus: (1.0 - 3.0 * self.p1) / 2.0,
            sigma_minus: SQRT3 * (self.p2 - self.p3) / 2.0,
        }
    }
}

/// Exponents of the Kasner solution at `(Sigma_+, Sigma_-)`. The sum is 1
/// everywhere; the sum of squares is 1 only on the circle.
pub fn sigma_to_exponents(sigma_plus: f64, sigma_minus: f64) -> KasnerExponents {
    KasnerExponents::from_array(exponents_of(sigma_plus, sigma_minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CirclePoint {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
}

impl CirclePoint {
    pub fn new(sigma_plus: f64, sigma_minus: f64) -> Self {
        CirclePoint {
            sigma_plus,
            sigma_minus,
        }
    }

    pub fn from_angle(psi: f64) -> Self {
        CirclePoint {
            sigma_plus: psi.cos(),
            sigma_minus: psi.sin(),
        }
    }

    /// Angle in `[0, 2 pi)`.
    pub fn angle(&self) -> f64 {
        self.sigma_minus.atan2(self.sigma_plus).rem_euclid(2.0 * PI)
    }

    pub fn exponents(&self) -> KasnerExponents {
        sigma_to_exponents(self.sigma_plus, self.sigma_minus)
    }

    pub fn distance(&self, other: &CirclePoint) -> f64 {
        (self.sigma_plus - other.sigma_plus).hypot(self.sigma_minus - other.sigma_minus)
    }

    pub fn on_circle(&self, tol: f64) -> bool {
        (self.sigma_plus.hypot(self.sigma_minus) - 1.0).abs() <= tol
    }

    /// The Taub point within [`TAUB_TOL`], if any.
    pub fn taub_point(&self) -> Option<CirclePoint> {
        taub_points()
            .into_iter()
            .find(|t| self.distance(t) <= TAUB_TOL)
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.sigma_plus, self.sigma_minus]
    }
}

/// The three flat Kasner points; entry `i` has `p_i = 1`.
pub fn taub_points() -> [CirclePoint; 3] {
    [
        CirclePoint::new(-1.0, 0.0),
        CirclePoint::new(0.5, 0.5 * SQRT3),
        CirclePoint::new(0.5, -0.5 * SQRT3),
    ]
}

/// `-2` times the Taub point of axis `i`; Bianchi II orbits with `N_i`
/// active are straight lines through it.
pub fn transition_tip(i: usize) -> CirclePoint {
    match i {
        0 => CirclePoint::new(2.0, 0.0),
        1 => CirclePoint::new(-1.0, -SQRT3),
        _ => CirclePoint::new(-1.0, SQRT3),
    }
}

/// u-parameter of a circle point together with the axes `[a, b, c]`
/// ordered by increasing exponent.
pub fn circle_to_u(p: &CirclePoint) -> Result<(f64, [usize; 3])> {
    check_on_circle(p)?;
    if let Some(t) = p.taub_point() {
        return Err(Error::TaubPoint(t.as_array()));
    }
    let e = p.exponents().as_array();
    let mut axes = [0usize, 1, 2];
    axes.sort_by(|&i, &j| e[i].total_cmp(&e[j]));
    let (pb, pc) = (e[axes[1]], e[axes[2]]);
    Ok((pc / pb, axes))
}

/// Circle point with u-parameter `u >= 1` on the ordered axes `[a, b, c]`.
pub fn u_to_circle(u: f64, axes: [usize; 3]) -> CirclePoint {
    let d = 1.0 + u + u * u;
    let mut p = [0.0; 3];
    p[axes[0]] = -u / d;
    p[axes[1]] = (1.0 + u) / d;
    p[axes[2]] = u * (1.0 + u) / d;
    KasnerExponents::from_array(p).to_sigma()
}

/// `u -> u - 1` for `u >= 2`, `u -> 1/(u - 1)` for `1 < u < 2`.
pub fn u_map(u: f64) -> f64 {
    if u >= 2.0 {
        u - 1.0
    } else {
        1.0 / (u - 1.0)
    }
}

fn check_on_circle(p: &CirclePoint) -> Result<()> {
    let r2 = p.sigma_plus * p.sigma_plus + p.sigma_minus * p.sigma_minus;
    if !((r2 - 1.0).abs() <= CIRCLE_TOL) {
        return Err(Error::OffCircle(p.sigma_plus, p.sigma_minus));
    }
    Ok(())
}

/// One Bianchi II transition toward the singularity.
pub fn kasner_map_step(p: &CirclePoint) -> Result<CirclePoint> {
    let (u, [a, b, c]) = circle_to_u(p)?;
    // The axis with negative exponent becomes the largest after the bounce
    // only when the era ends (u < 2).
    let (u_next, axes) = if u >= 2.0 {
        (u - 1.0, [b, a, c])
    } else {
        (1.0 / (u - 1.0), [b, c, a])
    };
    if !u_next.is_finite() {
        let t = u_to_circle(1e300, axes);
        return Ok(t.taub_point().unwrap_or(t));
    }
    Ok(u_to_circle(u_next, axes))
}

/// Index of the axis with negative exponent, i.e. the `N_i` that becomes
/// active in the transition away from `p`.
pub fn active_index(p: &CirclePoint) -> Result<usize> {
    Ok(circle_to_u(p)?.1[0])
}

/// The map on angles, extended continuously to the Taub points.
fn angle_map(psi: f64) -> f64 {
    let p = CirclePoint::from_angle(psi);
    match kasner_map_step(&p) {
        Ok(q) => q.angle(),
        Err(_) => psi.rem_euclid(2.0 * PI),
    }
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

fn iterate_angle(psi: f64, k: usize) -> f64 {
    (0..k).fold(psi, |a, _| angle_map(a))
}

fn is_near_taub(p: &CirclePoint, tol: f64) -> bool {
    taub_points().iter().any(|t| p.distance(t) <= tol)
}

/// All cycles of [`kasner_map_step`] with exact period `period`, each listed in
/// iteration order starting from its point of smallest angle; cycles are
/// ordered by that angle. Empty when no cycle of that period exists.
pub fn find_periodic_orbits(period: usize) -> Result<Vec<Vec<CirclePoint>>> {
    if period < 2 {
        return Err(Error::InvalidArgument(format!(
            "period must be at least 2 (fixed points are Taub points), got {period}"
        )));
    }
    if period > 8 {
        return Err(Error::InvalidArgument(format!(
            "period {period} exceeds the supported maximum 8"
        )));
    }
    let mesh = (400 * 3usize.pow(period as u32)).min(4_000_000);
    let offset = 1e-7 * SQRT3;
    let g = |psi: f64| wrap(iterate_angle(psi, period) - psi);

    let mut roots = Vec::new();
    let mut psi_prev = offset;
    let mut g_prev = g(psi_prev);
    for j in 1..=mesh {
        let psi = offset + 2.0 * PI * j as f64 / mesh as f64;
        let gv = g(psi);
        if g_prev == 0.0 {
            roots.push(psi_prev);
        } else if g_prev * gv < 0.0 && (g_prev - gv).abs() < PI {
            let (mut lo, mut hi, mut glo) = (psi_prev, psi, g_prev);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let gm = g(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if gm * glo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        psi_prev = psi;
        g_prev = gv;
    }

    let mut orbits: Vec<Vec<CirclePoint>> = Vec::new();
    'roots: for psi in roots {
        let x = CirclePoint::from_angle(psi);
        if is_near_taub(&x, 1e-6) {
            continue;
        }
        let mut orbit = vec![x];
        for _ in 1..period {
            match kasner_map_step(orbit.last().expect("non-empty")) {
                Ok(y) => orbit.push(y),
                Err(_) => continue 'roots,
            }
        }
        if orbit.iter().any(|p| is_near_taub(p, 1e-6)) {
            continue;
        }
        // Exclude points of a strictly smaller period.
        for d in 1..period {
            if period % d == 0 && orbit[d].distance(&x) < 1e-7 {
                continue 'roots;
            }
        }
        if orbits
            .iter()
            .any(|o| o.iter().any(|p| p.distance(&x) < 1e-7))
        {
            continue;
        }
        let start = (0..period)
            .min_by(|&i, &j| orbit[i].angle().total_cmp(&orbit[j].angle()))
            .expect("non-empty");
        orbit.rotate_left(start);
        orbits.push(orbit);
    }
    orbits.sort_by(|a, b| a[0].angle().total_cmp(&b[0].angle()));
    Ok(orbits)
}

/// The first cycle of exact period `period` (see [`find_periodic_orbits`]).
pub fn find_periodic_orbit(period: usize) -> Result<Vec<CirclePoint>> {
    Ok(find_periodic_orbits(period)?
        .into_iter()
        .next()
        .unwrap_or_default())
}

/// Golden ratio `(1 + sqrt 5)/2`, the positive root of `u^2 - u - 1`.
pub fn golden_u() -> f64 {
    // Bisection keeps the value independent of the closed form.
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid - mid - 1.0 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The Kasner-map cycle through `u = golden ratio`, a fixed point of
/// [`u_map`]. On the circle the axes rotate with each transition, so the
/// cycle has three distinct points, one per sector pair.
pub fn golden_cycle() -> Vec<CirclePoint> {
    let u = golden_u();
    let start = u_to_circle(u, [2, 1, 0]);
    let mut orbit = vec![start];
    loop {
        let next = kasner_map_step(orbit.last().expect("non-empty"))
            .expect("golden cycle avoids Taub points");
        if next.distance(&start) < 1e-9 || orbit.len() > 16 {
            break;
        }
        orbit.push(next);
    }
    let first = (0..orbit.len())
        .min_by(|&i, &j| orbit[i].angle().total_cmp(&orbit[j].angle()))
        .expect("non-empty");
    orbit.rotate_left(first);
    orbit
}
