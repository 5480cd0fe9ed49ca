//! Curvature of homogeneous slices and the spacetime curvature norm `|Rm|_T`.
//!
//! All quantities are expressed in the orthonormal frame `e_i = E_i / sqrt(h_i)`
//! dual to the coframe of the [`FrameMetric`]. For class-A structures the
//! frame brackets are `[e2, e3] = lambda_1 e1` (cyclic) with
//! `lambda_i = n_i h_i / sqrt(h1 h2 h3)`.

use super::types::{FlowSample, FrameMetric, SecondFormRate, Structure};
use crate::error::{Error, Result};

/// Curvature of a homogeneous 3-metric in its orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialCurvature {
    /// Sectional curvatures of the planes `(e2,e3)`, `(e3,e1)`, `(e1,e2)`.
    pub sectional: [f64; 3],
    /// Ricci eigenvalues.
    pub ricci: [f64; 3],
    pub scalar: f64,
    /// Orthonormal-frame structure constants; `None` for the product models,
    /// whose frames are parallel for every admissible second fundamental form.
    pub lambda: Option<[f64; 3]>,
}

/// Orthonormal-frame structure constants of a class-A frame metric.
pub fn frame_structure_constants(pattern: [i8; 3], h: [f64; 3]) -> [f64; 3] {
    // In logs: near the singularity h1 h2 h3 leaves the f64 range long before the lambdas do.
    let log_root_det = 0.5 * (h[0].ln() + h[1].ln() + h[2].ln());
    let lambda = |i: usize| pattern[i] as f64 * (h[i].ln() - log_root_det).exp();
    [lambda(0), lambda(1), lambda(2)]
}

/// Ricci eigenvalues of a unimodular Lie group from its frame structure constants.
pub fn class_a_ricci(lambda: [f64; 3]) -> [f64; 3] {
    let half_sum = 0.5 * (lambda[0] + lambda[1] + lambda[2]);
    let mu = [
        half_sum - lambda[0],
        half_sum - lambda[1],
        half_sum - lambda[2],
    ];
    [
        2.0 * mu[1] * mu[2],
        2.0 * mu[2] * mu[0],
        2.0 * mu[0] * mu[1],
    ]
}

/// `R = -1/2 (l1^2 + l2^2 + l3^2) + (l1 l2 + l2 l3 + l3 l1)`.
pub fn class_a_scalar(lambda: [f64; 3]) -> f64 {
    let [a, b, c] = lambda;
    -0.5 * (a * a + b * b + c * c) + (a * b + b * c + c * a)
}

pub fn spatial_curvature(h: &FrameMetric) -> SpatialCurvature {
    let d = h.diag();
    match h.structure() {
        Structure::ClassA(pattern) => {
            let lambda = frame_structure_constants(pattern, d);
            let ricci = class_a_ricci(lambda);
            let scalar = class_a_scalar(lambda);
            // In three dimensions the sectional curvature of the plane
            // orthogonal to e_i is R/2 - Ric(e_i).
            let sectional = [
                0.5 * scalar - ricci[0],
                0.5 * scalar - ricci[1],
                0.5 * scalar - ricci[2],
            ];
            SpatialCurvature {
                sectional,
                ricci,
                scalar,
                lambda: Some(lambda),
            }
        }
        Structure::Hyperbolic => {
            let k = -1.0 / d[0];
            SpatialCurvature {
                sectional: [k; 3],
                ricci: [2.0 * k; 3],
                scalar: 6.0 * k,
                lambda: None,
            }
        }
        Structure::HyperbolicPlaneTimesLine => {
            let k = -1.0 / d[0];
            SpatialCurvature {
                sectional: [0.0, 0.0, k],
                ricci: [k, k, 0.0],
                scalar: 2.0 * k,
                lambda: None,
            }
        }
        Structure::LineTimesSphere => {
            let k = 1.0 / d[1];
            SpatialCurvature {
                sectional: [k, 0.0, 0.0],
                ricci: [0.0, k, k],
                scalar: 2.0 * k,
                lambda: None,
            }
        }
    }
}

/// Scalar curvature of the slice metric.
pub fn spatial_scalar_curvature(h: &FrameMetric) -> f64 {
    spatial_curvature(h).scalar
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Connection coefficients `Gamma_ijk = <nabla_{e_i} e_j, e_k>` from the Koszul formula.
pub fn frame_connection(lambda: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
    let c = |i: usize, j: usize, k: usize| levi_civita(i, j, k) * lambda[k];
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for (i, gi) in gamma.iter_mut().enumerate() {
        for (j, gij) in gi.iter_mut().enumerate() {
            for (k, g) in gij.iter_mut().enumerate() {
                *g = 0.5 * (c(i, j, k) - c(j, k, i) + c(k, i, j));
            }
        }
    }
    gamma
}

/// Codazzi tensor `C_ijk = (nabla_j K)_ik - (nabla_k K)_ij` for a diagonal,
/// left-invariant `K` with frame eigenvalues `k`.
pub fn codazzi_tensor(lambda: [f64; 3], k: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
    let gamma = frame_connection(lambda);
    let nabla = |j: usize, i: usize, l: usize| -gamma[j][i][l] * k[l] - gamma[j][l][i] * k[i];
    let mut out = [[[0.0; 3]; 3]; 3];
    for (i, oi) in out.iter_mut().enumerate() {
        for (j, oij) in oi.iter_mut().enumerate() {
            for (l, o) in oij.iter_mut().enumerate() {
                *o = nabla(j, i, l) - nabla(l, i, j);
            }
        }
    }
    out
}

/// Frame components of `K` in the orthonormal frame (all homogeneous data here is diagonal).
fn frame_second_form(sample: &FlowSample) -> [f64; 3] {
    sample.second_form.eigenvalues(&sample.metric)
}

/// `dK/dt` from the vacuum evolution equation with spatially constant lapse:
/// `dK_ij/dt = L H K_ij - 2 L K_ik K^k_j + L R_ij`.
pub fn second_form_rate(sample: &FlowSample) -> SecondFormRate {
    let h = sample.metric.diag();
    let kk = sample.second_form.diag;
    let mean = sample.mean_curvature();
    let ricci = spatial_curvature(&sample.metric).ricci;
    let l = sample.lapse;
    let mut diag = [0.0; 3];
    for i in 0..3 {
        diag[i] = l * (mean * kk[i] - 2.0 * kk[i] * kk[i] / h[i] + ricci[i] * h[i]);
    }
    SecondFormRate {
        diag,
        gauge: sample.gauge,
    }
}

/// Orthonormal-frame pieces of the spacetime Riemann tensor of a diagonal
/// homogeneous slice: spatial planes, Codazzi (one normal index) and
/// electric (two normal indices) parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannParts {
    /// `R_ijij` of the spacetime for the planes `(2,3)`, `(3,1)`, `(1,2)`.
    pub spatial: [f64; 3],
    pub codazzi: [[[f64; 3]; 3]; 3],
    /// `R_0i0i`.
    pub electric: [f64; 3],
}

impl RiemannParts {
    /// Assembles the Gauss and Codazzi parts from the slice data; the electric
    /// part is supplied by the caller.
    pub fn assemble(curv: &SpatialCurvature, k: [f64; 3], electric: [f64; 3]) -> Self {
        let spatial = [
            curv.sectional[0] + k[1] * k[2],
            curv.sectional[1] + k[2] * k[0],
            curv.sectional[2] + k[0] * k[1],
        ];
        let codazzi = match curv.lambda {
            Some(lambda) => codazzi_tensor(lambda, k),
            None => [[[0.0; 3]; 3]; 3],
        };
        RiemannParts {
            spatial,
            codazzi,
            electric,
        }
    }

    /// Electric part implied by Ricci-flatness: `R_0i0i = Ric_ii + H k_i - k_i^2`.
    pub fn vacuum_electric(curv: &SpatialCurvature, k: [f64; 3]) -> [f64; 3] {
        let mean: f64 = k.iter().sum();
        [
            curv.ricci[0] + mean * k[0] - k[0] * k[0],
            curv.ricci[1] + mean * k[1] - k[1] * k[1],
            curv.ricci[2] + mean * k[2] - k[2] * k[2],
        ]
    }

    /// Sum of squares of all orthonormal components `R_abcd`, `a..d = 0..3`.
    pub fn norm_sq(&self) -> f64 {
        let spatial: f64 = self.spatial.iter().map(|r| r * r).sum();
        let codazzi: f64 = self.codazzi.iter().flatten().flatten().map(|c| c * c).sum();
        let electric: f64 = self.electric.iter().map(|e| e * e).sum();
        4.0 * (spatial + codazzi + electric)
    }

    /// `sqrt(norm_sq)`, scaled by the largest component so that it stays
    /// finite whenever the components are (they reach ~1e257 on deep runs).
    pub fn norm(&self) -> f64 {
        let all = || {
            self.spatial
                .iter()
                .chain(self.codazzi.iter().flatten().flatten())
                .chain(&self.electric)
        };
        let big = all().fold(0.0, |m: f64, x| m.max(x.abs()));
        if big == 0.0 || !big.is_finite() {
            return big;
        }
        let scaled = RiemannParts {
            spatial: self.spatial.map(|x| x / big),
            codazzi: self.codazzi.map(|a| a.map(|b| b.map(|x| x / big))),
            electric: self.electric.map(|x| x / big),
        };
        big * scaled.norm_sq().sqrt()
    }
}

/// `|Rm|_T` of the spacetime at a slice, with the electric part taken from
/// the supplied rate `dK/dt` (rearranged evolution equation).
pub fn curvature_norm_t(sample: &FlowSample, k_dot: &SecondFormRate) -> Result<f64> {
    if k_dot.gauge != sample.gauge {
        return Err(Error::GaugeMismatch {
            expected: sample.gauge.name(),
            found: k_dot.gauge.name(),
        });
    }
    let h = sample.metric.diag();
    let k = frame_second_form(sample);
    let curv = spatial_curvature(&sample.metric);
    let mut electric = [0.0; 3];
    for i in 0..3 {
        electric[i] = k_dot.diag[i] / (sample.lapse * h[i]) + k[i] * k[i];
    }
    let norm = RiemannParts::assemble(&curv, k, electric).norm();
    if !norm.is_finite() {
        return Err(Error::NonFinite("curvature norm"));
    }
    Ok(norm)
}

/// `|Rm|_T` with `dK/dt` taken from the vacuum evolution equation.
pub fn vacuum_curvature_norm(sample: &FlowSample) -> Result<f64> {
    curvature_norm_t(sample, &second_form_rate(sample))
}
