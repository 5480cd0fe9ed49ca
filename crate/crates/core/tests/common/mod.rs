//! Independent oracles: curvature of explicit metrics in coordinates by
//! finite differences, and small helpers shared by the integration tests.

#![allow(dead_code)]

pub type Mat<const D: usize> = [[f64; D]; D];

const STEP: f64 = 1e-3;

/// Fourth-order central difference of a vector-valued function along `axis`.
fn diff<const D: usize, const M: usize>(
    f: &dyn Fn(&[f64; D]) -> [f64; M],
    x: &[f64; D],
    axis: usize,
) -> [f64; M] {
    let at = |k: f64| {
        let mut y = *x;
        y[axis] += k * STEP;
        f(&y)
    };
    let (p2, p1, m1, m2) = (at(2.0), at(1.0), at(-1.0), at(-2.0));
    let mut out = [0.0; M];
    for i in 0..M {
        out[i] = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * STEP);
    }
    out
}

pub fn invert<const D: usize>(m: &Mat<D>) -> Mat<D> {
    let mut a = *m;
    let mut inv = [[0.0; D]; D];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..D {
        let pivot = (col..D)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..D {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..D {
            if i != col {
                let f = a[i][col];
                for j in 0..D {
                    a[i][j] -= f * a[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

/// Flattened Christoffel symbols `Gamma^a_bc` at index `a*D*D + b*D + c`.
fn christoffel_flat<const D: usize>(
    metric: &dyn Fn(&[f64; D]) -> Mat<D>,
    x: &[f64; D],
) -> Vec<f64> {
    let g = metric(x);
    let ginv = invert(&g);
    let flat = |y: &[f64; D]| -> [f64; 16] {
        let m = metric(y);
        let mut out = [0.0; 16];
        for i in 0..D {
            for j in 0..D {
                out[i * D + j] = m[i][j];
            }
        }
        out
    };
    let dg: Vec<[f64; 16]> = (0..D).map(|k| diff(&flat, x, k)).collect();
    let d = |k: usize, i: usize, j: usize| dg[k][i * D + j];
    let mut gamma = vec![0.0; D * D * D];
    for a in 0..D {
        for b in 0..D {
            for c in 0..D {
                let mut acc = 0.0;
                for e in 0..D {
                    acc += 0.5 * ginv[a][e] * (d(b, e, c) + d(c, e, b) - d(e, b, c));
                }
                gamma[a * D * D + b * D + c] = acc;
            }
        }
    }
    gamma
}

/// Fully covariant Riemann tensor `R_abcd` (convention
/// `R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + ...`), flattened.
pub fn riemann<const D: usize>(metric: &dyn Fn(&[f64; D]) -> Mat<D>, x: &[f64; D]) -> Vec<f64> {
    let idx = |a: usize, b: usize, c: usize| a * D * D + b * D + c;
    let gamma = christoffel_flat(metric, x);
    let as_array = |y: &[f64; D]| -> [f64; 64] {
        let v = christoffel_flat(metric, y);
        let mut out = [0.0; 64];
        out[..v.len()].copy_from_slice(&v);
        out
    };
    let dgamma: Vec<[f64; 64]> = (0..D).map(|k| diff(&as_array, x, k)).collect();
    let g = metric(x);
    let mut up = vec![0.0; D * D * D * D];
    for a in 0..D {
        for b in 0..D {
            for c in 0..D {
                for d in 0..D {
                    let mut r = dgamma[c][idx(a, d, b)] - dgamma[d][idx(a, c, b)];
                    for e in 0..D {
                        r += gamma[idx(a, c, e)] * gamma[idx(e, d, b)]
                            - gamma[idx(a, d, e)] * gamma[idx(e, c, b)];
                    }
                    up[((a * D + b) * D + c) * D + d] = r;
                }
            }
        }
    }
    let mut down = vec![0.0; D * D * D * D];
    for a in 0..D {
        for b in 0..D {
            for c in 0..D {
                for d in 0..D {
                    let mut r = 0.0;
                    for e in 0..D {
                        r += g[a][e] * up[((e * D + b) * D + c) * D + d];
                    }
                    down[((a * D + b) * D + c) * D + d] = r;
                }
            }
        }
    }
    down
}

/// Frame components `R(E_A, E_B, E_C, E_D)` where row `A` of `coframe` holds
/// the coordinate components of the coframe covector `theta^A`.
pub fn frame_components<const D: usize>(riem: &[f64], coframe: &Mat<D>) -> Vec<f64> {
    // Frame vectors are the columns of the inverse coframe matrix.
    let e = invert(coframe);
    let mut out = vec![0.0; riem.len()];
    // Contract one index at a time.
    let mut cur = riem.to_vec();
    for slot in 0..4 {
        let stride = D.pow(3 - slot as u32);
        for (flat, o) in out.iter_mut().enumerate() {
            let a_frame = (flat / stride) % D;
            let base = flat - a_frame * stride;
            let mut acc = 0.0;
            for mu in 0..D {
                acc += cur[base + mu * stride] * e[mu][a_frame];
            }
            *o = acc;
        }
        cur.copy_from_slice(&out);
    }
    cur
}

/// Sum of squares of all orthonormal components.
pub fn norm<const D: usize>(
    metric: &dyn Fn(&[f64; D]) -> Mat<D>,
    coframe: &Mat<D>,
    x: &[f64; D],
) -> f64 {
    frame_components(&riemann(metric, x), coframe)
        .iter()
        .map(|r| r * r)
        .sum::<f64>()
        .sqrt()
}

/// Metric `-L^2 dt^2 + sum h_i sigma^i sigma^i` from the coframe rows (row 0 is `L dt`).
pub fn lorentz_from_coframe(coframe: &Mat<4>) -> Mat<4> {
    let mut g = [[0.0; 4]; 4];
    for (a, row) in coframe.iter().enumerate() {
        let sign = if a == 0 { -1.0 } else { 1.0 };
        for mu in 0..4 {
            for nu in 0..4 {
                g[mu][nu] += sign * row[mu] * row[nu];
            }
        }
    }
    g
}

/// Riemannian metric `sum theta^A theta^A` from coframe rows.
pub fn riemannian_from_coframe<const D: usize>(coframe: &Mat<D>) -> Mat<D> {
    let mut g = [[0.0; D]; D];
    for row in coframe.iter() {
        for mu in 0..D {
            for nu in 0..D {
                g[mu][nu] += row[mu] * row[nu];
            }
        }
    }
    g
}

/// Left-invariant coframe rows on the Heisenberg group, coordinates `(x, y, z)`:
/// `sigma^1 = dx + z dy`, `sigma^2 = dy`, `sigma^3 = dz`, so `[e2, e3] = e1`.
pub fn heisenberg_sigma(x: &[f64; 3]) -> Mat<3> {
    [[1.0, x[2], 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

/// Left-invariant coframe rows on SU(2) in Euler angles `(theta, phi, psi)`,
/// with `[e_i, e_j] = e_k` cyclic.
pub fn su2_sigma(x: &[f64; 3]) -> Mat<3> {
    let (th, psi) = (x[0], x[2]);
    [
        [psi.sin(), -psi.cos() * th.sin(), 0.0],
        [psi.cos(), psi.sin() * th.sin(), 0.0],
        [0.0, th.cos(), 1.0],
    ]
}

/// Spacetime coframe rows `(L dt, sqrt(h_i) sigma^i)` at `(t, x)`.
pub fn spacetime_coframe(lapse: f64, h: [f64; 3], sigma: &Mat<3>) -> Mat<4> {
    let mut c = [[0.0; 4]; 4];
    c[0][0] = lapse;
    for i in 0..3 {
        for j in 0..3 {
            c[i + 1][j + 1] = h[i].sqrt() * sigma[i][j];
        }
    }
    c
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Deterministic RNG for sampled checks.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
