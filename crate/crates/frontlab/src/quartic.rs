//! Spatial eigenvalues of the traveling-wave linearization at a rest state.
//!
//! Modes (u, v) ~ e^{sξ} of the linearized wave equation satisfy
//!
//! ```text
//! (s² + c s + F_u) (s² + δ²(ν+c) s + δ² G_v) − δ² F_v G_u = 0,
//! ```
//!
//! a real quartic in s. Roots are found by Durand-Kerner iteration with a
//! Newton polish; eigenvectors in the first-order (u, p, v, q) variables
//! follow in closed form. The stable/unstable splitting feeds the projection
//! boundary conditions of the front solver and the domain-truncation lengths.

use num_complex::Complex64;

use crate::kinetics::Jacobian;
use crate::{Error, Result};

/// Coefficients of s⁴ + a3 s³ + a2 s² + a1 s + a0.
fn wave_quartic(jac: &Jacobian, c: f64, delta: f64, nu: f64) -> [f64; 4] {
    let d2 = delta * delta;
    let b1 = c; // s² + b1 s + b0 (u factor)
    let b0 = jac.f_u;
    let e1 = d2 * (nu + c); // s² + e1 s + e0 (v factor)
    let e0 = d2 * jac.g_v;
    // (s²+b1 s+b0)(s²+e1 s+e0) - d2 FvGu
    [b1 + e1, b0 + e0 + b1 * e1, b1 * e0 + e1 * b0, b0 * e0 - d2 * jac.f_v * jac.g_u]
}

fn eval_poly(a: &[f64; 4], s: Complex64) -> (Complex64, Complex64) {
    // returns (p(s), p'(s))
    let p = ((s + a[0]) * s + a[1]) * s * s + a[2] * s + a[3];
    let dp = ((4.0 * s + 3.0 * a[0]) * s + 2.0 * a[1]) * s + a[2];
    (p, dp)
}

/// All four roots of the quartic, Durand-Kerner followed by Newton polish.
pub fn quartic_roots(a: &[f64; 4]) -> [Complex64; 4] {
    let radius = 1.0 + a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z = [seed * radius, seed * seed * radius, seed * seed * seed * radius, seed * seed * seed * seed * radius];
    for _ in 0..200 {
        let mut maxd = 0.0f64;
        for i in 0..4 {
            let (p, _) = eval_poly(a, z[i]);
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let dz = p / den;
            z[i] -= dz;
            maxd = maxd.max(dz.norm());
        }
        if maxd < 1e-14 * radius {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = eval_poly(a, *zi);
            if dp.norm() > 0.0 {
                *zi -= p / dp;
            }
        }
        // collapse numerically real roots
        if zi.im.abs() < 1e-10 * (1.0 + zi.re.abs()) {
            zi.im = 0.0;
        }
    }
    z
}

/// Spatial eigenpair of the first-order system at a rest state.
#[derive(Clone, Copy, Debug)]
pub struct SpatialMode {
    pub s: Complex64,
    /// Eigenvector in (u, p, v, q) coordinates.
    pub vec: [Complex64; 4],
    /// Left eigenvector (row) of the first-order Jacobian, for projections.
    pub left: [Complex64; 4],
}

/// First-order Jacobian of the traveling-wave system at a rest state:
/// u' = p, p' = -c p - F, v' = δ q, q' = -δ²(ν+c) q - δ G.
pub fn flow_jacobian(jac: &Jacobian, c: f64, delta: f64, nu: f64) -> [[f64; 4]; 4] {
    [
        [0.0, 1.0, 0.0, 0.0],
        [-jac.f_u, -c, -jac.f_v, 0.0],
        [0.0, 0.0, 0.0, delta],
        [-delta * jac.g_u, 0.0, -delta * jac.g_v, -delta * delta * (nu + c)],
    ]
}

/// All four spatial modes, sorted by real part (ascending).
pub fn spatial_modes(jac: &Jacobian, c: f64, delta: f64, nu: f64) -> Result<Vec<SpatialMode>> {
    let a = wave_quartic(jac, c, delta, nu);
    let mut roots = quartic_roots(&a);
    roots.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
    let j = flow_jacobian(jac, c, delta, nu);
    let mut out = Vec::with_capacity(4);
    for s in roots {
        let vec = eig_vector(&j, s)?;
        let left = left_vector(&j, s)?;
        out.push(SpatialMode { s, vec, left });
    }
    Ok(out)
}

/// Null vector of (J - s I) via complex Gaussian elimination on 4x4.
fn eig_vector(j: &[[f64; 4]; 4], s: Complex64) -> Result<[Complex64; 4]> {
    null_vector(&shifted(j, s))
}

fn left_vector(j: &[[f64; 4]; 4], s: Complex64) -> Result<[Complex64; 4]> {
    let m = shifted(j, s);
    let mut t = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in m.iter().enumerate() {
        for (jj, v) in row.iter().enumerate() {
            t[jj][i] = *v;
        }
    }
    null_vector(&t)
}

fn shifted(j: &[[f64; 4]; 4], s: Complex64) -> [[Complex64; 4]; 4] {
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for jj in 0..4 {
            m[i][jj] = Complex64::new(j[i][jj], 0.0) - if i == jj { s } else { Complex64::new(0.0, 0.0) };
        }
    }
    m
}

fn null_vector(m: &[[Complex64; 4]; 4]) -> Result<[Complex64; 4]> {
    let mut a = *m;
    // eliminate with full pivoting on 3 columns; the remaining column is the
    // free variable
    let mut rank_rows = Vec::new();
    let mut used_cols = Vec::new();
    for _ in 0..3 {
        // pick largest remaining entry
        let (mut bi, mut bj, mut bm) = (usize::MAX, usize::MAX, 0.0f64);
        for i in 0..4 {
            if rank_rows.contains(&i) {
                continue;
            }
            for jj in 0..4 {
                if used_cols.contains(&jj) {
                    continue;
                }
                if a[i][jj].norm() > bm {
                    bm = a[i][jj].norm();
                    bi = i;
                    bj = jj;
                }
            }
        }
        if bm < 1e-13 {
            break; // rank < 3: eigenvalue with multiplicity, any remaining vector works
        }
        rank_rows.push(bi);
        used_cols.push(bj);
        for i in 0..4 {
            if i == bi || rank_rows.contains(&i) {
                continue;
            }
            let f = a[i][bj] / a[bi][bj];
            for jj in 0..4 {
                a[i][jj] -= f * a[bi][jj];
            }
        }
    }
    let free = (0..4)
        .find(|c| !used_cols.contains(c))
        .ok_or_else(|| Error::numerics("null_vector: no free column"))?;
    let mut x = [Complex64::new(0.0, 0.0); 4];
    x[free] = Complex64::new(1.0, 0.0);
    // back-solve the pivoted rows in reverse acquisition order
    for k in (0..rank_rows.len()).rev() {
        let (ri, cj) = (rank_rows[k], used_cols[k]);
        let mut s = Complex64::new(0.0, 0.0);
        for jj in 0..4 {
            if jj != cj {
                s += a[ri][jj] * x[jj];
            }
        }
        x[cj] = -s / a[ri][cj];
    }
    let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
    Ok(x)
}

/// Real row-space basis of the stable (`stable = true`) or unstable left
/// eigenspace. Complex pairs contribute their real and imaginary parts; the
/// returned rows annihilate deviations lying in the complementary invariant
/// subspace, which is exactly the projection boundary condition.
pub fn projection_rows(modes: &[SpatialMode], stable: bool) -> Vec<[f64; 4]> {
    let mut rows: Vec<[f64; 4]> = Vec::new();
    let mut skip_next_conj = false;
    for m in modes {
        let take = if stable { m.s.re < 0.0 } else { m.s.re > 0.0 };
        if !take {
            continue;
        }
        if m.s.im.abs() > 0.0 {
            if skip_next_conj {
                skip_next_conj = false;
                continue;
            }
            let re: [f64; 4] = std::array::from_fn(|i| m.left[i].re);
            let im: [f64; 4] = std::array::from_fn(|i| m.left[i].im);
            rows.push(re);
            rows.push(im);
            skip_next_conj = true;
        } else {
            rows.push(std::array::from_fn(|i| m.left[i].re));
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::Jacobian;

    fn sample_jac() -> Jacobian {
        Jacobian { f_u: -0.1, f_v: 0.3, g_u: -0.6, g_v: -1.0 }
    }

    #[test]
    fn roots_satisfy_quartic() {
        let a = wave_quartic(&sample_jac(), -0.5, 0.01, 800.0);
        for r in quartic_roots(&a) {
            let (p, _) = eval_poly(&a, r);
            assert!(p.norm() < 1e-9, "residual {}", p.norm());
        }
    }

    #[test]
    fn eigenvectors_satisfy_jv_sv() {
        let jac = sample_jac();
        let (c, delta, nu) = (-0.3, 0.001, 2.0e4);
        let j = flow_jacobian(&jac, c, delta, nu);
        for m in spatial_modes(&jac, c, delta, nu).unwrap() {
            for i in 0..4 {
                let mut jv = Complex64::new(0.0, 0.0);
                for k in 0..4 {
                    jv += j[i][k] * m.vec[k];
                }
                assert!((jv - m.s * m.vec[i]).norm() < 1e-8, "right eig residual");
            }
            for k in 0..4 {
                let mut vj = Complex64::new(0.0, 0.0);
                for i in 0..4 {
                    vj += m.left[i] * j[i][k];
                }
                assert!((vj - m.s * m.left[k]).norm() < 1e-8, "left eig residual");
            }
        }
    }

    #[test]
    fn saddle_splitting_two_two() {
        // bistable rest state: expect 2 stable + 2 unstable spatial directions
        let modes = spatial_modes(&sample_jac(), -0.9, 0.001, 0.0).unwrap();
        let ns = modes.iter().filter(|m| m.s.re < 0.0).count();
        assert_eq!(ns, 2);
        assert_eq!(projection_rows(&modes, true).len(), 2);
        assert_eq!(projection_rows(&modes, false).len(), 2);
    }
}
