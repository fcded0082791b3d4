//! Stability of homogeneous steady states under (k, ℓ) perturbations.
//!
//! Linearizing about a steady state with perturbations e^{λt + ikx + iℓy}
//! gives λ² + (p1 + i q1) λ + (p2 + i q2) = 0 with
//!
//! ```text
//! p1 = (1 + 1/δ²)(k²+ℓ²) - F_u - G_v
//! q1 = -ν k
//! p2 = F_u G_v - F_v G_u - (F_u/δ² + G_v)(k²+ℓ²) + (k²+ℓ²)²/δ²
//! q2 = -ν k (k²+ℓ²) + ν k F_u
//! ```
//!
//! Both roots have negative real part iff p1 > 0 and p1²p2 + p1 q1 q2 - q2² > 0.
//! The margin min(p1, p1²p2 + p1 q1 q2 - q2²) is swept over a logarithmic
//! (k, ℓ) grid (both conditions are even in ℓ and the second is even in k, so
//! the sweep covers the quarter plane) and polished with a Nelder-Mead
//! descent from the grid minimum.

use rayon::prelude::*;
use serde::Serialize;

use crate::kinetics::{ReactionModel, SteadyState};
use crate::{Error, Result};

/// Coefficients of the quadratic dispersion polynomial at one (k, ℓ).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DispersionCoefficients {
    pub k: f64,
    pub ell: f64,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl DispersionCoefficients {
    /// Routh-type stability margin: positive iff both roots decay.
    pub fn margin(&self) -> f64 {
        let routh = self.p1 * self.p1 * self.p2 + self.p1 * self.q1 * self.q2 - self.q2 * self.q2;
        self.p1.min(routh)
    }

    /// Largest real part of the two roots of λ² + (p1+iq1)λ + (p2+iq2) = 0.
    pub fn max_growth_rate(&self) -> f64 {
        use num_complex::Complex64;
        let b = Complex64::new(self.p1, self.q1);
        let c = Complex64::new(self.p2, self.q2);
        let disc = (b * b - 4.0 * c).sqrt();
        let r1 = (-b + disc) / 2.0;
        let r2 = (-b - disc) / 2.0;
        r1.re.max(r2.re)
    }
}

pub fn dispersion_coefficients(
    state: &SteadyState,
    delta: f64,
    nu: f64,
    k: f64,
    ell: f64,
) -> Result<DispersionCoefficients> {
    if !(delta > 0.0) || nu < 0.0 || !k.is_finite() || !ell.is_finite() {
        return Err(Error::invalid("dispersion: need delta > 0, nu >= 0, finite wavenumbers".to_string()));
    }
    let j = &state.jac;
    let d2 = delta * delta;
    let m2 = k * k + ell * ell;
    Ok(DispersionCoefficients {
        k,
        ell,
        p1: (1.0 + 1.0 / d2) * m2 - j.f_u - j.g_v,
        q1: -nu * k,
        p2: j.det() - (j.f_u / d2 + j.g_v) * m2 + m2 * m2 / d2,
        q2: -nu * k * m2 + nu * k * j.f_u,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumStabilityReport {
    pub stable: bool,
    pub margin: f64,
    pub argmin_k: f64,
    pub argmin_ell: f64,
    pub k_max: f64,
    pub ell_max: f64,
    pub n_grid: usize,
    /// Set when the margin minimum sits on the sweep boundary (window too small).
    pub boundary_minimum: bool,
    /// Full sweep, row-major over the (k, ℓ) grid, for CSV output.
    #[serde(skip)]
    pub sweep: Vec<DispersionCoefficients>,
}

/// Log-spaced axis including zero: {0} ∪ logspace(lo, hi).
fn axis(hi: f64, n: usize, lo: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let (llo, lhi) = (lo.ln(), hi.ln());
    for i in 0..n {
        out.push((llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp());
    }
    out
}

/// Sweep the margin over the grid plus a Nelder-Mead refinement from the
/// grid minimum. The reduction is an index-ordered min, so the result is
/// identical for any rayon worker count.
pub fn check_equilibrium_stability(
    state: &SteadyState,
    model: &dyn ReactionModel,
    delta: f64,
    nu: f64,
    k_max: f64,
    ell_max: f64,
    n_grid: usize,
) -> Result<EquilibriumStabilityReport> {
    let _ = model;
    let turnover = (1.0f64).max(1.0 / delta) * (state.jac.f_u.abs() + state.jac.g_v.abs()).sqrt();
    if k_max < turnover || ell_max < turnover {
        return Err(Error::invalid(format!(
            "dispersion window ({k_max}, {ell_max}) below the decay turnover scale {turnover:.3e}"
        )));
    }
    let ks = axis(k_max, n_grid, 1e-4 * delta.min(1.0));
    let ells = axis(ell_max, n_grid, 1e-4 * delta.min(1.0));
    let rows: Vec<Vec<DispersionCoefficients>> = ks
        .par_iter()
        .map(|&k| ells.iter().map(|&ell| dispersion_coefficients(state, delta, nu, k, ell).unwrap()).collect())
        .collect();
    let mut best = (f64::INFINITY, 0usize, 0usize);
    for (i, row) in rows.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            let m = c.margin();
            if m < best.0 {
                best = (m, i, j);
            }
        }
    }
    // Nelder-Mead polish in (k, ell), reflecting into the quarter plane
    let eval = |k: f64, ell: f64| {
        dispersion_coefficients(state, delta, nu, k.abs(), ell.abs()).map(|c| c.margin()).unwrap_or(f64::INFINITY)
    };
    let (k0, l0) = (ks[best.1], ells[best.2]);
    let scale = |v: f64, hi: f64| if v > 0.0 { v * 0.35 } else { hi * 1e-4 };
    let mut simplex = [
        (k0, l0, eval(k0, l0)),
        (k0 + scale(k0, k_max), l0, 0.0),
        (k0, l0 + scale(l0, ell_max), 0.0),
    ];
    simplex[1].2 = eval(simplex[1].0, simplex[1].1);
    simplex[2].2 = eval(simplex[2].0, simplex[2].1);
    for _ in 0..120 {
        simplex.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
        let (b0, b1, w) = (simplex[0], simplex[1], simplex[2]);
        let (cx, cy) = (0.5 * (b0.0 + b1.0), 0.5 * (b0.1 + b1.1));
        let (rx, ry) = (2.0 * cx - w.0, 2.0 * cy - w.1);
        let fr = eval(rx, ry);
        if fr < b0.2 {
            let (ex, ey) = (3.0 * cx - 2.0 * w.0, 3.0 * cy - 2.0 * w.1);
            let fe = eval(ex, ey);
            simplex[2] = if fe < fr { (ex, ey, fe) } else { (rx, ry, fr) };
        } else if fr < b1.2 {
            simplex[2] = (rx, ry, fr);
        } else {
            let (sx, sy) = (0.5 * (cx + w.0), 0.5 * (cy + w.1));
            let fs = eval(sx, sy);
            if fs < w.2 {
                simplex[2] = (sx, sy, fs);
            } else {
                for i in 1..3 {
                    simplex[i].0 = 0.5 * (simplex[i].0 + b0.0);
                    simplex[i].1 = 0.5 * (simplex[i].1 + b0.1);
                    simplex[i].2 = eval(simplex[i].0, simplex[i].1);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    let (mut margin, mut argk, mut argl) = (best.0, ks[best.1], ells[best.2]);
    if simplex[0].2 < margin {
        margin = simplex[0].2;
        argk = simplex[0].0.abs();
        argl = simplex[0].1.abs();
    }
    let boundary_minimum = best.1 == ks.len() - 1 || best.2 == ells.len() - 1;
    let sweep = rows.into_iter().flatten().collect();
    Ok(EquilibriumStabilityReport {
        stable: margin > 0.0,
        margin,
        argmin_k: argk,
        argmin_ell: argl,
        k_max,
        ell_max,
        n_grid,
        boundary_minimum,
        sweep,
    })
}

/// Default sweep window/resolution for a state: covers the decay turnover
/// scale with margin.
pub fn default_window(state: &SteadyState, delta: f64) -> (f64, f64, usize) {
    let turnover = (1.0f64).max(1.0 / delta) * (state.jac.f_u.abs() + state.jac.g_v.abs()).sqrt();
    (3.0 * turnover, 3.0 * turnover, 48)
}

/// Bisection in μ3 of the swept stability flag of the vegetated state
/// (U2, V2); used to validate the dispersion machinery against the closed
/// form μ3* = μ1 (4 μ2 + 1/μ2).
pub fn klausmeier_stability_boundary(
    mu1: f64,
    mu2: f64,
    delta: f64,
    nu: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let flag = |mu3: f64| -> Result<bool> {
        let m = crate::kinetics::KlausmeierModel::new(mu1, mu2, mu3)?;
        let states = crate::kinetics::find_steady_states(&m);
        let veg = states
            .iter()
            .max_by(|a, b| a.u.partial_cmp(&b.u).unwrap())
            .ok_or_else(|| Error::numerics("no steady state"))?;
        if veg.u < 1e-6 {
            return Ok(false);
        }
        let (km, lm, ng) = default_window(veg, delta);
        Ok(check_equilibrium_stability(veg, &m, delta, nu, km, lm, ng)?.stable)
    };
    if flag(lo)? || !flag(hi)? {
        return Err(Error::numerics("stability bisection bracket does not straddle the boundary"));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if flag(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
