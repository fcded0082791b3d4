//! Reaction kinetics: the model interface, the modified Klausmeier instance,
//! nullcline branches of F = 0, and homogeneous steady states.
//!
//! A model provides F, G and analytic partial derivatives; the partials feed
//! every linearization downstream (layer saddles, projection boundary
//! conditions, the stability operator, the adjoint), so finite-difference
//! fallbacks are only used to cross-check, never to compute.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Jacobian entries of (F, G) at a point.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Jacobian {
    pub f_u: f64,
    pub f_v: f64,
    pub g_u: f64,
    pub g_v: f64,
}

impl Jacobian {
    pub fn det(&self) -> f64 {
        self.f_u * self.g_v - self.f_v * self.g_u
    }
}

/// A two-component reaction model with parameter vector μ.
pub trait ReactionModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn params(&self) -> Vec<f64>;
    fn f(&self, u: f64, v: f64) -> f64;
    fn g(&self, u: f64, v: f64) -> f64;
    fn jacobian(&self, u: f64, v: f64) -> Jacobian;

    /// Both reaction terms at once, rejecting non-finite input.
    fn eval(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::invalid(format!("non-finite state ({u}, {v})")));
        }
        Ok((self.f(u, v), self.g(u, v)))
    }

    /// Centered finite-difference Jacobian, for verification of the analytic
    /// partials (relative agreement 1e-6 is asserted in the test suite).
    fn jacobian_fd(&self, u: f64, v: f64) -> Jacobian {
        let hu = 1e-6 * u.abs().max(1.0);
        let hv = 1e-6 * v.abs().max(1.0);
        Jacobian {
            f_u: (self.f(u + hu, v) - self.f(u - hu, v)) / (2.0 * hu),
            f_v: (self.f(u, v + hv) - self.f(u, v - hv)) / (2.0 * hv),
            g_u: (self.g(u + hu, v) - self.g(u - hu, v)) / (2.0 * hu),
            g_v: (self.g(u, v + hv) - self.g(u, v - hv)) / (2.0 * hv),
        }
    }

    /// Nullcline branches u = f_j(v) of F(u, v) = 0 over a v-window.
    fn nullcline_branches(&self, v_window: (f64, f64)) -> Vec<NullclineBranch>;

    /// Seed points for the steady-state search (closed forms where known).
    fn steady_state_seeds(&self) -> Vec<(f64, f64)>;

    /// Search window for generic root finding.
    fn search_window(&self) -> ((f64, f64), (f64, f64));
}

/// One branch u = f(v) of the nullcline F = 0, on a closed interval with
/// explicit fold endpoints.
#[derive(Clone)]
pub struct NullclineBranch {
    pub label: String,
    pub v_min: f64,
    pub v_max: f64,
    pub f: std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// True when F_u vanishes at the corresponding endpoint (fold point);
    /// slow flows must not be continued past it.
    pub fold_at_min: bool,
    pub fold_at_max: bool,
}

impl std::fmt::Debug for NullclineBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NullclineBranch")
            .field("label", &self.label)
            .field("v_min", &self.v_min)
            .field("v_max", &self.v_max)
            .field("fold_at_min", &self.fold_at_min)
            .field("fold_at_max", &self.fold_at_max)
            .finish()
    }
}

impl NullclineBranch {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.v_min - 1e-12 && v <= self.v_max + 1e-12
    }

    /// Graph value u = f(v).
    pub fn u(&self, v: f64) -> f64 {
        (self.f)(v)
    }

    /// Branch slope f'(v) = -F_v/F_u by implicit differentiation.
    pub fn slope(&self, model: &dyn ReactionModel, v: f64) -> f64 {
        let u = self.u(v);
        let j = model.jacobian(u, v);
        -j.f_v / j.f_u
    }

    /// Reduced-flow rate κ(v) = G_u f' + G_v along the branch.
    pub fn kappa(&self, model: &dyn ReactionModel, v: f64) -> f64 {
        let u = self.u(v);
        let j = model.jacobian(u, v);
        j.g_u * (-j.f_v / j.f_u) + j.g_v
    }
}

/// A root of F = G = 0 with its linearization data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteadyState {
    pub u: f64,
    pub v: f64,
    pub branch: String,
    pub jac: Jacobian,
    /// κ = G_u f' + G_v, the reduced-flow rate on the carrying branch.
    pub kappa: f64,
    /// F_u < 0, G_v < 0 and det > 0: admissible endpoint of a bistable front.
    pub bistable_admissible: bool,
}

/// Modified Klausmeier kinetics:
/// F = -μ1 U + U² V (1 - μ2 U), G = μ3 - V - U² V.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KlausmeierModel {
    /// mortality
    pub mu1: f64,
    /// inverse soil carrying capacity
    pub mu2: f64,
    /// rainfall
    pub mu3: f64,
}

impl KlausmeierModel {
    pub fn new(mu1: f64, mu2: f64, mu3: f64) -> Result<Self> {
        if !(mu1 > 0.0 && mu2 > 0.0 && mu3 > 0.0) {
            return Err(Error::config("Klausmeier parameters must be positive".to_string()));
        }
        Ok(KlausmeierModel { mu1, mu2, mu3 })
    }

    /// Vegetated-branch values U_F^±(v) = (1 ± sqrt(1 - 4 μ1 μ2 / v)) / (2 μ2),
    /// defined for v ≥ 4 μ1 μ2.
    pub fn branch_values(&self, v: f64) -> Option<(f64, f64)> {
        let disc = 1.0 - 4.0 * self.mu1 * self.mu2 / v;
        if v <= 0.0 || disc < 0.0 {
            return None;
        }
        let r = disc.sqrt();
        Some(((1.0 - r) / (2.0 * self.mu2), (1.0 + r) / (2.0 * self.mu2)))
    }

    /// Fold value of the vegetated branches.
    pub fn fold_v(&self) -> f64 {
        4.0 * self.mu1 * self.mu2
    }

    /// Closed-form vegetated steady states (U_1, V_1), (U_2, V_2), present
    /// when μ3/μ1 > 2 (μ2 + sqrt(1 + μ2²)).
    pub fn vegetated_states(&self) -> Option<[(f64, f64); 2]> {
        let disc = self.mu3 * self.mu3 - 4.0 * self.mu1 * (self.mu1 + self.mu2 * self.mu3);
        if disc < 0.0 {
            return None;
        }
        let r = disc.sqrt();
        let den = 2.0 * (self.mu1 + self.mu2 * self.mu3);
        let u1 = (self.mu3 - r) / den;
        let u2 = (self.mu3 + r) / den;
        let vv = |u: f64| self.mu3 - self.mu1 * u / (1.0 - self.mu2 * u);
        Some([(u1, vv(u1)), (u2, vv(u2))])
    }

    /// Existence threshold for the vegetated states: μ3/μ1 > 2(μ2 + sqrt(1+μ2²)).
    pub fn existence_threshold(&self) -> f64 {
        2.0 * self.mu1 * (self.mu2 + (1.0 + self.mu2 * self.mu2).sqrt())
    }

    /// PDE-stability threshold of (U_2, V_2): μ3 > μ1 (4 μ2 + 1/μ2).
    pub fn stability_threshold(&self) -> f64 {
        self.mu1 * (4.0 * self.mu2 + 1.0 / self.mu2)
    }
}

impl ReactionModel for KlausmeierModel {
    fn name(&self) -> &'static str {
        "klausmeier"
    }

    fn params(&self) -> Vec<f64> {
        vec![self.mu1, self.mu2, self.mu3]
    }

    fn f(&self, u: f64, v: f64) -> f64 {
        -self.mu1 * u + u * u * v * (1.0 - self.mu2 * u)
    }

    fn g(&self, u: f64, v: f64) -> f64 {
        self.mu3 - v - u * u * v
    }

    fn jacobian(&self, u: f64, v: f64) -> Jacobian {
        Jacobian {
            f_u: -self.mu1 + 2.0 * u * v - 3.0 * self.mu2 * u * u * v,
            f_v: u * u * (1.0 - self.mu2 * u),
            g_u: -2.0 * u * v,
            g_v: -1.0 - u * u,
        }
    }

    fn nullcline_branches(&self, v_window: (f64, f64)) -> Vec<NullclineBranch> {
        let (v_lo, v_hi) = v_window;
        let mut out = vec![NullclineBranch {
            label: "S-".to_string(),
            v_min: v_lo,
            v_max: v_hi,
            f: std::sync::Arc::new(|_v| 0.0),
            fold_at_min: false,
            fold_at_max: false,
        }];
        let fold = self.fold_v();
        if v_hi > fold {
            let lo = v_lo.max(fold);
            let m = *self;
            out.push(NullclineBranch {
                label: "S+".to_string(),
                v_min: lo,
                v_max: v_hi,
                f: std::sync::Arc::new(move |v| m.branch_values(v).map(|(_, b)| b).unwrap_or(f64::NAN)),
                fold_at_min: lo <= fold + 1e-14,
                fold_at_max: false,
            });
            let m2 = *self;
            out.push(NullclineBranch {
                label: "S0".to_string(),
                v_min: lo,
                v_max: v_hi,
                f: std::sync::Arc::new(move |v| m2.branch_values(v).map(|(a, _)| a).unwrap_or(f64::NAN)),
                fold_at_min: lo <= fold + 1e-14,
                fold_at_max: false,
            });
        }
        out
    }

    fn steady_state_seeds(&self) -> Vec<(f64, f64)> {
        let mut seeds = vec![(0.0, self.mu3)];
        if let Some(states) = self.vegetated_states() {
            seeds.extend_from_slice(&states);
        }
        seeds
    }

    fn search_window(&self) -> ((f64, f64), (f64, f64)) {
        ((-0.5, 2.0 / self.mu2), (-0.5, 2.0 * self.mu3))
    }
}

/// Newton refinement of F = G = 0 from a seed; `None` when the iteration
/// leaves the window or stalls.
fn newton_root(model: &dyn ReactionModel, mut u: f64, mut v: f64) -> Option<(f64, f64)> {
    let ((ulo, uhi), (vlo, vhi)) = model.search_window();
    for _ in 0..100 {
        let f = model.f(u, v);
        let g = model.g(u, v);
        if f.abs() < 1e-14 && g.abs() < 1e-14 {
            return Some((u, v));
        }
        let j = model.jacobian(u, v);
        let det = j.det();
        if det.abs() < 1e-300 {
            return None;
        }
        let du = (f * j.g_v - g * j.f_v) / det;
        let dv = (g * j.f_u - f * j.g_u) / det;
        u -= du;
        v -= dv;
        if !(u.is_finite() && v.is_finite()) || u < ulo || u > uhi || v < vlo || v > vhi {
            return None;
        }
    }
    let f = model.f(u, v);
    let g = model.g(u, v);
    (f.abs() < 1e-12 && g.abs() < 1e-12).then_some((u, v))
}

/// All steady states found from the model's seeds plus a coarse grid over the
/// search window, deduplicated at distance 1e-8, each with Jacobian data and
/// the bistable-admissibility flag of Assumption 1.
pub fn find_steady_states(model: &dyn ReactionModel) -> Vec<SteadyState> {
    let mut roots: Vec<(f64, f64)> = Vec::new();
    let mut push = |r: (f64, f64)| {
        if !roots.iter().any(|&(u, v)| (u - r.0).abs() + (v - r.1).abs() < 1e-8) {
            roots.push(r);
        }
    };
    for (u, v) in model.steady_state_seeds() {
        if let Some(r) = newton_root(model, u, v) {
            push(r);
        }
    }
    let ((ulo, uhi), (vlo, vhi)) = model.search_window();
    let ng = 12;
    for i in 0..=ng {
        for j in 0..=ng {
            let u = ulo + (uhi - ulo) * i as f64 / ng as f64;
            let v = vlo + (vhi - vlo) * j as f64 / ng as f64;
            if let Some(r) = newton_root(model, u, v) {
                push(r);
            }
        }
    }
    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let branches = model.nullcline_branches((vlo, vhi));
    roots
        .into_iter()
        .map(|(u, v)| {
            let jac = model.jacobian(u, v);
            let branch = branches
                .iter()
                .filter(|b| b.contains(v))
                .min_by(|a, b| {
                    let da = (a.u(v) - u).abs();
                    let db = (b.u(v) - u).abs();
                    da.partial_cmp(&db).unwrap()
                })
                .map(|b| b.label.clone())
                .unwrap_or_else(|| "?".to_string());
            let kappa = if jac.f_u.abs() > 1e-300 { jac.g_u * (-jac.f_v / jac.f_u) + jac.g_v } else { f64::NAN };
            let bistable_admissible = jac.f_u < 0.0 && jac.g_v < 0.0 && jac.det() > 0.0;
            SteadyState { u, v, branch, jac, kappa, bistable_admissible }
        })
        .collect()
}

/// The front endpoints for a bistable run, following the convention
/// V⁻ > V⁺: among the bistable-admissible states on distinct branches, the
/// one with the larger v becomes (U⁻, V⁻) (the state behind the front) and
/// the one with the smaller v becomes (U⁺, V⁺).
pub fn bistable_pair(model: &dyn ReactionModel) -> Result<(SteadyState, SteadyState)> {
    let states = find_steady_states(model);
    let mut admissible: Vec<&SteadyState> = states.iter().filter(|s| s.bistable_admissible).collect();
    admissible.sort_by(|a, b| b.v.partial_cmp(&a.v).unwrap());
    let minus = admissible
        .first()
        .cloned()
        .ok_or_else(|| Error::numerics("no bistable-admissible steady state found"))?;
    let plus = admissible
        .iter()
        .find(|s| s.branch != minus.branch)
        .cloned()
        .ok_or_else(|| {
            Error::numerics(
                "no second admissible state on a distinct branch: below the existence or stability threshold"
                    .to_string(),
            )
        })?;
    Ok((minus.clone(), plus.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model() -> KlausmeierModel {
        KlausmeierModel::new(0.1, 0.1, 2.0).unwrap()
    }

    #[test]
    fn desert_state_is_equilibrium() {
        let m = model();
        let (f, g) = m.eval(0.0, 2.0).unwrap();
        assert_eq!(f, 0.0);
        assert_eq!(g, 0.0);
    }

    #[test]
    fn direct_evaluation_at_one_one() {
        let m = model();
        let (f, g) = m.eval(1.0, 1.0).unwrap();
        assert_relative_eq!(f, 0.8, max_relative = 1e-15);
        assert_eq!(g, 0.0);
    }

    #[test]
    fn non_finite_input_rejected() {
        assert!(model().eval(f64::NAN, 1.0).is_err());
        assert!(model().eval(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn analytic_partials_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let m = model();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let u: f64 = rng.gen_range(0.0..9.0);
            let v: f64 = rng.gen_range(0.05..3.0);
            let a = m.jacobian(u, v);
            let fd = m.jacobian_fd(u, v);
            for (x, y) in [(a.f_u, fd.f_u), (a.f_v, fd.f_v), (a.g_u, fd.g_u), (a.g_v, fd.g_v)] {
                assert!((x - y).abs() <= 1e-6 * (1.0 + x.abs()), "partial mismatch {x} vs {y} at ({u},{v})");
            }
        }
    }

    #[test]
    fn f_v_is_u_squared_times_one_minus_mu2_u() {
        let m = model();
        for (u, v) in [(0.5, 1.0), (3.0, 0.2), (9.0, 2.5)] {
            assert_relative_eq!(m.jacobian(u, v).f_v, u * u * (1.0 - m.mu2 * u), max_relative = 1e-14);
        }
    }

    #[test]
    fn branch_values_at_fold_and_at_v2() {
        let m = model();
        let fold = m.fold_v();
        let (a, b) = m.branch_values(fold).unwrap();
        assert_relative_eq!(a, 1.0 / (2.0 * m.mu2), max_relative = 1e-7);
        assert_relative_eq!(b, 1.0 / (2.0 * m.mu2), max_relative = 1e-7);
        let (a, b) = m.branch_values(2.0).unwrap();
        assert!((b - 9.9497).abs() < 2e-4);
        assert!((a - 0.0503).abs() < 2e-4);
        assert!(m.branch_values(fold * 0.99).is_none());
    }

    #[test]
    fn desert_branch_is_exact() {
        let m = model();
        for v in [0.01, 0.5, 1.7, 3.0] {
            assert_eq!(m.f(0.0, v), 0.0);
        }
    }

    #[test]
    fn nullcline_residual_and_slope() {
        let m = model();
        for b in m.nullcline_branches((0.05, 3.0)) {
            let n = 40;
            for k in 0..=n {
                let v = b.v_min + (b.v_max - b.v_min) * k as f64 / n as f64;
                let v = v.max(b.v_min + 1e-9);
                let u = b.u(v);
                assert!(m.f(u, v).abs() < 1e-10, "branch {} residual at v={v}", b.label);
                // implicit-differentiation slope vs finite difference of the graph
                let j = m.jacobian(u, v);
                if j.f_u.abs() > 1e-3 {
                    let h = 1e-6 * v.max(1.0);
                    if b.contains(v - h) && b.contains(v + h) {
                        let fd = (b.u(v + h) - b.u(v - h)) / (2.0 * h);
                        let an = b.slope(&m, v);
                        assert!((fd - an).abs() <= 1e-5 * (1.0 + an.abs()), "slope {an} vs {fd}");
                    }
                }
            }
        }
    }

    #[test]
    fn steady_states_contain_desert_and_vegetated() {
        let m = model();
        let states = find_steady_states(&m);
        for s in &states {
            assert!(m.f(s.u, s.v).abs() < 1e-12);
            assert!(m.g(s.u, s.v).abs() < 1e-12);
        }
        let desert = states.iter().find(|s| s.u.abs() < 1e-10).expect("desert state");
        assert_relative_eq!(desert.v, 2.0, max_relative = 1e-12);
        assert!(desert.bistable_admissible);
        let veg = states.iter().max_by(|a, b| a.u.partial_cmp(&b.u).unwrap()).unwrap();
        assert!((veg.u - 6.6163).abs() < 1e-3);
        assert!((veg.v - 0.0447).abs() < 1e-4);
        assert!(veg.bistable_admissible, "mu3/mu1 = 20 > 4 mu2 + 1/mu2 = 10.4");
        // the middle state (U1, V1) is never admissible
        let mid = states.iter().find(|s| s.u > 0.1 && s.u < veg.u - 0.1).expect("middle state");
        assert!(!mid.bistable_admissible);
    }

    #[test]
    fn desert_only_below_existence_threshold() {
        // mu3/mu1 <= 2 (mu2 + sqrt(1 + mu2^2)) leaves only the desert state
        let m = KlausmeierModel::new(0.1, 0.1, 0.2).unwrap();
        assert!(m.mu3 < m.existence_threshold());
        assert!(m.vegetated_states().is_none());
        let states = find_steady_states(&m);
        assert_eq!(states.len(), 1);
        assert!(states[0].u.abs() < 1e-12);
    }

    #[test]
    fn admissibility_flag_flips_at_stability_threshold() {
        // bisection on the flag against the closed form mu3* = mu1 (4 mu2 + 1/mu2)
        let flag = |mu3: f64| {
            let m = KlausmeierModel::new(0.1, 0.1, mu3).unwrap();
            let states = find_steady_states(&m);
            states
                .iter()
                .max_by(|a, b| a.u.partial_cmp(&b.u).unwrap())
                .map(|s| s.bistable_admissible)
                .unwrap_or(false)
        };
        let (mut lo, mut hi) = (0.9, 1.2);
        assert!(!flag(lo) && flag(hi));
        while hi - lo > 1e-7 {
            let mid = 0.5 * (lo + hi);
            if flag(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let closed = KlausmeierModel::new(0.1, 0.1, 1.0).unwrap().stability_threshold();
        assert!((0.5 * (lo + hi) - closed).abs() < 1e-6, "flag boundary {} vs closed form {closed}", 0.5 * (lo + hi));
    }

    #[test]
    fn bistable_pair_orientation() {
        let (minus, plus) = bistable_pair(&model()).unwrap();
        assert!(minus.v > plus.v, "convention V- > V+");
        assert!(minus.u.abs() < 1e-12);
        assert!(plus.u > 1.0);
    }
}
