//! Reduced slow flows on the critical-manifold branches and the jump data
//! (v*, q*) where the unstable manifold of (V⁻, 0) meets the stable manifold
//! of (V⁺, 0) in projection.
//!
//! Weak/intermediate regimes share one planar reduced system,
//!
//! ```text
//! v_ζ = q,    q_ζ = -(r̄ q + G(f^±(v), v)),
//! ```
//!
//! integrated in ζ for moderate r̄ and in the rescaled variables
//! τ = r̄ ζ, q̃ = r̄ q (where the system reads v_τ = q̃/r̄², q̃_τ = -q̃ - G) once
//! r̄ is large enough that the ζ-form turns stiff. In the strong regime the
//! slow flow degenerates to v_η = -G(f⁻(v), v) on the minus branch alone and
//! the jump is pinned at v* = V⁺.

use serde::Serialize;

use super::layer::LayerFront;
use super::regime::{Regime, RegimeParams};
use crate::kinetics::{NullclineBranch, ReactionModel, SteadyState};
use crate::ode::{integrate, Control, OdeOptions};
use crate::{Error, Result};

/// Which time variable and q-normalization the stored orbits use.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SlowScaling {
    /// ζ = δξ with q = v_ζ (weak / moderate r̄).
    Zeta { r_bar: f64 },
    /// τ = rξ with q̃ = r̄ v_ζ (intermediate, large r̄).
    Tau { r_bar: f64 },
    /// η = εξ with q identified with -G (strong).
    Eta,
}

/// Slow orbit pieces meeting at the jump: `minus` on the V⁻ branch for
/// t ≤ 0, `plus` on the V⁺ branch for t ≥ 0, both ending/starting at
/// (v*, q*). Points are (t, v, q) in the stored scaling.
#[derive(Clone, Debug, Serialize)]
pub struct SlowOrbits {
    pub scaling: SlowScaling,
    pub v_star: f64,
    pub q_star: f64,
    pub minus: Vec<[f64; 3]>,
    pub plus: Vec<[f64; 3]>,
    /// Angle between the two curves at the intersection (radians).
    pub transversality_angle: f64,
    /// Saddle rates in the stored time variable: unstable at (V⁻, 0),
    /// stable at (V⁺, 0).
    pub rate_minus: f64,
    pub rate_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
}

const TAU_SWITCH: f64 = 32.0;
const SEED_DIST: f64 = 1e-7;
const TANGENT_MARGIN: f64 = 1e-6;

fn branch_for<'a>(branches: &'a [NullclineBranch], state: &SteadyState) -> Result<&'a NullclineBranch> {
    branches
        .iter()
        .find(|b| b.label == state.branch)
        .ok_or_else(|| Error::numerics(format!("no nullcline branch labeled {}", state.branch)))
}

/// Sample a planar orbit as a graph q(v), integrating dir = ±field until the
/// v-range is exhausted, q turns, or the branch domain ends.
#[allow(clippy::too_many_arguments)]
fn orbit_graph(
    model: &dyn ReactionModel,
    branch: &NullclineBranch,
    r_bar_or_tau: (f64, bool),
    seed: [f64; 2],
    reversed: bool,
    v_stop: f64,
    q_cap: f64,
    t_cap: f64,
) -> Result<Vec<[f64; 3]>> {
    let (rb, tau_form) = r_bar_or_tau;
    let mut pts: Vec<[f64; 3]> = vec![[0.0, seed[0], seed[1]]];
    let sgn = if reversed { -1.0 } else { 1.0 };
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, h_init: 1e-6, h_max: t_cap / 16.0, ..Default::default() };
    let fold_lo = branch.v_min;
    let fold_hi = branch.v_max;
    integrate(
        |_t, y: &[f64; 2]| {
            let (v, q) = (y[0], y[1]);
            let g = model.g(branch.u(v), v);
            if tau_form {
                [sgn * q / (rb * rb), sgn * (-(q + g))]
            } else {
                [sgn * q, sgn * (-(rb * q + g))]
            }
        },
        0.0,
        seed,
        t_cap,
        &opts,
        |st| {
            // dense sampling keeps the polyline interpolation error negligible
            let nsub = 4;
            for k in 1..=nsub {
                let t = st.t0 + (st.t1 - st.t0) * k as f64 / nsub as f64;
                let y = if k == nsub { st.y1 } else { st.eval(t) };
                pts.push([t, y[0], y[1]]);
            }
            let y = st.y1;
            let crossed = if v_stop < seed[0] { y[0] <= v_stop } else { y[0] >= v_stop };
            if crossed || y[1].abs() > q_cap || y[1] >= 0.0 || y[0] <= fold_lo || y[0] >= fold_hi {
                return Control::Stop;
            }
            Control::Continue
        },
    )?;
    Ok(pts)
}

fn interp_graph(pts: &[[f64; 3]], v: f64) -> Option<(f64, f64)> {
    // points are monotone in v along the orbit; binary-search the cell and
    // interpolate (t, q) linearly
    if pts.len() < 2 {
        return None;
    }
    let descending = pts[0][1] > pts[pts.len() - 1][1];
    let key = |x: f64| if descending { -x } else { x };
    if key(v) < key(pts[0][1]) || key(v) > key(pts[pts.len() - 1][1]) {
        return None;
    }
    let mut lo = 0usize;
    let mut hi = pts.len() - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if key(pts[mid][1]) <= key(v) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (pts[lo], pts[hi]);
    if (b[1] - a[1]).abs() == 0.0 {
        return Some((a[0], a[2]));
    }
    let s = (v - a[1]) / (b[1] - a[1]);
    Some((a[0] + s * (b[0] - a[0]), a[2] + s * (b[2] - a[2])))
}

fn local_slope(pts: &[[f64; 3]], v: f64) -> f64 {
    let h = 1e-6 * (1.0 + v.abs());
    match (interp_graph(pts, v - h), interp_graph(pts, v + h)) {
        (Some((_, qa)), Some((_, qb))) => (qb - qa) / (2.0 * h),
        _ => f64::NAN,
    }
}

/// Construct the slow orbits for the regime. Weak/intermediate locate the
/// transversal intersection of the projected manifolds; strong pins v* = V⁺
/// and puts the whole slow passage on the minus branch.
pub fn reduced_slow_orbits(model: &dyn ReactionModel, regime: &RegimeParams) -> Result<SlowOrbits> {
    let (minus, plus) = crate::kinetics::bistable_pair(model)?;
    let span = minus.v - plus.v;
    if span <= 0.0 {
        return Err(Error::numerics("bistable pair does not satisfy V- > V+"));
    }
    let window = (1e-12, minus.v + 2.0 * span + 1.0);
    let branches = model.nullcline_branches(window);
    let bm = branch_for(&branches, &minus)?;
    let bp = branch_for(&branches, &plus)?;

    if regime.regime == Regime::Strong {
        return strong_orbits(model, &minus, &plus, bm);
    }

    let r_bar = regime.r_bar;
    let tau_form = r_bar > TAU_SWITCH;
    // saddle rates in the working variables
    let km = bm.kappa(model, minus.v);
    let kp = bp.kappa(model, plus.v);
    if km >= 0.0 || kp >= 0.0 {
        return Err(Error::numerics(format!("saddle condition failed: kappa- = {km:.3e}, kappa+ = {kp:.3e}")));
    }
    let (s_unstable, s_stable) = if tau_form {
        let db2 = 1.0 / (r_bar * r_bar);
        (
            (-1.0 + (1.0 - 4.0 * db2 * km).sqrt()) / 2.0,
            (-1.0 - (1.0 - 4.0 * db2 * kp).sqrt()) / 2.0,
        )
    } else {
        (
            (-r_bar + (r_bar * r_bar - 4.0 * km).sqrt()) / 2.0,
            (-r_bar - (r_bar * r_bar - 4.0 * kp).sqrt()) / 2.0,
        )
    };

    // seeds on the linear eigenvectors at distance 1e-7, oriented toward the
    // jump region (v decreasing from V-, v above V+ with q < 0)
    let d = SEED_DIST * span.max(1.0);
    let (seed_m, seed_p, q_cap, t_cap) = if tau_form {
        // eigenvectors of [[0, 1/r̄²], [-κ, -1]]: (1, r̄² s)
        let em = [minus.v - d, -d * r_bar * r_bar * s_unstable];
        let ep = [plus.v + d, d * r_bar * r_bar * s_stable];
        let gmax = span * (km.abs().max(kp.abs()) + 1.0) * 4.0;
        (em, ep, gmax.max(1e3), 200.0 + 40.0 / s_unstable.min(-s_stable).abs())
    } else {
        let em = [minus.v - d, -d * s_unstable];
        let ep = [plus.v + d, d * s_stable];
        let qm = span * (r_bar + (km.abs().max(kp.abs())).sqrt() + 1.0) * 4.0;
        (em, ep, qm, 200.0 + 40.0 / s_unstable.min(-s_stable).abs())
    };
    let rb = (r_bar, tau_form);
    let curve_m = orbit_graph(model, bm, rb, seed_m, false, plus.v - 0.3 * span, q_cap, t_cap)?;
    let curve_p = orbit_graph(model, bp, rb, seed_p, true, minus.v + 0.3 * span, q_cap, t_cap)?;

    // overlap in v and sign change of q_u(v) - q_s(v)
    let v_lo = curve_m.last().unwrap()[1].max(plus.v);
    let v_hi = curve_p.last().unwrap()[1].min(minus.v);
    if v_lo >= v_hi {
        return Err(Error::numerics("slow manifolds do not overlap in v: Assumption 4 fails"));
    }
    let nscan = 4000;
    let dv = (v_hi - v_lo) / nscan as f64;
    let delta_q = |v: f64| -> Option<f64> {
        let (_, qu) = interp_graph(&curve_m, v)?;
        let (_, qs) = interp_graph(&curve_p, v)?;
        Some(qu - qs)
    };
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=nscan {
        let v = v_lo + dv * i as f64;
        if let Some(dq) = delta_q(v) {
            if let Some((vp, dqp)) = prev {
                if dq == 0.0 || dq.signum() != dqp.signum() {
                    bracket = Some((vp, v));
                    break;
                }
            }
            prev = Some((v, dq));
        }
    }
    let (mut a, mut b) = bracket.ok_or_else(|| {
        Error::numerics("no transversal intersection of the slow manifolds found: Assumption 4 fails")
    })?;
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        let da = delta_q(a).unwrap();
        let dm = delta_q(mid).unwrap();
        if dm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if dm.signum() == da.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    let v_star = 0.5 * (a + b);
    let (t_hit_m, q_star) = interp_graph(&curve_m, v_star).unwrap();
    let (t_hit_p, _) = interp_graph(&curve_p, v_star).unwrap();

    let slope_u = local_slope(&curve_m, v_star);
    let slope_s = local_slope(&curve_p, v_star);
    let angle = (slope_u.atan() - slope_s.atan()).abs();
    if !angle.is_finite() || angle < TANGENT_MARGIN {
        return Err(Error::numerics(format!("tangential intersection: transversality margin {angle:.3e}")));
    }

    // reparameterize: minus piece on t ∈ [-t_hit, 0], plus on [0, t_hit]
    let mut minus_pts: Vec<[f64; 3]> = curve_m
        .iter()
        .take_while(|p| p[0] <= t_hit_m)
        .map(|p| [p[0] - t_hit_m, p[1], p[2]])
        .collect();
    minus_pts.push([0.0, v_star, q_star]);
    let mut plus_pts: Vec<[f64; 3]> = vec![[0.0, v_star, q_star]];
    for p in curve_p.iter().take_while(|p| p[0] <= t_hit_p).collect::<Vec<_>>().iter().rev() {
        plus_pts.push([t_hit_p - p[0], p[1], p[2]]);
    }

    let scaling = if tau_form { SlowScaling::Tau { r_bar } } else { SlowScaling::Zeta { r_bar } };
    Ok(SlowOrbits {
        scaling,
        v_star,
        q_star,
        minus: minus_pts,
        plus: plus_pts,
        transversality_angle: angle,
        rate_minus: s_unstable,
        rate_plus: s_stable,
        v_minus: minus.v,
        v_plus: plus.v,
    })
}

fn strong_orbits(
    model: &dyn ReactionModel,
    minus: &SteadyState,
    plus: &SteadyState,
    bm: &NullclineBranch,
) -> Result<SlowOrbits> {
    let span = minus.v - plus.v;
    // traversal condition (Assumption 5, orientation-consistent form): -G
    // must carry v from V- down to V+, i.e. G(f-(v), v) > 0 inside the segment
    let nchk = 200;
    for i in 1..nchk {
        let v = plus.v + span * i as f64 / nchk as f64;
        let g = model.g(bm.u(v), v);
        if g * span.signum() <= 0.0 {
            return Err(Error::numerics(format!(
                "strong-regime traversal fails: G(f-(v), v) = {g:.3e} at v = {v:.6} does not drive v from V- to V+"
            )));
        }
    }
    let d = SEED_DIST * span.max(1.0);
    let mut pts: Vec<[f64; 3]> = Vec::new();
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, h_init: 1e-6, h_max: 5.0, ..Default::default() };
    let mut hit_t = None;
    integrate(
        |_t, y: &[f64; 1]| [-model.g(bm.u(y[0]), y[0])],
        0.0,
        [minus.v - d],
        1e6,
        &opts,
        |st| {
            let nsub = 4;
            for k in 1..=nsub {
                let t = st.t0 + (st.t1 - st.t0) * k as f64 / nsub as f64;
                let y = if k == nsub { st.y1 } else { st.eval(t) };
                let g = model.g(bm.u(y[0]), y[0]);
                pts.push([t, y[0], -g]);
            }
            if st.y1[0] <= plus.v {
                hit_t = Some(st.t1);
                return Control::Stop;
            }
            Control::Continue
        },
    )?;
    let t_hit = hit_t.ok_or_else(|| Error::numerics("strong-regime slow passage never reaches V+"))?;
    let mut minus_pts: Vec<[f64; 3]> = pts.iter().take_while(|p| p[0] <= t_hit).map(|p| [p[0] - t_hit, p[1], p[2]]).collect();
    let g_at_vplus = model.g(bm.u(plus.v), plus.v);
    minus_pts.push([0.0, plus.v, -g_at_vplus]);
    // stable manifold of v = V+ on the plus branch is trivial
    let plus_pts = vec![[0.0, plus.v, 0.0], [1.0, plus.v, 0.0]];
    let km = bm.kappa(model, minus.v);
    Ok(SlowOrbits {
        scaling: SlowScaling::Eta,
        v_star: plus.v,
        q_star: -g_at_vplus,
        minus: minus_pts,
        plus: plus_pts,
        transversality_angle: std::f64::consts::FRAC_PI_2,
        rate_minus: -km,
        rate_plus: f64::NEG_INFINITY,
        v_minus: minus.v,
        v_plus: plus.v,
    })
}

impl SlowOrbits {
    /// The weighted slow integral S(r̄) = ∫ e^{r̄ζ} (v_ζ)² dζ over both
    /// pieces (ζ-variables), with analytic saddle tails beyond the stored
    /// window. Errors when the weight outruns the decay on the plus side.
    pub fn s_weighted(&self) -> Result<f64> {
        match self.scaling {
            SlowScaling::Eta => Err(Error::numerics("S(r̄) is a weak/intermediate quantity, not defined at Eta scaling")),
            SlowScaling::Zeta { r_bar } => self.s_weighted_scaled(r_bar, 1.0),
            SlowScaling::Tau { r_bar } => {
                // S = r̄ T with T = ∫ e^τ (v_τ)² dτ and v_τ = q̃ / r̄²
                self.s_weighted_scaled(1.0, 1.0 / (r_bar * r_bar)).map(|t| t * r_bar)
            }
        }
    }

    fn s_weighted_scaled(&self, w_rate: f64, q_to_vdot: f64) -> Result<f64> {
        let decay_plus = w_rate + 2.0 * self.rate_plus;
        if decay_plus >= 0.0 {
            return Err(Error::numerics(format!(
                "S(r̄) diverges: weight rate {w_rate:.3e} vs plus-side decay {:.3e}",
                2.0 * self.rate_plus
            )));
        }
        let mut s = 0.0;
        for piece in [&self.minus, &self.plus] {
            for w in piece.windows(2) {
                let (a, b) = (w[0], w[1]);
                let fa = (w_rate * a[0]).exp() * (a[2] * q_to_vdot).powi(2);
                let fb = (w_rate * b[0]).exp() * (b[2] * q_to_vdot).powi(2);
                s += 0.5 * (b[0] - a[0]) * (fa + fb);
            }
        }
        // saddle tails: q ~ e^{s_unstable ζ} (ζ → -∞), q ~ e^{s_stable ζ} (ζ → +∞)
        let first = self.minus.first().unwrap();
        let qa = first[2] * q_to_vdot;
        s += qa * qa * (w_rate * first[0]).exp() / (w_rate + 2.0 * self.rate_minus);
        let last = self.plus.last().unwrap();
        let qb = last[2] * q_to_vdot;
        s += -qb * qb * (w_rate * last[0]).exp() / decay_plus;
        Ok(s)
    }

    /// Jump-level continuity data (v and q agree across the jump by
    /// construction; exposed for the invariant tests).
    pub fn continuity(&self) -> (f64, f64, f64, f64) {
        let m = self.minus.last().unwrap();
        let p = self.plus.first().unwrap();
        (m[1], p[1], m[2], p[2])
    }
}

/// The q̃ boundary-layer profile of the strong regime on the layer grid:
/// q̃(ξ) = -r ∫_{-∞}^{ξ} e^{-r(ξ-s)} G(u*(s), v*) ds, computed with an
/// exponential trapezoidal rule (exact for linear G along each cell).
pub fn qtilde_profile(layer: &LayerFront, model: &dyn ReactionModel, r: f64) -> Vec<f64> {
    let n = layer.xi.len();
    let g: Vec<f64> = layer.u.iter().map(|&u| model.g(u, layer.v_star)).collect();
    let mut q = vec![0.0; n];
    q[0] = -g[0];
    for i in 0..n - 1 {
        let h = layer.xi[i + 1] - layer.xi[i];
        let z = r * h;
        let ez = (-z).exp();
        // ∫_0^h e^{-r(h-s)} ds and ∫_0^h e^{-r(h-s)} s/h ds
        let (i0, i1) = if z > 1e-6 {
            ((1.0 - ez) / r, ((z - 1.0) + ez) / (r * r * h))
        } else {
            (h * (1.0 - 0.5 * z), h * (0.5 - z / 3.0))
        };
        q[i + 1] = ez * q[i] - r * (g[i] * (i0 - i1) + g[i + 1] * i1);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::KlausmeierModel;
    use crate::singular::regime::classify_regime;

    fn model() -> KlausmeierModel {
        KlausmeierModel::new(0.1, 0.1, 2.0).unwrap()
    }

    #[test]
    fn minus_orbit_is_exact_eigenline_for_klausmeier() {
        // On S- the reduced flow is linear (G = mu3 - v), so L^u_- is the
        // line q = s_+ (v - mu3) for every r̄.
        let m = model();
        for nu in [0.0, 500.0, 800.0] {
            let reg = classify_regime(1e-3, nu, 0.05).unwrap();
            let so = reduced_slow_orbits(&m, &reg).unwrap();
            let s_plus = (-reg.r_bar + (reg.r_bar * reg.r_bar + 4.0).sqrt()) / 2.0;
            for p in so.minus.iter().step_by(50) {
                let expect = s_plus * (p[1] - 2.0);
                assert!((p[2] - expect).abs() < 1e-6, "nu={nu}: q {} vs line {}", p[2], expect);
            }
        }
    }

    #[test]
    fn conservative_intersection_matches_energy_balance() {
        // r̄ = 0: the jump level solves (mu3 - v*)² = 2 (W(V+) - W(v*)) with
        // W' = G(f+(v), v); reference value from the energy-balance oracle.
        let m = model();
        let reg = classify_regime(1e-3, 0.0, 0.05).unwrap();
        let so = reduced_slow_orbits(&m, &reg).unwrap();
        assert!((so.v_star - 0.218188).abs() < 1e-4, "v* = {}", so.v_star);
        assert!((so.q_star - (so.v_star - 2.0)).abs() < 1e-6, "q* on the eigenline");
        let (vm, vp, qm, qp) = so.continuity();
        assert!((vm - vp).abs() < 1e-10 && (qm - qp).abs() < 1e-7);
    }

    #[test]
    fn transversality_margin_and_smooth_dependence() {
        let m = model();
        let reg0 = classify_regime(1e-3, 1000.0, 0.05).unwrap();
        let so0 = reduced_slow_orbits(&m, &reg0).unwrap();
        assert!(so0.transversality_angle > 1e-3);
        // perturb r̄ by 1%: (v*, q*) moves by O(1%)
        let reg1 = classify_regime(1e-3, 1010.0, 0.05).unwrap();
        let so1 = reduced_slow_orbits(&m, &reg1).unwrap();
        let dv = (so1.v_star - so0.v_star).abs() / so0.v_star;
        assert!(dv > 0.0 && dv < 0.05, "relative move {dv}");
    }

    #[test]
    fn intermediate_limit_v_star_approaches_v_plus() {
        let m = model();
        let (_, plus) = crate::kinetics::bistable_pair(&m).unwrap();
        let reg = classify_regime(1e-3, 4.0e4, 0.05).unwrap(); // r̄ = 40, τ-form
        assert!(matches!(reg.regime, Regime::Intermediate));
        let so = reduced_slow_orbits(&m, &reg).unwrap();
        assert!(matches!(so.scaling, SlowScaling::Tau { .. }));
        // v* = V+ + O(δ̄²)
        let db2 = reg.delta_bar * reg.delta_bar;
        assert!((so.v_star - plus.v).abs() < 20.0 * db2 * plus.v.max(1.0), "v* - V+ = {}", so.v_star - plus.v);
        assert!(so.v_star > plus.v);
    }

    #[test]
    fn s_weighted_continuous_across_scaling_switch_and_at_zero() {
        let m = model();
        // continuity of S(r̄) as r̄ -> 0 (ν = 0 corresponds to r̄ = 0)
        let s0 = reduced_slow_orbits(&m, &classify_regime(1e-3, 0.0, 0.05).unwrap()).unwrap().s_weighted().unwrap();
        let s1 = reduced_slow_orbits(&m, &classify_regime(1e-3, 1.0, 0.05).unwrap()).unwrap().s_weighted().unwrap();
        assert!((s0 - s1).abs() < 2e-3 * s0, "S(0) = {s0}, S(0.001) = {s1}");
        // ζ-form vs τ-form give the same S(r̄) near the switch
        let sa = reduced_slow_orbits(&m, &classify_regime(1e-3, 3.1e4, 0.05).unwrap()).unwrap();
        let sb = reduced_slow_orbits(&m, &classify_regime(1e-3, 3.3e4, 0.05).unwrap()).unwrap();
        assert!(matches!(sa.scaling, SlowScaling::Zeta { .. }));
        assert!(matches!(sb.scaling, SlowScaling::Tau { .. }));
        let (wa, wb) = (sa.s_weighted().unwrap(), sb.s_weighted().unwrap());
        // S ~ r̄^-3 here, so compare r̄³ S across the nearby points
        let (ra, rb) = (31.0f64, 33.0f64);
        let (ca, cb) = (wa * ra.powi(3), wb * rb.powi(3));
        assert!((ca - cb).abs() < 0.05 * ca.abs(), "r̄³S: {ca} vs {cb}");
    }

    #[test]
    fn strong_regime_pins_jump_at_v_plus() {
        let m = model();
        let reg = classify_regime(1e-3, 1e5, 0.05).unwrap();
        assert!(matches!(reg.regime, Regime::Strong));
        let (minus, plus) = crate::kinetics::bistable_pair(&m).unwrap();
        let so = reduced_slow_orbits(&m, &reg).unwrap();
        assert_eq!(so.v_star, plus.v);
        // exact solution on S-: v(η) = mu3 + (V+ - mu3) e^η for η ≤ 0
        for p in so.minus.iter().step_by(40) {
            let expect = 2.0 + (plus.v - 2.0) * p[0].exp();
            assert!((p[1] - expect).abs() < 1e-5, "v({}) = {} vs {}", p[0], p[1], expect);
        }
        assert!((so.minus.first().unwrap()[1] - minus.v).abs() < 1e-4);
    }

    #[test]
    fn strong_qtilde_solves_its_ode_pointwise() {
        let m = model();
        let (_, plus) = crate::kinetics::bistable_pair(&m).unwrap();
        let layer = crate::singular::layer::solve_layer_front(&m, plus.v, 0.0).unwrap();
        let r = 0.1;
        let q = qtilde_profile(&layer, &m, r);
        // 4th-order central differences vs q̃' = -r (q̃ + G)
        let h = layer.xi[1] - layer.xi[0];
        let mut worst = 0.0f64;
        for i in 2..layer.xi.len() - 2 {
            let dq = (-q[i + 2] + 8.0 * q[i + 1] - 8.0 * q[i - 1] + q[i - 2]) / (12.0 * h);
            let rhs = -r * (q[i] + m.g(layer.u[i], layer.v_star));
            worst = worst.max((dq - rhs).abs());
        }
        assert!(worst < 1e-8, "pointwise residual {worst}");
        // r -> large limit: q̃ -> -G(u*, v*)
        let qbig = qtilde_profile(&layer, &m, 500.0);
        let mid = layer.xi.len() / 2;
        let g_mid = m.g(layer.u[mid], layer.v_star);
        assert!((qbig[mid] + g_mid).abs() < 0.05 * g_mid.abs().max(0.1), "delta-kernel limit");
    }
}
