//! The fast layer heteroclinic: u'' + c u' + F(u, v*) = 0 connecting the
//! branches u⁻ = f⁻(v*) and u⁺ = f⁺(v*) at the jump level v*.
//!
//! Both endpoints are saddles of the (u, p) phase flow. The connection is
//! found by shooting in the u-parameterization dp/du = (-c p - F)/p from the
//! unstable manifold of the left saddle onto the stable manifold of the
//! right one, with a secant/bisection iteration in the wave speed c. The
//! weighted integrals F*, N* carry the e^{c ξ} adjoint weight and are
//! completed with analytic exponential tails beyond the stored window.

use serde::Serialize;

use crate::kinetics::ReactionModel;
use crate::ode::{integrate, Control, OdeOptions, Step};
use crate::{Error, Result};

/// Fast heteroclinic profile at jump level `v_star` with speed `c_star`.
#[derive(Clone, Debug, Serialize)]
pub struct LayerFront {
    pub v_star: f64,
    pub c_star: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    /// Unstable spatial rate at the left saddle (> 0).
    pub rate_left: f64,
    /// Stable spatial rate at the right saddle (< 0).
    pub rate_right: f64,
    /// Profile nodes ξ (uniform, ξ = 0 at u = (u⁻+u⁺)/2).
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Collocation residual of the stored profile (max over cells).
    pub residual: f64,
}

/// Weighted layer quantities: F* = ∫ F_v e^{cξ} u' dξ, G* = [G]_-^+,
/// N* = ∫ e^{cξ} (u')² dξ.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WeightedIntegrals {
    pub f_star: f64,
    pub g_star: f64,
    pub n_star: f64,
}

fn saddle_rates(model: &dyn ReactionModel, u: f64, v: f64, c: f64) -> (f64, f64) {
    // roots of s² + c s + F_u = 0 with F_u < 0: one positive, one negative
    let fu = model.jacobian(u, v).f_u;
    let disc = (c * c - 4.0 * fu).sqrt();
    ((-c + disc) / 2.0, (-c - disc) / 2.0)
}

fn f_uu(model: &dyn ReactionModel, u: f64, v: f64) -> f64 {
    let h = 1e-6 * u.abs().max(1.0);
    (model.jacobian(u + h, v).f_u - model.jacobian(u - h, v).f_u) / (2.0 * h)
}

/// Shooting miss function at speed c. Positive = overshoot (arrives above the
/// stable manifold), negative = undershoot (p collapses before reaching u⁺).
/// Optionally records the trajectory steps of the (p, ξ) integration.
fn shoot(
    model: &dyn ReactionModel,
    v: f64,
    um: f64,
    up: f64,
    c: f64,
    eps: f64,
    steps: Option<&mut Vec<(f64, Step<2>)>>,
) -> Result<f64> {
    let (s_u, _) = saddle_rates(model, um, v, c);
    // unstable-manifold expansion p = s(u-u⁻) + b(u-u⁻)² seeds the start
    let b = -f_uu(model, um, v) / (2.0 * (3.0 * s_u + c));
    let u0 = um + eps;
    let p0 = s_u * eps + b * eps * eps;
    let amp = up - um;
    let p_cap = 100.0 * s_u.abs().max(1.0) * amp.abs();
    let mut collapsed: Option<f64> = None;
    let mut blew_up = false;
    let mut collector = steps;
    let opts = OdeOptions { rtol: 1e-13, atol: 1e-14, h_init: eps, h_max: amp.abs() / 16.0, ..Default::default() };
    let (u_end, y_end) = integrate(
        |u, y: &[f64; 2]| {
            let p = y[0];
            [(-c * p - model.f(u, v)) / p, 1.0 / p]
        },
        u0,
        [p0, 0.0],
        up - eps,
        &opts,
        |st| {
            if let Some(ref mut v) = collector {
                v.push((st.t0, *st));
            }
            if st.y1[0] <= 1e-12 * amp.abs() {
                collapsed = Some(st.t1);
                return Control::Stop;
            }
            if st.y1[0].abs() > p_cap {
                blew_up = true;
                return Control::Stop;
            }
            Control::Continue
        },
    )?;
    if blew_up {
        // left the phase-plane window upward: certainly above the manifold
        return Ok(p_cap);
    }
    if let Some(u_hit) = collapsed {
        // fell back to p = 0 before the far branch: signed undershoot
        return Ok(-(up - eps - u_hit).abs());
    }
    let (_, s_s) = saddle_rates(model, up, v, c);
    let bs = -f_uu(model, up, v) / (2.0 * (3.0 * s_s + c));
    let e = u_end - up;
    let p_manifold = s_s * e + bs * e * e;
    Ok(y_end[0] - p_manifold)
}

/// Solve the layer problem at jump level `v_star` between the branches
/// carrying the bistable states. `c_guess` centers the speed bracket.
pub fn solve_layer_front(model: &dyn ReactionModel, v_star: f64, c_guess: f64) -> Result<LayerFront> {
    let (minus, plus) = crate::kinetics::bistable_pair(model)?;
    let window = (v_star.min(minus.v.min(plus.v)) * 0.5, v_star.max(minus.v.max(plus.v)) * 1.5 + 1.0);
    let branches = model.nullcline_branches(window);
    let locate = |label: &str| -> Result<f64> {
        let b = branches
            .iter()
            .find(|b| b.label == label && b.contains(v_star))
            .ok_or_else(|| Error::numerics(format!("branch {label} undefined at v* = {v_star}")))?;
        Ok(b.u(v_star))
    };
    let um = locate(&minus.branch)?;
    let up = locate(&plus.branch)?;
    for (u, who) in [(um, "f-(v*)"), (up, "f+(v*)")] {
        let fu = model.jacobian(u, v_star).f_u;
        if fu >= 0.0 {
            return Err(Error::numerics(format!("{who} is not a hyperbolic saddle (F_u = {fu:.3e} >= 0)")));
        }
    }
    let amp = up - um;
    let eps = 1e-9 * amp.abs();
    let miss = |c: f64| shoot(model, v_star, um, up, c, eps, None);

    // bracket a sign change around the guess, then bisect to 1e-12
    let scale = c_guess.abs().max(0.5);
    let mut lo = c_guess;
    let mut flo = miss(lo)?;
    let mut hi = lo;
    let mut fhi = flo;
    let mut found = false;
    'outer: for k in 1..=60 {
        let d = 0.05 * scale * k as f64;
        for cand in [c_guess - d, c_guess + d] {
            let f = miss(cand)?;
            if f.signum() != flo.signum() {
                hi = cand;
                fhi = f;
                found = true;
                break 'outer;
            }
            // keep the closest same-sign endpoint as lo
            if (cand - c_guess).abs() < (lo - c_guess).abs() || k == 1 {
                lo = cand;
                flo = f;
            }
        }
    }
    if !found {
        return Err(Error::numerics(format!(
            "layer shooting: no sign change of the miss function near c = {c_guess} (v* = {v_star})"
        )));
    }
    for _ in 0..200 {
        if (hi - lo).abs() < 1e-12 {
            break;
        }
        // secant candidate, safeguarded by bisection
        let mut mid = hi - fhi * (hi - lo) / (fhi - flo);
        if !mid.is_finite() || (mid - lo).signum() == (mid - hi).signum() {
            mid = 0.5 * (lo + hi);
        }
        let fm = miss(mid)?;
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    let c_star = 0.5 * (lo + hi);

    // final pass storing the trajectory, then resample onto a uniform ξ grid
    let mut steps: Vec<(f64, Step<2>)> = Vec::new();
    let _ = shoot(model, v_star, um, up, c_star, eps, Some(&mut steps))?;
    if steps.is_empty() {
        return Err(Error::numerics("layer shooting stored no trajectory"));
    }
    let (s_u, _) = saddle_rates(model, um, v_star, c_star);
    let (_, s_s) = saddle_rates(model, up, v_star, c_star);

    // ξ at the profile midpoint defines the phase anchor
    let u_mid = 0.5 * (um + up);
    let xi_of = |u_t: f64, steps: &[(f64, Step<2>)]| -> f64 {
        for (_, st) in steps {
            let (a, b) = (st.t0, st.t1);
            if (u_t - a) * (u_t - b) <= 0.0 {
                return st.eval(u_t)[1];
            }
        }
        steps.last().unwrap().1.y1[1]
    };
    let xi_mid = xi_of(u_mid, &steps);
    let xi_first = steps.first().unwrap().1.y0[1] - xi_mid;
    let xi_last = steps.last().unwrap().1.y1[1] - xi_mid;

    let rate = s_u.abs().max(s_s.abs());
    let h = 1.0 / (200.0 * rate);
    let n = (((xi_last - xi_first) / h).ceil() as usize + 1).clamp(100, 400_000);
    let h = (xi_last - xi_first) / (n - 1) as f64;
    let mut xi = Vec::with_capacity(n);
    let mut uu = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    // invert ξ(u) per step with Newton on the Hermite interpolant
    let mut k_step = 0usize;
    for i in 0..n {
        let x_t = xi_first + h * i as f64 + xi_mid; // unshifted
        while k_step + 1 < steps.len() && steps[k_step].1.y1[1] < x_t {
            k_step += 1;
        }
        let st = &steps[k_step].1;
        let mut u_t = st.t0 + (st.t1 - st.t0) * ((x_t - st.y0[1]) / (st.y1[1] - st.y0[1])).clamp(0.0, 1.0);
        for _ in 0..8 {
            let val = st.eval(u_t);
            let err = val[1] - x_t;
            if err.abs() < 1e-14 * (1.0 + x_t.abs()) {
                break;
            }
            u_t -= err * val[0]; // dξ/du = 1/p
            u_t = u_t.clamp(st.t0.min(st.t1), st.t0.max(st.t1));
        }
        let p_t = st.eval(u_t)[0];
        xi.push(x_t - xi_mid);
        uu.push(u_t);
        du.push(p_t);
    }

    // collocation residual of the stored profile (Hermite-Simpson defect/h)
    let mut residual = 0.0f64;
    for i in 0..n - 1 {
        let f0 = -c_star * du[i] - model.f(uu[i], v_star);
        let f1 = -c_star * du[i + 1] - model.f(uu[i + 1], v_star);
        let um_ = 0.5 * (uu[i] + uu[i + 1]) + h / 8.0 * (du[i] - du[i + 1]);
        let pm_ = 0.5 * (du[i] + du[i + 1]) + h / 8.0 * (f0 - f1);
        let fm_ = -c_star * pm_ - model.f(um_, v_star);
        let ru = uu[i + 1] - uu[i] - h / 6.0 * (du[i] + 4.0 * pm_ + du[i + 1]);
        let rp = du[i + 1] - du[i] - h / 6.0 * (f0 + 4.0 * fm_ + f1);
        residual = residual.max(ru.abs().max(rp.abs()) / h);
    }

    Ok(LayerFront {
        v_star,
        c_star,
        u_minus: um,
        u_plus: up,
        rate_left: s_u,
        rate_right: s_s,
        xi,
        u: uu,
        du,
        residual,
    })
}

/// F*, G*, N* with analytic exponential tail completion. Errors when the
/// e^{cξ} weight outruns the profile decay (non-integrable combination).
pub fn weighted_integrals(layer: &LayerFront, model: &dyn ReactionModel) -> Result<WeightedIntegrals> {
    let c = layer.c_star;
    let v = layer.v_star;
    let (su, ss) = (layer.rate_left, layer.rate_right);
    for (rate, name) in [(c + su, "c + s_u"), (c + 2.0 * su, "c + 2 s_u")] {
        if rate <= 0.0 {
            return Err(Error::numerics(format!("weighted integral diverges at -inf: {name} = {rate:.3e} <= 0")));
        }
    }
    for (rate, name) in [(c + ss, "c + s_s"), (c + 2.0 * ss, "c + 2 s_s")] {
        if rate >= 0.0 {
            return Err(Error::numerics(format!("weighted integral diverges at +inf: {name} = {rate:.3e} >= 0")));
        }
    }
    let n = layer.xi.len();
    let mut f_int = 0.0;
    let mut n_int = 0.0;
    for i in 0..n - 1 {
        let h = layer.xi[i + 1] - layer.xi[i];
        let w0 = (c * layer.xi[i]).exp();
        let w1 = (c * layer.xi[i + 1]).exp();
        let fv0 = model.jacobian(layer.u[i], v).f_v;
        let fv1 = model.jacobian(layer.u[i + 1], v).f_v;
        f_int += 0.5 * h * (fv0 * w0 * layer.du[i] + fv1 * w1 * layer.du[i + 1]);
        n_int += 0.5 * h * (w0 * layer.du[i] * layer.du[i] + w1 * layer.du[i + 1] * layer.du[i + 1]);
    }
    // tails: u' is a pure exponential beyond the window
    let (x0, xn) = (layer.xi[0], layer.xi[n - 1]);
    let (p0, pn) = (layer.du[0], layer.du[n - 1]);
    let fvm = model.jacobian(layer.u_minus, v).f_v;
    let fvp = model.jacobian(layer.u_plus, v).f_v;
    f_int += fvm * p0 * (c * x0).exp() / (c + su);
    f_int += -fvp * pn * (c * xn).exp() / (c + ss);
    n_int += p0 * p0 * (c * x0).exp() / (c + 2.0 * su);
    n_int += -pn * pn * (c * xn).exp() / (c + 2.0 * ss);
    let g_star = model.g(layer.u_plus, v) - model.g(layer.u_minus, v);
    Ok(WeightedIntegrals { f_star: f_int, g_star, n_star: n_int })
}
