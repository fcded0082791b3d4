//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)).
//!
//! Used for phase-plane shooting and slow-manifold orbits, where the right
//! hand sides are cheap and smooth and tolerances down to ~1e-13 are needed.
//! The integrator hands every accepted step to an observer together with the
//! endpoint derivatives, so callers can sample densely (cubic Hermite) or
//! stop on events.

use crate::{Error, Result};

/// Integration controls. `rtol`/`atol` enter the standard mixed error norm.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-14, h_init: 1e-4, h_max: 1.0, max_steps: 2_000_000 }
    }
}

/// One accepted step with endpoint derivatives (cubic Hermite data).
#[derive(Clone, Copy, Debug)]
pub struct Step<const D: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; D],
    pub y1: [f64; D],
    pub f0: [f64; D],
    pub f1: [f64; D],
}

impl<const D: usize> Step<D> {
    /// Cubic Hermite interpolant on [t0, t1].
    pub fn eval(&self, t: f64) -> [f64; D] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let mut out = [0.0; D];
        for i in 0..D {
            out[i] = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
        out
    }
}

/// Observer verdict after each accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order weights equal the last A row (FSAL); these are the embedded
// 4th-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate y' = f(t, y) from (t0, y0) to t_end (t_end may be < t0).
/// The observer sees each accepted step and may stop the run; the return
/// value is the final (t, y) reached.
pub fn integrate<const D: usize>(
    mut f: impl FnMut(f64, &[f64; D]) -> [f64; D],
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    opts: &OdeOptions,
    mut observer: impl FnMut(&Step<D>) -> Control,
) -> Result<(f64, [f64; D])> {
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = opts.h_init.min(opts.h_max).min((t_end - t0).abs().max(1e-300)) * dir;
    if h == 0.0 {
        return Ok((t, y));
    }
    let mut ks = [[0.0; D]; 7];
    for _step in 0..opts.max_steps {
        if (t - t_end) * dir >= 0.0 {
            return Ok((t, y));
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        ks[0] = k1;
        for s in 0..6 {
            let mut ys = y;
            for i in 0..D {
                let mut acc = 0.0;
                for (j, kj) in ks.iter().enumerate().take(s + 1) {
                    acc += A[s][j] * kj[i];
                }
                ys[i] += h * acc;
            }
            ks[s + 1] = f(t + C[s] * h, &ys);
        }
        // 5th-order solution and embedded error estimate
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..D {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for j in 0..7 {
                let a5 = if j < 6 { A[5][j] } else { 0.0 };
                acc5 += a5 * ks[j][i];
                acc4 += B4[j] * ks[j][i];
            }
            y5[i] += h * acc5;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            let e = h * (acc5 - acc4) / sc;
            err += e * e;
        }
        err = (err / D as f64).sqrt();
        if err <= 1.0 {
            let step = Step { t0: t, t1: t + h, y0: y, y1: y5, f0: ks[0], f1: ks[6] };
            t += h;
            y = y5;
            k1 = ks[6]; // FSAL
            if observer(&step) == Control::Stop {
                return Ok((t, y));
            }
        }
        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h = (h * fac).clamp(-opts.h_max, opts.h_max);
        if h.abs() < 1e-15 * (1.0 + t.abs()) {
            return Err(Error::numerics(format!("step size underflow at t = {t}")));
        }
    }
    Err(Error::numerics("ODE step budget exhausted"))
}
