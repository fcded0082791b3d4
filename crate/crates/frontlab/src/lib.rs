//! Construction and transverse stability of planar traveling fronts in
//! two-component reaction-diffusion-advection systems
//!
//! ```text
//! U_t = ΔU + F(U,V)
//! V_t = (1/δ²)ΔV + G(U,V) + ν V_x
//! ```
//!
//! with widely separated diffusivities (0 < δ ≪ 1) and an advection
//! coefficient ν ≥ 0 that may be small or large relative to δ. The crate
//! builds bistable fronts between stable homogeneous states, computes the
//! long-wavelength transverse stability coefficient λ_c,2 both from the
//! adjoint solvability quotient and from a direct eigenvalue solve, evaluates
//! the slow/fast asymptotic criteria in the weak/intermediate/strong
//! advection regimes, and simulates the resulting 2D interface dynamics in a
//! comoving frame.
//!
//! Entry points, in pipeline order:
//! - [`kinetics`]: reaction models (generic trait + modified Klausmeier),
//!   nullcline branches, homogeneous steady states.
//! - [`equilibria`]: dispersion relation and stability of the homogeneous
//!   states under (k, ℓ) perturbations.
//! - [`singular`]: slow/fast skeleton — layer heteroclinic, reduced slow
//!   orbits, weighted integrals, asymptotic λ_c,2 and the ν ~ δ^(-4/3) onset.
//! - [`front`]: collocation solution of the traveling-wave BVP at finite
//!   (δ, ν) with parameter continuation.
//! - [`spectral`]: adjoint kernel, exact λ_c,2 quotient, eigenvalue oracle,
//!   and the λ_c,2 = 0 contour in the (δ, ν) plane.
//! - [`sim2d`]: IMEX finite-difference simulation of the full 2D system with
//!   interface diagnostics.
//! - [`config`] / [`output`] / [`acceptance`]: run configuration, serialized
//!   artifacts, and the validation suite behind `frontlab validate`.

pub mod acceptance;
pub mod band;
pub mod config;
pub mod equilibria;
pub mod front;
pub mod kinetics;
pub mod mesh;
pub mod ode;
pub mod output;
pub mod quartic;
pub mod singular;
pub mod sim2d;
pub mod spectral;

mod error;

pub use error::{Error, Result};

/// Build the global rayon pool from the `FRONTLAB_WORKERS` environment
/// variable. Call once at process start; later calls are no-ops. Results of
/// every operation in this crate are identical for any worker count.
pub fn init_workers() {
    if let Ok(s) = std::env::var("FRONTLAB_WORKERS") {
        if let Ok(n) = s.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
