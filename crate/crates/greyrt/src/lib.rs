//! Grey radiative-transfer diffusion-limit toolkit.
//!
//! The crate solves the stationary grey radiative-transfer problem in the
//! optically thick regime on convex bodies and exposes the machinery needed
//! to study its diffusion limit:
//!
//! * [`specfun`] — the normalized exponential-integral kernel
//!   `K(x) = E1(|x|)/2` together with its closed-form integral identities,
//!   used by every solver in the crate.
//! * [`geometry`] — convex-domain oracle (ball, ellipsoid): ray exit points,
//!   boundary projection, normals, rigid motions, curvature bounds.
//! * [`sources`] — grey reduction of the incident radiation and the two
//!   source terms entering the integral equations.
//! * [`milne`] — half-space boundary-layer solver `u - K*u = G` on `[0,∞)`,
//!   far-field limit extraction and the boundary temperature map.
//! * [`transport`] — non-local integral solver for the radiative energy
//!   density `u_eps` on the full domain.
//! * [`elliptic`] — the limit Dirichlet problem `-div((1/alpha) grad v) = 0`.
//! * [`verify`] — explicit interior supersolutions and maximum-principle
//!   harnesses.
//! * [`cli`] — reproducible experiment driver (configs, studies, reports).
//!
//! Radiative energy density is always `u = 4*pi*sigma*T^4`; everything below
//! works with `u` and converts to temperature only on demand.

pub mod absorption;
pub mod cli;
pub mod elliptic;
pub mod error;
pub mod geometry;
pub mod milne;
pub mod quadrature;
pub mod sources;
pub mod specfun;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
