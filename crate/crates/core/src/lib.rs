//! Simulation and verification toolkit for (sub)critical Galton-Watson trees
//! with immigration and their continuous-state scaling limits.
//!
//! The crate is organized bottom-up:
//!
//! - [`mechanisms`]: branching mechanisms ψ, bivariate exponents Φ and the
//!   immigration mechanisms φ(λ) = Φ(λ, λ), with their analytic conditions.
//! - [`csbp`]: the cumulant u(a, λ), the extinction functional v(a) and the
//!   Laplace transforms of CSBP / CSBPI marginals.
//! - [`trees`]: ordered trees in DFS child-count form, sin-trees, GW / GWI
//!   samplers, and the Lukasiewicz / height / contour codings.
//! - [`limits`]: Monte Carlo and exact-enumeration experiments comparing
//!   rescaled discrete objects with the continuum kernels.
//!
//! Every sampler takes an explicit seed; see [`rng`].

pub mod csbp;
pub mod error;
pub mod limits;
pub mod mechanisms;
pub mod ode;
pub mod quad;
pub mod rng;
pub mod trees;

pub use error::{Error, Result};
