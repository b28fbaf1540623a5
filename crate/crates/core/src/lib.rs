//! Outage, SNR distribution and ergodic capacity of concurrent relay
//! transmission over a Poisson field of transmitters in a cone, for
//! coherent, incoherent and random-orthogonal-channel reception.
//!
//! The closed forms live in [`analytic`], Laplace transforms and their
//! numerical inversion in [`transform`], and an independent Monte Carlo
//! network simulator in [`simulate`].

pub mod analytic;
pub mod config;
pub mod error;
pub mod model;
pub mod quad;
pub mod simulate;
pub mod special;
pub mod sweep;
pub mod transform;
pub mod validate;

pub use error::{Error, Result, SpecialFnError};
pub use model::{
    build_tap_profile, effective_densities, EffectiveDensity, NetworkParams, Scheme, TapProfile,
};
