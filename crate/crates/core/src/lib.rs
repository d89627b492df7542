//! Numerics for the four-field chemotaxis tumor-invasion system
//!
//! ```text
//! u_t = Δu − ∇·(u∇v),   v_t = Δv + wz,   w_t = −wz,   z_t = Δz − z + u
//! ```
//!
//! with homogeneous Neumann boundary conditions on 1D/2D rectangles.
//!
//! The crate is `no_std` (it needs `alloc`). Modules:
//!
//! * [`grid`]: cell-centred rectangular grids, the Neumann Laplacian, its
//!   cosine eigenbasis and the implicit diffusion solves.
//! * [`state`]: the field quadruple, initial-data checks, norms and the
//!   constant equilibrium.
//! * [`solver`]: the conservative, positivity-preserving IMEX integrator.
//! * [`semigroup`]: the spectral Neumann heat propagator and numerical
//!   probes of the L^p–L^q smoothing constants.
//! * [`theory`]: closed-form decay rates and the envelope constants.
//! * [`rates`]: empirical decay-rate fitting and audits against theory.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

mod error;
mod fields;
pub mod grid;
pub mod quadrature;
pub mod rates;
pub mod semigroup;
pub mod solver;
pub mod state;
pub mod theory;

pub use error::{Error, Result};
pub use fields::{Field, PerField};
