//! Periodic pseudo-spectral solver for compressible, heat-conducting MHD with
//! density-dependent viscosity, together with diagnostics for the energy,
//! BD entropy and thermodynamic entropy balances.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod constitutive;
pub mod convergence_lab;
pub mod diagnostics;
pub mod dynamics;
pub mod field_state;
pub mod runner_io;
