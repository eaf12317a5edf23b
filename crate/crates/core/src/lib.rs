//! Hamiltonian Boundary Value Methods.
//!
//! HBVM(k,s) is a family of `k`-stage Runge-Kutta methods built on a
//! degree-`s` polynomial expanded in the orthonormal shifted Legendre basis.
//! When the quadrature at the `k` nodes is exact for the line integral of
//! `∇H` along the polynomial, the method conserves `H` exactly; for
//! polynomial Hamiltonians of degree `ν` with Gauss nodes that happens as
//! soon as `k ≥ νs/2`.
//!
//! The crate is `no_std` (it needs `alloc`). File formats and the command-line
//! front end live in the `hbvm-cli` crate.
//!
//! ```
//! use hbvm_core::{integrator, problems::Builtin, tableau::HbvmTableau};
//!
//! let sys = Builtin::QuarticOscillator;
//! let tab = HbvmTableau::gauss(4, 2).unwrap();
//! let settings = integrator::SolveSettings::default();
//! let traj = integrator::integrate(&sys, &tab, &[1.0, 0.0], 0.1, 50, &settings).unwrap();
//! assert!(traj.max_abs_drift() < 1e-12);
//! ```
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;

pub mod integrator;
pub mod legendre;
pub mod linalg;
pub mod problems;
pub mod quadrature;
pub mod spectral;
pub mod tableau;

pub use error::{Error, Result};
pub use linalg::{Complex, Matrix};
pub use problems::{Builtin, HamiltonianSystem};
pub use quadrature::{NodeKind, QuadratureRule};
pub use tableau::{CollocationTableau, HbvmTableau};
