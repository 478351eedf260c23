//! Wave functions of the form `psi = z^c` with `z > 0` real and `c = x + iy`.
//!
//! The crate is split by concern:
//!
//! * [`wavecore`]: evaluation of `z^c`, its derivatives with respect to `c`, and
//!   numerical checks of analyticity (Cauchy-Riemann, Laplace, Cauchy integrals).
//! * [`schrodinger`]: residuals of the Schrodinger equation after substituting a
//!   positive field `z(r_x, r_y, t)`.
//! * [`vortex`]: the closed-form exponential solutions, their collapse and
//!   normalisation, and the gradient-map geometry of vortex pairs.
//! * [`energy`]: eigenvalue ladders, the step potential `U(E)` and jumps in `k`.
//! * [`ensemble`]: a discrete-event simulation of vortex production and collapse.
//!
//! Natural units (`hbar = m = 1`) are the default throughout.

pub mod energy;
pub mod ensemble;
mod error;
pub mod output;
pub mod schrodinger;
pub mod vortex;
pub mod wavecore;

pub use error::{Error, Result};
pub use schrodinger::PhysicalParams;
pub use wavecore::{CParam, PositiveReal, WaveValue};
