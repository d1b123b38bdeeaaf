//! Frame-independent Schrödinger mechanics on flat Newtonian space-time.
//!
//! The crate is organised bottom-up:
//!
//! * [`spacetime`]: inertial observers and the affine Galilean transitions between them.
//! * [`gauge`]: phase cocycles on the Schrödinger principal bundle, push-forward of wave
//!   functions, plane waves and cocycle checkers.
//! * [`symexpr`]: a small exact expression engine (parser, printer, differentiation,
//!   randomized equality) over the coordinates `y1..yn, t, r`.
//! * [`waveforms`]: wave forms, Schrödinger vector fields, the wave-de Rham differential,
//!   the invariant metric and the Schrödinger–Laplace operator.
//! * [`fields`]: sampled wave functions on periodic grids, spectral shifts, boosts and
//!   discrete residuals; the `SCHWF001` file format.
//! * [`solver`]: Strang split-step evolution and closed-form reference packets.
//! * [`hj`]: the additive cocycle, Darboux phase transforms and Hamilton–Jacobi residuals.
//! * [`cli`]: batch commands (`verify`, `evolve`, `boost`, `covariance`) used by the `schro` binary.

pub mod cli;
pub mod error;
pub mod fields;
pub mod gauge;
pub mod hj;
pub mod solver;
pub mod spacetime;
pub mod symexpr;
pub mod waveforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;
