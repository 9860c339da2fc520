//! Numerical ranges and n'th matricial ranges of complex matrices.
//!
//! * [`matrix`]: dense complex matrices and the linear algebra the rest needs.
//! * [`numrange`]: the numerical range `W(T)` and radius `ω(T)` by eigenvalue
//!   sweeps of rotated Hermitian parts.
//! * [`sdp`]: a small dense SDP solver over Hermitian matrices.
//! * [`ucp`]: unital completely positive maps as Choi matrices.
//! * [`matrange`]: oracles over `W^n(T) = {Φ(T) : Φ unital CP}` built on the
//!   SDP solver.

pub mod error;
pub mod matrange;
pub mod matrix;
pub mod numrange;
pub mod sdp;
pub mod ucp;

pub use error::{Error, Result};
