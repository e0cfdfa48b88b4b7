//! Polynomial and rational transfer-function algebra, state-space
//! realizations, sampling-rate signal transforms, and zero-order-hold
//! discretization. Everything downstream builds on these types.
//!
//! Conventions: polynomial coefficients are stored ascending (index `i`
//! multiplies `z^i`), display is descending; `period == 0.0` tags a
//! continuous-time system.

mod expm;
mod poly;
mod signal;
mod ss;
mod tf;

pub use expm::expm;
pub use poly::Polynomial;
pub use signal::SignalSeq;
pub use ss::{eigenvalues, spectral_radius_of, StateSpace};
pub use tf::{RationalTF, CANCEL_TOL};
