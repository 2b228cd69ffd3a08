//! Unified transform method solutions of half-line initial-boundary-value
//! problems for linear dispersive equations with piecewise data.

pub mod config;
pub mod contours;
pub mod dispersion;
pub mod error;
pub mod expansions;
pub mod oracles;
pub mod piecewise;
pub mod points;
pub mod poly;
pub mod quadrature;
pub mod ring;
pub mod solver;
pub mod special;

pub use num_complex::Complex64 as C64;

pub use dispersion::Dispersion;
pub use error::{Result, UtmError};
pub use piecewise::{IbvpSpec, Piece, PiecewiseData};
pub use quadrature::QuadSettings;
pub use special::{Regime, Selector, SpecialKey, SpecialValue};
