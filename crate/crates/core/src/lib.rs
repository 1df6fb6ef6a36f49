//! Numerical verification toolkit for newform Petersson formulas and the
//! cubic moment of quadratic-twist central L-values.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: factorizations and multiplicative functions.
//! * [`characters`]: real primitive characters, character tables, Gauss sums.
//! * [`expsums`]: Kloosterman and Ramanujan sums and the triple sums
//!   `G_{A,B}` with their factorizations and closed forms.
//! * [`chebyshev`]: the coefficients of `x^n` in the basis `U_j(x/2)` and the
//!   inequalities built on them.
//! * [`spectral`]: Hecke systems, the Petersson formula (geometric and
//!   spectral sides), the newform sieve and the relation inversion engine.
//! * [`lfun`]: root numbers, smoothed approximate functional equations and the
//!   cubic moment assembled both ways.
//! * [`verify`]: the oracle suites behind `petersson verify`.

pub mod arith;
pub mod characters;
pub mod chebyshev;
pub mod expsums;
pub mod lfun;
pub mod numeric;
pub mod spectral;
pub mod verify;

pub use arith::{factor, Factored};
pub use characters::{DirichletCharacter, Mod8Sign, QuadraticCharacter};
pub use expsums::{GRoute, GSumResult};
pub use lfun::MomentReport;
pub use num_complex::Complex64;
pub use spectral::{DeltaEstimate, DeltaMode, HeckeSystem, Provenance, SignCharacter};

/// Errors shared by every module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input violates a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A synthetic system hits a singular configuration the formulas exclude.
    #[error("degenerate system: {0}")]
    Degenerate(String),
    /// A truncation or cost budget cannot be met.
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
