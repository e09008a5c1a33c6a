//! Elliptic hypergeometric numerics: theta functions, theta shifted
//! factorials, very-well-poised series, elliptic Askey-Wilson polynomials,
//! interpolation in theta bases, (f,g)-matrix inversion and a randomized
//! checker for a catalog of summation and expansion identities.

pub mod eaw;
pub mod error;
pub mod fg;
pub mod identities;
pub mod interp;
pub mod linalg;
pub mod poly_interp;
pub mod sampling;
pub mod scaled;
pub mod series;
pub mod theta;
pub mod tolerance;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use theta::{BasePair, Nome, ThetaMethod};
pub use tolerance::{ToleranceSpec, TruncationPolicy};
