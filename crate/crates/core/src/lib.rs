//! Exact l-weight and q-character combinatorics for the quantum affine
//! superalgebra of type gl(M|N), plus a numeric graded spin chain.

pub mod coeff_ring;
pub mod error;
pub mod identities;
pub mod lweights;
pub mod qchar;
pub mod spinchain;
pub mod tableaux;
pub mod worked;

pub use coeff_ring::{Assignment, Monomial, Poly, Rational, Scalar};
pub use error::{Error, Result};
pub use lweights::{FactoredRational, LWeight, Rank, Weight, WeightLatticeVector};
pub use identities::{Status, VerificationReport};
pub use qchar::{QChar, Variant};
pub use spinchain::{ChainConfig, Twist};
pub use tableaux::{Sign, Tableau};
