//! Exact arithmetic for counting solutions of polynomial congruences modulo
//! prime powers and for the generating series built from those counts.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! MultiPoly --counting--> CountTable --series--> RationalSeries
//!     --reconstruct--> RationalFunction --poles--> PoleReport
//! ```
//!
//! with [`padic`] supplying valuations, residues and unit groups, and
//! [`characters`] supplying multiplicative character twists of the
//! coefficient stream over exact cyclotomic integers.

pub mod characters;
pub mod counting;
pub mod cyclotomic;
pub mod json;
pub mod multipoly;
pub mod padic;
pub mod qpoly;
pub mod series;

mod error;

pub use error::{Error, Result};

pub use characters::{CharValue, TwistedCoefficients, UnitCharacter};
pub use counting::{Algorithm, CountTable, TableRequest};
pub use cyclotomic::CyclotomicInt;
pub use multipoly::MultiPoly;
pub use padic::{ExtValuation, Modulus, Prime, Residue, UnitGroup};
pub use qpoly::RatPoly;
pub use series::{
    DenominatorFactor, PoleRealPart, PoleReport, RationalFunction, RationalSeries,
    SharpnessWitness,
};
