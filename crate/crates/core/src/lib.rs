//! Exact arithmetic for iterative Hasse-Schmidt derivations of the rational
//! function field F_p(t).
//!
//! The layers build on each other: scalars and rational functions
//! ([`field`], [`poly`], [`ratfn`]), truncated power series ([`series`]),
//! formal group laws ([`law`]), derivations ([`derivation`]), the
//! p-power structure theory ([`structure`]) and integration of canonical
//! elements back to derivations ([`integrate`]).

pub mod coeff;
pub mod derivation;
pub mod error;
pub mod field;
pub mod hensel;
pub mod integrate;
pub mod io;
pub mod law;
pub mod linalg;
pub mod parse;
pub mod poly;
pub mod ratfn;
pub mod sample;
pub mod series;
pub mod structure;

pub use coeff::Coeff;
pub use derivation::{canonical_derivation, check_f_iterative, DerKind, HsDerivation};
pub use error::{Error, Result};
pub use field::Scalar;
pub use integrate::{integrate_additive, integrate_multiplicative, IntegrationResult};
pub use io::DerivationSpec;
pub use law::{make_law, GroupLaw, GroupLawHom, LawKind, LawTag};
pub use linalg::{LinSolution, Matrix};
pub use parse::{parse_ratfn, parse_ratfn_in};
pub use poly::Poly;
pub use ratfn::RatFn;
pub use series::{RatSeries, ScalarSeries, TruncSeries, Var};
