//! Exact generation, verification and sieved search of nearly-perfect
//! cuboids: boxes whose sides, two face diagonals and space diagonal are
//! integers while the third face diagonal need not be.

pub mod candidate;
pub mod cli;
pub mod error;
pub mod exact_arith;
pub mod params;
pub mod search;
pub mod selftest;
pub mod verifier;

pub use candidate::{CandidateRecord, CuboidCandidate, DabStatus, Origin, ParamId, Source};
pub use error::{Error, Result};
pub use exact_arith::Ratio;
pub use params::{generate, RationalParam, XiZeta};
