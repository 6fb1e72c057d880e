pub mod characters;
pub mod dickman;
pub mod error;
pub mod expsum;
pub mod harness;
pub mod lattice;
pub mod numeric;
pub mod parse;
pub mod pretentious;
pub mod primes;
pub mod smooth;

pub use error::{Error, Result};
