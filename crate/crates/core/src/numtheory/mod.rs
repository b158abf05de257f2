//! Number fields by defining polynomial, tame primes, rank formulas and
//! Wieferich scans.

use alloc::string::String;

use num_bigint::BigInt;

mod factor;
mod field;
pub mod fp_poly;
mod poly;
mod primes;
mod qray;
mod quadratic;
mod rank;
mod tame;
mod wieferich;

pub use factor::{find_factor, is_irreducible};
pub use field::{signature, NumberField};
pub use fp_poly::FpPoly;
pub use poly::ZPoly;
pub use primes::{primes_in_range, primes_up_to};
pub use qray::{q_ray_structure, QRayStructure};
pub use quadratic::{legendre, multiquadratic_residue_degree, MultiquadraticDegree};
pub use rank::{rank_report, RankReport, SMode};
pub use tame::{residue_degrees, scan_tame, tame_level, ResidueDegrees, TamePrimeReport, TameScanner};
pub use wieferich::{wieferich_scan, wieferich_test};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumError {
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
    #[error("polynomial is zero or constant")]
    ZeroDegree,
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("polynomial is reducible: {factor} divides it")]
    Reducible { factor: ZPoly },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p must be odd")]
    EvenP,
    #[error("l = p = {0} has no tame level")]
    EllEqualsP(u64),
    #[error("p = {p} divides disc(f) = {disc}")]
    PDividesDisc { p: u64, disc: BigInt },
    #[error("subset index {index} out of range for {count} primes above p")]
    BadSubset { index: usize, count: usize },
    #[error("{l} is not congruent to 1 mod {p}")]
    NotTame { l: u64, p: u64 },
    #[error("prime {0} listed twice")]
    DuplicatePrime(u64),
    #[error("modulus too large for element counting: {0}")]
    TooLarge(String),
    #[error("l = 2 is not supported")]
    EvenEll,
    #[error("radicand {0} is zero or not squarefree")]
    BadRadicand(i64),
    #[error("radicands are dependent modulo squares")]
    DependentRadicands,
    #[error("{p} divides the base {base}")]
    DividesBase { p: u64, base: u64 },
    #[error("base must be at least 2")]
    SmallBase,
}

#[cfg(test)]
pub(crate) const OCTIC: &str = "x^8-32*x^6+344*x^4-512*x^2+1936";
