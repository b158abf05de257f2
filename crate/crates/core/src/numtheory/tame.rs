use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::fp_poly::{distinct_degree, squarefree_decomposition, FpPoly};
use super::poly::ZPoly;
use super::primes::primes_in_range;
use super::NumError;
use crate::ring::{is_prime, pow_mod, valuation_uint};

/// Factorization pattern of `f mod l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueDegrees {
    pub ell: u64,
    /// `(degree, multiplicity)` of each irreducible factor, sorted.
    pub factors: Vec<(usize, usize)>,
    pub squarefree: bool,
    /// `l | disc(f)`: `Z[x]/(f)` may be non-maximal at `l`, so the pattern
    /// need not describe the primes of the field above `l`.
    pub untrusted: bool,
}

impl ResidueDegrees {
    /// One entry per irreducible factor.
    pub fn degrees(&self) -> Vec<usize> {
        self.factors.iter().map(|&(d, _)| d).collect()
    }
}

fn check_poly(f: &ZPoly) -> Result<(), NumError> {
    f.degree().filter(|&d| d > 0).ok_or(NumError::ZeroDegree)?;
    if !f.is_monic() {
        return Err(NumError::NotMonic);
    }
    Ok(())
}

pub fn residue_degrees(f: &ZPoly, ell: u64) -> Result<ResidueDegrees, NumError> {
    check_poly(f)?;
    if !is_prime(ell) {
        return Err(NumError::NotPrime(ell));
    }
    Ok(degrees_with_disc(f, &f.discriminant(), ell))
}

fn degrees_with_disc(f: &ZPoly, disc: &BigInt, ell: u64) -> ResidueDegrees {
    let fl = FpPoly::from_zpoly(f, ell);
    let mut factors = Vec::new();
    for (g, k) in squarefree_decomposition(&fl) {
        for (gd, d) in distinct_degree(&g) {
            for _ in 0..gd.degree().unwrap_or(0) / d {
                factors.push((d, k));
            }
        }
    }
    factors.sort();
    let squarefree = factors.iter().all(|&(_, k)| k == 1);
    ResidueDegrees { ell, factors, squarefree, untrusted: (disc % BigInt::from(ell)).is_zero() }
}

/// `v_p(l^f - 1)`.
pub fn tame_level(ell: u64, f_deg: u32, p: u64) -> Result<u32, NumError> {
    if !is_prime(p) {
        return Err(NumError::NotPrime(p));
    }
    if !is_prime(ell) {
        return Err(NumError::NotPrime(ell));
    }
    if ell == p {
        return Err(NumError::EllEqualsP(p));
    }
    if f_deg == 0 {
        return Err(NumError::ZeroDegree);
    }
    Ok(level(ell, f_deg, p))
}

fn level(ell: u64, f_deg: u32, p: u64) -> u32 {
    let n = BigUint::from(ell).pow(f_deg) - BigUint::one();
    valuation_uint(&n, p).expect("l^f - 1 > 0")
}

/// Places above `l` as seen through `f mod l`, with norms and tame levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TamePrimeReport {
    pub ell: u64,
    pub degrees: Vec<usize>,
    /// `l^f` for each entry of `degrees`.
    pub norms: Vec<BigUint>,
    /// `v_p(N - 1)` for each entry of `degrees`.
    pub levels: Vec<u32>,
    pub untrusted: bool,
    pub ramified: bool,
}

impl TamePrimeReport {
    pub fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    pub fn is_tame(&self) -> bool {
        self.max_level() >= 1
    }
}

/// A fixed `(f, p, m)` whose tame primes can be scanned range by range.
#[derive(Debug, Clone)]
pub struct TameScanner {
    f: ZPoly,
    disc: BigInt,
    p: u64,
    m: u32,
}

impl TameScanner {
    pub fn new(f: ZPoly, p: u64, m: u32) -> Result<Self, NumError> {
        check_poly(&f)?;
        if !is_prime(p) {
            return Err(NumError::NotPrime(p));
        }
        let disc = f.discriminant();
        Ok(TameScanner { f, disc, p, m })
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    /// Report for one prime `l != p`.
    pub fn report(&self, ell: u64) -> TamePrimeReport {
        let rd = degrees_with_disc(&self.f, &self.disc, ell);
        let degrees = rd.degrees();
        let norms = degrees.iter().map(|&d| BigUint::from(ell).pow(d as u32)).collect();
        let levels = degrees.iter().map(|&d| level(ell, d as u32, self.p)).collect();
        TamePrimeReport { ell, degrees, norms, levels, untrusted: rd.untrusted, ramified: !rd.squarefree }
    }

    /// Primes `l` in `[lo, hi]` with `l` coprime to `p disc(f)` and some prime
    /// above `l` of tame level at least `m`, ascending.
    pub fn scan_range(&self, lo: u64, hi: u64) -> Vec<TamePrimeReport> {
        let deg = self.f.degree().unwrap_or(0) as u64;
        primes_in_range(lo, hi)
            .into_iter()
            .filter(|&l| l != self.p && !(&self.disc % BigInt::from(l)).is_zero())
            // skip the factorization when no residue degree can reach level 1
            .filter(|&l| self.m == 0 || (1..=deg).any(|d| pow_mod(l % self.p, d, self.p) == 1))
            .map(|l| self.report(l))
            .filter(|r| r.max_level() >= self.m)
            .collect()
    }
}

pub fn scan_tame(f: &ZPoly, p: u64, m: u32, bound: u64) -> Result<Vec<TamePrimeReport>, NumError> {
    Ok(TameScanner::new(f.clone(), p, m)?.scan_range(2, bound))
}
