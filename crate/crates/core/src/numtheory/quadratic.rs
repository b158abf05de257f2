//! Residue degrees in `Q(sqrt d_1, ..., sqrt d_k)` through Legendre symbols.

use alloc::vec::Vec;

use super::NumError;
use crate::ring::{is_prime, pow_mod};

/// Legendre symbol `(a | l)` for an odd prime `l`, by Euler's criterion.
pub fn legendre(a: i64, l: u64) -> i8 {
    let r = (a as i128).rem_euclid(l as i128) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (l - 1) / 2, l) == 1 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiquadraticDegree {
    /// Residue degree of the primes above `l` (1 or 2).
    pub f: u32,
    pub ramified: bool,
}

fn squarefree(d: i64) -> bool {
    let n = d.unsigned_abs();
    if n == 0 {
        return false;
    }
    let mut q = 2u64;
    while q.saturating_mul(q) <= n {
        if n % (q * q) == 0 {
            return false;
        }
        q += 1;
    }
    true
}

/// Squarefree part of a product of squarefree integers, kept as sorted prime list
/// and a sign.
fn squarefree_product(ds: &[i64]) -> (bool, Vec<u64>) {
    let mut negative = false;
    let mut primes: Vec<u64> = Vec::new();
    for &d in ds {
        negative ^= d < 0;
        let mut n = d.unsigned_abs();
        let mut q = 2u64;
        while q.saturating_mul(q) <= n {
            if n % q == 0 {
                toggle(&mut primes, q);
                n /= q;
            }
            q += 1;
        }
        if n > 1 {
            toggle(&mut primes, n);
        }
    }
    primes.sort_unstable();
    (negative, primes)
}

fn toggle(v: &mut Vec<u64>, q: u64) {
    match v.iter().position(|&x| x == q) {
        Some(i) => {
            v.swap_remove(i);
        }
        None => v.push(q),
    }
}

/// Residue degree of `l` in the multiquadratic field generated by the square
/// roots of `ds`.
///
/// The decomposition group is cyclic of order `f`; `f = 2` exactly when some
/// quadratic subfield in which `l` is unramified is inert at `l`.
pub fn multiquadratic_residue_degree(ds: &[i64], l: u64) -> Result<MultiquadraticDegree, NumError> {
    if l == 2 {
        return Err(NumError::EvenEll);
    }
    if !is_prime(l) {
        return Err(NumError::NotPrime(l));
    }
    if ds.len() > 20 {
        return Err(NumError::TooLarge(alloc::format!("{} radicands", ds.len())));
    }
    for &d in ds {
        if d == 1 || !squarefree(d) {
            return Err(NumError::BadRadicand(d));
        }
    }
    let mut f = 1;
    let mut ramified = false;
    for mask in 1u32..(1 << ds.len()) {
        let chosen: Vec<i64> = (0..ds.len()).filter(|i| mask >> i & 1 == 1).map(|i| ds[i]).collect();
        let (negative, primes) = squarefree_product(&chosen);
        if !negative && primes.is_empty() {
            return Err(NumError::DependentRadicands);
        }
        if primes.contains(&l) {
            ramified = true;
            continue;
        }
        let mut symbol = if negative { legendre(-1, l) } else { 1 };
        for &q in &primes {
            symbol *= legendre((q % l) as i64, l);
        }
        if symbol == -1 {
            f = 2;
        }
    }
    Ok(MultiquadraticDegree { f, ramified })
}
