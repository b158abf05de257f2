use alloc::vec::Vec;

use num_bigint::BigUint;

use super::primes::primes_in_range;
use super::NumError;
use crate::ring::{is_prime, pow_mod};

/// `base^(p-1) = 1 mod p^2`.
pub fn wieferich_test(base: u64, p: u64) -> Result<bool, NumError> {
    if base < 2 {
        return Err(NumError::SmallBase);
    }
    if !is_prime(p) {
        return Err(NumError::NotPrime(p));
    }
    if base % p == 0 {
        return Err(NumError::DividesBase { p, base });
    }
    Ok(check(base, p))
}

fn check(base: u64, p: u64) -> bool {
    if p < 1 << 32 {
        let p2 = p * p;
        pow_mod(base % p2, p - 1, p2) == 1
    } else {
        let p2 = BigUint::from(p).pow(2);
        BigUint::from(base).modpow(&BigUint::from(p - 1), &p2) == BigUint::from(1u32)
    }
}

/// All primes `p` in `[lo, hi]` not dividing `base` with `base^(p-1) = 1 mod p^2`.
pub fn wieferich_scan(base: u64, lo: u64, hi: u64) -> Result<Vec<u64>, NumError> {
    if base < 2 {
        return Err(NumError::SmallBase);
    }
    Ok(primes_in_range(lo, hi).into_iter().filter(|&p| base % p != 0 && check(base, p)).collect())
}
