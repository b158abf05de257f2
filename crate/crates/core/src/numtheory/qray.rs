//! The p-part of `(Z/(p^B l_1 ... l_r))^x`, counted element by element, against
//! `Z/p^(B-1) x prod Z/p^(n_i)` with `n_i = v_p(l_i - 1)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;

use super::NumError;
use crate::ring::{is_prime, pow_mod, valuation_u128};

/// Largest component modulus that is enumerated.
pub const MAX_COMPONENT: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QRayStructure {
    pub p: u64,
    pub ells: Vec<u64>,
    /// `v_p(l_i - 1)` for each tame prime.
    pub exponents: Vec<u32>,
    pub b: u32,
    /// Cyclic orders, descending, trivial factors dropped.
    pub computed: Vec<u64>,
    pub predicted: Vec<u64>,
}

impl QRayStructure {
    pub fn matches(&self) -> bool {
        self.computed == self.predicted
    }
}

pub fn q_ray_structure(p: u64, ells: &[u64], b: u32) -> Result<QRayStructure, NumError> {
    if p % 2 == 0 {
        return Err(NumError::EvenP);
    }
    if !is_prime(p) {
        return Err(NumError::NotPrime(p));
    }
    if b == 0 {
        return Err(NumError::ZeroDegree);
    }
    let pb = p
        .checked_pow(b)
        .filter(|&m| m <= MAX_COMPONENT)
        .ok_or_else(|| NumError::TooLarge(format!("{p}^{b}")))?;
    let mut exponents = Vec::new();
    for (i, &l) in ells.iter().enumerate() {
        if !is_prime(l) {
            return Err(NumError::NotPrime(l));
        }
        if ells[..i].contains(&l) {
            return Err(NumError::DuplicatePrime(l));
        }
        if l == p {
            return Err(NumError::EllEqualsP(p));
        }
        if l % p != 1 {
            return Err(NumError::NotTame { l, p });
        }
        if l > MAX_COMPONENT {
            return Err(NumError::TooLarge(format!("{l}")));
        }
        exponents.push(valuation_u128((l - 1) as u128, p).expect("l > 1"));
    }

    // log_p |G[p^k]| summed over the CRT components
    let mut logs: Vec<u32> = vec![0];
    for modulus in core::iter::once(pb).chain(ells.iter().copied()) {
        let comp = torsion_logs(modulus, p);
        if comp.len() > logs.len() {
            let last = *logs.last().expect("nonempty");
            logs.resize(comp.len(), last);
        }
        for k in 0..logs.len() {
            logs[k] += comp.get(k).copied().unwrap_or(*comp.last().expect("nonempty"));
        }
    }
    let mut computed = Vec::new();
    let at_least = |k: usize| -> u32 { if k < logs.len() { logs[k] - logs[k - 1] } else { 0 } };
    for k in 1..logs.len() {
        let exact = at_least(k) - at_least(k + 1);
        for _ in 0..exact {
            computed.push(p.pow(k as u32));
        }
    }
    computed.sort_unstable_by(|a, b| b.cmp(a));

    let mut predicted: Vec<u64> =
        core::iter::once(b - 1).chain(exponents.iter().copied()).filter(|&e| e > 0).map(|e| p.pow(e)).collect();
    predicted.sort_unstable_by(|a, b| b.cmp(a));

    Ok(QRayStructure { p, ells: ells.to_vec(), exponents, b, computed, predicted })
}

/// `log_p |{x in (Z/M)^x : x^(p^k) = 1}|` for `k = 0, 1, ...` until it stabilizes.
fn torsion_logs(modulus: u64, p: u64) -> Vec<u32> {
    let units: Vec<u64> = (1..modulus.max(2)).filter(|x| x.gcd(&modulus) == 1).collect();
    let mut logs = vec![0u32];
    let mut pk = 1u64;
    loop {
        pk *= p;
        let count = units.iter().filter(|&&x| pow_mod(x, pk, modulus) == 1 % modulus).count() as u64;
        let lg = exact_log(count, p);
        if lg == *logs.last().expect("nonempty") {
            return logs;
        }
        logs.push(lg);
    }
}

fn exact_log(mut n: u64, p: u64) -> u32 {
    let mut e = 0;
    while n > 1 {
        assert_eq!(n % p, 0, "p-torsion count is a power of p");
        n /= p;
        e += 1;
    }
    e
}
