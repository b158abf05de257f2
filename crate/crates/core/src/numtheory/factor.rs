//! Irreducibility over `Z` by Zassenhaus: factor modulo a good prime, Hensel
//! lift, then recombine.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fp_poly::{distinct_degree, factor, FpPoly};
use super::poly::ZPoly;
use super::primes::primes_up_to;
use super::NumError;

const PATTERN_PRIMES: usize = 12;

/// A proper monic factor of `f` over `Z`, or `None` when `f` is irreducible.
pub fn find_factor(f: &ZPoly) -> Result<Option<ZPoly>, NumError> {
    let n = f.degree().filter(|&d| d > 0).ok_or(NumError::ZeroDegree)?;
    if !f.is_monic() {
        return Err(NumError::NotMonic);
    }
    if n == 1 {
        return Ok(None);
    }
    let disc = f.discriminant();
    if disc.is_zero() {
        return Ok(Some(gcd(f, &f.derivative())));
    }

    // Degree patterns modulo several good primes; any factor over Z has a
    // degree that is a subset sum for every one of them.
    let mut allowed: BTreeSet<usize> = (1..n).collect();
    let mut best: Option<(usize, u64)> = None;
    let mut tried = 0;
    for l in primes_up_to(1 << 16) {
        if tried == PATTERN_PRIMES {
            break;
        }
        if (&disc % BigInt::from(l)).is_zero() {
            continue;
        }
        tried += 1;
        let fl = FpPoly::from_zpoly(f, l);
        let mut degs = Vec::new();
        for (gd, d) in distinct_degree(&fl) {
            for _ in 0..gd.degree().unwrap_or(0) / d {
                degs.push(d);
            }
        }
        if degs.len() == 1 {
            return Ok(None);
        }
        let sums = subset_sums(&degs, n);
        allowed.retain(|d| sums.contains(d));
        if allowed.is_empty() {
            return Ok(None);
        }
        if best.is_none_or(|(r, _)| degs.len() < r) {
            best = Some((degs.len(), l));
        }
    }
    let (_, l) = best.expect("some prime below 2^16 avoids disc(f)");

    let fl = FpPoly::from_zpoly(f, l);
    let local: Vec<FpPoly> = factor(&fl).into_iter().map(|(g, _)| g).collect();
    let bound = coefficient_bound(f);
    let lb = BigInt::from(l);
    let mut k = 1u32;
    let mut modulus = lb.clone();
    while modulus <= &bound * 2 {
        modulus *= &lb;
        k += 1;
    }
    let lifted = multi_lift(f.coeffs(), &local, l, k);

    let r = lifted.len();
    let mut chosen = Vec::new();
    for size in 1..=r / 2 {
        if let Some(g) = search(f, &lifted, &modulus, size, 0, &mut chosen, &allowed) {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

pub fn is_irreducible(f: &ZPoly) -> Result<bool, NumError> {
    find_factor(f).map(|g| g.is_none())
}

fn subset_sums(degs: &[usize], n: usize) -> BTreeSet<usize> {
    let mut reach = alloc::vec![false; n + 1];
    reach[0] = true;
    for &d in degs {
        for s in (d..=n).rev() {
            if reach[s - d] {
                reach[s] = true;
            }
        }
    }
    (1..n).filter(|&s| reach[s]).collect()
}

/// `2^n * ||f||_1`, at least the Mignotte bound for any factor of `f`.
fn coefficient_bound(f: &ZPoly) -> BigInt {
    let norm: BigInt = f.coeffs().iter().map(|c| c.abs()).sum();
    norm << f.degree().unwrap_or(0)
}

fn search(
    f: &ZPoly,
    lifted: &[Vec<BigInt>],
    modulus: &BigInt,
    size: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    allowed: &BTreeSet<usize>,
) -> Option<ZPoly> {
    if chosen.len() == size {
        let deg: usize = chosen.iter().map(|&i| lifted[i].len() - 1).sum();
        if !allowed.contains(&deg) {
            return None;
        }
        let mut prod = alloc::vec![BigInt::one()];
        for &i in chosen.iter() {
            prod = mul_mod(&prod, &lifted[i], modulus);
        }
        let half = modulus >> 1;
        let cand: Vec<BigInt> = prod.into_iter().map(|c| if c > half { c - modulus } else { c }).collect();
        let f0 = &f.coeffs()[0];
        if !f0.is_zero() && (cand[0].is_zero() || !(f0 % &cand[0]).is_zero()) {
            return None;
        }
        let cand = ZPoly::new(cand);
        return f.div_exact(&cand).map(|_| cand);
    }
    for i in start..lifted.len() {
        chosen.push(i);
        let found = search(f, lifted, modulus, size, i + 1, chosen, allowed);
        chosen.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

fn reduce(v: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = v.iter().map(|c| c.mod_floor(m)).collect();
    while out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

fn mul_mod(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = alloc::vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    reduce(&out, m)
}

fn lift_fp(g: &FpPoly) -> Vec<BigInt> {
    g.coeffs().iter().map(|&c| BigInt::from(c)).collect()
}

fn to_fp(v: &[BigInt], l: u64) -> FpPoly {
    let lb = BigInt::from(l);
    FpPoly::new(l, v.iter().map(|c| c.mod_floor(&lb).to_u64().expect("residue below l")).collect())
}

/// `(d, s, t)` with `s a + t b = d = gcd(a, b)` monic.
fn xgcd(a: &FpPoly, b: &FpPoly) -> (FpPoly, FpPoly, FpPoly) {
    let l = a.modulus();
    let zero = FpPoly::new(l, Vec::new());
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (FpPoly::one(l), zero.clone());
    let (mut t0, mut t1) = (zero, FpPoly::one(l));
    while !r1.is_zero() {
        let (q, r) = r0.divrem(&r1);
        let s2 = s0.sub(&q.mul(&s1));
        let t2 = t0.sub(&q.mul(&t1));
        r0 = core::mem::replace(&mut r1, r);
        s0 = core::mem::replace(&mut s1, s2);
        t0 = core::mem::replace(&mut t1, t2);
    }
    let lc = *r0.coeffs().last().expect("gcd of nonzero polynomials");
    let inv = crate::ring::pow_mod(lc, l - 2, l);
    (r0.scale(inv), s0.scale(inv), t0.scale(inv))
}

/// Lifts `f = g h mod l` with `g`, `h` monic and coprime to `f = G H mod l^k`.
fn hensel_pair(f: &[BigInt], g: &FpPoly, h: &FpPoly, l: u64, k: u32) -> (Vec<BigInt>, Vec<BigInt>) {
    let (d, _s, t) = xgcd(g, h);
    debug_assert!(d.is_one());
    let lb = BigInt::from(l);
    let mut big_g = lift_fp(g);
    let mut big_h = lift_fp(h);
    let mut pj = lb.clone();
    for _ in 1..k {
        let next = &pj * &lb;
        let prod = mul_mod(&big_g, &big_h, &next);
        let f_next = reduce(f, &next);
        let len = f_next.len().max(prod.len());
        let err: Vec<BigInt> = (0..len)
            .map(|i| {
                let a = f_next.get(i).cloned().unwrap_or_default();
                let b = prod.get(i).cloned().unwrap_or_default();
                let diff = (a - b).mod_floor(&next);
                debug_assert!((&diff % &pj).is_zero());
                diff / &pj
            })
            .collect();
        let e = to_fp(&err, l);
        let dg = t.mul(&e).rem(g);
        let (dh, rest) = e.sub(&h.mul(&dg)).divrem(g);
        debug_assert!(rest.is_zero());
        big_g = add_scaled(&big_g, &lift_fp(&dg), &pj, &next);
        big_h = add_scaled(&big_h, &lift_fp(&dh), &pj, &next);
        pj = next;
    }
    (big_g, big_h)
}

fn add_scaled(a: &[BigInt], b: &[BigInt], s: &BigInt, m: &BigInt) -> Vec<BigInt> {
    let len = a.len().max(b.len());
    let v: Vec<BigInt> = (0..len)
        .map(|i| a.get(i).cloned().unwrap_or_default() + s * b.get(i).cloned().unwrap_or_default())
        .collect();
    reduce(&v, m)
}

fn multi_lift(f: &[BigInt], local: &[FpPoly], l: u64, k: u32) -> Vec<Vec<BigInt>> {
    let modulus = BigInt::from(BigUint::from(l).pow(k));
    if local.len() == 1 {
        return alloc::vec![reduce(f, &modulus)];
    }
    let g = &local[0];
    let h = local[1..].iter().fold(FpPoly::one(l), |acc, x| acc.mul(x));
    let (big_g, big_h) = hensel_pair(f, g, &h, l, k);
    let mut out = alloc::vec![big_g];
    out.extend(multi_lift(&big_h, &local[1..], l, k));
    out
}

/// Primitive gcd over `Z` with positive leading coefficient.
fn gcd(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let (mut a, mut b) = (a.primitive_part(), b.primitive_part());
    while !b.is_zero() {
        let r = a.pseudo_rem(&b);
        a = b;
        b = if r.is_zero() { r } else { r.primitive_part() };
    }
    if a.leading().is_negative() {
        a.neg()
    } else {
        a
    }
}
