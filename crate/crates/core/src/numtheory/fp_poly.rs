//! Polynomials over `F_l` and their factorization.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::poly::ZPoly;
use crate::ring::{mul_mod, pow_mod};

/// A polynomial over `F_l`, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpPoly {
    l: u64,
    c: Vec<u64>,
}

impl FpPoly {
    pub fn new(l: u64, mut c: Vec<u64>) -> Self {
        for v in c.iter_mut() {
            *v %= l;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { l, c }
    }

    pub fn from_zpoly(f: &ZPoly, l: u64) -> Self {
        let lb = BigInt::from(l);
        FpPoly::new(l, f.coeffs().iter().map(|c| c.mod_floor(&lb).to_u64().expect("residue below l")).collect())
    }

    pub fn one(l: u64) -> Self {
        FpPoly::new(l, vec![1])
    }

    pub fn x(l: u64) -> Self {
        FpPoly::new(l, vec![0, 1])
    }

    pub fn modulus(&self) -> u64 {
        self.l
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    fn inv(&self, a: u64) -> u64 {
        pow_mod(a, self.l - 2, self.l)
    }

    pub fn add(&self, o: &FpPoly) -> FpPoly {
        let n = self.c.len().max(o.c.len());
        let v = (0..n)
            .map(|i| {
                let a = self.c.get(i).copied().unwrap_or(0);
                let b = o.c.get(i).copied().unwrap_or(0);
                ((a as u128 + b as u128) % self.l as u128) as u64
            })
            .collect();
        FpPoly::new(self.l, v)
    }

    pub fn sub(&self, o: &FpPoly) -> FpPoly {
        let n = self.c.len().max(o.c.len());
        let v = (0..n)
            .map(|i| {
                let a = self.c.get(i).copied().unwrap_or(0);
                let b = o.c.get(i).copied().unwrap_or(0);
                ((a as u128 + self.l as u128 - b as u128) % self.l as u128) as u64
            })
            .collect();
        FpPoly::new(self.l, v)
    }

    pub fn mul(&self, o: &FpPoly) -> FpPoly {
        if self.is_zero() || o.is_zero() {
            return FpPoly::new(self.l, Vec::new());
        }
        let l = self.l as u128;
        let mut acc = vec![0u128; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u128 * b as u128) % l;
            }
        }
        FpPoly::new(self.l, acc.into_iter().map(|v| v as u64).collect())
    }

    pub fn scale(&self, s: u64) -> FpPoly {
        FpPoly::new(self.l, self.c.iter().map(|&a| mul_mod(a, s, self.l)).collect())
    }

    pub fn monic(&self) -> FpPoly {
        match self.c.last() {
            None => self.clone(),
            Some(&lc) => self.scale(self.inv(lc)),
        }
    }

    /// Quotient and remainder; `d` must be nonzero.
    pub fn divrem(&self, d: &FpPoly) -> (FpPoly, FpPoly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (FpPoly::new(self.l, Vec::new()), self.clone());
        }
        let inv = self.inv(d.c[dd]);
        let mut q = vec![0u64; r.len() - dd];
        for k in (0..q.len()).rev() {
            let top = r[k + dd];
            if top == 0 {
                continue;
            }
            let f = mul_mod(top, inv, self.l);
            q[k] = f;
            for (j, &dc) in d.c.iter().enumerate() {
                let t = mul_mod(f, dc, self.l);
                r[k + j] = (r[k + j] + self.l - t) % self.l;
            }
        }
        r.truncate(dd);
        (FpPoly::new(self.l, q), FpPoly::new(self.l, r))
    }

    pub fn rem(&self, d: &FpPoly) -> FpPoly {
        self.divrem(d).1
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, o: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> FpPoly {
        FpPoly::new(self.l, self.c.iter().enumerate().skip(1).map(|(i, &a)| mul_mod(a, i as u64 % self.l, self.l)).collect())
    }

    /// `self^e mod m`.
    pub fn powmod(&self, e: &BigUint, m: &FpPoly) -> FpPoly {
        let mut acc = FpPoly::one(self.l).rem(m);
        let base = self.rem(m);
        for i in (0..e.bits()).rev() {
            acc = acc.mul(&acc).rem(m);
            if e.bit(i) {
                acc = acc.mul(&base).rem(m);
            }
        }
        acc
    }

    /// `g` with `g^l = self`; requires every exponent to be a multiple of `l`.
    fn pth_root(&self) -> FpPoly {
        let l = self.l as usize;
        FpPoly::new(self.l, self.c.iter().step_by(l).copied().collect())
    }

    pub fn pow(&self, e: usize) -> FpPoly {
        let mut acc = FpPoly::one(self.l);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Square-free decomposition of a monic polynomial: pairs `(g, k)` with `g`
/// square-free and `f = prod g^k`.
pub fn squarefree_decomposition(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let mut out = Vec::new();
    sqf_into(&f.monic(), 1, &mut out);
    out.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    out
}

fn sqf_into(f: &FpPoly, mult: usize, out: &mut Vec<(FpPoly, usize)>) {
    if f.deg() == 0 {
        return;
    }
    let l = f.l as usize;
    let d = f.derivative();
    if d.is_zero() {
        sqf_into(&f.pth_root(), mult * l, out);
        return;
    }
    let mut c = f.gcd(&d);
    let mut w = f.divrem(&c).0;
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c);
        let fac = w.divrem(&y).0;
        if fac.deg() > 0 {
            out.push((fac.monic(), i * mult));
        }
        w = y;
        c = c.divrem(&w).0;
        i += 1;
    }
    if !c.is_one() && c.deg() > 0 {
        sqf_into(&c.monic().pth_root(), mult * l, out);
    }
}

/// Distinct-degree factorization of a monic square-free polynomial: pairs
/// `(g_d, d)` where `g_d` is the product of all irreducible factors of degree `d`.
pub fn distinct_degree(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let l = BigUint::from(f.l);
    let mut out = Vec::new();
    let mut rest = f.monic();
    let x = FpPoly::x(f.l);
    let mut h = x.rem(&rest);
    let mut d = 0;
    while rest.deg() >= 2 * (d + 1) {
        d += 1;
        h = h.powmod(&l, &rest);
        let g = h.sub(&x).gcd(&rest);
        if !g.is_one() {
            rest = rest.divrem(&g).0;
            h = h.rem(&rest);
            out.push((g, d));
        }
    }
    if rest.deg() > 0 {
        let dr = rest.deg();
        out.push((rest, dr));
    }
    out
}

/// Splits a product of distinct irreducibles of degree `d` into its factors.
///
/// Deterministic: candidate splitting polynomials are enumerated in a fixed order.
pub fn equal_degree(g: &FpPoly, d: usize) -> Vec<FpPoly> {
    let n = g.deg();
    if n == d {
        return vec![g.monic()];
    }
    let l = g.l;
    let mut counter: u64 = l;
    loop {
        counter += 1;
        let mut a = Vec::new();
        let mut t = counter;
        while t > 0 {
            a.push(t % l);
            t /= l;
        }
        let a = FpPoly::new(l, a).rem(g);
        if a.deg() == 0 {
            continue;
        }
        let b = if l == 2 {
            // trace map a + a^2 + ... + a^(2^(d-1))
            let mut acc = a.clone();
            let mut sq = a.clone();
            for _ in 1..d {
                sq = sq.mul(&sq).rem(g);
                acc = acc.add(&sq);
            }
            acc
        } else {
            let e = (BigUint::from(l).pow(d as u32) - 1u32) / 2u32;
            a.powmod(&e, g).sub(&FpPoly::one(l))
        };
        let h = b.gcd(g);
        if h.deg() > 0 && h.deg() < n {
            let other = g.divrem(&h).0;
            let mut parts = equal_degree(&h, d);
            parts.extend(equal_degree(&other, d));
            parts.sort();
            return parts;
        }
    }
}

/// Complete factorization into monic irreducibles with multiplicities.
pub fn factor(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let mut out = Vec::new();
    for (g, k) in squarefree_decomposition(f) {
        for (gd, d) in distinct_degree(&g) {
            for h in equal_degree(&gd, d) {
                out.push((h, k));
            }
        }
    }
    out.sort_by(|a, b| a.0.deg().cmp(&b.0.deg()).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    out
}

/// Degrees of the irreducible factors with multiplicity, via distinct-degree
/// factorization only.
pub fn factor_degrees(f: &FpPoly) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (g, k) in squarefree_decomposition(f) {
        for (gd, d) in distinct_degree(&g) {
            for _ in 0..gd.deg() / d {
                out.push((d, k));
            }
        }
    }
    out.sort();
    out
}

/// Multiplies out a factorization.
pub fn product(parts: &[(FpPoly, usize)], l: u64) -> FpPoly {
    parts.iter().fold(FpPoly::one(l), |acc, (g, k)| acc.mul(&g.pow(*k)))
}

pub fn is_squarefree(f: &FpPoly) -> bool {
    match f.degree() {
        None => false,
        Some(0) => true,
        Some(_) => {
            let d = f.derivative();
            !d.is_zero() && f.gcd(&d).is_one()
        }
    }
}
