//! Residues modulo a prime power and linear algebra over `Z/p^m` and `F_p`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exponent m must be at least 1")]
    ZeroExponent,
    #[error("{p}^{m} does not fit in 64 bits")]
    ModulusTooLarge { p: u64, m: u32 },
    #[error("linear system dimensions do not match: {rows}x{cols} matrix with {rhs} right-hand entries")]
    Dimension { rows: usize, cols: usize, rhs: usize },
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation(x: &BigInt, p: u64) -> Option<u32> {
    valuation_uint(x.magnitude(), p)
}

pub fn valuation_uint(x: &BigUint, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigUint::from(p);
    let mut x = x.clone();
    let mut e = 0;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&x, &p);
        if !r.is_zero() {
            return Some(e);
        }
        x = q;
        e += 1;
    }
}

pub fn valuation_u128(mut x: u128, p: u64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let p = p as u128;
    let mut e = 0;
    while x % p == 0 {
        x /= p;
        e += 1;
    }
    Some(e)
}

/// The ring `Z/p^m` for a prime `p` and `m >= 1`, with `p^m < 2^64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimePower {
    p: u64,
    m: u32,
    modulus: u64,
}

impl fmt::Debug for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.p, self.m)
    }
}

impl PrimePower {
    pub fn new(p: u64, m: u32) -> Result<Self, RingError> {
        if !is_prime(p) {
            return Err(RingError::NotPrime(p));
        }
        if m == 0 {
            return Err(RingError::ZeroExponent);
        }
        let mut modulus = 1u64;
        for _ in 0..m {
            modulus = modulus
                .checked_mul(p)
                .ok_or(RingError::ModulusTooLarge { p, m })?;
        }
        Ok(PrimePower { p, m, modulus })
    }

    pub fn prime_field(p: u64) -> Result<Self, RingError> {
        Self::new(p, 1)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The residue field `F_p` of this ring.
    pub fn residue_field(&self) -> PrimePower {
        PrimePower { p: self.p, m: 1, modulus: self.p }
    }

    pub fn elem(&self, value: u64) -> ZMod {
        ZMod { value: value % self.modulus, ring: *self }
    }

    pub fn zero(&self) -> ZMod {
        ZMod { value: 0, ring: *self }
    }

    pub fn one(&self) -> ZMod {
        self.elem(1)
    }

    pub fn from_i128(&self, x: i128) -> ZMod {
        ZMod { value: self.reduce_i128(x), ring: *self }
    }

    pub fn from_bigint(&self, x: &BigInt) -> ZMod {
        ZMod { value: self.reduce_bigint(x), ring: *self }
    }

    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    pub fn reduce_bigint(&self, x: &BigInt) -> u64 {
        let m = BigInt::from(self.modulus);
        let mut r = x % &m;
        if r.sign() == Sign::Minus {
            r += m;
        }
        r.to_u64().expect("residue below a 64-bit modulus")
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.modulus - (b - a)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.modulus)
    }

    /// Valuation of a residue, saturated at `m` for zero.
    pub fn valuation(&self, a: u64) -> u32 {
        if a == 0 {
            return self.m;
        }
        let mut a = a;
        let mut e = 0;
        while a % self.p == 0 {
            a /= self.p;
            e += 1;
        }
        e
    }

    pub fn is_unit(&self, a: u64) -> bool {
        a % self.p != 0
    }

    pub fn inverse(&self, a: u64) -> Option<u64> {
        if !self.is_unit(a) {
            return None;
        }
        let (g, x, _) = ext_gcd(a as i128, self.modulus as i128);
        debug_assert_eq!(g, 1);
        Some(self.reduce_i128(x))
    }

    /// `p^e` as a residue (zero once `e >= m`).
    pub fn p_power(&self, e: u32) -> u64 {
        if e >= self.m {
            0
        } else {
            self.p.pow(e)
        }
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    (old_r, old_s, old_t)
}

/// An element of `Z/p^m`, stored as its canonical residue.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZMod {
    value: u64,
    ring: PrimePower,
}

impl fmt::Debug for ZMod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.ring.modulus)
    }
}

impl fmt::Display for ZMod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl ZMod {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn ring(&self) -> PrimePower {
        self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn is_unit(&self) -> bool {
        self.ring.is_unit(self.value)
    }

    /// p-adic valuation, saturated at `m` for zero.
    pub fn valuation(&self) -> u32 {
        self.ring.valuation(self.value)
    }

    pub fn inverse(&self) -> Option<ZMod> {
        self.ring.inverse(self.value).map(|v| ZMod { value: v, ring: self.ring })
    }

    pub fn pow(&self, e: u64) -> ZMod {
        ZMod { value: pow_mod(self.value, e, self.ring.modulus), ring: self.ring }
    }

    /// Reduction to the residue field `F_p`.
    pub fn reduce_mod_p(&self) -> ZMod {
        let f = self.ring.residue_field();
        f.elem(self.value)
    }
}

impl Add for ZMod {
    type Output = ZMod;
    fn add(self, rhs: ZMod) -> ZMod {
        debug_assert_eq!(self.ring, rhs.ring);
        ZMod { value: self.ring.add(self.value, rhs.value), ring: self.ring }
    }
}

impl Sub for ZMod {
    type Output = ZMod;
    fn sub(self, rhs: ZMod) -> ZMod {
        debug_assert_eq!(self.ring, rhs.ring);
        ZMod { value: self.ring.sub(self.value, rhs.value), ring: self.ring }
    }
}

impl Mul for ZMod {
    type Output = ZMod;
    fn mul(self, rhs: ZMod) -> ZMod {
        debug_assert_eq!(self.ring, rhs.ring);
        ZMod { value: self.ring.mul(self.value, rhs.value), ring: self.ring }
    }
}

impl Neg for ZMod {
    type Output = ZMod;
    fn neg(self) -> ZMod {
        ZMod { value: self.ring.neg(self.value), ring: self.ring }
    }
}

/// A linear system `matrix * x = rhs` over one ring `Z/p^m`.
///
/// Entries are canonical residues; the matrix is row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinSystem {
    ring: PrimePower,
    rows: usize,
    cols: usize,
    matrix: Vec<u64>,
    rhs: Vec<u64>,
}

/// One generator of the solution kernel together with its additive order `p^order_exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelGen {
    pub vector: Vec<u64>,
    pub order_exp: u32,
}

/// Why a system has no solution: the diagonal of the reduced form and the
/// transformed equations that cannot be met.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cokernel {
    /// Valuations of the reduced diagonal; zero rows are reported as `m`.
    pub invariant_valuations: Vec<u32>,
    /// Indices (in reduced coordinates) of the violated equations.
    pub violated: Vec<usize>,
    /// Transformed right-hand side at the violated equations.
    pub residues: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AffineSolution {
    Solved { particular: Vec<u64>, kernel: Vec<KernelGen> },
    NoSolution(Cokernel),
}

impl AffineSolution {
    pub fn is_solved(&self) -> bool {
        matches!(self, AffineSolution::Solved { .. })
    }
}

impl LinSystem {
    pub fn new(
        ring: PrimePower,
        rows: usize,
        cols: usize,
        matrix: Vec<u64>,
        rhs: Vec<u64>,
    ) -> Result<Self, RingError> {
        if matrix.len() != rows * cols || rhs.len() != rows {
            return Err(RingError::Dimension { rows, cols, rhs: rhs.len() });
        }
        let matrix = matrix.into_iter().map(|v| v % ring.modulus).collect();
        let rhs = rhs.into_iter().map(|v| v % ring.modulus).collect();
        Ok(LinSystem { ring, rows, cols, matrix, rhs })
    }

    pub fn ring(&self) -> PrimePower {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.matrix[i * self.cols + j]
    }

    pub fn rhs(&self) -> &[u64] {
        &self.rhs
    }

    /// Checks `matrix * x == rhs`.
    pub fn satisfied_by(&self, x: &[u64]) -> bool {
        x.len() == self.cols
            && (0..self.rows).all(|i| {
                let mut acc = 0u64;
                for (j, &xj) in x.iter().enumerate() {
                    acc = self.ring.add(acc, self.ring.mul(self.entry(i, j), xj));
                }
                acc == self.rhs[i]
            })
    }
}

/// Solves an affine system over `Z/p^m`.
///
/// The matrix is diagonalised with row and column operations. Each step pivots
/// on an entry of minimal valuation in the remaining block; ties go to the
/// lowest column, then the lowest row. The solution set is
/// `particular + span(kernel)`.
pub fn solve_affine(sys: &LinSystem) -> AffineSolution {
    let ring = sys.ring;
    let (rows, cols) = (sys.rows, sys.cols);
    let mut a = sys.matrix.clone();
    let mut b = sys.rhs.clone();
    // Column transform: x = q * y.
    let mut q = vec![0u64; cols * cols];
    for j in 0..cols {
        q[j * cols + j] = 1;
    }
    let rank_bound = rows.min(cols);
    let mut pivots: Vec<(u32, u64)> = Vec::with_capacity(rank_bound);
    for t in 0..rank_bound {
        let mut best: Option<(u32, usize, usize)> = None;
        for j in t..cols {
            for i in t..rows {
                let v = a[i * cols + j];
                if v == 0 {
                    continue;
                }
                let val = ring.valuation(v);
                if best.map_or(true, |(bv, _, _)| val < bv) {
                    best = Some((val, i, j));
                }
            }
            if let Some((0, _, _)) = best {
                break;
            }
        }
        let Some((val, pi, pj)) = best else { break };
        if pi != t {
            for j in 0..cols {
                a.swap(t * cols + j, pi * cols + j);
            }
            b.swap(t, pi);
        }
        if pj != t {
            for i in 0..rows {
                a.swap(i * cols + t, i * cols + pj);
            }
            for i in 0..cols {
                q.swap(i * cols + t, i * cols + pj);
            }
        }
        let pv = ring.p_power(val);
        let unit = a[t * cols + t] / pv.max(1);
        let unit_inv = ring.inverse(unit).expect("pivot cofactor is a unit");
        for i in 0..rows {
            if i == t {
                continue;
            }
            let v = a[i * cols + t];
            if v == 0 {
                continue;
            }
            let factor = ring.mul(v / pv, unit_inv);
            for j in t..cols {
                let sub = ring.mul(factor, a[t * cols + j]);
                a[i * cols + j] = ring.sub(a[i * cols + j], sub);
            }
            b[i] = ring.sub(b[i], ring.mul(factor, b[t]));
        }
        for j in (t + 1)..cols {
            let v = a[t * cols + j];
            if v == 0 {
                continue;
            }
            let factor = ring.mul(v / pv, unit_inv);
            a[t * cols + j] = 0;
            for i in 0..cols {
                let sub = ring.mul(factor, q[i * cols + t]);
                q[i * cols + j] = ring.sub(q[i * cols + j], sub);
            }
        }
        pivots.push((val, unit_inv));
    }
    let rank = pivots.len();

    let mut violated = Vec::new();
    let mut y = vec![0u64; cols];
    for (t, &(val, unit_inv)) in pivots.iter().enumerate() {
        if ring.valuation(b[t]) < val {
            violated.push(t);
            continue;
        }
        let pv = ring.p_power(val).max(1);
        y[t] = ring.mul(b[t] / pv, unit_inv);
    }
    for t in rank..rows {
        if b[t] != 0 {
            violated.push(t);
        }
    }
    if !violated.is_empty() {
        let mut invariant_valuations: Vec<u32> = pivots.iter().map(|&(v, _)| v).collect();
        invariant_valuations.extend(core::iter::repeat(ring.m).take(rows - rank));
        let residues = violated.iter().map(|&t| b[t]).collect();
        return AffineSolution::NoSolution(Cokernel { invariant_valuations, violated, residues });
    }

    let apply_q = |yv: &[u64]| -> Vec<u64> {
        (0..cols)
            .map(|i| {
                let mut acc = 0u64;
                for (j, &yj) in yv.iter().enumerate() {
                    if yj != 0 {
                        acc = ring.add(acc, ring.mul(q[i * cols + j], yj));
                    }
                }
                acc
            })
            .collect()
    };
    let particular = apply_q(&y);
    let mut kernel = Vec::new();
    for (t, &(val, _)) in pivots.iter().enumerate() {
        if val > 0 {
            let mut e = vec![0u64; cols];
            e[t] = ring.p_power(ring.m - val);
            kernel.push(KernelGen { vector: apply_q(&e), order_exp: val });
        }
    }
    for t in rank..cols {
        let mut e = vec![0u64; cols];
        e[t] = 1;
        kernel.push(KernelGen { vector: apply_q(&e), order_exp: ring.m });
    }
    AffineSolution::Solved { particular, kernel }
}

/// Row rank of a matrix over `F_p`; rows may have any residues (reduced here).
pub fn fp_rank(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&v| v % p).collect()).collect();
    let cols = m.iter().map(Vec::len).max().unwrap_or(0);
    for r in &mut m {
        r.resize(cols, 0);
    }
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, pr);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = mul_mod(m[r][c], inv, p);
                for k in c..cols {
                    let sub = mul_mod(f, m[rank][k], p);
                    m[r][k] = (m[r][k] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}
