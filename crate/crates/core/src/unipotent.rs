//! Upper unitriangular matrices over `Z/p^m`.
//!
//! Indices are 0-based: the superdiagonal is `(i, i + 1)` for `i < n` and the
//! corner is `(0, n)`. Elements are stored densely; `n <= 32`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::ToPrimitive;

use crate::ring::{fp_rank, PrimePower};

pub const MAX_N: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UniError {
    #[error("matrix size parameter n must be in 1..={MAX_N}, got {0}")]
    BadSize(usize),
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(UniShape, UniShape),
    #[error("expected {expected} strictly upper entries, got {got}")]
    EntryCount { expected: usize, got: usize },
    #[error("entry {value} is not a residue in [0, {modulus})")]
    EntryRange { value: u64, modulus: u64 },
    #[error("the quotient by the corner entry is only provided over F_p")]
    NotPrimeField,
    #[error("group of order {order_log} powers of p is too large to enumerate")]
    TooLarge { order_log: u64 },
}

/// `U_{n+1}(Z/p^m)`: matrices are `(n+1) x (n+1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UniShape {
    n: usize,
    ring: PrimePower,
}

impl fmt::Debug for UniShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U_{}({:?})", self.n + 1, self.ring)
    }
}

impl UniShape {
    pub fn new(n: usize, ring: PrimePower) -> Result<Self, UniError> {
        if n == 0 || n > MAX_N {
            return Err(UniError::BadSize(n));
        }
        Ok(UniShape { n, ring })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn ring(&self) -> PrimePower {
        self.ring
    }

    /// Number of strictly upper entries, `n(n+1)/2`.
    pub fn strict_len(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn with_ring(&self, ring: PrimePower) -> UniShape {
        UniShape { n: self.n, ring }
    }

    pub fn identity(&self) -> UniMatrix {
        let d = self.dim();
        let mut entries = vec![0u64; d * d];
        for i in 0..d {
            entries[i * d + i] = 1;
        }
        UniMatrix { shape: *self, entries }
    }

    /// `I + a * E_{i,j}` for `i < j`.
    pub fn elementary(&self, i: usize, j: usize, a: u64) -> UniMatrix {
        let mut m = self.identity();
        m.set(i, j, a);
        m
    }

    /// `m + ceil(log_p n)`; `p` to this power is a multiple of the group exponent.
    pub fn exponent_log(&self) -> u32 {
        let p = self.ring.p() as u128;
        let mut c = 0u32;
        let mut pw = 1u128;
        while pw < self.n as u128 {
            pw *= p;
            c += 1;
        }
        self.ring.m() + c
    }

    /// A multiple of the group exponent; fits in `u128` for every valid shape.
    pub fn exponent(&self) -> u128 {
        (self.ring.p() as u128).pow(self.exponent_log())
    }

    /// Reduces an integer exponent into `[0, exponent)`.
    pub fn reduce_exponent(&self, e: &BigInt) -> u128 {
        let modulus = BigInt::from(BigUint::from(self.exponent()));
        let mut r = e % &modulus;
        if r.sign() == Sign::Minus {
            r += &modulus;
        }
        r.to_u128().expect("reduced exponent fits in u128")
    }

    /// Every element of the group, in lexicographic order of strict entries.
    ///
    /// Refuses groups with more than `2^24` elements.
    pub fn elements(&self) -> Result<Vec<UniMatrix>, UniError> {
        let len = self.strict_len() as u32;
        let modulus = self.ring.modulus();
        let bits = (64 - modulus.leading_zeros()) as u64 * len as u64;
        let total = (modulus as u128).checked_pow(len).filter(|&t| t <= 1 << 24);
        let Some(total) = total else {
            return Err(UniError::TooLarge { order_log: bits });
        };
        let mut out = Vec::with_capacity(total as usize);
        let mut digits = vec![0u64; len as usize];
        for _ in 0..total {
            out.push(UniMatrix::from_strict_upper(*self, &digits).expect("digits in range"));
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < modulus {
                    break;
                }
                *d = 0;
            }
        }
        Ok(out)
    }
}

/// An element of `U_{n+1}(Z/p^m)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UniMatrix {
    shape: UniShape,
    entries: Vec<u64>,
}

impl fmt::Debug for UniMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}[", self.shape)?;
        let d = self.shape.dim();
        for i in 0..d {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..d {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.entries[i * d + j])?;
            }
        }
        write!(f, "]")
    }
}

impl UniMatrix {
    /// Builds a matrix from its strictly upper entries listed row by row.
    pub fn from_strict_upper(shape: UniShape, strict: &[u64]) -> Result<Self, UniError> {
        if strict.len() != shape.strict_len() {
            return Err(UniError::EntryCount { expected: shape.strict_len(), got: strict.len() });
        }
        let modulus = shape.ring.modulus();
        let mut m = shape.identity();
        let mut it = strict.iter();
        for i in 0..shape.dim() {
            for j in (i + 1)..shape.dim() {
                let &v = it.next().expect("length checked");
                if v >= modulus {
                    return Err(UniError::EntryRange { value: v, modulus });
                }
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn strict_upper(&self) -> Vec<u64> {
        let d = self.shape.dim();
        let mut out = Vec::with_capacity(self.shape.strict_len());
        for i in 0..d {
            for j in (i + 1)..d {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn shape(&self) -> UniShape {
        self.shape
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.shape.dim() + j]
    }

    /// Sets a strictly upper entry (reduced modulo `p^m`).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        debug_assert!(i < j && j < self.shape.dim());
        let d = self.shape.dim();
        self.entries[i * d + j] = v % self.shape.ring.modulus();
    }

    pub fn is_identity(&self) -> bool {
        let d = self.shape.dim();
        (0..d).all(|i| ((i + 1)..d).all(|j| self.get(i, j) == 0))
    }

    /// Entries `(i, i + k)` of the `k`-th superdiagonal.
    pub fn diagonal(&self, k: usize) -> Vec<u64> {
        let d = self.shape.dim();
        (0..d.saturating_sub(k)).map(|i| self.get(i, i + k)).collect()
    }

    fn check(&self, other: &UniMatrix) -> Result<(), UniError> {
        if self.shape != other.shape {
            return Err(UniError::ShapeMismatch(self.shape, other.shape));
        }
        Ok(())
    }

    /// Group law; both operands must have the same shape.
    pub fn compose(&self, other: &UniMatrix) -> Result<UniMatrix, UniError> {
        self.check(other)?;
        Ok(self.mul(other))
    }

    pub(crate) fn mul(&self, other: &UniMatrix) -> UniMatrix {
        debug_assert_eq!(self.shape, other.shape);
        let d = self.shape.dim();
        let modulus = self.shape.ring.modulus() as u128;
        let mut out = self.shape.identity();
        for i in 0..d {
            for j in (i + 1)..d {
                // c_ij = a_ij + b_ij + sum_{i<k<j} a_ik b_kj
                let mut acc = self.entries[i * d + j] as u128 + other.entries[i * d + j] as u128;
                for k in (i + 1)..j {
                    let a = self.entries[i * d + k];
                    if a != 0 {
                        acc = (acc + a as u128 * other.entries[k * d + j] as u128) % modulus;
                    }
                }
                out.entries[i * d + j] = (acc % modulus) as u64;
            }
        }
        out
    }

    /// Inverse by back-substitution.
    pub fn invert(&self) -> UniMatrix {
        let d = self.shape.dim();
        let ring = self.shape.ring;
        let mut inv = self.shape.identity();
        for j in 1..d {
            for i in (0..j).rev() {
                // (A X)_{ij} = X_ij + sum_{i<k<=j} a_ik X_kj = 0
                let mut acc = 0u64;
                for k in (i + 1)..=j {
                    let a = self.entries[i * d + k];
                    if a != 0 {
                        acc = ring.add(acc, ring.mul(a, inv.entries[k * d + j]));
                    }
                }
                inv.entries[i * d + j] = ring.neg(acc);
            }
        }
        inv
    }

    /// `self^e` for an arbitrary integer exponent.
    pub fn power(&self, e: &BigInt) -> UniMatrix {
        self.power_reduced(self.shape.reduce_exponent(e))
    }

    pub fn power_i64(&self, e: i64) -> UniMatrix {
        self.power(&BigInt::from(e))
    }

    /// Power by a nonnegative exponent (no reduction needed).
    pub fn power_reduced(&self, mut e: u128) -> UniMatrix {
        let mut acc = self.shape.identity();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `a b a^{-1} b^{-1}`.
    pub fn commutator(&self, other: &UniMatrix) -> Result<UniMatrix, UniError> {
        self.check(other)?;
        Ok(self.mul(other).mul(&self.invert()).mul(&other.invert()))
    }

    /// Superdiagonal reduced modulo `p`: the map onto the Frattini quotient `F_p^n`.
    pub fn phi_m(&self) -> Vec<u64> {
        let p = self.shape.ring.p();
        self.diagonal(1).into_iter().map(|v| v % p).collect()
    }

    pub fn project_quotient(&self) -> Result<QuotientUniMatrix, UniError> {
        if self.shape.ring.m() != 1 {
            return Err(UniError::NotPrimeField);
        }
        let mut inner = self.clone();
        inner.set(0, self.shape.n, 0);
        Ok(QuotientUniMatrix { inner })
    }
}

/// True iff the matrices generate `U_{n+1}(Z/p^m)`, i.e. their images under
/// [`UniMatrix::phi_m`] span `F_p^n`.
pub fn is_generating(gens: &[UniMatrix]) -> bool {
    let Some(first) = gens.first() else { return false };
    let shape = first.shape();
    if gens.iter().any(|g| g.shape() != shape) {
        return false;
    }
    frattini_rank(gens) == shape.n()
}

/// Rank over `F_p` of the images in the Frattini quotient.
pub fn frattini_rank(gens: &[UniMatrix]) -> usize {
    let Some(first) = gens.first() else { return 0 };
    let rows: Vec<Vec<u64>> = gens.iter().map(UniMatrix::phi_m).collect();
    fp_rank(&rows, first.shape().ring().p())
}

/// The subgroup generated by all `p`-th powers and commutators, closed by
/// saturation over the enumerated group.
pub fn frattini_subgroup(shape: UniShape) -> Result<BTreeSet<UniMatrix>, UniError> {
    let all = shape.elements()?;
    let p = BigInt::from(shape.ring().p());
    let mut gens: BTreeSet<UniMatrix> = all.iter().map(|a| a.power(&p)).collect();
    for a in &all {
        for b in &all {
            gens.insert(a.mul(b).mul(&a.invert()).mul(&b.invert()));
        }
    }
    let gens: Vec<UniMatrix> = gens.into_iter().filter(|g| !g.is_identity()).collect();
    let mut closure = BTreeSet::new();
    closure.insert(shape.identity());
    let mut frontier = vec![shape.identity()];
    while let Some(x) = frontier.pop() {
        for g in &gens {
            let y = x.mul(g);
            if closure.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    Ok(closure)
}

/// Elements with superdiagonal `= 0 mod p`.
pub fn phi_kernel(shape: UniShape) -> Result<BTreeSet<UniMatrix>, UniError> {
    Ok(shape.elements()?.into_iter().filter(|a| a.phi_m().iter().all(|&v| v == 0)).collect())
}

/// An element of `U_{n+1}(F_p)` modulo its center, the corner entry `(0, n)`.
///
/// Stored as a representative with zero corner.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuotientUniMatrix {
    inner: UniMatrix,
}

impl fmt::Debug for QuotientUniMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quotient{:?}", self.inner)
    }
}

impl QuotientUniMatrix {
    pub fn shape(&self) -> UniShape {
        self.inner.shape()
    }

    pub fn identity(shape: UniShape) -> Result<Self, UniError> {
        shape.identity().project_quotient()
    }

    /// Entry `(i, j)`; the corner is not part of the quotient and is not accessible.
    pub fn get(&self, i: usize, j: usize) -> Option<u64> {
        if i == 0 && j == self.inner.shape().n() {
            None
        } else {
            Some(self.inner.get(i, j))
        }
    }

    pub fn representative(&self) -> &UniMatrix {
        &self.inner
    }

    pub fn compose(&self, other: &QuotientUniMatrix) -> Result<QuotientUniMatrix, UniError> {
        self.inner.compose(&other.inner)?.project_quotient()
    }

    pub fn invert(&self) -> QuotientUniMatrix {
        let mut inner = self.inner.invert();
        inner.set(0, inner.shape().n(), 0);
        QuotientUniMatrix { inner }
    }

    pub fn is_identity(&self) -> bool {
        self.inner.is_identity()
    }

    pub fn phi(&self) -> Vec<u64> {
        self.inner.phi_m()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn u3(p: u64, m: u32) -> UniShape {
        UniShape::new(2, PrimePower::new(p, m).unwrap()).unwrap()
    }

    fn mat(shape: UniShape, strict: &[u64]) -> UniMatrix {
        UniMatrix::from_strict_upper(shape, strict).unwrap()
    }

    /// Plain (n+1)x(n+1) product over the integers reduced mod p^m: oracle for `compose`.
    fn dense_product(a: &UniMatrix, b: &UniMatrix) -> UniMatrix {
        let s = a.shape();
        let d = s.dim();
        let modulus = s.ring().modulus() as u128;
        let full = |m: &UniMatrix, i: usize, j: usize| -> u128 {
            if i == j {
                1
            } else if i < j {
                m.get(i, j) as u128
            } else {
                0
            }
        };
        let mut out = s.identity();
        for i in 0..d {
            for j in (i + 1)..d {
                let v: u128 = (0..d).map(|k| full(a, i, k) * full(b, k, j)).sum();
                out.set(i, j, (v % modulus) as u64);
            }
        }
        out
    }

    #[test]
    fn compose_examples() {
        // strict order: (0,1), (0,2), (1,2)
        let s = u3(3, 1);
        let a = mat(s, &[1, 0, 1]);
        let b = mat(s, &[1, 0, 2]);
        assert_eq!(a.compose(&b).unwrap(), mat(s, &[2, 2, 0]));
        assert_eq!(a.compose(&b).unwrap(), dense_product(&a, &b));
        assert_eq!(a.compose(&s.identity()).unwrap(), a);
        assert!(a.compose(&a.invert()).unwrap().is_identity());
        let other = u3(3, 2).identity();
        assert!(matches!(a.compose(&other), Err(UniError::ShapeMismatch(..))));
    }

    #[test]
    fn invert_examples() {
        let s = u3(3, 1);
        assert!(s.identity().invert().is_identity());
        assert_eq!(s.elementary(0, 1, 1).invert(), s.elementary(0, 1, 2));
        // (I+E12+E23)^{-1} = I - E12 - E23 + E13
        assert_eq!(mat(s, &[1, 0, 1]).invert(), mat(s, &[2, 1, 2]));
    }

    #[test]
    fn power_examples() {
        let s = u3(3, 2);
        let a = s.elementary(0, 1, 1);
        assert!(a.power_i64(9).is_identity());
        assert_eq!(a.power_i64(10), a);
        assert!(mat(s, &[4, 5, 7]).power_i64(0).is_identity());
        let huge = BigInt::from(10u64).pow(40) + 1u32;
        // 10^40 + 1 = 2 mod 9 exponent-wise on a central-free element
        assert_eq!(a.power(&huge), a.power_i64(2));
    }

    #[test]
    fn commutator_examples() {
        let s = u3(3, 1);
        let x = s.elementary(0, 1, 1);
        let y = s.elementary(1, 2, 1);
        assert_eq!(x.commutator(&y).unwrap(), s.elementary(0, 2, 1));
        assert!(x.commutator(&x).unwrap().is_identity());
        let a = mat(s, &[1, 0, 1]);
        let b = mat(s, &[1, 1, 1]);
        assert!(a.commutator(&b).unwrap().is_identity());
    }

    #[test]
    fn phi_m_and_generation() {
        let s = u3(3, 2);
        assert_eq!(s.identity().phi_m(), vec![0, 0]);
        assert_eq!(s.elementary(0, 1, 3).phi_m(), vec![0, 0]);
        assert_eq!(mat(s, &[4, 0, 1]).phi_m(), vec![1, 1]);
        let f = u3(3, 1);
        assert!(is_generating(&[f.elementary(0, 1, 1), f.elementary(1, 2, 1)]));
        assert!(!is_generating(&[f.elementary(0, 1, 1), f.elementary(0, 1, 2)]));
        assert!(!is_generating(&[mat(f, &[1, 0, 1])]));
        assert!(!is_generating(&[]));
    }

    #[test]
    fn quotient_projection() {
        let f = u3(3, 1);
        assert!(f.elementary(0, 2, 1).project_quotient().unwrap().is_identity());
        let q = f.elementary(0, 1, 1).project_quotient().unwrap();
        assert_eq!(q.get(0, 1), Some(1));
        assert_eq!(q.get(0, 2), None);
        assert_eq!(u3(3, 2).identity().project_quotient(), Err(UniError::NotPrimeField));
    }

    #[test]
    fn group_axioms_exhaustive_small() {
        for p in [2u64, 3] {
            let s = u3(p, 1);
            let all = s.elements().unwrap();
            assert_eq!(all.len() as u64, p.pow(3));
            let id = s.identity();
            for a in &all {
                assert_eq!(a.mul(&id), *a);
                assert!(a.mul(&a.invert()).is_identity());
                for b in &all {
                    let ab = a.mul(b);
                    assert_eq!(ab, dense_product(a, b));
                    for c in &all {
                        assert_eq!(ab.mul(c), a.mul(&b.mul(c)));
                    }
                }
            }
        }
    }

    #[test]
    fn frattini_is_kernel_of_phi_m() {
        for shape in [u3(3, 2), UniShape::new(3, PrimePower::new(3, 1).unwrap()).unwrap()] {
            let frat = frattini_subgroup(shape).unwrap();
            let kernel = phi_kernel(shape).unwrap();
            assert_eq!(frat.len(), kernel.len());
            assert_eq!(frat, kernel);
        }
    }

    fn arb_elem(shape: UniShape) -> impl Strategy<Value = UniMatrix> {
        let modulus = shape.ring().modulus();
        proptest::collection::vec(0..modulus, shape.strict_len())
            .prop_map(move |v| UniMatrix::from_strict_upper(shape, &v).unwrap())
    }

    fn arb_shape() -> impl Strategy<Value = UniShape> {
        (1usize..6, prop_oneof![Just((2u64, 1u32)), Just((2, 3)), Just((3, 1)), Just((3, 2)), Just((5, 2)), Just((7, 1))])
            .prop_map(|(n, (p, m))| UniShape::new(n, PrimePower::new(p, m).unwrap()).unwrap())
    }

    proptest! {
        #[test]
        fn power_is_additive(
            (a, e1, e2) in arb_shape().prop_flat_map(|s| (arb_elem(s), -100i64..100, -100i64..100)),
        ) {
            prop_assert_eq!(a.power_i64(e1 + e2), a.power_i64(e1).mul(&a.power_i64(e2)));
        }

        #[test]
        fn exponent_kills_everything(a in arb_shape().prop_flat_map(arb_elem)) {
            // explicit repeated squaring of the exponent, no reduction involved
            let e = a.shape().exponent();
            prop_assert!(a.power_reduced(e).is_identity());
        }

        #[test]
        fn quotient_projection_is_a_homomorphism(
            (a, b) in (1usize..6, prop_oneof![Just(2u64), Just(3), Just(5)])
                .prop_map(|(n, p)| UniShape::new(n, PrimePower::prime_field(p).unwrap()).unwrap())
                .prop_flat_map(|s| (arb_elem(s), arb_elem(s))),
        ) {
            let lhs = a.mul(&b).project_quotient().unwrap();
            let rhs = a.project_quotient().unwrap().compose(&b.project_quotient().unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn compose_matches_dense_product(
            (a, b) in arb_shape().prop_flat_map(|s| (arb_elem(s), arb_elem(s))),
        ) {
            prop_assert_eq!(a.mul(&b), dense_product(&a, &b));
            prop_assert!(a.mul(&a.invert()).is_identity());
            prop_assert!(a.invert().mul(&a).is_identity());
        }
    }
}
