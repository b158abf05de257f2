//! Truncated Magnus expansions `x_i -> 1 + X_i` into `F_p<<X_1..X_d>>`.
//!
//! Variables are 0-based in code; `X_1` is index 0.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::groups::Presentation;
use crate::ring::is_prime;
use crate::word::Word;

pub const DEFAULT_MILD_DEGREE: u32 = 3;
pub const MAX_MILD_DEGREE: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MagnusError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("truncation degree must be at least 1")]
    ZeroDegree,
    #[error("mildness degree must be in 2..={MAX_MILD_DEGREE}, got {0}")]
    MildDegree(u32),
    #[error("the zero series has no leading term")]
    ZeroSeries,
    #[error("word uses generator {gen} but only {vars} variables exist")]
    VariableRange { gen: usize, vars: usize },
    #[error("monomial order must be a permutation of 0..{0}")]
    BadOrder(usize),
    #[error("relator {relator} has a nonzero linear Magnus term: the presentation is not minimal")]
    NonFrattiniRelator { relator: usize },
    #[error("character has {got} values for {expected} generators")]
    CharacterLength { expected: usize, got: usize },
}

/// A noncommutative monomial `X_{w_0} X_{w_1} ...`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(pub Vec<usize>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        Monomial(vec![i])
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    fn times_power(&self, var: usize, k: usize) -> Monomial {
        let mut w = self.0.clone();
        w.extend(core::iter::repeat(var).take(k));
        Monomial(w)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let mut i = 0;
        while i < self.0.len() {
            let v = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == v {
                run += 1;
            }
            if run == 1 {
                write!(f, "X{}", v + 1)?;
            } else {
                write!(f, "X{}^{}", v + 1, run)?;
            }
            i += run;
        }
        Ok(())
    }
}

/// An element of `F_p<<X_1..X_d>>` truncated above `max_degree`.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncSeries {
    p: u64,
    vars: usize,
    max_degree: u32,
    coeffs: BTreeMap<Monomial, u64>,
}

impl fmt::Debug for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut terms: Vec<(&Monomial, &u64)> = self.coeffs.iter().collect();
        terms.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then(a.0.cmp(b.0)));
        for (k, (m, c)) in terms.into_iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if m.degree() == 0 {
                write!(f, "{c}")?;
            } else if *c == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}*{m}")?;
            }
        }
        Ok(())
    }
}

impl TruncSeries {
    pub fn zero(p: u64, vars: usize, max_degree: u32) -> Self {
        TruncSeries { p, vars, max_degree, coeffs: BTreeMap::new() }
    }

    pub fn one(p: u64, vars: usize, max_degree: u32) -> Self {
        let mut s = Self::zero(p, vars, max_degree);
        s.coeffs.insert(Monomial::one(), 1 % p);
        s.coeffs.retain(|_, c| *c != 0);
        s
    }

    /// Builds a series from explicit terms; coefficients are reduced mod `p`
    /// and terms above the truncation degree are dropped.
    pub fn from_terms(p: u64, vars: usize, max_degree: u32, terms: &[(Monomial, i64)]) -> Self {
        let mut s = Self::zero(p, vars, max_degree);
        for (m, c) in terms {
            let c = c.rem_euclid(p as i64) as u64;
            s.add_term(m.clone(), c);
        }
        s
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> u64 {
        self.coeffs.get(m).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u64)> {
        self.coeffs.iter().map(|(m, c)| (m, *c))
    }

    fn add_term(&mut self, m: Monomial, c: u64) {
        if c == 0 || m.degree() > self.max_degree as usize {
            return;
        }
        let v = ((self.coeff(&m) as u128 + c as u128) % self.p as u128) as u64;
        if v == 0 {
            self.coeffs.remove(&m);
        } else {
            self.coeffs.insert(m, v);
        }
    }

    /// `self - 1`.
    pub fn minus_one(&self) -> Self {
        let mut s = self.clone();
        s.add_term(Monomial::one(), self.p - 1);
        s
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        let mut s = self.clone();
        for (m, c) in &other.coeffs {
            s.add_term(m.clone(), *c);
        }
        s
    }

    /// Truncated product.
    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        let mut acc: BTreeMap<Monomial, u128> = BTreeMap::new();
        let d = self.max_degree.min(other.max_degree) as usize;
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                if a.degree() + b.degree() > d {
                    continue;
                }
                let mut w = a.0.clone();
                w.extend_from_slice(&b.0);
                let e = acc.entry(Monomial(w)).or_insert(0);
                *e = (*e + (*ca as u128) * (*cb as u128)) % self.p as u128;
            }
        }
        TruncSeries {
            p: self.p,
            vars: self.vars.max(other.vars),
            max_degree: d as u32,
            coeffs: acc.into_iter().filter(|(_, c)| *c != 0).map(|(m, c)| (m, c as u64)).collect(),
        }
    }

    /// Right multiplication by `(1 + X_var)^e`.
    fn mul_power(&self, var: usize, e: &BigInt) -> TruncSeries {
        let d = self.max_degree as usize;
        let binoms: Vec<u64> = (0..=d).map(|k| binomial_mod(e, k, self.p)).collect();
        let mut out = TruncSeries::zero(self.p, self.vars, self.max_degree);
        let mut acc: BTreeMap<Monomial, u128> = BTreeMap::new();
        for (m, c) in &self.coeffs {
            for (k, b) in binoms.iter().enumerate().take(d - m.degree() + 1) {
                if *b == 0 {
                    continue;
                }
                let e = acc.entry(m.times_power(var, k)).or_insert(0);
                *e = (*e + (*c as u128) * (*b as u128)) % self.p as u128;
            }
        }
        out.coeffs = acc.into_iter().filter(|(_, c)| *c != 0).map(|(m, c)| (m, c as u64)).collect();
        out
    }

    /// The homogeneous part of degree `k`.
    pub fn homogeneous(&self, k: usize) -> Vec<(Monomial, u64)> {
        self.coeffs.iter().filter(|(m, _)| m.degree() == k).map(|(m, c)| (m.clone(), *c)).collect()
    }
}

/// Generalized binomial coefficient `C(e, k)` reduced mod `p`; `e` may be negative.
fn binomial_mod(e: &BigInt, k: usize, p: u64) -> u64 {
    // C(e, k) mod p depends only on e mod p^L once p^L > k.
    let mut pl = BigInt::one();
    while pl <= BigInt::from(k) {
        pl *= p;
    }
    let e = e.mod_floor(&pl);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= &e - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    let c = num / den;
    c.mod_floor(&BigInt::from(p)).to_u64().expect("residue below p")
}

/// The Magnus image of `word`, truncated above degree `max_degree`.
pub fn magnus_expand(word: &Word, vars: usize, max_degree: u32, p: u64) -> Result<TruncSeries, MagnusError> {
    if !is_prime(p) {
        return Err(MagnusError::NotPrime(p));
    }
    if max_degree == 0 {
        return Err(MagnusError::ZeroDegree);
    }
    if let Some(g) = word.max_generator().filter(|&g| g >= vars) {
        return Err(MagnusError::VariableRange { gen: g, vars });
    }
    let mut s = TruncSeries::one(p, vars, max_degree);
    for l in &word.0 {
        if l.exp.is_zero() {
            continue;
        }
        s = s.mul_power(l.gen, &l.exp);
    }
    Ok(s)
}

/// A total order on the variables; monomials compare by degree, then
/// left-lexicographically using this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MonomialOrder {
    rank: Vec<usize>,
}

impl MonomialOrder {
    /// `X_d > X_{d-1} > ... > X_1`.
    pub fn natural(vars: usize) -> Self {
        MonomialOrder { rank: (0..vars).collect() }
    }

    /// Variables listed from greatest to least.
    pub fn from_descending(order: &[usize]) -> Result<Self, MagnusError> {
        let d = order.len();
        let mut rank = vec![usize::MAX; d];
        for (pos, &v) in order.iter().enumerate() {
            if v >= d || rank[v] != usize::MAX {
                return Err(MagnusError::BadOrder(d));
            }
            rank[v] = d - 1 - pos;
        }
        Ok(MonomialOrder { rank })
    }

    pub fn vars(&self) -> usize {
        self.rank.len()
    }

    /// Variables from greatest to least.
    pub fn descending(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.rank.len()).collect();
        v.sort_by(|a, b| self.rank[*b].cmp(&self.rank[*a]));
        v
    }

    pub fn var_greater(&self, a: usize, b: usize) -> bool {
        self.rank[a] > self.rank[b]
    }

    /// Left-lexicographic comparison of equal-degree monomials.
    pub fn cmp_lex(&self, a: &Monomial, b: &Monomial) -> Ordering {
        for (x, y) in a.0.iter().zip(&b.0) {
            match self.rank[*x].cmp(&self.rank[*y]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        a.degree().cmp(&b.degree())
    }
}

/// The term of lowest degree, and among those the largest in left-lex order.
pub fn leading_term(s: &TruncSeries, order: &MonomialOrder) -> Result<(Monomial, u64), MagnusError> {
    let mut best: Option<(&Monomial, u64)> = None;
    for (m, c) in s.terms() {
        if let Some(v) = m.0.iter().find(|&&v| v >= order.vars()) {
            return Err(MagnusError::VariableRange { gen: *v, vars: order.vars() });
        }
        best = match best {
            None => Some((m, c)),
            Some((bm, bc)) => {
                let better = match m.degree().cmp(&bm.degree()) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => order.cmp_lex(m, bm) == Ordering::Greater,
                };
                if better {
                    Some((m, c))
                } else {
                    Some((bm, bc))
                }
            }
        };
    }
    best.map(|(m, c)| (m.clone(), c)).ok_or(MagnusError::ZeroSeries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    /// Degree-1 part nonzero: the relator is not in the Frattini subgroup.
    NotFrattini,
    /// Leading term has degree at least 3.
    NonQuadratic,
    /// Quadratic leading term `X_a X_b` without `X_a > X_b`.
    WrongShape,
    /// Some head variable is also a tail variable.
    HeadTailOverlap,
    /// The relator maps to 1 up to the truncation degree.
    Inconclusive,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::NotFrattini => "relator has a linear term",
            RejectReason::NonQuadratic => "leading term is not quadratic",
            RejectReason::WrongShape => "quadratic leading term is not X_a X_b with X_a > X_b",
            RejectReason::HeadTailOverlap => "a head variable is also a tail variable",
            RejectReason::Inconclusive => "inconclusive at truncation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub relator: usize,
    pub leading: Option<(Monomial, u64)>,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MildError {
    #[error("relator {} rejected: {}", .0.relator, .0.reason)]
    Rejected(Rejection),
    #[error(transparent)]
    Magnus(#[from] MagnusError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MildCertificate {
    /// `(head, tail)` per relator: the leading monomial is `X_head X_tail`.
    pub leading: Vec<(usize, usize)>,
    pub heads: BTreeSet<usize>,
    pub tails: BTreeSet<usize>,
    pub order: MonomialOrder,
    pub degree: u32,
    /// Set for `p = 2`, where squares contribute diagonal quadratic terms.
    pub p_two_convention: bool,
}

/// Certifies mildness with respect to `order` from the quadratic leading
/// terms of the relators, expanding up to `degree` (2..=6).
pub fn check_mild(pres: &Presentation, order: &MonomialOrder, degree: u32) -> Result<MildCertificate, MildError> {
    if !(2..=MAX_MILD_DEGREE).contains(&degree) {
        return Err(MagnusError::MildDegree(degree).into());
    }
    let d = pres.num_generators();
    if order.vars() != d {
        return Err(MagnusError::BadOrder(d).into());
    }
    let mut leading = Vec::new();
    let mut heads = BTreeSet::new();
    let mut tails = BTreeSet::new();
    for (r, rel) in pres.relators().iter().enumerate() {
        let s = magnus_expand(rel, d, degree, pres.p())?.minus_one();
        let reject = |lead: Option<(Monomial, u64)>, reason| {
            Err(MildError::Rejected(Rejection { relator: r, leading: lead, reason }))
        };
        if s.is_zero() {
            return reject(None, RejectReason::Inconclusive);
        }
        let (m, c) = leading_term(&s, order)?;
        match m.degree() {
            1 => return reject(Some((m, c)), RejectReason::NotFrattini),
            2 => {}
            _ => return reject(Some((m, c)), RejectReason::NonQuadratic),
        }
        let (a, b) = (m.0[0], m.0[1]);
        if !order.var_greater(a, b) {
            return reject(Some((m, c)), RejectReason::WrongShape);
        }
        leading.push((a, b));
        heads.insert(a);
        tails.insert(b);
        if !heads.is_disjoint(&tails) {
            return reject(Some((m, c)), RejectReason::HeadTailOverlap);
        }
    }
    Ok(MildCertificate { leading, heads, tails, order: order.clone(), degree, p_two_convention: pres.p() == 2 })
}

/// `eps[i][j]` = coefficient of `X_i X_j` in the Magnus image of `relator`.
///
/// Fails if the relator has a linear term.
pub fn quadratic_coeffs(relator: &Word, vars: usize, p: u64) -> Result<Vec<Vec<u64>>, MagnusError> {
    let s = magnus_expand(relator, vars, 2, p)?;
    if !s.homogeneous(1).is_empty() {
        return Err(MagnusError::NonFrattiniRelator { relator: 0 });
    }
    let mut eps = vec![vec![0u64; vars]; vars];
    for (m, c) in s.homogeneous(2) {
        eps[m.0[0]][m.0[1]] = c;
    }
    Ok(eps)
}

/// Cup product of two characters evaluated on each relator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CupValue {
    pub components: Vec<u64>,
    pub p_two_convention: bool,
}

impl CupValue {
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|&c| c == 0)
    }
}

/// Quadratic coefficient matrices of every relator.
pub fn relator_quadratics(pres: &Presentation) -> Result<Vec<Vec<Vec<u64>>>, MagnusError> {
    let d = pres.num_generators();
    pres.relators()
        .iter()
        .enumerate()
        .map(|(r, w)| {
            quadratic_coeffs(w, d, pres.p()).map_err(|e| match e {
                MagnusError::NonFrattiniRelator { .. } => MagnusError::NonFrattiniRelator { relator: r },
                other => other,
            })
        })
        .collect()
}

pub(crate) fn pair_eps(eps: &[Vec<Vec<u64>>], chi_a: &[u64], chi_b: &[u64], p: u64) -> Vec<u64> {
    eps.iter()
        .map(|e| {
            let mut acc = 0u128;
            for (i, row) in e.iter().enumerate() {
                if chi_a[i] == 0 {
                    continue;
                }
                for (j, &c) in row.iter().enumerate() {
                    acc = (acc + c as u128 * chi_a[i] as u128 % p as u128 * chi_b[j] as u128) % p as u128;
                }
            }
            acc as u64
        })
        .collect()
}

/// `sum_{i,j} eps_k[i][j] chi_a(x_i) chi_b(x_j)` for each relator `l_k`.
pub fn cup_value(chi_a: &[u64], chi_b: &[u64], pres: &Presentation) -> Result<CupValue, MagnusError> {
    let d = pres.num_generators();
    for chi in [chi_a, chi_b] {
        if chi.len() != d {
            return Err(MagnusError::CharacterLength { expected: d, got: chi.len() });
        }
    }
    let p = pres.p();
    let a: Vec<u64> = chi_a.iter().map(|v| v % p).collect();
    let b: Vec<u64> = chi_b.iter().map(|v| v % p).collect();
    let eps = relator_quadratics(pres)?;
    Ok(CupValue { components: pair_eps(&eps, &a, &b, p), p_two_convention: p == 2 })
}
