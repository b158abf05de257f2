//! Integer polynomials: parsing, arithmetic, discriminants and real-root counts.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::NumError;

/// A polynomial with integer coefficients, stored lowest degree first with no
/// trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ZPoly {
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { "-" } else { "+" })?;
            }
            first = false;
            let unit = a.is_one();
            match i {
                0 => write!(f, "{a}")?,
                1 if unit => f.write_str("x")?,
                1 => write!(f, "{a}*x")?,
                _ if unit => write!(f, "x^{i}")?,
                _ => write!(f, "{a}*x^{i}")?,
            }
        }
        Ok(())
    }
}

impl ZPoly {
    /// From coefficients, lowest degree first.
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        ZPoly { coeffs }
    }

    /// From coefficients, highest degree first (as the polynomial is written).
    pub fn from_descending<T: Into<BigInt> + Clone>(coeffs: &[T]) -> Self {
        ZPoly::new(coeffs.iter().rev().cloned().map(Into::into).collect())
    }

    pub fn x() -> Self {
        ZPoly::new(vec![BigInt::zero(), BigInt::one()])
    }

    /// Parses expressions such as `x^8-32*x^6+344*x^4-512*x^2+1936`.
    ///
    /// Terms are `c`, `c*x`, `c*x^k`, `x^k` (the `*` is optional); the variable
    /// is `x` and whitespace is ignored.
    pub fn parse(s: &str) -> Result<Self, NumError> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || NumError::Parse(String::from(s));
        if text.is_empty() {
            return Err(bad());
        }
        let bytes = text.as_bytes();
        let mut coeffs: Vec<BigInt> = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let mut sign = BigInt::one();
            if bytes[i] == b'+' || bytes[i] == b'-' {
                if bytes[i] == b'-' {
                    sign = -sign;
                }
                i += 1;
            } else if i > 0 {
                return Err(bad());
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let coeff = if i > start { text[start..i].parse::<BigInt>().map_err(|_| bad())? } else { BigInt::one() };
            let has_digits = i > start;
            if i < bytes.len() && bytes[i] == b'*' {
                if !has_digits {
                    return Err(bad());
                }
                i += 1;
                if i >= bytes.len() || bytes[i] != b'x' {
                    return Err(bad());
                }
            }
            let mut degree = 0usize;
            if i < bytes.len() && bytes[i] == b'x' {
                i += 1;
                degree = 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let s2 = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == s2 {
                        return Err(bad());
                    }
                    degree = text[s2..i].parse::<usize>().map_err(|_| bad())?;
                    if degree > 4096 {
                        return Err(bad());
                    }
                }
            } else if !has_digits {
                return Err(bad());
            }
            if coeffs.len() <= degree {
                coeffs.resize(degree + 1, BigInt::zero());
            }
            coeffs[degree] += sign * coeff;
        }
        Ok(ZPoly::new(coeffs))
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn derivative(&self) -> ZPoly {
        ZPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn neg(&self) -> ZPoly {
        ZPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, other: &ZPoly) -> ZPoly {
        if self.is_zero() || other.is_zero() {
            return ZPoly::new(Vec::new());
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ZPoly::new(out)
    }

    /// The gcd of the coefficients (nonnegative).
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn primitive_part(&self) -> ZPoly {
        let c = self.content();
        if c.is_zero() || c.is_one() {
            return self.clone();
        }
        ZPoly::new(self.coeffs.iter().map(|x| x / &c).collect())
    }

    /// Pseudo-remainder `lc(b)^(deg a - deg b + 1) * a mod b`.
    pub fn pseudo_rem(&self, b: &ZPoly) -> ZPoly {
        let db = b.degree().expect("nonzero divisor");
        let lb = b.leading();
        let mut r = self.coeffs.clone();
        let Some(da) = self.degree() else { return ZPoly::new(r) };
        if da < db {
            return self.clone();
        }
        let steps = da - db + 1;
        for k in (0..steps).rev() {
            // r has degree <= db + k here
            let top = r.get(db + k).cloned().unwrap_or_default();
            for c in r.iter_mut() {
                *c *= &lb;
            }
            if !top.is_zero() {
                for (j, bc) in b.coeffs.iter().enumerate() {
                    r[k + j] -= &top * bc;
                }
            }
        }
        r.truncate(db);
        ZPoly::new(r)
    }

    /// Exact division; `None` if `b` does not divide `self` over `Z`.
    pub fn div_exact(&self, b: &ZPoly) -> Option<ZPoly> {
        let db = b.degree()?;
        let lb = b.leading();
        let mut r = self.coeffs.clone();
        let Some(da) = self.degree() else { return Some(ZPoly::new(Vec::new())) };
        if da < db {
            return None;
        }
        let mut q = vec![BigInt::zero(); da - db + 1];
        for k in (0..=(da - db)).rev() {
            let top = r[db + k].clone();
            if top.is_zero() {
                continue;
            }
            let (qc, rem) = top.div_rem(&lb);
            if !rem.is_zero() {
                return None;
            }
            for (j, bc) in b.coeffs.iter().enumerate() {
                r[k + j] -= &qc * bc;
            }
            q[k] = qc;
        }
        r.iter().all(Zero::is_zero).then(|| ZPoly::new(q))
    }

    /// Resultant via the Sylvester determinant.
    pub fn resultant(&self, other: &ZPoly) -> BigInt {
        let (Some(m), Some(n)) = (self.degree(), other.degree()) else { return BigInt::zero() };
        let size = m + n;
        if size == 0 {
            return BigInt::one();
        }
        let mut mat = vec![vec![BigInt::zero(); size]; size];
        for (row, r) in mat.iter_mut().enumerate().take(n) {
            for (i, c) in self.coeffs.iter().rev().enumerate() {
                r[row + i] = c.clone();
            }
        }
        for row in 0..m {
            for (i, c) in other.coeffs.iter().rev().enumerate() {
                mat[n + row][row + i] = c.clone();
            }
        }
        bareiss_det(mat)
    }

    /// `disc(f) = (-1)^(n(n-1)/2) res(f, f') / lc(f)`.
    pub fn discriminant(&self) -> BigInt {
        let n = self.degree().unwrap_or(0);
        if n == 0 {
            return BigInt::zero();
        }
        if n == 1 {
            return BigInt::one();
        }
        let res = self.resultant(&self.derivative());
        let d = res / self.leading();
        if (n * (n - 1) / 2) % 2 == 1 {
            -d
        } else {
            d
        }
    }

    /// Number of distinct real roots by Sturm's theorem.
    pub fn real_root_count(&self) -> usize {
        let Some(n) = self.degree() else { return 0 };
        if n == 0 {
            return 0;
        }
        let seq = self.sturm_sequence();
        let at_pos: Vec<i8> = seq.iter().map(|p| sign(&p.leading())).collect();
        let at_neg: Vec<i8> = seq
            .iter()
            .map(|p| {
                let s = sign(&p.leading());
                if p.degree().unwrap_or(0) % 2 == 1 {
                    -s
                } else {
                    s
                }
            })
            .collect();
        sign_changes(&at_neg).saturating_sub(sign_changes(&at_pos))
    }

    /// `f, f', -rem(f, f'), ...` with positive multiples of the true remainders.
    fn sturm_sequence(&self) -> Vec<ZPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let a = &seq[seq.len() - 2];
            let b = &seq[seq.len() - 1];
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            let delta = a.degree().unwrap() - b.degree().unwrap();
            let r = a.pseudo_rem(b);
            if r.is_zero() {
                break;
            }
            // prem = lc(b)^(delta+1) * rem; fix the sign so the entry is -rem up to a positive factor
            let lc_sign = sign(&b.leading());
            let factor_negative = lc_sign < 0 && (delta + 1) % 2 == 1;
            let next = if factor_negative { r } else { r.neg() };
            seq.push(next.primitive_part());
        }
        seq
    }
}

fn sign(x: &BigInt) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn sign_changes(signs: &[i8]) -> usize {
    let nz: Vec<i8> = signs.iter().copied().filter(|&s| s != 0).collect();
    nz.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Fraction-free Gaussian elimination.
pub(crate) fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign_flip = false;
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else { return BigInt::zero() };
            a.swap(k, swap);
            sign_flip = !sign_flip;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign_flip {
        -det
    } else {
        det
    }
}
