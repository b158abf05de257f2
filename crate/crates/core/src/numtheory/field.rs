use num_bigint::BigInt;
use num_traits::Zero;

use super::factor::find_factor;
use super::poly::ZPoly;
use super::NumError;

/// `(r1, r2)` for a squarefree `f`: real roots by Sturm, the rest in conjugate pairs.
pub fn signature(f: &ZPoly) -> Result<(usize, usize), NumError> {
    let n = f.degree().filter(|&d| d > 0).ok_or(NumError::ZeroDegree)?;
    if f.discriminant().is_zero() {
        return Err(NumError::NotSquarefree);
    }
    let r1 = f.real_root_count();
    Ok((r1, (n - r1) / 2))
}

/// `Q[x]/(f)` for a monic irreducible integer polynomial `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberField {
    f: ZPoly,
    degree: usize,
    disc: BigInt,
}

impl NumberField {
    pub fn new(f: ZPoly) -> Result<Self, NumError> {
        let degree = f.degree().filter(|&d| d > 0).ok_or(NumError::ZeroDegree)?;
        if !f.is_monic() {
            return Err(NumError::NotMonic);
        }
        let disc = f.discriminant();
        if disc.is_zero() {
            return Err(NumError::NotSquarefree);
        }
        if let Some(factor) = find_factor(&f)? {
            return Err(NumError::Reducible { factor });
        }
        Ok(NumberField { f, degree, disc })
    }

    pub fn parse(s: &str) -> Result<Self, NumError> {
        NumberField::new(ZPoly::parse(s)?)
    }

    pub fn poly(&self) -> &ZPoly {
        &self.f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Discriminant of the defining polynomial (not of the maximal order).
    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    pub fn signature(&self) -> (usize, usize) {
        let r1 = self.f.real_root_count();
        (r1, (self.degree - r1) / 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::OCTIC;

    #[test]
    fn signatures() {
        for (s, sig) in [("x^2+1", (0, 1)), ("x^3-2", (1, 1)), (OCTIC, (0, 4)), ("x", (1, 0)), ("x^2-2", (2, 0))] {
            let f = ZPoly::parse(s).unwrap();
            assert_eq!(signature(&f).unwrap(), sig, "{s}");
            assert_eq!(NumberField::new(f).unwrap().signature(), sig);
        }
        assert_eq!(signature(&ZPoly::parse("x^3-x^2").unwrap()), Err(NumError::NotSquarefree));
    }

    #[test]
    fn construction_checks() {
        assert!(matches!(NumberField::parse("x^2-1"), Err(NumError::Reducible { .. })));
        assert_eq!(NumberField::parse("3*x^2+1"), Err(NumError::NotMonic));
        assert_eq!(NumberField::parse("x^2+2*x+1"), Err(NumError::NotSquarefree));
        let k = NumberField::parse(OCTIC).unwrap();
        assert_eq!(k.degree(), 8);
    }
}
