use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;

use super::field::signature;
use super::poly::ZPoly;
use super::tame::residue_degrees;
use super::NumError;
use crate::ring::is_prime;

/// Which primes above `p` make up `S ∩ S_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SMode {
    /// Every prime above `p`: `delta = deg f`.
    AllOfSp,
    /// The listed factors of `f mod p` (indices into the sorted residue degree
    /// list); needs `p` unramified in `Z[x]/(f)`.
    Subset(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankReport {
    pub p: u64,
    pub delta: usize,
    pub t_size: usize,
    pub r1: usize,
    pub r2: usize,
    /// `delta - (r1 + r2 - 1 + |T|)`.
    pub rank: i64,
    /// `2 rank + 1`.
    pub unipotent_size: i64,
}

pub fn rank_report(f: &ZPoly, p: u64, mode: &SMode, t_size: usize) -> Result<RankReport, NumError> {
    if !is_prime(p) {
        return Err(NumError::NotPrime(p));
    }
    let (r1, r2) = signature(f)?;
    let n = f.degree().expect("signature checked the degree");
    let delta = match mode {
        SMode::AllOfSp => n,
        SMode::Subset(indices) => {
            let disc = f.discriminant();
            if (&disc % BigInt::from(p)).is_zero() {
                return Err(NumError::PDividesDisc { p, disc });
            }
            let degs = residue_degrees(f, p)?.degrees();
            let mut seen = alloc::collections::BTreeSet::new();
            let mut delta = 0;
            for &i in indices {
                let d = *degs.get(i).ok_or(NumError::BadSubset { index: i, count: degs.len() })?;
                if seen.insert(i) {
                    delta += d;
                }
            }
            delta
        }
    };
    let rank = delta as i64 - (r1 as i64 + r2 as i64 - 1 + t_size as i64);
    Ok(RankReport { p, delta, t_size, r1, r2, rank, unipotent_size: 2 * rank + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::OCTIC;

    fn zp(s: &str) -> ZPoly {
        ZPoly::parse(s).unwrap()
    }

    #[test]
    fn examples() {
        let r = rank_report(&zp(OCTIC), 3, &SMode::AllOfSp, 1).unwrap();
        assert_eq!((r.delta, r.rank, r.unipotent_size), (8, 4, 9));
        let r = rank_report(&zp("x^2+1"), 5, &SMode::AllOfSp, 0).unwrap();
        assert_eq!((r.delta, r.rank), (2, 2));
        assert_eq!(rank_report(&zp("x"), 3, &SMode::AllOfSp, 0).unwrap().rank, 1);
    }

    #[test]
    fn subset_mode() {
        // x^2+1 splits mod 5: one of the two primes above 5
        let r = rank_report(&zp("x^2+1"), 5, &SMode::Subset(alloc::vec![0]), 0).unwrap();
        assert_eq!((r.delta, r.rank), (1, 1));
        assert!(matches!(
            rank_report(&zp("x^2+1"), 2, &SMode::Subset(alloc::vec![0]), 0),
            Err(NumError::PDividesDisc { .. })
        ));
        assert_eq!(
            rank_report(&zp("x^2+1"), 5, &SMode::Subset(alloc::vec![2]), 0),
            Err(NumError::BadSubset { index: 2, count: 2 })
        );
        // x^3-2 = (x+2)(x^2+3x+4) mod 5; taking both factors is the same as all of S_p
        let f = zp("x^3-2");
        assert_eq!(residue_degrees(&f, 5).unwrap().degrees(), alloc::vec![1, 2]);
        let all = rank_report(&f, 5, &SMode::AllOfSp, 0).unwrap();
        let sub = rank_report(&f, 5, &SMode::Subset(alloc::vec![0, 1]), 0).unwrap();
        assert_eq!(sub, all);
        assert_eq!(rank_report(&f, 5, &SMode::Subset(alloc::vec![1]), 0).unwrap().rank, 1);
    }
}
