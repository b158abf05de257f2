//! Group words over numbered generators.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;

/// `x_gen ^ exp`; the generator is a 0-based index into a presentation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub exp: BigInt,
}

impl Letter {
    pub fn new(gen: usize, exp: impl Into<BigInt>) -> Self {
        Letter { gen, exp: exp.into() }
    }
}

/// A product of letters, read left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation `self * other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Word(v)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| Letter { gen: l.gen, exp: -&l.exp }).collect())
    }

    /// Commutator `a b a^{-1} b^{-1}` of two words.
    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.concat(b).concat(&a.inverse()).concat(&b.inverse())
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.gen).max()
    }

    /// Total exponent of each generator (the image in the abelianization).
    pub fn exponent_sums(&self, generators: usize) -> Vec<BigInt> {
        let mut sums = alloc::vec![BigInt::zero(); generators];
        for l in &self.0 {
            if l.gen < generators {
                sums[l.gen] += &l.exp;
            }
        }
        sums
    }

    /// Renumbers generators by adding `offset`.
    pub fn shifted(&self, offset: usize) -> Word {
        Word(self.0.iter().map(|l| Letter { gen: l.gen + offset, exp: l.exp.clone() }).collect())
    }
}
