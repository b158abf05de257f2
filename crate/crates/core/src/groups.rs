//! Presentations of pro-p groups built from free and tame Demushkin factors,
//! and homomorphisms into unipotent groups.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::ring::{is_prime, valuation_uint};
use crate::unipotent::{UniMatrix, UniShape};
use crate::word::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("q = {q} is not congruent to 1 mod {p}: the local group is not tame")]
    NotTame { q: BigUint, p: u64 },
    #[error("Demushkin parameter q must be at least 2")]
    BadDemushkinParameter,
    #[error("a free factor needs rank at least 1")]
    ZeroRank,
    #[error("coproduct of no factors")]
    EmptyCoproduct,
    #[error("coproduct factors use different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),
    #[error("relator {relator} mentions unknown generator index {gen}")]
    UnknownGenerator { relator: usize, gen: usize },
    #[error("word mentions unknown generator index {0}")]
    UnknownGeneratorInWord(usize),
    #[error("duplicate generator name {0:?}")]
    DuplicateGenerator(String),
    #[error("factor blocks do not tile the generators and relators")]
    FactorLayout,
    #[error("Demushkin block {0} does not have the relator x2 x1 x2^-1 x1^-q")]
    DemushkinShape(usize),
    #[error("homomorphism has {got} images for {expected} generators")]
    ImageCount { expected: usize, got: usize },
    #[error("image shapes differ from the target shape")]
    ImageShape,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FactorKind {
    Free { rank: usize },
    /// Rank-2 Demushkin factor with relator `x2 x1 x2^{-1} x1^{-q}`; `level = v_p(q - 1)`.
    Demushkin { q: BigUint, level: u32 },
}

/// A block of consecutive generators and relators belonging to one coproduct factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor {
    pub kind: FactorKind,
    pub generators: Range<usize>,
    pub relators: Range<usize>,
}

impl Factor {
    pub fn h1(&self) -> usize {
        self.generators.len()
    }
}

/// A finite presentation of a pro-p group.
///
/// Presentations built through [`demushkin`], [`free`] and [`coproduct`] carry
/// factor tags; generic presentations have none.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Presentation {
    p: u64,
    generators: Vec<String>,
    relators: Vec<Word>,
    factors: Vec<Factor>,
}

impl Presentation {
    /// A presentation without factor structure.
    pub fn generic(p: u64, generators: Vec<String>, relators: Vec<Word>) -> Result<Self, GroupError> {
        let pres = Presentation { p, generators, relators, factors: Vec::new() };
        pres.validate()?;
        Ok(pres)
    }

    /// A presentation with explicit factor tags; the blocks are validated.
    pub fn with_factors(
        p: u64,
        generators: Vec<String>,
        relators: Vec<Word>,
        factors: Vec<Factor>,
    ) -> Result<Self, GroupError> {
        let pres = Presentation { p, generators, relators, factors };
        pres.validate()?;
        Ok(pres)
    }

    pub fn validate(&self) -> Result<(), GroupError> {
        if !is_prime(self.p) {
            return Err(GroupError::NotPrime(self.p));
        }
        for (i, g) in self.generators.iter().enumerate() {
            if self.generators[..i].contains(g) {
                return Err(GroupError::DuplicateGenerator(g.clone()));
            }
        }
        for (r, w) in self.relators.iter().enumerate() {
            if let Some(gen) = w.max_generator().filter(|&g| g >= self.generators.len()) {
                return Err(GroupError::UnknownGenerator { relator: r, gen });
            }
        }
        if self.factors.is_empty() {
            return Ok(());
        }
        let (mut g, mut r) = (0, 0);
        for (i, f) in self.factors.iter().enumerate() {
            if f.generators.start != g || f.relators.start != r {
                return Err(GroupError::FactorLayout);
            }
            g = f.generators.end;
            r = f.relators.end;
            match &f.kind {
                FactorKind::Free { rank } => {
                    if *rank == 0 || f.generators.len() != *rank || !f.relators.is_empty() {
                        return Err(GroupError::FactorLayout);
                    }
                }
                FactorKind::Demushkin { q, level } => {
                    if f.generators.len() != 2 || f.relators.len() != 1 {
                        return Err(GroupError::DemushkinShape(i));
                    }
                    let expected = demushkin_relator(f.generators.start, q);
                    if self.relators[f.relators.start] != expected {
                        return Err(GroupError::DemushkinShape(i));
                    }
                    if demushkin_level(q, self.p)? != *level {
                        return Err(GroupError::DemushkinShape(i));
                    }
                }
            }
        }
        if g != self.generators.len() || r != self.relators.len() {
            return Err(GroupError::FactorLayout);
        }
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    /// `h^1 = dim H^1(G, F_p)`; equals the number of generators for minimal
    /// presentations, which every tagged presentation is.
    pub fn h1(&self) -> usize {
        self.generators.len()
    }

    pub fn is_factorized(&self) -> bool {
        !self.factors.is_empty()
    }

    /// The standalone presentation of one factor, with generators renumbered from 0.
    pub fn factor_presentation(&self, index: usize) -> Option<Presentation> {
        let f = self.factors.get(index)?;
        let offset = f.generators.start;
        let relators = self.relators[f.relators.clone()]
            .iter()
            .map(|w| Word(w.0.iter().map(|l| Letter { gen: l.gen - offset, exp: l.exp.clone() }).collect()))
            .collect::<Vec<_>>();
        Some(Presentation {
            p: self.p,
            generators: self.generators[f.generators.clone()].to_vec(),
            relators,
            factors: alloc::vec![Factor {
                kind: f.kind.clone(),
                generators: 0..f.generators.len(),
                relators: 0..f.relators.len(),
            }],
        })
    }
}

fn demushkin_relator(first_gen: usize, q: &BigUint) -> Word {
    let (x1, x2) = (first_gen, first_gen + 1);
    Word(alloc::vec![
        Letter::new(x2, 1),
        Letter::new(x1, 1),
        Letter::new(x2, -1),
        Letter { gen: x1, exp: -BigInt::from(q.clone()) },
    ])
}

fn demushkin_level(q: &BigUint, p: u64) -> Result<u32, GroupError> {
    if *q < BigUint::from(2u32) {
        return Err(GroupError::BadDemushkinParameter);
    }
    let level = valuation_uint(&(q - BigUint::one()), p).unwrap_or(0);
    if level == 0 {
        return Err(GroupError::NotTame { q: q.clone(), p });
    }
    Ok(level)
}

/// The rank-2 Demushkin presentation `<x1, x2 | x2 x1 x2^{-1} x1^{-q}>` of the
/// local group at a tame prime of norm `q`.
pub fn demushkin(q: &BigUint, p: u64) -> Result<Presentation, GroupError> {
    if !is_prime(p) {
        return Err(GroupError::NotPrime(p));
    }
    let level = demushkin_level(q, p)?;
    Ok(Presentation {
        p,
        generators: alloc::vec![String::from("x1"), String::from("x2")],
        relators: alloc::vec![demushkin_relator(0, q)],
        factors: alloc::vec![Factor {
            kind: FactorKind::Demushkin { q: q.clone(), level },
            generators: 0..2,
            relators: 0..1,
        }],
    })
}

/// The free pro-p group of rank `d`.
pub fn free(d: usize, p: u64) -> Result<Presentation, GroupError> {
    if !is_prime(p) {
        return Err(GroupError::NotPrime(p));
    }
    if d == 0 {
        return Err(GroupError::ZeroRank);
    }
    Ok(Presentation {
        p,
        generators: (1..=d).map(|i| format!("x{i}")).collect(),
        relators: Vec::new(),
        factors: alloc::vec![Factor { kind: FactorKind::Free { rank: d }, generators: 0..d, relators: 0..0 }],
    })
}

/// Free pro-p product. Generators are renamed `x{factor}_{j}` (1-based) so that
/// the natural generator order is the block order under which coproducts of
/// mild factors are mild.
pub fn coproduct(parts: &[Presentation]) -> Result<Presentation, GroupError> {
    let first = parts.first().ok_or(GroupError::EmptyCoproduct)?;
    let p = first.p;
    let mut out = Presentation { p, generators: Vec::new(), relators: Vec::new(), factors: Vec::new() };
    let mut block = 0;
    for part in parts {
        if part.p != p {
            return Err(GroupError::PrimeMismatch(p, part.p));
        }
        let gen_offset = out.generators.len();
        let rel_offset = out.relators.len();
        let blocks: Vec<Factor> = if part.factors.is_empty() {
            // an untagged part is kept as one opaque block of relators
            Vec::new()
        } else {
            part.factors.clone()
        };
        if blocks.is_empty() {
            block += 1;
            out.generators.extend((1..=part.generators.len()).map(|j| format!("x{block}_{j}")));
            out.relators.extend(part.relators.iter().map(|w| w.shifted(gen_offset)));
            continue;
        }
        for f in blocks {
            block += 1;
            out.generators.extend((1..=f.generators.len()).map(|j| format!("x{block}_{j}")));
            let start_rel = out.relators.len();
            out.relators.extend(part.relators[f.relators.clone()].iter().map(|w| w.shifted(gen_offset)));
            out.factors.push(Factor {
                kind: f.kind,
                generators: (gen_offset + f.generators.start)..(gen_offset + f.generators.end),
                relators: start_rel..out.relators.len(),
            });
        }
        debug_assert_eq!(out.relators.len(), rel_offset + part.relators.len());
    }
    // Mixing tagged and untagged parts loses the tagging.
    if parts.iter().any(|p| p.factors.is_empty()) {
        out.factors.clear();
    }
    Ok(out)
}

/// A word with every exponent reduced modulo the exponent of a target group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedWord(pub Vec<(usize, u128)>);

impl ReducedWord {
    pub fn new(word: &Word, shape: UniShape) -> Self {
        ReducedWord(word.0.iter().map(|l| (l.gen, shape.reduce_exponent(&l.exp))).collect())
    }

    pub fn eval(&self, images: &[UniMatrix], shape: UniShape) -> UniMatrix {
        let mut acc = shape.identity();
        for &(g, e) in &self.0 {
            if e == 0 {
                continue;
            }
            acc = acc.mul(&images[g].power_reduced(e));
        }
        acc
    }
}

/// A homomorphism from a presented group into `U_{n+1}(Z/p^m)`, given by the
/// images of the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hom {
    source: Presentation,
    target: UniShape,
    images: Vec<UniMatrix>,
}

/// Result of checking the relators under a [`Hom`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomReport {
    /// `None` where the relator maps to the identity, else its image.
    pub defects: Vec<Option<UniMatrix>>,
}

impl HomReport {
    pub fn ok(&self) -> bool {
        self.defects.iter().all(Option::is_none)
    }
}

impl Hom {
    pub fn new(source: Presentation, target: UniShape, images: Vec<UniMatrix>) -> Result<Self, GroupError> {
        if images.len() != source.num_generators() {
            return Err(GroupError::ImageCount { expected: source.num_generators(), got: images.len() });
        }
        if images.iter().any(|m| m.shape() != target) {
            return Err(GroupError::ImageShape);
        }
        Ok(Hom { source, target, images })
    }

    pub fn source(&self) -> &Presentation {
        &self.source
    }

    pub fn target(&self) -> UniShape {
        self.target
    }

    pub fn images(&self) -> &[UniMatrix] {
        &self.images
    }

    pub fn image(&self, gen: usize) -> Option<&UniMatrix> {
        self.images.get(gen)
    }

    pub fn eval_word(&self, word: &Word) -> Result<UniMatrix, GroupError> {
        if let Some(g) = word.max_generator().filter(|&g| g >= self.images.len()) {
            return Err(GroupError::UnknownGeneratorInWord(g));
        }
        let mut acc = self.target.identity();
        for l in &word.0 {
            if l.exp.is_zero() {
                continue;
            }
            acc = acc.mul(&self.images[l.gen].power(&l.exp));
        }
        Ok(acc)
    }

    pub fn is_hom(&self) -> HomReport {
        let defects = self
            .source
            .relators
            .iter()
            .map(|r| {
                let v = self.eval_word(r).expect("relators validated against generators");
                if v.is_identity() {
                    None
                } else {
                    Some(v)
                }
            })
            .collect();
        HomReport { defects }
    }
}
