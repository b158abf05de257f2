//! Massey products through unipotent lifts.
//!
//! Characters are vectors in `F_p^d`, one value per generator. A tuple
//! `(chi_1, ..., chi_n)` prescribes the superdiagonal of a homomorphism into
//! `U_{n+1}`: generator `g` must map to a matrix whose entry `(u, u+1)` is
//! `chi_{u+1}(g)` mod `p` (0-based `u`).

mod lift;

pub use lift::{DefectEntry, Obstruction, Route, SolverStats, DEFAULT_BUDGET};

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::groups::{FactorKind, GroupError, Hom, Presentation, ReducedWord};
use crate::magnus::{pair_eps, relator_quadratics, MagnusError};
use crate::ring::{fp_rank, PrimePower, RingError};
use crate::unipotent::{frattini_rank, QuotientUniMatrix, UniError, UniMatrix, UniShape};
use lift::{canonical_images, solve, LiftProblem};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MasseyError {
    #[error("empty character tuple")]
    EmptyTuple,
    #[error("character {index} has {got} values for {expected} generators")]
    CharacterLength { index: usize, expected: usize, got: usize },
    #[error("cup product chi_{} cup chi_{} does not vanish", .index + 1, .index + 2)]
    PreconditionCup { index: usize },
    #[error("{0}")]
    Obstruction(Box<Obstruction>),
    #[error("the presentation has no free/Demushkin factor structure")]
    NotFactorized,
    #[error("a surjection onto U_{} needs n <= h1 = {h1}, got n = {n}", .n + 1)]
    RankTooLarge { n: usize, h1: usize },
    #[error("no character tuple gives a surjection for this group and n")]
    NoSurjectiveTuple,
    #[error("tuple length {n} is below the minimum {min}")]
    TooShort { n: usize, min: usize },
    #[error("expected {expected} factor homomorphisms, got {got}")]
    FactorCount { expected: usize, got: usize },
    #[error("factor homomorphism {0} does not match its factor or the common target")]
    FactorMismatch(usize),
    #[error(transparent)]
    Magnus(#[from] MagnusError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Unipotent(#[from] UniError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

impl From<Obstruction> for MasseyError {
    fn from(o: Obstruction) -> Self {
        MasseyError::Obstruction(Box::new(o))
    }
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lift obstructed at level {}", self.level)?;
        if let Some(i) = self.factor {
            write!(f, " in factor {}", i + 1)?;
        }
        if !self.definitive {
            f.write_str(" (inconclusive: search incomplete)")?;
        }
        Ok(())
    }
}

/// `n` characters of a group on `d` generators, values reduced mod `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CharacterTuple {
    p: u64,
    chis: Vec<Vec<u64>>,
}

impl CharacterTuple {
    pub fn new(p: u64, generators: usize, chis: Vec<Vec<u64>>) -> Result<Self, MasseyError> {
        if chis.is_empty() {
            return Err(MasseyError::EmptyTuple);
        }
        for (index, chi) in chis.iter().enumerate() {
            if chi.len() != generators {
                return Err(MasseyError::CharacterLength { index, expected: generators, got: chi.len() });
            }
        }
        let chis = chis.into_iter().map(|c| c.into_iter().map(|v| v % p).collect()).collect();
        Ok(CharacterTuple { p, chis })
    }

    /// The character dual to generator `gen` (1 there, 0 elsewhere).
    pub fn dual(generators: usize, gen: usize) -> Vec<u64> {
        let mut v = vec![0; generators];
        v[gen] = 1;
        v
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.chis.len()
    }

    pub fn generators(&self) -> usize {
        self.chis[0].len()
    }

    pub fn chis(&self) -> &[Vec<u64>] {
        &self.chis
    }

    /// Rank of the span of the characters in `Hom(G, F_p)`.
    pub fn rank(&self) -> usize {
        fp_rank(&self.chis, self.p)
    }

    /// Per generator, the superdiagonal it must carry mod `p`.
    pub fn superdiagonal_targets(&self) -> Vec<Vec<u64>> {
        (0..self.generators()).map(|g| self.chis.iter().map(|c| c[g]).collect()).collect()
    }
}

/// Result of testing `chi_u cup chi_{u+1} = 0` for consecutive pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CupChain {
    /// Index `u` (0-based) of the first non-vanishing `chi_u cup chi_{u+1}`.
    pub first_failure: Option<usize>,
    pub p_two_convention: bool,
}

impl CupChain {
    pub fn ok(&self) -> bool {
        self.first_failure.is_none()
    }
}

pub fn cup_chain_ok(pres: &Presentation, chis: &CharacterTuple) -> Result<CupChain, MasseyError> {
    check_tuple(pres, chis)?;
    let eps = relator_quadratics(pres)?;
    let p = pres.p();
    let first_failure = chis
        .chis
        .windows(2)
        .position(|w| pair_eps(&eps, &w[0], &w[1], p).iter().any(|&c| c != 0));
    Ok(CupChain { first_failure, p_two_convention: p == 2 })
}

fn check_tuple(pres: &Presentation, chis: &CharacterTuple) -> Result<(), MasseyError> {
    if chis.generators() != pres.num_generators() {
        return Err(MasseyError::CharacterLength {
            index: 0,
            expected: pres.num_generators(),
            got: chis.generators(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LiftConfig {
    /// Distinct candidates tried per level before giving up.
    pub budget: usize,
}

impl Default for LiftConfig {
    fn default() -> Self {
        LiftConfig { budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorLift {
    pub hom: Hom,
    pub stats: SolverStats,
}

fn reduced_relators(pres: &Presentation, shape: UniShape) -> Vec<ReducedWord> {
    pres.relators().iter().map(|w| ReducedWord::new(w, shape)).collect()
}

/// Lifts one factor: generator `g` gets superdiagonal `targets[g]` mod `p` and
/// the relators must hold exactly in `shape`.
pub fn lift_factor(
    factor: &Presentation,
    targets: &[Vec<u64>],
    shape: UniShape,
    config: LiftConfig,
) -> Result<FactorLift, MasseyError> {
    let d = factor.num_generators();
    if targets.len() != d {
        return Err(MasseyError::CharacterLength { index: 0, expected: d, got: targets.len() });
    }
    if let Some(index) = targets.iter().position(|t| t.len() != shape.n()) {
        return Err(MasseyError::CharacterLength { index, expected: shape.n(), got: targets[index].len() });
    }
    let rels = reduced_relators(factor, shape);
    let problem = LiftProblem {
        relators: &rels,
        generators: d,
        shape,
        targets,
        drop_corner: false,
        budget: config.budget,
    };
    let (images, stats) = solve(&problem)?;
    Ok(FactorLift { hom: Hom::new(factor.clone(), shape, images)?, stats })
}

/// Glues factor homomorphisms into one homomorphism of the coproduct.
pub fn assemble(pres: &Presentation, homs: &[Hom]) -> Result<Hom, MasseyError> {
    if !pres.is_factorized() {
        return Err(MasseyError::NotFactorized);
    }
    if homs.len() != pres.factors().len() {
        return Err(MasseyError::FactorCount { expected: pres.factors().len(), got: homs.len() });
    }
    let shape = homs[0].target();
    let mut images = Vec::with_capacity(pres.num_generators());
    for (i, (f, h)) in pres.factors().iter().zip(homs).enumerate() {
        if h.target() != shape || h.images().len() != f.generators.len() {
            return Err(MasseyError::FactorMismatch(i));
        }
        images.extend_from_slice(h.images());
    }
    Ok(Hom::new(pres.clone(), shape, images)?)
}

/// The checks a witness must pass, recomputed from scratch by [`verify_witness`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    /// Per relator: maps to the identity.
    pub relators: Vec<bool>,
    /// Per `u`: every generator has entry `(u, u+1)` congruent to `chi_{u+1}` mod `p`.
    pub congruences: Vec<bool>,
    pub frattini_rank: usize,
    /// Rank of the character tuple; the Frattini rank must equal it.
    pub expected_rank: usize,
    pub surjective: bool,
}

impl Transcript {
    pub fn all_pass(&self) -> bool {
        self.relators.iter().all(|&b| b) && self.congruences.iter().all(|&b| b) && self.frattini_rank == self.expected_rank
    }
}

pub fn compute_transcript(hom: &Hom, chis: &CharacterTuple) -> Transcript {
    let shape = hom.target();
    let p = shape.ring().p();
    let relators = hom.is_hom().defects.iter().map(Option::is_none).collect();
    let congruences = (0..shape.n())
        .map(|u| {
            chis.chis.get(u).is_some_and(|chi| {
                chi.len() == hom.images().len()
                    && hom.images().iter().zip(chi).all(|(img, &c)| img.get(u, u + 1) % p == c % p)
            })
        })
        .collect();
    let frattini = frattini_rank(hom.images());
    Transcript {
        relators,
        congruences,
        frattini_rank: frattini,
        expected_rank: chis.rank(),
        surjective: frattini == shape.n(),
    }
}

/// A homomorphism `G -> U_{n+1}(Z/p^m)` lifting a character tuple, with the
/// checks it passed and how it was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasseyWitness {
    pub hom: Hom,
    pub chis: CharacterTuple,
    pub transcript: Transcript,
    pub solver: SolverStats,
}

impl MasseyWitness {
    pub fn presentation(&self) -> &Presentation {
        self.hom.source()
    }

    pub fn shape(&self) -> UniShape {
        self.hom.target()
    }

    pub fn m(&self) -> u32 {
        self.hom.target().ring().m()
    }

    pub fn n(&self) -> usize {
        self.hom.target().n()
    }
}

fn stats_zero(config: LiftConfig) -> SolverStats {
    SolverStats { budget: config.budget, candidates: 0, backtracks: 0, route: Route::Canonical }
}

fn combine(a: SolverStats, b: SolverStats) -> SolverStats {
    let route = match (a.route, b.route) {
        (Route::Exhaustive, _) | (_, Route::Exhaustive) => Route::Exhaustive,
        (Route::Layered, _) | (_, Route::Layered) => Route::Layered,
        _ => Route::Canonical,
    };
    SolverStats {
        budget: a.budget,
        candidates: a.candidates + b.candidates,
        backtracks: a.backtracks + b.backtracks,
        route,
    }
}

/// Lifts the tuple to `U_{n+1}(Z/p^m)` one coproduct factor at a time.
///
/// Needs vanishing consecutive cup products. Factors are solved independently
/// on their own generators and the results assembled.
pub fn strong_massey_lift(
    pres: &Presentation,
    chis: &CharacterTuple,
    m: u32,
    config: LiftConfig,
) -> Result<MasseyWitness, MasseyError> {
    if !pres.is_factorized() {
        return Err(MasseyError::NotFactorized);
    }
    let chain = cup_chain_ok(pres, chis)?;
    if let Some(index) = chain.first_failure {
        return Err(MasseyError::PreconditionCup { index });
    }
    let shape = UniShape::new(chis.n(), PrimePower::new(pres.p(), m)?)?;
    let targets = chis.superdiagonal_targets();
    let mut homs = Vec::new();
    let mut stats = stats_zero(config);
    for (i, f) in pres.factors().iter().enumerate() {
        let factor = pres.factor_presentation(i).expect("factor index in range");
        let local = &targets[f.generators.clone()];
        let lifted = match f.kind {
            FactorKind::Free { .. } => Ok(FactorLift {
                hom: Hom::new(factor, shape, canonical_images(shape, local))?,
                stats: SolverStats { route: Route::Canonical, ..stats_zero(config) },
            }),
            FactorKind::Demushkin { .. } => lift_factor(&factor, local, shape, config),
        };
        let lifted = lifted.map_err(|e| match e {
            MasseyError::Obstruction(mut o) => {
                o.factor = Some(i);
                MasseyError::Obstruction(o)
            }
            other => other,
        })?;
        stats = combine(stats, lifted.stats);
        homs.push(lifted.hom);
    }
    let hom = assemble(pres, &homs)?;
    let transcript = compute_transcript(&hom, chis);
    debug_assert!(transcript.all_pass());
    Ok(MasseyWitness { hom, chis: chis.clone(), transcript, solver: stats })
}

/// The tuple used for full-rank surjections: duals of the second generator of
/// each Demushkin factor, then duals of free generators, then duals of the
/// first Demushkin generators; truncated to `n`.
pub fn surjection_tuple(pres: &Presentation, n: usize) -> Result<CharacterTuple, MasseyError> {
    if !pres.is_factorized() {
        return Err(MasseyError::NotFactorized);
    }
    let d = pres.num_generators();
    if n > d {
        return Err(MasseyError::RankTooLarge { n, h1: d });
    }
    let mut order = Vec::with_capacity(d);
    for f in pres.factors() {
        if let FactorKind::Demushkin { .. } = f.kind {
            order.push(f.generators.start + 1);
        }
    }
    for f in pres.factors() {
        if let FactorKind::Free { .. } = f.kind {
            order.extend(f.generators.clone());
        }
    }
    for f in pres.factors() {
        if let FactorKind::Demushkin { .. } = f.kind {
            order.push(f.generators.start);
        }
    }
    let chis = order.into_iter().take(n).map(|g| CharacterTuple::dual(d, g)).collect();
    CharacterTuple::new(pres.p(), d, chis)
}

/// A surjection `G -> U_{n+1}(Z/p^m)` for a coproduct of Demushkin and free factors.
pub fn full_rank_surjection(
    pres: &Presentation,
    n: usize,
    m: u32,
    config: LiftConfig,
) -> Result<MasseyWitness, MasseyError> {
    if n < 2 {
        return Err(MasseyError::TooShort { n, min: 2 });
    }
    let chis = surjection_tuple(pres, n)?;
    if !cup_chain_ok(pres, &chis)?.ok() {
        return Err(MasseyError::NoSurjectiveTuple);
    }
    let w = strong_massey_lift(pres, &chis, m, config)?;
    if !w.transcript.surjective {
        return Err(MasseyError::NoSurjectiveTuple);
    }
    Ok(w)
}

/// A homomorphism into `U_{n+1}(F_p)` modulo its corner entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefiningSystem {
    pub images: Vec<QuotientUniMatrix>,
    pub stats: SolverStats,
}

/// Searches for a defining system of `<chi_1, ..., chi_n>` (`n >= 3`): a lift
/// of the tuple to the quotient of `U_{n+1}(F_p)` by its corner.
pub fn defining_system(
    pres: &Presentation,
    chis: &CharacterTuple,
    config: LiftConfig,
) -> Result<DefiningSystem, MasseyError> {
    check_tuple(pres, chis)?;
    if chis.n() < 3 {
        return Err(MasseyError::TooShort { n: chis.n(), min: 3 });
    }
    let shape = UniShape::new(chis.n(), PrimePower::prime_field(pres.p())?)?;
    let targets = chis.superdiagonal_targets();
    let parts: Vec<(Option<usize>, Presentation, core::ops::Range<usize>)> = if pres.is_factorized() {
        pres.factors()
            .iter()
            .enumerate()
            .map(|(i, f)| (Some(i), pres.factor_presentation(i).expect("factor index"), f.generators.clone()))
            .collect()
    } else {
        vec![(None, pres.clone(), 0..pres.num_generators())]
    };
    let mut images = Vec::with_capacity(pres.num_generators());
    let mut stats = stats_zero(config);
    for (index, part, gens) in parts {
        let rels = reduced_relators(&part, shape);
        let problem = LiftProblem {
            relators: &rels,
            generators: part.num_generators(),
            shape,
            targets: &targets[gens],
            drop_corner: true,
            budget: config.budget,
        };
        let (found, s) = solve(&problem).map_err(|mut o| {
            o.factor = index;
            MasseyError::from(o)
        })?;
        stats = combine(stats, s);
        images.extend(found);
    }
    let images = images.iter().map(UniMatrix::project_quotient).collect::<Result<Vec<_>, _>>()?;
    Ok(DefiningSystem { images, stats })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub transcript: Transcript,
    pub surjective: bool,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Re-derives every check of a witness without trusting the solver.
pub fn verify_witness(w: &MasseyWitness) -> VerifyReport {
    let shape = w.hom.target();
    let mut checks = Vec::new();
    let shape_ok = w.chis.n() == shape.n()
        && w.chis.generators() == w.hom.source().num_generators()
        && w.chis.p() == shape.ring().p();
    checks.push(Check { name: "tuple matches target shape".to_string(), passed: shape_ok });
    let t = compute_transcript(&w.hom, &w.chis);
    for (r, &ok) in t.relators.iter().enumerate() {
        checks.push(Check { name: alloc::format!("relator {} is trivial", r + 1), passed: ok });
    }
    for (u, &ok) in t.congruences.iter().enumerate() {
        checks.push(Check { name: alloc::format!("superdiagonal {} matches chi_{}", u + 1, u + 1), passed: ok });
    }
    checks.push(Check {
        name: alloc::format!("frattini rank {} equals tuple rank {}", t.frattini_rank, t.expected_rank),
        passed: t.frattini_rank == t.expected_rank,
    });
    checks.push(Check { name: "stored transcript reproduced".to_string(), passed: t == w.transcript });
    let surjective = t.surjective;
    VerifyReport { checks, transcript: t, surjective }
}

#[cfg(test)]
mod tests;
