//! JSON forms of presentations, witnesses and reports.
//!
//! Integers whose magnitude reaches `2^53` are written as decimal strings;
//! either form is accepted on input.

use num_bigint::{BigInt, BigUint, Sign};
use ppg_core::groups::{Factor, FactorKind, GroupError, Hom, Presentation};
use ppg_core::massey::{
    CharacterTuple, DefectEntry, MasseyError, MasseyWitness, Obstruction, Route, SolverStats, Transcript,
};
use ppg_core::ring::{valuation_uint, PrimePower};
use ppg_core::unipotent::{UniMatrix, UniShape};
use ppg_core::word::{Letter, Word};
use serde::{Deserialize, Serialize};

pub const WITNESS_FORMAT: &str = "ppg-witness/1";

const SAFE: u64 = 1 << 53;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid integer {0:?}")]
    Integer(String),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("unsupported witness format {0:?}")]
    Version(String),
    #[error("presentation is over p = {pres} but the witness is over p = {witness}")]
    PrimeMismatch { pres: u64, witness: u64 },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Massey(#[from] MasseyError),
    #[error(transparent)]
    Unipotent(#[from] ppg_core::unipotent::UniError),
    #[error(transparent)]
    Ring(#[from] ppg_core::ring::RingError),
}

/// An integer as a JSON number when it is below `2^53` in magnitude, else a string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Int {
    Num(i64),
    Text(String),
}

impl Int {
    pub fn from_big(x: &BigInt) -> Int {
        match i64::try_from(x) {
            Ok(v) if v.unsigned_abs() < SAFE => Int::Num(v),
            _ => Int::Text(x.to_string()),
        }
    }

    pub fn from_u64(x: u64) -> Int {
        Int::from_big(&BigInt::from(x))
    }

    pub fn to_big(&self) -> Result<BigInt, FormatError> {
        match self {
            Int::Num(v) => Ok(BigInt::from(*v)),
            Int::Text(s) => s.trim().parse().map_err(|_| FormatError::Integer(s.clone())),
        }
    }

    pub fn to_biguint(&self) -> Result<BigUint, FormatError> {
        let v = self.to_big()?;
        v.to_biguint().ok_or_else(|| FormatError::Integer(v.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FactorJson {
    Demushkin { q: Int },
    Free { rank: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationJson {
    pub p: u64,
    pub generators: Vec<String>,
    /// Each relator is a list of `[generator, exponent]` letters.
    pub relators: Vec<Vec<(String, Int)>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<FactorJson>,
}

impl PresentationJson {
    pub fn from_presentation(pres: &Presentation) -> Self {
        let names = pres.generators();
        let relators = pres
            .relators()
            .iter()
            .map(|w| w.letters().iter().map(|l| (names[l.gen].clone(), Int::from_big(&l.exp))).collect())
            .collect();
        let factors = pres
            .factors()
            .iter()
            .map(|f| match &f.kind {
                FactorKind::Free { rank } => FactorJson::Free { rank: *rank },
                FactorKind::Demushkin { q, .. } => FactorJson::Demushkin { q: Int::from_big(&BigInt::from(q.clone())) },
            })
            .collect();
        PresentationJson { p: pres.p(), generators: names.to_vec(), relators, factors }
    }

    pub fn to_presentation(&self) -> Result<Presentation, FormatError> {
        let index = |name: &str| {
            self.generators
                .iter()
                .position(|g| g == name)
                .ok_or_else(|| FormatError::UnknownGenerator(name.to_string()))
        };
        let mut relators = Vec::with_capacity(self.relators.len());
        for rel in &self.relators {
            let mut letters = Vec::with_capacity(rel.len());
            for (name, exp) in rel {
                letters.push(Letter::new(index(name)?, exp.to_big()?));
            }
            relators.push(Word::new(letters));
        }
        if self.factors.is_empty() {
            return Ok(Presentation::generic(self.p, self.generators.clone(), relators)?);
        }
        let (mut g, mut r) = (0, 0);
        let mut factors = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            let (kind, gens, rels) = match f {
                FactorJson::Free { rank } => (FactorKind::Free { rank: *rank }, *rank, 0),
                FactorJson::Demushkin { q } => {
                    let q = q.to_biguint()?;
                    let level = if q > BigUint::from(1u32) {
                        valuation_uint(&(&q - 1u32), self.p).unwrap_or(0)
                    } else {
                        0
                    };
                    (FactorKind::Demushkin { q, level }, 2, 1)
                }
            };
            factors.push(Factor { kind, generators: g..g + gens, relators: r..r + rels });
            g += gens;
            r += rels;
        }
        Ok(Presentation::with_factors(self.p, self.generators.clone(), relators, factors)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptJson {
    pub relators: Vec<bool>,
    pub congruences: Vec<bool>,
    pub frattini_rank: usize,
    pub expected_rank: usize,
    pub surjective: bool,
}

impl From<&Transcript> for TranscriptJson {
    fn from(t: &Transcript) -> Self {
        TranscriptJson {
            relators: t.relators.clone(),
            congruences: t.congruences.clone(),
            frattini_rank: t.frattini_rank,
            expected_rank: t.expected_rank,
            surjective: t.surjective,
        }
    }
}

impl From<&TranscriptJson> for Transcript {
    fn from(t: &TranscriptJson) -> Self {
        Transcript {
            relators: t.relators.clone(),
            congruences: t.congruences.clone(),
            frattini_rank: t.frattini_rank,
            expected_rank: t.expected_rank,
            surjective: t.surjective,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteJson {
    Canonical,
    Layered,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverJson {
    pub budget: usize,
    pub candidates: usize,
    pub backtracks: usize,
    pub route: RouteJson,
}

impl From<&SolverStats> for SolverJson {
    fn from(s: &SolverStats) -> Self {
        let route = match s.route {
            Route::Canonical => RouteJson::Canonical,
            Route::Layered => RouteJson::Layered,
            Route::Exhaustive => RouteJson::Exhaustive,
        };
        SolverJson { budget: s.budget, candidates: s.candidates, backtracks: s.backtracks, route }
    }
}

impl From<&SolverJson> for SolverStats {
    fn from(s: &SolverJson) -> Self {
        let route = match s.route {
            RouteJson::Canonical => Route::Canonical,
            RouteJson::Layered => Route::Layered,
            RouteJson::Exhaustive => Route::Exhaustive,
        };
        SolverStats { budget: s.budget, candidates: s.candidates, backtracks: s.backtracks, route }
    }
}

/// A witness homomorphism onto `U_{n+1}(Z/p^m)`; images are listed row by row
/// above the diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub format: String,
    pub p: u64,
    pub m: u32,
    pub n: usize,
    pub presentation: PresentationJson,
    pub characters: Vec<Vec<u64>>,
    pub images: Vec<Vec<u64>>,
    pub transcript: TranscriptJson,
    pub solver: SolverJson,
}

impl WitnessJson {
    pub fn from_witness(w: &MasseyWitness) -> Self {
        WitnessJson {
            format: WITNESS_FORMAT.to_string(),
            p: w.shape().ring().p(),
            m: w.m(),
            n: w.n(),
            presentation: PresentationJson::from_presentation(w.presentation()),
            characters: w.chis.chis().to_vec(),
            images: w.hom.images().iter().map(UniMatrix::strict_upper).collect(),
            transcript: (&w.transcript).into(),
            solver: (&w.solver).into(),
        }
    }

    pub fn to_witness(&self) -> Result<MasseyWitness, FormatError> {
        if self.format != WITNESS_FORMAT {
            return Err(FormatError::Version(self.format.clone()));
        }
        let pres = self.presentation.to_presentation()?;
        if pres.p() != self.p {
            return Err(FormatError::PrimeMismatch { pres: pres.p(), witness: self.p });
        }
        let shape = UniShape::new(self.n, PrimePower::new(self.p, self.m)?)?;
        let images = self
            .images
            .iter()
            .map(|e| UniMatrix::from_strict_upper(shape, e))
            .collect::<Result<Vec<_>, _>>()?;
        let hom = Hom::new(pres.clone(), shape, images)?;
        let chis = CharacterTuple::new(self.p, pres.num_generators(), self.characters.clone())?;
        Ok(MasseyWitness { hom, chis, transcript: (&self.transcript).into(), solver: (&self.solver).into() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectJson {
    pub relator: usize,
    pub row: usize,
    pub col: usize,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionJson {
    /// 0-based factor index.
    pub factor: Option<usize>,
    pub level: usize,
    pub defect: Vec<DefectJson>,
    pub invariant_valuations: Vec<u32>,
    pub violated: Vec<usize>,
    pub residues: Vec<u64>,
    pub budget: usize,
    pub candidates_tried: usize,
    pub exhausted_budget: bool,
    pub definitive: bool,
}

impl From<&Obstruction> for ObstructionJson {
    fn from(o: &Obstruction) -> Self {
        let defect =
            o.defect.iter().map(|d: &DefectEntry| DefectJson { relator: d.relator, row: d.row, col: d.col, value: d.value }).collect();
        ObstructionJson {
            factor: o.factor,
            level: o.level,
            defect,
            invariant_valuations: o.cokernel.invariant_valuations.clone(),
            violated: o.cokernel.violated.clone(),
            residues: o.cokernel.residues.clone(),
            budget: o.budget,
            candidates_tried: o.candidates_tried,
            exhausted_budget: o.exhausted_budget,
            definitive: o.definitive,
        }
    }
}

/// Parses `"19"` as a Demushkin factor and `"free=3"` or `"f3"` as a free one;
/// a leading `q=` is optional.
pub fn parse_factor_arg(arg: &str) -> Option<FactorJson> {
    let s = arg.trim();
    if let Some(rank) = s.strip_prefix("free=").or_else(|| s.strip_prefix('f')) {
        return rank.parse().ok().filter(|&r: &usize| r > 0).map(|rank| FactorJson::Free { rank });
    }
    let q = s.strip_prefix("q=").unwrap_or(s);
    let v: BigInt = q.parse().ok()?;
    (v.sign() == Sign::Plus).then(|| FactorJson::Demushkin { q: Int::from_big(&v) })
}
