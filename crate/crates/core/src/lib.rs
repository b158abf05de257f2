//! Exact arithmetic for finitely presented pro-p groups.
//!
//! The crate covers the whole chain from residues in `Z/p^m` up to verified
//! homomorphisms onto unipotent groups:
//!
//! - [`ring`]: `Z/p^m` residues, p-adic valuations and affine solving over `Z/p^m`.
//! - [`unipotent`]: the groups `U_{n+1}(Z/p^m)`, their Frattini quotient and the
//!   quotient by the corner entry.
//! - [`magnus`]: truncated Magnus expansions in `F_p<<X_1..X_d>>`, leading
//!   monomials, mildness certificates and cup products on relators.
//! - [`groups`]: presentations built from free and tame Demushkin factors, their
//!   coproducts, and homomorphisms into unipotent groups.
//! - [`massey`]: cup chains, the layered lifting solver, Massey witnesses and
//!   their independent verification.
//! - [`numtheory`]: signatures, residue degrees, tame-prime scans, rank
//!   formulas, abelianization checks over `Q` and Wieferich scans.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod groups;
pub mod magnus;
pub mod massey;
pub mod numtheory;
pub mod ring;
pub mod unipotent;
pub mod word;

pub use groups::{FactorKind, Hom, Presentation};
pub use magnus::{MonomialOrder, TruncSeries};
pub use massey::{CharacterTuple, MasseyWitness, Obstruction};
pub use ring::{PrimePower, ZMod};
pub use unipotent::{QuotientUniMatrix, UniMatrix, UniShape};
pub use word::{Letter, Word};
