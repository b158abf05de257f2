use super::*;
use crate::groups::{coproduct, demushkin, free};
use crate::unipotent::is_generating;
use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

fn d(q: u64, p: u64) -> Presentation {
    demushkin(&BigUint::from(q), p).unwrap()
}

fn shape(n: usize, p: u64, m: u32) -> UniShape {
    UniShape::new(n, PrimePower::new(p, m).unwrap()).unwrap()
}

fn tuple(pres: &Presentation, chis: &[&[u64]]) -> CharacterTuple {
    CharacterTuple::new(pres.p(), pres.num_generators(), chis.iter().map(|c| c.to_vec()).collect()).unwrap()
}

// In a Demushkin block x1 = tau (index 0) and x2 = sigma (index 1).
const SIGMA: [u64; 2] = [0, 1];
const TAU: [u64; 2] = [1, 0];

#[test]
fn cup_chain_examples() {
    let g = coproduct(&[d(19, 3), d(37, 3)]).unwrap();
    let c = cup_chain_ok(&g, &tuple(&g, &[&[0, 1, 0, 0], &[0, 0, 0, 1]])).unwrap();
    assert!(c.ok());
    let single = d(19, 3);
    let c = cup_chain_ok(&single, &tuple(&single, &[&SIGMA, &TAU])).unwrap();
    assert_eq!(c.first_failure, Some(0));
    assert!(cup_chain_ok(&single, &tuple(&single, &[&SIGMA, &SIGMA])).unwrap().ok());
    let c = cup_chain_ok(&single, &tuple(&single, &[&SIGMA, &SIGMA, &TAU])).unwrap();
    assert_eq!(c.first_failure, Some(1));
}

#[test]
fn lift_factor_examples() {
    let s = shape(2, 3, 2);
    let targets_a = vec![vec![0, 0], vec![1, 1]];
    let lifted = lift_factor(&d(19, 3), &targets_a, s, LiftConfig::default()).unwrap();
    assert!(lifted.hom.is_hom().ok());
    assert_eq!(lifted.hom.images()[0], s.identity());
    assert_eq!(lifted.hom.images()[1].strict_upper(), vec![1, 0, 1]);

    let both = vec![vec![1, 1], vec![1, 1]];
    let lifted = lift_factor(&d(10, 3), &both, s, LiftConfig::default()).unwrap();
    assert!(lifted.hom.is_hom().ok());
    for img in lifted.hom.images() {
        assert_eq!(img.phi_m(), vec![1, 1]);
    }

    let err = lift_factor(&d(4, 3), &both, s, LiftConfig::default()).unwrap_err();
    let MasseyError::Obstruction(o) = err else { panic!("{err:?}") };
    assert_eq!(o.level, 1);
    assert!(o.definitive);
    let values: Vec<(usize, usize, u64)> = o.defect.iter().map(|e| (e.row, e.col, e.value)).collect();
    assert_eq!(values, vec![(0, 1, 6), (1, 2, 6)]);
}

/// For each b = 1 + 3t, the superdiagonal of the D(4) relator is -3 b = 6 mod 9.
#[test]
fn level_one_defect_is_forced() {
    let s = shape(2, 3, 2);
    let g = d(4, 3);
    for b in [1u64, 4, 7] {
        for a in [1u64, 4, 7] {
            let hom = Hom::new(
                g.clone(),
                s,
                vec![UniMatrix::from_strict_upper(s, &[b, 0, b]).unwrap(), UniMatrix::from_strict_upper(s, &[a, 0, a]).unwrap()],
            )
            .unwrap();
            let v = hom.eval_word(&g.relators()[0]).unwrap();
            assert_eq!(v.diagonal(1), vec![6, 6]);
        }
    }
}

#[test]
fn assemble_examples() {
    let g = coproduct(&[d(19, 3), d(37, 3)]).unwrap();
    let s = shape(2, 3, 1);
    let f1 = g.factor_presentation(0).unwrap();
    let f2 = g.factor_presentation(1).unwrap();
    let h1 = Hom::new(f1.clone(), s, vec![s.identity(), s.elementary(0, 1, 1)]).unwrap();
    let h2 = Hom::new(f2.clone(), s, vec![s.identity(), s.elementary(1, 2, 1)]).unwrap();
    let h = assemble(&g, &[h1.clone(), h2.clone()]).unwrap();
    assert!(h.is_hom().ok());
    assert!(is_generating(h.images()));
    assert_eq!(&h.images()[0..2], h1.images());
    assert_eq!(&h.images()[2..4], h2.images());

    let t1 = Hom::new(f1, s, vec![s.identity(); 2]).unwrap();
    let t2 = Hom::new(f2, s, vec![s.identity(); 2]).unwrap();
    let t = assemble(&g, &[t1.clone(), t2]).unwrap();
    assert!(t.images().iter().all(UniMatrix::is_identity));
    assert_eq!(assemble(&g, &[t1]), Err(MasseyError::FactorCount { expected: 2, got: 1 }));
}

#[test]
fn strong_lift_two_factors() {
    let g = coproduct(&[d(19, 3), d(37, 3)]).unwrap();
    let chis = tuple(&g, &[&[0, 1, 0, 0], &[0, 0, 0, 1]]);
    let w = strong_massey_lift(&g, &chis, 2, LiftConfig::default()).unwrap();
    assert_eq!(w.shape(), shape(2, 3, 2));
    assert!(w.transcript.all_pass());
    assert!(w.transcript.surjective);
    assert!(verify_witness(&w).all_passed());
}

#[test]
fn strong_lift_eight_dimensional() {
    let g = coproduct(&[d(19, 3), d(37, 3), d(73, 3), d(109, 3)]).unwrap();
    let mut chis = Vec::new();
    for i in 0..4 {
        chis.push(CharacterTuple::dual(8, 2 * i + 1));
    }
    for i in 0..4 {
        chis.push(CharacterTuple::dual(8, 2 * i));
    }
    let chis = CharacterTuple::new(3, 8, chis).unwrap();
    let w = strong_massey_lift(&g, &chis, 2, LiftConfig::default()).unwrap();
    assert_eq!(w.shape().dim(), 9);
    assert!(w.transcript.surjective);
    assert!(verify_witness(&w).all_passed());
}

#[test]
fn strong_lift_obstruction_and_precondition() {
    let g = d(4, 3);
    let both = [1u64, 1];
    let err = strong_massey_lift(&g, &tuple(&g, &[&both, &both]), 2, LiftConfig::default()).unwrap_err();
    let MasseyError::Obstruction(o) = err else { panic!("{err:?}") };
    assert_eq!((o.level, o.factor), (1, Some(0)));

    let g = d(19, 3);
    let err = strong_massey_lift(&g, &tuple(&g, &[&SIGMA, &TAU]), 2, LiftConfig::default()).unwrap_err();
    assert_eq!(err, MasseyError::PreconditionCup { index: 0 });

    let generic = Presentation::generic(3, g.generators().to_vec(), g.relators().to_vec()).unwrap();
    let err = strong_massey_lift(&generic, &tuple(&g, &[&SIGMA]), 2, LiftConfig::default()).unwrap_err();
    assert_eq!(err, MasseyError::NotFactorized);
}

#[test]
fn full_rank_examples() {
    let g = coproduct(&[d(19, 3), d(37, 3), d(73, 3), d(109, 3)]).unwrap();
    let w = full_rank_surjection(&g, 8, 2, LiftConfig::default()).unwrap();
    assert_eq!(w.shape(), shape(8, 3, 2));
    assert!(is_generating(w.hom.images()));
    assert!(verify_witness(&w).all_passed());
    assert_eq!(
        full_rank_surjection(&g, 9, 2, LiftConfig::default()).unwrap_err(),
        MasseyError::RankTooLarge { n: 9, h1: 8 }
    );

    let single = d(4, 3);
    assert_eq!(full_rank_surjection(&single, 2, 1, LiftConfig::default()).unwrap_err(), MasseyError::NoSurjectiveTuple);

    let f3 = coproduct(&[free(1, 3).unwrap(), free(1, 3).unwrap(), free(1, 3).unwrap()]).unwrap();
    for m in 1..=3 {
        let w = full_rank_surjection(&f3, 3, m, LiftConfig::default()).unwrap();
        assert_eq!(w.shape(), shape(3, 3, m));
        assert!(w.transcript.surjective);
    }

    let mixed = coproduct(&[d(19, 3), free(1, 3).unwrap()]).unwrap();
    let w = full_rank_surjection(&mixed, 3, 2, LiftConfig::default()).unwrap();
    assert!(w.transcript.surjective);
}

/// Every pair of independent characters of a rank-2 Demushkin group has a
/// nonzero cup product, so `U_3` is never a quotient.
#[test]
fn single_demushkin_has_no_u3_quotient_tuple() {
    let g = d(4, 3);
    for a in 0..9u64 {
        for b in 0..9u64 {
            let chis = tuple(&g, &[&[a % 3, a / 3], &[b % 3, b / 3]]);
            if chis.rank() == 2 {
                assert!(!cup_chain_ok(&g, &chis).unwrap().ok());
            }
        }
    }
}

#[test]
fn defining_system_examples() {
    let f = free(3, 3).unwrap();
    let chis = tuple(&f, &[&[1, 0, 0], &[0, 1, 2], &[1, 1, 1]]);
    let ds = defining_system(&f, &chis, LiftConfig::default()).unwrap();
    assert_eq!(ds.images.len(), 3);

    let g = coproduct(&[d(19, 3), d(37, 3)]).unwrap();
    let chis = tuple(&g, &[&[0, 1, 0, 0], &[0, 0, 0, 1], &[0, 1, 0, 0]]);
    let ds = defining_system(&g, &chis, LiftConfig::default()).unwrap();
    check_defining(&g, &chis, &ds);

    let g = d(19, 3);
    let chis = tuple(&g, &[&SIGMA, &TAU, &SIGMA]);
    let err = defining_system(&g, &chis, LiftConfig::default()).unwrap_err();
    let MasseyError::Obstruction(o) = err else { panic!("{err:?}") };
    assert_eq!(o.level, 2);

    let err = defining_system(&g, &tuple(&g, &[&SIGMA, &SIGMA]), LiftConfig::default()).unwrap_err();
    assert_eq!(err, MasseyError::TooShort { n: 2, min: 3 });
}

fn check_defining(pres: &Presentation, chis: &CharacterTuple, ds: &DefiningSystem) {
    let shape = ds.images[0].shape();
    for r in pres.relators() {
        let mut acc = QuotientUniMatrix::identity(shape).unwrap();
        for l in &r.0 {
            let base = ds.images[l.gen].representative().power(&l.exp).project_quotient().unwrap();
            acc = acc.compose(&base).unwrap();
        }
        assert!(acc.is_identity(), "relator fails in the quotient");
    }
    for (g, img) in ds.images.iter().enumerate() {
        let expect: Vec<u64> = chis.chis().iter().map(|c| c[g]).collect();
        assert_eq!(img.phi(), expect);
    }
}

#[test]
fn hand_built_witness_verifies() {
    let g = d(19, 3);
    let s = shape(2, 3, 2);
    let a = UniMatrix::from_strict_upper(s, &[1, 0, 1]).unwrap();
    let hom = Hom::new(g.clone(), s, vec![s.identity(), a]).unwrap();
    let chis = tuple(&g, &[&SIGMA, &SIGMA]);
    let transcript = compute_transcript(&hom, &chis);
    let w = MasseyWitness {
        hom,
        chis,
        transcript,
        solver: SolverStats { budget: 0, candidates: 0, backtracks: 0, route: Route::Canonical },
    };
    let report = verify_witness(&w);
    assert!(report.all_passed(), "{report:?}");
    assert!(!report.surjective);
}

/// Brute force over all image pairs with the prescribed superdiagonal classes.
fn oracle_pairs(q: u64, p: u64, m: u32, ta: [u64; 2], tb: [u64; 2]) -> bool {
    let s = shape(2, p, m);
    let elems = s.elements().unwrap();
    let class = |t: [u64; 2]| -> Vec<UniMatrix> {
        elems.iter().filter(|e| e.get(0, 1) % p == t[0] && e.get(1, 2) % p == t[1]).cloned().collect()
    };
    let qe = BigInt::from(q);
    let bs: Vec<(UniMatrix, UniMatrix)> =
        class(tb).into_iter().map(|b| { let bq = b.power(&-qe.clone()); (b, bq) }).collect();
    for a in class(ta) {
        let ainv = a.invert();
        for (b, bq) in &bs {
            let v = a.compose(b).unwrap().compose(&ainv).unwrap().compose(bq).unwrap();
            if v.is_identity() {
                return true;
            }
        }
    }
    false
}

#[test]
fn small_cases_match_brute_force() {
    for (p, m) in [(2u64, 1u32), (2, 2), (3, 1), (3, 2)] {
        let s = shape(2, p, m);
        // The answer depends on q only through q mod p^(m+1), which kills U_3(Z/p^m).
        let period = p.pow(m + 1);
        let mut memo = alloc::collections::BTreeMap::new();
        for q in (2..=100u64).filter(|q| q % p == 1) {
            let g = d(q, p);
            for code in 0..p.pow(4) {
                let digit = |i: u32| (code / p.pow(i)) % p;
                let ta = [digit(0), digit(1)];
                let tb = [digit(2), digit(3)];
                // generator 0 is tau (B), generator 1 is sigma (A)
                let targets = vec![tb.to_vec(), ta.to_vec()];
                let got = lift_factor(&g, &targets, s, LiftConfig::default());
                let expect = *memo.entry((q % period, code)).or_insert_with(|| oracle_pairs(q, p, m, ta, tb));
                match got {
                    Ok(l) => {
                        assert!(expect, "solver found a lift the oracle rejects: q={q} p={p} m={m}");
                        assert!(l.hom.is_hom().ok());
                        assert_ne!(l.stats.route, Route::Exhaustive);
                        for (img, t) in l.hom.images().iter().zip(&targets) {
                            assert_eq!(&img.phi_m(), t);
                        }
                    }
                    Err(MasseyError::Obstruction(o)) => {
                        assert!(!expect, "solver missed a lift: q={q} p={p} m={m} targets={targets:?}");
                        assert!(o.definitive);
                    }
                    Err(e) => panic!("{e:?}"),
                }
            }
        }
    }
}

/// Greedy chain: each next character is the first candidate whose cup with
/// the previous one vanishes (the zero character always qualifies).
fn chain_from_pool(pres: &Presentation, pool: &[Vec<u64>], n: usize) -> CharacterTuple {
    let dgen = pres.num_generators();
    let eps = relator_quadratics(pres).unwrap();
    let p = pres.p();
    let mut chis: Vec<Vec<u64>> = vec![pool[0].clone()];
    let mut cursor = 1;
    while chis.len() < n {
        let prev = chis.last().unwrap().clone();
        let mut pick = vec![0; dgen];
        for _ in 0..pool.len() {
            let cand = &pool[cursor % pool.len()];
            cursor += 1;
            if pair_eps(&eps, &prev, cand, p).iter().all(|&c| c == 0) {
                pick = cand.clone();
                break;
            }
        }
        chis.push(pick);
    }
    CharacterTuple::new(p, dgen, chis).unwrap()
}

fn arb_group() -> impl Strategy<Value = (Presentation, u32)> {
    (prop::sample::select(vec![3u64, 5]), 1u32..=2, 1usize..=2, 0usize..=1, 1u64..6).prop_map(
        |(p, m, k1, k2, mult)| {
            let mut parts = Vec::new();
            for i in 0..k1 {
                // q = 1 + p^m * c keeps the level at least m
                let q = 1 + p.pow(m) * (mult + i as u64);
                parts.push(d(q, p));
            }
            for _ in 0..k2 {
                parts.push(free(1, p).unwrap());
            }
            (coproduct(&parts).unwrap(), m)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn guarantee_direction(
        (g, m) in arb_group(),
        n in 2usize..=5,
        raw in proptest::collection::vec(proptest::collection::vec(0u64..5, 5), 6),
    ) {
        let p = g.p();
        let dgen = g.num_generators();
        let pool: Vec<Vec<u64>> = raw.iter().map(|v| v[..dgen].iter().map(|x| x % p).collect()).collect();
        let chis = chain_from_pool(&g, &pool, n);
        prop_assert!(cup_chain_ok(&g, &chis).unwrap().ok());
        let w = strong_massey_lift(&g, &chis, m, LiftConfig::default());
        prop_assert!(w.is_ok(), "{:?}", w);
        let w = w.unwrap();
        prop_assert!(verify_witness(&w).all_passed());
        if n >= 3 {
            prop_assert!(defining_system(&g, &chis, LiftConfig::default()).is_ok());
        }
    }

    #[test]
    fn level_two_matches_cup_chain(
        (g, _m) in arb_group(),
        n in 3usize..=4,
        raw in proptest::collection::vec(proptest::collection::vec(0u64..5, 5), 4),
    ) {
        let p = g.p();
        let dgen = g.num_generators();
        let chis: Vec<Vec<u64>> = raw.iter().take(n).map(|v| v[..dgen].iter().map(|x| x % p).collect()).collect();
        let chis = CharacterTuple::new(p, dgen, chis).unwrap();
        let chain = cup_chain_ok(&g, &chis).unwrap();
        match defining_system(&g, &chis, LiftConfig::default()) {
            Ok(ds) => {
                prop_assert!(chain.ok());
                check_defining(&g, &chis, &ds);
            }
            Err(MasseyError::Obstruction(o)) => {
                prop_assert_eq!(o.level == 2, !chain.ok(), "level {} chain {:?}", o.level, chain);
            }
            Err(e) => prop_assert!(false, "{:?}", e),
        }
    }

    #[test]
    fn perturbed_superdiagonal_fails(gen in 0usize..8, u in 0usize..8) {
        let w = eight_dim_witness();
        let s = w.shape();
        let mut images = w.hom.images().to_vec();
        let v = images[gen].get(u, u + 1);
        images[gen].set(u, u + 1, (v + 1) % 9);
        let mut bad = w.clone();
        bad.hom = Hom::new(w.presentation().clone(), s, images).unwrap();
        let report = verify_witness(&bad);
        prop_assert!(!report.all_passed());
    }
}

fn eight_dim_witness() -> &'static MasseyWitness {
    static W: std::sync::OnceLock<MasseyWitness> = std::sync::OnceLock::new();
    W.get_or_init(|| {
        let g = coproduct(&[d(19, 3), d(37, 3), d(73, 3), d(109, 3)]).unwrap();
        full_rank_surjection(&g, 8, 2, LiftConfig::default()).unwrap()
    })
}

/// Corner entries are central and `q = 1 mod p^m`, so moving them keeps the
/// relators: such a perturbation is another valid witness.
#[test]
fn corner_perturbation_stays_valid() {
    let w = eight_dim_witness();
    let mut images = w.hom.images().to_vec();
    let v = images[3].get(0, 8);
    images[3].set(0, 8, (v + 1) % 9);
    let mut moved = w.clone();
    moved.hom = Hom::new(w.presentation().clone(), w.shape(), images).unwrap();
    assert!(verify_witness(&moved).all_passed());
}

/// `m = 3` exercises the stage whose linearization is not exact.
#[test]
fn deeper_modulus_lifts() {
    let g = d(28, 3);
    for n in 2..=4 {
        let s = shape(n, 3, 3);
        // proportional mod 3 but not over Z/27, so the base lift fails
        let sigma: Vec<u64> = (0..n).map(|u| 1 + (u as u64 % 2)).collect();
        let tau: Vec<u64> = sigma.iter().map(|v| 3 - v).collect();
        let targets = vec![tau, sigma.clone()];
        let lifted = lift_factor(&g, &targets, s, LiftConfig::default()).unwrap();
        assert!(lifted.hom.is_hom().ok());
        assert_eq!(lifted.stats.route, Route::Layered);
        assert_eq!(lifted.hom.images()[1].phi_m(), sigma);
    }
}
