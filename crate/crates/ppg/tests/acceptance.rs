//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use ppg::scan::{sharded, thread_count};
use ppg_core::groups::{coproduct, demushkin, free, Presentation};
use ppg_core::magnus::{check_mild, cup_value, MildError, MonomialOrder, RejectReason, DEFAULT_MILD_DEGREE};
use ppg_core::massey::{
    full_rank_surjection, lift_factor, strong_massey_lift, verify_witness, CharacterTuple, LiftConfig, MasseyError,
};
use ppg_core::numtheory::{q_ray_structure, rank_report, signature, wieferich_scan, wieferich_test, SMode, TameScanner, ZPoly};
use ppg_core::ring::PrimePower;
use ppg_core::unipotent::{frattini_rank, frattini_subgroup, phi_kernel, UniShape};
use ppg_core::word::{Letter, Word};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

const OCTIC: &str = "x^8-32*x^6+344*x^4-512*x^2+1936";

fn d(q: u64, p: u64) -> Presentation {
    demushkin(&BigUint::from(q), p).unwrap()
}

fn config() -> LiftConfig {
    LiftConfig::default()
}

// ---- oracles ----

/// An element of U_3(Z/M) as entries (0,1), (1,2), (0,2).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct U3 {
    a: u64,
    b: u64,
    c: u64,
}

impl U3 {
    const ONE: U3 = U3 { a: 0, b: 0, c: 0 };

    fn mul(self, o: U3, m: u64) -> U3 {
        U3 { a: (self.a + o.a) % m, b: (self.b + o.b) % m, c: (self.c + o.c + self.a * o.b) % m }
    }

    fn inv(self, m: u64) -> U3 {
        U3 { a: (m - self.a) % m, b: (m - self.b) % m, c: (self.a * self.b % m + m - self.c) % m }
    }

    fn pow(self, e: i64, m: u64) -> U3 {
        let base = if e < 0 { self.inv(m) } else { self };
        (0..e.unsigned_abs()).fold(U3::ONE, |acc, _| acc.mul(base, m))
    }

    fn all(m: u64) -> impl Iterator<Item = U3> {
        (0..m).flat_map(move |a| (0..m).flat_map(move |b| (0..m).map(move |c| U3 { a, b, c })))
    }
}

/// `x2 x1 x2^-1 x1^-q = 1` with `x1 = a`, `x2 = b`.
fn demushkin_holds(x1: U3, x2: U3, q: u64, m: u64) -> bool {
    x2.mul(x1, m).mul(x2.inv(m), m).mul(x1.pow(-(q as i64), m), m) == U3::ONE
}

/// Target classes `[[a1, b1], [a2, b2]]` (superdiagonals of x1, x2 mod p)
/// for which a homomorphism D(q) -> U_3(Z/p^m) exists.
fn solvable_classes(q: u64, p: u64, m: u32) -> BTreeSet<[u64; 4]> {
    let modulus = p.pow(m);
    let elems: Vec<U3> = U3::all(modulus).collect();
    let mut out = BTreeSet::new();
    for &x1 in &elems {
        for &x2 in &elems {
            if demushkin_holds(x1, x2, q, modulus) {
                out.insert([x1.a % p, x1.b % p, x2.a % p, x2.b % p]);
            }
        }
    }
    out
}

type Series = BTreeMap<Vec<usize>, i128>;

/// Magnus expansion of `w` mod `p`, truncated above degree `deg`, computed
/// by direct multiplication of `(1 + X_g)^e`.
fn naive_magnus(w: &Word, p: i128, deg: usize) -> Series {
    let mut acc: Series = BTreeMap::from([(Vec::new(), 1)]);
    for l in w.letters() {
        let e = i128::try_from(&l.exp).expect("small exponent");
        let mut factor: Series = BTreeMap::new();
        let mut binom: i128 = 1;
        for k in 0..=deg {
            let c = binom.rem_euclid(p);
            if c != 0 {
                factor.insert(vec![l.gen; k], c);
            }
            binom = binom * (e - k as i128) / (k as i128 + 1);
        }
        let mut next: Series = BTreeMap::new();
        for (ma, ca) in &acc {
            for (mb, cb) in &factor {
                if ma.len() + mb.len() > deg {
                    continue;
                }
                let mut mono = ma.clone();
                mono.extend(mb);
                let slot = next.entry(mono).or_insert(0);
                *slot = (*slot + ca * cb).rem_euclid(p);
            }
        }
        next.retain(|_, c| *c != 0);
        acc = next;
    }
    acc
}

/// Lowest-degree term of `magnus(w) - 1`, largest under `X_d > ... > X_1`.
fn naive_leading(w: &Word, p: u64, deg: usize) -> Option<(Vec<usize>, u64)> {
    let s = naive_magnus(w, p as i128, deg);
    let low = s.keys().filter(|m| !m.is_empty()).map(Vec::len).min()?;
    s.iter().filter(|(m, _)| m.len() == low).max_by(|x, y| x.0.cmp(y.0)).map(|(m, c)| (m.clone(), *c as u64))
}

fn word(letters: &[(usize, i64)]) -> Word {
    Word::new(letters.iter().map(|&(g, e)| Letter::new(g, e)).collect())
}

fn comm(a: &Word, b: &Word) -> Word {
    Word::commutator(a, b)
}

fn gen(g: usize) -> Word {
    word(&[(g, 1)])
}

fn demushkin_word(x1: usize, x2: usize, q: i64) -> Word {
    word(&[(x2, 1), (x1, 1), (x2, -1), (x1, -q)])
}

// ---- criteria ----

fn final_example() -> Outcome {
    let f = ZPoly::parse(OCTIC).map_err(|e| e.to_string())?;
    ensure!(signature(&f) == Ok((0, 4)), "signature {:?}", signature(&f));
    let scanner = TameScanner::new(f.clone(), 3, 2).map_err(|e| e.to_string())?;
    for ell in [37u64, 73, 163, 2341] {
        let r = scanner.report(ell);
        ensure!(!r.untrusted && !r.ramified, "{ell}: untrusted or ramified");
        let hit = r.degrees.iter().zip(&r.norms).zip(&r.levels).any(|((&deg, norm), &lvl)| {
            let direct = BigUint::from(ell).pow(deg as u32);
            lvl >= 2 && *norm == direct && (&direct % 9u32) == BigUint::from(1u32)
        });
        ensure!(hit, "{ell}: no prime of level >= 2 in {r:?}");
    }
    let rank = rank_report(&f, 3, &SMode::AllOfSp, 1).map_err(|e| e.to_string())?;
    ensure!(rank.rank == 4 && rank.unipotent_size == 9, "rank report {rank:?}");
    Ok(())
}

fn theorem_pipeline() -> Outcome {
    let g = coproduct(&[d(19, 3), d(37, 3), d(73, 3), d(109, 3)]).map_err(|e| e.to_string())?;
    for f in g.factors() {
        ensure!(matches!(f.kind, ppg_core::groups::FactorKind::Demushkin { level, .. } if level >= 2), "level {f:?}");
    }
    let w = full_rank_surjection(&g, 8, 2, config()).map_err(|e| e.to_string())?;
    ensure!(w.n() == 8 && w.m() == 2, "target U_{}(Z/3^{})", w.n() + 1, w.m());
    let report = verify_witness(&w);
    ensure!(report.all_passed(), "failed checks: {:?}", report.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    ensure!(report.transcript.relators.iter().all(|&x| x), "relators");
    ensure!(report.transcript.congruences.iter().all(|&x| x), "congruences");
    ensure!(report.transcript.frattini_rank == 8, "frattini rank {}", report.transcript.frattini_rank);
    ensure!(frattini_rank(w.hom.images()) == 8, "recomputed frattini rank");
    Ok(())
}

fn obstruction_soundness() -> Outcome {
    let g = d(4, 3);
    let chis = CharacterTuple::new(3, 2, vec![vec![1, 1], vec![1, 1]]).map_err(|e| e.to_string())?;
    match strong_massey_lift(&g, &chis, 2, config()) {
        Err(MasseyError::Obstruction(o)) => ensure!(o.definitive, "obstruction not definitive: {o}"),
        other => return Err(format!("expected an obstruction, got {other:?}")),
    }
    let lifts: Vec<U3> = U3::all(9).filter(|x| x.a % 3 == 1 && x.b % 3 == 1).collect();
    ensure!(lifts.len() == 81, "class size {}", lifts.len());
    let mut pairs = 0;
    for &x1 in &lifts {
        for &x2 in &lifts {
            pairs += 1;
            ensure!(!demushkin_holds(x1, x2, 4, 9), "brute force found a solution {x1:?} {x2:?}");
        }
    }
    ensure!(pairs == 6561, "pairs {pairs}");
    Ok(())
}

fn oracle_equivalence() -> Outcome {
    let mut checked = 0;
    let mut solvable = 0;
    for p in [2u64, 3] {
        for m in [1u32, 2] {
            let shape = UniShape::new(2, PrimePower::new(p, m).unwrap()).unwrap();
            for q in [4u64, 7, 10, 13, 17] {
                if q % p != 1 {
                    continue;
                }
                let g = d(q, p);
                let truth = solvable_classes(q, p, m);
                for class in 0..p.pow(4) {
                    let t = [class % p, class / p % p, class / p / p % p, class / p / p / p];
                    let expected = truth.contains(&t);
                    let targets = vec![vec![t[0], t[1]], vec![t[2], t[3]]];
                    let got = match lift_factor(&g, &targets, shape, config()) {
                        Ok(l) => {
                            let imgs = l.hom.images();
                            let x1 = U3 { a: imgs[0].get(0, 1), b: imgs[0].get(1, 2), c: imgs[0].get(0, 2) };
                            let x2 = U3 { a: imgs[1].get(0, 1), b: imgs[1].get(1, 2), c: imgs[1].get(0, 2) };
                            let modulus = p.pow(m);
                            ensure!(demushkin_holds(x1, x2, q, modulus), "p={p} m={m} q={q} {t:?}: bad solution");
                            ensure!([x1.a % p, x1.b % p, x2.a % p, x2.b % p] == t, "p={p} m={m} q={q} {t:?}: wrong class");
                            true
                        }
                        Err(MasseyError::Obstruction(_)) => false,
                        Err(e) => return Err(format!("p={p} m={m} q={q} {t:?}: {e}")),
                    };
                    ensure!(got == expected, "p={p} m={m} q={q} {t:?}: solver {got}, brute force {expected}");
                    let chis = CharacterTuple::new(p, 2, vec![vec![t[0], t[2]], vec![t[1], t[3]]]).unwrap();
                    let strong = match strong_massey_lift(&g, &chis, m, config()) {
                        Ok(_) => true,
                        Err(MasseyError::Obstruction(_) | MasseyError::PreconditionCup { .. }) => false,
                        Err(e) => return Err(format!("p={p} m={m} q={q} {t:?}: {e}")),
                    };
                    ensure!(strong == expected, "p={p} m={m} q={q} {t:?}: tuple lift {strong}, brute force {expected}");
                    checked += 1;
                    solvable += usize::from(expected);
                }
            }
        }
    }
    ensure!(checked == 3 * 16 * 2 + 4 * 81 * 2, "classes checked {checked}");
    ensure!(solvable > 0 && solvable < checked, "degenerate sample: {solvable} of {checked} solvable");
    Ok(())
}

fn mildness_suite() -> Outcome {
    let natural = |n| MonomialOrder::natural(n);
    for p in [3u64, 5, 7] {
        let qs: Vec<u64> = (2..200).filter(|q| q % p == 1).take(6).collect();
        for &q in &qs {
            let g = d(q, p);
            let cert = check_mild(&g, &natural(2), DEFAULT_MILD_DEGREE).map_err(|e| format!("D({q}) p={p}: {e}"))?;
            let lead = naive_leading(&g.relators()[0], p, 3).ok_or("zero expansion")?;
            ensure!(lead.0 == vec![1, 0] && cert.leading == vec![(1, 0)], "D({q}) p={p}: leading {lead:?}");
        }
        let parts: Vec<Presentation> = qs.iter().take(4).map(|&q| d(q, p)).chain([free(2, p).unwrap()]).collect();
        let g = coproduct(&parts).map_err(|e| e.to_string())?;
        let order = natural(g.num_generators());
        let cert = check_mild(&g, &order, DEFAULT_MILD_DEGREE).map_err(|e| format!("coproduct p={p}: {e}"))?;
        for (r, rel) in g.relators().iter().enumerate() {
            let (mono, _) = naive_leading(rel, p, 3).ok_or("zero expansion")?;
            ensure!(vec![cert.leading[r].0, cert.leading[r].1] == mono, "coproduct p={p} relator {r}: {mono:?}");
        }
    }

    let (x1, x2) = (gen(0), gen(1));
    for p in [3u64, 5, 7] {
        let q = (2..).find(|q| q % p == 1).unwrap() as i64;
        let mut mutants = vec![
            comm(&comm(&x2, &x1), &x1),
            comm(&comm(&x2, &x1), &x2),
            comm(&x2, &comm(&x2, &x1)),
            comm(&comm(&x2, &x1), &x1).concat(&word(&[(0, 1 - q)])),
            comm(&comm(&x1, &x2), &x2).concat(&word(&[(1, p as i64 * 2)])),
        ];
        if p == 3 {
            mutants.push(word(&[(0, 3)]));
            mutants.push(word(&[(1, 3), (0, 3)]));
        }
        for w in &mutants {
            let g = Presentation::generic(p, vec!["x1".into(), "x2".into()], vec![w.clone()]).unwrap();
            let want = naive_leading(w, p, 3).ok_or("zero expansion")?;
            ensure!(want.0.len() == 3, "mutant {w:?} has no cubic leading term");
            reject_with(&g, 0, &want, p)?;

            // the same mutation sitting in the second block of a coproduct
            let rels = vec![demushkin_word(0, 1, q + p as i64), w.shifted(2)];
            let names = (1..=4).map(|i| format!("y{i}")).collect();
            let g = Presentation::generic(p, names, rels).unwrap();
            let want = naive_leading(&w.shifted(2), p, 3).unwrap();
            reject_with(&g, 1, &want, p)?;
        }
    }
    Ok(())
}

fn reject_with(g: &Presentation, relator: usize, want: &(Vec<usize>, u64), p: u64) -> Outcome {
    match check_mild(g, &MonomialOrder::natural(g.num_generators()), DEFAULT_MILD_DEGREE) {
        Err(MildError::Rejected(r)) => {
            ensure!(r.relator == relator, "p={p}: rejected relator {} instead of {relator}", r.relator);
            ensure!(r.reason == RejectReason::NonQuadratic, "p={p}: reason {}", r.reason);
            let got = r.leading.map(|(m, c)| (m.0, c));
            ensure!(got.as_ref() == Some(want), "p={p}: leading {got:?}, expected {want:?}");
            Ok(())
        }
        other => Err(format!("p={p}: expected a rejection, got {other:?}")),
    }
}

fn random_frattini_word(rng: &mut StdRng, gens: usize, p: u64) -> Word {
    let len = rng.gen_range(1..=8);
    let mut letters: Vec<(usize, i64)> = (0..len)
        .map(|_| (rng.gen_range(0..gens), [-3, -2, -1, 1, 2, 3][rng.gen_range(0..6)]))
        .collect();
    let mut sums = vec![0i64; gens];
    for &(g, e) in &letters {
        sums[g] += e;
    }
    for (g, s) in sums.into_iter().enumerate() {
        let fix = -s + p as i64 * rng.gen_range(-1..=1);
        if fix != 0 {
            letters.push((g, fix));
        }
    }
    word(&letters)
}

fn random_presentation(rng: &mut StdRng, p: u64) -> Presentation {
    let gens = rng.gen_range(2..=5);
    let rels = (0..rng.gen_range(1..=3)).map(|_| random_frattini_word(rng, gens, p)).collect();
    Presentation::generic(p, (1..=gens).map(|i| format!("x{i}")).collect(), rels).unwrap()
}

fn random_char(rng: &mut StdRng, len: usize, p: u64) -> Vec<u64> {
    (0..len).map(|_| rng.gen_range(0..p)).collect()
}

fn cup_laws() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut nonzero = 0;
    for i in 0..200 {
        let p = [3u64, 5, 7][i % 3];
        let g = random_presentation(&mut rng, p);
        let dim = g.num_generators();
        for _ in 0..4 {
            let (a, b) = (random_char(&mut rng, dim, p), random_char(&mut rng, dim, p));
            let ab = cup_value(&a, &b, &g).map_err(|e| e.to_string())?;
            let ba = cup_value(&b, &a, &g).map_err(|e| e.to_string())?;
            let aa = cup_value(&a, &a, &g).map_err(|e| e.to_string())?;
            ensure!(ab.components.iter().zip(&ba.components).all(|(x, y)| (x + y) % p == 0), "antisymmetry #{i}");
            ensure!(aa.is_zero(), "chi cup chi #{i}");
            nonzero += usize::from(!ab.is_zero());
        }
    }
    ensure!(nonzero > 100, "only {nonzero} nonzero cups; sample too degenerate");

    for i in 0..50 {
        let p = [3u64, 5, 7][i % 3];
        let mut parts = Vec::new();
        for _ in 0..rng.gen_range(2..=4) {
            parts.push(match rng.gen_range(0..3) {
                0 => d(p * rng.gen_range(1..20) + 1, p),
                1 => free(rng.gen_range(1..=3), p).unwrap(),
                _ => random_presentation(&mut rng, p),
            });
        }
        let g = coproduct(&parts).map_err(|e| e.to_string())?;
        let dim = g.num_generators();
        let mut blocks = Vec::new();
        let mut start = 0;
        for part in &parts {
            blocks.push(start..start + part.num_generators());
            start += part.num_generators();
        }
        for (u, bu) in blocks.iter().enumerate() {
            for (v, bv) in blocks.iter().enumerate() {
                if u == v {
                    continue;
                }
                for _ in 0..3 {
                    let mut a = vec![0; dim];
                    let mut b = vec![0; dim];
                    bu.clone().for_each(|j| a[j] = rng.gen_range(0..p));
                    bv.clone().for_each(|j| b[j] = rng.gen_range(0..p));
                    ensure!(cup_value(&a, &b, &g).map_err(|e| e.to_string())?.is_zero(), "cross-factor cup #{i}");
                }
                for j in bu.clone() {
                    for k in bv.clone() {
                        let a = CharacterTuple::dual(dim, j);
                        let b = CharacterTuple::dual(dim, k);
                        ensure!(cup_value(&a, &b, &g).unwrap().is_zero(), "cross-factor dual cup #{i}");
                    }
                }
            }
        }
    }

    for p in [3u64, 5] {
        for q in (2..60).filter(|q| q % p == 1).take(4) {
            let g = d(q, p);
            let (sigma, tau) = (vec![0, 1], vec![1, 0]);
            ensure!(!cup_value(&sigma, &tau, &g).unwrap().is_zero(), "D({q}) p={p}: sigma cup tau vanishes");
            match full_rank_surjection(&g, 2, 1, config()) {
                Err(MasseyError::NoSurjectiveTuple) => {}
                other => return Err(format!("D({q}) p={p}: expected no U_3 quotient, got {other:?}")),
            }
            let elems: Vec<U3> = U3::all(p).collect();
            for &x1 in &elems {
                for &x2 in &elems {
                    let onto = (x1.a * x2.b + p * p - x1.b * x2.a) % p != 0;
                    ensure!(!(onto && demushkin_holds(x1, x2, q, p)), "D({q}) p={p}: surjection {x1:?} {x2:?}");
                }
            }
        }
    }
    Ok(())
}

fn vp(mut x: u64, p: u64) -> u32 {
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn abelianization() -> Outcome {
    let mut cases = 0;
    for p in [3u64, 5] {
        for ell in (2..500u64).filter(|&l| l != p && ppg_core::ring::is_prime(l) && l % p == 1) {
            for b in 1..=5u32 {
                let s = q_ray_structure(p, &[ell], b).map_err(|e| e.to_string())?;
                let mut want: Vec<u64> = [p.pow(b - 1), p.pow(vp(ell - 1, p))].into_iter().filter(|&x| x > 1).collect();
                want.sort_unstable_by(|x, y| y.cmp(x));
                ensure!(s.computed == want, "p={p} l={ell} B={b}: {:?} vs {want:?}", s.computed);
                cases += 1;
            }
        }
    }
    ensure!(cases > 100, "only {cases} cases");
    Ok(())
}

fn wieferich() -> Outcome {
    let direct = wieferich_scan(2, 2, 1_000_000).map_err(|e| e.to_string())?;
    ensure!(direct == vec![1093, 3511], "scan {direct:?}");
    let threaded = sharded(2, 1_000_000, 1 << 16, thread_count(), |lo, hi| wieferich_scan(2, lo, hi).unwrap());
    ensure!(threaded == direct, "threaded scan {threaded:?}");
    ensure!(wieferich_test(3, 11) == Ok(true), "wieferich_test(3, 11)");
    Ok(())
}

fn frattini_law() -> Outcome {
    for (n, p, m, size) in [(2usize, 3u64, 2u32, 81usize), (3, 3, 1, 27)] {
        let shape = UniShape::new(n, PrimePower::new(p, m).unwrap()).unwrap();
        let phi = frattini_subgroup(shape).map_err(|e| e.to_string())?;
        let direct: BTreeSet<_> = shape
            .elements()
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|g| (0..n).all(|i| g.get(i, i + 1) % p == 0))
            .collect();
        ensure!(direct.len() == size, "U_{}: kernel size {}", n + 1, direct.len());
        ensure!(phi == direct, "U_{}: saturation {} elements, kernel {}", n + 1, phi.len(), direct.len());
        ensure!(phi == phi_kernel(shape).map_err(|e| e.to_string())?, "U_{}: phi_kernel disagrees", n + 1);
    }
    Ok(())
}

struct Criterion {
    name: &'static str,
    run: fn() -> Outcome,
    limit: Option<Duration>,
}

fn main() {
    let criteria = [
        Criterion { name: "final example: octic, tame primes, rank", run: final_example, limit: Some(Duration::from_secs(10)) },
        Criterion { name: "surjection onto U_9(Z/9)", run: theorem_pipeline, limit: Some(Duration::from_secs(60)) },
        Criterion { name: "obstruction soundness D(4)", run: obstruction_soundness, limit: None },
        Criterion { name: "solver vs brute force on U_3", run: oracle_equivalence, limit: None },
        Criterion { name: "mildness suite", run: mildness_suite, limit: None },
        Criterion { name: "cup product laws", run: cup_laws, limit: None },
        Criterion { name: "abelianization p-part", run: abelianization, limit: None },
        Criterion { name: "wieferich scan", run: wieferich, limit: Some(Duration::from_secs(30)) },
        Criterion { name: "frattini subgroup is ker phi", run: frattini_law, limit: None },
    ];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(()), Some(limit)) if took > limit => Err(format!("took {took:?}, limit {limit:?}")),
            (r, _) => r,
        };
        match result {
            Ok(()) => println!("PASS {} {} ({:.2?})", i + 1, c.name, took),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {} ({:.2?}): {msg}", i + 1, c.name, took);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
