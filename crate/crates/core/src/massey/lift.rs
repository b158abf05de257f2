//! Layered lifting of generator images through the diagonals of `U_{n+1}(Z/p^m)`.
//!
//! Stage `k` fixes the relator components on diagonal offsets `k - 1` and `k`
//! by adjusting generator entries on those offsets. Offset-`k` perturbations are
//! central modulo offset `k + 1`, so the effect of a perturbation is read off
//! exactly by a finite difference and the stage is an affine system over
//! `Z/p^m`. Superdiagonal perturbations move in steps of `p` so the mod-`p`
//! class of the superdiagonal stays fixed.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::groups::ReducedWord;
use crate::ring::{solve_affine, AffineSolution, Cokernel, LinSystem};
use crate::unipotent::{UniMatrix, UniShape};

pub const DEFAULT_BUDGET: usize = 512;

/// How many raw kernel combinations may be scanned per distinct candidate.
const RAW_FACTOR: usize = 8;

/// A nonzero relator entry left over when a stage has no solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectEntry {
    pub relator: usize,
    pub row: usize,
    pub col: usize,
    pub value: u64,
}

/// A failed lift: the stage that could not be solved and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obstruction {
    /// Coproduct factor the failure belongs to, when lifting factorwise.
    pub factor: Option<usize>,
    /// Diagonal offset `k` of the failing stage, in `1..=n`.
    pub level: usize,
    /// Nonzero relator entries on offsets `k - 1` and `k` at the failure point.
    pub defect: Vec<DefectEntry>,
    /// The cokernel of the linearized stage system.
    pub cokernel: Cokernel,
    pub budget: usize,
    pub candidates_tried: usize,
    /// Some level ran out of budget before its candidates were exhausted.
    pub exhausted_budget: bool,
    /// The search covered every candidate with exact linearizations, so no lift exists.
    pub definitive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    /// No equations to solve: the canonical lift already works.
    Canonical,
    Layered,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SolverStats {
    pub budget: usize,
    pub candidates: usize,
    pub backtracks: usize,
    pub route: Route,
}

/// A lifting problem for one set of generators and relators.
pub(crate) struct LiftProblem<'a> {
    pub relators: &'a [ReducedWord],
    pub generators: usize,
    pub shape: UniShape,
    /// Per generator, the superdiagonal residues mod `p` (length `n`).
    pub targets: &'a [Vec<u64>],
    /// Solve in the quotient by the corner entry.
    pub drop_corner: bool,
    pub budget: usize,
}

#[derive(Debug, Clone, Copy)]
struct Var {
    gen: usize,
    row: usize,
    col: usize,
    step: u64,
}

/// The base lift: least residues on the superdiagonal, zeros elsewhere.
pub(crate) fn canonical_images(shape: UniShape, targets: &[Vec<u64>]) -> Vec<UniMatrix> {
    targets
        .iter()
        .map(|t| {
            let mut m = shape.identity();
            for (u, &v) in t.iter().enumerate() {
                m.set(u, u + 1, v % shape.ring().p());
            }
            m
        })
        .collect()
}

pub(crate) fn relators_hold(rels: &[ReducedWord], images: &[UniMatrix], shape: UniShape, drop_corner: bool) -> bool {
    rels.iter().all(|r| {
        let mut v = r.eval(images, shape);
        if drop_corner {
            v.set(0, shape.n(), 0);
        }
        v.is_identity()
    })
}

/// Runs the layered solver; falls back to enumeration for tiny shapes when the
/// layered search is not conclusive.
pub(crate) fn solve(problem: &LiftProblem<'_>) -> Result<(Vec<UniMatrix>, SolverStats), Obstruction> {
    let shape = problem.shape;
    let n = shape.n();
    let p = shape.ring().p();
    let mut images = canonical_images(shape, problem.targets);
    if relators_hold(problem.relators, &images, shape, problem.drop_corner) {
        let stats = SolverStats { budget: problem.budget, candidates: 0, backtracks: 0, route: Route::Canonical };
        return Ok((images, stats));
    }

    // Superdiagonal positions where every target vanishes split the problem
    // into independent diagonal blocks.
    let zero_positions: Vec<usize> =
        (0..n).filter(|&u| problem.targets.iter().all(|t| t[u] % p == 0)).collect();
    let mut blocks = Vec::new();
    let mut start = 0;
    for &u in &zero_positions {
        blocks.push((start, u));
        start = u + 1;
    }
    blocks.push((start, n));
    let split = !zero_positions.is_empty();

    let mut stats = SolverStats { budget: problem.budget, candidates: 0, backtracks: 0, route: Route::Layered };
    for &(lo, hi) in &blocks {
        if hi == lo {
            continue;
        }
        let sub = UniShape::new(hi - lo, shape.ring()).expect("sub-block size within bounds");
        let sub_targets: Vec<Vec<u64>> = problem.targets.iter().map(|t| t[lo..hi].to_vec()).collect();
        let drop_corner = problem.drop_corner && !split;
        let mut search = Layered::new(problem.relators, problem.generators, sub, drop_corner, problem.budget);
        let start_images = canonical_images(sub, &sub_targets);
        let found = match search.run(start_images) {
            Some(found) => found,
            None => {
                let mut obstruction = search.obstruction();
                if !obstruction.definitive && sub.n() <= 2 && sub.ring().modulus() <= 9 {
                    match exhaustive(problem.relators, problem.generators, sub, &sub_targets, drop_corner) {
                        Ok(Some(found)) => {
                            stats.route = Route::Exhaustive;
                            place_block(&mut images, &found, lo);
                            continue;
                        }
                        Ok(None) => obstruction.definitive = true,
                        Err(_) => {}
                    }
                }
                for d in &mut obstruction.defect {
                    d.row += lo;
                    d.col += lo;
                }
                return Err(obstruction);
            }
        };
        stats.candidates += search.candidates();
        stats.backtracks += search.backtracks;
        place_block(&mut images, &found, lo);
    }
    debug_assert!(relators_hold(problem.relators, &images, shape, problem.drop_corner));
    Ok((images, stats))
}

fn place_block(images: &mut [UniMatrix], block: &[UniMatrix], lo: usize) {
    for (img, b) in images.iter_mut().zip(block) {
        let d = b.shape().dim();
        for i in 0..d {
            for j in (i + 1)..d {
                img.set(lo + i, lo + j, b.get(i, j));
            }
        }
    }
}

struct Layered<'a> {
    rels: &'a [ReducedWord],
    gens: usize,
    shape: UniShape,
    drop_corner: bool,
    budget: usize,
    used: Vec<usize>,
    exhausted: bool,
    inexact: bool,
    backtracks: usize,
    deepest: Option<(usize, Vec<DefectEntry>, Cokernel)>,
}

impl<'a> Layered<'a> {
    fn new(rels: &'a [ReducedWord], gens: usize, shape: UniShape, drop_corner: bool, budget: usize) -> Self {
        Layered {
            rels,
            gens,
            shape,
            drop_corner,
            budget: budget.max(1),
            used: vec![0; shape.n() + 2],
            exhausted: false,
            inexact: false,
            backtracks: 0,
            deepest: None,
        }
    }

    fn candidates(&self) -> usize {
        self.used.iter().sum()
    }

    fn obstruction(&self) -> Obstruction {
        let (level, defect, cokernel) = self.deepest.clone().unwrap_or_else(|| {
            let empty = Cokernel { invariant_valuations: Vec::new(), violated: Vec::new(), residues: Vec::new() };
            (self.shape.n(), Vec::new(), empty)
        });
        Obstruction {
            factor: None,
            level,
            defect,
            cokernel,
            budget: self.budget,
            candidates_tried: self.candidates(),
            exhausted_budget: self.exhausted,
            definitive: !self.exhausted && !self.inexact,
        }
    }

    fn is_corner(&self, i: usize, j: usize) -> bool {
        self.drop_corner && i == 0 && j == self.shape.n()
    }

    fn equations(&self, k: usize) -> Vec<(usize, usize, usize)> {
        let n = self.shape.n();
        let offsets: &[usize] = if k == 1 { &[1] } else { &[k - 1, k] };
        let mut eqs = Vec::new();
        for r in 0..self.rels.len() {
            for &o in offsets {
                for i in 0..=(n - o) {
                    if !self.is_corner(i, i + o) {
                        eqs.push((r, i, i + o));
                    }
                }
            }
        }
        eqs
    }

    fn variables(&self, k: usize) -> Vec<Var> {
        let n = self.shape.n();
        let p = self.shape.ring().p();
        let m = self.shape.ring().m();
        let mut offsets: Vec<(usize, u64)> = Vec::new();
        if k == 1 {
            if m > 1 {
                offsets.push((1, p));
            }
        } else {
            if k - 1 == 1 {
                if m > 1 {
                    offsets.push((1, p));
                }
            } else {
                offsets.push((k - 1, 1));
            }
            offsets.push((k, 1));
        }
        let mut vars = Vec::new();
        for &(o, step) in &offsets {
            for gen in 0..self.gens {
                for i in 0..=(n - o) {
                    if !self.is_corner(i, i + o) {
                        vars.push(Var { gen, row: i, col: i + o, step });
                    }
                }
            }
        }
        vars
    }

    fn values(&self, images: &[UniMatrix], eqs: &[(usize, usize, usize)]) -> Vec<u64> {
        let evals: Vec<UniMatrix> = self.rels.iter().map(|r| r.eval(images, self.shape)).collect();
        eqs.iter().map(|&(r, i, j)| evals[r].get(i, j)).collect()
    }

    fn perturb(&self, images: &mut [UniMatrix], v: &Var, amount: u64) {
        let ring = self.shape.ring();
        let cur = images[v.gen].get(v.row, v.col);
        let delta = ring.mul(v.step % ring.modulus(), amount);
        images[v.gen].set(v.row, v.col, ring.add(cur, delta));
    }

    fn linearize(&self, images: &[UniMatrix], eqs: &[(usize, usize, usize)], vars: &[Var]) -> (LinSystem, Vec<u64>) {
        let ring = self.shape.ring();
        let base = self.values(images, eqs);
        let mut matrix = vec![0u64; eqs.len() * vars.len()];
        for (c, v) in vars.iter().enumerate() {
            let mut moved = images.to_vec();
            self.perturb(&mut moved, v, 1);
            let after = self.values(&moved, eqs);
            for r in 0..eqs.len() {
                matrix[r * vars.len() + c] = ring.sub(after[r], base[r]);
            }
        }
        let rhs = base.iter().map(|&b| ring.neg(b)).collect();
        let sys = LinSystem::new(ring, eqs.len(), vars.len(), matrix, rhs).expect("dimensions agree");
        (sys, base)
    }

    fn record_failure(&mut self, k: usize, eqs: &[(usize, usize, usize)], base: &[u64], cokernel: Cokernel) {
        if self.deepest.as_ref().is_some_and(|(level, _, _)| *level >= k) {
            return;
        }
        let defect = eqs
            .iter()
            .zip(base)
            .filter(|(_, &v)| v != 0)
            .map(|(&(relator, row, col), &value)| DefectEntry { relator, row, col, value })
            .collect();
        self.deepest = Some((k, defect, cokernel));
    }

    fn run(&mut self, images: Vec<UniMatrix>) -> Option<Vec<UniMatrix>> {
        self.stage(images, 1)
    }

    fn stage(&mut self, images: Vec<UniMatrix>, k: usize) -> Option<Vec<UniMatrix>> {
        let n = self.shape.n();
        if k > n {
            let ok = relators_hold(self.rels, &images, self.shape, self.drop_corner);
            self.inexact |= !ok;
            return ok.then_some(images);
        }
        let ring = self.shape.ring();
        let eqs = self.equations(k);
        let vars = self.variables(k);
        let (sys, base) = self.linearize(&images, &eqs, &vars);
        let (particular, kernel) = match solve_affine(&sys) {
            AffineSolution::Solved { particular, kernel } => (particular, kernel),
            AffineSolution::NoSolution(cok) => {
                self.record_failure(k, &eqs, &base, cok);
                return None;
            }
        };
        let nonlinear = k == 2 && ring.m() > 2;

        // Only the offset k-1 part of a candidate is committed: the next stage
        // adjusts offsets k and k+1 again.
        let committed: Vec<usize> =
            (0..vars.len()).filter(|&c| k >= 2 && vars[c].col - vars[c].row == k - 1).collect();
        let project = |x: &[u64]| -> Vec<u64> {
            committed.iter().map(|&c| ring.mul(vars[c].step % ring.modulus(), x[c])).collect()
        };
        let kernel: Vec<_> = kernel.into_iter().filter(|g| project(&g.vector).iter().any(|&v| v != 0)).collect();
        let orders: Vec<u64> = kernel.iter().map(|g| ring.p_power(g.order_exp)).collect();

        let mut coeffs = vec![0u64; kernel.len()];
        let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
        let mut raw = 0usize;
        loop {
            if self.used[k] >= self.budget || raw >= self.budget * RAW_FACTOR {
                self.exhausted = true;
                break;
            }
            raw += 1;
            let mut x = particular.clone();
            for (g, &c) in kernel.iter().zip(&coeffs) {
                if c != 0 {
                    for (xi, &gi) in x.iter_mut().zip(&g.vector) {
                        *xi = ring.add(*xi, ring.mul(c, gi));
                    }
                }
            }
            if seen.insert(project(&x)) {
                self.used[k] += 1;
                let mut next = images.clone();
                for (v, &xv) in vars.iter().zip(&x) {
                    if xv != 0 {
                        self.perturb(&mut next, v, xv);
                    }
                }
                let ok = if nonlinear { self.polish(&mut next, &eqs, &vars) } else { true };
                if ok && self.values(&next, &eqs).iter().all(|&v| v == 0) {
                    if let Some(found) = self.stage(next, k + 1) {
                        return Some(found);
                    }
                } else {
                    self.inexact = true;
                }
                self.backtracks += 1;
            }
            // odometer step, last coordinate fastest
            let mut pos = kernel.len();
            loop {
                if pos == 0 {
                    return None;
                }
                pos -= 1;
                coeffs[pos] += 1;
                if coeffs[pos] < orders[pos] {
                    break;
                }
                coeffs[pos] = 0;
            }
        }
        None
    }

    /// Newton iteration for the one stage whose linearization is not exact
    /// (superdiagonal steps of `p` feed offset 2 quadratically when `m > 2`).
    fn polish(&mut self, images: &mut Vec<UniMatrix>, eqs: &[(usize, usize, usize)], vars: &[Var]) -> bool {
        let rounds = 2 * self.shape.ring().m() as usize;
        for _ in 0..rounds {
            let (sys, base) = self.linearize(images, eqs, vars);
            if base.iter().all(|&v| v == 0) {
                return true;
            }
            match solve_affine(&sys) {
                AffineSolution::Solved { particular, .. } => {
                    for (v, &xv) in vars.iter().zip(&particular) {
                        if xv != 0 {
                            self.perturb(images, v, xv);
                        }
                    }
                }
                AffineSolution::NoSolution(_) => return false,
            }
        }
        self.values(images, eqs).iter().all(|&v| v == 0)
    }
}

/// Enumerates every tuple of images with the prescribed superdiagonal classes.
/// Refuses, returning the tuple count, above `2^22` tuples.
pub(crate) fn exhaustive(
    rels: &[ReducedWord],
    gens: usize,
    shape: UniShape,
    targets: &[Vec<u64>],
    drop_corner: bool,
) -> Result<Option<Vec<UniMatrix>>, u128> {
    let ring = shape.ring();
    let p = ring.p();
    let q = ring.modulus();
    let n = shape.n();
    // free coordinates: per generator, superdiagonal lifts (q/p choices) and deeper entries (q choices)
    let mut slots: Vec<(usize, usize, usize, u64)> = Vec::new();
    for g in 0..gens {
        for i in 0..n {
            for j in (i + 1)..=n {
                if drop_corner && i == 0 && j == n {
                    continue;
                }
                slots.push((g, i, j, if j == i + 1 { q / p } else { q }));
            }
        }
    }
    let mut total: u128 = 1;
    for s in &slots {
        total = total.saturating_mul(s.3 as u128);
    }
    if total > 1 << 22 {
        return Err(total);
    }
    let mut images = canonical_images(shape, targets);
    let mut idx = vec![0u64; slots.len()];
    loop {
        for (s, &v) in slots.iter().zip(&idx) {
            let (g, i, j, _) = *s;
            let value = if j == i + 1 { targets[g][i] % p + p * v } else { v };
            images[g].set(i, j, value);
        }
        if relators_hold(rels, &images, shape, drop_corner) {
            return Ok(Some(images));
        }
        let mut pos = slots.len();
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < slots[pos].3 {
                break;
            }
            idx[pos] = 0;
        }
    }
}
