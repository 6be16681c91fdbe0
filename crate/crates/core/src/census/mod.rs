//! Exhaustive census of finite rings of order 2..=8.
//!
//! For each additive decomposition of the order into prime-power cyclic
//! factors, every structure-constant tensor is enumerated by DFS over
//! tensor slots, rejecting a partial tensor as soon as any fully
//! determined basis triple fails associativity. Optional dedupe keeps one
//! representative per isomorphism class: two rings on the same additive
//! group are isomorphic exactly when an additive automorphism transports
//! one tensor to the other, so the lexicographically minimal tensor in
//! each automorphism orbit is the representative. On top of the
//! enumeration sit corpus-level reports: the histogram of commuting
//! probabilities and the square-free-denominator check.

use crate::exact::factor::{factorize_u64, is_square_free};
use crate::exact::rational::Rational;
use crate::ring::FiniteRing;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use thiserror::Error;

pub const MIN_CENSUS_ORDER: u64 = 2;
pub const MAX_CENSUS_ORDER: u64 = 8;

/// Comfortably above the worst decomposition: the unpruned [2,2,2] slot
/// tree has ~1.5e8 nodes, so even zero pruning fits.
pub const DEFAULT_NODE_BUDGET: u64 = 400_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CensusError {
    #[error("census order must be in {MIN_CENSUS_ORDER}..={MAX_CENSUS_ORDER}, got {order}")]
    OrderOutOfRange { order: u64 },
}

#[derive(Clone, Copy, Debug)]
pub struct CensusOptions {
    pub dedupe: bool,
    pub node_budget: u64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions { dedupe: false, node_budget: DEFAULT_NODE_BUDGET }
    }
}

impl CensusOptions {
    pub fn deduped() -> Self {
        CensusOptions { dedupe: true, ..Self::default() }
    }
}

/// One ring as emitted: which additive decomposition it lives on and its
/// position in that decomposition's emission order.
#[derive(Clone, Debug)]
pub struct EnumeratedRing {
    pub decomposition: Vec<u64>,
    pub index: u64,
    pub ring: FiniteRing,
}

/// Raw enumeration result. `total_valid` counts every valid tensor found,
/// whether or not dedupe filtered its emission; decompositions whose
/// search tripped the node budget contribute nothing and are listed in
/// `skipped` (the documented fallback corpus is whatever remains).
#[derive(Clone, Debug)]
pub struct CensusOutcome {
    pub rings: Vec<EnumeratedRing>,
    pub decompositions: Vec<Vec<u64>>,
    pub skipped: Vec<Vec<u64>>,
    pub total_valid: u64,
    pub nodes_visited: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HistogramEntry {
    pub probability: Rational,
    pub count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjectureViolation {
    pub decomposition: Vec<u64>,
    pub index: u64,
    pub probability: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub order: u64,
    pub decompositions: Vec<Vec<u64>>,
    pub skipped_decompositions: Vec<Vec<u64>>,
    pub total_valid: u64,
    pub emitted: u64,
    pub isomorphism_classes: Option<u64>,
    pub nodes_visited: u64,
    pub histogram: Vec<HistogramEntry>,
    pub violations: Vec<ConjectureViolation>,
}

// ---------------------------------------------------------------------
// additive decompositions

fn partitions_desc(n: u32) -> Vec<Vec<u32>> {
    fn rec(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=n.min(max)).rev() {
            prefix.push(part);
            rec(n - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Multisets of prime-power cyclic orders whose product is `order`,
/// e.g. 8 -> [8], [2,4], [2,2,2]. Moduli ascending within each.
pub fn additive_decompositions(order: u64) -> Result<Vec<Vec<u64>>, CensusError> {
    if !(MIN_CENSUS_ORDER..=MAX_CENSUS_ORDER).contains(&order) {
        return Err(CensusError::OrderOutOfRange { order });
    }
    let factorization = factorize_u64(order).expect("order is positive");
    let mut decompositions: Vec<Vec<u64>> = vec![Vec::new()];
    for pp in factorization.factors() {
        let choices: Vec<Vec<u64>> = partitions_desc(pp.exponent)
            .into_iter()
            .map(|parts| parts.into_iter().map(|e| pp.prime.pow(e)).collect())
            .collect();
        let mut next = Vec::with_capacity(decompositions.len() * choices.len());
        for base in &decompositions {
            for choice in &choices {
                let mut moduli = base.clone();
                moduli.extend_from_slice(choice);
                next.push(moduli);
            }
        }
        decompositions = next;
    }
    for moduli in &mut decompositions {
        moduli.sort_unstable();
    }
    Ok(decompositions)
}

// ---------------------------------------------------------------------
// additive automorphisms and tensor transport

fn decode(index: u64, moduli: &[u64]) -> Vec<u64> {
    let mut rest = index;
    moduli
        .iter()
        .map(|&d| {
            let c = rest % d;
            rest /= d;
            c
        })
        .collect()
}

fn encode(coords: &[u64], moduli: &[u64]) -> u64 {
    let mut index = 0;
    let mut weight = 1;
    for (&c, &d) in coords.iter().zip(moduli) {
        index += c * weight;
        weight *= d;
    }
    index
}

/// Additive automorphism as the permutation it induces on element
/// indices.
#[derive(Clone, Debug)]
pub(crate) struct Automorphism {
    forward: Vec<u64>,
    inverse: Vec<u64>,
}

/// Every automorphism of the direct sum of Z_moduli cyclic groups. A map
/// is determined by basis images; e_i can land only on elements killed by
/// d_i, and bijectivity is checked directly on element images.
pub(crate) fn additive_automorphisms(moduli: &[u64]) -> Vec<Automorphism> {
    let k = moduli.len();
    let n: u64 = moduli.iter().product();
    let row_candidates: Vec<Vec<Vec<u64>>> = (0..k)
        .map(|i| {
            (0..n)
                .map(|x| decode(x, moduli))
                .filter(|coords| {
                    coords
                        .iter()
                        .zip(moduli)
                        .all(|(&c, &d)| (moduli[i] * c) % d == 0)
                })
                .collect()
        })
        .collect();
    let mut rows: Vec<&Vec<u64>> = Vec::with_capacity(k);
    let mut out = Vec::new();
    collect_automorphisms(moduli, n, &row_candidates, &mut rows, &mut out);
    out
}

fn collect_automorphisms<'a>(
    moduli: &[u64],
    n: u64,
    row_candidates: &'a [Vec<Vec<u64>>],
    rows: &mut Vec<&'a Vec<u64>>,
    out: &mut Vec<Automorphism>,
) {
    if rows.len() == row_candidates.len() {
        let mut forward = vec![0u64; n as usize];
        let mut seen = vec![false; n as usize];
        let mut bijective = true;
        for x in 0..n {
            let coords = decode(x, moduli);
            let mut image = vec![0u64; moduli.len()];
            for (xi, row) in coords.iter().zip(rows.iter()) {
                for (acc, (&r, &d)) in image.iter_mut().zip(row.iter().zip(moduli)) {
                    *acc = (*acc + xi * r) % d;
                }
            }
            let y = encode(&image, moduli);
            if seen[y as usize] {
                bijective = false;
                break;
            }
            seen[y as usize] = true;
            forward[x as usize] = y;
        }
        if bijective {
            let mut inverse = vec![0u64; n as usize];
            for (x, &y) in forward.iter().enumerate() {
                inverse[y as usize] = x as u64;
            }
            out.push(Automorphism { forward, inverse });
        }
        return;
    }
    for candidate in &row_candidates[rows.len()] {
        rows.push(candidate);
        collect_automorphisms(moduli, n, row_candidates, rows, out);
        rows.pop();
    }
}

/// Tensor of the ring with multiplication x*y = phi(inv(x) inv(y)), flat.
pub(crate) fn transport_tensor(ring: &FiniteRing, aut: &Automorphism) -> Vec<u64> {
    let k = ring.dimension();
    let moduli = ring.moduli();
    let mut out = Vec::with_capacity(k * k * k);
    for i in 0..k {
        for j in 0..k {
            let basis_i = encode(&decode_basis(i, k), moduli);
            let basis_j = encode(&decode_basis(j, k), moduli);
            let x = ring.element_at(aut.inverse[basis_i as usize]);
            let y = ring.element_at(aut.inverse[basis_j as usize]);
            let product = ring.multiply(&x, &y);
            let image = aut.forward[ring.index_of(&product) as usize];
            out.extend_from_slice(&decode(image, moduli));
        }
    }
    out
}

fn decode_basis(i: usize, k: usize) -> Vec<u64> {
    let mut coords = vec![0u64; k];
    coords[i] = 1;
    coords
}

/// Lexicographically minimal automorphism image of the ring's tensor.
#[cfg(test)]
pub(crate) fn canonical_tensor(ring: &FiniteRing, automorphisms: &[Automorphism]) -> Vec<u64> {
    let mut best = transport_tensor(ring, &automorphisms[0]);
    for aut in &automorphisms[1..] {
        let image = transport_tensor(ring, aut);
        if image < best {
            best = image;
        }
    }
    best
}

fn is_canonical(ring: &FiniteRing, tensor: &[u64], automorphisms: &[Automorphism]) -> bool {
    automorphisms
        .iter()
        .all(|aut| transport_tensor(ring, aut).as_slice() >= tensor)
}

// ---------------------------------------------------------------------
// slot DFS with associativity pruning

struct DecompositionContext {
    moduli: Vec<u64>,
    k: usize,
    /// Per slot (i*k + j), candidate vectors c[i][j][*] in ascending lex
    /// order; entries honor both well-definedness multiples.
    slot_candidates: Vec<Vec<Vec<u64>>>,
    automorphisms: Vec<Automorphism>,
    dedupe: bool,
}

impl DecompositionContext {
    fn new(moduli: &[u64], dedupe: bool) -> Self {
        let k = moduli.len();
        let mut slot_candidates = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                let per_entry: Vec<Vec<u64>> = (0..k)
                    .map(|t| {
                        let g = gcd(moduli[t], gcd(moduli[i], moduli[j]));
                        let step = moduli[t] / g;
                        (0..g).map(|m| m * step).collect()
                    })
                    .collect();
                slot_candidates.push(cartesian(&per_entry));
            }
        }
        DecompositionContext {
            moduli: moduli.to_vec(),
            k,
            slot_candidates,
            automorphisms: additive_automorphisms(moduli),
            dedupe,
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Ascending lex product; entry 0 is the most significant position.
fn cartesian(per_entry: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = vec![Vec::new()];
    for choices in per_entry {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for prefix in &out {
            for &c in choices {
                let mut v = prefix.clone();
                v.push(c);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

struct BudgetGauge<'a> {
    visited: &'a AtomicU64,
    budget: u64,
    abort: &'a AtomicBool,
    local: u64,
}

const FLUSH_INTERVAL: u64 = 1024;

impl BudgetGauge<'_> {
    /// Returns false once the shared budget is gone.
    fn tick(&mut self) -> bool {
        self.local += 1;
        if self.local >= FLUSH_INTERVAL {
            self.flush();
        }
        !self.abort.load(Ordering::Relaxed)
    }

    fn flush(&mut self) {
        if self.local > 0 {
            let total = self.visited.fetch_add(self.local, Ordering::Relaxed) + self.local;
            self.local = 0;
            if total > self.budget {
                self.abort.store(true, Ordering::Relaxed);
            }
        }
    }
}

struct SlotSearch<'a> {
    ctx: &'a DecompositionContext,
    tensor: Vec<u64>,
    checked: Vec<bool>,
    journal: Vec<usize>,
    valid_count: u64,
    emitted: Vec<FiniteRing>,
}

enum SearchEnd {
    BudgetExhausted,
}

impl SlotSearch<'_> {
    /// All triples (a,b,l) not yet verified that became fully determined
    /// once slots 0..assigned were set: both factor slots present, and
    /// every nonzero support coordinate points at an assigned slot. Each
    /// newly verified triple is journaled for rollback; a failed triple
    /// prunes this branch.
    fn verify_new_triples(&mut self, assigned: usize) -> bool {
        let k = self.ctx.k;
        for triple in 0..k * k * k {
            if self.checked[triple] {
                continue;
            }
            let a = triple / (k * k);
            let b = (triple / k) % k;
            let l = triple % k;
            if !self.triple_ready(a, b, l, assigned) {
                continue;
            }
            if !self.triple_holds(a, b, l) {
                return false;
            }
            self.checked[triple] = true;
            self.journal.push(triple);
        }
        true
    }

    fn triple_ready(&self, a: usize, b: usize, l: usize, assigned: usize) -> bool {
        let k = self.ctx.k;
        let s_ab = a * k + b;
        let s_bl = b * k + l;
        if s_ab >= assigned || s_bl >= assigned {
            return false;
        }
        for t in 0..k {
            if self.tensor[s_ab * k + t] != 0 && t * k + l >= assigned {
                return false;
            }
            if self.tensor[s_bl * k + t] != 0 && a * k + t >= assigned {
                return false;
            }
        }
        true
    }

    /// (e_a e_b) e_l = e_a (e_b e_l), coordinatewise mod the moduli.
    fn triple_holds(&self, a: usize, b: usize, l: usize) -> bool {
        let k = self.ctx.k;
        for s in 0..k {
            let mut lhs = 0u64;
            let mut rhs = 0u64;
            for t in 0..k {
                lhs += self.tensor[(a * k + b) * k + t] * self.tensor[(t * k + l) * k + s];
                rhs += self.tensor[(b * k + l) * k + t] * self.tensor[(a * k + t) * k + s];
            }
            if lhs % self.ctx.moduli[s] != rhs % self.ctx.moduli[s] {
                return false;
            }
        }
        true
    }

    fn dfs(&mut self, slot: usize, gauge: &mut BudgetGauge<'_>) -> Result<(), SearchEnd> {
        let k = self.ctx.k;
        for candidate_index in 0..self.ctx.slot_candidates[slot].len() {
            if !gauge.tick() {
                return Err(SearchEnd::BudgetExhausted);
            }
            {
                let candidate = &self.ctx.slot_candidates[slot][candidate_index];
                self.tensor[slot * k..slot * k + k].copy_from_slice(candidate);
            }
            let mark = self.journal.len();
            if self.verify_new_triples(slot + 1) {
                if slot + 1 == k * k {
                    self.emit();
                } else {
                    let deeper = self.dfs(slot + 1, gauge);
                    if deeper.is_err() {
                        self.rollback(mark);
                        return deeper;
                    }
                }
            }
            self.rollback(mark);
        }
        Ok(())
    }

    fn rollback(&mut self, mark: usize) {
        while self.journal.len() > mark {
            let triple = self.journal.pop().expect("journal is non-empty above the mark");
            self.checked[triple] = false;
        }
    }

    fn emit(&mut self) {
        self.valid_count += 1;
        let ring = FiniteRing::from_flat(self.ctx.moduli.clone(), self.tensor.clone())
            .expect("slot candidates stay within their moduli");
        debug_assert!(ring.validate().is_valid(), "every triple was verified on the way down");
        if self.ctx.dedupe && !is_canonical(&ring, &self.tensor, &self.ctx.automorphisms) {
            return;
        }
        self.emitted.push(ring);
    }
}

/// Tensors in ascending lex order; the tree is split into one task per
/// first-slot candidate and task results are concatenated in candidate
/// order, so the emission order is identical for every thread count.
fn enumerate_decomposition(
    moduli: &[u64],
    dedupe: bool,
    visited: &AtomicU64,
    budget: u64,
    abort: &AtomicBool,
) -> Option<(u64, Vec<FiniteRing>)> {
    let ctx = DecompositionContext::new(moduli, dedupe);
    let k = ctx.k;
    let tasks: Vec<usize> = (0..ctx.slot_candidates[0].len()).collect();
    let results: Vec<Result<(u64, Vec<FiniteRing>), SearchEnd>> = tasks
        .par_iter()
        .map(|&candidate_index| {
            let mut gauge = BudgetGauge { visited, budget, abort, local: 0 };
            let mut search = SlotSearch {
                ctx: &ctx,
                tensor: vec![0; k * k * k],
                checked: vec![false; k * k * k],
                journal: Vec::new(),
                valid_count: 0,
                emitted: Vec::new(),
            };
            let outcome = (|| {
                if !gauge.tick() {
                    return Err(SearchEnd::BudgetExhausted);
                }
                let candidate = &ctx.slot_candidates[0][candidate_index];
                search.tensor[..k].copy_from_slice(candidate);
                if search.verify_new_triples(1) {
                    if k * k == 1 {
                        search.emit();
                    } else {
                        search.dfs(1, &mut gauge)?;
                    }
                }
                Ok(())
            })();
            gauge.flush();
            outcome.map(|()| (search.valid_count, search.emitted))
        })
        .collect();
    let mut total_valid = 0;
    let mut rings = Vec::new();
    for result in results {
        match result {
            Ok((count, emitted)) => {
                total_valid += count;
                rings.extend(emitted);
            }
            Err(SearchEnd::BudgetExhausted) => return None,
        }
    }
    // The last flush may trip the budget after every task has already
    // returned Ok; the skip decision must depend only on the total node
    // count, not on which task noticed first.
    if abort.load(Ordering::Relaxed) {
        return None;
    }
    Some((total_valid, rings))
}

/// Every valid structure-constant tensor over every additive
/// decomposition of `order`, in decomposition order then ascending lex
/// tensor order. With dedupe, only orbit-minimal tensors are emitted. A
/// decomposition that exhausts the shared node budget is skipped whole
/// and recorded, leaving the cheaper decompositions as the fallback
/// corpus.
pub fn enumerate_rings(order: u64, options: &CensusOptions) -> Result<CensusOutcome, CensusError> {
    let decompositions = additive_decompositions(order)?;
    let visited = AtomicU64::new(0);
    let abort = AtomicBool::new(false);
    let mut outcome = CensusOutcome {
        rings: Vec::new(),
        decompositions: Vec::new(),
        skipped: Vec::new(),
        total_valid: 0,
        nodes_visited: 0,
    };
    for moduli in decompositions {
        abort.store(false, Ordering::Relaxed);
        match enumerate_decomposition(&moduli, options.dedupe, &visited, options.node_budget, &abort)
        {
            Some((valid, rings)) => {
                outcome.total_valid += valid;
                outcome
                    .rings
                    .extend(rings.into_iter().enumerate().map(|(index, ring)| EnumeratedRing {
                        decomposition: moduli.clone(),
                        index: index as u64,
                        ring,
                    }));
                outcome.decompositions.push(moduli);
            }
            None => outcome.skipped.push(moduli),
        }
    }
    outcome.nodes_visited = visited.load(Ordering::Relaxed);
    Ok(outcome)
}

// ---------------------------------------------------------------------
// corpus reports

fn build_report(
    order: u64,
    outcome: &CensusOutcome,
    options: &CensusOptions,
    flagger: Option<&(dyn Fn(&FiniteRing, &Rational) -> bool + Sync)>,
) -> CensusReport {
    let mut histogram: BTreeMap<Rational, u64> = BTreeMap::new();
    let mut violations = Vec::new();
    for entry in &outcome.rings {
        let probability = entry.ring.commuting_probability_fast();
        *histogram.entry(probability.clone()).or_insert(0) += 1;
        if let Some(flag) = flagger {
            if flag(&entry.ring, &probability) {
                violations.push(ConjectureViolation {
                    decomposition: entry.decomposition.clone(),
                    index: entry.index,
                    probability,
                });
            }
        }
    }
    CensusReport {
        order,
        decompositions: outcome.decompositions.clone(),
        skipped_decompositions: outcome.skipped.clone(),
        total_valid: outcome.total_valid,
        emitted: outcome.rings.len() as u64,
        isomorphism_classes: options.dedupe.then_some(outcome.rings.len() as u64),
        nodes_visited: outcome.nodes_visited,
        histogram: histogram
            .into_iter()
            .map(|(probability, count)| HistogramEntry { probability, count })
            .collect(),
        violations,
    }
}

pub(crate) fn census_with_flagger(
    order: u64,
    options: &CensusOptions,
    flagger: &(dyn Fn(&FiniteRing, &Rational) -> bool + Sync),
) -> Result<CensusReport, CensusError> {
    let outcome = enumerate_rings(order, options)?;
    Ok(build_report(order, &outcome, options, Some(flagger)))
}

/// Histogram of commuting probabilities across the census at one order.
pub fn collect_probabilities(
    order: u64,
    options: &CensusOptions,
) -> Result<CensusReport, CensusError> {
    let outcome = enumerate_rings(order, options)?;
    Ok(build_report(order, &outcome, options, None))
}

/// A violation is a noncommutative ring whose commuting probability has a
/// square-free lowest-terms denominator — which also covers any value
/// 1/n with n > 1 square-free. The corpus is expected to produce none.
pub fn verify_conjecture_on_corpus(
    order: u64,
    options: &CensusOptions,
) -> Result<CensusReport, CensusError> {
    census_with_flagger(order, options, &default_flagger)
}

fn default_flagger(ring: &FiniteRing, probability: &Rational) -> bool {
    !ring.is_commutative()
        && is_square_free(probability.denominator()).expect("denominator divides the order squared")
}
