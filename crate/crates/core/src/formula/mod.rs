//! The p-part fractions (p^(e-f) + p^g - 1) / p^(e-f+g), their products
//! over distinct primes, and bounded exhaustive searches over them.
//!
//! A class-two p-group with |G| = p^e, |Z| = p^f, |G'| = p^g commutes with
//! probability given by the p-part fraction; products over distinct primes
//! cover nilpotent groups via their Sylow decomposition. The searches
//! sweep every such product inside explicit bounds looking for square-free
//! denominators or exact reciprocals — both expected to come up empty —
//! and the sweep pins down why: the numerator sits at -1 mod p, so nothing
//! ever cancels the prime out of the denominator.

use crate::exact::factor::{factorize, is_prime_u64, is_square_free, Factorization};
use crate::exact::rational::Rational;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A nonabelian p-group has non-cyclic G/Z, hence |G:Z| >= p^2. The
/// relaxed setting (gap 1) drops that and keeps only f < e.
pub const DEFAULT_MIN_GAP: u32 = 2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("{value} is not prime")]
    NotPrime { value: u64 },
    #[error("derived exponent g={g} must satisfy 0 < g <= f (f={f})")]
    DerivedOutOfRange { g: u32, f: u32 },
    #[error("center exponent f={f} must be below the order exponent e={e}")]
    CenterNotProper { f: u32, e: u32 },
    #[error("center index gap e-f={gap} is below the required minimum {min}")]
    GapTooSmall { gap: u32, min: u32 },
    #[error("prime {prime} appears more than once in the factor list")]
    DuplicatePrime { prime: u64 },
    #[error("epsilon must be positive")]
    EpsilonNotPositive,
    #[error("search bounds admit no shapes: max exponent {max_exponent} needs gap+1 = {needed}")]
    EmptyBounds { max_exponent: u32, needed: u32 },
}

/// Extra inequality applied on top of 0 < g <= f < e.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeConstraints {
    pub min_center_index_gap: u32,
}

impl Default for ShapeConstraints {
    fn default() -> Self {
        ShapeConstraints { min_center_index_gap: DEFAULT_MIN_GAP }
    }
}

impl ShapeConstraints {
    pub fn relaxed() -> Self {
        ShapeConstraints { min_center_index_gap: 1 }
    }
}

/// |G| = p^e, |Z(G)| = p^f, |G'| = p^g of a class-two p-group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PPartShape {
    pub p: u64,
    pub e: u32,
    pub f: u32,
    pub g: u32,
}

impl PPartShape {
    pub fn validate(&self, constraints: &ShapeConstraints) -> Result<(), FormulaError> {
        if !is_prime_u64(self.p) {
            return Err(FormulaError::NotPrime { value: self.p });
        }
        if self.g == 0 || self.g > self.f {
            return Err(FormulaError::DerivedOutOfRange { g: self.g, f: self.f });
        }
        if self.f >= self.e {
            return Err(FormulaError::CenterNotProper { f: self.f, e: self.e });
        }
        let gap = self.e - self.f;
        if gap < constraints.min_center_index_gap {
            return Err(FormulaError::GapTooSmall { gap, min: constraints.min_center_index_gap });
        }
        Ok(())
    }
}

/// Stem restriction Z(G) = G' collapses g to f.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StemShape {
    pub p: u64,
    pub e: u32,
    pub f: u32,
}

impl StemShape {
    pub fn as_p_part(&self) -> PPartShape {
        PPartShape { p: self.p, e: self.e, f: self.f, g: self.f }
    }

    pub fn validate(&self, constraints: &ShapeConstraints) -> Result<(), FormulaError> {
        self.as_p_part().validate(constraints)
    }
}

/// (p^(e-f) + p^g - 1) / p^(e-f+g), exactly, with the denominator already
/// in lowest terms because the numerator is -1 mod p.
pub fn p_part_value(
    shape: &PPartShape,
    constraints: &ShapeConstraints,
) -> Result<Rational, FormulaError> {
    shape.validate(constraints)?;
    let p = BigInt::from(shape.p);
    let gap = shape.e - shape.f;
    let num = p.pow(gap) + p.pow(shape.g) - 1;
    let den = p.pow(gap + shape.g);
    let value = Rational::reduce(num, den.clone()).expect("positive denominator");
    debug_assert_eq!(value.denominator(), &den, "numerator is -1 mod p, nothing cancels");
    Ok(value)
}

/// (p^(e-f) + p^f - 1) / p^e: the p-part with g = f.
pub fn stem_p_part_value(
    shape: &StemShape,
    constraints: &ShapeConstraints,
) -> Result<Rational, FormulaError> {
    p_part_value(&shape.as_p_part(), constraints)
}

/// Product over factors with pairwise distinct primes; empty product is 1.
pub fn product_value(
    shapes: &[StemShape],
    constraints: &ShapeConstraints,
) -> Result<Rational, FormulaError> {
    let mut seen: Vec<u64> = Vec::new();
    let mut acc = Rational::one();
    for shape in shapes {
        if seen.contains(&shape.p) {
            return Err(FormulaError::DuplicatePrime { prime: shape.p });
        }
        seen.push(shape.p);
        acc = acc * stem_p_part_value(shape, constraints)?;
    }
    Ok(acc)
}

/// Factorization of the reduced denominator of a probability value.
pub fn denominator_prime_support(value: &Rational) -> Factorization {
    factorize(value.denominator()).expect("probability denominators stay small")
}

// ---------------------------------------------------------------------
// mod-p sweep

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SweepHit {
    pub prime: u64,
    pub a: u32,
    pub b: u32,
    pub residue: u64,
}

/// Residues of p^a + p^b - 1 mod p over a grid. `hits` collects residue-0
/// cases (there are none: the residue is identically p - 1, and
/// `residues_p_minus_1` counts the confirmations).
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub primes: Vec<u64>,
    pub max_exponent: u32,
    pub examined: u64,
    pub residues_p_minus_1: u64,
    pub hits: Vec<SweepHit>,
}

pub fn numerator_mod_p_sweep(
    primes: &[u64],
    max_exponent: u32,
) -> Result<SweepReport, FormulaError> {
    let primes = validated_primes(primes)?;
    let mut examined = 0;
    let mut residues_p_minus_1 = 0;
    let mut hits = Vec::new();
    for &p in &primes {
        let big = BigInt::from(p);
        for a in 1..=max_exponent {
            for b in 1..=max_exponent {
                let value = big.pow(a) + big.pow(b) - BigInt::one();
                let residue = (value % &big).to_u64().expect("residue below a u64 prime");
                examined += 1;
                if residue == 0 {
                    hits.push(SweepHit { prime: p, a, b, residue });
                } else if residue == p - 1 {
                    residues_p_minus_1 += 1;
                }
            }
        }
    }
    Ok(SweepReport {
        primes,
        max_exponent,
        examined,
        residues_p_minus_1,
        hits,
    })
}

// ---------------------------------------------------------------------
// bounded exhaustive search

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub primes: Vec<u64>,
    pub max_factors: usize,
    pub max_exponent: u32,
    pub constraints: ShapeConstraints,
}

impl SearchBounds {
    pub fn new(primes: &[u64], max_factors: usize, max_exponent: u32) -> Self {
        SearchBounds {
            primes: primes.to_vec(),
            max_factors,
            max_exponent,
            constraints: ShapeConstraints::default(),
        }
    }

    /// The grid the headline verification runs on.
    pub fn default_grid() -> Self {
        Self::new(&[2, 3, 5, 7, 11, 13], 3, 12)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchHit {
    pub shapes: Vec<StemShape>,
    pub value: Rational,
    pub denominator: Factorization,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub bounds: SearchBounds,
    pub examined: u64,
    pub hits: Vec<SearchHit>,
    pub elapsed_ms: u64,
}

fn validated_primes(primes: &[u64]) -> Result<Vec<u64>, FormulaError> {
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(FormulaError::DuplicatePrime { prime: pair[0] });
        }
    }
    for &p in &sorted {
        if !is_prime_u64(p) {
            return Err(FormulaError::NotPrime { value: p });
        }
    }
    Ok(sorted)
}

/// Shapes for one prime in (e, f) lexicographic order, values memoized.
fn shapes_for_prime(
    p: u64,
    bounds: &SearchBounds,
) -> Result<Vec<(StemShape, Rational)>, FormulaError> {
    let gap = bounds.constraints.min_center_index_gap;
    let mut out = Vec::new();
    for e in (gap + 1)..=bounds.max_exponent {
        for f in 1..=(e - gap) {
            let shape = StemShape { p, e, f };
            let value = stem_p_part_value(&shape, &bounds.constraints)?;
            out.push((shape, value));
        }
    }
    Ok(out)
}

/// Walks every product with primes strictly increasing along the factor
/// list, examining each nonempty prefix exactly once.
fn explore<P: Fn(&Rational) -> bool>(
    per_prime: &[Vec<(StemShape, Rational)>],
    max_factors: usize,
    predicate: &P,
    next_prime: usize,
    current: &mut Vec<StemShape>,
    value: &Rational,
    examined: &mut u64,
    hits: &mut Vec<SearchHit>,
) {
    *examined += 1;
    if predicate(value) {
        hits.push(SearchHit {
            shapes: current.clone(),
            value: value.clone(),
            denominator: denominator_prime_support(value),
        });
    }
    if current.len() >= max_factors {
        return;
    }
    for pi in next_prime..per_prime.len() {
        for (shape, shape_value) in &per_prime[pi] {
            current.push(*shape);
            let product = value.clone() * shape_value.clone();
            explore(per_prime, max_factors, predicate, pi + 1, current, &product, examined, hits);
            current.pop();
        }
    }
}

/// Engine shared by the two public searches (and by the weakened-predicate
/// self-tests). Work is split by the first factor's shape; tasks are pure
/// and merged in task order, so the report is identical for any thread
/// count.
fn search_with_predicate<P: Fn(&Rational) -> bool + Sync>(
    bounds: &SearchBounds,
    predicate: P,
) -> Result<SearchReport, FormulaError> {
    let start = std::time::Instant::now();
    let primes = validated_primes(&bounds.primes)?;
    if bounds.max_exponent < bounds.constraints.min_center_index_gap + 1 {
        return Err(FormulaError::EmptyBounds {
            max_exponent: bounds.max_exponent,
            needed: bounds.constraints.min_center_index_gap + 1,
        });
    }
    let normalized = SearchBounds { primes: primes.clone(), ..bounds.clone() };
    let per_prime: Vec<Vec<(StemShape, Rational)>> = primes
        .iter()
        .map(|&p| shapes_for_prime(p, &normalized))
        .collect::<Result<_, _>>()?;
    let tasks: Vec<(usize, usize)> = (0..per_prime.len())
        .flat_map(|pi| (0..per_prime[pi].len()).map(move |si| (pi, si)))
        .collect();
    let results: Vec<(u64, Vec<SearchHit>)> = tasks
        .par_iter()
        .map(|&(pi, si)| {
            let (shape, value) = &per_prime[pi][si];
            let mut examined = 0;
            let mut hits = Vec::new();
            let mut current = vec![*shape];
            explore(
                &per_prime,
                normalized.max_factors.max(1),
                &predicate,
                pi + 1,
                &mut current,
                value,
                &mut examined,
                &mut hits,
            );
            (examined, hits)
        })
        .collect();
    let mut examined = 0;
    let mut hits = Vec::new();
    for (count, task_hits) in results {
        examined += count;
        hits.extend(task_hits);
    }
    hits.sort_by(|a, b| a.shapes.cmp(&b.shapes));
    Ok(SearchReport {
        bounds: normalized,
        examined,
        hits,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// True when the denominator is square-free (and > 1). Strips the grid
/// primes first — products built here have grid-smooth denominators — and
/// falls back to general factorization if anything is left over.
fn square_free_denominator(value: &Rational, grid: &[u64]) -> bool {
    let den = value.denominator();
    if den.is_one() {
        return false;
    }
    let mut rem = den.clone();
    for &p in grid {
        let p = BigInt::from(p);
        let mut exp = 0;
        while (&rem % &p).is_zero() {
            rem /= &p;
            exp += 1;
            if exp >= 2 {
                return false;
            }
        }
    }
    if rem.is_one() {
        true
    } else {
        is_square_free(&rem).expect("leftover cofactor stays within factorization range")
    }
}

/// Hits are products whose lowest-terms denominator is square-free.
pub fn search_square_free(bounds: &SearchBounds) -> Result<SearchReport, FormulaError> {
    let grid = validated_primes(&bounds.primes)?;
    search_with_predicate(bounds, move |v| square_free_denominator(v, &grid))
}

/// Hits are products exactly equal to 1/n for an integer n > 1.
pub fn search_reciprocals(bounds: &SearchBounds) -> Result<SearchReport, FormulaError> {
    search_with_predicate(bounds, |v| v.is_unit_fraction() && !v.is_one())
}

#[cfg(test)]
pub(crate) fn search_with_test_predicate<P: Fn(&Rational) -> bool + Sync>(
    bounds: &SearchBounds,
    predicate: P,
) -> Result<SearchReport, FormulaError> {
    search_with_predicate(bounds, predicate)
}

// ---------------------------------------------------------------------
// accumulation witnesses

/// A concrete shape whose value sits within epsilon of 1/p^g.
#[derive(Clone, Debug, Serialize)]
pub struct AccumulationWitness {
    pub shape: StemShape,
    pub value: Rational,
    pub target: Rational,
    pub distance: Rational,
    pub epsilon: Rational,
    pub within: bool,
}

/// Picks the smallest legal gap d = e - f with p^d >= 1/epsilon; then the
/// distance (p^g - 1)/p^(d+g) is below 1/p^d <= epsilon.
pub fn accumulation_witness(
    p: u64,
    g: u32,
    epsilon: &Rational,
    constraints: &ShapeConstraints,
) -> Result<AccumulationWitness, FormulaError> {
    if !is_prime_u64(p) {
        return Err(FormulaError::NotPrime { value: p });
    }
    if g == 0 {
        return Err(FormulaError::DerivedOutOfRange { g, f: g });
    }
    if !epsilon.is_positive() {
        return Err(FormulaError::EpsilonNotPositive);
    }
    let big = BigInt::from(p);
    let mut d = constraints.min_center_index_gap.max(1);
    while (Rational::from_integer(big.pow(d)) * epsilon.clone()) < Rational::one() {
        d += 1;
    }
    let shape = StemShape { p, e: g + d, f: g };
    let value = stem_p_part_value(&shape, constraints)?;
    let target = Rational::reduce(1, big.pow(g)).expect("positive denominator");
    let distance = (value.clone() - target.clone()).abs();
    let within = distance < *epsilon;
    Ok(AccumulationWitness { shape, value, target, distance, epsilon: epsilon.clone(), within })
}
