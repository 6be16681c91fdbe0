//! Ring-to-group lift.
//!
//! Any finite ring R embeds its commuting behaviour into a group in two
//! steps: the double null extension S = R (+) R with (a,x)(b,y) = (0,ab)
//! kills all triple products, and the circle operation a o b = a + b + ab
//! then turns S into a group of order |R|^2 whose commuting probability
//! equals the ring's. Both steps are validated rather than trusted: the
//! extension is revalidated as a ring, the nilpotency index is computed
//! from scratch, and the circle table goes through full group validation.

use crate::exact::factor::factorize;
use crate::exact::rational::Rational;
use crate::group::{FiniteGroup, GroupError, NilpotencyClass, DEFAULT_ASSOC_CAP};
use crate::ring::{FiniteRing, RingElement, RingError};
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Lifted groups materialize a full |R|^2 Cayley table; 32 keeps that at
/// the group-validation cap of 1024.
pub const DEFAULT_LIFT_CAP: u64 = 32;

#[derive(Debug, Error)]
pub enum LiftError {
    #[error("ring of order {order} exceeds the lift cap {cap}")]
    RingTooLarge { order: u64, cap: u64 },
    #[error("ring is not nilpotent: power {power} stalls at span size {span_size}")]
    NotNilpotent { power: u32, span_size: u64 },
    #[error("nilpotency index {index} exceeds 3; the quasi-inverse -a + a^2 does not close")]
    IndexTooLarge { index: u32 },
    #[error("quasi-inverse failed for element {element}; input is not nilpotent of index <= 3")]
    QuasiInverse { element: usize },
    #[error("ring has too many elements to materialize a Cayley table")]
    TableTooLarge,
    #[error("circle table failed group validation: {0}")]
    InvalidCircleTable(#[from] GroupError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A ring together with its computed nilpotency index: the smallest N
/// such that every product of N elements vanishes. Only constructible
/// through [`NilpotentRingWitness::certify`], so holding one is proof.
#[derive(Clone, Debug)]
pub struct NilpotentRingWitness {
    ring: FiniteRing,
    nilpotency_index: u32,
}

impl NilpotentRingWitness {
    /// Computes the chain of power spans S^2 ⊇ S^3 ⊇ ... until it hits
    /// zero (nilpotent) or stalls (not nilpotent).
    pub fn certify(ring: FiniteRing) -> Result<Self, LiftError> {
        let k = ring.dimension();
        // span(S^1) is the whole ring; moduli >= 2 keeps it nonzero.
        let mut prev_size = ring.order();
        let mut generators: Vec<RingElement> = (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| ring.multiply(&ring.basis_element(i), &ring.basis_element(j)))
            .collect();
        let mut power = 2u32;
        loop {
            let span = additive_span(&ring, &generators);
            if span.len() == 1 {
                return Ok(NilpotentRingWitness { ring, nilpotency_index: power });
            }
            if span.len() as u64 >= prev_size {
                return Err(LiftError::NotNilpotent { power, span_size: span.len() as u64 });
            }
            prev_size = span.len() as u64;
            generators = generators
                .iter()
                .flat_map(|p| (0..k).map(|j| ring.multiply(p, &ring.basis_element(j))))
                .collect();
            power += 1;
        }
    }

    pub fn ring(&self) -> &FiniteRing {
        &self.ring
    }

    pub fn nilpotency_index(&self) -> u32 {
        self.nilpotency_index
    }
}

/// Additive subgroup generated by a set of elements, as element indices
/// (always contains index 0).
fn additive_span(ring: &FiniteRing, generators: &[RingElement]) -> Vec<u64> {
    let mut seen = vec![false; ring.order() as usize];
    seen[0] = true;
    let mut members = vec![0u64];
    let mut i = 0;
    while i < members.len() {
        let x = ring.element_at(members[i]);
        for g in generators {
            let y = ring.index_of(&ring.add(&x, g));
            if !seen[y as usize] {
                seen[y as usize] = true;
                members.push(y);
            }
        }
        i += 1;
    }
    members.sort_unstable();
    members
}

/// S = R (+) R with (a,x)(b,y) = (0,ab). Basis products of the left copy
/// land in the right copy; everything touching the right copy vanishes,
/// so all triple products are zero and the index is 2 or 3.
pub fn double_null_extension(r: &FiniteRing) -> Result<NilpotentRingWitness, LiftError> {
    let k = r.dimension();
    let kk = 2 * k;
    let moduli: Vec<u64> = r.moduli().iter().chain(r.moduli().iter()).copied().collect();
    let mut structure = vec![0u64; kk * kk * kk];
    for i in 0..k {
        for j in 0..k {
            for t in 0..k {
                structure[(i * kk + j) * kk + (k + t)] = r.structure_constant(i, j, t);
            }
        }
    }
    let ring = FiniteRing::from_flat(moduli, structure)?;
    ring.ensure_valid()?;
    let witness = NilpotentRingWitness::certify(ring)?;
    debug_assert!(witness.nilpotency_index <= 3);
    Ok(witness)
}

/// Group on the elements of a nilpotent ring of index <= 3 under
/// a o b = a + b + ab. Identity is the ring zero (already at index 0);
/// the inverse of a is -a + a^2, checked for every element before the
/// table goes through full group validation.
pub fn circle_group(witness: &NilpotentRingWitness) -> Result<FiniteGroup, LiftError> {
    if witness.nilpotency_index > 3 {
        return Err(LiftError::IndexTooLarge { index: witness.nilpotency_index });
    }
    let s = &witness.ring;
    let n = usize::try_from(s.order()).map_err(|_| LiftError::TableTooLarge)?;
    if n.checked_mul(n).is_none() {
        return Err(LiftError::TableTooLarge);
    }
    let elements: Vec<RingElement> = s.elements().collect();
    let table: Vec<Vec<usize>> = elements
        .par_iter()
        .map(|a| {
            elements
                .iter()
                .map(|b| {
                    let circ = s.add(&s.add(a, b), &s.multiply(a, b));
                    s.index_of(&circ) as usize
                })
                .collect()
        })
        .collect();
    for (idx, a) in elements.iter().enumerate() {
        let quasi = s.add(&s.neg(a), &s.multiply(a, a));
        let q = s.index_of(&quasi) as usize;
        if table[idx][q] != 0 || table[q][idx] != 0 {
            return Err(LiftError::QuasiInverse { element: idx });
        }
    }
    Ok(FiniteGroup::from_table_with_cap(table, n.max(DEFAULT_ASSOC_CAP))?)
}

pub fn lift_ring_to_group(r: &FiniteRing) -> Result<FiniteGroup, LiftError> {
    lift_ring_to_group_capped(r, DEFAULT_LIFT_CAP)
}

pub fn lift_ring_to_group_capped(r: &FiniteRing, cap: u64) -> Result<FiniteGroup, LiftError> {
    if r.order() > cap {
        return Err(LiftError::RingTooLarge { order: r.order(), cap });
    }
    circle_group(&double_null_extension(r)?)
}

/// Everything the lift promises, measured rather than assumed.
#[derive(Clone, Debug, Serialize)]
pub struct LiftVerification {
    pub ring_order: u64,
    pub group_order: usize,
    pub order_is_square: bool,
    pub ring_probability: Rational,
    pub group_probability: Rational,
    pub probability_preserved: bool,
    pub ring_commutative: bool,
    pub nilpotency_class: NilpotencyClass,
    pub class_as_expected: bool,
    /// Prime support of the reduced denominator of the group probability
    /// vs the prime support of |G|; only meaningful (Some) for
    /// noncommutative rings. Reported but not part of `all_ok`: a
    /// noncommutative ring with a commutative direct factor of coprime
    /// order lifts to a group whose corresponding Sylow subgroup is
    /// abelian, so that prime drops out of the denominator (e.g. the zero
    /// ring on Z3 ⊕ the noncommutative order-4 ring: P = 5/8, |G| = 144,
    /// support {2} vs {2, 3}). Equality does hold whenever the ring order
    /// is a prime power.
    pub denominator_support_matches_order: Option<bool>,
}

impl LiftVerification {
    /// The lift's own promises: squared order, preserved probability,
    /// nilpotency class 1 or 2 matching commutativity.
    pub fn all_ok(&self) -> bool {
        self.order_is_square && self.probability_preserved && self.class_as_expected
    }
}

pub fn verify_lift(r: &FiniteRing, group: &FiniteGroup) -> LiftVerification {
    let ring_probability = r.commuting_probability_fast();
    let group_probability = group.commuting_probability();
    let ring_commutative = r.is_commutative();
    let nilpotency_class = group.nilpotency_class();
    let expected = if ring_commutative {
        NilpotencyClass::Nilpotent(1)
    } else {
        NilpotencyClass::Nilpotent(2)
    };
    let denominator_support_matches_order = if ring_commutative {
        None
    } else {
        let den_primes: Vec<u64> = factorize(group_probability.denominator())
            .expect("denominator of a probability on a small group fits")
            .primes()
            .collect();
        let order_primes: Vec<u64> = factorize(&num_bigint::BigInt::from(group.order()))
            .expect("group order fits")
            .primes()
            .collect();
        Some(den_primes == order_primes)
    };
    LiftVerification {
        ring_order: r.order(),
        group_order: group.order(),
        order_is_square: group.order() as u64 == r.order() * r.order(),
        probability_preserved: ring_probability == group_probability,
        ring_probability,
        group_probability,
        ring_commutative,
        nilpotency_class,
        class_as_expected: nilpotency_class == expected,
        denominator_support_matches_order,
    }
}

/// In the circle group, a o b = b o a collapses to ab = ba, so the lift
/// preserves commuting probability; exposed for tests as the one-line
/// reason the pipeline works.
pub fn circle_commutes_iff_ring_commutes(s: &FiniteRing, a: &RingElement, b: &RingElement) -> bool {
    let ab = s.multiply(a, b);
    let ba = s.multiply(b, a);
    let circle_ab = s.add(&s.add(a, b), &ab);
    let circle_ba = s.add(&s.add(b, a), &ba);
    (circle_ab == circle_ba) == (ab == ba)
}

/// Convenience for property checks: the reduced denominator of a
/// probability is supported on the given integer's primes.
pub fn denominator_support_within(value: &Rational, order: u64) -> bool {
    if value.denominator().is_one() {
        return true;
    }
    let den = factorize(value.denominator()).expect("small denominator");
    let ord = factorize(&num_bigint::BigInt::from(order)).expect("small order");
    let ord_primes: Vec<u64> = ord.primes().collect();
    let ok = den.primes().all(|p| ord_primes.contains(&p));
    ok
}
