//! Randomized cross-checks of the library's structural promises. Rings
//! are generated as direct sums of known-valid building blocks (with an
//! optional flip to the opposite ring), which keeps every sample inside
//! the valid-ring space while still covering commutative, noncommutative,
//! unital, and nilpotent behavior.

use commprob::exact::rational::Rational;
use commprob::formula::{p_part_value, stem_p_part_value, PPartShape, ShapeConstraints, StemShape};
use commprob::group::{catalog, FiniteGroup};
use commprob::lift::{lift_ring_to_group, verify_lift};
use commprob::ring::{samples, FiniteRing};
use num_bigint::BigInt;
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Leaf {
    Zero(u64),
    ScaledCyclic(u64, u64),
    LeftMultiplier(u64),
    UpperTriangular,
}

impl Leaf {
    fn order(&self) -> u64 {
        match self {
            Leaf::Zero(m) => *m,
            Leaf::ScaledCyclic(n, _) => *n,
            Leaf::LeftMultiplier(d) => d * d,
            Leaf::UpperTriangular => 8,
        }
    }

    fn build(&self) -> FiniteRing {
        match self {
            Leaf::Zero(m) => samples::zero_ring(&[*m]).expect("modulus ≥ 2"),
            Leaf::ScaledCyclic(n, s) => samples::scaled_cyclic_ring(*n, *s).expect("modulus ≥ 2"),
            Leaf::LeftMultiplier(d) => samples::left_multiplier_ring(*d).expect("modulus ≥ 2"),
            Leaf::UpperTriangular => samples::strictly_upper_triangular_ring(2).expect("valid"),
        }
    }
}

fn leaf() -> impl Strategy<Value = Leaf> {
    prop_oneof![
        (2u64..=9).prop_map(Leaf::Zero),
        (2u64..=9).prop_flat_map(|n| (Just(n), 0..n)).prop_map(|(n, s)| Leaf::ScaledCyclic(n, s)),
        (2u64..=3).prop_map(Leaf::LeftMultiplier),
        Just(Leaf::UpperTriangular),
    ]
}

/// Direct sum of 1–3 leaves, order capped so the brute pair scan stays
/// comfortable; `flip` swaps in the opposite ring.
fn ring_plan(max_order: u64) -> impl Strategy<Value = (Vec<Leaf>, bool)> {
    (prop::collection::vec(leaf(), 1..=3), any::<bool>())
        .prop_filter("order within brute range", move |(leaves, _)| {
            leaves.iter().map(Leaf::order).product::<u64>() <= max_order
        })
}

fn is_prime_power(mut n: u64) -> bool {
    let p = (2..=n).find(|d| n % d == 0).expect("n ≥ 2");
    while n % p == 0 {
        n /= p;
    }
    n == 1
}

fn build_ring(leaves: &[Leaf], flip: bool) -> FiniteRing {
    let mut ring = leaves[0].build();
    for leaf in &leaves[1..] {
        ring = ring.direct_sum(&leaf.build()).expect("orders already capped");
    }
    if flip {
        ring = ring.opposite();
    }
    ring
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_rings_are_valid_and_dual_routes_agree((leaves, flip) in ring_plan(64)) {
        let ring = build_ring(&leaves, flip);
        prop_assert!(ring.ensure_valid().is_ok());
        let brute = ring.commuting_probability_bruteforce().expect("order ≤ 64");
        prop_assert_eq!(brute, ring.commuting_probability_fast());
    }

    #[test]
    fn opposite_ring_has_the_same_probability((leaves, flip) in ring_plan(64)) {
        let ring = build_ring(&leaves, flip);
        prop_assert_eq!(
            ring.commuting_probability_fast(),
            ring.opposite().commuting_probability_fast()
        );
    }

    #[test]
    fn element_indexing_round_trips((leaves, flip) in ring_plan(64), raw in any::<u64>()) {
        let ring = build_ring(&leaves, flip);
        let idx = raw % ring.order();
        prop_assert_eq!(ring.index_of(&ring.element_at(idx)), idx);
    }

    #[test]
    fn multiplication_distributes(
        (leaves, flip) in ring_plan(64),
        picks in prop::array::uniform3(any::<u64>()),
    ) {
        let ring = build_ring(&leaves, flip);
        let [xi, yi, zi] = picks.map(|p| p % ring.order());
        let (x, y, z) = (ring.element_at(xi), ring.element_at(yi), ring.element_at(zi));
        let lhs = ring.multiply(&x, &ring.add(&y, &z));
        let rhs = ring.add(&ring.multiply(&x, &y), &ring.multiply(&x, &z));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lifts_preserve_what_they_promise((leaves, flip) in ring_plan(16)) {
        let ring = build_ring(&leaves, flip);
        let group = lift_ring_to_group(&ring).expect("order ≤ 16 is under the cap");
        let verification = verify_lift(&ring, &group);
        prop_assert!(verification.all_ok());
        // The support comparison is only a theorem for prime-power orders;
        // a commutative factor of coprime order legitimately breaks it.
        if ring.is_commutative() {
            prop_assert_eq!(verification.denominator_support_matches_order, None);
        } else if is_prime_power(ring.order()) {
            prop_assert_eq!(verification.denominator_support_matches_order, Some(true));
        }
    }

    #[test]
    fn class_counting_matches_pair_scan_on_groups(
        pick in 0usize..4,
        n in 2usize..=8,
        pad in 1usize..=3,
    ) {
        let base = match pick {
            0 => catalog::cyclic(n),
            1 => catalog::dihedral(n),
            2 => catalog::quaternion8(),
            _ => catalog::symmetric3(),
        };
        let group = if pad > 1 { base.direct_product(&catalog::cyclic(pad)) } else { base };
        prop_assert_eq!(pair_scan_probability(&group), group.commuting_probability());
    }

    #[test]
    fn p_part_values_reduce_to_the_full_prime_power(
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
        g in 1u32..=3,
        extra in 0u32..=2,
        gap in 2u32..=4,
    ) {
        let f = g + extra;
        let e = f + gap;
        let shape = PPartShape { p, e, f, g };
        let value = p_part_value(&shape, &ShapeConstraints::default()).expect("shape in range");
        // numerator ≡ −1 mod p, so nothing cancels: the reduced
        // denominator is the whole p^(e−f+g)
        prop_assert_eq!(value.denominator(), &BigInt::from(p).pow(e - f + g));
        prop_assert!(value.is_positive());
        prop_assert!(!value.is_one());
    }

    #[test]
    fn stem_values_are_the_g_equals_f_diagonal(
        p in prop::sample::select(vec![2u64, 3, 5]),
        f in 1u32..=3,
        gap in 2u32..=4,
    ) {
        let e = f + gap;
        let constraints = ShapeConstraints::default();
        let stem = stem_p_part_value(&StemShape { p, e, f }, &constraints).expect("valid");
        let general = p_part_value(&PPartShape { p, e, f, g: f }, &constraints).expect("valid");
        prop_assert_eq!(stem, general);
    }

    #[test]
    fn rational_display_round_trips(num in -10_000i64..10_000, den in 1i64..10_000) {
        let value = Rational::reduce(num, den).expect("den positive");
        let reparsed: Rational = value.to_string().parse().expect("display form parses");
        prop_assert_eq!(reparsed, value);
    }
}

fn pair_scan_probability(group: &FiniteGroup) -> Rational {
    let n = group.order();
    let commuting = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| group.op(a, b) == group.op(b, a))
        .count();
    Rational::ratio_of_counts(commuting as u128, (n * n) as u128).expect("n positive")
}
