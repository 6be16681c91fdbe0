//! Finite rings presented by structure constants.
//!
//! A ring here is an additive group Z_{d_1} x ... x Z_{d_k} together with a
//! bilinear multiplication given by a k*k*k tensor: the product of basis
//! generators is e_i * e_j = sum_t c[i][j][t] e_t. Rings need not be
//! commutative and need not have an identity.
//!
//! The commuting probability is computed two independent ways: a direct scan
//! over all ordered pairs, and a sum of centralizer sizes where each
//! centralizer is counted as a lattice index via Smith normal form. The two
//! must always agree; tests and the acceptance suite enforce it.

pub mod samples;

use crate::exact::rational::Rational;
use crate::exact::snf::snf_diagonal;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Pair scans cost |R|^2 products; beyond this order callers must opt in.
pub const DEFAULT_PAIR_SCAN_CAP: u64 = 4096;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("a ring needs at least one additive generator")]
    EmptyModuli,
    #[error("modulus {value} at position {index} must be at least 2")]
    ModulusTooSmall { index: usize, value: u64 },
    #[error("ring order overflows u64")]
    OrderOverflow,
    #[error("structure tensor must have {expected} rows, found {found}")]
    TensorRows { expected: usize, found: usize },
    #[error("structure tensor row {i} must have {expected} columns, found {found}")]
    TensorCols { i: usize, expected: usize, found: usize },
    #[error("structure entry ({i},{j}) must list {expected} coordinates, found {found}")]
    TensorDepth { i: usize, j: usize, expected: usize, found: usize },
    #[error("structure constant c[{i}][{j}][{t}] = {value} is out of range for modulus {modulus}")]
    EntryOutOfRange { i: usize, j: usize, t: usize, value: u64, modulus: u64 },
    #[error("element has {found} coordinates, ring has {expected} generators")]
    ElementLength { expected: usize, found: usize },
    #[error("coordinate {index} is {value}, must be below modulus {modulus}")]
    CoordOutOfRange { index: usize, value: u64, modulus: u64 },
    #[error("pair scan needs |R| <= {cap}, ring has order {order}")]
    PairScanCapExceeded { order: u64, cap: u64 },
    #[error("ring axioms violated: {0}")]
    FailedValidation(ValidationReport),
}

/// Which factor's additive order witnesses a well-definedness failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModulusSide {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum RingViolation {
    /// d_i * c[i][j][t] (or d_j * ...) is not divisible by d_t, so the
    /// bilinear extension is not well defined on residue classes.
    WellDefined { i: usize, j: usize, t: usize, side: ModulusSide },
    /// (e_i e_j) e_l differs from e_i (e_j e_l).
    Associativity { i: usize, j: usize, l: usize },
}

impl fmt::Display for RingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingViolation::WellDefined { i, j, t, side } => write!(
                f,
                "well-definedness fails at (i,j,t)=({i},{j},{t}) on the {} factor",
                match side {
                    ModulusSide::Left => "left",
                    ModulusSide::Right => "right",
                }
            ),
            RingViolation::Associativity { i, j, l } => {
                write!(f, "associativity fails at basis triple (i,j,l)=({i},{j},{l})")
            }
        }
    }
}

/// Every violated axiom instance; an empty report means a valid ring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Default)]
pub struct ValidationReport {
    pub violations: Vec<RingViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        write!(f, "{} violation(s), first: {}", self.violations.len(), self.violations[0])
    }
}

/// Ring element as reduced coordinates, one per additive generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    coords: Vec<u64>,
}

impl RingElement {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// On-disk form: `{"moduli": [...], "structure": [[[..],..],..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RingFile {
    pub moduli: Vec<u64>,
    pub structure: Vec<Vec<Vec<u64>>>,
}

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteRing {
    moduli: Vec<u64>,
    /// Flattened tensor, c[(i*k + j)*k + t].
    structure: Vec<u64>,
    order: u64,
}

impl fmt::Debug for FiniteRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteRing(moduli={:?}, order={})", self.moduli, self.order)
    }
}

impl FiniteRing {
    pub fn new(moduli: Vec<u64>, structure: Vec<Vec<Vec<u64>>>) -> Result<Self, RingError> {
        let k = moduli.len();
        if structure.len() != k {
            return Err(RingError::TensorRows { expected: k, found: structure.len() });
        }
        let mut flat = Vec::with_capacity(k * k * k);
        for (i, row) in structure.iter().enumerate() {
            if row.len() != k {
                return Err(RingError::TensorCols { i, expected: k, found: row.len() });
            }
            for (j, entry) in row.iter().enumerate() {
                if entry.len() != k {
                    return Err(RingError::TensorDepth { i, j, expected: k, found: entry.len() });
                }
                flat.extend_from_slice(entry);
            }
        }
        Self::from_flat(moduli, flat)
    }

    /// Same checks as [`FiniteRing::new`] on an already flattened tensor.
    pub fn from_flat(moduli: Vec<u64>, structure: Vec<u64>) -> Result<Self, RingError> {
        let k = moduli.len();
        if k == 0 {
            return Err(RingError::EmptyModuli);
        }
        for (index, &value) in moduli.iter().enumerate() {
            if value < 2 {
                return Err(RingError::ModulusTooSmall { index, value });
            }
        }
        let mut order: u64 = 1;
        for &d in &moduli {
            order = order.checked_mul(d).ok_or(RingError::OrderOverflow)?;
        }
        if structure.len() != k * k * k {
            return Err(RingError::TensorRows { expected: k, found: structure.len() / (k * k) });
        }
        for i in 0..k {
            for j in 0..k {
                for t in 0..k {
                    let value = structure[(i * k + j) * k + t];
                    if value >= moduli[t] {
                        return Err(RingError::EntryOutOfRange {
                            i,
                            j,
                            t,
                            value,
                            modulus: moduli[t],
                        });
                    }
                }
            }
        }
        Ok(FiniteRing { moduli, structure, order })
    }

    pub fn from_file(file: &RingFile) -> Result<Self, RingError> {
        Self::new(file.moduli.clone(), file.structure.clone())
    }

    pub fn to_file(&self) -> RingFile {
        let k = self.dimension();
        let structure = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| self.basis_product_coords(i, j).to_vec())
                    .collect()
            })
            .collect();
        RingFile { moduli: self.moduli.clone(), structure }
    }

    /// Number of additive generators.
    pub fn dimension(&self) -> usize {
        self.moduli.len()
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn structure_constant(&self, i: usize, j: usize, t: usize) -> u64 {
        let k = self.dimension();
        self.structure[(i * k + j) * k + t]
    }

    fn basis_product_coords(&self, i: usize, j: usize) -> &[u64] {
        let k = self.dimension();
        &self.structure[(i * k + j) * k..(i * k + j) * k + k]
    }

    pub fn zero(&self) -> RingElement {
        RingElement { coords: vec![0; self.dimension()] }
    }

    pub fn basis_element(&self, i: usize) -> RingElement {
        let mut coords = vec![0; self.dimension()];
        coords[i] = 1 % self.moduli[i];
        RingElement { coords }
    }

    pub fn element(&self, coords: Vec<u64>) -> Result<RingElement, RingError> {
        if coords.len() != self.dimension() {
            return Err(RingError::ElementLength {
                expected: self.dimension(),
                found: coords.len(),
            });
        }
        for (index, (&value, &modulus)) in coords.iter().zip(&self.moduli).enumerate() {
            if value >= modulus {
                return Err(RingError::CoordOutOfRange { index, value, modulus });
            }
        }
        Ok(RingElement { coords })
    }

    /// Mixed-radix decoding; coordinate 0 is the least significant digit.
    pub fn element_at(&self, index: u64) -> RingElement {
        debug_assert!(index < self.order);
        let mut rest = index;
        let coords = self
            .moduli
            .iter()
            .map(|&d| {
                let c = rest % d;
                rest /= d;
                c
            })
            .collect();
        RingElement { coords }
    }

    pub fn index_of(&self, x: &RingElement) -> u64 {
        let mut index = 0u64;
        let mut weight = 1u64;
        for (&c, &d) in x.coords.iter().zip(&self.moduli) {
            index += c * weight;
            weight *= d;
        }
        index
    }

    pub fn elements(&self) -> impl Iterator<Item = RingElement> + '_ {
        (0..self.order).map(|i| self.element_at(i))
    }

    pub fn add(&self, x: &RingElement, y: &RingElement) -> RingElement {
        debug_assert_eq!(x.coords.len(), self.dimension());
        debug_assert_eq!(y.coords.len(), self.dimension());
        let coords = x
            .coords
            .iter()
            .zip(&y.coords)
            .zip(&self.moduli)
            .map(|((&a, &b), &d)| (a + b) % d)
            .collect();
        RingElement { coords }
    }

    pub fn neg(&self, x: &RingElement) -> RingElement {
        let coords = x
            .coords
            .iter()
            .zip(&self.moduli)
            .map(|(&a, &d)| (d - a) % d)
            .collect();
        RingElement { coords }
    }

    /// Bilinear product through the structure tensor.
    pub fn multiply(&self, x: &RingElement, y: &RingElement) -> RingElement {
        debug_assert_eq!(x.coords.len(), self.dimension());
        debug_assert_eq!(y.coords.len(), self.dimension());
        let k = self.dimension();
        let mut acc = vec![0u128; k];
        for (i, &xi) in x.coords.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.coords.iter().enumerate() {
                if yj == 0 {
                    continue;
                }
                let scale = (xi as u128) * (yj as u128);
                let row = self.basis_product_coords(i, j);
                for t in 0..k {
                    if row[t] != 0 {
                        acc[t] = (acc[t] + scale * row[t] as u128) % self.moduli[t] as u128;
                    }
                }
            }
        }
        let coords = acc.iter().map(|&v| v as u64).collect();
        RingElement { coords }
    }

    pub fn is_commutative(&self) -> bool {
        let k = self.dimension();
        (0..k).all(|i| {
            (0..k).all(|j| self.basis_product_coords(i, j) == self.basis_product_coords(j, i))
        })
    }

    /// Ring with the transposed tensor: x *' y = y * x.
    pub fn opposite(&self) -> FiniteRing {
        let k = self.dimension();
        let mut structure = vec![0u64; k * k * k];
        for i in 0..k {
            for j in 0..k {
                for t in 0..k {
                    structure[(i * k + j) * k + t] = self.structure_constant(j, i, t);
                }
            }
        }
        FiniteRing { moduli: self.moduli.clone(), structure, order: self.order }
    }

    /// Orthogonal direct sum; commuting probabilities multiply.
    pub fn direct_sum(&self, other: &FiniteRing) -> Result<FiniteRing, RingError> {
        let ka = self.dimension();
        let kb = other.dimension();
        let k = ka + kb;
        let mut moduli = self.moduli.clone();
        moduli.extend_from_slice(&other.moduli);
        let mut structure = vec![0u64; k * k * k];
        for i in 0..ka {
            for j in 0..ka {
                for t in 0..ka {
                    structure[(i * k + j) * k + t] = self.structure_constant(i, j, t);
                }
            }
        }
        for i in 0..kb {
            for j in 0..kb {
                for t in 0..kb {
                    structure[((ka + i) * k + ka + j) * k + ka + t] =
                        other.structure_constant(i, j, t);
                }
            }
        }
        FiniteRing::from_flat(moduli, structure)
    }

    /// Checks every well-definedness and associativity instance and reports
    /// all failures; an empty report certifies the axioms.
    pub fn validate(&self) -> ValidationReport {
        let k = self.dimension();
        let mut violations = Vec::new();
        for i in 0..k {
            for j in 0..k {
                for t in 0..k {
                    let c = self.structure_constant(i, j, t) as u128;
                    let dt = self.moduli[t] as u128;
                    if (self.moduli[i] as u128 * c) % dt != 0 {
                        violations.push(RingViolation::WellDefined {
                            i,
                            j,
                            t,
                            side: ModulusSide::Left,
                        });
                    }
                    if (self.moduli[j] as u128 * c) % dt != 0 {
                        violations.push(RingViolation::WellDefined {
                            i,
                            j,
                            t,
                            side: ModulusSide::Right,
                        });
                    }
                }
            }
        }
        for i in 0..k {
            let ei = self.basis_element(i);
            for j in 0..k {
                let ej = self.basis_element(j);
                let ij = self.multiply(&ei, &ej);
                for l in 0..k {
                    let el = self.basis_element(l);
                    let left = self.multiply(&ij, &el);
                    let right = self.multiply(&ei, &self.multiply(&ej, &el));
                    if left != right {
                        violations.push(RingViolation::Associativity { i, j, l });
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn ensure_valid(&self) -> Result<(), RingError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(RingError::FailedValidation(report))
        }
    }

    pub fn commuting_probability_bruteforce(&self) -> Result<Rational, RingError> {
        self.commuting_probability_bruteforce_capped(DEFAULT_PAIR_SCAN_CAP)
    }

    /// Scans all |R|^2 ordered pairs and counts xy = yx. Ground truth.
    pub fn commuting_probability_bruteforce_capped(
        &self,
        cap: u64,
    ) -> Result<Rational, RingError> {
        if self.order > cap {
            return Err(RingError::PairScanCapExceeded { order: self.order, cap });
        }
        let elems: Vec<RingElement> = self.elements().collect();
        let commuting: u128 = elems
            .par_iter()
            .map(|x| {
                elems
                    .iter()
                    .filter(|y| self.multiply(x, y) == self.multiply(y, x))
                    .count() as u128
            })
            .sum();
        let total = self.order as u128 * self.order as u128;
        Ok(Rational::ratio_of_counts(commuting, total).expect("order is positive"))
    }

    /// Size of the centralizer of `x`, counted as the lattice index
    /// [Z^k : M_x Z^k + D Z^k] via the Smith normal form of [M_x | D],
    /// where M_x is the matrix of y -> xy - yx and D = diag(moduli).
    pub fn centralizer_size(&self, x: &RingElement) -> u64 {
        let k = self.dimension();
        let mut block = vec![vec![BigInt::zero(); 2 * k]; k];
        for j in 0..k {
            let ej = self.basis_element(j);
            let forward = self.multiply(x, &ej);
            let backward = self.multiply(&ej, x);
            for t in 0..k {
                block[t][j] = BigInt::from(forward.coords[t] as i128 - backward.coords[t] as i128);
            }
        }
        for t in 0..k {
            block[t][k + t] = BigInt::from(self.moduli[t]);
        }
        let diag = snf_diagonal(&block);
        let mut size = BigInt::one();
        for d in &diag {
            assert!(d.is_positive(), "D has full rank, the block cannot be rank deficient");
            size *= d;
        }
        let size = size.to_u64().expect("centralizer size divides the ring order");
        debug_assert_eq!(self.order % size, 0);
        size
    }

    /// Sum of centralizer sizes over |R|^2. Agrees with the pair scan but
    /// costs |R| small Smith forms instead of |R|^2 products.
    pub fn commuting_probability_fast(&self) -> Rational {
        let sum: u128 = (0..self.order)
            .into_par_iter()
            .map(|i| self.centralizer_size(&self.element_at(i)) as u128)
            .sum();
        let total = self.order as u128 * self.order as u128;
        Rational::ratio_of_counts(sum, total).expect("order is positive")
    }
}

#[cfg(test)]
mod tests {
    use super::samples;
    use super::*;

    fn order4() -> FiniteRing {
        samples::order4_noncommutative()
    }

    #[test]
    fn order4_fixture_is_valid() {
        assert!(order4().validate().is_valid());
        assert!(!order4().is_commutative());
    }

    #[test]
    fn multiply_basis_cases() {
        let r = order4();
        let e1 = r.basis_element(0);
        let e2 = r.basis_element(1);
        assert_eq!(r.multiply(&e1, &e2), e2);
        assert_eq!(r.multiply(&e2, &e1), r.zero());
        assert_eq!(r.multiply(&e1, &e1), e1);
        let both = r.element(vec![1, 1]).unwrap();
        assert_eq!(r.multiply(&both, &e1), e1);
    }

    #[test]
    fn brute_force_pair_count() {
        // 10 commuting pairs of 16: all but the six pairs of independent
        // vectors over F2.
        let p = order4().commuting_probability_bruteforce().unwrap();
        assert_eq!(p.to_string(), "5/8");
    }

    #[test]
    fn fast_path_matches_on_fixture() {
        let r = order4();
        assert_eq!(r.commuting_probability_fast().to_string(), "5/8");
    }

    #[test]
    fn centralizer_sizes_of_fixture() {
        let r = order4();
        let sizes: Vec<u64> = r.elements().map(|x| r.centralizer_size(&x)).collect();
        // zero, e1, e2, e1+e2 in index order.
        assert_eq!(sizes, vec![4, 2, 2, 2]);
        let brute: Vec<u64> = r
            .elements()
            .map(|x| {
                r.elements()
                    .filter(|y| r.multiply(&x, y) == r.multiply(y, &x))
                    .count() as u64
            })
            .collect();
        assert_eq!(sizes, brute);
    }

    #[test]
    fn zero_ring_commutes_everywhere() {
        let r = samples::zero_ring(&[2, 4]).unwrap();
        assert!(r.is_commutative());
        assert!(r.commuting_probability_fast().is_one());
        assert!(r.commuting_probability_bruteforce().unwrap().is_one());
    }

    #[test]
    fn opposite_preserves_probability() {
        let r = order4();
        let op = r.opposite();
        assert!(!op.is_commutative());
        assert_eq!(
            r.commuting_probability_fast(),
            op.commuting_probability_fast()
        );
        assert_eq!(op.opposite(), r);
    }

    #[test]
    fn direct_sum_multiplies_probabilities() {
        let a = order4();
        let b = samples::left_multiplier_ring(3).unwrap();
        let sum = a.direct_sum(&b).unwrap();
        assert_eq!(sum.order(), 36);
        let expected = a.commuting_probability_fast() * b.commuting_probability_fast();
        assert_eq!(sum.commuting_probability_fast(), expected);
        assert_eq!(sum.commuting_probability_bruteforce().unwrap(), expected);
    }

    #[test]
    fn rejects_out_of_range_entry() {
        let err = FiniteRing::new(vec![2, 2], vec![
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![0, 0], vec![0, 2]],
        ])
        .unwrap_err();
        assert_eq!(
            err,
            RingError::EntryOutOfRange { i: 1, j: 1, t: 1, value: 2, modulus: 2 }
        );
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            FiniteRing::new(vec![2], vec![]),
            Err(RingError::TensorRows { .. })
        ));
        assert!(matches!(
            FiniteRing::new(vec![2, 2], vec![vec![vec![0, 0]], vec![]]),
            Err(RingError::TensorCols { .. })
        ));
        assert!(matches!(
            FiniteRing::new(vec![], vec![]),
            Err(RingError::EmptyModuli)
        ));
        assert!(matches!(
            FiniteRing::new(vec![2, 1], vec![vec![vec![0, 0]; 2]; 2]),
            Err(RingError::ModulusTooSmall { index: 1, value: 1 })
        ));
    }

    #[test]
    fn validate_reports_well_definedness() {
        // On Z2 x Z4 the product e1*e1 = e2 is not well defined: 2*e1 = 0
        // but 2*(e1*e1) = 2*e2 != 0.
        let r = FiniteRing::new(vec![2, 4], vec![
            vec![vec![0, 1], vec![0, 0]],
            vec![vec![0, 0], vec![0, 0]],
        ])
        .unwrap();
        let report = r.validate();
        assert!(report.violations.contains(&RingViolation::WellDefined {
            i: 0,
            j: 0,
            t: 1,
            side: ModulusSide::Left,
        }));
    }

    #[test]
    fn validate_reports_associativity() {
        // e1*e1 = e2, e1*e2 = e1 on (Z3)^2: (e1 e1) e1 = e2 e1 = 0 but
        // e1 (e1 e1) = e1 e2 = e1.
        let r = FiniteRing::new(vec![3, 3], vec![
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![0, 0], vec![0, 0]],
        ])
        .unwrap();
        let report = r.validate();
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, RingViolation::Associativity { .. })));
        assert!(r.ensure_valid().is_err());
    }

    #[test]
    fn pair_scan_cap() {
        let r = samples::zero_ring(&[2; 13]).unwrap();
        assert_eq!(r.order(), 8192);
        assert!(matches!(
            r.commuting_probability_bruteforce(),
            Err(RingError::PairScanCapExceeded { order: 8192, cap: 4096 })
        ));
        let small = samples::zero_ring(&[2, 2, 2]).unwrap();
        assert!(small.commuting_probability_bruteforce_capped(4).is_err());
        assert!(small.commuting_probability_bruteforce_capped(8).is_ok());
    }

    #[test]
    fn element_indexing_roundtrip() {
        let r = samples::zero_ring(&[2, 3, 4]).unwrap();
        for i in 0..r.order() {
            assert_eq!(r.index_of(&r.element_at(i)), i);
        }
        assert!(r.element(vec![0, 3, 0]).is_err());
        assert!(r.element(vec![0, 0]).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let r = order4();
        let file = r.to_file();
        let json = serde_json::to_string(&file).unwrap();
        let parsed: RingFile = serde_json::from_str(&json).unwrap();
        assert_eq!(FiniteRing::from_file(&parsed).unwrap(), r);
    }
}
