//! Finite groups as Cayley tables.
//!
//! Element 0 is always the identity; loaders relabel tables that put the
//! identity elsewhere. Everything is validated up front: Latin square
//! property, identity, inverses, and full associativity for orders within
//! the cap. Group orders here stay small (lifted rings dominate), so O(n^2)
//! and O(n^3) scans are the honest tool.

pub mod catalog;
mod isoclinism;

pub use isoclinism::{are_isoclinic_bruteforce, are_isoclinic_bruteforce_capped, isomorphisms};

use crate::exact::factor::factorize_u64;
use crate::exact::rational::Rational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Full associativity checks cost n^3 table lookups; lifted rings of order
/// up to 32 produce groups of order up to 1024.
pub const DEFAULT_ASSOC_CAP: usize = 1024;

/// Isoclinism searches enumerate isomorphisms of central quotients.
pub const DEFAULT_CENTRAL_INDEX_CAP: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("a group needs at least one element")]
    EmptyTable,
    #[error("table row {row} has {found} entries, expected {expected}")]
    NotSquare { row: usize, expected: usize, found: usize },
    #[error("table entry at ({row},{col}) is {value}, must be below {order}")]
    EntryOutOfRange { row: usize, col: usize, value: usize, order: usize },
    #[error("index 0 is not a two-sided identity (fails at element {witness})")]
    IdentityViolation { witness: usize },
    #[error("{kind} {index} is not a permutation")]
    NotLatin { kind: LatinKind, index: usize },
    #[error("associativity fails at ({a},{b},{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("associativity check needs order <= {cap}, table has order {order}")]
    AssociativityCapExceeded { order: usize, cap: usize },
    #[error("element {witness} has no inverse")]
    NoInverse { witness: usize },
    #[error("no two-sided identity element exists")]
    NoIdentity,
    #[error("file declares order {declared} but the table has {found} rows")]
    OrderMismatch { declared: usize, found: usize },
    #[error("subset is not closed: product {witness} falls outside")]
    NotClosed { witness: usize },
    #[error("subset does not contain the identity")]
    SubsetMissingIdentity,
    #[error("Sylow decomposition requires a nilpotent group")]
    NotNilpotent,
    #[error("central quotient has index {index}, isoclinism search caps at {cap}")]
    CentralIndexCapExceeded { index: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatinKind {
    Row,
    Column,
}

impl std::fmt::Display for LatinKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LatinKind::Row => write!(f, "row"),
            LatinKind::Column => write!(f, "column"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NilpotencyClass {
    Nilpotent(u32),
    NotNilpotent,
}

impl NilpotencyClass {
    pub fn is_nilpotent(&self) -> bool {
        matches!(self, NilpotencyClass::Nilpotent(_))
    }
}

/// Both sides of the class-at-most-two probability identity.
#[derive(Clone, Debug, Serialize)]
pub struct NilpotentFormulaCheck {
    pub formula_value: Rational,
    pub counted: Rational,
    pub matches: bool,
}

/// Isomorphism-invariant data preserved by isoclinism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupInvariants {
    pub order: usize,
    pub center_size: usize,
    pub derived_size: usize,
    pub central_index: usize,
    pub nilpotency_class: NilpotencyClass,
    /// Multiset fingerprint of the commutator pairing on central cosets:
    /// (order of aZ, order of bZ, order of [a,b]) with multiplicities.
    pub commutator_pairing: Vec<PairingEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PairingEntry {
    pub left_order: usize,
    pub right_order: usize,
    pub commutator_order: usize,
    pub count: u64,
}

/// On-disk form: `{"order": n, "table": [[..], ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupFile {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
}

/// The central quotient G/Z together with the coset bookkeeping the
/// isoclinism machinery needs.
#[derive(Clone, Debug)]
pub struct CentralQuotient {
    pub group: FiniteGroup,
    /// Coset index of every element of G.
    pub coset_of: Vec<usize>,
    /// Minimal representative of each coset; coset 0 contains the identity.
    pub reps: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    n: usize,
    table: Vec<usize>,
    inv: Vec<usize>,
}

impl std::fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FiniteGroup(order={})", self.n)
    }
}

impl FiniteGroup {
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        Self::from_table_with_cap(table, DEFAULT_ASSOC_CAP)
    }

    pub fn from_table_with_cap(table: Vec<Vec<usize>>, cap: usize) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::EmptyTable);
        }
        let mut flat = Vec::with_capacity(n * n);
        for (row, r) in table.iter().enumerate() {
            if r.len() != n {
                return Err(GroupError::NotSquare { row, expected: n, found: r.len() });
            }
            for (col, &value) in r.iter().enumerate() {
                if value >= n {
                    return Err(GroupError::EntryOutOfRange { row, col, value, order: n });
                }
                flat.push(value);
            }
        }
        for x in 0..n {
            if flat[x] != x || flat[x * n] != x {
                return Err(GroupError::IdentityViolation { witness: x });
            }
        }
        let mut seen = vec![false; n];
        for i in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for j in 0..n {
                let v = flat[i * n + j];
                if seen[v] {
                    return Err(GroupError::NotLatin { kind: LatinKind::Row, index: i });
                }
                seen[v] = true;
            }
        }
        for j in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            for i in 0..n {
                let v = flat[i * n + j];
                if seen[v] {
                    return Err(GroupError::NotLatin { kind: LatinKind::Column, index: j });
                }
                seen[v] = true;
            }
        }
        if n > cap {
            return Err(GroupError::AssociativityCapExceeded { order: n, cap });
        }
        for a in 0..n {
            for b in 0..n {
                let ab = flat[a * n + b];
                for c in 0..n {
                    if flat[ab * n + c] != flat[a * n + flat[b * n + c]] {
                        return Err(GroupError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            let b = (0..n)
                .find(|&b| flat[a * n + b] == 0)
                .ok_or(GroupError::NoInverse { witness: a })?;
            if flat[b * n + a] != 0 {
                return Err(GroupError::NoInverse { witness: a });
            }
            inv[a] = b;
        }
        Ok(FiniteGroup { n, table: flat, inv })
    }

    /// Loads a Cayley table file, relabeling so the identity sits at 0.
    pub fn from_file(file: &GroupFile) -> Result<Self, GroupError> {
        if file.order != file.table.len() {
            return Err(GroupError::OrderMismatch {
                declared: file.order,
                found: file.table.len(),
            });
        }
        let n = file.table.len();
        if n == 0 {
            return Err(GroupError::EmptyTable);
        }
        for (row, r) in file.table.iter().enumerate() {
            if r.len() != n {
                return Err(GroupError::NotSquare { row, expected: n, found: r.len() });
            }
            for (col, &value) in r.iter().enumerate() {
                if value >= n {
                    return Err(GroupError::EntryOutOfRange { row, col, value, order: n });
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| file.table[e][x] == x && file.table[x][e] == x))
            .ok_or(GroupError::NoIdentity)?;
        let table = if identity == 0 {
            file.table.clone()
        } else {
            let relabel = |x: usize| {
                if x == 0 {
                    identity
                } else if x == identity {
                    0
                } else {
                    x
                }
            };
            let mut swapped = vec![vec![0usize; n]; n];
            for (a, row) in file.table.iter().enumerate() {
                for (b, &v) in row.iter().enumerate() {
                    swapped[relabel(a)][relabel(b)] = relabel(v);
                }
            }
            swapped
        };
        Self::from_table(table)
    }

    pub fn to_file(&self) -> GroupFile {
        let table = (0..self.n)
            .map(|a| self.table[a * self.n..(a + 1) * self.n].to_vec())
            .collect();
        GroupFile { order: self.n, table }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn op(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b]
    }

    #[inline]
    pub fn inverse(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// g^-1 h^-1 g h.
    #[inline]
    pub fn commutator(&self, g: usize, h: usize) -> usize {
        self.op(self.op(self.op(self.inv[g], self.inv[h]), g), h)
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut m = 1;
        while x != 0 {
            x = self.op(x, a);
            m += 1;
        }
        m
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (a..self.n).all(|b| self.op(a, b) == self.op(b, a)))
    }

    pub fn conjugacy_class_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut classes = 0;
        for r in 0..self.n {
            if seen[r] {
                continue;
            }
            classes += 1;
            for g in 0..self.n {
                seen[self.op(self.op(self.inv[g], r), g)] = true;
            }
        }
        classes
    }

    /// Commuting probability as (number of conjugacy classes) / |G|.
    pub fn commuting_probability(&self) -> Rational {
        Rational::ratio_of_counts(self.conjugacy_class_count() as u128, self.n as u128)
            .expect("group order is positive")
    }

    /// Commuting probability by scanning all ordered pairs. Oracle for
    /// [`FiniteGroup::commuting_probability`]; the two must agree.
    pub fn commuting_probability_paircount(&self) -> Rational {
        let commuting = (0..self.n)
            .flat_map(|a| (0..self.n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.op(a, b) == self.op(b, a))
            .count();
        Rational::ratio_of_counts(commuting as u128, (self.n as u128) * (self.n as u128))
            .expect("group order is positive")
    }

    pub fn center(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&z| (0..self.n).all(|g| self.op(z, g) == self.op(g, z)))
            .collect()
    }

    /// Subgroup generated by a set, as a sorted element list.
    pub fn closure(&self, generators: &[usize]) -> Vec<usize> {
        let mut in_set = vec![false; self.n];
        in_set[0] = true;
        let mut members = vec![0];
        for &g in generators {
            if !in_set[g] {
                in_set[g] = true;
                members.push(g);
            }
        }
        let mut i = 0;
        while i < members.len() {
            let a = members[i];
            let mut j = 0;
            while j < members.len() {
                let b = members[j];
                for p in [self.op(a, b), self.op(b, a)] {
                    if !in_set[p] {
                        in_set[p] = true;
                        members.push(p);
                    }
                }
                j += 1;
            }
            i += 1;
        }
        members.sort_unstable();
        members
    }

    pub fn derived_subgroup(&self) -> Vec<usize> {
        let mut comms = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                comms.push(self.commutator(a, b));
            }
        }
        self.closure(&comms)
    }

    /// Lower central series length; `NotNilpotent` when it stalls.
    pub fn nilpotency_class(&self) -> NilpotencyClass {
        let mut gamma: Vec<usize> = (0..self.n).collect();
        let mut steps = 0;
        while gamma.len() > 1 {
            let mut comms = Vec::new();
            for &g in &gamma {
                for h in 0..self.n {
                    comms.push(self.commutator(g, h));
                }
            }
            let next = self.closure(&comms);
            if next == gamma {
                return NilpotencyClass::NotNilpotent;
            }
            gamma = next;
            steps += 1;
        }
        NilpotencyClass::Nilpotent(steps)
    }

    /// Evaluates (1/|G'|) (1 + (|G'|-1)/[G:Z]) against the counted
    /// probability. Equality holds iff every noncentral conjugacy class
    /// has size exactly |G'|: true for nilpotent groups with |G'| prime
    /// (Q8, D4), false for S3, and false for some class-two groups with
    /// |G'| = 4 whose classes mix sizes 2 and 4 (see the lift tests).
    pub fn check_nilpotent_formula(&self) -> NilpotentFormulaCheck {
        let derived = self.derived_subgroup().len() as u64;
        let central_index = (self.n / self.center().len()) as u64;
        let one_over_derived = Rational::reduce(1u64, derived).expect("derived size positive");
        let ratio = Rational::reduce(derived - 1, central_index).expect("index positive");
        let formula_value = one_over_derived * (Rational::one() + ratio);
        let counted = self.commuting_probability();
        let matches = formula_value == counted;
        NilpotentFormulaCheck { formula_value, counted, matches }
    }

    /// Reindexes a subset (which must contain 0 and be closed) as a group.
    pub fn subgroup_table(&self, members: &[usize]) -> Result<FiniteGroup, GroupError> {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.first() != Some(&0) {
            return Err(GroupError::SubsetMissingIdentity);
        }
        let mut local = vec![usize::MAX; self.n];
        for (idx, &g) in members.iter().enumerate() {
            local[g] = idx;
        }
        let m = members.len();
        let mut table = vec![vec![0usize; m]; m];
        for (ia, &a) in members.iter().enumerate() {
            for (ib, &b) in members.iter().enumerate() {
                let p = self.op(a, b);
                if local[p] == usize::MAX {
                    return Err(GroupError::NotClosed { witness: p });
                }
                table[ia][ib] = local[p];
            }
        }
        Self::from_table_with_cap(table, self.n.max(DEFAULT_ASSOC_CAP))
    }

    /// Splits a nilpotent group into its Sylow subgroups, each returned as
    /// (prime, reindexed subgroup). The subgroup of p-power-order elements
    /// is verified to be closed and of full p-part order.
    pub fn sylow_decomposition(&self) -> Result<Vec<(u64, FiniteGroup)>, GroupError> {
        if !self.nilpotency_class().is_nilpotent() {
            return Err(GroupError::NotNilpotent);
        }
        let factors = factorize_u64(self.n as u64).expect("order is positive");
        let mut parts = Vec::new();
        for pp in factors.factors() {
            let p = pp.prime as usize;
            let members: Vec<usize> = (0..self.n)
                .filter(|&x| {
                    let mut o = self.element_order(x);
                    while o % p == 0 {
                        o /= p;
                    }
                    o == 1
                })
                .collect();
            let expected = (pp.prime as usize).pow(pp.exponent);
            debug_assert_eq!(members.len(), expected, "p-torsion of a nilpotent group");
            let subgroup = self.subgroup_table(&members)?;
            if subgroup.order() != expected {
                return Err(GroupError::NotClosed { witness: subgroup.order() });
            }
            parts.push((pp.prime, subgroup));
        }
        Ok(parts)
    }

    pub fn central_quotient(&self) -> CentralQuotient {
        let center = self.center();
        let mut coset_of = vec![usize::MAX; self.n];
        let mut reps = Vec::new();
        for g in 0..self.n {
            if coset_of[g] != usize::MAX {
                continue;
            }
            let id = reps.len();
            reps.push(g);
            for &z in &center {
                coset_of[self.op(g, z)] = id;
            }
        }
        let q = reps.len();
        let mut table = vec![vec![0usize; q]; q];
        for a in 0..q {
            for b in 0..q {
                table[a][b] = coset_of[self.op(reps[a], reps[b])];
            }
        }
        let group = FiniteGroup::from_table_with_cap(table, self.n.max(DEFAULT_ASSOC_CAP))
            .expect("quotient by a central subgroup is a group");
        CentralQuotient { group, coset_of, reps }
    }

    /// The commutator [a,b] depends only on the central cosets of a and b;
    /// returns it indexed by coset pairs.
    pub fn commutator_pairing(&self) -> (CentralQuotient, Vec<Vec<usize>>) {
        let quotient = self.central_quotient();
        let q = quotient.reps.len();
        let mut pairing = vec![vec![0usize; q]; q];
        for a in 0..q {
            for b in 0..q {
                pairing[a][b] = self.commutator(quotient.reps[a], quotient.reps[b]);
            }
        }
        (quotient, pairing)
    }

    pub fn isoclinism_invariants(&self) -> GroupInvariants {
        let center_size = self.center().len();
        let derived_size = self.derived_subgroup().len();
        let (quotient, pairing) = self.commutator_pairing();
        let q = quotient.reps.len();
        let mut multiset = std::collections::BTreeMap::new();
        for a in 0..q {
            for b in 0..q {
                let key = (
                    quotient.group.element_order(a),
                    quotient.group.element_order(b),
                    self.element_order(pairing[a][b]),
                );
                *multiset.entry(key).or_insert(0u64) += 1;
            }
        }
        GroupInvariants {
            order: self.n,
            center_size,
            derived_size,
            central_index: q,
            nilpotency_class: self.nilpotency_class(),
            commutator_pairing: multiset
                .into_iter()
                .map(|((left_order, right_order, commutator_order), count)| PairingEntry {
                    left_order,
                    right_order,
                    commutator_order,
                    count,
                })
                .collect(),
        }
    }

    /// Stem groups have their center inside their derived subgroup.
    pub fn is_stem_candidate(&self) -> bool {
        let derived = self.derived_subgroup();
        self.center().iter().all(|z| derived.binary_search(z).is_ok())
    }

    pub fn direct_product(&self, other: &FiniteGroup) -> FiniteGroup {
        let (na, nb) = (self.n, other.n);
        let n = na * nb;
        let mut table = vec![vec![0usize; n]; n];
        for a1 in 0..na {
            for b1 in 0..nb {
                for a2 in 0..na {
                    for b2 in 0..nb {
                        table[a1 * nb + b1][a2 * nb + b2] =
                            self.op(a1, a2) * nb + other.op(b1, b2);
                    }
                }
            }
        }
        FiniteGroup::from_table_with_cap(table, n.max(DEFAULT_ASSOC_CAP))
            .expect("direct product of groups is a group")
    }
}
