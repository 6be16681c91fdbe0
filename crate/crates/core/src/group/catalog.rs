//! Small stock groups used in tests and as CLI built-ins.

use super::FiniteGroup;

pub fn cyclic(n: usize) -> FiniteGroup {
    assert!(n >= 1);
    let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
    FiniteGroup::from_table_with_cap(table, n.max(super::DEFAULT_ASSOC_CAP))
        .expect("cyclic table is a group")
}

pub fn klein_four() -> FiniteGroup {
    // Z2 x Z2 via xor on two bits.
    let table = (0..4).map(|i| (0..4).map(|j| i ^ j).collect()).collect();
    FiniteGroup::from_table(table).expect("klein table is a group")
}

/// Dihedral group of order 2n: indices 0..n are rotations r^i, indices
/// n..2n are reflections s r^i.
pub fn dihedral(n: usize) -> FiniteGroup {
    assert!(n >= 1);
    let m = 2 * n;
    let mut table = vec![vec![0usize; m]; m];
    for i in 0..m {
        for j in 0..m {
            let (ri, fi) = (i % n, i >= n);
            let (rj, fj) = (j % n, j >= n);
            // s r^i s = r^-i, so (f,i)(g,j) = (f xor g, j +- i).
            let rot = if fj { (n + rj - ri % n) % n } else { (ri + rj) % n };
            table[i][j] = rot + if fi != fj { n } else { 0 };
        }
    }
    FiniteGroup::from_table(table).expect("dihedral table is a group")
}

/// Symmetric group on three letters, as the dihedral group of the triangle.
pub fn symmetric3() -> FiniteGroup {
    dihedral(3)
}

/// Quaternion group {±1, ±i, ±j, ±k}; index = 2*axis + (1 if negative).
pub fn quaternion8() -> FiniteGroup {
    // axis 0 is the scalar 1; axes 1,2,3 are i,j,k.
    let mul = |a: (usize, bool), b: (usize, bool)| -> (usize, bool) {
        let sign = a.1 != b.1;
        match (a.0, b.0) {
            (0, x) => (x, sign),
            (x, 0) => (x, sign),
            (x, y) if x == y => (0, !sign),
            (1, 2) => (3, sign),
            (2, 3) => (1, sign),
            (3, 1) => (2, sign),
            // reversed products pick up a sign: ji = -k etc.
            (2, 1) => (3, !sign),
            (3, 2) => (1, !sign),
            (1, 3) => (2, !sign),
            _ => unreachable!(),
        }
    };
    let decode = |x: usize| (x / 2, x % 2 == 1);
    let encode = |(axis, neg): (usize, bool)| axis * 2 + neg as usize;
    let table = (0..8)
        .map(|i| (0..8).map(|j| encode(mul(decode(i), decode(j)))).collect())
        .collect();
    FiniteGroup::from_table(table).expect("quaternion table is a group")
}
