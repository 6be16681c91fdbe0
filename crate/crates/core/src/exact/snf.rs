//! Smith normal form over the integers.
//!
//! Classical elementary-operation reduction: pick the smallest nonzero
//! entry as pivot, clear its row and column by euclidean steps, then repair
//! divisibility by folding offending rows back in. Entries are big integers
//! throughout, so no intermediate overflow is possible.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Diagonal of the Smith normal form of an arbitrary integer matrix.
///
/// The result has `min(rows, cols)` entries, each nonnegative, each dividing
/// the next, with all zeros trailing. The product of the nonzero entries of
/// the diagonal of a full-row-rank `[M | D]` block equals the index of the
/// column span in Z^k, which is how the ring code counts centralizers.
pub fn snf_diagonal(matrix: &[Vec<BigInt>]) -> Vec<BigInt> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, |r| r.len());
    assert!(
        matrix.iter().all(|r| r.len() == cols),
        "matrix rows must have equal length"
    );
    let bound = rows.min(cols);
    let mut m = matrix.to_vec();
    let mut diag = Vec::with_capacity(bound);

    let mut t = 0;
    while t < bound {
        let Some((pi, pj)) = min_nonzero(&m, t) else {
            break;
        };
        m.swap(t, pi);
        swap_cols(&mut m, t, pj);

        'reduce: loop {
            // Clear column t. A nonzero remainder is strictly smaller than
            // the pivot, so swapping it up makes progress.
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = &m[i][t] / &m[t][t];
                if !q.is_zero() {
                    for j in t..cols {
                        let delta = &q * &m[t][j];
                        m[i][j] -= delta;
                    }
                }
                if !m[i][t].is_zero() {
                    m.swap(t, i);
                    continue 'reduce;
                }
            }
            // Clear row t by column operations; column t stays zeroed.
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = &m[t][j] / &m[t][t];
                if !q.is_zero() {
                    for row in m.iter_mut().take(rows).skip(t) {
                        let delta = &q * &row[t];
                        row[j] -= delta;
                    }
                }
                if !m[t][j].is_zero() {
                    swap_cols(&mut m, t, j);
                    continue 'reduce;
                }
            }
            // Divisibility repair: fold in any row containing an entry the
            // pivot does not divide, then reduce again.
            for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(&m[i][j] % &m[t][t]).is_zero() {
                        for col in 0..cols {
                            let add = m[i][col].clone();
                            m[t][col] += add;
                        }
                        continue 'reduce;
                    }
                }
            }
            break;
        }

        diag.push(m[t][t].abs());
        t += 1;
    }

    diag.resize(bound, BigInt::zero());
    diag
}

fn min_nonzero(m: &[Vec<BigInt>], from: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in m.iter().enumerate().skip(from) {
        for (j, v) in row.iter().enumerate().skip(from) {
            if v.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if m[bi][bj].abs() <= v.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

fn swap_cols(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a != b {
        for row in m {
            row.swap(a, b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect()
    }

    fn diag(rows: &[&[i64]]) -> Vec<i64> {
        snf_diagonal(&mat(rows))
            .iter()
            .map(|v| i64::try_from(v).unwrap())
            .collect()
    }

    #[test]
    fn diagonal_gcd_lcm() {
        assert_eq!(diag(&[&[2, 0], &[0, 3]]), vec![1, 6]);
    }

    #[test]
    fn identity_matrix() {
        assert_eq!(diag(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]), vec![1, 1, 1]);
    }

    #[test]
    fn textbook_two_by_two() {
        assert_eq!(diag(&[&[2, 4], &[6, 8]]), vec![2, 4]);
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(diag(&[&[0, 0], &[0, 0]]), vec![0, 0]);
    }

    #[test]
    fn rank_deficient() {
        assert_eq!(diag(&[&[1, 2], &[2, 4]]), vec![1, 0]);
    }

    #[test]
    fn wide_block() {
        // The centralizer block from the order-4 noncommutative ring.
        assert_eq!(
            diag(&[&[0, 0, 2, 0], &[0, 1, 0, 2]]),
            vec![1, 2]
        );
    }

    #[test]
    fn tall_matrix() {
        assert_eq!(diag(&[&[4], &[6]]), vec![2]);
    }

    #[test]
    fn negative_entries() {
        assert_eq!(diag(&[&[-2, 0], &[0, -3]]), vec![1, 6]);
    }

    #[test]
    fn empty_matrix() {
        assert!(snf_diagonal(&[]).is_empty());
    }
}
