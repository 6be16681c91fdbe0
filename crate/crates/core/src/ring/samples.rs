//! Hand-built rings used across tests and sweeps.

use super::{FiniteRing, RingError};

/// Moduli [2,2] with e1*e1 = e1, e1*e2 = e2, e2*e1 = e2*e2 = 0.
/// The smallest noncommutative ring; commuting probability 5/8.
pub fn order4_noncommutative() -> FiniteRing {
    left_multiplier_ring(2).expect("fixture moduli are valid")
}

/// Moduli [d,d] with (x1,x2)*(y1,y2) = x1*(y1,y2): the left factor acts as
/// a scalar, the right factor is absorbed. Noncommutative for every d >= 2.
pub fn left_multiplier_ring(d: u64) -> Result<FiniteRing, RingError> {
    FiniteRing::new(
        vec![d, d],
        vec![
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![0, 0], vec![0, 0]],
        ],
    )
}

/// All products zero.
pub fn zero_ring(moduli: &[u64]) -> Result<FiniteRing, RingError> {
    let k = moduli.len();
    FiniteRing::from_flat(moduli.to_vec(), vec![0; k * k * k])
}

/// Z_n with x * y = scale * x * y. Associative for every scale.
pub fn scaled_cyclic_ring(n: u64, scale: u64) -> Result<FiniteRing, RingError> {
    FiniteRing::new(vec![n], vec![vec![vec![scale % n]]])
}

/// Z_n with the usual product (an identity element exists).
pub fn cyclic_ring(n: u64) -> Result<FiniteRing, RingError> {
    scaled_cyclic_ring(n, 1)
}

/// Strictly upper triangular 3x3 matrices over Z_d, basis (E12, E23, E13):
/// E12 * E23 = E13 and every other basis product vanishes. Noncommutative,
/// nilpotent of index 3.
pub fn strictly_upper_triangular_ring(d: u64) -> Result<FiniteRing, RingError> {
    FiniteRing::new(
        vec![d, d, d],
        vec![
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 0, 0]],
            vec![vec![0, 0, 0], vec![0, 0, 0], vec![0, 0, 0]],
            vec![vec![0, 0, 0], vec![0, 0, 0], vec![0, 0, 0]],
        ],
    )
}
