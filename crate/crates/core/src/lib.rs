//! Exact commuting probabilities for finite rings and groups.
//!
//! Everything here is exact: probabilities are rationals in lowest terms,
//! group and ring structure is finite and explicit, and every fast path has
//! a brute-force counterpart it can be checked against.
//!
//! * [`exact`]: big rationals, factorization, Smith normal form.
//! * [`ring`]: finite rings as structure-constant tensors over products of
//!   cyclic groups, with two independent commuting-probability routes.
//! * [`group`]: finite groups as Cayley tables, conjugacy counting, the
//!   nilpotent probability formula, Sylow splitting, isoclinism checks.
//! * [`lift`]: the double null extension and its circle group, turning any
//!   finite ring into a group of class at most two with the same commuting
//!   probability.
//! * [`formula`]: exact evaluation of the attainable p-part fractions and
//!   bounded exhaustive searches over them.
//! * [`census`]: exhaustive enumeration of small rings up to isomorphism
//!   and conjecture sweeps over the resulting corpus.

pub mod census;
pub mod exact;
pub mod formula;
pub mod group;
pub mod lift;
pub mod ring;

pub use exact::factor::{factorize, factorize_u64, is_square_free, Factorization};
pub use exact::rational::Rational;
pub use exact::snf::snf_diagonal;
