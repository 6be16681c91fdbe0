//! Exact integer and rational arithmetic used everywhere else.

pub mod factor;
pub mod rational;
pub mod snf;
