//! Exact trace-coordinate calculus for SL(2,C) characters of arborescent
//! tangles and knots, with a numeric matrix oracle.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod mat2;
pub mod ratfun;
pub mod tangle;
pub mod invariants;
pub mod links;
pub mod linalg;
pub mod witness;
pub mod oracle;
