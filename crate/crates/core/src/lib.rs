//! Exact computations on quadric surface fibrations `X -> P^1` over finite
//! fields of odd characteristic: discriminants and numerical invariants,
//! sections and their heights, lines in fibers, elementary transformations,
//! and a symbolic check of the height formula in the Chow ring.

#![allow(clippy::needless_range_loop)]

pub mod chow;
pub mod error;
pub mod exec;
pub mod fibration;
pub mod gfpoly;
pub mod hecke;
pub mod linalg;
pub mod lines;
pub mod sections;

pub use error::{Error, Result};
