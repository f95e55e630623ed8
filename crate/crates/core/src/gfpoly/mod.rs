//! Exact arithmetic in `F_{p^k}` and in the graded ring of binary forms on `P^1`.

mod extension;
mod field;
mod form;
mod roots;
mod unipoly;

pub use extension::Extension;
pub use field::{Fe, Field, FieldSpec, MAX_DEGREE};
pub use form::{BinaryForm, ProjPoint1};
pub use roots::{projective_roots, RootOrbit, RootReport, DEFAULT_ROOT_BUDGET};
pub use unipoly::UniPoly;
