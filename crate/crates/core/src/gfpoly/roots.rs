use serde::Serialize;

use super::extension::Extension;
use super::field::Field;
use super::form::{BinaryForm, ProjPoint1};
use crate::error::{Error, Result};

/// Default cap on the number of field elements scanned by root searches.
pub const DEFAULT_ROOT_BUDGET: u64 = 1_000_000;

/// One Galois orbit of roots of a binary form.
#[derive(Clone, Debug)]
pub struct RootOrbit {
    /// Degree of the field of definition over the base.
    pub degree: u32,
    /// The field the representative lives in.
    pub field: Field,
    /// Lexicographically least member of the orbit.
    pub point: ProjPoint1,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct RootReport {
    pub degree: u32,
    pub point: String,
    pub multiplicity: usize,
}

impl RootOrbit {
    pub fn report(&self) -> RootReport {
        RootReport { degree: self.degree, point: self.point.display(&self.field), multiplicity: self.multiplicity }
    }
}

/// All roots of `f` over extensions of degree at most `max_ext`, found by
/// exhaustive evaluation. `budget` caps the size of the largest field scanned.
pub fn projective_roots(f: &BinaryForm, max_ext: u32, budget: u64) -> Result<Vec<RootOrbit>> {
    let d = f.degree().ok_or(Error::ZeroForm)?;
    if max_ext == 0 {
        return Err(Error::InvalidInput("max_ext must be at least 1".into()));
    }
    let base = f.field();
    let q = base.order();
    let largest = q.checked_pow(max_ext).unwrap_or(u64::MAX);
    if largest > budget {
        return Err(Error::ExtensionTooLarge { order: largest, limit: budget });
    }
    let mut out = Vec::new();
    for m in 1..=max_ext {
        let ext = Extension::new(base, m)?;
        let field = ext.field();
        let lifted = f.lift(&ext);
        let affine = lifted.dehomogenize_u();
        if m == 1 {
            // [0:1]: u divides f to the order of the degree drop of f(1, t)
            let mult = d - affine.degree().unwrap_or(0);
            if mult > 0 {
                out.push(RootOrbit { degree: 1, field: field.clone(), point: ProjPoint1 { u: field.zero(), v: field.one() }, multiplicity: mult });
            }
        }
        for t in field.elements() {
            if ext.degree_of(t) != m || !affine.eval(field, t).is_zero() {
                continue;
            }
            let mut conj = ext.frobenius(t);
            let mut least = true;
            while conj != t {
                if conj < t {
                    least = false;
                    break;
                }
                conj = ext.frobenius(conj);
            }
            if !least {
                continue;
            }
            out.push(RootOrbit {
                degree: m,
                field: field.clone(),
                point: ProjPoint1::affine(field, t),
                multiplicity: affine.root_multiplicity(field, t),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfpoly::Fe;

    #[test]
    fn rational_roots() {
        let f3 = Field::prime(3).unwrap();
        let uv = BinaryForm::from_i64s(&f3, &[0, 1, 0]);
        let roots = projective_roots(&uv, 1, DEFAULT_ROOT_BUDGET).unwrap();
        let got: Vec<_> = roots.iter().map(|r| (r.point, r.multiplicity)).collect();
        assert_eq!(got, vec![(ProjPoint1 { u: Fe::ZERO, v: f3.one() }, 1), (ProjPoint1 { u: f3.one(), v: Fe::ZERO }, 1)]);

        let f5 = Field::prime(5).unwrap();
        let sum_sq = BinaryForm::from_i64s(&f5, &[1, 0, 1]);
        let roots = projective_roots(&sum_sq, 1, DEFAULT_ROOT_BUDGET).unwrap();
        let pts: Vec<_> = roots.iter().map(|r| (r.point.v.raw(), r.multiplicity)).collect();
        assert_eq!(pts, vec![(2, 1), (3, 1)]);
    }

    #[test]
    fn conjugate_pair_reported_once() {
        let f3 = Field::prime(3).unwrap();
        let sum_sq = BinaryForm::from_i64s(&f3, &[1, 0, 1]);
        let roots = projective_roots(&sum_sq, 2, DEFAULT_ROOT_BUDGET).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].degree, 2);
        assert_eq!(roots[0].multiplicity, 1);
        assert!(projective_roots(&sum_sq, 1, DEFAULT_ROOT_BUDGET).unwrap().is_empty());
    }

    #[test]
    fn multiplicities_and_budget() {
        let f3 = Field::prime(3).unwrap();
        let u2v = BinaryForm::from_i64s(&f3, &[0, 1, 0, 0]);
        let roots = projective_roots(&u2v, 1, DEFAULT_ROOT_BUDGET).unwrap();
        let got: Vec<_> = roots.iter().map(|r| r.multiplicity).collect();
        assert_eq!(got, vec![2, 1]);
        assert!(matches!(projective_roots(&u2v, 20, 1000), Err(Error::ExtensionTooLarge { .. })));
    }
}
