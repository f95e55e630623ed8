use std::collections::HashMap;

use super::field::{checked_pow, Fe, Field};
use super::unipoly::UniPoly;
use crate::error::{Error, Result};

/// Extensions whose elements must be scanned to locate the base field inside
/// them are capped at this order.
const SCAN_LIMIT: u64 = 1 << 24;

/// A field extension `F_{q^m} / F_q` together with the embedding of the base.
#[derive(Clone, Debug)]
pub struct Extension {
    base: Field,
    ext: Field,
    degree: u32,
    /// images of the power basis `1, a, a^2, ..` of the base
    basis_images: Vec<Fe>,
    /// inverse of the embedding, only for `k > 1` bases
    restrict_table: Option<HashMap<Fe, Fe>>,
}

impl Extension {
    /// The trivial extension of degree one.
    pub fn identity(base: &Field) -> Self {
        let basis_images = if base.degree() == 1 {
            vec![base.one()]
        } else {
            // alpha^i in the packed layout: residue i set to one
            (0..base.degree() as usize)
                .map(|i| {
                    let mut r = vec![0u64; base.degree() as usize];
                    r[i] = 1;
                    base.from_residues(&r).expect("valid residues")
                })
                .collect()
        };
        Extension { base: base.clone(), ext: base.clone(), degree: 1, basis_images, restrict_table: None }
    }

    /// The degree-`m` extension, with the lexicographically least modulus of
    /// degree `k*m` over the prime field.
    pub fn new(base: &Field, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidField("extension degree must be positive".into()));
        }
        if m == 1 {
            return Ok(Self::identity(base));
        }
        let p = base.characteristic();
        let k = base.degree();
        let total = k.checked_mul(m).ok_or(Error::ExtensionTooLarge { order: u64::MAX, limit: SCAN_LIMIT })?;
        let order = checked_pow(p, total).ok_or(Error::ExtensionTooLarge { order: u64::MAX, limit: SCAN_LIMIT })?;
        let ext = Field::new(p, total)?;
        if k == 1 {
            return Ok(Extension { base: base.clone(), ext: ext.clone(), degree: m, basis_images: vec![ext.one()], restrict_table: None });
        }
        if order > SCAN_LIMIT {
            return Err(Error::ExtensionTooLarge { order, limit: SCAN_LIMIT });
        }
        let mut modulus: Vec<Fe> = base.spec().modulus().iter().map(|&c| ext.from_u64(c)).collect();
        modulus.push(ext.one());
        let modulus = UniPoly::new(modulus);
        let alpha = ext.elements().find(|&x| modulus.eval(&ext, x).is_zero()).expect("the base modulus splits in the extension");
        let mut basis_images = Vec::with_capacity(k as usize);
        let mut acc = ext.one();
        for _ in 0..k {
            basis_images.push(acc);
            acc = ext.mul(acc, alpha);
        }
        let mut out = Extension { base: base.clone(), ext, degree: m, basis_images, restrict_table: None };
        let table = base.elements().map(|x| (out.embed(x), x)).collect();
        out.restrict_table = Some(table);
        Ok(out)
    }

    pub fn base(&self) -> &Field {
        &self.base
    }

    pub fn field(&self) -> &Field {
        &self.ext
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_trivial(&self) -> bool {
        self.degree == 1
    }

    pub fn embed(&self, x: Fe) -> Fe {
        if self.degree == 1 {
            return x;
        }
        if self.base.degree() == 1 {
            return self.ext.from_u64(x.raw());
        }
        let r = self.base.residues(x);
        self.ext.sum(r.iter().zip(&self.basis_images).map(|(&c, &img)| self.ext.mul(self.ext.from_u64(c), img)))
    }

    /// Inverse of [`embed`](Self::embed); `None` outside the base field.
    pub fn restrict(&self, y: Fe) -> Option<Fe> {
        if self.degree == 1 {
            return Some(y);
        }
        if self.base.degree() == 1 {
            let r = self.ext.residues(y);
            return r[1..].iter().all(|&c| c == 0).then(|| self.base.from_u64(r[0]));
        }
        self.restrict_table.as_ref().and_then(|t| t.get(&y).copied())
    }

    /// The generator `y -> y^q` of the Galois group over the base.
    pub fn frobenius(&self, y: Fe) -> Fe {
        self.ext.frobenius(y, self.base.degree())
    }

    /// Degree over the base of the smallest subfield containing `y`.
    pub fn degree_of(&self, y: Fe) -> u32 {
        let mut x = self.frobenius(y);
        let mut d = 1;
        while x != y {
            x = self.frobenius(x);
            d += 1;
        }
        d
    }

    /// `Tr_{ext/base}(y)`, as a base element.
    pub fn trace(&self, y: Fe) -> Fe {
        let mut acc = y;
        let mut x = y;
        for _ in 1..self.degree {
            x = self.frobenius(x);
            acc = self.ext.add(acc, x);
        }
        self.restrict(acc).expect("the trace lies in the base field")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_is_a_homomorphism() {
        for (p, k, m) in [(3, 1, 2), (3, 2, 2), (5, 1, 3), (3, 2, 3)] {
            let base = Field::new(p, k).unwrap();
            let e = Extension::new(&base, m).unwrap();
            let f = e.field();
            for a in base.elements() {
                for b in base.elements() {
                    assert_eq!(e.embed(base.add(a, b)), f.add(e.embed(a), e.embed(b)));
                    assert_eq!(e.embed(base.mul(a, b)), f.mul(e.embed(a), e.embed(b)));
                }
                assert_eq!(e.restrict(e.embed(a)), Some(a));
            }
            let inside = f.elements().filter(|&y| e.restrict(y).is_some()).count() as u64;
            assert_eq!(inside, base.order());
        }
    }

    #[test]
    fn trace_is_base_linear() {
        let base = Field::prime(3).unwrap();
        let e = Extension::new(&base, 2).unwrap();
        let f = e.field();
        for y in f.elements() {
            assert_eq!(e.trace(e.field().add(y, y)), base.add(e.trace(y), e.trace(y)));
            assert_eq!(e.degree_of(y) == 1, e.restrict(y).is_some());
        }
        assert_eq!(e.trace(f.one()), base.from_u64(2));
    }
}
