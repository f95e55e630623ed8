//! Dense univariate polynomials over a [`Field`]; coefficients ascending.
//!
//! The field is passed to every operation rather than stored, so these stay
//! cheap to build inside tight loops.

use super::field::{Fe, Field};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UniPoly {
    coeffs: Vec<Fe>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Fe) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<Fe> {
        self.coeffs.last().copied()
    }

    pub fn add(&self, f: &Field, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[Fe], i: usize| v.get(i).copied().unwrap_or(Fe::ZERO);
        Self::new((0..n).map(|i| f.add(get(&self.coeffs, i), get(&other.coeffs, i))).collect())
    }

    pub fn neg(&self, f: &Field) -> Self {
        UniPoly { coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect() }
    }

    pub fn sub(&self, f: &Field, other: &Self) -> Self {
        self.add(f, &other.neg(f))
    }

    pub fn scale(&self, f: &Field, c: Fe) -> Self {
        Self::new(self.coeffs.iter().map(|&x| f.mul(x, c)).collect())
    }

    pub fn mul(&self, f: &Field, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Fe::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::new(out)
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, f: &Field, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = f.inv(divisor.coeffs[dd])?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![Fe::ZERO; rem.len() - dd];
        for top in (dd..rem.len()).rev() {
            let c = rem[top];
            if c.is_zero() {
                continue;
            }
            let factor = f.mul(c, lead_inv);
            quot[top - dd] = factor;
            for (i, &dc) in divisor.coeffs.iter().enumerate() {
                let idx = top - dd + i;
                rem[idx] = f.sub(rem[idx], f.mul(factor, dc));
            }
        }
        Ok((Self::new(quot), Self::new(rem)))
    }

    pub fn rem(&self, f: &Field, divisor: &Self) -> Result<Self> {
        Ok(self.div_rem(f, divisor)?.1)
    }

    pub fn monic(&self, f: &Field) -> Self {
        match self.lead() {
            Some(l) => self.scale(f, f.inv(l).expect("lead is nonzero")),
            None => Self::zero(),
        }
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, f: &Field, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(f, &b).expect("b is nonzero");
            a = b;
            b = r;
        }
        a.monic(f)
    }

    pub fn derivative(&self, f: &Field) -> Self {
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| f.mul(c, f.from_u64(i as u64))).collect())
    }

    pub fn eval(&self, f: &Field, x: Fe) -> Fe {
        self.coeffs.iter().rev().fold(Fe::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// `self^e mod modulus`.
    pub fn pow_mod(&self, f: &Field, mut e: u64, modulus: &Self) -> Self {
        let mut base = self.rem(f, modulus).expect("nonzero modulus");
        let mut acc = UniPoly::constant(f.one()).rem(f, modulus).expect("nonzero modulus");
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(f, &base).rem(f, modulus).expect("nonzero modulus");
            }
            base = base.mul(f, &base).rem(f, modulus).expect("nonzero modulus");
            e >>= 1;
        }
        acc
    }

    /// Order of vanishing at `x`.
    pub fn root_multiplicity(&self, f: &Field, x: Fe) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let linear = UniPoly::new(vec![f.neg(x), f.one()]);
        let mut cur = self.clone();
        let mut m = 0;
        loop {
            let (q, r) = cur.div_rem(f, &linear).expect("linear divisor");
            if !r.is_zero() {
                return m;
            }
            cur = q;
            m += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(f: &Field, c: &[i64]) -> UniPoly {
        UniPoly::new(c.iter().map(|&x| f.from_i64(x)).collect())
    }

    #[test]
    fn division_and_gcd() {
        let f = Field::prime(5).unwrap();
        // (x-1)(x-2) and (x-1)(x+1)
        let a = poly(&f, &[2, -3, 1]);
        let b = poly(&f, &[-1, 0, 1]);
        assert_eq!(a.gcd(&f, &b), poly(&f, &[-1, 1]));
        let (q, r) = a.mul(&f, &b).div_rem(&f, &b).unwrap();
        assert_eq!(q, a);
        assert!(r.is_zero());
        assert_eq!(a.root_multiplicity(&f, f.from_u64(2)), 1);
        assert_eq!(a.mul(&f, &a).root_multiplicity(&f, f.from_u64(1)), 2);
    }

    #[test]
    fn derivative_vanishes_on_pth_powers() {
        let f = Field::prime(3).unwrap();
        let x3 = poly(&f, &[0, 0, 0, 1]);
        assert!(x3.derivative(&f).is_zero());
    }
}
