use std::fmt;

use super::extension::Extension;
use super::field::{Fe, Field};
use super::unipoly::UniPoly;
use crate::error::{Error, Result};

/// A point of `P^1`, normalized so the first nonzero coordinate is one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint1 {
    pub u: Fe,
    pub v: Fe,
}

impl ProjPoint1 {
    pub fn new(field: &Field, u: Fe, v: Fe) -> Result<Self> {
        if !u.is_zero() {
            let inv = field.inv(u)?;
            Ok(ProjPoint1 { u: field.one(), v: field.mul(v, inv) })
        } else if !v.is_zero() {
            Ok(ProjPoint1 { u: Fe::ZERO, v: field.one() })
        } else {
            Err(Error::InvalidInput("[0:0] is not a point of P^1".into()))
        }
    }

    /// `[1:0]`, where `v` vanishes.
    pub fn infinity(field: &Field) -> Self {
        ProjPoint1 { u: field.one(), v: Fe::ZERO }
    }

    pub fn affine(field: &Field, t: Fe) -> Self {
        ProjPoint1 { u: field.one(), v: t }
    }

    pub fn lift(&self, ext: &Extension) -> Self {
        ProjPoint1 { u: ext.embed(self.u), v: ext.embed(self.v) }
    }

    /// Back to the base field, if the point is rational over it.
    pub fn restrict(&self, ext: &Extension) -> Option<Self> {
        Some(ProjPoint1 { u: ext.restrict(self.u)?, v: ext.restrict(self.v)? })
    }

    /// All points of `P^1(F)` in lexicographic order: `[0:1]`, `[1:0]`, `[1:1]`, ..
    pub fn all(field: &Field) -> impl Iterator<Item = ProjPoint1> + '_ {
        std::iter::once(ProjPoint1 { u: Fe::ZERO, v: field.one() }).chain(field.elements().map(move |t| ProjPoint1::affine(field, t)))
    }

    pub fn display(&self, field: &Field) -> String {
        format!("{}:{}", fmt_scalar(field, self.u), fmt_scalar(field, self.v))
    }
}

pub(crate) fn fmt_scalar(field: &Field, a: Fe) -> String {
    if field.degree() == 1 {
        a.raw().to_string()
    } else {
        let r: Vec<String> = field.residues(a).iter().map(|c| c.to_string()).collect();
        format!("({})", r.join(","))
    }
}

/// A homogeneous form in `(u, v)`. `coeffs[i]` is the coefficient of
/// `u^(d-i) v^i`. The zero form has no coefficients and no degree.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryForm {
    field: Field,
    coeffs: Vec<Fe>,
}

impl BinaryForm {
    /// A form of degree `coeffs.len() - 1`; all-zero input gives the zero form.
    pub fn new(field: &Field, coeffs: Vec<Fe>) -> Self {
        if coeffs.iter().all(|c| c.is_zero()) {
            return Self::zero(field);
        }
        BinaryForm { field: field.clone(), coeffs }
    }

    pub fn from_i64s(field: &Field, coeffs: &[i64]) -> Self {
        Self::new(field, coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn zero(field: &Field) -> Self {
        BinaryForm { field: field.clone(), coeffs: Vec::new() }
    }

    pub fn constant(field: &Field, c: Fe) -> Self {
        Self::new(field, vec![c])
    }

    pub fn u(field: &Field) -> Self {
        Self::new(field, vec![field.one(), Fe::ZERO])
    }

    pub fn v(field: &Field) -> Self {
        Self::new(field, vec![Fe::ZERO, field.one()])
    }

    /// The linear form `v_b u - u_b v`, vanishing exactly at `b`.
    pub fn vanishing_at(field: &Field, b: &ProjPoint1) -> Self {
        Self::new(field, vec![b.v, field.neg(b.u)])
    }

    pub fn field(&self) -> &Field {
        &self.field
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

    /// Whether the form may sit in a slot of degree `deg` (the zero form
    /// fits any slot, including negative ones).
    pub fn fits_degree(&self, deg: i64) -> bool {
        match self.degree() {
            None => true,
            Some(d) => deg >= 0 && d as i64 == deg,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.field.check_same(&other.field)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::DegreeMismatch { left: self.coeffs.len() - 1, right: other.coeffs.len() - 1 });
        }
        let f = &self.field;
        Ok(Self::new(f, self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f.add(a, b)).collect()))
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        BinaryForm { field: f.clone(), coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: Fe) -> Self {
        let f = &self.field;
        Self::new(f, self.coeffs.iter().map(|&x| f.mul(x, c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.field.check_same(&other.field)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(&self.field));
        }
        let f = &self.field;
        let mut out = vec![Fe::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Ok(Self::new(f, out))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(&self.field, self.field.one());
        for _ in 0..n {
            acc = acc.mul(self).expect("same field");
        }
        acc
    }

    /// Literal substitution `f(u, v)`.
    pub fn evaluate(&self, u: Fe, v: Fe) -> Fe {
        let f = &self.field;
        // sum c_i u^(d-i) v^i, Horner in the ratio-free form
        let mut acc = Fe::ZERO;
        let mut vpow = f.one();
        let d = self.coeffs.len();
        let mut upows = vec![f.one(); d];
        for i in (0..d.saturating_sub(1)).rev() {
            upows[i] = f.mul(upows[i + 1], u);
        }
        for (i, &c) in self.coeffs.iter().enumerate() {
            acc = f.add(acc, f.mul(c, f.mul(upows[i], vpow)));
            vpow = f.mul(vpow, v);
        }
        acc
    }

    pub fn evaluate_at(&self, b: &ProjPoint1) -> Fe {
        self.evaluate(b.u, b.v)
    }

    pub fn derivative_u(&self) -> Self {
        let f = &self.field;
        let Some(d) = self.degree() else { return self.clone() };
        Self::new(f, (0..d).map(|i| f.mul(self.coeffs[i], f.from_u64((d - i) as u64))).collect())
    }

    pub fn derivative_v(&self) -> Self {
        let f = &self.field;
        let Some(d) = self.degree() else { return self.clone() };
        Self::new(f, (1..=d).map(|i| f.mul(self.coeffs[i], f.from_u64(i as u64))).collect())
    }

    /// `f(t, 1)` as a polynomial in `t`.
    pub fn dehomogenize_v(&self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().rev().copied().collect())
    }

    /// `f(1, t)` as a polynomial in `t`.
    pub fn dehomogenize_u(&self) -> UniPoly {
        UniPoly::new(self.coeffs.clone())
    }

    /// Multiplicity of the root `[1:0]`: the number of leading zero coefficients.
    fn v_adic_order(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Scale so the first nonzero coefficient is one.
    pub fn monic(&self) -> Self {
        match self.coeffs.iter().find(|c| !c.is_zero()) {
            Some(&lead) => self.scale(self.field.inv(lead).expect("nonzero")),
            None => self.clone(),
        }
    }

    /// Monic gcd (first nonzero coefficient in the `u`-ordering equals one).
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        self.field.check_same(&other.field)?;
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Err(Error::ZeroForm),
            (true, false) => return Ok(other.monic()),
            (false, true) => return Ok(self.monic()),
            _ => {}
        }
        let f = &self.field;
        let a = self.v_adic_order().min(other.v_adic_order());
        let g = self.dehomogenize_v().gcd(f, &other.dehomogenize_v());
        let dg = g.degree().expect("nonzero inputs have nonzero gcd");
        let total = dg + a;
        let mut coeffs = vec![Fe::ZERO; total + 1];
        // t^j -> u^j v^(dg-j+a)
        for (j, &c) in g.coeffs().iter().enumerate() {
            coeffs[dg - j + a] = c;
        }
        Ok(Self::new(f, coeffs))
    }

    /// `self / divisor`, failing unless the division is exact.
    pub fn divide_exact(&self, divisor: &Self) -> Result<Self> {
        self.field.check_same(&divisor.field)?;
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let Some(df) = self.degree() else { return Ok(self.clone()) };
        if df < dd {
            return Err(Error::InexactDivision);
        }
        let f = &self.field;
        let (q, r) = self.dehomogenize_u().div_rem(f, &divisor.dehomogenize_u())?;
        if !r.is_zero() || q.degree().is_some_and(|dq| dq > df - dd) {
            return Err(Error::InexactDivision);
        }
        let mut coeffs = q.coeffs().to_vec();
        coeffs.resize(df - dd + 1, Fe::ZERO);
        Ok(Self::new(f, coeffs))
    }

    /// No repeated root over the algebraic closure.
    pub fn is_squarefree(&self) -> Result<bool> {
        let d = self.degree().ok_or(Error::ZeroForm)?;
        let f = &self.field;
        let affine = self.dehomogenize_v();
        let drop = d - affine.degree().expect("nonzero");
        if drop > 1 {
            return Ok(false);
        }
        let g = affine.gcd(f, &affine.derivative(f));
        Ok(g.degree() == Some(0))
    }

    pub fn lift(&self, ext: &Extension) -> Self {
        BinaryForm { field: ext.field().clone(), coeffs: self.coeffs.iter().map(|&c| ext.embed(c)).collect() }
    }

    /// Coefficients pulled back to the base field, if they all lie in it.
    pub fn restrict(&self, ext: &Extension) -> Option<Self> {
        let coeffs = self.coeffs.iter().map(|&c| ext.restrict(c)).collect::<Option<Vec<_>>>()?;
        Some(BinaryForm { field: ext.base().clone(), coeffs })
    }

    /// Residue encoding used by the file formats: one entry per coefficient.
    pub fn residue_lists(&self) -> Vec<Vec<u64>> {
        self.coeffs.iter().map(|&c| self.field.residues(c)).collect()
    }
}

impl fmt::Debug for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(d) = self.degree() else { return write!(f, "0") };
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match (d - i, i) {
                (0, 0) => String::new(),
                (a, b) => {
                    let part = |var: &str, e: usize| match e {
                        0 => String::new(),
                        1 => var.to_string(),
                        e => format!("{var}^{e}"),
                    };
                    format!("{}{}", part("u", a), part("v", b))
                }
            };
            let coef = fmt_scalar(&self.field, c);
            terms.push(match (coef.as_str(), mono.is_empty()) {
                (_, true) => coef,
                ("1", false) => mono,
                (_, false) => format!("{coef}*{mono}"),
            });
        }
        write!(f, "{}", terms.join(" + "))
    }
}
