//! The Chow ring of a projective bundle `P(E)` of rank `n + 2` over a curve,
//! with integer coefficients, and the symbolic check of `h(X) = n^n Delta`.
//!
//! Classes are combinations of `xi^a * beta` where `beta` is `1`, `eE` or
//! `eI` (first Chern classes of `E` and `I` pulled back from the curve).
//! Products of two pullbacks vanish and `xi^(n+2) = -eE * xi^(n+1)`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};

/// Index of the pullback factor of a monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pullback {
    One = 0,
    E = 1,
    I = 2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChowClass {
    n: u32,
    /// `terms[a][beta]` is the coefficient of `xi^a * beta`, `a <= n + 1`.
    terms: Vec<[i128; 3]>,
}

impl ChowClass {
    pub fn zero(n: u32) -> Self {
        ChowClass { n, terms: vec![[0; 3]; n as usize + 2] }
    }

    /// `c * xi^a * beta`, reduced.
    pub fn monomial(n: u32, c: i128, a: u32, beta: Pullback) -> Self {
        let mut out = Self::zero(n);
        out.add_monomial(c, a as usize, beta as usize);
        out
    }

    pub fn one(n: u32) -> Self {
        Self::monomial(n, 1, 0, Pullback::One)
    }

    pub fn xi(n: u32) -> Self {
        Self::monomial(n, 1, 1, Pullback::One)
    }

    pub fn eps_e(n: u32) -> Self {
        Self::monomial(n, 1, 0, Pullback::E)
    }

    pub fn eps_i(n: u32) -> Self {
        Self::monomial(n, 1, 0, Pullback::I)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn coefficient(&self, a: u32, beta: Pullback) -> i128 {
        self.terms.get(a as usize).map_or(0, |t| t[beta as usize])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| *t == [0; 3])
    }

    fn add_monomial(&mut self, c: i128, a: usize, beta: usize) {
        if c == 0 {
            return;
        }
        let top = self.n as usize + 1;
        if a <= top {
            self.terms[a][beta] += c;
        } else if a == top + 1 && beta == 0 {
            self.terms[top][1] -= c;
        }
        // xi^(n+3) and pullback * xi^(n+2) both vanish
    }

    pub fn scale(&self, c: i128) -> Self {
        ChowClass { n: self.n, terms: self.terms.iter().map(|t| t.map(|x| x * c)).collect() }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch);
        }
        let mut out = Self::zero(self.n);
        for (a1, t1) in self.terms.iter().enumerate() {
            for (a2, t2) in other.terms.iter().enumerate() {
                for b1 in 0..3 {
                    for b2 in 0..3 {
                        if b1 != 0 && b2 != 0 {
                            continue;
                        }
                        out.add_monomial(t1[b1] * t2[b2], a1 + a2, b1.max(b2));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.n);
        for _ in 0..k {
            out = out.multiply(self).expect("same n");
        }
        out
    }

    /// Degree of a top-dimensional class as a functional in `degE`, `degI`.
    pub fn degree(&self) -> Result<LinearForm> {
        let top = self.n as usize + 1;
        for (a, t) in self.terms.iter().enumerate() {
            let nonzero_top = |b: usize| a == top && b != 0;
            if (0..3).any(|b| t[b] != 0 && !nonzero_top(b)) {
                return Err(Error::NotTopDimensional);
            }
        }
        Ok(LinearForm { deg_e: self.terms[top][1], deg_i: self.terms[top][2] })
    }

    fn zip(&self, other: &Self, f: impl Fn(i128, i128) -> i128) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch);
        }
        let terms = self.terms.iter().zip(&other.terms).map(|(x, y)| std::array::from_fn(|b| f(x[b], y[b]))).collect();
        Ok(ChowClass { n: self.n, terms })
    }
}

impl Add for &ChowClass {
    type Output = Result<ChowClass>;
    fn add(self, other: &ChowClass) -> Result<ChowClass> {
        self.zip(other, |x, y| x + y)
    }
}

impl Sub for &ChowClass {
    type Output = Result<ChowClass>;
    fn sub(self, other: &ChowClass) -> Result<ChowClass> {
        self.zip(other, |x, y| x - y)
    }
}

impl Neg for &ChowClass {
    type Output = ChowClass;
    fn neg(self) -> ChowClass {
        self.scale(-1)
    }
}

impl fmt::Display for ChowClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (a, t) in self.terms.iter().enumerate().rev() {
            for (b, name) in [(1, "eE"), (2, "eI"), (0, "")] {
                if t[b] == 0 {
                    continue;
                }
                let mut factors = Vec::new();
                if !name.is_empty() {
                    factors.push(name.to_string());
                }
                match a {
                    0 => {}
                    1 => factors.push("xi".into()),
                    _ => factors.push(format!("xi^{a}")),
                }
                parts.push((t[b], factors.join("*")));
            }
        }
        write_terms(f, &parts)
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, parts: &[(i128, String)]) -> fmt::Result {
    if parts.is_empty() {
        return write!(f, "0");
    }
    for (i, (c, m)) in parts.iter().enumerate() {
        let sign = if *c < 0 { "-" } else { "+" };
        match (i, sign) {
            (0, "+") => {}
            (0, _) => write!(f, "-")?,
            _ => write!(f, " {sign} ")?,
        }
        let c = c.unsigned_abs();
        match (c, m.is_empty()) {
            (_, true) => write!(f, "{c}")?,
            (1, false) => write!(f, "{m}")?,
            _ => write!(f, "{c}*{m}")?,
        }
    }
    Ok(())
}

/// `deg_e * degE + deg_i * degI` with `degE`, `degI` kept symbolic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LinearForm {
    pub deg_e: i128,
    pub deg_i: i128,
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> =
            [(self.deg_e, "degE"), (self.deg_i, "degI")].into_iter().filter(|(c, _)| *c != 0).map(|(c, m)| (c, m.to_string())).collect();
        write_terms(f, &parts)
    }
}

impl Neg for LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        LinearForm { deg_e: -self.deg_e, deg_i: -self.deg_i }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeightFormulaReport {
    pub n: u32,
    /// `h` in terms of `degE` and `degI`.
    pub expression: String,
    /// `Delta` in terms of `degE` and `degI`.
    pub delta: String,
    /// `h` as a multiple of `Delta`, or the raw expression if it is not one.
    pub identity: String,
    pub expected: String,
    pub holds: bool,
}

/// Expands `h = -deg((eE + n xi - eI)^(n+1) (2 xi + eI))` and compares it with
/// `n^n Delta` where `Delta = -2 degE + (n+2) degI`.
pub fn verify_height_formula(n: u32) -> Result<HeightFormulaReport> {
    if !(1..=6).contains(&n) {
        return Err(Error::Precondition(format!("relative dimension {n} is outside 1..=6")));
    }
    let xi = ChowClass::xi(n);
    let e = ChowClass::eps_e(n);
    let i = ChowClass::eps_i(n);
    let tangent = (&(&e + &xi.scale(n as i128))? - &i)?;
    let total = (&xi.scale(2) + &i)?;
    let h = -tangent.pow(n + 1).multiply(&total)?.degree()?;
    let delta = LinearForm { deg_e: -2, deg_i: n as i128 + 2 };
    let expected = (n as i128).pow(n);
    // h = k * Delta iff the coefficient vectors are proportional
    let multiple = (h.deg_e * delta.deg_i == h.deg_i * delta.deg_e && h.deg_e % delta.deg_e == 0).then(|| h.deg_e / delta.deg_e);
    let identity = match multiple {
        Some(k) => format!("{k}*Delta"),
        None => h.to_string(),
    };
    Ok(HeightFormulaReport {
        n,
        expression: h.to_string(),
        delta: delta.to_string(),
        identity,
        expected: format!("{expected}*Delta"),
        holds: multiple == Some(expected),
    })
}
