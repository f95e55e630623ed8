//! Finite fields `F_{p^k}` with `p` odd.
//!
//! Elements are packed into a single `u64`: the residues `c_0, .., c_{k-1}`
//! of the power-basis representation are written as base-`p` digits with `c_0`
//! most significant, so integer order on the packed value is lexicographic
//! order on the residue sequence. Enumeration order is `0, 1, .., q-1`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::unipoly::UniPoly;
use crate::error::{Error, Result};

/// Fields above this size do not get log/exp tables.
const TABLE_LIMIT: u64 = 1 << 20;

/// Largest supported extension degree over the prime field.
pub const MAX_DEGREE: u32 = 48;

/// A field element in packed canonical form. Only meaningful together with
/// the [`Field`] that produced it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub(crate) u64);

impl Fe {
    pub const ZERO: Fe = Fe(0);

    /// The packed canonical integer, in `[0, q)`.
    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Description of `F_{p^k}`: the characteristic, the degree and the monic
/// modulus `x^k + c_{k-1} x^{k-1} + .. + c_0` (stored as `c_0..c_{k-1}`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u64,
    k: u32,
    modulus: Vec<u64>,
}

impl FieldSpec {
    /// Prime field `F_p`.
    pub fn prime(p: u64) -> Result<Self> {
        check_odd_prime(p)?;
        Ok(FieldSpec { p, k: 1, modulus: Vec::new() })
    }

    /// `F_{p^k}` with the lexicographically least monic irreducible modulus.
    pub fn new(p: u64, k: u32) -> Result<Self> {
        check_odd_prime(p)?;
        if k == 0 || k > MAX_DEGREE {
            return Err(Error::InvalidField(format!("unsupported extension degree {k}")));
        }
        if k == 1 {
            return Ok(FieldSpec { p, k, modulus: Vec::new() });
        }
        let q = checked_pow(p, k).ok_or_else(|| Error::InvalidField(format!("{p}^{k} does not fit in 63 bits")))?;
        let fp = Field::prime(p)?;
        // packed integers enumerate coefficient tuples lexicographically
        for packed in 0..q {
            let coeffs = unpack_digits(packed, p, k);
            if is_irreducible_monic(&fp, &coeffs) {
                return Ok(FieldSpec { p, k, modulus: coeffs });
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    /// `F_{p^k}` with an explicit modulus, verified irreducible.
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self> {
        check_odd_prime(p)?;
        let k = modulus.len() as u32;
        if k == 0 {
            return Self::prime(p);
        }
        if k > MAX_DEGREE || checked_pow(p, k).is_none() {
            return Err(Error::InvalidField(format!("unsupported extension degree {k}")));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField("modulus coefficient out of range".into()));
        }
        if k == 1 {
            // x + c is linear; the field is just F_p
            return Self::prime(p);
        }
        let fp = Field::prime(p)?;
        if !is_irreducible_monic(&fp, &modulus) {
            return Err(Error::InvalidField("modulus is reducible".into()));
        }
        Ok(FieldSpec { p, k, modulus })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> u64 {
        checked_pow(self.p, self.k).expect("validated at construction")
    }
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

struct Inner {
    spec: FieldSpec,
    q: u64,
    /// place value of residue `i`, i.e. `p^(k-1-i)`
    place: Vec<u64>,
    tables: Option<Tables>,
    two_adicity: u32,
    odd_part: u64,
    nonresidue: Fe,
}

/// A finite field of odd characteristic. Cheap to clone.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inner.spec.k == 1 {
            write!(f, "F_{}", self.inner.spec.p)
        } else {
            write!(f, "F_{}^{}{:?}", self.inner.spec.p, self.inner.spec.k, self.inner.spec.modulus)
        }
    }
}

impl Field {
    pub fn prime(p: u64) -> Result<Self> {
        Ok(Self::from_spec(FieldSpec::prime(p)?))
    }

    pub fn new(p: u64, k: u32) -> Result<Self> {
        Ok(Self::from_spec(FieldSpec::new(p, k)?))
    }

    pub fn from_spec(spec: FieldSpec) -> Self {
        let q = spec.order();
        let k = spec.k as usize;
        let mut place = vec![1u64; k];
        for i in (0..k.saturating_sub(1)).rev() {
            place[i] = place[i + 1] * spec.p;
        }
        let mut two_adicity = 0;
        let mut odd_part = q - 1;
        while odd_part.is_multiple_of(2) {
            odd_part /= 2;
            two_adicity += 1;
        }
        let mut field = Field { inner: Arc::new(Inner { spec, q, place, tables: None, two_adicity, odd_part, nonresidue: Fe(0) }) };
        let nonresidue = (1..q).map(Fe).find(|&a| field.pow(a, (q - 1) / 2) != field.one()).expect("odd order fields have nonresidues");
        let tables = if q <= TABLE_LIMIT { Some(field.build_tables()) } else { None };
        let inner = Arc::get_mut(&mut field.inner).expect("not shared yet");
        inner.nonresidue = nonresidue;
        inner.tables = tables;
        field
    }

    fn build_tables(&self) -> Tables {
        let q = self.inner.q;
        let n = q - 1;
        let primes = prime_factors(n);
        let generator = (1..q).map(Fe).find(|&g| primes.iter().all(|&r| self.pow(g, n / r) != self.one())).expect("multiplicative group is cyclic");
        let mut exp = vec![0u32; n as usize];
        let mut log = vec![0u32; q as usize];
        let mut acc = self.one();
        for (i, slot) in exp.iter_mut().enumerate() {
            *slot = acc.0 as u32;
            log[acc.0 as usize] = i as u32;
            acc = self.mul_slow(acc, generator);
        }
        Tables { exp, log }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.inner.spec
    }

    pub fn characteristic(&self) -> u64 {
        self.inner.spec.p
    }

    pub fn degree(&self) -> u32 {
        self.inner.spec.k
    }

    /// Number of elements `q = p^k`.
    pub fn order(&self) -> u64 {
        self.inner.q
    }

    pub fn same_as(&self, other: &Field) -> bool {
        self == other
    }

    pub fn zero(&self) -> Fe {
        Fe(0)
    }

    pub fn one(&self) -> Fe {
        Fe(self.inner.place[0])
    }

    /// The image of the integer `n` under `Z -> F`.
    pub fn from_i64(&self, n: i64) -> Fe {
        let p = self.inner.spec.p as i128;
        let r = (n as i128).rem_euclid(p) as u64;
        Fe(r * self.inner.place[0])
    }

    pub fn from_u64(&self, n: u64) -> Fe {
        Fe((n % self.inner.spec.p) * self.inner.place[0])
    }

    /// Residues `c_0..c_{k-1}` in the power basis.
    pub fn residues(&self, a: Fe) -> Vec<u64> {
        unpack_digits(a.0, self.inner.spec.p, self.inner.spec.k)
    }

    pub fn from_residues(&self, residues: &[u64]) -> Result<Fe> {
        let k = self.inner.spec.k as usize;
        if residues.len() != k {
            return Err(Error::InvalidField(format!("expected {k} residues, got {}", residues.len())));
        }
        let p = self.inner.spec.p;
        let mut acc = 0u64;
        for &c in residues {
            if c >= p {
                return Err(Error::InvalidField(format!("residue {c} not reduced mod {p}")));
            }
            acc = acc * p + c;
        }
        Ok(Fe(acc))
    }

    /// Validates a raw packed value.
    pub fn element(&self, raw: u64) -> Result<Fe> {
        if raw < self.inner.q {
            Ok(Fe(raw))
        } else {
            Err(Error::InvalidField(format!("{raw} is not an element of a field of order {}", self.inner.q)))
        }
    }

    /// All elements in canonical (lexicographic) order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.inner.q).map(Fe)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(0..self.inner.q))
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let p = self.inner.spec.p;
        if self.inner.spec.k == 1 {
            let s = a.0 + b.0;
            return Fe(if s >= p { s - p } else { s });
        }
        let (mut x, mut y, mut out) = (a.0, b.0, 0u64);
        for &pl in self.inner.place.iter().rev() {
            let s = x % p + y % p;
            out += (if s >= p { s - p } else { s }) * pl;
            x /= p;
            y /= p;
        }
        Fe(out)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        let p = self.inner.spec.p;
        if self.inner.spec.k == 1 {
            return Fe(if a.0 == 0 { 0 } else { p - a.0 });
        }
        let (mut x, mut out) = (a.0, 0u64);
        for &pl in self.inner.place.iter().rev() {
            let c = x % p;
            out += (if c == 0 { 0 } else { p - c }) * pl;
            x /= p;
        }
        Fe(out)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe(0);
        }
        if let Some(t) = &self.inner.tables {
            let n = t.exp.len();
            let mut l = t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize;
            if l >= n {
                l -= n;
            }
            return Fe(t.exp[l] as u64);
        }
        self.mul_slow(a, b)
    }

    fn mul_slow(&self, a: Fe, b: Fe) -> Fe {
        let p = self.inner.spec.p;
        if self.inner.spec.k == 1 {
            return Fe(mul_mod(a.0, b.0, p));
        }
        let k = self.inner.spec.k as usize;
        let x = unpack_digits(a.0, p, k as u32);
        let y = unpack_digits(b.0, p, k as u32);
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mul_mod(xi, yj, p)) % p;
            }
        }
        // x^k = -sum c_i x^i
        let m = &self.inner.spec.modulus;
        for top in (k..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &mi) in m.iter().enumerate() {
                let idx = top - k + i;
                prod[idx] = (prod[idx] + p - mul_mod(c, mi, p)) % p;
            }
        }
        let mut out = 0u64;
        for c in &prod[..k] {
            out = out * p + c;
        }
        Fe(out)
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        if let Some(t) = &self.inner.tables {
            let n = t.exp.len();
            let l = t.log[a.0 as usize] as usize;
            return Ok(Fe(t.exp[(n - l) % n] as u64));
        }
        Ok(self.pow(a, self.inner.q - 2))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn is_square(&self, a: Fe) -> bool {
        if a.0 == 0 {
            return true;
        }
        if let Some(t) = &self.inner.tables {
            return t.log[a.0 as usize] % 2 == 0;
        }
        self.pow(a, (self.inner.q - 1) / 2) == self.one()
    }

    /// The square root with the smaller canonical representation.
    pub fn sqrt(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            return Ok(a);
        }
        if !self.is_square(a) {
            return Err(Error::NotASquare);
        }
        let r = match &self.inner.tables {
            Some(t) => Fe(t.exp[(t.log[a.0 as usize] / 2) as usize] as u64),
            None => self.tonelli_shanks(a),
        };
        Ok(r.min(self.neg(r)))
    }

    fn tonelli_shanks(&self, a: Fe) -> Fe {
        let inner = &self.inner;
        let mut m = inner.two_adicity;
        let mut c = self.pow(inner.nonresidue, inner.odd_part);
        let mut t = self.pow(a, inner.odd_part);
        let mut r = self.pow(a, inner.odd_part.div_ceil(2));
        let one = self.one();
        while t != one {
            let mut i = 0;
            let mut t2 = t;
            while t2 != one {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.mul(b, b);
            }
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        r
    }

    /// `a^(p^j)`: the `j`-th power of Frobenius over `F_p`.
    pub fn frobenius(&self, a: Fe, j: u32) -> Fe {
        let mut x = a;
        for _ in 0..j {
            x = self.pow(x, self.inner.spec.p);
        }
        x
    }

    pub fn sum<I: IntoIterator<Item = Fe>>(&self, it: I) -> Fe {
        it.into_iter().fold(Fe(0), |acc, x| self.add(acc, x))
    }

    pub fn dot(&self, a: &[Fe], b: &[Fe]) -> Fe {
        a.iter().zip(b).fold(Fe(0), |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    pub(crate) fn check_same(&self, other: &Field) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    if p < (1 << 32) {
        a * b % p
    } else {
        ((a as u128 * b as u128) % p as u128) as u64
    }
}

pub(crate) fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let v = base.checked_pow(exp)?;
    (v < (1u64 << 63)).then_some(v)
}

fn unpack_digits(mut packed: u64, p: u64, k: u32) -> Vec<u64> {
    let mut out = vec![0u64; k as usize];
    for slot in out.iter_mut().rev() {
        *slot = packed % p;
        packed /= p;
    }
    out
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 {
        return Err(Error::InvalidField("characteristic 2 is not supported".into()));
    }
    if p > (1u64 << 61) || !is_prime(p) {
        return Err(Error::InvalidField(format!("{p} is not an odd prime below 2^61")));
    }
    Ok(())
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(acc, b, n);
            }
            b = mul_mod(b, b, n);
            e >>= 1;
        }
        acc
    };
    'outer: for &a in &BASES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Ben-Or test: `x^k + sum c_i x^i` is irreducible over `F_p` iff it shares no
/// factor with `x^(p^i) - x` for `i <= k/2`.
fn is_irreducible_monic(fp: &Field, coeffs: &[u64]) -> bool {
    let k = coeffs.len();
    let mut c: Vec<Fe> = coeffs.iter().map(|&x| fp.from_u64(x)).collect();
    c.push(fp.one());
    let f = UniPoly::new(c);
    let x = UniPoly::new(vec![fp.zero(), fp.one()]);
    let mut xp = x.clone();
    for _ in 1..=k / 2 {
        xp = xp.pow_mod(fp, fp.characteristic(), &f);
        let g = xp.sub(fp, &x).gcd(fp, &f);
        if g.degree() != Some(0) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_examples() {
        let f5 = Field::prime(5).unwrap();
        assert!(f5.is_square(f5.from_u64(4)));
        assert_eq!(f5.sqrt(f5.from_u64(4)).unwrap(), f5.from_u64(2));
        // squares in F_5 are {0, 1, 4}
        let squares: Vec<u64> = f5.elements().map(|x| f5.mul(x, x).raw()).collect();
        assert!(!squares.contains(&2));
        assert!(!f5.is_square(f5.from_u64(2)));
        assert_eq!(f5.sqrt(f5.from_u64(2)), Err(Error::NotASquare));

        let f3 = Field::prime(3).unwrap();
        assert_eq!(f3.inv(f3.from_u64(2)).unwrap(), f3.from_u64(2));
        assert_eq!(f3.inv(f3.zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn rejects_bad_characteristic() {
        assert!(Field::prime(2).is_err());
        assert!(Field::prime(9).is_err());
        assert!(Field::prime(1).is_err());
        assert!(FieldSpec::with_modulus(3, vec![2, 0]).is_err()); // x^2 + 2 = (x-1)(x+1)
    }

    #[test]
    fn least_modulus_for_f9() {
        let spec = FieldSpec::new(3, 2).unwrap();
        // x^2 + 1
        assert_eq!(spec.modulus(), &[1, 0]);
        let f9 = Field::from_spec(spec);
        assert_eq!(f9.order(), 9);
        // residues are (c0, c1) with c0 most significant in the packed value
        let alpha = f9.from_residues(&[0, 1]).unwrap();
        assert_eq!(f9.mul(alpha, alpha), f9.from_i64(-1));
    }

    #[test]
    fn table_and_generic_multiplication_agree() {
        for (p, k) in [(3, 2), (5, 2), (3, 3), (7, 2)] {
            let f = Field::new(p, k).unwrap();
            for a in f.elements() {
                for b in f.elements().step_by(3) {
                    assert_eq!(f.mul(a, b), f.mul_slow(a, b));
                }
            }
        }
    }

    #[test]
    fn large_prime_sqrt() {
        let p = (1u64 << 61) - 1;
        let f = Field::prime(p).unwrap();
        for n in [2u64, 3, 5, 12345678901] {
            let a = f.from_u64(n);
            let sq = f.mul(a, a);
            let r = f.sqrt(sq).unwrap();
            assert_eq!(f.mul(r, r), sq);
            assert!(r <= f.neg(r));
        }
    }

    #[test]
    fn miller_rabin() {
        let primes: Vec<u64> = (0..200).filter(|&n| is_prime(n)).collect();
        let naive: Vec<u64> = (0..200u64).filter(|&n| n >= 2 && (2..n).all(|d| n % d != 0)).collect();
        assert_eq!(primes, naive);
        assert!(!is_prime(3215031751));
    }
}
