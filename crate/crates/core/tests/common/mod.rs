//! Independent oracles shared by the integration tests. They only use field
//! arithmetic from the library and redo everything else by hand.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use quadrifold::fibration::FibrationSpec;
use quadrifold::gfpoly::{BinaryForm, Fe, Field, UniPoly};
use rand::Rng;

pub fn worked_f3() -> FibrationSpec {
    let f = Field::prime(3).unwrap();
    diag(&f, [0; 4], 1, [&[1, 0], &[0, 1], &[1, 1], &[1, -1]])
}

pub fn diag(f: &Field, d: [i64; 4], e: i64, entries: [&[i64]; 4]) -> FibrationSpec {
    FibrationSpec::diagonal(f, d, e, entries.map(|c| BinaryForm::from_i64s(f, c))).unwrap()
}

// ---- dense polynomials, ascending coefficients ----

fn trim(mut a: Vec<Fe>) -> Vec<Fe> {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn conv(f: &Field, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Fe::ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    out
}

fn add_into(f: &Field, acc: &mut Vec<Fe>, b: &[Fe]) {
    if acc.len() < b.len() {
        acc.resize(b.len(), Fe::ZERO);
    }
    for (i, &y) in b.iter().enumerate() {
        acc[i] = f.add(acc[i], y);
    }
}

fn rem(f: &Field, a: &[Fe], m: &[Fe]) -> Vec<Fe> {
    let mut a = trim(a.to_vec());
    let m = trim(m.to_vec());
    let lead_inv = f.inv(*m.last().unwrap()).unwrap();
    while a.len() >= m.len() {
        let c = f.mul(*a.last().unwrap(), lead_inv);
        let shift = a.len() - m.len();
        for (i, &y) in m.iter().enumerate() {
            a[shift + i] = f.sub(a[shift + i], f.mul(c, y));
        }
        a = trim(a);
    }
    a
}

fn gcd(f: &Field, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = rem(f, &a, &b);
        a = b;
        b = r;
    }
    a
}

// ---- brute-force section oracle ----

/// Every canonically scaled saturated section at twist `twist`, as raw
/// coefficient vectors (component by component, `u^deg` first).
pub fn brute_force_sections(fib: &FibrationSpec, twist: i64) -> BTreeSet<Vec<u64>> {
    let f = fib.field();
    let q = f.order();
    let d = fib.d();
    let degs: Vec<Option<usize>> = d.iter().map(|&di| usize::try_from(twist - di).ok()).collect();
    let len: usize = degs.iter().map(|x| x.map_or(0, |x| x + 1)).sum();
    let gram: Vec<Vec<Vec<Fe>>> = (0..4).map(|i| (0..4).map(|j| fib.entry(i, j).coeffs().to_vec()).collect()).collect();
    let mut out = BTreeSet::new();
    let total = q.pow(len as u32);
    let mut digits = vec![0u64; len];
    for _ in 0..total {
        if let Some(pos) = digits.iter().position(|&x| x != 0) {
            if digits[pos] == f.one().raw() {
                let coeffs: Vec<Fe> = digits.iter().map(|&x| f.element(x).unwrap()).collect();
                let mut comps: Vec<Vec<Fe>> = Vec::new();
                let mut at = 0;
                for dg in &degs {
                    match dg {
                        Some(k) => {
                            comps.push(coeffs[at..at + k + 1].to_vec());
                            at += k + 1;
                        }
                        None => comps.push(Vec::new()),
                    }
                }
                if on_fibration(f, &gram, &comps) && saturated(f, &comps) {
                    out.insert(digits.clone());
                }
            }
        }
        for x in digits.iter_mut() {
            *x += 1;
            if *x < q {
                break;
            }
            *x = 0;
        }
    }
    out
}

fn on_fibration(f: &Field, gram: &[Vec<Vec<Fe>>], s: &[Vec<Fe>]) -> bool {
    let mut acc = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            add_into(f, &mut acc, &conv(f, &conv(f, &gram[i][j], &s[i]), &s[j]));
        }
    }
    acc.iter().all(|c| c.is_zero())
}

fn saturated(f: &Field, s: &[Vec<Fe>]) -> bool {
    let nonzero: Vec<&Vec<Fe>> = s.iter().filter(|c| c.iter().any(|x| !x.is_zero())).collect();
    if nonzero.is_empty() {
        return false;
    }
    // common root at [0:1]: every top coefficient (of v^deg) vanishes
    if nonzero.iter().all(|c| c.last().unwrap().is_zero()) {
        return false;
    }
    let g = nonzero.iter().fold(Vec::new(), |g, c| gcd(f, &g, c));
    g.len() <= 1
}

// ---- factoring and the smooth-total-space oracle ----

fn to_uni(a: &[Fe]) -> UniPoly {
    UniPoly::new(a.to_vec())
}

/// The distinct monic irreducible factors of `a`, by distinct-degree then
/// equal-degree (Cantor-Zassenhaus) splitting.
pub fn irreducible_factors<R: Rng>(f: &Field, a: &[Fe], rng: &mut R) -> Vec<Vec<Fe>> {
    let mut a = trim(a.to_vec());
    let q = f.order();
    let x = vec![Fe::ZERO, f.one()];
    let mut out = Vec::new();
    let mut xq = x.clone();
    let mut k = 0;
    while a.len() > 1 {
        k += 1;
        xq = to_uni(&xq).pow_mod(f, q, &to_uni(&a)).coeffs().to_vec();
        let mut diff = xq.clone();
        add_into(f, &mut diff, &x.iter().map(|&c| f.neg(c)).collect::<Vec<_>>());
        let g = gcd(f, &a, &diff);
        if g.len() > 1 {
            split_equal_degree(f, &monic(f, &g), k, rng, &mut out);
            // strip every power of the factors just found
            loop {
                let c = gcd(f, &a, &g);
                if c.len() <= 1 {
                    break;
                }
                a = divide(f, &a, &c);
            }
        }
    }
    out.sort();
    out
}

fn monic(f: &Field, a: &[Fe]) -> Vec<Fe> {
    let inv = f.inv(*a.last().unwrap()).unwrap();
    a.iter().map(|&c| f.mul(c, inv)).collect()
}

fn split_equal_degree<R: Rng>(f: &Field, g: &[Fe], k: u32, rng: &mut R, out: &mut Vec<Vec<Fe>>) {
    if g.len() - 1 == k as usize {
        out.push(g.to_vec());
        return;
    }
    let exp = (f.order().pow(k) - 1) / 2;
    loop {
        let r: Vec<Fe> = (0..g.len() - 1).map(|_| f.sample(rng)).collect();
        let mut h = to_uni(&r).pow_mod(f, exp, &to_uni(g)).coeffs().to_vec();
        if h.is_empty() {
            h.push(Fe::ZERO);
        }
        h[0] = f.sub(h[0], f.one());
        let c = gcd(f, g, &h);
        if c.len() > 1 && c.len() < g.len() {
            let c = monic(f, &c);
            let other = divide(f, g, &c);
            split_equal_degree(f, &c, k, rng, out);
            split_equal_degree(f, &monic(f, &other), k, rng, out);
            return;
        }
    }
}

fn divide(f: &Field, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    let (quot, r) = to_uni(a).div_rem(f, &to_uni(b)).unwrap();
    assert!(r.is_zero());
    quot.coeffs().to_vec()
}

/// Arithmetic in `F[t]/(m)` for irreducible `m`.
struct Quotient<'a> {
    f: &'a Field,
    m: Vec<Fe>,
}

impl Quotient<'_> {
    fn reduce(&self, a: &[Fe]) -> Vec<Fe> {
        rem(self.f, a, &self.m)
    }
    fn mul(&self, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
        self.reduce(&conv(self.f, a, b))
    }
    fn sub(&self, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
        let mut out = a.to_vec();
        add_into(self.f, &mut out, &b.iter().map(|&c| self.f.neg(c)).collect::<Vec<_>>());
        trim(out)
    }
    /// Inverse by the extended Euclidean algorithm.
    fn inv(&self, a: &[Fe]) -> Vec<Fe> {
        let f = self.f;
        let (mut r0, mut r1) = (self.m.clone(), trim(a.to_vec()));
        let (mut s0, mut s1) = (Vec::new(), vec![f.one()]);
        while !r1.is_empty() {
            let (quot, r) = to_uni(&r0).div_rem(f, &to_uni(&r1)).unwrap();
            let s2 = self.sub(&s0, &conv(f, quot.coeffs(), &s1));
            r0 = r1;
            r1 = r.coeffs().to_vec();
            s0 = s1;
            s1 = s2;
        }
        assert_eq!(r0.len(), 1, "not invertible");
        let c = f.inv(r0[0]).unwrap();
        self.reduce(&s0.iter().map(|&x| f.mul(x, c)).collect::<Vec<_>>())
    }
}

/// Kernel of a 4x4 matrix over `F[t]/(m)`.
fn kernel(qf: &Quotient, m: &[Vec<Vec<Fe>>]) -> Vec<Vec<Vec<Fe>>> {
    let mut a: Vec<Vec<Vec<Fe>>> = m.iter().map(|r| r.iter().map(|c| qf.reduce(c)).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..4 {
        let Some(p) = (row..4).find(|&i| !a[i][col].is_empty()) else { continue };
        a.swap(row, p);
        let inv = qf.inv(&a[row][col]);
        a[row] = a[row].iter().map(|c| qf.mul(c, &inv)).collect();
        for i in 0..4 {
            if i != row && !a[i][col].is_empty() {
                let factor = a[i][col].clone();
                for j in 0..4 {
                    let t = qf.mul(&factor, &a[row][j]);
                    a[i][j] = qf.sub(&a[i][j], &t);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (0..4)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut x = vec![Vec::new(); 4];
            x[free] = vec![qf.f.one()];
            for (r, &pc) in pivots.iter().enumerate() {
                x[pc] = qf.sub(&[], &a[r][free]);
            }
            x
        })
        .collect()
}

fn derivative(f: &Field, a: &[Fe]) -> Vec<Fe> {
    trim(a.iter().enumerate().skip(1).map(|(i, &c)| f.mul(c, f.from_u64(i as u64))).collect())
}

/// Whether the total space is smooth, decided fiber by fiber: at every root
/// of the discriminant the Gram matrix has corank exactly one and the
/// derivative of the form is nonzero on the kernel.
pub fn smooth_total_space<R: Rng>(fib: &FibrationSpec, rng: &mut R) -> bool {
    let f = fib.field();
    // two affine charts: t = v/u (u = 1) and s = u/v (v = 1), the second only at s = 0
    let chart = |flip: bool| -> Vec<Vec<Vec<Fe>>> {
        (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        let c = fib.entry(i, j).coeffs();
                        if flip {
                            trim(c.iter().rev().copied().collect())
                        } else {
                            trim(c.to_vec())
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let check = |g: &[Vec<Vec<Fe>>], m: &[Fe]| -> bool {
        let qf = Quotient { f, m: m.to_vec() };
        let ker = kernel(&qf, g);
        if ker.len() != 1 {
            return false;
        }
        let x = &ker[0];
        let mut acc = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                let t = qf.mul(&qf.mul(&derivative(f, &g[i][j]), &x[i]), &x[j]);
                add_into(f, &mut acc, &t);
            }
        }
        !qf.reduce(&acc).is_empty()
    };
    let affine = chart(false);
    let disc = fib.discriminant().coeffs().to_vec();
    for m in irreducible_factors(f, &disc, rng) {
        if !check(&affine, &m) {
            return false;
        }
    }
    // [0:1] is a root iff the top coefficient vanishes
    if disc.last().is_none_or(|c| c.is_zero()) {
        return check(&chart(true), &[Fe::ZERO, f.one()]);
    }
    true
}
