//! Elementary transformations: blow up a line in a smooth fiber and contract
//! the proper transform of that fiber, realized on the Gram matrix.
//!
//! After a graded change of basis `U` puts the line at `span(e_k)` for the
//! kept pair `k` at `p`, the new Gram matrix is `(1/l) M (U^T G U) M` with
//! `M` scaling the other two coordinates by the linear form `l` vanishing at
//! `p`. The kept twists drop by one and `e` grows by one, then everything is
//! renormalized.

use crate::error::{Error, Result};
use crate::fibration::{normalize_twist, FibrationSpec, Gram};
use crate::gfpoly::{BinaryForm, Extension, Fe, Field, ProjPoint1};
use crate::linalg::{self, Matrix};
use crate::lines::{Fiber, LineInFiber};
use crate::sections::Section;

#[derive(Clone, Debug)]
pub struct TransformReceipt {
    pub input: FibrationSpec,
    pub output: FibrationSpec,
    pub p: ProjPoint1,
    pub line: LineInFiber,
    /// The constant matrix `U(p)`.
    pub basis_change_at_p: Matrix,
    /// `U`, with entry `(i, k)` of degree `d_k - d_i`.
    pub basis_change: Gram,
    basis_change_inv: Gram,
    /// `det U`, a nonzero constant.
    pub det_u: Fe,
    pub swap_blocks: bool,
    /// Twist applied by the final normalization.
    pub shift: i64,
}

/// What happened to a section under the transformation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectionFate {
    /// `sigma(p)` is off the line: the height goes up by one.
    Disjoint,
    /// `sigma(p)` is on the line: the height goes down by one.
    ThroughLine,
}

impl SectionFate {
    pub fn height_change(self) -> i64 {
        match self {
            SectionFate::Disjoint => 1,
            SectionFate::ThroughLine => -1,
        }
    }
}

/// Coordinates carrying the line (`kept`) and those scaled by `l` (`scaled`).
fn blocks(swap_blocks: bool) -> ([usize; 2], [usize; 2]) {
    if swap_blocks {
        ([0, 1], [2, 3])
    } else {
        ([2, 3], [0, 1])
    }
}

impl TransformReceipt {
    /// The line to transform along at `p` in the output to undo this move;
    /// use it with the opposite `swap_blocks`.
    pub fn inverse_line(&self) -> LineInFiber {
        let field = self.output.field();
        let (_, scaled) = blocks(self.swap_blocks);
        let e = |i: usize| {
            let mut v = vec![Fe::ZERO; 4];
            v[i] = field.one();
            v
        };
        LineInFiber::from_vectors(field, self.p, 1, &e(scaled[0]), &e(scaled[1])).expect("independent")
    }

    /// Coordinates of `s` in the new basis, `U^{-1} s`.
    pub fn pull_back(&self, s: &[BinaryForm; 4]) -> [BinaryForm; 4] {
        let field = self.input.field();
        std::array::from_fn(|k| {
            let mut acc = BinaryForm::zero(field);
            for (uki, si) in self.basis_change_inv[k].iter().zip(s) {
                acc = acc.add(&uki.mul(si).expect("same field")).expect("homogeneous");
            }
            acc
        })
    }

    /// Proper transform of a section of the input.
    pub fn transform_section(&self, sec: &Section) -> Result<(Section, SectionFate)> {
        let fib = &self.input;
        if !sec.check(fib).ok() {
            return Err(Error::SectionNotOnInput);
        }
        let field = fib.field();
        let t = self.pull_back(sec.components());
        let (kept, scaled) = blocks(self.swap_blocks);
        let ell = BinaryForm::vanishing_at(field, &self.p);
        let through = scaled.iter().all(|&k| t[k].evaluate_at(&self.p).is_zero());
        let mut out = t.clone();
        let (fate, f_raw) = if through {
            for k in scaled {
                out[k] = t[k].divide_exact(&ell).map_err(|_| Error::InvariantViolation("section through the line is not divisible".into()))?;
            }
            (SectionFate::ThroughLine, sec.f() - 1)
        } else {
            for k in kept {
                out[k] = t[k].mul(&ell)?;
            }
            (SectionFate::Disjoint, sec.f())
        };
        let section = Section::new(&self.output, f_raw + self.shift, out)
            .map_err(|e| Error::InvariantViolation(format!("transformed section is invalid: {e}")))?;
        Ok((section, fate))
    }
}

/// The linear form `w` with `w(p) = 1` used to lift `U(p)` to a graded map.
fn unit_form(field: &Field, p: &ProjPoint1) -> BinaryForm {
    if p.u.is_zero() {
        BinaryForm::v(field)
    } else {
        BinaryForm::u(field).scale(field.inv(p.u).expect("nonzero"))
    }
}

fn lift_graded(field: &Field, m: &Matrix, d: &[i64; 4], w: &BinaryForm) -> Gram {
    std::array::from_fn(|i| {
        std::array::from_fn(|k| {
            if m[i][k].is_zero() {
                BinaryForm::zero(field)
            } else {
                let exp = u32::try_from(d[k] - d[i]).expect("parabolic pattern");
                w.pow(exp).scale(m[i][k])
            }
        })
    })
}

/// A constant invertible matrix, zero wherever `d_k < d_i`, whose kept
/// columns span the line.
fn find_basis_change(field: &Field, d: &[i64; 4], line: &LineInFiber, kept: [usize; 2]) -> Option<Matrix> {
    let e = |i: usize| {
        let mut v = vec![Fe::ZERO; 4];
        v[i] = field.one();
        v
    };
    let [a, c] = line.basis();
    // vectors of the line supported where d_i <= d_k
    let in_line = |k: usize| -> Vec<Vec<Fe>> {
        let rows: Matrix = (0..4).filter(|&i| d[i] > d[k]).map(|i| vec![a[i], c[i]]).collect();
        let coeffs =
            if rows.is_empty() { vec![vec![field.one(), Fe::ZERO], vec![Fe::ZERO, field.one()]] } else { linalg::nullspace(field, &rows, 2) };
        let mut out: Vec<Vec<Fe>> =
            coeffs.iter().map(|x| (0..4).map(|i| field.add(field.mul(x[0], a[i]), field.mul(x[1], c[i]))).collect()).collect();
        if out.len() == 2 {
            let sum = (0..4).map(|i| field.add(out[0][i], out[1][i])).collect();
            out.push(sum);
        }
        let own = e(k);
        if let Some(pos) = out.iter().position(|v| *v == own) {
            out.swap(0, pos);
        }
        out
    };
    let free = |k: usize| -> Vec<Vec<Fe>> { std::iter::once(k).chain((0..4).filter(|&i| i != k)).filter(|&i| d[i] <= d[k]).map(e).collect() };
    let options: Vec<Vec<Vec<Fe>>> = (0..4).map(|k| if kept.contains(&k) { in_line(k) } else { free(k) }).collect();
    let mut pick = [0usize; 4];
    loop {
        let m: Matrix = (0..4).map(|i| (0..4).map(|k| options[k][pick[k]][i]).collect()).collect();
        if !linalg::det(field, &m).is_zero() {
            return Some(m);
        }
        let mut pos = 0;
        loop {
            if pos == 4 {
                return None;
            }
            pick[pos] += 1;
            if pick[pos] < options[pos].len() {
                break;
            }
            pick[pos] = 0;
            pos += 1;
        }
    }
}

fn mat_mul(a: &Gram, b: &Gram) -> Result<Gram> {
    let field = a[0][0].field().clone();
    let mut out: Gram = std::array::from_fn(|_| std::array::from_fn(|_| BinaryForm::zero(&field)));
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] = out[i][j].add(&a[i][k].mul(&b[k][j])?)?;
            }
        }
    }
    Ok(out)
}

/// `U^T G U` for a graded matrix of forms `U`.
pub fn congruence(g: &Gram, u: &Gram) -> Result<Gram> {
    let ut: Gram = std::array::from_fn(|i| std::array::from_fn(|j| u[j][i].clone()));
    mat_mul(&ut, &mat_mul(g, u)?)
}

/// Elementary transformation along `line` in the fiber over the rational
/// point `p`.
pub fn elementary_transform(fib: &FibrationSpec, p: &ProjPoint1, line: &LineInFiber, swap_blocks: bool) -> Result<TransformReceipt> {
    let field = fib.field();
    if line.degree() != 1 {
        return Err(Error::LineNotRational);
    }
    if line.b() != *p {
        return Err(Error::FiberMismatch);
    }
    let fiber = Fiber::new(fib, &Extension::identity(field), p).map_err(|e| match e {
        Error::SingularFiber => Error::SingularFiberAtP,
        other => other,
    })?;
    if !fiber.is_isotropic(line) {
        return Err(Error::LineNotIsotropic);
    }
    let d = fib.d();
    let (kept, scaled) = blocks(swap_blocks);
    let m = find_basis_change(field, &d, line, kept).ok_or(Error::NoGradedAutomorphism)?;
    let m_inv = linalg::inverse(field, &m).expect("invertible");
    let w = unit_form(field, p);
    let u = lift_graded(field, &m, &d, &w);
    let u_inv = lift_graded(field, &m_inv, &d, &w);
    let det_u = linalg::det(field, &m);

    let h_all = congruence(fib.gram(), &u)?;
    let ell = BinaryForm::vanishing_at(field, p);
    let mut out: Gram = std::array::from_fn(|_| std::array::from_fn(|_| BinaryForm::zero(field)));
    for k in 0..4 {
        for l in 0..4 {
            let h = h_all[k][l].clone();
            let powers = scaled.contains(&k) as u32 + scaled.contains(&l) as u32;
            out[k][l] = match powers {
                2 => h.mul(&ell)?,
                1 => h,
                _ => h.divide_exact(&ell).map_err(|_| Error::InvariantViolation("kept block is not divisible at p".into()))?,
            };
        }
    }
    let mut d_raw = d;
    for k in kept {
        d_raw[k] -= 1;
    }
    let (d_new, e_new, shift) = normalize_twist(d_raw, fib.e() + 1)?;
    let output = FibrationSpec::new(field, d_new, e_new, out)?;
    Ok(TransformReceipt {
        input: fib.clone(),
        output,
        p: *p,
        line: line.clone(),
        basis_change_at_p: m,
        basis_change: u,
        basis_change_inv: u_inv,
        det_u,
        swap_blocks,
        shift,
    })
}
