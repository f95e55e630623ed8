//! Lines in smooth fibers: totally isotropic planes of the fiber form, their
//! rulings, and the pair of lines through a section point.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fibration::FibrationSpec;
use crate::gfpoly::{Extension, Fe, Field, ProjPoint1};
use crate::linalg::{self, Matrix};
use crate::sections::{affine_cone, Section};

/// A line of the fiber over `b`, as the row space of a reduced echelon
/// 2x4 matrix over the field it is defined over.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineInFiber {
    b: ProjPoint1,
    /// Degree over the fiber's field: 1, or 2 for a line defined only over
    /// the quadratic extension.
    degree: u32,
    basis: [[Fe; 4]; 2],
}

impl LineInFiber {
    /// Echelonizes two spanning vectors; `None` if they are dependent.
    pub fn from_vectors(field: &Field, b: ProjPoint1, degree: u32, a: &[Fe], c: &[Fe]) -> Option<LineInFiber> {
        let mut m: Matrix = vec![a.to_vec(), c.to_vec()];
        if linalg::rref(field, &mut m).len() != 2 {
            return None;
        }
        let row = |r: &Vec<Fe>| [r[0], r[1], r[2], r[3]];
        Some(LineInFiber { b, degree, basis: [row(&m[0]), row(&m[1])] })
    }

    pub fn b(&self) -> ProjPoint1 {
        self.b
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn basis(&self) -> &[[Fe; 4]; 2] {
        &self.basis
    }

    pub fn contains(&self, field: &Field, x: &[Fe]) -> bool {
        let m: Matrix = vec![self.basis[0].to_vec(), self.basis[1].to_vec(), x.to_vec()];
        linalg::rank(field, &m) == 2
    }

    fn rows(&self) -> Matrix {
        self.basis.iter().map(|r| r.to_vec()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Intersection {
    Point(Vec<Fe>),
    Disjoint,
    Same,
}

/// A smooth fiber together with the quadratic extension of its field.
pub struct Fiber {
    ext: Extension,
    quad: Extension,
    b: ProjPoint1,
    gram: Matrix,
    gram_quad: Matrix,
    det: Fe,
}

impl Fiber {
    /// The fiber over `b`, a point over `ext`.
    pub fn new(fib: &FibrationSpec, ext: &Extension, b: &ProjPoint1) -> Result<Fiber> {
        let fm = fib.fiber_at(ext, b);
        if !fm.is_smooth() {
            return Err(Error::SingularFiber);
        }
        let quad = Extension::new(ext.field(), 2)?;
        let gram_quad = fm.matrix.iter().map(|r| r.iter().map(|&c| quad.embed(c)).collect()).collect();
        let det = fm.determinant();
        Ok(Fiber { ext: ext.clone(), quad, b: *b, gram: fm.matrix, gram_quad, det })
    }

    pub fn field(&self) -> &Field {
        self.ext.field()
    }

    pub fn quadratic_extension(&self) -> &Extension {
        &self.quad
    }

    pub fn b(&self) -> ProjPoint1 {
        self.b
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    /// The Gram determinant at `b`, equal to the discriminant form's value.
    pub fn disc(&self) -> Fe {
        self.det
    }

    pub fn disc_is_square(&self) -> bool {
        self.field().is_square(self.det)
    }

    /// Field and Gram matrix a line of the given degree lives over.
    fn over(&self, degree: u32) -> (&Field, &Matrix) {
        if degree == 1 {
            (self.ext.field(), &self.gram)
        } else {
            (self.quad.field(), &self.gram_quad)
        }
    }

    /// Moves a line to the quadratic extension.
    pub fn to_quadratic(&self, line: &LineInFiber) -> LineInFiber {
        if line.degree == 2 {
            return line.clone();
        }
        let basis = line.basis.map(|r| r.map(|c| self.quad.embed(c)));
        LineInFiber { b: line.b, degree: 2, basis }
    }

    /// Pulls a line back to the fiber's own field when its echelon form
    /// allows it.
    pub fn to_rational(&self, line: &LineInFiber) -> Option<LineInFiber> {
        if line.degree == 1 {
            return Some(line.clone());
        }
        let mut basis = [[Fe::ZERO; 4]; 2];
        for r in 0..2 {
            for c in 0..4 {
                basis[r][c] = self.quad.restrict(line.basis[r][c])?;
            }
        }
        Some(LineInFiber { b: line.b, degree: 1, basis })
    }

    pub fn is_isotropic(&self, line: &LineInFiber) -> bool {
        let (field, g) = self.over(line.degree);
        let [a, c] = &line.basis;
        [(a, a), (a, c), (c, c)].iter().all(|(x, y)| linalg::bilinear(field, g, &x[..], &y[..]).is_zero())
    }

    /// The two lines through the fiber point `x` (a vector over the fiber's
    /// field), from the split of the form restricted to the tangent plane.
    pub fn lines_through(&self, x: &[Fe]) -> Result<[LineInFiber; 2]> {
        let field = self.field();
        if x.len() != 4 || x.iter().all(|c| c.is_zero()) {
            return Err(Error::InvalidInput("a fiber point needs four coordinates, not all zero".into()));
        }
        if !linalg::quadratic(field, &self.gram, x).is_zero() {
            return Err(Error::PointNotOnQuadric);
        }
        let w = linalg::mat_vec(field, &self.gram, x);
        let plane = linalg::nullspace(field, &vec![w], 4);
        let (y1, y2) = complement_pair(field, x, &plane);
        let a = linalg::quadratic(field, &self.gram, &y1);
        let bb = linalg::bilinear(field, &self.gram, &y1, &y2);
        let c = linalg::quadratic(field, &self.gram, &y2);
        let d = field.sub(field.mul(bb, bb), field.mul(a, c));
        debug_assert!(!d.is_zero(), "smooth fibers restrict to a nondegenerate binary form");

        let degree = if field.is_square(d) { 1 } else { 2 };
        let (lf, embed): (&Field, Box<dyn Fn(Fe) -> Fe>) =
            if degree == 1 { (field, Box::new(|t| t)) } else { (self.quad.field(), Box::new(|t| self.quad.embed(t))) };
        let [a, bb, c, d] = [a, bb, c, d].map(&embed);
        let (x, y1, y2): (Vec<Fe>, Vec<Fe>, Vec<Fe>) =
            (x.iter().map(|&t| embed(t)).collect(), y1.iter().map(|&t| embed(t)).collect(), y2.iter().map(|&t| embed(t)).collect());
        let r = lf.sqrt(d)?;
        // directions (beta, gamma) with a beta^2 + 2 bb beta gamma + c gamma^2 = 0
        let dirs = if a.is_zero() { [(lf.one(), Fe::ZERO), (lf.neg(c), lf.add(bb, bb))] } else { [(lf.sub(r, bb), a), (lf.neg(lf.add(r, bb)), a)] };
        let lines = dirs.map(|(beta, gamma)| {
            let dir: Vec<Fe> = (0..4).map(|i| lf.add(lf.mul(beta, y1[i]), lf.mul(gamma, y2[i]))).collect();
            LineInFiber::from_vectors(lf, self.b, degree, &x, &dir).expect("x and the direction are independent")
        });
        Ok(lines)
    }

    /// `r` with `G P G = r *P` for the Plucker matrix `P` of the line; it is a
    /// square root of the discriminant, and its sign tells the ruling.
    pub fn hodge_root(&self, line: &LineInFiber) -> Result<Fe> {
        let (field, g) = self.over(line.degree);
        let [a, c] = &line.basis;
        let p: Matrix = (0..4).map(|i| (0..4).map(|j| field.sub(field.mul(a[i], c[j]), field.mul(a[j], c[i]))).collect()).collect();
        let gp: Matrix = (0..4).map(|i| (0..4).map(|j| field.sum((0..4).map(|k| field.mul(g[i][k], p[k][j])))).collect()).collect();
        let gpg: Matrix = (0..4).map(|i| (0..4).map(|j| field.sum((0..4).map(|k| field.mul(gp[i][k], g[k][j])))).collect()).collect();
        let star = |i: usize, j: usize| -> Fe {
            match (i, j) {
                (0, 1) => p[2][3],
                (0, 2) => p[3][1],
                (0, 3) => p[1][2],
                (1, 2) => p[0][3],
                (1, 3) => p[2][0],
                (2, 3) => p[0][1],
                _ => unreachable!("upper pairs only"),
            }
        };
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let &(i, j) = pairs.iter().find(|&&(i, j)| !star(i, j).is_zero()).ok_or(Error::DegenerateForm)?;
        let r = field.div(gpg[i][j], star(i, j))?;
        if pairs.iter().any(|&(i, j)| gpg[i][j] != field.mul(r, star(i, j))) {
            return Err(Error::LineNotIsotropic);
        }
        Ok(r)
    }

    /// The lexicographically smaller square root of the discriminant, over
    /// the field of a line of the given degree.
    pub fn sqrt_disc(&self, degree: u32) -> Result<Fe> {
        let (field, _) = self.over(degree);
        let det = if degree == 1 { self.det } else { self.quad.embed(self.det) };
        field.sqrt(det)
    }

    /// Ruling label: 0 for lines whose Hodge root is the smaller square root
    /// of the discriminant, 1 for the other.
    pub fn label(&self, line: &LineInFiber) -> Result<RulingLabel> {
        let r = self.hodge_root(line)?;
        let root = self.sqrt_disc(line.degree)?;
        let (field, _) = self.over(line.degree);
        let parity = if r == root {
            0
        } else if r == field.neg(root) {
            1
        } else {
            return Err(Error::InvariantViolation("Hodge root is not a square root of the discriminant".into()));
        };
        Ok(RulingLabel { sqrt_disc: r, parity })
    }

    /// Every line of the fiber defined over its own field, by scanning all
    /// rational points; sorted.
    pub fn rational_lines(&self) -> Result<Vec<LineInFiber>> {
        let mut out = Vec::new();
        for x in self.rational_points() {
            for l in self.lines_through(&x)? {
                if let Some(r) = self.to_rational(&l) {
                    out.push(r);
                }
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Projective points of the fiber quadric over its field, normalized.
    pub fn rational_points(&self) -> Vec<Vec<Fe>> {
        let field = self.field();
        let one = field.one();
        affine_cone(field, &self.gram, |y| y.iter().find(|c| !c.is_zero()) == Some(&one)).into_iter().map(|y| y.to_vec()).collect()
    }

    pub fn intersection(&self, l1: &LineInFiber, l2: &LineInFiber) -> Result<Intersection> {
        line_intersection_in(self, l1, l2)
    }
}

/// Two vectors completing `x` to a basis of the given 3-dimensional space.
fn complement_pair(field: &Field, x: &[Fe], plane: &[Vec<Fe>]) -> (Vec<Fe>, Vec<Fe>) {
    for i in 0..plane.len() {
        for j in i + 1..plane.len() {
            let m: Matrix = vec![x.to_vec(), plane[i].clone(), plane[j].clone()];
            if linalg::rank(field, &m) == 3 {
                return (plane[i].clone(), plane[j].clone());
            }
        }
    }
    unreachable!("x lies in its tangent plane")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RulingLabel {
    /// The square root of the discriminant attached to the line's ruling.
    pub sqrt_disc: Fe,
    pub parity: u8,
}

fn same_fiber(l1: &LineInFiber, l2: &LineInFiber) -> Result<()> {
    if l1.b != l2.b || l1.degree != l2.degree {
        return Err(Error::FiberMismatch);
    }
    Ok(())
}

fn line_intersection_in(fiber: &Fiber, l1: &LineInFiber, l2: &LineInFiber) -> Result<Intersection> {
    let (l1, l2) = if l1.degree == l2.degree { (l1.clone(), l2.clone()) } else { (fiber.to_quadratic(l1), fiber.to_quadratic(l2)) };
    let (field, _) = fiber.over(l1.degree);
    line_intersection(field, &l1, &l2)
}

/// Intersection of two lines of one fiber, over the field both live in.
pub fn line_intersection(field: &Field, l1: &LineInFiber, l2: &LineInFiber) -> Result<Intersection> {
    same_fiber(l1, l2)?;
    let mut stacked = l1.rows();
    stacked.extend(l2.rows());
    match linalg::rank(field, &stacked) {
        2 => Ok(Intersection::Same),
        4 => Ok(Intersection::Disjoint),
        _ => {
            // alpha a1 + beta b1 = gamma a2 + delta b2
            let cols = [l1.basis[0], l1.basis[1], l2.basis[0].map(|c| field.neg(c)), l2.basis[1].map(|c| field.neg(c))];
            let m: Matrix = (0..4).map(|i| cols.iter().map(|col| col[i]).collect()).collect();
            let ker = linalg::nullspace(field, &m, 4);
            let k = &ker[0];
            let point: Vec<Fe> = (0..4).map(|i| field.add(field.mul(k[0], l1.basis[0][i]), field.mul(k[1], l1.basis[1][i]))).collect();
            Ok(Intersection::Point(linalg::normalize(field, &point)))
        }
    }
}

/// 0 when the lines meet in even dimension (same ruling), 1 when odd.
pub fn ruling_of(field: &Field, line: &LineInFiber, reference: &LineInFiber) -> Result<u8> {
    same_fiber(line, reference)?;
    let mut stacked = line.rows();
    stacked.extend(reference.rows());
    let dim = 4 - linalg::rank(field, &stacked);
    Ok((dim % 2) as u8)
}

/// Lines of the fiber over `b` through `x`.
pub fn lines_through_point(fib: &FibrationSpec, ext: &Extension, b: &ProjPoint1, x: &[Fe]) -> Result<[LineInFiber; 2]> {
    Fiber::new(fib, ext, b)?.lines_through(x)
}

/// One point of `C` over `b`: a labeled line through `sigma(b)`.
#[derive(Clone, Debug)]
pub struct LineDatum {
    pub ext_degree: u32,
    pub b: ProjPoint1,
    pub b_label: String,
    pub parity: u8,
    pub sqrt_disc: Fe,
    pub line: LineInFiber,
    /// The field the line's entries live in.
    pub line_field: Field,
}

impl LineDatum {
    /// `u:v:+` for ruling 0 and `u:v:-` for ruling 1.
    pub fn key(&self) -> String {
        format!("{}:{}", self.b_label, if self.parity == 0 { '+' } else { '-' })
    }
}

/// Section data transported to the Fano side at the given fiber points.
#[derive(Clone, Debug)]
pub struct FiberCorrespondence {
    pub b: ProjPoint1,
    pub ext_degree: u32,
    pub point: Vec<Fe>,
    pub lines: [LineDatum; 2],
    /// The two lines meet exactly in `sigma(b)`.
    pub round_trip: bool,
    pub opposite_labels: bool,
}

pub fn section_to_line_data(fib: &FibrationSpec, sec: &Section, points: &[(Extension, ProjPoint1)]) -> Result<Vec<FiberCorrespondence>> {
    points
        .iter()
        .map(|(ext, b)| {
            let fiber = Fiber::new(fib, ext, b)?;
            let field = ext.field();
            let x = linalg::normalize(field, &sec.value_at(ext, b));
            let lines = fiber.lines_through(&x)?;
            let labels = [fiber.label(&lines[0])?, fiber.label(&lines[1])?];
            let meet = fiber.intersection(&lines[0], &lines[1])?;
            let x_in_line_field = if lines[0].degree == 1 { x.clone() } else { x.iter().map(|&c| fiber.quad.embed(c)).collect() };
            let round_trip = meet == Intersection::Point(x_in_line_field);
            let line_field = fiber.over(lines[0].degree).0.clone();
            let datum = |k: usize| LineDatum {
                ext_degree: ext.degree(),
                b: *b,
                b_label: b.display(field),
                parity: labels[k].parity,
                sqrt_disc: labels[k].sqrt_disc,
                line: lines[k].clone(),
                line_field: line_field.clone(),
            };
            Ok(FiberCorrespondence {
                b: *b,
                ext_degree: ext.degree(),
                point: x,
                lines: [datum(0), datum(1)],
                round_trip,
                opposite_labels: labels[0].parity != labels[1].parity,
            })
        })
        .collect()
}

/// All points of `P^1` off the discriminant over extensions of degree up to
/// `max_ext`, each with the extension it lives in. Points of smaller degree
/// are listed once, over the smallest field.
pub fn smooth_fiber_points(fib: &FibrationSpec, max_ext: u32) -> Result<Vec<(Extension, ProjPoint1)>> {
    let mut out = Vec::new();
    for m in 1..=max_ext {
        let ext = Extension::new(fib.field(), m)?;
        let disc = fib.discriminant().lift(&ext);
        for b in ProjPoint1::all(ext.field()) {
            let deg = ext.degree_of(b.u).max(ext.degree_of(b.v));
            if deg == m && !disc.evaluate_at(&b).is_zero() {
                out.push((ext.clone(), b));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GaloisSwap {
    /// The discriminant is a nonsquare at `b`.
    pub disc_nonsquare: bool,
    /// The two lines through a rational fiber point are not individually
    /// rational.
    pub lines_conjugate: bool,
}

impl GaloisSwap {
    pub fn agrees(&self) -> bool {
        self.disc_nonsquare == self.lines_conjugate
    }
}

/// Whether Frobenius exchanges the two rulings of the fiber over `b`.
pub fn galois_swap_check(fib: &FibrationSpec, ext: &Extension, b: &ProjPoint1) -> Result<GaloisSwap> {
    let fiber = Fiber::new(fib, ext, b)?;
    let x = fiber.rational_points().into_iter().next().ok_or(Error::NoRationalFiberPoint)?;
    let lines = fiber.lines_through(&x)?;
    let rational = lines.iter().filter(|l| fiber.to_rational(l).is_some()).count();
    Ok(GaloisSwap { disc_nonsquare: !fiber.disc_is_square(), lines_conjugate: rational == 0 })
}
