//! Quadric surface fibrations over `P^1` given by a symmetric 4x4 Gram matrix
//! of binary forms, `q: E -> E^v (x) I` with `E = O(-d1) + .. + O(-d4)` and
//! `deg I = e`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfpoly::{projective_roots, BinaryForm, Extension, Fe, Field, ProjPoint1};
use crate::linalg::{self, Matrix};

pub type Gram = [[BinaryForm; 4]; 4];

/// Upper-triangular index pairs in row-major order, as used by the file format.
pub const UPPER: [(usize, usize); 10] = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Case {
    Case1,
    Case2,
    Case3,
    Case4,
    Unbalanced,
}

impl Case {
    /// Number of summands raised by one over the minimum, for balanced cases.
    fn raised(self) -> Option<i64> {
        match self {
            Case::Case1 => Some(0),
            Case::Case2 => Some(1),
            Case::Case3 => Some(2),
            Case::Case4 => Some(3),
            Case::Unbalanced => None,
        }
    }

    pub fn from_index(i: u32) -> Option<Case> {
        [Case::Case1, Case::Case2, Case::Case3, Case::Case4].get(i.checked_sub(1)? as usize).copied()
    }

    /// Classification from the multiset of twists.
    pub fn classify(d: &[i64; 4]) -> Case {
        let mut s = *d;
        s.sort_unstable();
        let lo = s[0];
        if s.iter().any(|&x| x != lo && x != lo + 1) {
            return Case::Unbalanced;
        }
        match s.iter().filter(|&&x| x == lo + 1).count() {
            0 => Case::Case1,
            1 => Case::Case2,
            2 => Case::Case3,
            3 => Case::Case4,
            _ => unreachable!("the minimum is attained"),
        }
    }

    /// Degree pattern of the census family with parameter `n`:
    /// `n = 2m + e`, and the raised summands come first.
    pub fn pattern(self, n: i64) -> Result<([i64; 4], i64)> {
        let raised = self.raised().ok_or_else(|| Error::InvalidInput("no census pattern for unbalanced bundles".into()))?;
        if n < 0 {
            return Err(Error::InvalidInput("census parameter n must be nonnegative".into()));
        }
        let (m, e) = (n.div_euclid(2), n.rem_euclid(2));
        let mut d = [m; 4];
        for x in d.iter_mut().take(raised as usize) {
            *x += 1;
        }
        Ok((d, e))
    }

    /// Residues `(delta mod 8, epsilon, genus mod 4)` forced on the census
    /// family `(self, n)`, with the genus taken as `delta/2 - 1` (so `-1` when
    /// `delta = 0`) and reduced into `-1..=2`.
    pub fn census_row(self, n: i64) -> Result<CensusRow> {
        let (d, e) = self.pattern(n)?;
        let delta = 2 * d.iter().sum::<i64>() + 4 * e;
        Ok(CensusRow { delta_mod_8: delta.rem_euclid(8), epsilon: e, genus_mod_4: genus_residue(delta / 2 - 1) })
    }
}

/// `g mod 4` as a representative in `-1..=2`.
pub fn genus_residue(g: i64) -> i64 {
    (g + 1).rem_euclid(4) - 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub delta_mod_8: i64,
    pub epsilon: i64,
    pub genus_mod_4: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FibrationInvariants {
    pub delta: i64,
    /// Genus of the discriminant double cover; absent when `delta < 2` or the
    /// discriminant is not squarefree.
    pub genus: Option<i64>,
    pub epsilon: i64,
    #[serde(rename = "heightX")]
    pub height_x: i64,
    pub case: Case,
    #[serde(rename = "degE")]
    pub deg_e: i64,
    pub squarefree: bool,
}

/// Evaluation of the Gram matrix at a point.
#[derive(Clone, Debug)]
pub struct FiberMatrix {
    pub field: Field,
    pub point: ProjPoint1,
    pub matrix: Matrix,
    pub rank: usize,
    /// The cone point, when the fiber has rank three.
    pub kernel: Option<Vec<Fe>>,
}

impl FiberMatrix {
    pub fn is_smooth(&self) -> bool {
        self.rank == 4
    }

    pub fn quadratic(&self, x: &[Fe]) -> Fe {
        linalg::quadratic(&self.field, &self.matrix, x)
    }

    pub fn determinant(&self) -> Fe {
        linalg::det(&self.field, &self.matrix)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibrationSpec {
    field: Field,
    d: [i64; 4],
    e: i64,
    gram: Gram,
    disc: BinaryForm,
}

impl FibrationSpec {
    /// Builds and validates a fibration from a full symmetric Gram matrix.
    /// `e` must already be normalized to 0 or 1; see [`normalize`] otherwise.
    pub fn new(field: &Field, d: [i64; 4], e: i64, gram: Gram) -> Result<Self> {
        if e != 0 && e != 1 {
            return Err(Error::InvalidSpec(format!("e = {e} is not normalized to 0 or 1")));
        }
        Self::build(field, d, e, gram)
    }

    /// Builds from the ten upper-triangular entries in row-major order.
    pub fn from_upper(field: &Field, d: [i64; 4], e: i64, upper: Vec<BinaryForm>) -> Result<Self> {
        if upper.len() != 10 {
            return Err(Error::InvalidSpec(format!("expected 10 Gram entries, got {}", upper.len())));
        }
        let mut gram: Gram = std::array::from_fn(|_| std::array::from_fn(|_| BinaryForm::zero(field)));
        for (&(i, j), form) in UPPER.iter().zip(upper) {
            gram[j][i] = form.clone();
            gram[i][j] = form;
        }
        Self::new(field, d, e, gram)
    }

    /// Diagonal Gram matrix.
    pub fn diagonal(field: &Field, d: [i64; 4], e: i64, diag: [BinaryForm; 4]) -> Result<Self> {
        let mut gram: Gram = std::array::from_fn(|_| std::array::from_fn(|_| BinaryForm::zero(field)));
        for (i, form) in diag.into_iter().enumerate() {
            gram[i][i] = form;
        }
        Self::new(field, d, e, gram)
    }

    fn build(field: &Field, d: [i64; 4], e: i64, gram: Gram) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                let g = &gram[i][j];
                if g.field() != field {
                    return Err(Error::SpecMismatch);
                }
                if g != &gram[j][i] {
                    return Err(Error::InvalidSpec(format!("Gram entry ({},{}) breaks symmetry", i + 1, j + 1)));
                }
                let want = d[i] + d[j] + e;
                if !g.fits_degree(want) {
                    return Err(Error::InvalidSpec(format!(
                        "Gram entry ({},{}) has degree {} but the pattern requires {}",
                        i + 1,
                        j + 1,
                        g.degree().expect("nonzero"),
                        want
                    )));
                }
            }
        }
        let disc = determinant(&gram)?;
        if disc.is_zero() {
            return Err(Error::DegenerateForm);
        }
        Ok(FibrationSpec { field: field.clone(), d, e, gram, disc })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn d(&self) -> [i64; 4] {
        self.d
    }

    pub fn e(&self) -> i64 {
        self.e
    }

    pub fn sum_d(&self) -> i64 {
        self.d.iter().sum()
    }

    pub fn gram(&self) -> &Gram {
        &self.gram
    }

    pub fn entry(&self, i: usize, j: usize) -> &BinaryForm {
        &self.gram[i][j]
    }

    /// The Gram determinant, a form of degree `2 sum(d) + 4e`.
    pub fn discriminant(&self) -> &BinaryForm {
        &self.disc
    }

    /// `delta` from the degree formula.
    pub fn delta(&self) -> i64 {
        2 * self.sum_d() + 4 * self.e
    }

    pub fn has_squarefree_discriminant(&self) -> bool {
        self.disc.is_squarefree().expect("discriminant is nonzero")
    }

    pub fn invariants(&self) -> FibrationInvariants {
        let delta = self.delta();
        debug_assert_eq!(self.disc.degree(), Some(delta as usize));
        let squarefree = self.has_squarefree_discriminant();
        FibrationInvariants {
            delta,
            genus: (delta >= 2 && squarefree).then_some(delta / 2 - 1),
            epsilon: self.e,
            height_x: 4 * delta,
            case: Case::classify(&self.d),
            deg_e: -self.sum_d(),
            squarefree,
        }
    }

    /// The Gram matrix with coefficients pushed into an extension.
    pub fn gram_over(&self, ext: &Extension) -> Gram {
        std::array::from_fn(|i| std::array::from_fn(|j| self.gram[i][j].lift(ext)))
    }

    /// The fiber over `b`, a point over `ext`.
    pub fn fiber_at(&self, ext: &Extension, b: &ProjPoint1) -> FiberMatrix {
        let f = ext.field();
        let matrix: Matrix = (0..4).map(|i| (0..4).map(|j| self.gram[i][j].lift(ext).evaluate_at(b)).collect()).collect();
        let rank = linalg::rank(f, &matrix);
        let kernel = (rank == 3).then(|| {
            let ker = linalg::nullspace(f, &matrix, 4);
            linalg::normalize(f, &ker[0])
        });
        FiberMatrix { field: f.clone(), point: *b, matrix, rank, kernel }
    }

    pub fn rational_fiber(&self, b: &ProjPoint1) -> FiberMatrix {
        self.fiber_at(&Extension::identity(&self.field), b)
    }

    /// Rank of every singular fiber is exactly three, decided without
    /// locating roots: the 3x3 cofactors have no common zero with the
    /// discriminant.
    pub fn singular_fibers_have_corank_one(&self) -> bool {
        let mut acc = self.disc.clone();
        for i in 0..4 {
            for j in i..4 {
                let minor = cofactor(&self.gram, i, j).expect("consistent degrees");
                acc = acc.gcd(&minor).expect("discriminant is nonzero");
            }
        }
        acc.degree() == Some(0)
    }

    /// The same check by explicit root enumeration up to `max_ext`; only
    /// decisive when every root of the discriminant is found.
    pub fn singular_fiber_ranks(&self, max_ext: u32, budget: u64) -> Result<Vec<(u32, String, usize)>> {
        let roots = projective_roots(&self.disc, max_ext, budget)?;
        let mut out = Vec::new();
        let mut cache: Vec<Extension> = Vec::new();
        for r in roots {
            let ext = match cache.iter().find(|e| e.degree() == r.degree) {
                Some(e) => e.clone(),
                None => {
                    let e = Extension::new(&self.field, r.degree)?;
                    cache.push(e.clone());
                    e
                }
            };
            let fiber = self.fiber_at(&ext, &r.point);
            out.push((r.degree, r.point.display(&r.field), fiber.rank));
        }
        Ok(out)
    }

    /// Rational points of `P^1` off the discriminant.
    pub fn smooth_points(&self, ext: &Extension) -> Vec<ProjPoint1> {
        let disc = self.disc.lift(ext);
        ProjPoint1::all(ext.field()).filter(|b| !disc.evaluate_at(b).is_zero()).collect()
    }
}

/// Determinant of a square matrix of forms by cofactor expansion.
pub fn determinant(m: &[[BinaryForm; 4]; 4]) -> Result<BinaryForm> {
    let rows: Vec<Vec<BinaryForm>> = m.iter().map(|r| r.to_vec()).collect();
    det_rec(&rows)
}

fn det_rec(m: &[Vec<BinaryForm>]) -> Result<BinaryForm> {
    let n = m.len();
    let field = m[0][0].field().clone();
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let mut acc = BinaryForm::zero(&field);
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<BinaryForm>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = entry.mul(&det_rec(&minor)?)?;
        acc = if j % 2 == 0 { acc.add(&term)? } else { acc.sub(&term)? };
    }
    Ok(acc)
}

/// The (i, j) 3x3 minor of a 4x4 matrix of forms.
fn cofactor(m: &Gram, i: usize, j: usize) -> Result<BinaryForm> {
    let minor: Vec<Vec<BinaryForm>> = (0..4).filter(|&r| r != i).map(|r| (0..4).filter(|&c| c != j).map(|c| m[r][c].clone()).collect()).collect();
    det_rec(&minor)
}

/// Twists `(d, e)` by a line bundle so that `e` becomes 0 or 1; the Gram
/// entries are untouched.
pub fn normalize(field: &Field, d: [i64; 4], e: i64, gram: Gram) -> Result<FibrationSpec> {
    let (d, e, _) = normalize_twist(d, e)?;
    FibrationSpec::build(field, d, e, gram)
}

/// The shift `c` with `d + c` and `e - 2c`, where `e - 2c` is 0 or 1.
pub fn normalize_twist(d: [i64; 4], e: i64) -> Result<([i64; 4], i64, i64)> {
    let c = e.div_euclid(2);
    let shifted = d.map(|x| x + c);
    if shifted.iter().any(|&x| x < 0) {
        return Err(Error::Inconsistent);
    }
    Ok((shifted, e - 2 * c, c))
}

/// A Gram matrix with the given degree pattern and uniform coefficients.
pub fn random_gram<R: Rng + ?Sized>(field: &Field, d: [i64; 4], e: i64, rng: &mut R) -> Gram {
    let mut gram: Gram = std::array::from_fn(|_| std::array::from_fn(|_| BinaryForm::zero(field)));
    for &(i, j) in UPPER.iter() {
        let deg = d[i] + d[j] + e;
        if deg < 0 {
            continue;
        }
        let form = BinaryForm::new(field, (0..=deg).map(|_| field.sample(rng)).collect());
        gram[i][j] = form.clone();
        gram[j][i] = form;
    }
    gram
}

/// A random member of the census family `(case, n)` with squarefree
/// discriminant, by rejection sampling. Returns the number of tries used.
pub fn sample_census<R: Rng + ?Sized>(field: &Field, case: Case, n: i64, tries: u64, rng: &mut R) -> Result<(FibrationSpec, u64)> {
    let (d, e) = case.pattern(n)?;
    for attempt in 1..=tries {
        let gram = random_gram(field, d, e, rng);
        match FibrationSpec::new(field, d, e, gram) {
            Ok(fib) if fib.has_squarefree_discriminant() => return Ok((fib, attempt)),
            Ok(_) | Err(Error::DegenerateForm) => continue,
            Err(other) => return Err(other),
        }
    }
    Err(Error::SamplingExhausted { tries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> FibrationSpec {
        let f = Field::prime(3).unwrap();
        let diag = [
            BinaryForm::from_i64s(&f, &[1, 0]),
            BinaryForm::from_i64s(&f, &[0, 1]),
            BinaryForm::from_i64s(&f, &[1, 1]),
            BinaryForm::from_i64s(&f, &[1, -1]),
        ];
        FibrationSpec::diagonal(&f, [0; 4], 1, diag).unwrap()
    }

    #[test]
    fn diagonal_discriminant() {
        let fib = worked();
        let f = fib.field().clone();
        assert_eq!(fib.discriminant(), &BinaryForm::from_i64s(&f, &[0, 1, 0, -1, 0]));
        let inv = fib.invariants();
        assert_eq!((inv.delta, inv.genus, inv.epsilon, inv.height_x), (4, Some(1), 1, 16));
        assert_eq!(inv.case, Case::Case1);
        assert!(fib.has_squarefree_discriminant());
        assert!(fib.singular_fibers_have_corank_one());
    }

    #[test]
    fn antidiagonal_determinant_is_one() {
        let f = Field::prime(3).unwrap();
        let one = BinaryForm::constant(&f, f.one());
        let mut gram: Gram = std::array::from_fn(|_| std::array::from_fn(|_| BinaryForm::zero(&f)));
        for i in 0..4 {
            gram[i][3 - i] = one.clone();
        }
        let fib = FibrationSpec::new(&f, [0; 4], 0, gram).unwrap();
        // direct expansion: the permutation (14)(23) is even
        assert_eq!(fib.discriminant(), &one);
        assert!(fib.has_squarefree_discriminant());
        let b = ProjPoint1::affine(&f, f.one());
        assert_eq!(fib.rational_fiber(&b).rank, 4);
    }

    #[test]
    fn zero_row_is_degenerate() {
        let f = Field::prime(3).unwrap();
        let u = BinaryForm::u(&f);
        let diag = [BinaryForm::zero(&f), u.clone(), u.clone(), u];
        assert_eq!(FibrationSpec::diagonal(&f, [0; 4], 1, diag), Err(Error::DegenerateForm));
    }

    #[test]
    fn fiber_evaluation() {
        let fib = worked();
        let f = fib.field().clone();
        let at = |t: i64| fib.rational_fiber(&ProjPoint1::affine(&f, f.from_i64(t)));
        let one = at(1);
        let diag: Vec<u64> = (0..4).map(|i| one.matrix[i][i].raw()).collect();
        assert_eq!(diag, vec![1, 1, 2, 0]);
        assert_eq!(one.rank, 3);
        assert_eq!(one.kernel.as_ref().unwrap(), &vec![Fe::ZERO, Fe::ZERO, Fe::ZERO, f.one()]);
        let two = at(2);
        let diag: Vec<u64> = (0..4).map(|i| two.matrix[i][i].raw()).collect();
        assert_eq!(diag, vec![1, 2, 0, 2]);
        assert_eq!(two.kernel.as_ref().unwrap(), &vec![Fe::ZERO, Fe::ZERO, f.one(), Fe::ZERO]);
    }

    #[test]
    fn repeated_factor_is_not_squarefree() {
        let f = Field::prime(5).unwrap();
        // diag(u^2, v^2 + u v, 1, 1) with d = (1, 1, 0, 0), e = 0
        let diag = [
            BinaryForm::from_i64s(&f, &[1, 0, 0]),
            BinaryForm::from_i64s(&f, &[0, 1, 1]),
            BinaryForm::constant(&f, f.one()),
            BinaryForm::constant(&f, f.one()),
        ];
        let fib = FibrationSpec::diagonal(&f, [1, 1, 0, 0], 0, diag).unwrap();
        assert!(!fib.has_squarefree_discriminant());
        // the fiber over [0:1] still has rank three: corank one does not
        // imply a reduced discriminant
        assert!(fib.singular_fibers_have_corank_one());
    }

    #[test]
    fn classification() {
        assert_eq!(Case::classify(&[0, 0, 0, 0]), Case::Case1);
        assert_eq!(Case::classify(&[1, 0, 0, 0]), Case::Case2);
        assert_eq!(Case::classify(&[0, 1, 0, 1]), Case::Case3);
        assert_eq!(Case::classify(&[1, 1, 1, 0]), Case::Case4);
        assert_eq!(Case::classify(&[2, 0, 0, 0]), Case::Unbalanced);
        assert_eq!(Case::Case3.pattern(1).unwrap(), ([1, 1, 0, 0], 1));
        assert_eq!(Case::Case1.pattern(3).unwrap(), ([1, 1, 1, 1], 1));
    }

    #[test]
    fn invariants_from_degree_patterns() {
        let f = Field::prime(5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        use rand::SeedableRng;
        for (d, e, delta, case) in [([0, 0, 0, 0], 1, 4, Case::Case1), ([1, 0, 0, 0], 1, 6, Case::Case2), ([1, 1, 0, 0], 0, 4, Case::Case3)] {
            let fib = loop {
                if let Ok(fib) = FibrationSpec::new(&f, d, e, random_gram(&f, d, e, &mut rng)) {
                    break fib;
                }
            };
            let inv = fib.invariants();
            assert_eq!(inv.delta, delta);
            assert_eq!(inv.height_x, 4 * delta);
            assert_eq!(inv.case, case);
            assert_eq!(fib.discriminant().degree(), Some(delta as usize));
        }
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_twist([0, 0, -1, -1], 2).unwrap(), ([1, 1, 0, 0], 0, 1));
        assert_eq!(normalize_twist([0, 0, 0, 0], 1).unwrap(), ([0, 0, 0, 0], 1, 0));
        assert_eq!(normalize_twist([2, 2, 2, 2], 3).unwrap(), ([3, 3, 3, 3], 1, 1));
        assert_eq!(normalize_twist([0, 0, 0, -3], 1), Err(Error::Inconsistent));
        let (d, e, _) = normalize_twist([1, 1, 0, 0], 0).unwrap();
        assert_eq!(normalize_twist(d, e).unwrap(), (d, e, 0));
    }

    #[test]
    fn sampler_hits_requested_pattern() {
        use rand::SeedableRng;
        let f = Field::prime(3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let (fib, tries) = sample_census(&f, Case::Case4, 0, 1000, &mut rng).unwrap();
        let inv = fib.invariants();
        assert_eq!((inv.delta, inv.genus, inv.epsilon), (6, Some(2), 0));
        assert!(tries >= 1);
        let (fib, _) = sample_census(&f, Case::Case2, 0, 1000, &mut rng).unwrap();
        let inv = fib.invariants();
        assert_eq!((inv.delta, inv.genus, inv.epsilon), (2, Some(0), 0));
    }

    #[test]
    fn census_rows_follow_the_degree_formula() {
        let row = Case::Case3.census_row(1).unwrap();
        assert_eq!((row.delta_mod_8, row.epsilon, row.genus_mod_4), (0, 1, -1));
        let row = Case::Case1.census_row(0).unwrap();
        assert_eq!((row.delta_mod_8, row.epsilon, row.genus_mod_4), (0, 0, -1));
        assert_eq!(genus_residue(3), -1);
        assert_eq!(genus_residue(6), 2);
        assert!(Case::Unbalanced.census_row(0).is_err());
    }
}
