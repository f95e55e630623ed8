//! Sections `sigma: P^1 -> X`, given by a line subbundle `O(-f) -> E`, i.e. a
//! tuple of forms `s_i` of degree `f - d_i` with `sum gram_ij s_i s_j = 0`.
//!
//! Two exhaustive enumerators are provided: a direct walk over the projective
//! coefficient space, and an interpolation search that assembles sections from
//! their values on a few fibers. Both return the same sorted list.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fibration::FibrationSpec;
use crate::gfpoly::{BinaryForm, Extension, Fe, Field, ProjPoint1};
use crate::linalg::{self, Matrix};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Which coefficient slots exist for a given twist `f`: component `i` holds a
/// form of degree `f - d_i`, or nothing when that is negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    degs: [Option<usize>; 4],
    offsets: [usize; 4],
    len: usize,
}

impl Layout {
    pub fn new(d: &[i64; 4], f: i64) -> Layout {
        let degs = d.map(|di| usize::try_from(f - di).ok());
        let mut offsets = [0; 4];
        let mut len = 0;
        for i in 0..4 {
            offsets[i] = len;
            len += degs[i].map_or(0, |x| x + 1);
        }
        Layout { degs, offsets, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn degree(&self, i: usize) -> Option<usize> {
        self.degs[i]
    }

    pub fn split(&self, field: &Field, coeffs: &[Fe]) -> [BinaryForm; 4] {
        std::array::from_fn(|i| match self.degs[i] {
            Some(dd) => BinaryForm::new(field, coeffs[self.offsets[i]..self.offsets[i] + dd + 1].to_vec()),
            None => BinaryForm::zero(field),
        })
    }

    pub fn flatten(&self, s: &[BinaryForm; 4]) -> Vec<Fe> {
        let mut out = vec![Fe::ZERO; self.len];
        for i in 0..4 {
            if self.degs[i].is_some() {
                for (j, &c) in s[i].coeffs().iter().enumerate() {
                    out[self.offsets[i] + j] = c;
                }
            }
        }
        out
    }

    /// Values at `(u, v)` of every coefficient slot's monomial, so that
    /// `s_i(u, v)` is the dot product with the slot's coefficients.
    fn monomials(&self, field: &Field, u: Fe, v: Fe) -> Vec<(usize, Fe)> {
        let mut out = Vec::with_capacity(self.len);
        for i in 0..4 {
            if let Some(dd) = self.degs[i] {
                for c in 0..=dd {
                    let m = field.mul(field.pow(u, (dd - c) as u64), field.pow(v, c as u64));
                    out.push((i, m));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    d: [i64; 4],
    e: i64,
    f: i64,
    s: [BinaryForm; 4],
}

/// Outcome of re-checking a section from scratch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SectionCheck {
    pub degrees: bool,
    pub nonzero: bool,
    pub on_fibration: bool,
    pub saturated: bool,
    pub canonical: bool,
}

impl SectionCheck {
    pub fn ok(&self) -> bool {
        self.degrees && self.nonzero && self.on_fibration && self.saturated && self.canonical
    }
}

impl Section {
    /// Validates a candidate and rescales it canonically.
    pub fn new(fib: &FibrationSpec, f: i64, s: [BinaryForm; 4]) -> Result<Section> {
        let mut sec = Section { d: fib.d(), e: fib.e(), f, s };
        sec.canonicalize();
        let check = sec.check(fib);
        if !check.degrees {
            return Err(Error::InvalidInput(format!("component degrees do not match f = {f}")));
        }
        if !check.nonzero {
            return Err(Error::ZeroForm);
        }
        if !check.on_fibration {
            return Err(Error::InvalidInput("the tuple does not lie on the fibration".into()));
        }
        if !check.saturated {
            return Err(Error::InvalidInput("the components share a root (broken section)".into()));
        }
        Ok(sec)
    }

    pub(crate) fn from_coefficients(fib: &FibrationSpec, f: i64, coeffs: &[Fe]) -> Section {
        let layout = Layout::new(&fib.d(), f);
        Section { d: fib.d(), e: fib.e(), f, s: layout.split(fib.field(), coeffs) }
    }

    pub fn f(&self) -> i64 {
        self.f
    }

    pub fn components(&self) -> &[BinaryForm; 4] {
        &self.s
    }

    pub fn field(&self) -> &Field {
        self.s[0].field()
    }

    /// `-sum(d) + 2f - e`.
    pub fn height(&self) -> i64 {
        height_for(&self.d, self.e, self.f)
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.d, self.f)
    }

    /// All coefficient slots in scan order, zero-padded.
    pub fn coefficients(&self) -> Vec<Fe> {
        self.layout().flatten(&self.s)
    }

    /// Per component, the padded coefficient list (empty when `f < d_i`).
    pub fn coefficient_lists(&self) -> Vec<Vec<Fe>> {
        let layout = self.layout();
        let flat = layout.flatten(&self.s);
        (0..4)
            .map(|i| match layout.degs[i] {
                Some(dd) => flat[layout.offsets[i]..layout.offsets[i] + dd + 1].to_vec(),
                None => Vec::new(),
            })
            .collect()
    }

    pub fn has_zero_component(&self) -> bool {
        self.s.iter().any(|c| c.is_zero())
    }

    /// `sigma(b)` as a vector over the extension holding `b`.
    pub fn value_at(&self, ext: &Extension, b: &ProjPoint1) -> Vec<Fe> {
        self.s.iter().map(|c| c.lift(ext).evaluate_at(b)).collect()
    }

    fn canonicalize(&mut self) {
        let field = self.field().clone();
        let lead = self.s.iter().flat_map(|c| c.coeffs().iter()).find(|c| !c.is_zero()).copied();
        if let Some(lead) = lead {
            let inv = field.inv(lead).expect("nonzero");
            for c in self.s.iter_mut() {
                *c = c.scale(inv);
            }
        }
    }

    /// Recomputes every defining property with form arithmetic, independent
    /// of how the section was found.
    pub fn check(&self, fib: &FibrationSpec) -> SectionCheck {
        let degrees = (0..4).all(|i| self.s[i].fits_degree(self.f - self.d[i])) && self.d == fib.d() && self.e == fib.e();
        let nonzero = self.s.iter().any(|c| !c.is_zero());
        let on_fibration = degrees && quadratic_identity(fib, &self.s).is_ok_and(|q| q.is_zero());
        let saturated = nonzero && is_saturated(&self.s);
        let lead = self.s.iter().flat_map(|c| c.coeffs().iter()).find(|c| !c.is_zero());
        let canonical = lead.is_some_and(|&c| c == self.field().one());
        SectionCheck { degrees, nonzero, on_fibration, saturated, canonical }
    }
}

pub fn height_for(d: &[i64; 4], e: i64, f: i64) -> i64 {
    -d.iter().sum::<i64>() + 2 * f - e
}

/// The twist `f` of a section of height `h`, when the parity allows one.
pub fn twist_for(fib: &FibrationSpec, h: i64) -> Option<i64> {
    let twice = h + fib.sum_d() + fib.e();
    (twice.rem_euclid(2) == 0).then_some(twice / 2)
}

/// `sum_ij gram_ij s_i s_j`, a form of degree `2f + e`.
pub fn quadratic_identity(fib: &FibrationSpec, s: &[BinaryForm; 4]) -> Result<BinaryForm> {
    let field = fib.field();
    let two = field.from_u64(2);
    let mut acc = BinaryForm::zero(field);
    for i in 0..4 {
        for j in i..4 {
            let term = fib.entry(i, j).mul(&s[i])?.mul(&s[j])?;
            acc = acc.add(&if i == j { term } else { term.scale(two) })?;
        }
    }
    Ok(acc)
}

fn is_saturated(s: &[BinaryForm; 4]) -> bool {
    let mut g: Option<BinaryForm> = None;
    for c in s.iter().filter(|c| !c.is_zero()) {
        g = Some(match g {
            None => c.monic(),
            Some(acc) => acc.gcd(c).expect("nonzero"),
        });
    }
    g.is_some_and(|g| g.degree() == Some(0))
}

/// `None` if the coefficients do not give a point of the fibration, otherwise
/// whether the tuple is saturated.
fn classify(fib: &FibrationSpec, layout: &Layout, coeffs: &[Fe]) -> Option<bool> {
    if coeffs.iter().all(|c| c.is_zero()) {
        return None;
    }
    let s = layout.split(fib.field(), coeffs);
    if !quadratic_identity(fib, &s).ok()?.is_zero() {
        return None;
    }
    Some(is_saturated(&s))
}

fn canonical_vector(field: &Field, v: &[Fe]) -> Vec<Fe> {
    linalg::normalize(field, v)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Strategy {
    #[default]
    Auto,
    Direct,
    Interpolation,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub budget: u64,
    pub strategy: Strategy,
    pub exec: Exec,
    pub max_ext: u32,
    /// Also collect tuples on the fibration whose components share a root.
    /// Only the direct strategy can see them.
    pub include_broken: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: DEFAULT_BUDGET, strategy: Strategy::Auto, exec: Exec::default(), max_ext: 2, include_broken: false }
    }
}

impl SearchOptions {
    pub fn with_budget(budget: u64) -> Self {
        SearchOptions { budget, ..Default::default() }
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub height: i64,
    pub f: Option<i64>,
    pub strategy: Strategy,
    /// Candidate tuples charged against the budget.
    pub cost: u64,
    pub sections: Vec<Section>,
    pub broken: Vec<Section>,
}

impl Enumeration {
    fn empty(height: i64, f: Option<i64>) -> Self {
        Enumeration { height, f, strategy: Strategy::Direct, cost: 0, sections: Vec::new(), broken: Vec::new() }
    }
}

fn saturating_pow(q: u64, n: usize) -> u64 {
    (0..n).fold(1u64, |acc, _| acc.saturating_mul(q))
}

/// Size of the raw coefficient space at twist `f`.
pub fn direct_cost(fib: &FibrationSpec, f: i64) -> u64 {
    saturating_pow(fib.field().order(), Layout::new(&fib.d(), f).len())
}

/// All sections of height exactly `h`, canonically scaled, sorted by their
/// coefficient sequences.
pub fn enumerate_sections(fib: &FibrationSpec, h: i64, opts: &SearchOptions) -> Result<Enumeration> {
    if opts.budget == 0 {
        return Err(Error::InvalidInput("budget must be positive".into()));
    }
    let Some(f) = twist_for(fib, h) else { return Ok(Enumeration::empty(h, None)) };
    let layout = Layout::new(&fib.d(), f);
    if layout.is_empty() {
        return Ok(Enumeration::empty(h, Some(f)));
    }
    let direct = direct_cost(fib, f);
    let run_direct = |cost| -> Result<Enumeration> {
        let (sections, broken) = direct_search(fib, f, &layout, opts)?;
        Ok(Enumeration { height: h, f: Some(f), strategy: Strategy::Direct, cost, sections, broken })
    };
    let run_interp = |plan: Interpolation| -> Result<Enumeration> {
        let cost = plan.estimate;
        let sections = plan.run(fib, opts)?;
        Ok(Enumeration { height: h, f: Some(f), strategy: Strategy::Interpolation, cost, sections, broken: Vec::new() })
    };
    match opts.strategy {
        Strategy::Direct => {
            if direct > opts.budget {
                return Err(Error::BudgetExceeded { needed: direct, budget: opts.budget });
            }
            run_direct(direct)
        }
        Strategy::Interpolation => {
            let plan = Interpolation::plan(fib, f, opts)?;
            if plan.estimate > opts.budget {
                return Err(Error::BudgetExceeded { needed: plan.estimate, budget: opts.budget });
            }
            run_interp(plan)
        }
        Strategy::Auto => {
            if direct <= opts.budget {
                return run_direct(direct);
            }
            match Interpolation::plan(fib, f, opts) {
                Ok(plan) if plan.estimate <= opts.budget => run_interp(plan),
                Ok(plan) => Err(Error::BudgetExceeded { needed: direct.min(plan.estimate), budget: opts.budget }),
                Err(Error::BudgetExceeded { needed, .. }) => Err(Error::BudgetExceeded { needed: direct.min(needed), budget: opts.budget }),
                Err(Error::NotEnoughInterpolationPoints { .. }) => Err(Error::BudgetExceeded { needed: direct, budget: opts.budget }),
                Err(other) => Err(other),
            }
        }
    }
}

fn direct_search(fib: &FibrationSpec, f: i64, layout: &Layout, opts: &SearchOptions) -> Result<(Vec<Section>, Vec<Section>)> {
    let field = fib.field();
    let n = layout.len();
    let basis: Vec<Vec<Fe>> = (0..n)
        .map(|i| {
            let mut v = vec![Fe::ZERO; n];
            v[i] = field.one();
            v
        })
        .collect();
    let search = SubspaceSearch::new(fib, f, layout, basis);
    let (good, broken) = search.run(opts.exec, opts.include_broken);
    let wrap = |v: Vec<Vec<Fe>>| v.into_iter().map(|c| Section::from_coefficients(fib, f, &c)).collect();
    Ok((wrap(good), wrap(broken)))
}

/// Values of one coefficient basis at a rational point of `P^1`.
struct Filter {
    gram: Matrix,
    vals: Vec<[Fe; 4]>,
}

impl Filter {
    fn new(fib: &FibrationSpec, layout: &Layout, basis: &[Vec<Fe>], b: &ProjPoint1) -> Filter {
        let field = fib.field();
        let gram = fib.rational_fiber(b).matrix;
        let monos = layout.monomials(field, b.u, b.v);
        let vals = basis
            .iter()
            .map(|vec| {
                let mut out = [Fe::ZERO; 4];
                for (&c, &(i, m)) in vec.iter().zip(&monos) {
                    if !c.is_zero() {
                        out[i] = field.add(out[i], field.mul(c, m));
                    }
                }
                out
            })
            .collect();
        Filter { gram, vals }
    }

    fn value(&self, field: &Field, lam: &[Fe]) -> [Fe; 4] {
        let mut out = [Fe::ZERO; 4];
        for (&l, val) in lam.iter().zip(&self.vals) {
            if l.is_zero() {
                continue;
            }
            for i in 0..4 {
                out[i] = field.add(out[i], field.mul(l, val[i]));
            }
        }
        out
    }

    fn passes(&self, field: &Field, lam: &[Fe]) -> bool {
        linalg::quadratic(field, &self.gram, &self.value(field, lam)).is_zero()
    }
}

/// Solutions `a` of `c2 a^2 + 2 c1 a + c0 = 0`.
enum Roots {
    All,
    Some(Vec<Fe>),
}

fn solve_quadratic(field: &Field, c2: Fe, c1: Fe, c0: Fe) -> Roots {
    if c2.is_zero() {
        if c1.is_zero() {
            return if c0.is_zero() { Roots::All } else { Roots::Some(Vec::new()) };
        }
        let two_c1 = field.add(c1, c1);
        return Roots::Some(vec![field.neg(field.div(c0, two_c1).expect("nonzero"))]);
    }
    let disc = field.sub(field.mul(c1, c1), field.mul(c2, c0));
    let inv = field.inv(c2).expect("nonzero");
    if disc.is_zero() {
        return Roots::Some(vec![field.mul(field.neg(c1), inv)]);
    }
    if !field.is_square(disc) {
        return Roots::Some(Vec::new());
    }
    let r = field.sqrt(disc).expect("square");
    let mut out = vec![field.mul(field.sub(r, c1), inv), field.mul(field.neg(field.add(r, c1)), inv)];
    out.sort_unstable();
    Roots::Some(out)
}

/// Walks the projective space of a coefficient subspace, solving for the
/// last coordinate at the first filter point and testing the others.
struct SubspaceSearch<'a> {
    fib: &'a FibrationSpec,
    layout: &'a Layout,
    basis: Vec<Vec<Fe>>,
    filters: Vec<Filter>,
}

type Hits = (Vec<Vec<Fe>>, Vec<Vec<Fe>>);

impl<'a> SubspaceSearch<'a> {
    fn new(fib: &'a FibrationSpec, f: i64, layout: &'a Layout, basis: Vec<Vec<Fe>>) -> Self {
        // 2f + e + 1 points pin down a form of degree 2f + e; fewer still prune
        let wanted = (2 * f + fib.e() + 1).clamp(1, 8) as usize;
        let filters = ProjPoint1::all(fib.field()).take(wanted).map(|b| Filter::new(fib, layout, &basis, &b)).collect();
        SubspaceSearch { fib, layout, basis, filters }
    }

    fn run(&self, exec: Exec, include_broken: bool) -> Hits {
        let k = self.basis.len();
        if k == 0 {
            return (Vec::new(), Vec::new());
        }
        let field = self.fib.field();
        let mut strata: Vec<(usize, Option<Fe>)> = Vec::new();
        for piv in 0..k {
            if piv + 2 < k {
                strata.extend(field.elements().map(|c| (piv, Some(c))));
            } else {
                strata.push((piv, None));
            }
        }
        let parts = exec.map(&strata, |&(piv, fixed)| self.stratum(piv, fixed, include_broken));
        let mut good = Vec::new();
        let mut broken = Vec::new();
        for (g, b) in parts {
            good.extend(g);
            broken.extend(b);
        }
        good.sort_unstable();
        good.dedup();
        broken.sort_unstable();
        broken.dedup();
        (good, broken)
    }

    fn stratum(&self, piv: usize, fixed: Option<Fe>, include_broken: bool) -> Hits {
        let field = self.fib.field();
        let k = self.basis.len();
        let mut lam = vec![Fe::ZERO; k];
        lam[piv] = field.one();
        let mut hits = (Vec::new(), Vec::new());
        if piv == k - 1 {
            self.finish(&lam, include_broken, &mut hits);
            return hits;
        }
        let mut start = piv + 1;
        if let Some(c) = fixed {
            lam[piv + 1] = c;
            start = piv + 2;
        }
        let acc = self.filters[0].value(field, &lam);
        self.walk(start, &mut lam, acc, include_broken, &mut hits);
        hits
    }

    fn walk(&self, pos: usize, lam: &mut Vec<Fe>, acc: [Fe; 4], include_broken: bool, hits: &mut Hits) {
        let field = self.fib.field();
        let k = self.basis.len();
        let f0 = &self.filters[0];
        if pos == k - 1 {
            let c = f0.vals[pos];
            let gc = linalg::mat_vec(field, &f0.gram, &c);
            let c2 = field.dot(&c, &gc);
            let c1 = field.dot(&acc, &gc);
            let c0 = linalg::quadratic(field, &f0.gram, &acc);
            match solve_quadratic(field, c2, c1, c0) {
                Roots::All => {
                    for a in field.elements() {
                        lam[pos] = a;
                        self.finish(lam, include_broken, hits);
                    }
                }
                Roots::Some(roots) => {
                    for a in roots {
                        lam[pos] = a;
                        self.finish(lam, include_broken, hits);
                    }
                }
            }
            lam[pos] = Fe::ZERO;
            return;
        }
        let val = f0.vals[pos];
        for c in field.elements() {
            lam[pos] = c;
            let mut next = acc;
            if !c.is_zero() {
                for i in 0..4 {
                    next[i] = field.add(next[i], field.mul(c, val[i]));
                }
            }
            self.walk(pos + 1, lam, next, include_broken, hits);
        }
        lam[pos] = Fe::ZERO;
    }

    fn finish(&self, lam: &[Fe], include_broken: bool, hits: &mut Hits) {
        let field = self.fib.field();
        if !self.filters.iter().all(|flt| flt.passes(field, lam)) {
            return;
        }
        let mut coeffs = vec![Fe::ZERO; self.layout.len()];
        for (&l, vec) in lam.iter().zip(&self.basis) {
            if l.is_zero() {
                continue;
            }
            for (c, &x) in coeffs.iter_mut().zip(vec) {
                *c = field.add(*c, field.mul(l, x));
            }
        }
        match classify(self.fib, self.layout, &coeffs) {
            Some(true) => hits.0.push(canonical_vector(field, &coeffs)),
            Some(false) if include_broken => hits.1.push(canonical_vector(field, &coeffs)),
            _ => {}
        }
    }
}

/// Cone points of one fiber, bucketed by the coordinates that earlier
/// fibers already determine.
struct Cone {
    points: Vec<[Fe; 4]>,
    index: HashMap<Vec<Fe>, Vec<u32>>,
}

/// Fiber-interpolation search: a section of twist `f` is determined by its
/// values on `max(f - d_i) + 1` fibers; each value is a cone point, and
/// components of lower degree are already forced on later fibers.
struct Interpolation {
    f: i64,
    ext: Extension,
    layout: Layout,
    points: Vec<ProjPoint1>,
    /// `Some(j)` when this point is the Frobenius image of point `j`.
    conj_of: Vec<Option<usize>>,
    /// Coordinates fixed by Lagrange interpolation at each level.
    forced: Vec<Vec<usize>>,
    /// `weights[dd][j][m]`: the degree-`dd` Lagrange basis form for point `m`
    /// evaluated at point `j`.
    weights: Vec<Vec<Vec<Fe>>>,
    /// Coefficients of those basis forms.
    basis_forms: Vec<Vec<Vec<Fe>>>,
    cones: Vec<Option<Cone>>,
    estimate: u64,
}

impl Interpolation {
    fn plan(fib: &FibrationSpec, f: i64, opts: &SearchOptions) -> Result<Interpolation> {
        let layout = Layout::new(&fib.d(), f);
        let degs: Vec<usize> = (0..4).filter_map(|i| layout.degree(i)).collect();
        let max_deg = *degs.iter().max().expect("nonempty layout");
        let needed = max_deg + 1;
        let (ext, points, conj_of) = choose_points(fib, needed, opts.max_ext)?;
        let field = ext.field().clone();
        let q = fib.field().order();

        // building each leader cone scans the cube of its field
        let leaders = conj_of.iter().filter(|c| c.is_none()).count() as u64;
        let scan = saturating_pow(field.order(), 3).saturating_mul(leaders);
        if scan > opts.budget {
            return Err(Error::BudgetExceeded { needed: scan, budget: opts.budget });
        }

        let forced: Vec<Vec<usize>> = (0..needed).map(|j| (0..4).filter(|&i| layout.degree(i).is_some_and(|dd| dd < j)).collect()).collect();

        let lagrange = |dd: usize, m: usize, at: &ProjPoint1| -> Fe {
            let mut num = field.one();
            let mut den = field.one();
            let pm = &points[m];
            for (r, pr) in points.iter().enumerate().take(dd + 1) {
                if r == m {
                    continue;
                }
                num = field.mul(num, field.sub(field.mul(pr.v, at.u), field.mul(pr.u, at.v)));
                den = field.mul(den, field.sub(field.mul(pr.v, pm.u), field.mul(pr.u, pm.v)));
            }
            field.div(num, den).expect("distinct points")
        };
        let weights: Vec<Vec<Vec<Fe>>> =
            (0..=max_deg).map(|dd| points.iter().map(|pj| (0..=dd).map(|m| lagrange(dd, m, pj)).collect()).collect()).collect();
        let basis_forms: Vec<Vec<Vec<Fe>>> = (0..=max_deg)
            .map(|dd| {
                (0..=dd)
                    .map(|m| {
                        let mut form = BinaryForm::constant(&field, field.one());
                        let mut den = field.one();
                        let pm = &points[m];
                        for (r, pr) in points.iter().enumerate().take(dd + 1) {
                            if r == m {
                                continue;
                            }
                            form = form.mul(&BinaryForm::vanishing_at(&field, pr)).expect("same field");
                            den = field.mul(den, field.sub(field.mul(pr.v, pm.u), field.mul(pr.u, pm.v)));
                        }
                        let inv = field.inv(den).expect("distinct points");
                        let mut c = form.scale(inv).coeffs().to_vec();
                        c.resize(dd + 1, Fe::ZERO);
                        c
                    })
                    .collect()
            })
            .collect();

        let base_in_ext: Vec<Fe> = fib.field().elements().skip(1).map(|a| ext.embed(a)).collect();
        let mut cones = Vec::with_capacity(needed);
        for j in 0..needed {
            if conj_of[j].is_some() {
                cones.push(None);
                continue;
            }
            let deg = point_degree(&ext, &points[j]);
            let fiber = fib.fiber_at(&ext, &points[j]);
            let mut pts = affine_cone(&field, &fiber.matrix, |y| {
                (0..4).all(|i| layout.degree(i).is_some() || y[i].is_zero()) && y.iter().all(|&c| field.frobenius(c, fib.field().degree() * deg) == c)
            });
            if j == 0 {
                // one representative per scaling class by base-field scalars
                pts.retain(|y| {
                    let lead = *y.iter().find(|c| !c.is_zero()).expect("nonzero");
                    base_in_ext.iter().all(|&a| field.mul(lead, a) >= lead)
                });
            }
            let mut index: HashMap<Vec<Fe>, Vec<u32>> = HashMap::new();
            if !forced[j].is_empty() {
                for (n, y) in pts.iter().enumerate() {
                    index.entry(forced[j].iter().map(|&i| y[i]).collect()).or_default().push(n as u32);
                }
            }
            cones.push(Some(Cone { points: pts, index }));
        }

        // expected nodes: each free level multiplies by the cone size over
        // the values its forced coordinates can take
        let mut level = 1u128;
        let mut total = scan as u128;
        for j in 0..needed {
            if let Some(cone) = &cones[j] {
                let deg = point_degree(&ext, &points[j]);
                let qd = (q as u128).saturating_pow(deg);
                let denom = qd.saturating_pow(forced[j].len() as u32).max(1);
                let branch = (cone.points.len() as u128 / denom).max(1);
                level = level.saturating_mul(branch);
            }
            total = total.saturating_add(level);
        }
        let estimate = u64::try_from(total).unwrap_or(u64::MAX);
        Ok(Interpolation { f, ext, layout, points, conj_of, forced, weights, basis_forms, cones, estimate })
    }

    fn run(&self, fib: &FibrationSpec, opts: &SearchOptions) -> Result<Vec<Section>> {
        let first = self.cones[0].as_ref().expect("the first point leads its orbit");
        let counter = AtomicU64::new(0);
        let abort = AtomicBool::new(false);
        let ctx = Dfs { plan: self, fib, counter: &counter, abort: &abort, budget: opts.budget };
        let starts: Vec<usize> = (0..first.points.len()).collect();
        let parts = opts.exec.map(&starts, |&n| {
            let mut vals = vec![first.points[n]];
            let mut out = Vec::new();
            ctx.descend(&mut vals, &mut out);
            out
        });
        if abort.load(Ordering::Relaxed) {
            return Err(Error::BudgetExceeded { needed: self.estimate.max(counter.load(Ordering::Relaxed)), budget: opts.budget });
        }
        let mut coeffs: Vec<Vec<Fe>> = parts.into_iter().flatten().collect();
        coeffs.sort_unstable();
        coeffs.dedup();
        Ok(coeffs.into_iter().map(|c| Section::from_coefficients(fib, self.f, &c)).collect())
    }
}

struct Dfs<'a> {
    plan: &'a Interpolation,
    fib: &'a FibrationSpec,
    counter: &'a AtomicU64,
    abort: &'a AtomicBool,
    budget: u64,
}

impl Dfs<'_> {
    fn descend(&self, vals: &mut Vec<[Fe; 4]>, out: &mut Vec<Vec<Fe>>) {
        if self.abort.load(Ordering::Relaxed) {
            return;
        }
        if self.counter.fetch_add(1, Ordering::Relaxed) >= self.budget {
            self.abort.store(true, Ordering::Relaxed);
            return;
        }
        let plan = self.plan;
        let j = vals.len();
        if j == plan.points.len() {
            if let Some(c) = self.leaf(vals) {
                out.push(c);
            }
            return;
        }
        let field = plan.ext.field();
        let predicted: Vec<Fe> = plan.forced[j]
            .iter()
            .map(|&i| {
                let dd = plan.layout.degree(i).expect("forced coordinates exist");
                field.dot(&plan.weights[dd][j], &vals[..=dd].iter().map(|y| y[i]).collect::<Vec<_>>())
            })
            .collect();
        if let Some(src) = plan.conj_of[j] {
            let y = vals[src].map(|c| plan.ext.frobenius(c));
            if plan.forced[j].iter().zip(&predicted).all(|(&i, &p)| y[i] == p) {
                vals.push(y);
                self.descend(vals, out);
                vals.pop();
            }
            return;
        }
        let cone = plan.cones[j].as_ref().expect("leader");
        if plan.forced[j].is_empty() {
            for y in &cone.points {
                vals.push(*y);
                self.descend(vals, out);
                vals.pop();
            }
        } else if let Some(ids) = cone.index.get(&predicted) {
            for &n in ids {
                vals.push(cone.points[n as usize]);
                self.descend(vals, out);
                vals.pop();
            }
        }
    }

    fn leaf(&self, vals: &[[Fe; 4]]) -> Option<Vec<Fe>> {
        let plan = self.plan;
        let field = plan.ext.field();
        let mut coeffs = Vec::with_capacity(plan.layout.len());
        for i in 0..4 {
            let Some(dd) = plan.layout.degree(i) else { continue };
            for c in 0..=dd {
                let x = field.sum((0..=dd).map(|m| field.mul(vals[m][i], plan.basis_forms[dd][m][c])));
                coeffs.push(plan.ext.restrict(x)?);
            }
        }
        let base = self.fib.field();
        match classify(self.fib, &plan.layout, &coeffs) {
            Some(true) => Some(canonical_vector(base, &coeffs)),
            _ => None,
        }
    }
}

fn point_degree(ext: &Extension, b: &ProjPoint1) -> u32 {
    ext.degree_of(b.u).max(ext.degree_of(b.v))
}

/// Interpolation nodes: rational points off the discriminant first, then
/// whole Frobenius orbits over the smallest extension providing enough.
fn choose_points(fib: &FibrationSpec, needed: usize, max_ext: u32) -> Result<(Extension, Vec<ProjPoint1>, Vec<Option<usize>>)> {
    for m in 1..=max_ext.max(1) {
        let ext = Extension::new(fib.field(), m)?;
        let field = ext.field();
        let disc = fib.discriminant().lift(&ext);
        let mut candidates: Vec<(u32, ProjPoint1)> =
            ProjPoint1::all(field).filter(|b| !disc.evaluate_at(b).is_zero()).map(|b| (point_degree(&ext, &b), b)).collect();
        if candidates.len() < needed {
            continue;
        }
        candidates.sort_by_key(|&(deg, b)| (deg, b));
        let mut taken: Vec<ProjPoint1> = Vec::new();
        let mut conj_of = Vec::new();
        for &(deg, b) in &candidates {
            if taken.len() >= needed {
                break;
            }
            if taken.contains(&b) {
                continue;
            }
            let mut cur = b;
            for r in 0..deg {
                if taken.len() >= needed {
                    break;
                }
                conj_of.push((r > 0).then(|| taken.len() - 1));
                taken.push(cur);
                cur = ProjPoint1 { u: ext.frobenius(cur.u), v: ext.frobenius(cur.v) };
            }
        }
        return Ok((ext, taken, conj_of));
    }
    Err(Error::NotEnoughInterpolationPoints { needed })
}

/// Nonzero `y` with `y^T g y = 0`, found by solving for the last coordinate.
pub(crate) fn affine_cone(field: &Field, g: &Matrix, keep: impl Fn(&[Fe; 4]) -> bool) -> Vec<[Fe; 4]> {
    let e4 = [Fe::ZERO, Fe::ZERO, Fe::ZERO, field.one()];
    let g4 = linalg::mat_vec(field, g, &e4);
    let c2 = g4[3];
    let mut out = Vec::new();
    for y1 in field.elements() {
        for y2 in field.elements() {
            for y3 in field.elements() {
                let head = [y1, y2, y3, Fe::ZERO];
                let c1 = field.dot(&head, &g4);
                let c0 = linalg::quadratic(field, g, &head);
                let roots = match solve_quadratic(field, c2, c1, c0) {
                    Roots::All => field.elements().collect(),
                    Roots::Some(r) => r,
                };
                for y4 in roots {
                    let y = [y1, y2, y3, y4];
                    if y.iter().any(|c| !c.is_zero()) && keep(&y) {
                        out.push(y);
                    }
                }
            }
        }
    }
    out
}

/// Lowest twist at which some component can be nonzero.
pub fn min_twist(fib: &FibrationSpec) -> i64 {
    *fib.d().iter().min().expect("four entries")
}

#[derive(Clone, Debug)]
pub struct MinHeight {
    pub height: i64,
    pub witness: Section,
    pub count: usize,
    /// `delta/2 - 2 - e`.
    pub bound: i64,
    pub within_bound: bool,
}

/// The lowest height carrying a section, scanning upwards to `h_max`.
pub fn min_height_section(fib: &FibrationSpec, h_max: i64, opts: &SearchOptions) -> Result<Option<MinHeight>> {
    require_nontrivial_cover(fib)?;
    let bound = existence_bound(fib);
    let mut f = min_twist(fib);
    while height_for(&fib.d(), fib.e(), f) <= h_max {
        let h = height_for(&fib.d(), fib.e(), f);
        let found = enumerate_sections(fib, h, opts)?;
        if let Some(witness) = found.sections.first() {
            return Ok(Some(MinHeight { height: h, witness: witness.clone(), count: found.sections.len(), bound, within_bound: h <= bound }));
        }
        f += 1;
    }
    Ok(None)
}

/// Height below which a section is guaranteed: `delta/2 - 2` when `e = 0`,
/// `delta/2 - 3` when `e = 1`.
pub fn existence_bound(fib: &FibrationSpec) -> i64 {
    fib.delta() / 2 - 2 - fib.e()
}

fn require_nontrivial_cover(fib: &FibrationSpec) -> Result<()> {
    if fib.delta() <= 0 {
        return Err(Error::Precondition("the discriminant has degree 0".into()));
    }
    if !fib.has_squarefree_discriminant() {
        return Err(Error::Precondition("the discriminant is not squarefree".into()));
    }
    Ok(())
}

/// `sigma(b)` is required to be the point `x` of the fiber over `b`. Points
/// over the quadratic extension stand for themselves and their conjugate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointConstraint {
    pub ext_degree: u32,
    pub b: ProjPoint1,
    pub x: [Fe; 4],
}

impl PointConstraint {
    pub fn rational(b: ProjPoint1, x: [Fe; 4]) -> Self {
        PointConstraint { ext_degree: 1, b, x }
    }

    /// Number of geometric points imposed.
    pub fn weight(&self) -> i64 {
        self.ext_degree as i64
    }

    fn validate(&self, fib: &FibrationSpec, ext: &Extension) -> Result<()> {
        let field = ext.field();
        let label = self.b.display(field);
        if fib.discriminant().lift(ext).evaluate_at(&self.b).is_zero() {
            return Err(Error::ConstraintOnDiscriminant(label));
        }
        if self.x.iter().all(|c| c.is_zero()) {
            return Err(Error::InvalidInput(format!("constraint at {label} has the zero vector")));
        }
        if self.ext_degree == 2 && point_degree(ext, &self.b) != 2 {
            return Err(Error::InvalidInput(format!("constraint at {label} is not a conjugate pair")));
        }
        let fiber = fib.fiber_at(ext, &self.b);
        if !fiber.quadratic(&self.x).is_zero() {
            return Err(Error::ConstraintOffQuadric(label));
        }
        Ok(())
    }

    /// Whether `sigma(b)` is proportional to `x`.
    pub fn satisfied_by(&self, fib: &FibrationSpec, sec: &Section) -> Result<bool> {
        let ext = Extension::new(fib.field(), self.ext_degree)?;
        let field = ext.field();
        let val = sec.value_at(&ext, &self.b);
        Ok(linalg::normalize(field, &val) == linalg::normalize(field, &self.x))
    }
}

#[derive(Clone, Debug)]
pub struct WeakApprox {
    pub height: i64,
    pub section: Section,
    /// `3 delta / 2 + 2N`.
    pub bound: i64,
    pub within_bound: bool,
    /// Dimension of the linear coefficient space searched at that height.
    pub subspace_dim: usize,
}

/// `3 delta / 2 + 2N`, with `N` counting geometric points.
pub fn weak_approx_bound(fib: &FibrationSpec, constraints: &[PointConstraint]) -> i64 {
    3 * fib.delta() / 2 + 2 * constraints.iter().map(PointConstraint::weight).sum::<i64>()
}

/// Lowest-height section through every constraint point, up to `h_max`
/// (default: the weak-approximation bound).
pub fn weak_approx_search(
    fib: &FibrationSpec,
    constraints: &[PointConstraint],
    h_max: Option<i64>,
    opts: &SearchOptions,
) -> Result<Option<WeakApprox>> {
    let base = fib.field();
    let quad = Extension::new(base, 2)?;
    let ident = Extension::identity(base);
    for (n, c) in constraints.iter().enumerate() {
        let ext = match c.ext_degree {
            1 => &ident,
            2 => &quad,
            other => return Err(Error::InvalidInput(format!("constraints over degree-{other} extensions are not supported"))),
        };
        c.validate(fib, ext)?;
        for other in &constraints[..n] {
            if other.ext_degree == c.ext_degree && other.b == c.b {
                return Err(Error::Precondition(format!("repeated constraint at {}", c.b.display(ext.field()))));
            }
        }
    }
    let bound = weak_approx_bound(fib, constraints);
    let h_max = h_max.unwrap_or(bound);
    // a basis of F_{q^2} over F_q is {1, beta}
    let beta = quad.field().elements().find(|&y| quad.degree_of(y) == 2).expect("proper extension");

    let mut f = min_twist(fib);
    while height_for(&fib.d(), fib.e(), f) <= h_max {
        let h = height_for(&fib.d(), fib.e(), f);
        let layout = Layout::new(&fib.d(), f);
        f += 1;
        if layout.is_empty() {
            continue;
        }
        let mut rows: Matrix = Vec::new();
        for c in constraints {
            let ext = if c.ext_degree == 1 { &ident } else { &quad };
            let field = ext.field();
            let monos = layout.monomials(field, c.b.u, c.b.v);
            // sigma(b) is parallel to x iff every functional killing x kills it
            let annihilator = linalg::nullspace(field, &vec![c.x.to_vec()], 4);
            for a in annihilator {
                let row: Vec<Fe> = monos.iter().map(|&(i, m)| field.mul(a[i], m)).collect();
                if c.ext_degree == 1 {
                    rows.push(row);
                } else {
                    rows.push(row.iter().map(|&y| quad.trace(y)).collect());
                    rows.push(row.iter().map(|&y| quad.trace(field.mul(beta, y))).collect());
                }
            }
        }
        let basis = if rows.is_empty() {
            (0..layout.len())
                .map(|i| {
                    let mut v = vec![Fe::ZERO; layout.len()];
                    v[i] = base.one();
                    v
                })
                .collect()
        } else {
            linalg::nullspace(base, &rows, layout.len())
        };
        let cost = saturating_pow(base.order(), basis.len());
        if cost > opts.budget {
            return Err(Error::BudgetExceeded { needed: cost, budget: opts.budget });
        }
        let dim = basis.len();
        let search = SubspaceSearch::new(fib, f - 1, &layout, basis);
        let (good, _) = search.run(opts.exec, false);
        if let Some(first) = good.first() {
            let section = Section::from_coefficients(fib, f - 1, first);
            return Ok(Some(WeakApprox { height: h, section, bound, within_bound: h <= bound, subspace_dim: dim }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    /// `-delta/2`.
    pub threshold: i64,
    pub heights_scanned: Vec<i64>,
    pub hypothesis_holds: bool,
    #[serde(skip)]
    pub offending: Vec<Section>,
    pub semistable: Option<String>,
}

/// Searches for sections of height below `-delta/2`.
pub fn check_stability_hypothesis(fib: &FibrationSpec, opts: &SearchOptions) -> Result<StabilityReport> {
    require_nontrivial_cover(fib)?;
    let threshold = -fib.delta() / 2;
    let mut heights = Vec::new();
    let mut offending = Vec::new();
    let mut f = min_twist(fib);
    while height_for(&fib.d(), fib.e(), f) < threshold {
        let h = height_for(&fib.d(), fib.e(), f);
        heights.push(h);
        offending.extend(enumerate_sections(fib, h, opts)?.sections);
        f += 1;
    }
    let holds = offending.is_empty();
    let semistable = holds.then(|| {
        "every section has height >= -delta/2 and the double cover is ramified, so the Fano bundle \
         P(V) -> C is the projectivization of a semistable rank-two bundle"
            .to_string()
    });
    Ok(StabilityReport { threshold, heights_scanned: heights, hypothesis_holds: holds, offending, semistable })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeightCount {
    pub height: i64,
    pub count: usize,
    pub strategy: Strategy,
}

/// Exact number of sections at each height in `h_min..=h_max`.
pub fn count_by_height(fib: &FibrationSpec, h_min: i64, h_max: i64, opts: &SearchOptions) -> Result<Vec<HeightCount>> {
    (h_min..=h_max)
        .map(|h| {
            let found = enumerate_sections(fib, h, opts)?;
            Ok(HeightCount { height: h, count: found.sections.len(), strategy: found.strategy })
        })
        .collect()
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

    fn opts(strategy: Strategy) -> SearchOptions {
        SearchOptions { strategy, ..Default::default() }
    }

    #[test]
    fn heights_from_twists() {
        assert_eq!(height_for(&[0; 4], 1, 0), -1);
        assert_eq!(height_for(&[0; 4], 1, 1), 1);
        assert_eq!(height_for(&[1, 1, 0, 0], 0, 1), 0);
    }

    #[test]
    fn layout_round_trip() {
        let f = Field::prime(5).unwrap();
        let layout = Layout::new(&[1, 0, 2, 0], 1);
        assert_eq!(layout.len(), 1 + 2 + 2);
        let coeffs: Vec<Fe> = (1..=5).map(|x| f.from_u64(x)).collect();
        let s = layout.split(&f, &coeffs);
        assert!(s[2].is_zero());
        assert_eq!(s[1].degree(), Some(1));
        assert_eq!(layout.flatten(&s), coeffs);
    }

    #[test]
    fn quadratic_roots() {
        let f = Field::prime(7).unwrap();
        // a^2 - 2 = 0 has roots 3, 4 mod 7
        let Roots::Some(r) = solve_quadratic(&f, f.one(), Fe::ZERO, f.from_i64(-2)) else { panic!() };
        assert_eq!(r.iter().map(|x| x.raw()).collect::<Vec<_>>(), vec![3, 4]);
        let Roots::Some(r) = solve_quadratic(&f, f.one(), Fe::ZERO, f.from_i64(-3)) else { panic!() };
        assert!(r.is_empty());
        assert!(matches!(solve_quadratic(&f, Fe::ZERO, Fe::ZERO, Fe::ZERO), Roots::All));
    }

    #[test]
    fn worked_example_constant_section() {
        let fib = worked();
        let f = fib.field().clone();
        let found = enumerate_sections(&fib, -1, &opts(Strategy::Direct)).unwrap();
        let target: Vec<Fe> = [1, 0, 1, 1].iter().map(|&x| f.from_u64(x)).collect();
        assert!(found.sections.iter().any(|s| s.coefficients() == target));
        for s in &found.sections {
            assert!(s.check(&fib).ok());
            assert_eq!(s.height(), -1);
        }
        assert!(enumerate_sections(&fib, 0, &SearchOptions::default()).unwrap().sections.is_empty());
        assert!(enumerate_sections(&fib, -3, &SearchOptions::default()).unwrap().sections.is_empty());
    }

    #[test]
    fn strategies_agree_on_worked_example() {
        let fib = worked();
        for h in [-1, 1] {
            let a = enumerate_sections(&fib, h, &opts(Strategy::Direct)).unwrap();
            let b = enumerate_sections(&fib, h, &opts(Strategy::Interpolation)).unwrap();
            assert_eq!(a.sections, b.sections, "height {h}");
            assert!(!a.sections.is_empty());
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let fib = worked();
        for strategy in [Strategy::Direct, Strategy::Interpolation] {
            let seq = SearchOptions { exec: Exec::Sequential, ..opts(strategy) };
            let par = SearchOptions { exec: Exec::Parallel, ..opts(strategy) };
            let a = enumerate_sections(&fib, 1, &seq).unwrap();
            let b = enumerate_sections(&fib, 1, &par).unwrap();
            assert_eq!(a.sections, b.sections);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let fib = worked();
        let tiny = SearchOptions { budget: 10, strategy: Strategy::Direct, ..Default::default() };
        assert_eq!(enumerate_sections(&fib, 1, &tiny).unwrap_err(), Error::BudgetExceeded { needed: 3u64.pow(8), budget: 10 });
    }

    #[test]
    fn broken_sections_are_reported_separately() {
        let fib = worked();
        let o = SearchOptions { include_broken: true, ..opts(Strategy::Direct) };
        let found = enumerate_sections(&fib, 1, &o).unwrap();
        // u * (constant section) is on the fibration but not saturated
        let f = fib.field().clone();
        let times_u: Vec<Fe> = [1, 0, 0, 0, 1, 0, 1, 0].iter().map(|&x| f.from_u64(x)).collect();
        assert!(found.broken.iter().any(|s| s.coefficients() == times_u));
        assert!(found.broken.iter().all(|s| !s.check(&fib).saturated));
        assert!(!found.sections.iter().any(|s| s.coefficients() == times_u));
    }

    #[test]
    fn minimal_height_meets_bound() {
        let fib = worked();
        let m = min_height_section(&fib, 5, &SearchOptions::default()).unwrap().unwrap();
        assert_eq!(m.height, -1);
        assert_eq!(m.bound, -1);
        assert!(m.within_bound);
    }

    #[test]
    fn stability_vacuous_for_worked_example() {
        let r = check_stability_hypothesis(&worked(), &SearchOptions::default()).unwrap();
        assert!(r.hypothesis_holds);
        assert!(r.heights_scanned.is_empty());
        assert!(r.semistable.is_some());
    }

    #[test]
    fn constraint_validation() {
        let f = Field::prime(5).unwrap();
        let diag = [
            BinaryForm::from_i64s(&f, &[1, 0]),
            BinaryForm::from_i64s(&f, &[0, 1]),
            BinaryForm::from_i64s(&f, &[1, 1]),
            BinaryForm::from_i64s(&f, &[1, -2]),
        ];
        let fib = FibrationSpec::diagonal(&f, [0; 4], 1, diag).unwrap();
        let x = |v: [u64; 4]| v.map(|c| f.from_u64(c));
        let on_disc = PointConstraint::rational(ProjPoint1 { u: Fe::ZERO, v: f.one() }, x([1, 0, 0, 0]));
        assert!(matches!(weak_approx_search(&fib, &[on_disc], None, &SearchOptions::default()), Err(Error::ConstraintOnDiscriminant(_))));
        let b = ProjPoint1::affine(&f, f.one());
        let off = PointConstraint::rational(b, x([1, 1, 0, 0]));
        assert!(matches!(weak_approx_search(&fib, &[off], None, &SearchOptions::default()), Err(Error::ConstraintOffQuadric(_))));
        let good = PointConstraint::rational(b, x([1, 2, 0, 0]));
        let found = weak_approx_search(&fib, std::slice::from_ref(&good), None, &SearchOptions::default()).unwrap().unwrap();
        assert!(good.satisfied_by(&fib, &found.section).unwrap());
        assert!(found.within_bound);
        assert!(found.section.check(&fib).ok());
    }
}
