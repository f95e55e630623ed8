//! Small dense linear algebra over a [`Field`]: row reduction, rank, kernels.

use crate::gfpoly::{Fe, Field};

pub type Matrix = Vec<Vec<Fe>>;

/// Reduced row-echelon form in place; returns the pivot columns.
pub fn rref(f: &Field, m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, pr);
        let inv = f.inv(m[r][c]).expect("pivot is nonzero");
        for x in m[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c];
                for j in 0..cols {
                    let sub = f.mul(factor, m[r][j]);
                    m[i][j] = f.sub(m[i][j], sub);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank(f: &Field, m: &Matrix) -> usize {
    let mut work = m.clone();
    rref(f, &mut work).len()
}

/// Basis of `{x : m x = 0}`; one vector per free column, with a one there.
pub fn nullspace(f: &Field, m: &Matrix, cols: usize) -> Vec<Vec<Fe>> {
    let mut work = m.clone();
    let pivots = rref(f, &mut work);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![Fe::ZERO; cols];
        x[free] = f.one();
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = f.neg(work[row][free]);
        }
        out.push(x);
    }
    out
}

pub fn det(f: &Field, m: &Matrix) -> Fe {
    let n = m.len();
    let mut a = m.clone();
    let mut acc = f.one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !a[i][c].is_zero()) else { return Fe::ZERO };
        if pr != c {
            a.swap(pr, c);
            acc = f.neg(acc);
        }
        acc = f.mul(acc, a[c][c]);
        let inv = f.inv(a[c][c]).expect("pivot is nonzero");
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let factor = f.mul(a[i][c], inv);
            for j in c..n {
                let sub = f.mul(factor, a[c][j]);
                a[i][j] = f.sub(a[i][j], sub);
            }
        }
    }
    acc
}

pub fn mat_vec(f: &Field, m: &Matrix, x: &[Fe]) -> Vec<Fe> {
    m.iter().map(|row| f.dot(row, x)).collect()
}

/// `x^T g y`.
pub fn bilinear(f: &Field, g: &Matrix, x: &[Fe], y: &[Fe]) -> Fe {
    f.dot(x, &mat_vec(f, g, y))
}

pub fn quadratic(f: &Field, g: &Matrix, x: &[Fe]) -> Fe {
    bilinear(f, g, x, x)
}

/// Inverse of a square matrix, if it is invertible.
pub fn inverse(f: &Field, m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { f.one() } else { Fe::ZERO }));
            r
        })
        .collect();
    let pivots = rref(f, &mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| i != c) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Scale so the first nonzero entry is one; the zero vector is returned as is.
pub fn normalize(f: &Field, x: &[Fe]) -> Vec<Fe> {
    match x.iter().find(|c| !c.is_zero()) {
        Some(&lead) => {
            let inv = f.inv(lead).expect("nonzero");
            x.iter().map(|&c| f.mul(c, inv)).collect()
        }
        None => x.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(f: &Field, rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| f.from_i64(x)).collect()).collect()
    }

    #[test]
    fn kernel_and_rank() {
        let f = Field::prime(5).unwrap();
        let m = mat(&f, &[&[1, 2, 0, 0], &[2, 4, 0, 0], &[0, 0, 1, 1]]);
        assert_eq!(rank(&f, &m), 2);
        let ker = nullspace(&f, &m, 4);
        assert_eq!(ker.len(), 2);
        for x in &ker {
            assert!(mat_vec(&f, &m, x).iter().all(|c| c.is_zero()));
        }
    }

    #[test]
    fn determinant() {
        let f = Field::prime(7).unwrap();
        let m = mat(&f, &[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, 1, 0, 0], &[1, 0, 0, 0]]);
        assert_eq!(det(&f, &m), f.one());
        let m = mat(&f, &[&[2, 1], &[1, 4]]);
        assert_eq!(det(&f, &m), Fe::ZERO);
        assert!(inverse(&f, &m).is_none());
        let m = mat(&f, &[&[2, 1], &[1, 3]]);
        assert_eq!(det(&f, &m), f.from_i64(5));
        let inv = inverse(&f, &m).unwrap();
        for (i, row) in m.iter().enumerate() {
            for j in 0..2 {
                let c = f.sum((0..2).map(|k| f.mul(row[k], inv[k][j])));
                assert_eq!(c, if i == j { f.one() } else { Fe::ZERO });
            }
        }
        assert!(inverse(&f, &mat(&f, &[&[1, 2], &[2, 4]])).is_none());
    }
}
