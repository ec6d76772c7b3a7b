//! Dense linear algebra over the coefficient field.

use num_traits::Zero;

use crate::field::{Coeff, Field};

pub type Matrix = Vec<Vec<Coeff>>;

pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
    vec![vec![field.zero(); cols]; rows]
}

pub fn identity(field: Field, n: usize) -> Matrix {
    let mut m = zeros(field, n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = field.one();
    }
    m
}

pub fn mat_mul(field: Field, a: &Matrix, b: &Matrix) -> Matrix {
    let rows = a.len();
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let mut out = zeros(field, rows, cols);
    for i in 0..rows {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cols {
                if !b[k][j].is_zero() {
                    out[i][j] = field.add(&out[i][j], &field.mul(&a[i][k], &b[k][j]));
                }
            }
        }
    }
    out
}

/// Row echelon form in place; returns pivot columns.
pub fn row_reduce(field: Field, m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = field.inv(&m[r][c]);
        for j in c..cols {
            m[r][j] = field.mul(&m[r][j], &inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = field.mul(&f, &m[r][j]);
                    m[i][j] = field.sub(&m[i][j], &t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(field: Field, m: &Matrix) -> usize {
    let mut a = m.clone();
    row_reduce(field, &mut a).len()
}

/// Basis of `{v : m v = 0}`.
pub fn nullspace(field: Field, m: &Matrix, cols: usize) -> Vec<Vec<Coeff>> {
    let mut a = m.clone();
    let pivots = row_reduce(field, &mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![field.zero(); cols];
            v[fc] = field.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(&a[r][fc]);
            }
            v
        })
        .collect()
}

pub fn det(field: Field, m: &Matrix) -> Coeff {
    let n = m.len();
    let mut a = m.clone();
    let mut d = field.one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return field.zero();
        };
        if p != c {
            a.swap(p, c);
            d = field.neg(&d);
        }
        d = field.mul(&d, &a[c][c]);
        let inv = field.inv(&a[c][c]);
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = field.mul(&a[i][c], &inv);
            for j in c..n {
                let t = field.mul(&f, &a[c][j]);
                a[i][j] = field.sub(&a[i][j], &t);
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_nullspace_det() {
        let f = Field::Rationals;
        let m: Matrix = vec![
            vec![f.from_i64(1), f.from_i64(2), f.from_i64(3)],
            vec![f.from_i64(2), f.from_i64(4), f.from_i64(6)],
        ];
        assert_eq!(rank(f, &m), 1);
        let ns = nullspace(f, &m, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let col: Matrix = v.iter().map(|c| vec![c.clone()]).collect();
            assert!(mat_mul(f, &m, &col).iter().all(|r| r[0].is_zero()));
        }
        let sq: Matrix = vec![vec![f.from_i64(2), f.from_i64(1)], vec![f.from_i64(1), f.from_i64(1)]];
        assert_eq!(det(f, &sq), f.one());
    }
}
