//! Small exact dense linear algebra used by vertex enumeration.

use crate::rational::Rational;

/// Solves the square system `a x = b`; `None` when `a` is singular.
pub(crate) fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in &mut a[col][col..] {
            *x = &*x * &inv;
        }
        b[col] = &b[col] * &inv;
        let pivot = a[col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for (x, p) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                *x -= &(&factor * p);
            }
            let delta = &factor * &b[col];
            b[r] -= &delta;
        }
    }
    Some(b)
}

/// Rank of a (possibly non-square) matrix.
pub(crate) fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let Some(width) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].recip();
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let factor = &row[col] * &inv;
            for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *x -= &(&factor * p);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}
