//! Minimal exact Gaussian elimination: rank, linear solve, and nullspace
//! over rationals. Everything here is desk-scale dense.

use num_traits::Zero;

use crate::rat::Rational;

/// Reduced row-echelon form; returns pivot columns.
pub(crate) fn rref(a: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = a.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = a[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x /= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let d = &f * &a[r][j];
                    a[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

pub(crate) fn rank(mut a: Vec<Vec<Rational>>) -> usize {
    rref(&mut a).len()
}

/// One nullspace basis vector per free column of `a`.
pub(crate) fn nullspace(mut a: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
    if a.is_empty() {
        return Vec::new();
    }
    let cols = a[0].len();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Rational::zero(); cols];
            v[fc] = Rational::from_integer(1.into());
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][fc].clone();
            }
            v
        })
        .collect()
}

/// Solves `a x = b` when the system is uniquely determined; `None` when
/// singular or inconsistent.
pub(crate) fn solve_unique(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None; // inconsistent
    }
    if pivots.len() != cols {
        return None; // underdetermined
    }
    let mut x = vec![Rational::zero(); cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[r][cols].clone();
    }
    Some(x)
}
