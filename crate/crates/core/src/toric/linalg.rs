//! Small exact linear algebra over the rationals.

use crate::exact::Rational;

pub(crate) type Point = Vec<Rational>;

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sub(a: &[Rational], b: &[Rational]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Row-reduces `m` in place and returns the pivot columns.
fn row_reduce(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip().expect("pivot is nonzero");
        for x in m[row].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != row && !m[i][col].is_zero() {
                let factor = m[i][col].clone();
                let (pivot_row, target) = pair_mut(m, row, i);
                for (x, p) in target.iter_mut().zip(pivot_row.iter()) {
                    *x -= &(&factor * p);
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    pivots
}

pub(crate) fn rank(rows: &[Point]) -> usize {
    let mut m = rows.to_vec();
    row_reduce(&mut m).len()
}

/// Dimension of the affine hull of `points` (−1 for the empty set).
pub(crate) fn affine_dim(points: &[&Point]) -> isize {
    match points.split_first() {
        None => -1,
        Some((first, rest)) => {
            let diffs: Vec<Point> = rest.iter().map(|p| sub(p, first)).collect();
            rank(&diffs) as isize
        }
    }
}

/// Unique solution of the square system `a x = b`, if any.
pub(crate) fn solve(a: &[Point], b: &[Rational]) -> Option<Point> {
    let n = a.len();
    let mut m: Vec<Point> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = row_reduce(&mut m);
    if pivots.len() != n || pivots.iter().any(|&c| c >= n) {
        return None;
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// A nonzero vector spanning the kernel of `a` (with `cols` columns) when the
/// kernel is one-dimensional.
pub(crate) fn kernel_line(a: &[Point], cols: usize) -> Option<Point> {
    let mut m = a.to_vec();
    let pivots = row_reduce(&mut m);
    if pivots.len() + 1 != cols {
        return None;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut v = vec![Rational::zero(); cols];
    v[free] = Rational::one();
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[row][free].clone();
    }
    Some(v)
}

/// |det| of the square matrix `rows`.
pub(crate) fn abs_det(rows: &[Point]) -> Rational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&i| !m[i][col].is_zero()) else {
            return Rational::zero();
        };
        m.swap(col, p);
        let pivot = m[col][col].clone();
        det = &det * &pivot;
        for i in col + 1..n {
            if m[i][col].is_zero() {
                continue;
            }
            let factor = &m[i][col] / &pivot;
            let (pivot_row, target) = pair_mut(&mut m, col, i);
            for (x, p) in target[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= &(&factor * p);
            }
        }
    }
    det.abs()
}

/// Calls `visit` with every `size`-subset of `0..n`, in lexicographic order.
pub(crate) fn for_each_subset(n: usize, size: usize, mut visit: impl FnMut(&[usize])) {
    if size > n {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..size).rev().find(|&i| idx[i] != i + n - size) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Shared access to row `a` alongside mutable access to row `b`, `a != b`.
fn pair_mut<T>(m: &mut [Vec<T>], a: usize, b: usize) -> (&[T], &mut [T]) {
    if a < b {
        let (lo, hi) = m.split_at_mut(b);
        (&lo[a], &mut hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(a);
        (&hi[0], &mut lo[b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[i64]) -> Point {
        v.iter().map(|&x| Rational::from(x)).collect()
    }

    #[test]
    fn solves_and_detects_singularity() {
        let a = vec![pt(&[2, 1]), pt(&[1, 3])];
        let x = solve(&a, &pt(&[3, 5])).unwrap();
        assert_eq!(x, vec![Rational::frac(4, 5), Rational::frac(7, 5)]);
        assert!(solve(&[pt(&[1, 2]), pt(&[2, 4])], &pt(&[1, 2])).is_none());
    }

    #[test]
    fn determinant_and_rank() {
        assert_eq!(abs_det(&[pt(&[0, 1]), pt(&[1, 0])]), Rational::one());
        assert_eq!(
            abs_det(&[pt(&[2, 0, 0]), pt(&[0, 3, 0]), pt(&[1, 1, 1])]),
            Rational::from(6)
        );
        assert_eq!(rank(&[pt(&[1, 2]), pt(&[2, 4])]), 1);
    }

    #[test]
    fn kernel() {
        let k = kernel_line(&[pt(&[1, 1, 0]), pt(&[0, 1, 1])], 3).unwrap();
        assert_eq!(k, pt(&[1, -1, 1]));
        assert!(kernel_line(&[pt(&[1, 0, 0])], 3).is_none());
    }

    #[test]
    fn subsets() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut count = 0;
        for_each_subset(3, 0, |_| count += 1);
        assert_eq!(count, 1);
    }
}
