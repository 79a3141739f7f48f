//! Small dense vector/matrix helpers.
//!
//! Everything in this crate works with short vectors (problem dimensions are
//! single digits), so plain `Vec<f64>` with explicit loops is simpler and
//! faster than pulling in a linear-algebra crate.

/// Dot product. Panics on length mismatch in debug builds.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `a + b` elementwise.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `a - b` elementwise.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `c * a` elementwise.
pub fn scale(c: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

/// `acc += c * a` in place.
pub fn axpy(acc: &mut [f64], c: f64, a: &[f64]) {
    debug_assert_eq!(acc.len(), a.len());
    for (t, x) in acc.iter_mut().zip(a) {
        *t += c * x;
    }
}

/// Numerical rank of a list of row vectors via Gaussian elimination with
/// partial pivoting. A pivot counts when its magnitude exceeds
/// `rel_tol * max_initial_entry` (absolute floor `rel_tol` when the matrix is
/// all zeros).
pub fn rank(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n = rows[0].len();
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let scale_max = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let threshold = if scale_max > 0.0 { rel_tol * scale_max } else { rel_tol };
    let mut rank = 0;
    let mut col = 0;
    while rank < m.len() && col < n {
        // Pick the largest remaining pivot in this column.
        let (pivot_row, pivot_val) = m[rank..]
            .iter()
            .enumerate()
            .map(|(i, r)| (rank + i, r[col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pivot_val <= threshold {
            col += 1;
            continue;
        }
        m.swap(rank, pivot_row);
        let pivot = m[rank][col];
        for i in rank + 1..m.len() {
            let f = m[i][col] / pivot;
            if f != 0.0 {
                for j in col..n {
                    let upper = m[rank][j];
                    m[i][j] -= f * upper;
                }
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

/// Solve a square linear system `A x = b` by Gaussian elimination with
/// partial pivoting. Returns `None` when the matrix is numerically singular
/// (pivot below `1e-12` times the largest initial entry).
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    let scale_max = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let threshold = 1e-12 * scale_max.max(1.0);
    for col in 0..n {
        let (pivot_row, pivot_val) = m[col..]
            .iter()
            .enumerate()
            .map(|(i, r)| (col + i, r[col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pivot_val <= threshold {
            return None;
        }
        m.swap(col, pivot_row);
        let pivot = m[col][col];
        for i in 0..n {
            if i != col && m[i][col] != 0.0 {
                let f = m[i][col] / pivot;
                for j in col..=n {
                    let upper = m[col][j];
                    m[i][j] -= f * upper;
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}
