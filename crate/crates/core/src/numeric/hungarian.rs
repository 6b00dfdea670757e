// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{Error, Result};

/// Minimum-cost perfect assignment of rows to columns (Kuhn–Munkres).
///
/// Returns `perm` with row `i` assigned to column `perm[i]`. Among optimal
/// assignments the lexicographically smallest `perm` is returned; costs within
/// `1e-10 · (1 + |optimum|)` of each other count as ties.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = cost.len();
    for (i, row) in cost.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSquare);
        }
        if let Some(j) = row.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteEntry(i, j));
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let rows: Vec<usize> = (0..n).collect();
    let cols: Vec<usize> = (0..n).collect();
    let (optimum, plain) = min_cost(cost, &rows, &cols);
    let tolerance = 1e-10 * (1.0 + optimum.abs());

    // fix rows in order, each to the smallest column that keeps the optimum
    let mut perm = vec![usize::MAX; n];
    let mut free_cols = cols;
    let mut remaining = optimum;
    for i in 0..n {
        let rest_rows: Vec<usize> = (i + 1..n).collect();
        let mut fixed = false;
        for (slot, &c) in free_cols.iter().enumerate() {
            let mut rest_cols = free_cols.clone();
            rest_cols.remove(slot);
            let rest = if rest_rows.is_empty() {
                0.0
            } else {
                min_cost(cost, &rest_rows, &rest_cols).0
            };
            let total = cost[i][c] + rest;
            if total <= remaining + tolerance {
                perm[i] = c;
                remaining -= cost[i][c];
                free_cols.remove(slot);
                fixed = true;
                break;
            }
        }
        if !fixed {
            // only reachable through rounding; keep the plain optimum
            return Ok(plain);
        }
    }
    Ok(perm)
}

/// `Σ cost[i][perm[i]]`.
pub fn assignment_cost(cost: &[Vec<f64>], perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
}

/// O(n³) shortest-augmenting-path Hungarian method on the sub-matrix
/// `rows × cols` (equal lengths). Returns the optimal cost and, for each
/// position in `rows`, the assigned original column index.
fn min_cost(cost: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> (f64, Vec<usize>) {
    let n = rows.len();
    debug_assert_eq!(n, cols.len());
    let at = |i: usize, j: usize| cost[rows[i - 1]][cols[j - 1]];
    // 1-based potentials; column 0 is a virtual source
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let reduced = at(i0, j) - u[i0] - v[j];
                    if reduced < minv[j] {
                        minv[j] = reduced;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assigned = vec![0usize; n];
    for j in 1..=n {
        assigned[matched_row[j] - 1] = cols[j - 1];
    }
    let total = assigned
        .iter()
        .enumerate()
        .map(|(i, &c)| cost[rows[i]][c])
        .sum();
    (total, assigned)
}
