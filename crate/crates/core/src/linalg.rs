//! Exact Gaussian elimination over the Gaussian rationals.

use crate::scalar::GaussianRational;

/// Rank of a dense row-major matrix with `ncols` columns.
pub fn rank(mut rows: Vec<Vec<GaussianRational>>, ncols: usize) -> usize {
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].inv().expect("pivot is nonzero");
        let pivot_row: Vec<GaussianRational> = rows[rank].iter().map(|v| v * &inv).collect();
        for r in (rank + 1)..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone();
            for c in col..ncols {
                if !pivot_row[c].is_zero() {
                    rows[r][c] = &rows[r][c] - &(&factor * &pivot_row[c]);
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}
