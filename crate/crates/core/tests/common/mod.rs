#![allow(dead_code)]

use idereg_core::linalg::RealMatrix;
use rand::Rng;

/// `rows x cols` matrix of rank `rank` (generically), entries O(1).
pub fn matrix_of_rank<R: Rng>(rng: &mut R, rows: usize, cols: usize, rank: usize) -> RealMatrix {
    let l = RealMatrix::from_fn(rows, rank, |_, _| rng.gen_range(-1.0..=1.0));
    let r = RealMatrix::from_fn(rank, cols, |_, _| rng.gen_range(-1.0..=1.0));
    l * r
}

/// Full, deficient or zero rank, chosen by `profile % 3`.
pub fn profiled_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, profile: usize) -> (RealMatrix, usize) {
    let full = rows.min(cols);
    let rank = match profile % 3 {
        0 => full,
        1 if full > 0 => rng.gen_range(0..full),
        _ => 0,
    };
    (matrix_of_rank(rng, rows, cols, rank), rank)
}
