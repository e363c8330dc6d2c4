//! Random inputs shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use lbsfd_core::opmatrix::OpMatrix;
use lbsfd_core::rational::{int, rat, QMatrix, Rational};
use lbsfd_core::scheme::LbsSpec;
use lbsfd_core::shiftring::ShiftPoly;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

pub fn nonzero_rational(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let v = small_rational(rng);
        if !v.is_zero() {
            return v;
        }
    }
}

pub fn invertible(rng: &mut ChaCha8Rng, n: usize) -> QMatrix {
    loop {
        let rows = (0..n).map(|_| (0..n).map(|_| small_rational(rng)).collect()).collect();
        let m = QMatrix::from_rows(rows).unwrap();
        if !m.determinant().unwrap().is_zero() {
            return m;
        }
    }
}

pub fn poly(rng: &mut ChaCha8Rng, dim: usize, max_terms: usize, reach: i64) -> ShiftPoly {
    let n = rng.gen_range(0..=max_terms);
    let terms: Vec<(Vec<i64>, Rational)> = (0..n)
        .map(|_| {
            let z = (0..dim).map(|_| rng.gen_range(-reach..=reach)).collect();
            (z, small_rational(rng))
        })
        .collect();
    ShiftPoly::from_terms(dim, terms).unwrap()
}

pub fn op_matrix(rng: &mut ChaCha8Rng, size: usize, dim: usize) -> OpMatrix {
    let rows = (0..size)
        .map(|_| (0..size).map(|_| poly(rng, dim, 3, 2)).collect())
        .collect();
    OpMatrix::from_rows(rows).unwrap()
}

pub const RATES: [(i64, i64); 4] = [(1, 2), (1, 1), (3, 2), (2, 1)];

/// Random one-dimensional scheme with `q` in {2, 3}, velocities in
/// {-1, 0, 1}, non-conserved rates in {1/2, 1, 3/2, 2} and random linear
/// equilibria. `n_conserved` is 1 unless `allow_two` and `q = 3`.
pub fn spec(rng: &mut ChaCha8Rng, allow_two: bool) -> LbsSpec {
    let q = if rng.gen_bool(0.5) { 2 } else { 3 };
    let n = if allow_two && q == 3 && rng.gen_bool(0.4) { 2 } else { 1 };
    let moments = invertible(rng, q);
    let velocities = (0..q).map(|_| vec![rng.gen_range(-1..=1)]).collect();
    let relaxation = (0..q)
        .map(|j| {
            if j < n {
                int(0)
            } else {
                let (p, d) = *RATES.choose(rng).unwrap();
                rat(p, d)
            }
        })
        .collect();
    let eq = (0..q)
        .map(|r| {
            (0..n)
                .map(|c| {
                    if r < n {
                        int((r == c) as i64)
                    } else {
                        small_rational(rng)
                    }
                })
                .collect()
        })
        .collect();
    LbsSpec::new(
        moments,
        velocities,
        relaxation,
        n,
        Some(QMatrix::from_rows(eq).unwrap()),
    )
    .unwrap()
}

/// Generic 3x3 matrix whose nine entries are independent generators of a
/// nine-variable ring: `t_rc = T[e_(3r+c)]`.
pub fn generic_t() -> OpMatrix {
    let rows = (0..3)
        .map(|r| {
            (0..3)
                .map(|c| {
                    let mut z = vec![0; 9];
                    z[3 * r + c] = 1;
                    ShiftPoly::shift(&z)
                })
                .collect()
        })
        .collect();
    OpMatrix::from_rows(rows).unwrap()
}

/// D1Q2 embedded in D1Q3: `M = blockdiag([[1, 1], [1, -1]], 1)`, `c = (1, -1, 0)`.
pub fn embedded_d1q3() -> (QMatrix, Vec<Vec<i64>>) {
    (
        QMatrix::from_ints(&[&[1, 1, 0], &[1, -1, 0], &[0, 0, 1]]).unwrap(),
        vec![vec![1], vec![-1], vec![0]],
    )
}
