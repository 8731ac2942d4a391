//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use claimscope_core::features::SparseVector;
use claimscope_core::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force two-sided p: enumerate all 2^n sign assignments of the ranks.
pub fn brute_force_p(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    // ranks by explicit counting, independent of the library's ranking
    let ranks: Vec<f64> = abs
        .iter()
        .map(|v| {
            let less = abs.iter().filter(|w| *w < v).count() as f64;
            let equal = abs.iter().filter(|w| *w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = ranks.iter().zip(&d).filter(|(_, v)| **v > 0.0).map(|(r, _)| r).sum();
    let n = d.len();
    let (mut ge, mut le) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w >= observed - 1e-9 {
            ge += 1;
        }
        if w <= observed + 1e-9 {
            le += 1;
        }
    }
    let total = (1u64 << n) as f64;
    ((2.0 * ge.min(le) as f64 / total).min(1.0), observed)
}

/// Solves (X'X) beta = X'y by Gaussian elimination with partial pivoting.
pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (row, &yi) in x.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += row[i] * row[j];
            }
            a[i][p] += row[i] * yi;
        }
    }
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in 0..p {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=p {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..p).map(|i| a[i][p] / a[i][i]).collect()
}

/// Standard normal CDF via the Abramowitz-Stegun erf approximation.
pub fn phi(z: f64) -> f64 {
    let x = z / 2f64.sqrt();
    let t = 1.0 / (1.0 + 0.3275911 * x.abs());
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t + 0.254829592)
            * t
            * (-x * x).exp();
    0.5 * (1.0 + y.copysign(x))
}

/// Random sparse problem: `n` rows over `dim` columns, ~`nnz` entries per row,
/// a mix of binary and real values.
pub fn random_problem(seed: u64, n: usize, dim: usize, nnz: usize) -> (Vec<SparseVector>, Vec<Label>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let pairs: Vec<(usize, f64)> = (0..nnz)
            .map(|_| {
                let j = rng.random_range(0..dim);
                let v = if j % 3 == 0 { rng.random_range(-2.0..3.0) } else { 1.0 };
                (j, v)
            })
            .collect();
        xs.push(SparseVector::from_pairs(pairs));
        // guarantee both classes
        let claim = if i < 2 { i == 0 } else { rng.random_bool(0.4) };
        ys.push(if claim { Label::Claim } else { Label::NonClaim });
    }
    (xs, ys)
}

