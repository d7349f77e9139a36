//! Test-only oracles, independent of the solver code paths they check.
#![allow(dead_code)]

use rand::Rng;

/// `max c·x, A x <= b, x >= 0` with a positive budget row so it stays bounded.
pub fn random_bounded_lp<R: Rng>(rng: &mut R, n: usize, m: usize) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for k in 0..m {
        let row: Vec<f64> = if k == 0 {
            (0..n).map(|_| rng.gen_range(0.2..1.0)).collect()
        } else {
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        a.push(row);
        b.push(rng.gen_range(0.5..3.0));
    }
    (c, a, b)
}

/// Brute force over every choice of `n` tight constraints among the rows and
/// the nonnegativity bounds.
pub fn vertex_enumeration_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> f64 {
    let n = c.len();
    let m = a.len();
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        rows.push((e, 0.0));
    }
    let total = m + n;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let chosen: Vec<&(Vec<f64>, f64)> = (0..total).filter(|k| mask >> k & 1 == 1).map(|k| &rows[k]).collect();
        let mat: Vec<Vec<f64>> = chosen.iter().map(|r| r.0.clone()).collect();
        let rhs: Vec<f64> = chosen.iter().map(|r| r.1).collect();
        if let Some(x) = solve_square(mat, rhs) {
            let feasible = rows.iter().all(|(r, bb)| r.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= bb + 1e-9);
            if feasible {
                best = best.max(c.iter().zip(&x).map(|(p, q)| p * q).sum());
            }
        }
    }
    best
}

pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (x, y) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * y;
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}
