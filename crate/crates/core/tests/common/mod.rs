#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use plcp::qp::RowQpProblem;
use plcp::Matrix;
use rand::Rng;

/// Exhaustive active-set enumeration: every coordinate is at its lower
/// bound, its upper bound or free (3^l patterns). Free coordinates share
/// the sum multiplier ν, fixed by the equality constraint. Among patterns
/// that satisfy all KKT conditions, the one with the lowest objective wins.
pub fn qp_oracle(p: &RowQpProblem) -> Vec<f64> {
    let l = p.linear.len();
    let tol = 1e-10;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for code in 0..3usize.pow(l as u32) {
        let mut pattern = Vec::with_capacity(l);
        let mut rest = code;
        for _ in 0..l {
            pattern.push(rest % 3);
            rest /= 3;
        }
        let fixed_sum: f64 = (0..l)
            .map(|j| match pattern[j] {
                0 => p.lower[j],
                1 => p.upper[j],
                _ => 0.0,
            })
            .sum();
        let free: Vec<usize> = (0..l).filter(|&j| pattern[j] == 2).collect();
        let nu = if free.is_empty() {
            if (fixed_sum - p.sum_target).abs() > tol {
                continue;
            }
            None
        } else {
            let s: f64 = free.iter().map(|&j| -p.linear[j]).sum();
            Some((s - 2.0 * (p.sum_target - fixed_sum)) / free.len() as f64)
        };
        let c: Vec<f64> = (0..l)
            .map(|j| match pattern[j] {
                0 => p.lower[j],
                1 => p.upper[j],
                _ => (-p.linear[j] - nu.unwrap()) / 2.0,
            })
            .collect();
        if (0..l).any(|j| c[j] < p.lower[j] - tol || c[j] > p.upper[j] + tol) {
            continue;
        }
        // with no free coordinate ν is any value in the admissible interval
        let (mut lo_nu, mut hi_nu) = (f64::NEG_INFINITY, f64::INFINITY);
        for j in 0..l {
            let grad = 2.0 * c[j] + p.linear[j];
            match pattern[j] {
                0 => lo_nu = lo_nu.max(-grad),
                1 => hi_nu = hi_nu.min(-grad),
                _ => {}
            }
        }
        let ok = match nu {
            Some(nu) => nu >= lo_nu - tol && nu <= hi_nu + tol,
            None => lo_nu <= hi_nu + tol,
        };
        if !ok {
            continue;
        }
        let obj = p.objective(&c);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, c));
        }
    }
    best.expect("feasible problem has a KKT point").1
}

/// Primal linear ridge with an unpenalized bias: minimizes
/// `||X W + 1 bᵀ - C||² + λ||W||²` via the joint normal equations.
/// Returns `(W, b)`.
pub fn primal_ridge(x: &Matrix, c: &Matrix, lambda: f64) -> (Matrix, DVector<f64>) {
    let (n, d) = x.shape();
    let l = c.ncols();
    let mut xa = DMatrix::zeros(n, d + 1);
    xa.view_mut((0, 0), (n, d)).copy_from(x);
    xa.column_mut(d).fill(1.0);
    let mut lhs = xa.transpose() * &xa;
    for i in 0..d {
        lhs[(i, i)] += lambda;
    }
    let rhs = xa.transpose() * c;
    let sol = lhs
        .lu()
        .solve(&rhs)
        .expect("joint normal equations are nonsingular");
    let w = sol.rows(0, d).into_owned();
    let b = DVector::from_iterator(l, sol.row(d).iter().copied());
    (w, b)
}

pub fn primal_output(x: &Matrix, w: &Matrix, b: &DVector<f64>) -> Matrix {
    let mut h = x * w;
    for mut row in h.row_iter_mut() {
        row += b.transpose();
    }
    h
}

/// Partner objective at a fixed `C`, minimized over a linear model.
pub fn partner_value_linear(x: &Matrix, c: &Matrix, o: &Matrix, lambda: f64, gamma: f64) -> f64 {
    let (w, b) = primal_ridge(x, c, lambda);
    let h = primal_output(x, &w, &b);
    (h - c).norm_squared() + gamma * o.dot(c) + lambda * w.norm_squared()
}

pub fn random_matrix(rng: &mut impl Rng, n: usize, m: usize, scale: f64) -> Matrix {
    Matrix::from_fn(n, m, |_, _| rng.random_range(-scale..scale))
}

/// Random 0/1 candidate matrix with every row non-empty.
pub fn random_candidates(rng: &mut impl Rng, n: usize, l: usize, density: f64) -> Matrix {
    let mut y = Matrix::zeros(n, l);
    for i in 0..n {
        let keep = rng.random_range(0..l);
        for j in 0..l {
            if j == keep || rng.random_bool(density) {
                y[(i, j)] = 1.0;
            }
        }
    }
    y
}

/// Random row-stochastic matrix supported exactly on the candidates.
pub fn random_confidence(rng: &mut impl Rng, y: &Matrix) -> Matrix {
    let mut o = y.map(|v| {
        if v == 1.0 {
            rng.random_range(0.01..1.0)
        } else {
            0.0
        }
    });
    for mut row in o.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    o
}

/// Random point of the feasible `C` set: `1 - e` with `e` a distribution
/// over the row's candidates.
pub fn random_feasible_auxiliary(rng: &mut impl Rng, y: &Matrix) -> Matrix {
    random_confidence(rng, y).map(|v| 1.0 - v)
}
