//! Row-wise solver for the partner's `C` step.
//!
//! Each row solves
//!
//! ```text
//! min  cᵀc + gᵀc   s.t.  lo ≤ c ≤ hi,  Σ c = t
//! ```
//!
//! The objective is separable and strictly convex, so the minimizer is
//! `c_j(ν) = clip((-g_j - ν)/2, lo_j, hi_j)` for the unique-in-effect
//! multiplier ν with `Σ c_j(ν) = t`. The sum is non-increasing in ν, which
//! makes bisection safe; once the active set is known ν is recomputed
//! exactly from the free coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{check_shape, PlcpError, Result};
use crate::Matrix;

const MAX_BISECTIONS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct RowQpProblem {
    pub linear: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub sum_target: f64,
}

/// How the partner's auxiliary confidence `C` is tied to the base side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollaborativeTerm {
    /// `γ·tr(O Cᵀ)`
    #[default]
    Trace,
    /// `γ·||O + C - 1||²`, kept for ablations.
    Aggressive,
}

impl RowQpProblem {
    /// Row `i` of the `C` step: `g = γ O_i - 2 J_i`, `Ŷ_i ≤ c ≤ 1`,
    /// `Σ c = l - 1`.
    pub fn partner_row(
        j: &[f64],
        o: &[f64],
        yhat: &[f64],
        gamma: f64,
        term: CollaborativeTerm,
    ) -> Self {
        let l = j.len();
        let linear = match term {
            CollaborativeTerm::Trace => j.iter().zip(o).map(|(j, o)| gamma * o - 2.0 * j).collect(),
            // ||c - j||² + γ||c - (1 - o)||², divided by (1 + γ)
            CollaborativeTerm::Aggressive => j
                .iter()
                .zip(o)
                .map(|(j, o)| -2.0 * (j + gamma * (1.0 - o)) / (1.0 + gamma))
                .collect(),
        };
        Self {
            linear,
            lower: yhat.to_vec(),
            upper: vec![1.0; l],
            sum_target: l as f64 - 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.linear.len()
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty()
    }

    pub fn objective(&self, c: &[f64]) -> f64 {
        c.iter().zip(&self.linear).map(|(c, g)| c * c + g * c).sum()
    }

    fn validate(&self) -> Result<()> {
        let l = self.len();
        if self.lower.len() != l || self.upper.len() != l {
            return Err(PlcpError::ShapeMismatch {
                context: "row QP bounds",
                expected: (l, 2),
                got: (self.lower.len(), self.upper.len()),
            });
        }
        if self
            .linear
            .iter()
            .chain(&self.lower)
            .chain(&self.upper)
            .any(|v| !v.is_finite())
        {
            return Err(PlcpError::invalid("row QP", "non-finite coefficient"));
        }
        let lower_sum: f64 = self.lower.iter().sum();
        let upper_sum: f64 = self.upper.iter().sum();
        let slack = 1e-12 * (1.0 + self.sum_target.abs());
        let crossed = self.lower.iter().zip(&self.upper).any(|(lo, hi)| lo > hi);
        if crossed || lower_sum > self.sum_target + slack || upper_sum < self.sum_target - slack {
            return Err(PlcpError::Infeasible {
                lower_sum,
                upper_sum,
                target: self.sum_target,
            });
        }
        Ok(())
    }

    fn clipped(&self, nu: f64, j: usize) -> f64 {
        ((-self.linear[j] - nu) / 2.0).clamp(self.lower[j], self.upper[j])
    }

    fn sum_at(&self, nu: f64) -> f64 {
        (0..self.len()).map(|j| self.clipped(nu, j)).sum()
    }

    fn point_at(&self, nu: f64) -> Vec<f64> {
        (0..self.len()).map(|j| self.clipped(nu, j)).collect()
    }
}

/// The minimizer of one row problem.
pub fn solve_row(problem: &RowQpProblem) -> Result<Vec<f64>> {
    problem.validate()?;
    if problem.is_empty() {
        return Ok(Vec::new());
    }
    let t = problem.sum_target;
    let l = problem.len();

    // ν at or below `lo_nu` puts every coordinate on its upper bound and at
    // or above `hi_nu` every coordinate on its lower bound.
    let mut lo_nu = (0..l)
        .map(|j| -problem.linear[j] - 2.0 * problem.upper[j])
        .fold(f64::INFINITY, f64::min);
    let mut hi_nu = (0..l)
        .map(|j| -problem.linear[j] - 2.0 * problem.lower[j])
        .fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-12 * (1.0 + t.abs());
    if problem.sum_at(lo_nu) < t - slack || problem.sum_at(hi_nu) > t + slack {
        return Err(PlcpError::Invariant(format!(
            "row QP multiplier not bracketed on [{lo_nu}, {hi_nu}]"
        )));
    }

    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo_nu + hi_nu);
        if hi_nu - lo_nu <= 1e-12 * (1.0 + mid.abs()) || mid <= lo_nu || mid >= hi_nu {
            break;
        }
        if problem.sum_at(mid) > t {
            lo_nu = mid;
        } else {
            hi_nu = mid;
        }
    }
    let mut nu = 0.5 * (lo_nu + hi_nu);

    // exact multiplier for the active set found by bisection
    let mut free_g = 0.0;
    let mut free = 0usize;
    let mut fixed_sum = 0.0;
    for j in 0..l {
        let raw = (-problem.linear[j] - nu) / 2.0;
        if raw > problem.lower[j] && raw < problem.upper[j] {
            free += 1;
            free_g += -problem.linear[j];
        } else {
            fixed_sum += problem.clipped(nu, j);
        }
    }
    if free > 0 {
        let exact = (free_g - 2.0 * (t - fixed_sum)) / free as f64;
        if (problem.sum_at(exact) - t).abs() <= (problem.sum_at(nu) - t).abs() {
            nu = exact;
        }
    }

    let c = problem.point_at(nu);
    let sum: f64 = c.iter().sum();
    if (sum - t).abs() > 1e-9 * (1.0 + t.abs()) {
        return Err(PlcpError::Invariant(format!(
            "row QP sum {sum} misses target {t}"
        )));
    }
    Ok(c)
}

/// Largest violation of the KKT conditions at `c`: box and sum feasibility,
/// plus the gap in the admissible interval for the sum multiplier ν given
/// which bounds are active.
pub fn kkt_residual(problem: &RowQpProblem, c: &[f64]) -> f64 {
    let t = problem.sum_target;
    let mut worst: f64 = (c.iter().sum::<f64>() - t).abs();
    let mut nu_min = f64::NEG_INFINITY;
    let mut nu_max = f64::INFINITY;
    let scale = 1.0 + problem.linear.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let tol = 1e-12 * scale;
    for (j, &cj) in c.iter().enumerate() {
        let (lo, hi, g) = (problem.lower[j], problem.upper[j], problem.linear[j]);
        worst = worst.max(lo - cj).max(cj - hi);
        if hi - lo <= tol {
            continue;
        }
        // stationarity: 2c + g + ν = 0 when free, ≥ 0 at lo, ≤ 0 at hi
        let nu_j = -g - 2.0 * cj;
        let at_lo = cj <= lo + tol;
        let at_hi = cj >= hi - tol;
        if !at_hi {
            nu_min = nu_min.max(nu_j);
        }
        if !at_lo {
            nu_max = nu_max.min(nu_j);
        }
    }
    worst.max(nu_min - nu_max).max(0.0)
}

/// Solve every row of the `C` step.
pub fn solve_matrix(j: &Matrix, o: &Matrix, yhat: &Matrix, gamma: f64) -> Result<Matrix> {
    solve_matrix_with(j, o, yhat, gamma, CollaborativeTerm::Trace)
}

pub fn solve_matrix_with(
    j: &Matrix,
    o: &Matrix,
    yhat: &Matrix,
    gamma: f64,
    term: CollaborativeTerm,
) -> Result<Matrix> {
    check_shape("C step supervision", j.shape(), o.shape())?;
    check_shape("C step non-candidate mask", j.shape(), yhat.shape())?;
    let (n, l) = j.shape();
    let mut c = Matrix::zeros(n, l);
    for i in 0..n {
        let row = |m: &Matrix| m.row(i).iter().copied().collect::<Vec<_>>();
        let problem = RowQpProblem::partner_row(&row(j), &row(o), &row(yhat), gamma, term);
        let solved = solve_row(&problem)?;
        for (k, v) in solved.into_iter().enumerate() {
            c[(i, k)] = v;
        }
    }
    Ok(c)
}
