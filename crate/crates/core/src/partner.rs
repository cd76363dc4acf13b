//! The partner classifier: kernel ridge regression onto an auxiliary
//! non-candidate confidence `C`, which is itself chosen to agree with the
//! data while staying soft-tied to the base classifier's blurred output.
//!
//! Objective, minimized over `(W, b̂, C)` by exact alternation:
//!
//! ```text
//! ||ΦW + 1b̂ᵀ - C||² + γ·tr(O Cᵀ) + λ||W||²
//! s.t. Ŷ ≤ C ≤ 1,  C 1 = (l - 1) 1
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::{row_argmin, PartialLabelDataset};
use crate::error::{check_shape, PlcpError, Result};
use crate::kernel::{Kernel, KernelKind, KernelRidge, KernelSolve, KernelSpec, SigmaPolicy};
use crate::qp::{self, CollaborativeTerm};
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartnerConfig {
    pub lambda: f64,
    pub gamma: f64,
    pub inner_iters: usize,
    pub inner_tol: f64,
    pub kernel: KernelKind,
    pub sigma: SigmaPolicy,
    pub term: CollaborativeTerm,
}

impl Default for PartnerConfig {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            gamma: 2.0,
            inner_iters: 10,
            inner_tol: 1e-6,
            kernel: KernelKind::Gaussian,
            sigma: SigmaPolicy::MeanPairwiseDistance,
            term: CollaborativeTerm::Trace,
        }
    }
}

impl PartnerConfig {
    pub fn kernel_spec(&self) -> KernelSpec {
        KernelSpec {
            kind: self.kernel,
            sigma: self.sigma,
            ridge: self.lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel_spec().validate()?;
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(PlcpError::invalid(
                "gamma",
                format!("{} must be non-negative", self.gamma),
            ));
        }
        if self.inner_iters == 0 {
            return Err(PlcpError::invalid("inner_iters", "must be at least 1"));
        }
        if self.inner_tol.is_nan() || self.inner_tol < 0.0 {
            return Err(PlcpError::invalid(
                "inner_tol",
                format!("{} must be non-negative", self.inner_tol),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PartnerModel {
    pub solve: KernelSolve,
    /// Auxiliary non-candidate confidence; only meaningful during fitting.
    pub c: Matrix,
    /// Objective after the first kernel solve and after every alternation.
    pub objective_trace: Vec<f64>,
}

impl PartnerModel {
    /// Non-candidate modeling output `M̂` on the training points.
    pub fn training_output(&self) -> Matrix {
        self.solve.training_output()
    }
}

/// A feasible, symmetric starting point: non-candidates at 1 and the
/// remaining mass `|S_i| - 1` spread evenly over the candidates.
pub fn initial_auxiliary(yhat: &Matrix) -> Matrix {
    let l = yhat.ncols() as f64;
    let mut c = yhat.clone();
    for mut row in c.row_iter_mut() {
        let noncand: f64 = row.sum();
        let cands = l - noncand;
        let fill = (l - 1.0 - noncand) / cands;
        for v in row.iter_mut() {
            if *v == 0.0 {
                *v = fill;
            }
        }
    }
    c
}

/// Value of the partner objective for a given kernel fit and `C`.
pub fn objective(solve: &KernelSolve, c: &Matrix, o: &Matrix, config: &PartnerConfig) -> f64 {
    let fit = (solve.training_output() - c).norm_squared();
    let link = match config.term {
        CollaborativeTerm::Trace => config.gamma * o.dot(c),
        CollaborativeTerm::Aggressive => config.gamma * (o + c).map(|v| v - 1.0).norm_squared(),
    };
    fit + link + solve.lambda * solve.weight_norm_sq()
}

/// Fit against a prepared kernel system (Gram matrix already factorized).
pub fn fit_partner_with(
    ridge: &KernelRidge,
    yhat: &Matrix,
    o: &Matrix,
    config: &PartnerConfig,
) -> Result<PartnerModel> {
    config.validate()?;
    let n = ridge.gram().nrows();
    check_shape(
        "partner non-candidate mask",
        (n, yhat.ncols()),
        yhat.shape(),
    )?;
    check_shape("partner supervision", yhat.shape(), o.shape())?;

    let mut c = initial_auxiliary(yhat);
    let mut solve = ridge.solve(&c)?;
    let mut trace = vec![objective(&solve, &c, o, config)];
    for _ in 0..config.inner_iters {
        let j = solve.training_output();
        c = qp::solve_matrix_with(&j, o, yhat, config.gamma, config.term)?;
        solve = ridge.solve(&c)?;
        let value = objective(&solve, &c, o, config);
        let prev = *trace.last().expect("trace starts non-empty");
        trace.push(value);
        if (prev - value).abs() <= config.inner_tol * prev.abs().max(1.0) {
            break;
        }
    }
    check_auxiliary(&c, yhat)?;
    Ok(PartnerModel {
        solve,
        c,
        objective_trace: trace,
    })
}

/// Build the kernel on the dataset's features and fit.
pub fn fit_partner(
    dataset: &PartialLabelDataset,
    o_supervision: &Matrix,
    config: &PartnerConfig,
) -> Result<(Kernel, PartnerModel)> {
    let kernel = config.kernel_spec().resolve(dataset.features())?;
    let ridge = KernelRidge::new(Arc::new(kernel.gram(dataset.features())), config.lambda)?;
    let model = fit_partner_with(&ridge, &dataset.noncandidates(), o_supervision, config)?;
    Ok((kernel, model))
}

fn check_auxiliary(c: &Matrix, yhat: &Matrix) -> Result<()> {
    let l = c.ncols() as f64;
    for (i, row) in c.row_iter().enumerate() {
        let sum = row.sum();
        if (sum - (l - 1.0)).abs() > 1e-9 * l {
            return Err(PlcpError::Invariant(format!(
                "C row {i} sums to {sum}, expected {}",
                l - 1.0
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            if v < yhat[(i, j)] - 1e-12 || v > 1.0 + 1e-12 {
                return Err(PlcpError::Invariant(format!(
                    "C[{i}, {j}] = {v} outside its box"
                )));
            }
        }
    }
    Ok(())
}

/// `M̂` for query points given their cross-kernel block against training.
pub fn partner_modeling_output(model: &PartnerModel, k_cross: &Matrix) -> Result<Matrix> {
    model.solve.predict(k_cross)
}

/// Label with the smallest clamped non-candidate confidence, i.e. the
/// argmax of `1 - p̂`.
pub fn predict_labels(model: &PartnerModel, k_cross: &Matrix) -> Result<Vec<usize>> {
    Ok(labels_from_noncandidate_output(&partner_modeling_output(
        model, k_cross,
    )?))
}

pub fn labels_from_noncandidate_output(mhat: &Matrix) -> Vec<usize> {
    row_argmin(&mhat.map(|v| v.clamp(0.0, 1.0)))
}
