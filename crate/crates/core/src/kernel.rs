//! Kernels and the closed-form kernel ridge solve with an unpenalized bias.
//!
//! For targets `C` (n × l) the dual problem
//! `min ||ΦW + 1bᵀ - C||² + λ||W||²` is solved through its KKT system:
//!
//! ```text
//! S  = K/(2λ) + I/2
//! s  = 1ᵀ S⁻¹
//! bᵀ = s C / (s 1)
//! A  = S⁻¹ (C - 1 bᵀ)
//! H  = K A/(2λ) + 1 bᵀ
//! ```

use std::sync::Arc;

use nalgebra::{Cholesky, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{check_shape, PlcpError, Result};
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Gaussian,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaPolicy {
    /// Mean Euclidean distance over distinct training pairs `i < j`.
    MeanPairwiseDistance,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub sigma: SigmaPolicy,
    /// Ridge weight λ.
    pub ridge: f64,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            kind: KernelKind::Gaussian,
            sigma: SigmaPolicy::MeanPairwiseDistance,
            ridge: 0.05,
        }
    }
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.ridge > 0.0 && self.ridge.is_finite()) {
            return Err(PlcpError::invalid(
                "lambda",
                format!("ridge {} must be positive", self.ridge),
            ));
        }
        if let SigmaPolicy::Fixed(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(PlcpError::invalid(
                    "sigma",
                    format!("fixed bandwidth {s} must be positive"),
                ));
            }
        }
        Ok(())
    }

    /// Pin the bandwidth against a training feature matrix.
    pub fn resolve(&self, train: &Matrix) -> Result<Kernel> {
        self.validate()?;
        let sigma = match (self.kind, self.sigma) {
            (KernelKind::Linear, _) => None,
            (KernelKind::Gaussian, SigmaPolicy::Fixed(s)) => Some(s),
            (KernelKind::Gaussian, SigmaPolicy::MeanPairwiseDistance) => {
                let s = mean_pairwise_distance(train);
                if s.is_nan() || s <= 0.0 {
                    return Err(PlcpError::DegenerateBandwidth { sigma: s });
                }
                Some(s)
            }
        };
        Ok(Kernel {
            kind: self.kind,
            sigma,
        })
    }
}

/// Mean distance over pairs `i < j`; 0 when there are fewer than two rows.
pub fn mean_pairwise_distance(x: &Matrix) -> f64 {
    let n = x.nrows();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += (x.row(i) - x.row(j)).norm();
        }
    }
    total / (n * (n - 1) / 2) as f64
}

/// A kernel with its bandwidth fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub kind: KernelKind,
    pub sigma: Option<f64>,
}

impl Kernel {
    pub fn gram(&self, x: &Matrix) -> Matrix {
        let n = x.nrows();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.eval(x, i, x, j);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    /// `m × n` evaluations between rows of `a` (queries) and `b` (training).
    pub fn cross(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        if a.ncols() != b.ncols() {
            return Err(PlcpError::ShapeMismatch {
                context: "cross kernel feature dimension",
                expected: (a.nrows(), b.ncols()),
                got: a.shape(),
            });
        }
        Ok(Matrix::from_fn(a.nrows(), b.nrows(), |i, j| {
            self.eval(a, i, b, j)
        }))
    }

    fn eval(&self, a: &Matrix, i: usize, b: &Matrix, j: usize) -> f64 {
        match self.kind {
            KernelKind::Linear => a.row(i).dot(&b.row(j)),
            KernelKind::Gaussian => {
                let sigma = self
                    .sigma
                    .expect("gaussian kernel resolved with a bandwidth");
                let d2 = (a.row(i) - b.row(j)).norm_squared();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

/// Resolve `spec` on `x` and build its Gram matrix.
pub fn gram_matrix(x: &Matrix, spec: &KernelSpec) -> Result<Matrix> {
    Ok(spec.resolve(x)?.gram(x))
}

/// Factorized system `K/(2λ) + I/2` for a fixed Gram matrix and λ.
///
/// The Gram matrix never changes across mutual-supervision rounds, so the
/// factorization is built once and reused for every new target matrix.
#[derive(Debug, Clone)]
pub struct KernelRidge {
    gram: Arc<Matrix>,
    lambda: f64,
    chol: Cholesky<f64, Dyn>,
    s_row: DVector<f64>,
}

impl KernelRidge {
    pub fn new(gram: Arc<Matrix>, lambda: f64) -> Result<Self> {
        let n = gram.nrows();
        check_shape("gram matrix", (n, n), gram.shape())?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(PlcpError::invalid(
                "lambda",
                format!("{lambda} must be positive"),
            ));
        }
        let mut system = gram.as_ref() / (2.0 * lambda);
        for i in 0..n {
            system[(i, i)] += 0.5;
        }
        let diag = system.diagonal();
        let (min_diag, max_diag) = (diag.min(), diag.max());
        let chol = Cholesky::new(system).ok_or(PlcpError::SingularSystem { min_diag, max_diag })?;
        // S is symmetric, so 1ᵀ S⁻¹ = (S⁻¹ 1)ᵀ
        let s_row = chol.solve(&DVector::from_element(n, 1.0));
        Ok(Self {
            gram,
            lambda,
            chol,
            s_row,
        })
    }

    pub fn gram(&self) -> &Arc<Matrix> {
        &self.gram
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn solve(&self, target: &Matrix) -> Result<KernelSolve> {
        let n = self.gram.nrows();
        check_shape("kernel ridge target", (n, target.ncols()), target.shape())?;
        let s_sum = self.s_row.sum();
        let bias = target.tr_mul(&self.s_row) / s_sum;
        let mut centered = target.clone();
        for mut row in centered.row_iter_mut() {
            row -= bias.transpose();
        }
        let dual_coeffs = self.chol.solve(&centered);
        Ok(KernelSolve {
            dual_coeffs,
            bias,
            s_row: self.s_row.clone(),
            gram: Arc::clone(&self.gram),
            lambda: self.lambda,
        })
    }
}

/// Dual coefficients `A`, bias `b̂` and the row vector `s` of one solve.
#[derive(Debug, Clone)]
pub struct KernelSolve {
    pub dual_coeffs: Matrix,
    pub bias: DVector<f64>,
    pub s_row: DVector<f64>,
    pub gram: Arc<Matrix>,
    pub lambda: f64,
}

impl KernelSolve {
    pub fn label_count(&self) -> usize {
        self.dual_coeffs.ncols()
    }

    /// Modeling output on the training points.
    pub fn training_output(&self) -> Matrix {
        self.output_from(&self.gram)
    }

    /// `K_cross A/(2λ) + 1 b̂ᵀ` for an `m × n` cross-kernel block.
    pub fn predict(&self, k_cross: &Matrix) -> Result<Matrix> {
        if k_cross.ncols() != self.dual_coeffs.nrows() {
            return Err(PlcpError::ShapeMismatch {
                context: "cross kernel columns vs training size",
                expected: (k_cross.nrows(), self.dual_coeffs.nrows()),
                got: k_cross.shape(),
            });
        }
        Ok(self.output_from(k_cross))
    }

    fn output_from(&self, k: &Matrix) -> Matrix {
        let mut out = k * &self.dual_coeffs / (2.0 * self.lambda);
        for mut row in out.row_iter_mut() {
            row += self.bias.transpose();
        }
        out
    }

    /// `||W||²` in the feature space, `tr(AᵀKA)/(4λ²)`.
    pub fn weight_norm_sq(&self) -> f64 {
        let ka = self.gram.as_ref() * &self.dual_coeffs;
        self.dual_coeffs.dot(&ka) / (4.0 * self.lambda * self.lambda)
    }
}

/// One-shot solve; see [`KernelRidge`] for the cached variant.
pub fn kkt_solve(k_gram: &Matrix, target: &Matrix, lambda: f64) -> Result<KernelSolve> {
    KernelRidge::new(Arc::new(k_gram.clone()), lambda)?.solve(target)
}
