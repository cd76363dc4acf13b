//! Blurring of confidence matrices before they are handed across.
//!
//! Each entry is mapped through `exp(e^k · x)`, masked to the candidate set
//! and the row is L1-normalized. With `k < 0` the map is a contraction on
//! pairwise gaps while keeping their order, so neither classifier can pass
//! an overconfident label to the other.

use crate::error::{check_shape, PlcpError, Result};
use crate::Matrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurParams {
    pub k: f64,
}

impl Default for BlurParams {
    fn default() -> Self {
        Self { k: -1.0 }
    }
}

impl BlurParams {
    pub fn new(k: f64) -> Result<Self> {
        let params = Self { k };
        params.validate()?;
        Ok(params)
    }

    /// `k >= ln 2` is rejected. `0 <= k < ln 2` is accepted with a warning:
    /// gaps are only guaranteed to shrink for negative `k`.
    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() || self.k >= std::f64::consts::LN_2 {
            return Err(PlcpError::invalid(
                "k",
                format!("blur temperature {} must be below ln 2", self.k),
            ));
        }
        if self.k >= 0.0 {
            log::warn!(
                "blur temperature k = {} is not negative; confidences may sharpen instead of blur",
                self.k
            );
        }
        Ok(())
    }
}

/// `O_i = Q_i / ||Q_i||_1` with `Q = exp(e^k P) ⊙ Y`.
pub fn blur_labeling(p: &Matrix, y: &Matrix, k: f64) -> Result<Matrix> {
    check_shape("blur candidate mask", p.shape(), y.shape())?;
    let scale = k.exp();
    let mut q = p.zip_map(y, |v, y| if y != 0.0 { (scale * v).exp() * y } else { 0.0 });
    for (i, mut row) in q.row_iter_mut().enumerate() {
        let total: f64 = row.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(PlcpError::EmptyCandidateRow { row: i });
        }
        row /= total;
    }
    Ok(q)
}

/// Blur of `1 - P̂`: turns non-candidate confidence into labeling confidence.
pub fn blur_noncandidate(phat: &Matrix, y: &Matrix, k: f64) -> Result<Matrix> {
    blur_labeling(&phat.map(|v| 1.0 - v), y, k)
}

/// Gap between two confidences `a > b` after a two-entry blur:
/// `(e^{e^k a} - e^{e^k b}) / (e^{e^k a} + e^{e^k b})`.
pub fn blurred_gap(a: f64, b: f64, k: f64) -> f64 {
    // equal to tanh(e^k (a - b) / 2)
    (0.5 * k.exp() * (a - b)).tanh()
}
