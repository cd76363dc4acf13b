//! Partial-label data and the confidence matrices carried through training.

use crate::blur::{self, BlurParams};
use crate::error::{check_shape, PlcpError, Result};
use crate::Matrix;

/// Features, candidate-label indicators and (optionally) ground truth.
///
/// Construction validates every invariant, so a value of this type always
/// has finite features, binary candidates with no empty row, and ground
/// truth (when present) inside each candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialLabelDataset {
    features: Matrix,
    candidates: Matrix,
    ground_truth: Option<Vec<usize>>,
}

impl PartialLabelDataset {
    pub fn new(
        features: Matrix,
        candidates: Matrix,
        ground_truth: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = features.nrows();
        if candidates.nrows() != n {
            return Err(PlcpError::ShapeMismatch {
                context: "candidate rows vs feature rows",
                expected: (n, candidates.ncols()),
                got: candidates.shape(),
            });
        }
        if candidates.ncols() == 0 {
            return Err(PlcpError::invalid(
                "label_count",
                "at least one label required",
            ));
        }
        for ((row, col), v) in indexed(&features) {
            if !v.is_finite() {
                return Err(PlcpError::NonFiniteFeature { row, col });
            }
        }
        for ((row, col), v) in indexed(&candidates) {
            if v != 0.0 && v != 1.0 {
                return Err(PlcpError::NonBinaryCandidate { row, col, value: v });
            }
        }
        for row in 0..n {
            if candidates.row(row).iter().all(|&v| v == 0.0) {
                return Err(PlcpError::EmptyCandidateRow { row });
            }
        }
        if let Some(truth) = &ground_truth {
            if truth.len() != n {
                return Err(PlcpError::ShapeMismatch {
                    context: "ground truth length",
                    expected: (n, 1),
                    got: (truth.len(), 1),
                });
            }
            let l = candidates.ncols();
            for (row, &label) in truth.iter().enumerate() {
                if label >= l {
                    return Err(PlcpError::TruthOutOfRange {
                        row,
                        label,
                        label_count: l,
                    });
                }
                if candidates[(row, label)] != 1.0 {
                    return Err(PlcpError::TruthNotCandidate { row, label });
                }
            }
        }
        Ok(Self {
            features,
            candidates,
            ground_truth,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    /// The candidate indicator matrix `Y` (entries 0 or 1).
    pub fn candidates(&self) -> &Matrix {
        &self.candidates
    }

    pub fn ground_truth(&self) -> Option<&[usize]> {
        self.ground_truth.as_deref()
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn label_count(&self) -> usize {
        self.candidates.ncols()
    }

    /// The non-candidate indicator matrix `1 - Y`.
    pub fn noncandidates(&self) -> Matrix {
        noncandidates(&self.candidates)
    }

    pub fn candidate_counts(&self) -> Vec<usize> {
        self.candidates
            .row_iter()
            .map(|r| r.iter().filter(|&&v| v == 1.0).count())
            .collect()
    }

    pub fn mean_candidate_count(&self) -> f64 {
        let counts = self.candidate_counts();
        if counts.is_empty() {
            return 0.0;
        }
        counts.iter().sum::<usize>() as f64 / counts.len() as f64
    }

    /// Rows picked in the given order. Indices must be in range.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(rows),
            candidates: self.candidates.select_rows(rows),
            ground_truth: self
                .ground_truth
                .as_ref()
                .map(|t| rows.iter().map(|&i| t[i]).collect()),
        }
    }
}

fn indexed(m: &Matrix) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
    (0..m.nrows()).flat_map(move |r| (0..m.ncols()).map(move |c| ((r, c), m[(r, c)])))
}

pub fn noncandidates(candidates: &Matrix) -> Matrix {
    candidates.map(|v| 1.0 - v)
}

/// Labeling confidence `P`, non-candidate confidence `P̂`, and their blurred
/// forms `O` and `Ô`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceState {
    pub p: Matrix,
    pub phat: Matrix,
    pub o: Matrix,
    pub ohat: Matrix,
}

/// Uniform confidence over each candidate set, `P̂ = Ŷ`, `O = blur(P)` and
/// `Ô = P` (the base classifier's first supervision).
pub fn init_confidence(
    dataset: &PartialLabelDataset,
    blur_params: BlurParams,
) -> Result<ConfidenceState> {
    let y = dataset.candidates();
    let mut p = Matrix::zeros(y.nrows(), y.ncols());
    for (i, mut row) in p.row_iter_mut().enumerate() {
        let count = y.row(i).sum();
        for j in 0..y.ncols() {
            if y[(i, j)] == 1.0 {
                row[j] = 1.0 / count;
            }
        }
    }
    let o = blur::blur_labeling(&p, y, blur_params.k)?;
    Ok(ConfidenceState {
        phat: dataset.noncandidates(),
        ohat: p.clone(),
        o,
        p,
    })
}

/// `max(0, min(y_ij, α·p_ij + (1-α)·m_ij))`, element-wise.
///
/// Rows are not renormalized; normalization happens in the blur step.
pub fn update_labeling_confidence(
    p_prev: &Matrix,
    m: &Matrix,
    y: &Matrix,
    alpha: f64,
) -> Result<Matrix> {
    check_alpha(alpha)?;
    check_shape("modeling output", p_prev.shape(), m.shape())?;
    check_shape("candidate matrix", p_prev.shape(), y.shape())?;
    Ok(p_prev.zip_zip_map(m, y, |p, m, y| {
        (alpha * p + (1.0 - alpha) * m).min(y).max(0.0)
    }))
}

/// `min(1, max(ŷ_ij, α·p̂_ij + (1-α)·m̂_ij))`, element-wise.
pub fn update_noncandidate_confidence(
    phat_prev: &Matrix,
    mhat: &Matrix,
    yhat: &Matrix,
    alpha: f64,
) -> Result<Matrix> {
    check_alpha(alpha)?;
    check_shape("partner modeling output", phat_prev.shape(), mhat.shape())?;
    check_shape("non-candidate matrix", phat_prev.shape(), yhat.shape())?;
    Ok(phat_prev.zip_zip_map(mhat, yhat, |p, m, yh| {
        (alpha * p + (1.0 - alpha) * m).max(yh).min(1.0)
    }))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(PlcpError::invalid(
            "alpha",
            format!("{alpha} outside [0, 1]"),
        ));
    }
    Ok(())
}

/// Index of the largest entry in each row; ties go to the lowest index.
pub fn row_argmax(m: &Matrix) -> Vec<usize> {
    m.row_iter()
        .map(|row| {
            let mut best = 0;
            for j in 1..row.len() {
                if row[j] > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Index of the smallest entry in each row; ties go to the lowest index.
pub fn row_argmin(m: &Matrix) -> Vec<usize> {
    m.row_iter()
        .map(|row| {
            let mut best = 0;
            for j in 1..row.len() {
                if row[j] < row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Largest entry of each row among the candidate labels only.
pub fn candidate_argmax(m: &Matrix, y: &Matrix) -> Vec<usize> {
    let masked = m.zip_map(y, |v, y| if y == 1.0 { v } else { f64::NEG_INFINITY });
    row_argmax(&masked)
}
