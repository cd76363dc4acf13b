//! Evaluation metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{PlcpError, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub test_accuracy: f64,
    pub transductive_accuracy: f64,
    pub correction_ratio: f64,
    pub miscorrection_ratio: f64,
    /// Keyed by tolerance radius, for labels with ordinal meaning.
    pub tolerance_accuracy: Option<BTreeMap<usize, f64>>,
}

fn check_lengths(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(PlcpError::ShapeMismatch {
            context: "prediction vs truth length",
            expected: (truth.len(), 1),
            got: (pred.len(), 1),
        });
    }
    if truth.is_empty() {
        return Err(PlcpError::MissingTruth("accuracy"));
    }
    Ok(())
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// `(correction_ratio, miscorrection_ratio)` of `plcp_labels` relative to
/// `base_labels`. An empty denominator yields 0.
pub fn correction_metrics(
    base_labels: &[usize],
    plcp_labels: &[usize],
    truth: &[usize],
) -> Result<(f64, f64)> {
    check_lengths(base_labels, truth)?;
    check_lengths(plcp_labels, truth)?;
    let (mut base_wrong, mut fixed, mut base_right, mut broken) = (0usize, 0usize, 0usize, 0usize);
    for ((b, p), t) in base_labels.iter().zip(plcp_labels).zip(truth) {
        if b == t {
            base_right += 1;
            if p != t {
                broken += 1;
            }
        } else {
            base_wrong += 1;
            if p == t {
                fixed += 1;
            }
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok((ratio(fixed, base_wrong), ratio(broken, base_right)))
}

/// Fraction of predictions within `radius` of the truth.
pub fn tolerance_accuracy(pred: &[usize], truth: &[usize], radius: usize) -> Result<f64> {
    check_lengths(pred, truth)?;
    let hits = pred
        .iter()
        .zip(truth)
        .filter(|(p, t)| p.abs_diff(**t) <= radius)
        .count();
    Ok(hits as f64 / truth.len() as f64)
}
