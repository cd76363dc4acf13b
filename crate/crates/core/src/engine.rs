//! The mutual-supervision loop.
//!
//! One round:
//!
//! 1. fit the base on `Ô_{i-1}` and read its modeling output `M_i`;
//! 2. `P_i = clamp_[0, Y](α P_{i-1} + (1-α) M_i)`, then `O_i = blur(P_i)`;
//! 3. fit the partner on `O_i` and read its output `M̂_i`;
//! 4. `P̂_i = clamp_[Ŷ, 1](α P̂_{i-1} + (1-α) M̂_i)`, then `Ô_i = blur(1 - P̂_i)`;
//! 5. stop when the per-sample labels settle.
//!
//! Unseen points are labelled by the last partner: the label with the
//! smallest predicted non-candidate confidence.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::base::{binarized_mask_supervision, BaseClassifierKind, BaseLearner};
use crate::blur::{blur_labeling, blur_noncandidate, BlurParams};
use crate::dataset::{
    candidate_argmax, init_confidence, row_argmax, update_labeling_confidence,
    update_noncandidate_confidence, ConfidenceState, PartialLabelDataset,
};
use crate::error::{PlcpError, Result};
use crate::kernel::KernelRidge;
use crate::partner::{fit_partner_with, predict_labels, PartnerConfig, PartnerModel};
use crate::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub alpha: f64,
    /// Blur temperature.
    pub k: f64,
    pub max_iter: usize,
    pub stop_change_frac: f64,
    pub base: BaseClassifierKind,
    pub partner: PartnerConfig,
    pub seed: u64,
    /// Feed the base `G(Ô - P)` as a replacement candidate mask instead of
    /// the confidences themselves.
    pub binarize_base_supervision: bool,
    /// Label unseen points with the last base model instead of the partner.
    pub predict_with_base: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            k: -1.0,
            max_iter: 5,
            stop_change_frac: 0.05,
            base: BaseClassifierKind::default(),
            partner: PartnerConfig::default(),
            seed: 0,
            binarize_base_supervision: false,
            predict_with_base: false,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(PlcpError::invalid(
                "alpha",
                format!("{} outside [0, 1]", self.alpha),
            ));
        }
        if self.max_iter == 0 {
            return Err(PlcpError::invalid("max_iter", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.stop_change_frac) {
            return Err(PlcpError::invalid(
                "stop_change_frac",
                format!("{} outside [0, 1]", self.stop_change_frac),
            ));
        }
        BlurParams::new(self.k)?;
        self.partner.validate()
    }
}

/// Label-change fractions of the two most recent rounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChangeHistory {
    recent: [Option<f64>; 2],
}

impl ChangeHistory {
    pub fn push(&mut self, frac: f64) {
        self.recent = [self.recent[1], Some(frac)];
    }

    pub fn latest(&self) -> Option<f64> {
        self.recent[1]
    }
}

pub fn change_fraction(prev: &[usize], curr: &[usize]) -> f64 {
    if curr.is_empty() {
        return 0.0;
    }
    let changed = prev.iter().zip(curr).filter(|(a, b)| a != b).count();
    changed as f64 / curr.len() as f64
}

/// Records the change between `prev_labels` and `curr_labels` and reports
/// whether the last two recorded fractions are both below `threshold`.
pub fn should_stop(
    prev_labels: &[usize],
    curr_labels: &[usize],
    history: &mut ChangeHistory,
    threshold: f64,
) -> bool {
    history.push(change_fraction(prev_labels, curr_labels));
    history
        .recent
        .iter()
        .all(|f| matches!(f, Some(f) if *f < threshold))
}

/// Per-round snapshot. Confidence pairs are `(truth, strongest rival)`,
/// present only when ground truth is known.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationSnapshot {
    pub iteration: usize,
    pub change_fraction: f64,
    /// Argmax of `Ô` over the candidates.
    pub labels: Vec<usize>,
    /// Argmax of `O` over the candidates.
    pub base_labels: Vec<usize>,
    pub base_confidence: Option<Vec<(f64, f64)>>,
    pub partner_confidence: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub iterations_run: usize,
    pub trajectories: Vec<IterationSnapshot>,
    pub final_state: ConfidenceState,
    pub final_partner: PartnerModel,
    pub train_predictions: Vec<usize>,
    pub test_predictions: Vec<usize>,
    /// Number of per-round invariant checks that ran (all passed, or the
    /// run would have returned an error).
    pub invariant_checks: usize,
}

/// Predictions of the base classifier trained once on the initial
/// uniform-candidate confidences, without any partner.
#[derive(Debug, Clone)]
pub struct BaseReport {
    pub train_predictions: Vec<usize>,
    pub test_predictions: Vec<usize>,
}

pub fn run_base_alone(
    dataset: &PartialLabelDataset,
    test_features: &Matrix,
    config: &EngineConfig,
) -> Result<BaseReport> {
    config.validate()?;
    check_test_dim(dataset, test_features)?;
    let state = init_confidence(dataset, BlurParams { k: config.k })?;
    let learner = BaseLearner::prepare(&config.base, dataset)?;
    let fitted = learner.fit(&state.ohat)?;
    let m = fitted.training_output();
    Ok(BaseReport {
        train_predictions: candidate_argmax(&m, dataset.candidates()),
        test_predictions: row_argmax(&fitted.predict_scores(test_features)?),
    })
}

pub fn run_plcp(
    dataset: &PartialLabelDataset,
    test_features: &Matrix,
    config: &EngineConfig,
) -> Result<RunReport> {
    config.validate()?;
    check_test_dim(dataset, test_features)?;
    let y = dataset.candidates();
    let yhat = dataset.noncandidates();
    let k = config.k;
    let singletons = singleton_labels(y);

    let learner = BaseLearner::prepare(&config.base, dataset)?;
    let kernel = config.partner.kernel_spec().resolve(dataset.features())?;
    let ridge = KernelRidge::new(
        Arc::new(kernel.gram(dataset.features())),
        config.partner.lambda,
    )?;

    let mut state = init_confidence(dataset, BlurParams { k })?;
    let mut labels = candidate_argmax(&state.ohat, y);
    let mut history = ChangeHistory::default();
    let mut trajectories = Vec::with_capacity(config.max_iter);
    let mut invariant_checks = 0;
    let mut last_partner = None;
    let mut last_base_scores = None;

    for iteration in 1..=config.max_iter {
        let supervision = if config.binarize_base_supervision {
            binarized_mask_supervision(&state.ohat, &state.p, y)?
        } else {
            state.ohat.clone()
        };
        let fitted = learner.fit(&supervision)?;
        let m = fitted.training_output();
        if config.predict_with_base {
            last_base_scores = Some(fitted.predict_scores(test_features)?);
        }

        let mut p = update_labeling_confidence(&state.p, &m, y, config.alpha)?;
        pin_rows(&mut p, &singletons, 1.0, 0.0);
        let o = blur_labeling(&p, y, k)?;

        let partner = fit_partner_with(&ridge, &yhat, &o, &config.partner)?;
        let mhat = partner.training_output();
        let mut phat = update_noncandidate_confidence(&state.phat, &mhat, &yhat, config.alpha)?;
        pin_rows(&mut phat, &singletons, 0.0, 1.0);
        let ohat = blur_noncandidate(&phat, y, k)?;

        let settled = p == state.p && phat == state.phat;
        state = ConfidenceState { p, phat, o, ohat };
        check_state(&state, y, &yhat)?;
        invariant_checks += 1;

        let next = candidate_argmax(&state.ohat, y);
        let stop = should_stop(&labels, &next, &mut history, config.stop_change_frac) || settled;
        trajectories.push(snapshot(iteration, &history, &next, &state, dataset));
        labels = next;
        last_partner = Some(partner);
        if stop {
            break;
        }
    }

    let final_partner = last_partner.expect("max_iter >= 1");
    let test_predictions = match last_base_scores {
        Some(scores) => row_argmax(&scores),
        None => predict_labels(
            &final_partner,
            &kernel.cross(test_features, dataset.features())?,
        )?,
    };
    Ok(RunReport {
        iterations_run: trajectories.len(),
        trajectories,
        final_state: state,
        final_partner,
        train_predictions: labels,
        test_predictions,
        invariant_checks,
    })
}

fn check_test_dim(dataset: &PartialLabelDataset, test: &Matrix) -> Result<()> {
    if test.ncols() != dataset.feature_dim() {
        return Err(PlcpError::ShapeMismatch {
            context: "test feature dimension",
            expected: (test.nrows(), dataset.feature_dim()),
            got: test.shape(),
        });
    }
    Ok(())
}

fn singleton_labels(y: &Matrix) -> Vec<Option<usize>> {
    y.row_iter()
        .map(|row| {
            let mut it = row.iter().enumerate().filter(|(_, v)| **v == 1.0);
            match (it.next(), it.next()) {
                (Some((j, _)), None) => Some(j),
                _ => None,
            }
        })
        .collect()
}

/// Single-candidate rows carry no ambiguity: hold them at `on` for the
/// label and `off` elsewhere.
fn pin_rows(m: &mut Matrix, singletons: &[Option<usize>], on: f64, off: f64) {
    for (i, label) in singletons.iter().enumerate() {
        if let Some(label) = label {
            for j in 0..m.ncols() {
                m[(i, j)] = if j == *label { on } else { off };
            }
        }
    }
}

fn check_state(state: &ConfidenceState, y: &Matrix, yhat: &Matrix) -> Result<()> {
    for (name, m) in [("O", &state.o), ("Ô", &state.ohat)] {
        for (i, row) in m.row_iter().enumerate() {
            let sum = row.sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(PlcpError::Invariant(format!(
                    "{name} row {i} sums to {sum}"
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if (y[(i, j)] == 0.0) != (*v == 0.0) {
                    return Err(PlcpError::Invariant(format!(
                        "{name}[{i}, {j}] = {v} breaks the candidate support"
                    )));
                }
            }
        }
    }
    for ((p, phat), (y, yhat)) in state
        .p
        .iter()
        .zip(state.phat.iter())
        .zip(y.iter().zip(yhat.iter()))
    {
        if !(*p >= 0.0 && p <= y) {
            return Err(PlcpError::Invariant(format!(
                "P entry {p} outside [0, {y}]"
            )));
        }
        if !(phat >= yhat && *phat <= 1.0) {
            return Err(PlcpError::Invariant(format!(
                "P̂ entry {phat} outside [{yhat}, 1]"
            )));
        }
    }
    Ok(())
}

fn snapshot(
    iteration: usize,
    history: &ChangeHistory,
    labels: &[usize],
    state: &ConfidenceState,
    dataset: &PartialLabelDataset,
) -> IterationSnapshot {
    let y = dataset.candidates();
    let pairs = |m: &Matrix| {
        dataset.ground_truth().map(|truth| {
            truth
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let rival = (0..m.ncols())
                        .filter(|&j| j != t && y[(i, j)] == 1.0)
                        .map(|j| m[(i, j)])
                        .fold(0.0, f64::max);
                    (m[(i, t)], rival)
                })
                .collect()
        })
    };
    IterationSnapshot {
        iteration,
        change_fraction: history.latest().unwrap_or(0.0),
        labels: labels.to_vec(),
        base_labels: candidate_argmax(&state.o, y),
        base_confidence: pairs(&state.o),
        partner_confidence: pairs(&state.ohat),
    }
}
