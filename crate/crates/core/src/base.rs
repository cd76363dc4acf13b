//! Base partial-label classifiers driven by confidence supervision.
//!
//! Both bases take a row-stochastic supervision matrix (the blurred output
//! handed over from the partner) and return a modeling output `M` on the
//! training set, plus scores for unseen points.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::PartialLabelDataset;
use crate::error::{check_shape, PlcpError, Result};
use crate::kernel::{Kernel, KernelRidge, KernelSolve, KernelSpec};
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaseClassifierKind {
    PlKnn {
        #[serde(default = "default_neighbors")]
        k_neighbors: usize,
    },
    KernelLs {
        #[serde(default)]
        kernel: KernelSpec,
    },
}

fn default_neighbors() -> usize {
    10
}

impl Default for BaseClassifierKind {
    fn default() -> Self {
        BaseClassifierKind::PlKnn {
            k_neighbors: default_neighbors(),
        }
    }
}

impl BaseClassifierKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaseClassifierKind::PlKnn { .. } => "pl-knn",
            BaseClassifierKind::KernelLs { .. } => "kernel-ls",
        }
    }
}

/// The `k` nearest training rows of every training row, self excluded,
/// ordered by distance with ties broken toward the lower index.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    k: usize,
    neighbors: Vec<Vec<usize>>,
}

impl NeighborIndex {
    pub fn build(features: &Matrix, k: usize) -> Result<Self> {
        let n = features.nrows();
        if k == 0 || k >= n {
            return Err(PlcpError::invalid(
                "k_neighbors",
                format!("{k} must be in [1, {n}) for {n} training samples"),
            ));
        }
        let neighbors = (0..n)
            .into_par_iter()
            .map(|i| {
                nearest(
                    features,
                    features.row(i).iter().copied().collect(),
                    k,
                    Some(i),
                )
            })
            .collect();
        Ok(Self { k, neighbors })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }
}

fn nearest(train: &Matrix, query: Vec<f64>, k: usize, skip: Option<usize>) -> Vec<usize> {
    let mut dists: Vec<(f64, usize)> = (0..train.nrows())
        .filter(|&j| Some(j) != skip)
        .map(|j| {
            let d2: f64 = train
                .row(j)
                .iter()
                .zip(&query)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d2, j)
        })
        .collect();
    // stable sort keeps index order among equal distances
    dists.sort_by(|a, b| a.0.total_cmp(&b.0));
    dists.into_iter().take(k).map(|(_, j)| j).collect()
}

/// Per-dataset precomputation reused across mutual-supervision rounds.
#[derive(Debug, Clone)]
pub enum BaseLearner {
    PlKnn {
        index: NeighborIndex,
        features: Matrix,
        candidates: Matrix,
    },
    KernelLs {
        kernel: Kernel,
        ridge: KernelRidge,
        features: Matrix,
    },
}

impl BaseLearner {
    pub fn prepare(kind: &BaseClassifierKind, dataset: &PartialLabelDataset) -> Result<Self> {
        match kind {
            BaseClassifierKind::PlKnn { k_neighbors } => Ok(BaseLearner::PlKnn {
                index: NeighborIndex::build(dataset.features(), *k_neighbors)?,
                features: dataset.features().clone(),
                candidates: dataset.candidates().clone(),
            }),
            BaseClassifierKind::KernelLs { kernel: spec } => {
                let kernel = spec.resolve(dataset.features())?;
                let gram = Arc::new(kernel.gram(dataset.features()));
                Ok(BaseLearner::KernelLs {
                    kernel,
                    ridge: KernelRidge::new(gram, spec.ridge)?,
                    features: dataset.features().clone(),
                })
            }
        }
    }

    fn train_len(&self) -> usize {
        match self {
            BaseLearner::PlKnn { features, .. } | BaseLearner::KernelLs { features, .. } => {
                features.nrows()
            }
        }
    }

    pub fn fit(&self, supervision: &Matrix) -> Result<FittedBase<'_>> {
        let n = self.train_len();
        check_shape(
            "base supervision",
            (n, supervision.ncols()),
            supervision.shape(),
        )?;
        let state = match self {
            BaseLearner::PlKnn { .. } => FitState::PlKnn {
                supervision: supervision.clone(),
            },
            BaseLearner::KernelLs { ridge, .. } => FitState::KernelLs {
                solve: ridge.solve(supervision)?,
            },
        };
        Ok(FittedBase {
            learner: self,
            state,
        })
    }
}

#[derive(Debug, Clone)]
enum FitState {
    PlKnn { supervision: Matrix },
    KernelLs { solve: KernelSolve },
}

#[derive(Debug, Clone)]
pub struct FittedBase<'a> {
    learner: &'a BaseLearner,
    state: FitState,
}

impl FittedBase<'_> {
    /// Modeling output `M` on the training set.
    pub fn training_output(&self) -> Matrix {
        match (self.learner, &self.state) {
            (
                BaseLearner::PlKnn {
                    index, candidates, ..
                },
                FitState::PlKnn { supervision },
            ) => {
                let mut m = Matrix::zeros(supervision.nrows(), supervision.ncols());
                for i in 0..m.nrows() {
                    let mut row = average_rows(supervision, index.neighbors(i));
                    row.component_mul_assign(&candidates.row(i));
                    m.set_row(i, &row);
                }
                m
            }
            (BaseLearner::KernelLs { .. }, FitState::KernelLs { solve }) => solve.training_output(),
            _ => unreachable!("fit state always matches its learner"),
        }
    }

    /// Label scores for unseen points (argmax gives the predicted label).
    pub fn predict_scores(&self, test: &Matrix) -> Result<Matrix> {
        match (self.learner, &self.state) {
            (
                BaseLearner::PlKnn {
                    index, features, ..
                },
                FitState::PlKnn { supervision },
            ) => {
                if test.ncols() != features.ncols() {
                    return Err(PlcpError::ShapeMismatch {
                        context: "test feature dimension",
                        expected: (test.nrows(), features.ncols()),
                        got: test.shape(),
                    });
                }
                let rows: Vec<_> = (0..test.nrows())
                    .into_par_iter()
                    .map(|i| {
                        let nn = nearest(
                            features,
                            test.row(i).iter().copied().collect(),
                            index.k(),
                            None,
                        );
                        average_rows(supervision, &nn)
                    })
                    .collect();
                let mut out = Matrix::zeros(test.nrows(), supervision.ncols());
                for (i, row) in rows.iter().enumerate() {
                    out.set_row(i, row);
                }
                Ok(out)
            }
            (
                BaseLearner::KernelLs {
                    kernel, features, ..
                },
                FitState::KernelLs { solve },
            ) => solve.predict(&kernel.cross(test, features)?),
            _ => unreachable!("fit state always matches its learner"),
        }
    }
}

fn average_rows(m: &Matrix, rows: &[usize]) -> nalgebra::RowDVector<f64> {
    let mut acc = nalgebra::RowDVector::zeros(m.ncols());
    for &r in rows {
        acc += m.row(r);
    }
    acc / rows.len() as f64
}

/// One-shot fit returning the training modeling output.
pub fn fit_predict_base(
    kind: &BaseClassifierKind,
    dataset: &PartialLabelDataset,
    supervision: &Matrix,
) -> Result<Matrix> {
    let learner = BaseLearner::prepare(kind, dataset)?;
    let fitted = learner.fit(supervision)?;
    Ok(fitted.training_output())
}

/// `G(Ô - P)` restricted to the candidates: 1 where `ô_ij ≥ p_ij`.
pub fn binarize_supervision(ohat: &Matrix, p: &Matrix, y: &Matrix) -> Result<Matrix> {
    check_shape("binarize confidence", ohat.shape(), p.shape())?;
    check_shape("binarize candidates", ohat.shape(), y.shape())?;
    Ok(Matrix::from_fn(ohat.nrows(), ohat.ncols(), |i, j| {
        if y[(i, j)] == 1.0 && ohat[(i, j)] - p[(i, j)] >= 0.0 {
            1.0
        } else {
            0.0
        }
    }))
}

/// Binarized supervision used as a replacement candidate mask: each row is
/// spread uniformly over its surviving labels (the full candidate set when
/// none survive).
pub fn binarized_mask_supervision(ohat: &Matrix, p: &Matrix, y: &Matrix) -> Result<Matrix> {
    let mut mask = binarize_supervision(ohat, p, y)?;
    for (i, mut row) in mask.row_iter_mut().enumerate() {
        if row.sum() == 0.0 {
            row.copy_from(&y.row(i));
        }
        let total = row.sum();
        row /= total;
    }
    Ok(mask)
}
