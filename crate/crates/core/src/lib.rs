//! Partial-label learning with a complementary partner classifier.
//!
//! A base partial-label classifier and a partner classifier trained on
//! non-candidate labels supervise each other in alternation. Each side
//! blurs its confidences before handing them over, and the partner is tied
//! to the base through a soft collaborative trace term. The result is a
//! training loop in which samples the base mislabels early can still be
//! corrected in later rounds.
//!
//! Module map:
//!
//! - [`dataset`]: partial-label data and confidence matrices, initialization
//!   and the thresholded blend updates.
//! - [`blur`]: the double-exponential blurring transform.
//! - [`kernel`]: Gram matrices and the closed-form kernel ridge solve.
//! - [`qp`]: the row-wise box/sum-constrained quadratic program.
//! - [`partner`]: the partner classifier (alternating kernel solve / QP).
//! - [`base`]: base classifiers (PL-KNN and kernel least squares).
//! - [`engine`]: the mutual-supervision loop.
//! - [`data`]: CSV ingestion, splitting and the synthetic flip generator.
//! - [`metrics`]: accuracy, correction ratio and friends.
//! - [`experiment`]: config files, seeded runs and sweeps behind the CLI.

pub mod base;
pub mod blur;
pub mod data;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod kernel;
pub mod metrics;
pub mod partner;
pub mod qp;
pub mod rng;

pub use base::{BaseClassifierKind, FittedBase};
pub use blur::BlurParams;
pub use dataset::{ConfidenceState, PartialLabelDataset};
pub use engine::{run_base_alone, run_plcp, EngineConfig, RunReport};
pub use error::{PlcpError, Result};
pub use kernel::{KernelKind, KernelSolve, KernelSpec, SigmaPolicy};
pub use metrics::MetricReport;
pub use partner::{PartnerConfig, PartnerModel};

/// Dense matrix type used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
