//! Dense statevector simulation of small quantum circuits together with the
//! complete pipeline of a least-squares quantum support vector machine:
//! data preprocessing, tomography-free kernel generation, a short-depth HHL
//! solver circuit for the fixed 2×2 non-offset case, classical result
//! readout, and noisy-vs-ideal divergence metrics.
//!
//! Module map:
//!
//! - [`qcore`] — statevector simulator: gates, exact execution, shot
//!   sampling, Monte-Carlo depolarizing noise, reduced density matrices.
//! - [`circuits`] — circuit constructions (training-data oracles, the
//!   optimized HHL circuit, the deeper baseline circuit), controlled-rotation
//!   decompositions, depth accounting, coupling-map validation.
//! - [`preprocess`] — feature extraction, linear mapping with solved
//!   coefficients, L2 normalization, quadrant-aware rotation angles.
//! - [`kernelgen`] — kernel matrices from circuit readout, `F = K + γ⁻¹I`,
//!   and the classical LS-SVM oracle.
//! - [`classify`] — hyperplane parameter readout and test-point labeling.
//! - [`metrics`] — probability distributions, KL/JS divergence, accuracy.
//! - [`data`] — Iris and OCR dataset ingestion, synthetic OCR corpus.
//! - [`pipeline`] — end-to-end orchestration used by the CLI and tests.

pub mod circuits;
pub mod classify;
pub mod data;
pub mod kernelgen;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod qcore;
