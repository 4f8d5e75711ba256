//! Poisoning-robustness harness for multiclass risk classification on
//! EEG-style tabular features.
//!
//! The crate trains from-scratch ensemble classifiers (random forest and
//! SAMME AdaBoost over CART trees), injects label-flipping attacks into the
//! training partition at configurable rates, measures the damage with a full
//! multiclass metric suite, and attributes it to features and electrodes via
//! permutation importance.
//!
//! The `parallel` feature (on by default) enables a rayon-backed execution
//! path; without it everything runs sequentially. Results are identical
//! either way because all randomness is derived per work item from the
//! master seed.

pub mod attacks;
pub mod dataio;
pub mod domain;
pub mod error;
pub mod exec;
pub mod explain;
pub mod harness;
pub mod learners;
pub mod metrics;
pub mod seeding;

pub use error::{Error, Result};
