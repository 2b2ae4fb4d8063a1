//! Trainable multimodal extractive summarization and poster synthesis.
//!
//! The pipeline runs in stages that can be used independently:
//!
//! * [`corpus`] ingests documents and normalizes their embeddings onto the
//!   nonnegative L1 simplex.
//! * [`dsf`] evaluates the deep submodular objective and its marginal gains.
//! * [`selector`] maximizes the objective greedily under a cardinality budget.
//! * [`trainer`] learns the per-dimension weights from gold summaries.
//! * [`metrics`] scores summaries (ROUGE, coverage, diversity, image precision).
//! * [`paraphrase`], [`layout`], [`color`] and [`render`] turn a summary into a
//!   poster, and [`ngo`] scores the resulting layout.

// `!(x > 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod color;
pub mod corpus;
pub mod dsf;
pub mod error;
pub mod layout;
pub mod metrics;
pub mod ngo;
pub mod paraphrase;
pub mod render;
pub mod selector;
pub mod summary;
pub mod trainer;
pub mod weights;

pub use error::{Error, Result};
