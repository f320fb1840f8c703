//! Scalar adjective intensity toolkit.
//!
//! Adjectives that describe the same property at different degrees
//! (`damp < moist < wet`) are ranked using vector representations, either by
//! similarity to the most extreme member of the scale ([`ranking::bertsim_rank`])
//! or by similarity to an intensity direction built from `extreme - mild`
//! difference vectors ([`ranking::build_dvec`], [`ranking::dvec_rank`]).
//!
//! The crate also contains the corpus machinery that produces the sentences
//! in which those vectors are extracted (instance collection, substitution,
//! Hearst-pattern filtering, fluency-based selection) and the evaluation
//! code (pairwise accuracy, Kendall's tau-b, Spearman's rho, indirect QA).

pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod ranking;
pub mod scales;
pub mod selection;

pub use error::{Error, Result};
